#include "cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "melcomp/error.h"
#include "melcomp/midi.h"
#include "melcomp/pipeline.h"

namespace melcomp::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> parse_marker_types(const std::string& list) {
  std::vector<std::uint8_t> types;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    int v = 0;
    try {
      v = std::stoi(item, nullptr, 0);
    } catch (const std::exception&) {
      throw ParseError("bad marker type '" + item + "'");
    }
    if (v < 0 || v > 0x7F) throw ParseError("marker type " + item + " is not a meta event type");
    types.push_back(static_cast<std::uint8_t>(v));
  }
  return types;
}

void write_binary(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

struct IngestArgs {
  std::string dir;
  std::string corpus_out = "corpus.json";
  std::string report_out = "corpus_report.csv";
  std::string marker_types = "1,6";
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  IngestResult result = ingest_directory(a.dir, parse_marker_types(a.marker_types));
  std::ofstream report(a.report_out);
  if (!report) throw ParseError("cannot write " + a.report_out);
  write_report_csv(report, result.report);

  std::size_t polyphonic = 0;
  for (const auto& row : result.report) {
    if (row.status == FileStatus::kSkippedPolyphonic) ++polyphonic;
    if (row.status != FileStatus::kOk) err << row.file << ": " << row.message << "\n";
  }
  out << result.report.size() << " file(s), " << result.usable() << " usable, " << polyphonic
      << " skipped as polyphonic\n";
  if (result.usable() == 0) {
    err << "no usable MIDI files in " << a.dir << "\n";
    return kExitInput;
  }
  write_text_file(a.corpus_out, corpus_to_json(result.entries));

  std::vector<Melody> melodies;
  for (const auto& e : result.entries) melodies.push_back(e.melody);
  const CorpusStats stats = corpus_stats(melodies);
  out << stats.songs << " songs, " << stats.phrases << " phrases, " << stats.mean_phrases_per_song
      << " phrases/song, " << stats.mean_phrase_len_bars << " bars/phrase\n";
  return kExitOk;
}

struct TrainArgs {
  std::string corpus;
  std::string model_out = "model.json";
  GeneratorConfig config;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto corpus = corpus_from_json(read_text_file(a.corpus));
  if (corpus.empty()) throw ParseError("corpus " + a.corpus + " is empty");
  const ModelFile model = train_model(corpus, a.config);
  write_text_file(a.model_out, model_to_json(model));
  print_training_summary(out, model);
  return kExitOk;
}

struct ComposeArgs {
  std::string model;
  std::string out_dir = ".";
  ComposeRequest request;
  double sigma2_pitch = 0.0;
  double sigma2_rhythm = 0.0;
};

int cmd_compose(ComposeArgs a, std::ostream& out) {
  const ModelFile model = model_from_json(read_text_file(a.model));
  if (a.sigma2_pitch > 0.0) a.request.sigma2_pitch = a.sigma2_pitch;
  if (a.sigma2_rhythm > 0.0) a.request.sigma2_rhythm = a.sigma2_rhythm;
  const auto melodies = compose_melodies(model, a.request);
  fs::create_directories(a.out_dir);
  for (const auto& m : melodies) {
    const std::string stem = "melody_" + std::to_string(m.seed);
    write_binary(fs::path(a.out_dir) / (stem + ".mid"), write_midi(m.phrase));
    std::ofstream csv(fs::path(a.out_dir) / (stem + ".csv"));
    write_melody_csv(csv, m.phrase);
    out << stem << ": " << m.phrase.notes.size() << " notes, " << m.phrase.total_duration().to_string()
        << " counts\n";
  }
  return kExitOk;
}

struct InspectArgs {
  std::string model;
  std::string out_dir = ".";
};

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  const ModelFile model = model_from_json(read_text_file(a.model));
  fs::create_directories(a.out_dir);
  const std::pair<const ContourModel*, std::string> contours[] = {{&model.pitch_contour, "pitch"},
                                                                  {&model.rhythm_contour, "rhythm"}};
  for (const auto& [contour, name] : contours) {
    std::ofstream clusters(fs::path(a.out_dir) / ("clusters_" + name + ".csv"));
    write_cluster_csv(clusters, *contour);
    std::ofstream curves(fs::path(a.out_dir) / ("contour_" + name + ".csv"));
    write_contour_csv(curves, *contour);
  }
  print_model_summary(out, model);
  return kExitOk;
}

void add_config_flags(CLI::App& cmd, GeneratorConfig& c) {
  cmd.add_option("--order", c.order, "Markov order")->check(CLI::PositiveNumber);
  cmd.add_option("--bars", c.bars, "Default phrase length in 4/4 bars")->check(CLI::PositiveNumber);
  cmd.add_option("--sigma2-pitch", c.sigma2_pitch, "Pitch Gaussian variance (semitones^2)")->check(CLI::PositiveNumber);
  cmd.add_option("--sigma2-rhythm", c.sigma2_rhythm, "Rhythm Gaussian variance (quarters^2)")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--gamma", c.gamma, "Width damping exponent of the cluster quality")->check(CLI::PositiveNumber);
  cmd.add_option("--lowpass-k", c.lowpass_k, "Retained Fourier coefficients")->check(CLI::PositiveNumber);
  cmd.add_option("--max-clusters", c.max_clusters, "Number of contour clusters")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", c.seed, "Seed recorded in the model");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn phrase style from MIDI melodies and compose new phrases", "melcomp"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse a directory of MIDI files into a corpus archive");
  ingest_cmd->add_option("dir", ingest.dir, "Directory of .mid files")->required();
  ingest_cmd->add_option("-o,--out", ingest.corpus_out, "Corpus archive (JSON)");
  ingest_cmd->add_option("--report", ingest.report_out, "Per-file report (CSV)");
  ingest_cmd->add_option("--marker-types", ingest.marker_types, "Meta event types marking phrases, e.g. 1,6");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train Markov models and contours");
  train_cmd->add_option("corpus", train.corpus, "Corpus archive from ingest")->required();
  train_cmd->add_option("-o,--out", train.model_out, "Model file (JSON)");
  add_config_flags(*train_cmd, train.config);

  ComposeArgs compose;
  auto* compose_cmd = app.add_subcommand("compose", "Compose phrases from a model file");
  compose_cmd->add_option("model", compose.model, "Model file")->required();
  compose_cmd->add_option("--bars", compose.request.bars, "Phrase length in 4/4 bars")->check(CLI::PositiveNumber);
  compose_cmd->add_option("--count", compose.request.count, "Number of phrases")->check(CLI::NonNegativeNumber);
  compose_cmd->add_option("--seed", compose.request.seed, "First seed; phrase i uses seed + i");
  compose_cmd->add_option("--out-dir", compose.out_dir, "Output directory");
  compose_cmd->add_option("--sigma2-pitch", compose.sigma2_pitch, "Override pitch variance")
      ->check(CLI::PositiveNumber);
  compose_cmd->add_option("--sigma2-rhythm", compose.sigma2_rhythm, "Override rhythm variance")
      ->check(CLI::PositiveNumber);
  bool no_contour = false;
  bool no_parametric = false;
  compose_cmd->add_flag("--no-contour", no_contour, "Disable Gaussian contour filters");
  compose_cmd->add_flag("--no-parametric", no_parametric, "Merge all off-beats into one bin");

  InspectArgs inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Dump cluster diagnostics and contour curves");
  inspect_cmd->add_option("model", inspect.model, "Model file")->required();
  inspect_cmd->add_option("--out-dir", inspect.out_dir, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out, err);
    if (*train_cmd) return cmd_train(train, out);
    if (*compose_cmd) {
      compose.request.follow_contours = !no_contour;
      compose.request.parametric = !no_parametric;
      return cmd_compose(compose, out);
    }
    if (*inspect_cmd) return cmd_inspect(inspect, out);
  } catch (const SchemaError& e) {
    err << "schema error at " << e.what() << "\n";
    return kExitSchema;
  } catch (const SearchExhausted& e) {
    err << "search exhausted: " << e.what() << "\n";
    return kExitSearchExhausted;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace melcomp::cli
