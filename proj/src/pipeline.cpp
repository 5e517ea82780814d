#include "melcomp/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <thread>

#include "melcomp/error.h"

namespace melcomp {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<Phrase> all_phrases(const std::vector<CorpusEntry>& corpus) {
  std::vector<Phrase> out;
  for (const auto& e : corpus) {
    for (const auto& p : e.melody.phrases) {
      if (!p.notes.empty()) out.push_back(p);
    }
  }
  return out;
}

}  // namespace

std::vector<TrainingSequence> training_sequences(std::span<const Phrase> phrases, const StateAlphabet& alphabet) {
  std::vector<TrainingSequence> out;
  out.reserve(phrases.size());
  for (const auto& phrase : phrases) {
    TrainingSequence seq;
    for (const auto& n : phrase.notes) {
      auto s = alphabet.feature() == Feature::kPitch ? alphabet.find_pitch(n.pitch) : alphabet.find_duration(n.duration);
      if (!s) throw std::invalid_argument("note state missing from alphabet");
      seq.push_back({*s, phrase.start + n.onset});
    }
    out.push_back(std::move(seq));
  }
  return out;
}

ModelFile train_model(const std::vector<CorpusEntry>& corpus, const GeneratorConfig& config) {
  config.validate();
  const auto phrases = all_phrases(corpus);
  if (phrases.empty()) throw std::invalid_argument("corpus contains no notes");

  std::vector<int> pitches;
  std::vector<RationalTime> durations;
  for (const auto& p : phrases) {
    for (const auto& n : p.notes) {
      pitches.push_back(n.pitch.value_or(kRestPitch));
      durations.push_back(n.duration);
    }
  }
  auto pitch_alphabet = StateAlphabet::for_pitches(std::move(pitches));
  auto duration_alphabet = StateAlphabet::for_durations(std::move(durations));

  ModelFile model;
  model.config = config;
  model.pitch_model = train(training_sequences(phrases, pitch_alphabet), config.order, pitch_alphabet);
  model.duration_model = train(training_sequences(phrases, duration_alphabet), config.order, duration_alphabet);

  ContourOptions options;
  options.lowpass_k = config.lowpass_k;
  options.max_clusters = config.max_clusters;
  options.gamma = config.gamma;
  model.pitch_contour = learn_contour(phrases, Feature::kPitch, options);
  model.rhythm_contour = learn_contour(phrases, Feature::kDuration, options);

  for (const auto& e : corpus) model.corpus.push_back({e.file, e.sha256});
  return model;
}

void print_training_summary(std::ostream& out, const ModelFile& model) {
  const auto& cfg = model.config;
  out << "order " << cfg.order << ", " << model.pitch_model.alphabet().size() << " pitch states, "
      << model.duration_model.alphabet().size() << " duration states\n";
  out << "max context rows per off-beat: pitch " << model_size(model.pitch_model.alphabet().size(), cfg.order)
      << ", duration " << model_size(model.duration_model.alphabet().size(), cfg.order) << "\n";
  out << "stored rows: pitch " << model.pitch_model.rows().size() << ", duration "
      << model.duration_model.rows().size() << "\n";
  for (const auto* contour : {&model.pitch_contour, &model.rhythm_contour}) {
    out << (contour->feature == Feature::kPitch ? "pitch" : "rhythm") << " contour clusters (selected "
        << contour->selected_cluster << " by argmax q, argmin q would be " << contour->argmin_cluster << ")\n";
    out << "  id   size      width    quality\n";
    for (std::size_t i = 0; i < contour->diagnostics.size(); ++i) {
      const auto& d = contour->diagnostics[i];
      char line[128];
      std::snprintf(line, sizeof line, "  %-3zu %5zu %10.4f %10.4f%s\n", i, d.size, d.width, d.quality,
                    i == contour->selected_cluster ? "  *" : "");
      out << line;
    }
  }
}

std::vector<ComposedMelody> compose_melodies(const ModelFile& model, const ComposeRequest& request) {
  if (request.count < 0) throw std::invalid_argument("count must be non-negative");
  GeneratorConfig config = model.config;
  config.bars = request.bars;
  if (request.sigma2_pitch) config.sigma2_pitch = *request.sigma2_pitch;
  if (request.sigma2_rhythm) config.sigma2_rhythm = *request.sigma2_rhythm;
  config.validate();

  const TransitionModel pitch = request.parametric ? model.pitch_model : model.pitch_model.collapse_offbeats();
  const TransitionModel duration =
      request.parametric ? model.duration_model : model.duration_model.collapse_offbeats();
  const ComposerModels models{&pitch, &duration, &model.pitch_contour, &model.rhythm_contour};
  const ComposeOptions options{request.follow_contours, request.parametric};

  const auto n = static_cast<std::size_t>(request.count);
  std::vector<ComposedMelody> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const std::uint64_t seed = request.seed + i;
      try {
        Rng rng(seed);
        results[i] = {seed, compose_phrase(models, config, rng, options)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(n, 1));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const SearchExhausted& e) {
      throw SearchExhausted("seed " + std::to_string(request.seed + i) + ": " + e.what());
    }
  }
  return results;
}

void write_melody_csv(std::ostream& out, const Phrase& phrase) {
  out << "index,onset,duration,pitch\n";
  for (std::size_t i = 0; i < phrase.notes.size(); ++i) {
    const auto& n = phrase.notes[i];
    out << i << ',' << n.onset.to_string() << ',' << n.duration.to_string() << ','
        << (n.pitch ? std::to_string(*n.pitch) : std::string()) << '\n';
  }
}

void write_cluster_csv(std::ostream& out, const ContourModel& contour) {
  out << "cluster_id,size,width,quality,selected\n";
  for (std::size_t i = 0; i < contour.diagnostics.size(); ++i) {
    const auto& d = contour.diagnostics[i];
    out << i << ',' << d.size << ',' << num(d.width) << ',' << num(d.quality) << ','
        << (i == contour.selected_cluster ? "true" : "false") << '\n';
  }
}

void write_contour_csv(std::ostream& out, const ContourModel& contour) {
  out << "cluster_id,t,value\n";
  const std::size_t n = contour.samples;
  for (std::size_t c = 0; c < contour.diagnostics.size(); ++c) {
    const auto full = reconstruct(contour.diagnostics[c].mean_spectrum, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      out << c << ',' << num(static_cast<double>(i) / static_cast<double>(n)) << ',' << num(full[n + i]) << '\n';
    }
  }
}

void print_model_summary(std::ostream& out, const ModelFile& model) {
  out << "model file version " << model.version << ", trained on " << model.corpus.size() << " file(s)\n";
  print_training_summary(out, model);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

}  // namespace melcomp
