// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exits nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fixtures.h"
#include "melcomp/composer.h"
#include "melcomp/contour.h"
#include "melcomp/corpus.h"
#include "melcomp/fft.h"
#include "melcomp/markov.h"
#include "melcomp/midi.h"
#include "melcomp/model_file.h"
#include "melcomp/pipeline.h"

namespace melcomp {
namespace {

struct Outcome {
  enum Kind { kPass, kFail, kSkip } kind;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::kFail, std::move(d)}; }

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome table_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  auto doc = [](const std::string& s) {
    TrainingSequence seq;
    for (std::size_t i = 0; i < s.size(); ++i) {
      seq.push_back({static_cast<Symbol>(s[i] - 'A'), RationalTime(static_cast<std::int64_t>(i))});
    }
    return seq;
  };
  const std::vector<TrainingSequence> docs = {doc("ABBA"), doc("ACDC"), doc("ACAB")};
  const TransitionModel m = train(docs, 2, StateAlphabet::for_pitches({0, 1, 2, 3}));

  const Symbol _ = kBlank, A = 0, B = 1, C = 2, D = 3;
  const std::map<std::vector<Symbol>, std::vector<std::uint64_t>> table = {
      {{_, _}, {3, 0, 0, 0}}, {{_, A}, {0, 1, 2, 0}}, {{A, B}, {0, 1, 0, 0}}, {{B, B}, {1, 0, 0, 0}},
      {{A, C}, {1, 0, 0, 1}}, {{C, D}, {0, 0, 1, 0}}, {{C, A}, {0, 1, 0, 0}},
  };
  std::size_t rows = 0;
  for (const auto& [key, row] : m.rows()) {
    if (key.context.size() != 2) continue;
    ++rows;
    const auto it = table.find(key.context);
    if (key.offbeat != RationalTime(0) || it == table.end()) return fail("unexpected row");
    if (row.counts != it->second) return fail("count mismatch");
    const auto total = row.total();
    for (std::size_t i = 0; i < row.counts.size(); ++i) {
      // p = count / total as an exact rational; the stored double must be
      // its correctly rounded value.
      if (row.probabilities[i] != static_cast<double>(row.counts[i]) / static_cast<double>(total)) {
        return fail("probability mismatch");
      }
    }
  }
  if (rows != table.size()) return fail(std::to_string(rows) + " bigram rows");
  if (m.transition_vector(RationalTime(0), std::vector<Symbol>{B, A}) != std::vector<double>(4, 0.0)) {
    return fail("terminal bigram has a row");
  }
  const double dt = seconds_since(t0);
  if (dt >= 1.0) return fail(fmt("%.3f s", dt));
  return pass("7 rows exact, " + fmt("%.4f s", dt));
}

Outcome memory_arithmetic() {
  const auto v = model_size(29, 4);
  if (v != 732540u) return fail(std::to_string(v));
  return pass("model_size(29, 4) = 732540");
}

Outcome length_and_cadence() {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelFile model = train_model(testing::as_corpus(testing::scale_walk_phrases(2024, 20)), GeneratorConfig{});
  ComposeRequest req;
  req.bars = model.config.bars;
  req.count = 500;
  req.seed = 0;
  const auto melodies = compose_melodies(model, req);
  const RationalTime total(4 * req.bars);
  int bad_length = 0, bad_cadence = 0, bad_replay = 0;
  for (const auto& m : melodies) {
    if (m.phrase.total_duration() != total) ++bad_length;
    const auto& last = m.phrase.notes.back();
    if (last.is_rest() || !testing::is_tonic_triad(*last.pitch)) ++bad_cadence;
    if (!replay_valid(m.phrase, model.pitch_model, model.duration_model)) ++bad_replay;
  }
  const double dt = seconds_since(t0);
  const std::string detail = std::to_string(melodies.size()) + " phrases, failures: length " +
                             std::to_string(bad_length) + ", cadence " + std::to_string(bad_cadence) + ", replay " +
                             std::to_string(bad_replay) + fmt(", %.2f s", dt);
  if (melodies.size() != 500 || bad_length + bad_cadence + bad_replay > 0 || dt >= 60.0) return fail(detail);
  return pass(detail);
}

Outcome deterministic_chain() {
  const Phrase chain = testing::deterministic_chain_phrase();
  const ModelFile model = train_model(testing::as_corpus({chain}), GeneratorConfig{});
  for (const auto* m : {&model.pitch_model, &model.duration_model}) {
    for (const auto& [key, row] : m->rows()) {
      int successors = 0;
      for (auto c : row.counts) successors += c > 0;
      if (successors != 1) return fail("fixture has a branching row");
    }
  }
  ComposeRequest req;
  req.count = 10;
  req.follow_contours = false;
  for (const auto& m : compose_melodies(model, req)) {
    if (m.phrase.notes != chain.notes) return fail("seed " + std::to_string(m.seed) + " diverged");
  }
  return pass("10 seeds reproduce the training phrase");
}

double variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size());
}

Outcome fft_energy() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 4.0);
  double worst_var = 0.0, worst_trip = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> curve(kDefaultCurveSamples);
    // Random walks have most of their energy at low frequencies but not all.
    double level = 65.0;
    for (auto& v : curve) v = (level += g(rng) * 0.3);
    const SampledCurve mirrored = mirror({curve});
    const ContourFeature f = extract_feature(mirrored, kDefaultLowpassK);
    worst_var = std::max(worst_var, std::abs(variance(reconstruct(f.coeffs, mirrored.size())) - variance(mirrored.samples)));

    const auto back = fft::inverse_real(fft::forward_real(mirrored.samples), mirrored.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
      worst_trip = std::max(worst_trip, std::abs(back[k] / static_cast<double>(back.size()) - mirrored.samples[k]));
    }
  }
  for (double c : {0.0, 5.0, 62.0, -3.25}) {
    const SampledCurve mirrored = mirror({std::vector<double>(kDefaultCurveSamples, c)});
    const auto f = extract_feature(mirrored, kDefaultLowpassK);
    for (double v : reconstruct(f.coeffs, mirrored.size())) {
      if (v != c) return fail(fmt("constant %.2f came back as %.17g", c, v));
    }
  }
  const std::string detail = fmt("max variance error %.2e, max round-trip error %.2e, constants exact", worst_var, worst_trip);
  if (worst_var >= 1e-6 || worst_trip >= 1e-9) return fail(detail);
  return pass(detail);
}

Outcome clustering_selection() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Phrase> phrases;
  for (int i = 0; i < 30; ++i) {
    const double phase = 0.3 * u(rng), offset = 62 + 4 * u(rng);
    std::vector<std::pair<std::optional<int>, RationalTime>> notes;
    for (int k = 0; k < 16; ++k) {
      const double v = offset + 6.0 * std::sin(2.0 * std::numbers::pi * k / 16.0 + phase);
      notes.push_back({static_cast<int>(std::lround(v)), RationalTime(1)});
    }
    phrases.push_back(make_phrase(notes, "sine", i));
  }
  for (int i = 0; i < 30; ++i) {
    const double slope = 1.0 + 0.2 * u(rng), base = 55 + 4 * u(rng);
    std::vector<std::pair<std::optional<int>, RationalTime>> notes;
    for (int k = 0; k < 16; ++k) notes.push_back({static_cast<int>(std::lround(base + slope * k)), RationalTime(1)});
    phrases.push_back(make_phrase(notes, "ramp", i));
  }
  ContourOptions options;
  options.max_clusters = 2;
  const ContourModel m = learn_contour(phrases, Feature::kPitch, options);
  if (m.diagnostics.size() != 2) return fail(std::to_string(m.diagnostics.size()) + " clusters");
  int wrong = 0;
  for (std::size_t i = 0; i < 60; ++i) {
    const std::size_t family_label = m.assignment[i < 30 ? 0 : 30];
    if (m.assignment[i] != family_label) ++wrong;
  }
  if (m.assignment[0] == m.assignment[30]) wrong = 30;

  double max_size = 0.0, max_damped = 0.0;
  for (const auto& d : m.diagnostics) {
    max_size = std::max(max_size, static_cast<double>(d.size));
    max_damped = std::max(max_damped, std::cbrt(d.width));
  }
  double q_err = 0.0;
  std::size_t best = 0;
  for (std::size_t c = 0; c < m.diagnostics.size(); ++c) {
    const auto& d = m.diagnostics[c];
    const double q = d.size / max_size + (max_damped > 0 ? std::cbrt(d.width) / max_damped : 0.0);
    q_err = std::max(q_err, std::abs(q - d.quality));
    if (d.quality > m.diagnostics[best].quality) best = c;
  }
  const std::string detail = std::to_string(wrong) + " misassigned, q error " + fmt("%.2e", q_err) +
                             ", selected " + std::to_string(m.selected_cluster);
  if (wrong != 0 || q_err > 1e-9 || m.selected_cluster != best) return fail(detail);
  return pass(detail);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

Outcome contour_steering() {
  const auto t0 = std::chrono::steady_clock::now();
  GeneratorConfig config;
  config.order = 2;
  const ModelFile model = train_model(testing::as_corpus(testing::arch_phrases(99, 40)), config);
  const auto& target = model.pitch_contour.curve.samples;

  auto mean_corr = [&](bool follow) {
    ComposeRequest req;
    req.count = 200;
    req.seed = 1000;
    req.follow_contours = follow;
    double sum = 0.0;
    const auto melodies = compose_melodies(model, req);
    for (const auto& m : melodies) {
      sum += pearson(step_curve(m.phrase, Feature::kPitch, model.pitch_contour.samples).samples, target);
    }
    return sum / static_cast<double>(melodies.size());
  };
  const double on = mean_corr(true);
  const double off = mean_corr(false);
  const double dt = seconds_since(t0);
  const std::string detail = fmt("mean r filtered %.3f, unfiltered %.3f, margin %.3f", on, off, on - off) +
                             fmt(", %.1f s", dt);
  if (!(on - off > 0.1) || dt >= 300.0) return fail(detail);
  return pass(detail);
}

Outcome determinism() {
  GeneratorConfig config;
  config.order = 3;
  std::vector<std::string> models;
  std::vector<std::vector<std::vector<std::uint8_t>>> midis;
  for (int run = 0; run < 2; ++run) {
    const ModelFile model = train_model(testing::as_corpus(testing::scale_walk_phrases(8, 12)), config);
    models.push_back(model_to_json(model));
    ComposeRequest req;
    req.count = 8;
    req.seed = 7;
    midis.emplace_back();
    for (const auto& m : compose_melodies(model_from_json(models.back()), req)) {
      midis.back().push_back(write_midi(m.phrase));
    }
  }
  if (models[0] != models[1]) return fail("model files differ");
  if (midis[0] != midis[1]) return fail("MIDI outputs differ");
  return pass("model file and 8 MIDI files byte-identical");
}

Outcome mtc_fs_stats() {
  const char* dir = std::getenv("MELCOMP_MTC_FS_DIR");
  if (dir == nullptr || !std::filesystem::is_directory(dir)) {
    return {Outcome::kSkip, "MTC-FS not available (set MELCOMP_MTC_FS_DIR to a directory of major-key files)"};
  }
  const IngestResult r = ingest_directory(dir, {kMetaText, kMetaMarker});
  std::vector<Melody> melodies;
  for (const auto& e : r.entries) melodies.push_back(e.melody);
  const CorpusStats s = corpus_stats(melodies);
  const std::string detail = std::to_string(s.songs) + " songs, " + std::to_string(s.phrases) + " phrases";
  if (s.songs != 378 || s.phrases != 2147) return fail(detail);
  return pass(detail);
}

}  // namespace
}  // namespace melcomp

int main() {
  using namespace melcomp;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"1 bigram count table", table_oracle},
      {"2 context memory arithmetic", memory_arithmetic},
      {"3 exact length, cadence and replay over 500 seeds", length_and_cadence},
      {"4 deterministic chain reproduction", deterministic_chain},
      {"5 low-pass energy compensation and FFT round trip", fft_energy},
      {"6 contour clustering and selection", clustering_selection},
      {"7 contour steering ablation", contour_steering},
      {"8 byte-identical reruns", determinism},
      {"9 MTC-FS corpus statistics", mtc_fs_stats},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.kind == Outcome::kPass ? "PASS" : o.kind == Outcome::kFail ? "FAIL" : "SKIP";
    if (o.kind == Outcome::kFail) ++failures;
    std::printf("[%s] %s: %s\n", tag, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
