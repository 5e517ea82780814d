#include "melcomp/model_file.h"

#include <cmath>

#include "json_util.h"

namespace melcomp {

namespace {

using nlohmann::json;
using namespace json_util;

json complex_array(const std::vector<std::complex<double>>& values) {
  json out = json::array();
  for (const auto& c : values) out.push_back(json::array({c.real(), c.imag()}));
  return out;
}

std::vector<std::complex<double>> read_complex_array(const json& j, const std::string& path) {
  std::vector<std::complex<double>> out;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) {
    const std::string p = child(path, i);
    if (!j[i].is_array() || j[i].size() != 2) throw SchemaError(p, "expected [re, im]");
    out.emplace_back(number(j[i][0], child(p, 0)), number(j[i][1], child(p, 1)));
  }
  return out;
}

std::vector<double> read_numbers(const json& j, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) out.push_back(number(j[i], child(path, i)));
  return out;
}

std::size_t read_size(const json& j, const std::string& path) {
  const auto v = integer(j, path);
  if (v < 0) throw SchemaError(path, "expected non-negative integer");
  return static_cast<std::size_t>(v);
}

json config_to_json(const GeneratorConfig& c) {
  return {{"order", c.order},
          {"bars", c.bars},
          {"sigma2_pitch", c.sigma2_pitch},
          {"sigma2_rhythm", c.sigma2_rhythm},
          {"gamma", c.gamma},
          {"lowpass_k", c.lowpass_k},
          {"max_clusters", c.max_clusters},
          {"seed", c.seed}};
}

GeneratorConfig config_from_json(const json& j, const std::string& path) {
  GeneratorConfig c;
  c.order = static_cast<int>(integer(field(j, "order", path), child(path, "order")));
  c.bars = static_cast<int>(integer(field(j, "bars", path), child(path, "bars")));
  c.sigma2_pitch = number(field(j, "sigma2_pitch", path), child(path, "sigma2_pitch"));
  c.sigma2_rhythm = number(field(j, "sigma2_rhythm", path), child(path, "sigma2_rhythm"));
  c.gamma = number(field(j, "gamma", path), child(path, "gamma"));
  c.lowpass_k = read_size(field(j, "lowpass_k", path), child(path, "lowpass_k"));
  c.max_clusters = read_size(field(j, "max_clusters", path), child(path, "max_clusters"));
  const json& seed = field(j, "seed", path);
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw SchemaError(child(path, "seed"), "expected unsigned integer");
  }
  c.seed = seed.get<std::uint64_t>();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
  return c;
}

json alphabet_to_json(const StateAlphabet& a) {
  json states = json::array();
  if (a.feature() == Feature::kPitch) {
    for (int p : a.pitches()) states.push_back(p == kRestPitch ? json(nullptr) : json(p));
  } else {
    for (const auto& d : a.durations()) states.push_back(d.to_string());
  }
  return states;
}

StateAlphabet alphabet_from_json(const json& j, Feature feature, const std::string& path) {
  array(j, path);
  try {
    if (feature == Feature::kPitch) {
      std::vector<int> pitches;
      for (std::size_t i = 0; i < j.size(); ++i) {
        pitches.push_back(j[i].is_null() ? kRestPitch : static_cast<int>(integer(j[i], child(path, i))));
      }
      auto a = StateAlphabet::for_pitches(pitches);
      if (a.size() != pitches.size()) throw SchemaError(path, "states must be unique");
      return a;
    }
    std::vector<RationalTime> durations;
    for (std::size_t i = 0; i < j.size(); ++i) durations.push_back(rational(j[i], child(path, i)));
    auto a = StateAlphabet::for_durations(durations);
    if (a.size() != durations.size()) throw SchemaError(path, "states must be unique");
    return a;
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, e.what());
  }
}

json markov_to_json(const TransitionModel& m) {
  json rows = json::array();
  for (const auto& [key, row] : m.rows()) {
    rows.push_back({{"offbeat", key.offbeat.to_string()},
                    {"context", key.context},
                    {"counts", row.counts},
                    {"probs", row.probabilities}});
  }
  return {{"order", m.order()}, {"rows", std::move(rows)}};
}

TransitionModel markov_from_json(const json& j, StateAlphabet alphabet, const std::string& path) {
  const auto order = integer(field(j, "order", path), child(path, "order"));
  if (order < 1) throw SchemaError(child(path, "order"), "order must be >= 1");
  TransitionModel model(std::move(alphabet), static_cast<int>(order));
  const std::string rows_path = child(path, "rows");
  const json& rows = array(field(j, "rows", path), rows_path);
  const std::size_t n = model.alphabet().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string rp = child(rows_path, i);
    const json& r = rows[i];
    ContextKey key;
    key.offbeat = rational(field(r, "offbeat", rp), child(rp, "offbeat"));
    const json& ctx = array(field(r, "context", rp), child(rp, "context"));
    bool seen_symbol = false;
    for (std::size_t c = 0; c < ctx.size(); ++c) {
      const auto s = integer(ctx[c], child(child(rp, "context"), c));
      if (s < kBlank || s >= static_cast<std::int64_t>(n)) {
        throw SchemaError(child(child(rp, "context"), c), "symbol outside alphabet");
      }
      if (s == kBlank && seen_symbol) throw SchemaError(child(rp, "context"), "blanks must form a prefix");
      seen_symbol = seen_symbol || s != kBlank;
      key.context.push_back(static_cast<Symbol>(s));
    }
    if (key.context.empty() || key.context.size() > static_cast<std::size_t>(order)) {
      throw SchemaError(child(rp, "context"), "context length must be 1..order");
    }
    if (key.offbeat < RationalTime(0) || key.offbeat >= RationalTime(1)) {
      throw SchemaError(child(rp, "offbeat"), "off-beat outside [0, 1)");
    }
    TransitionRow row;
    const json& counts = array(field(r, "counts", rp), child(rp, "counts"));
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (!counts[c].is_number_unsigned()) throw SchemaError(child(child(rp, "counts"), c), "expected count");
      row.counts.push_back(counts[c].get<std::uint64_t>());
    }
    row.probabilities = read_numbers(field(r, "probs", rp), child(rp, "probs"));
    if (row.counts.size() != n || row.probabilities.size() != n) {
      throw SchemaError(rp, "row length does not match alphabet size");
    }
    double sum = 0.0;
    for (double p : row.probabilities) {
      if (p < 0.0) throw SchemaError(child(rp, "probs"), "negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw SchemaError(child(rp, "probs"), "row does not sum to 1");
    model.set_row(key, std::move(row));
  }
  return model;
}

json contour_to_json(const ContourModel& c) {
  json clusters = json::array();
  for (const auto& d : c.diagnostics) {
    clusters.push_back({{"size", d.size},
                        {"width", d.width},
                        {"quality", d.quality},
                        {"mean_spectrum", complex_array(d.mean_spectrum)}});
  }
  return {{"samples", c.samples},
          {"selected_cluster", c.selected_cluster},
          {"argmin_cluster", c.argmin_cluster},
          {"mean_spectrum", complex_array(c.mean_spectrum)},
          {"curve", c.curve.samples},
          {"clusters", std::move(clusters)},
          {"assignment", c.assignment},
          {"phrase_refs", c.phrase_refs}};
}

ContourModel contour_from_json(const json& j, Feature feature, const std::string& path) {
  ContourModel c;
  c.feature = feature;
  c.samples = read_size(field(j, "samples", path), child(path, "samples"));
  c.selected_cluster = read_size(field(j, "selected_cluster", path), child(path, "selected_cluster"));
  c.argmin_cluster = read_size(field(j, "argmin_cluster", path), child(path, "argmin_cluster"));
  c.mean_spectrum = read_complex_array(field(j, "mean_spectrum", path), child(path, "mean_spectrum"));
  c.curve.samples = read_numbers(field(j, "curve", path), child(path, "curve"));
  if (c.samples == 0 || c.curve.size() != c.samples) throw SchemaError(child(path, "curve"), "expected `samples` values");

  const std::string cp = child(path, "clusters");
  const json& clusters = array(field(j, "clusters", path), cp);
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const std::string p = child(cp, i);
    ClusterDiagnostics d;
    d.size = read_size(field(clusters[i], "size", p), child(p, "size"));
    d.width = number(field(clusters[i], "width", p), child(p, "width"));
    d.quality = number(field(clusters[i], "quality", p), child(p, "quality"));
    d.mean_spectrum = read_complex_array(field(clusters[i], "mean_spectrum", p), child(p, "mean_spectrum"));
    c.diagnostics.push_back(std::move(d));
  }
  if (c.selected_cluster >= c.diagnostics.size()) {
    throw SchemaError(child(path, "selected_cluster"), "no such cluster");
  }
  if (c.argmin_cluster >= c.diagnostics.size()) throw SchemaError(child(path, "argmin_cluster"), "no such cluster");

  const std::string ap = child(path, "assignment");
  const json& assignment = array(field(j, "assignment", path), ap);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto label = read_size(assignment[i], child(ap, i));
    if (label >= c.diagnostics.size()) throw SchemaError(child(ap, i), "no such cluster");
    c.assignment.push_back(label);
  }
  const std::string rp = child(path, "phrase_refs");
  const json& refs = array(field(j, "phrase_refs", path), rp);
  for (std::size_t i = 0; i < refs.size(); ++i) c.phrase_refs.push_back(string(refs[i], child(rp, i)));
  if (c.phrase_refs.size() != c.assignment.size()) throw SchemaError(rp, "length differs from assignment");
  return c;
}

}  // namespace

std::string model_to_json(const ModelFile& model) {
  json corpus = json::array();
  for (const auto& f : model.corpus) corpus.push_back({{"file", f.file}, {"sha256", f.sha256}});
  json root{
      {"version", model.version},
      {"config", config_to_json(model.config)},
      {"alphabets",
       {{"pitch", alphabet_to_json(model.pitch_model.alphabet())},
        {"duration", alphabet_to_json(model.duration_model.alphabet())}}},
      {"markov", {{"pitch", markov_to_json(model.pitch_model)}, {"duration", markov_to_json(model.duration_model)}}},
      {"contours", {{"pitch", contour_to_json(model.pitch_contour)}, {"rhythm", contour_to_json(model.rhythm_contour)}}},
      {"corpus", std::move(corpus)},
  };
  return root.dump(2) + "\n";
}

ModelFile model_from_json(std::string_view text) {
  const json root = parse(text);
  ModelFile model;
  model.version = static_cast<int>(integer(field(root, "version", ""), "/version"));
  if (model.version != kModelFileVersion) {
    throw SchemaError("/version", "unsupported model file version " + std::to_string(model.version));
  }
  model.config = config_from_json(field(root, "config", ""), "/config");

  const json& alphabets = field(root, "alphabets", "");
  auto pitch_alphabet = alphabet_from_json(field(alphabets, "pitch", "/alphabets"), Feature::kPitch, "/alphabets/pitch");
  auto duration_alphabet =
      alphabet_from_json(field(alphabets, "duration", "/alphabets"), Feature::kDuration, "/alphabets/duration");

  const json& markov = field(root, "markov", "");
  model.pitch_model = markov_from_json(field(markov, "pitch", "/markov"), std::move(pitch_alphabet), "/markov/pitch");
  model.duration_model =
      markov_from_json(field(markov, "duration", "/markov"), std::move(duration_alphabet), "/markov/duration");

  const json& contours = field(root, "contours", "");
  model.pitch_contour = contour_from_json(field(contours, "pitch", "/contours"), Feature::kPitch, "/contours/pitch");
  model.rhythm_contour =
      contour_from_json(field(contours, "rhythm", "/contours"), Feature::kDuration, "/contours/rhythm");

  const json& corpus = array(field(root, "corpus", ""), "/corpus");
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string p = child("/corpus", i);
    model.corpus.push_back({string(field(corpus[i], "file", p), child(p, "file")),
                            string(field(corpus[i], "sha256", p), child(p, "sha256"))});
  }
  return model;
}

}  // namespace melcomp
