#include "melcomp/contour.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "melcomp/clustering.h"
#include "melcomp/error.h"
#include "melcomp/fft.h"

namespace melcomp {

namespace {

// Relative tolerance under which two quality values count as tied.
constexpr double kQualityTieTolerance = 1e-12;

// Fraction of the non-DC energy below which the retained band is empty.
constexpr double kNegligibleEnergy = 1e-20;

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= kQualityTieTolerance * std::max({1.0, std::abs(a), std::abs(b)});
}

// Pitch at each note; rests are filled from the surrounding sounding notes.
struct RestFill {
  std::vector<std::ptrdiff_t> prev;  // last sounding note at or before i, -1 if none
  std::vector<std::ptrdiff_t> next;  // first sounding note at or after i, -1 if none
};

RestFill rest_neighbours(const Phrase& phrase) {
  const auto n = static_cast<std::ptrdiff_t>(phrase.notes.size());
  RestFill f{std::vector<std::ptrdiff_t>(phrase.notes.size(), -1), std::vector<std::ptrdiff_t>(phrase.notes.size(), -1)};
  std::ptrdiff_t last = -1;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (!phrase.notes[i].is_rest()) last = i;
    f.prev[i] = last;
  }
  last = -1;
  for (std::ptrdiff_t i = n - 1; i >= 0; --i) {
    if (!phrase.notes[i].is_rest()) last = i;
    f.next[i] = last;
  }
  return f;
}

}  // namespace

SampledCurve step_curve(const Phrase& phrase, Feature feature, std::size_t samples) {
  if (phrase.notes.empty()) throw std::invalid_argument("step_curve of an empty phrase");
  if (samples == 0) throw std::invalid_argument("step_curve needs at least one sample");
  if (feature == Feature::kPitch && !phrase.has_pitch()) {
    throw ContourUndefined("phrase " + phrase.source_id + "#" + std::to_string(phrase.index_in_song) +
                           " has no sounding note");
  }

  const RationalTime total = phrase.total_duration();
  const RestFill fill = feature == Feature::kPitch ? rest_neighbours(phrase) : RestFill{};

  SampledCurve curve;
  curve.samples.reserve(samples);
  std::size_t note = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const RationalTime t = total * RationalTime(static_cast<std::int64_t>(i), static_cast<std::int64_t>(samples));
    while (note + 1 < phrase.notes.size() && phrase.notes[note].end() <= t) ++note;
    const Note& current = phrase.notes[note];

    if (feature == Feature::kDuration) {
      curve.samples.push_back(current.duration.to_double());
      continue;
    }
    if (!current.is_rest()) {
      curve.samples.push_back(static_cast<double>(*current.pitch));
      continue;
    }
    const auto prev = fill.prev[note];
    const auto next = fill.next[note];
    if (prev < 0) {
      curve.samples.push_back(static_cast<double>(*phrase.notes[static_cast<std::size_t>(next)].pitch));
    } else if (next < 0) {
      curve.samples.push_back(static_cast<double>(*phrase.notes[static_cast<std::size_t>(prev)].pitch));
    } else {
      const Note& a = phrase.notes[static_cast<std::size_t>(prev)];
      const Note& b = phrase.notes[static_cast<std::size_t>(next)];
      const double frac = ((t - a.end()) / (b.onset - a.end())).to_double();
      curve.samples.push_back(*a.pitch + (*b.pitch - *a.pitch) * frac);
    }
  }
  return curve;
}

SampledCurve center_pitch_curve(const Phrase& phrase, const SampledCurve& curve) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& n : phrase.notes) {
    if (n.is_rest()) continue;
    sum += *n.pitch;
    ++count;
  }
  if (count == 0) throw ContourUndefined("cannot center a phrase without sounding notes");
  const double mean = sum / static_cast<double>(count);
  SampledCurve out = curve;
  for (auto& v : out.samples) v -= mean;
  return out;
}

SampledCurve mirror(const SampledCurve& curve) {
  SampledCurve out;
  out.samples.reserve(2 * curve.size());
  out.samples.assign(curve.samples.rbegin(), curve.samples.rend());
  out.samples.insert(out.samples.end(), curve.samples.begin(), curve.samples.end());
  return out;
}

ContourFeature extract_feature(const SampledCurve& mirrored, std::size_t k) {
  const std::size_t m = mirrored.size();
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("extract_feature needs an even-length mirrored curve");
  if (k < 1 || k > m / 2) throw std::invalid_argument("low-pass cutoff must lie in 1..N");

  ContourFeature feature;
  feature.coeffs.assign(k, {0.0, 0.0});
  const auto& s = mirrored.samples;
  if (std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); })) {
    feature.coeffs[0] = s.front();
    return feature;
  }

  const auto spectrum = fft::forward_real(s);
  const std::size_t half = m / 2;
  // Bins 1..half-1 appear twice in the full Hermitian spectrum, the
  // Nyquist bin once.
  auto energy = [&](std::size_t bin) {
    double w = bin == half ? 1.0 : 2.0;
    return w * std::norm(spectrum[bin]);
  };
  double total = 0.0;
  for (std::size_t b = 1; b <= half; ++b) total += energy(b);
  double retained = 0.0;
  for (std::size_t b = 1; b < k; ++b) retained += energy(b);
  const double scale = 1.0 / static_cast<double>(m);
  feature.coeffs[0] = spectrum[0] * scale;
  // Retained energy at rounding-noise level counts as none at all.
  if (retained <= kNegligibleEnergy * total) return feature;
  feature.compensation = std::sqrt(total / retained);
  for (std::size_t b = 1; b < k; ++b) feature.coeffs[b] = spectrum[b] * (scale * feature.compensation);
  return feature;
}

std::vector<double> reconstruct(std::span<const std::complex<double>> coeffs, std::size_t length) {
  return fft::inverse_real(coeffs, length);
}

double curve_width(std::span<const double> curve) {
  if (curve.empty()) return 0.0;
  const double n = static_cast<double>(curve.size());
  const double mean = std::accumulate(curve.begin(), curve.end(), 0.0) / n;
  double dev = 0.0;
  for (double v : curve) dev += std::abs(mean - v);
  return dev / n;
}

std::vector<std::size_t> cluster(std::span<const ContourFeature> features, std::size_t max_clusters) {
  std::vector<std::vector<double>> points;
  points.reserve(features.size());
  for (const auto& f : features) {
    std::vector<double> p;
    p.reserve(2 * f.coeffs.size());
    for (const auto& c : f.coeffs) {
      p.push_back(c.real());
      p.push_back(c.imag());
    }
    points.push_back(std::move(p));
  }
  return ward_cluster(points, max_clusters);
}

QualityScores quality_scores(std::span<const std::size_t> sizes, std::span<const double> widths, double gamma) {
  if (sizes.size() != widths.size() || sizes.empty()) throw std::invalid_argument("quality_scores: bad input sizes");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");

  const double max_size = static_cast<double>(*std::max_element(sizes.begin(), sizes.end()));
  std::vector<double> norm_size(sizes.size());
  std::vector<double> damped(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    norm_size[i] = static_cast<double>(sizes[i]) / max_size;
    damped[i] = std::pow(widths[i], 1.0 / gamma);
  }
  const double max_norm_size = *std::max_element(norm_size.begin(), norm_size.end());
  const double max_damped = *std::max_element(damped.begin(), damped.end());

  QualityScores out;
  out.quality.resize(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double width_term = max_damped > 0.0 ? damped[i] / max_damped : 0.0;
    out.quality[i] = norm_size[i] / max_norm_size + width_term;
  }
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    const double q = out.quality[i];
    const double best = out.quality[out.selected];
    if ((q > best && !nearly_equal(q, best)) || (nearly_equal(q, best) && sizes[i] > sizes[out.selected])) {
      out.selected = i;
    }
    const double worst = out.quality[out.argmin];
    if (q < worst && !nearly_equal(q, worst)) out.argmin = i;
  }
  return out;
}

ClusterSelection cluster_quality(std::span<const std::vector<ContourFeature>> clusters, double gamma,
                                 std::size_t curve_length) {
  ClusterSelection sel;
  std::vector<std::size_t> sizes;
  std::vector<double> widths;
  for (const auto& members : clusters) {
    if (members.empty()) throw std::invalid_argument("empty cluster");
    ClusterDiagnostics d;
    d.size = members.size();
    d.mean_spectrum.assign(members.front().coeffs.size(), {0.0, 0.0});
    for (const auto& f : members) {
      for (std::size_t b = 0; b < f.coeffs.size(); ++b) d.mean_spectrum[b] += f.coeffs[b];
    }
    for (auto& c : d.mean_spectrum) c /= static_cast<double>(members.size());
    d.width = curve_width(reconstruct(d.mean_spectrum, curve_length));
    sizes.push_back(d.size);
    widths.push_back(d.width);
    sel.clusters.push_back(std::move(d));
  }
  const QualityScores q = quality_scores(sizes, widths, gamma);
  for (std::size_t i = 0; i < sel.clusters.size(); ++i) sel.clusters[i].quality = q.quality[i];
  sel.selected = q.selected;
  sel.argmin = q.argmin;
  return sel;
}

ContourModel learn_contour(std::span<const Phrase> phrases, Feature feature, const ContourOptions& options) {
  std::vector<ContourFeature> centered;
  std::vector<ContourFeature> absolute;
  ContourModel model;
  model.feature = feature;
  model.samples = options.samples;

  for (const auto& phrase : phrases) {
    if (phrase.notes.empty() || (feature == Feature::kPitch && !phrase.has_pitch())) continue;
    const SampledCurve curve = step_curve(phrase, feature, options.samples);
    ContourFeature raw = extract_feature(mirror(curve), options.lowpass_k);
    raw.phrase_ref = phrase.source_id + "#" + std::to_string(phrase.index_in_song);
    if (feature == Feature::kPitch) {
      ContourFeature c = extract_feature(mirror(center_pitch_curve(phrase, curve)), options.lowpass_k);
      c.phrase_ref = raw.phrase_ref;
      centered.push_back(std::move(c));
    } else {
      centered.push_back(raw);
    }
    model.phrase_refs.push_back(raw.phrase_ref);
    absolute.push_back(std::move(raw));
  }
  if (absolute.empty()) throw std::invalid_argument("no phrase yields a contour");

  model.assignment = cluster(centered, options.max_clusters);
  const std::size_t k = *std::max_element(model.assignment.begin(), model.assignment.end()) + 1;
  std::vector<std::vector<ContourFeature>> groups(k);
  for (std::size_t i = 0; i < absolute.size(); ++i) groups[model.assignment[i]].push_back(absolute[i]);

  const std::size_t length = 2 * options.samples;
  ClusterSelection sel = cluster_quality(groups, options.gamma, length);
  model.selected_cluster = sel.selected;
  model.argmin_cluster = sel.argmin;
  model.mean_spectrum = sel.clusters[sel.selected].mean_spectrum;
  const auto full = reconstruct(model.mean_spectrum, length);
  model.curve.samples.assign(full.begin() + static_cast<std::ptrdiff_t>(options.samples), full.end());
  model.diagnostics = std::move(sel.clusters);
  return model;
}

double contour_at(const ContourModel& model, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("contour_at expects t in [0, 1)");
  const std::size_t n = model.curve.size();
  if (n == 0) throw std::invalid_argument("contour model has no curve");
  auto idx = static_cast<std::size_t>(std::llround(t * static_cast<double>(n)));
  return model.curve.samples[std::min(idx, n - 1)];
}

}  // namespace melcomp
