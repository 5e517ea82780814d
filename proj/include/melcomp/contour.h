// Fourier-domain melodic and rhythmic contours: per-phrase low-pass
// features, Ward clustering, and selection of the cluster to follow.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "melcomp/markov.h"
#include "melcomp/score.h"

namespace melcomp {

inline constexpr std::size_t kDefaultCurveSamples = 256;
inline constexpr std::size_t kDefaultLowpassK = 6;

struct SampledCurve {
  std::vector<double> samples;

  std::size_t size() const { return samples.size(); }
  friend bool operator==(const SampledCurve&, const SampledCurve&) = default;
};

struct ContourFeature {
  /// Retained spectrum scaled by 1/length, so coeffs[0] is the curve mean.
  std::vector<std::complex<double>> coeffs;
  std::string phrase_ref;
  /// Amplitude factor applied to the non-DC coefficients.
  double compensation = 1.0;
};

/// Piecewise-constant curve over normalized phrase time, sample i taken at
/// t = i / samples. For pitch, rests take the neighbouring pitch at the
/// phrase edges and a linear ramp between neighbours inside the phrase.
/// For duration, every note (rests included) contributes its length in
/// quarter notes.
///
/// Throws ContourUndefined for a pitch curve of a phrase without sounding
/// notes, std::invalid_argument for an empty phrase.
SampledCurve step_curve(const Phrase& phrase, Feature feature, std::size_t samples = kDefaultCurveSamples);

/// Subtracts the mean pitch of the sounding notes, each note counted once.
SampledCurve center_pitch_curve(const Phrase& phrase, const SampledCurve& curve);

/// reverse(curve) followed by curve.
SampledCurve mirror(const SampledCurve& curve);

/// Keeps DC plus the k-1 lowest harmonics of the (even-length) mirrored
/// curve and rescales the retained harmonics so that the time-domain
/// variance is unchanged. When no energy survives the cut (below 1e-20 of
/// the total, i.e. rounding noise) the factor is 1 and the harmonics are 0.
ContourFeature extract_feature(const SampledCurve& mirrored, std::size_t k);

/// Time-domain curve of `length` samples described by a retained spectrum.
std::vector<double> reconstruct(std::span<const std::complex<double>> coeffs, std::size_t length);

/// Mean absolute deviation of a curve from its own mean.
double curve_width(std::span<const double> curve);

/// Ward clustering of features embedded as (re, im) pairs. Returns one
/// label per feature; there are min(max_clusters, features) labels.
std::vector<std::size_t> cluster(std::span<const ContourFeature> features, std::size_t max_clusters);

struct QualityScores {
  std::vector<double> quality;
  std::size_t selected = 0;  // argmax q
  std::size_t argmin = 0;    // argmin q, reported for comparison only
};

/// q_i = s_i / max s + w_i^(1/gamma) / max w^(1/gamma) with s_i = size_i /
/// max size. The width term is 0 everywhere when every width is 0. Ties in
/// the argmax go to the larger cluster, then to the lower index.
QualityScores quality_scores(std::span<const std::size_t> sizes, std::span<const double> widths, double gamma);

struct ClusterDiagnostics {
  std::size_t size = 0;
  double width = 0.0;
  double quality = 0.0;
  std::vector<std::complex<double>> mean_spectrum;

  friend bool operator==(const ClusterDiagnostics&, const ClusterDiagnostics&) = default;
};

struct ClusterSelection {
  std::vector<ClusterDiagnostics> clusters;
  std::size_t selected = 0;
  std::size_t argmin = 0;
};

/// Scores every cluster of (uncentered) features. `curve_length` is the
/// mirrored sample count used to evaluate the mean contours.
ClusterSelection cluster_quality(std::span<const std::vector<ContourFeature>> clusters, double gamma,
                                 std::size_t curve_length);

struct ContourOptions {
  std::size_t samples = kDefaultCurveSamples;
  std::size_t lowpass_k = kDefaultLowpassK;
  std::size_t max_clusters = 17;
  double gamma = 3.0;
};

struct ContourModel {
  Feature feature = Feature::kPitch;
  std::size_t samples = kDefaultCurveSamples;
  std::size_t selected_cluster = 0;
  std::size_t argmin_cluster = 0;
  std::vector<std::complex<double>> mean_spectrum;
  /// Selected mean contour on the unmirrored domain: curve[i] = r(N + i).
  SampledCurve curve;
  std::vector<ClusterDiagnostics> diagnostics;
  /// Cluster label of every phrase that took part, in input order.
  std::vector<std::size_t> assignment;
  std::vector<std::string> phrase_refs;

  friend bool operator==(const ContourModel&, const ContourModel&) = default;
};

/// Full pipeline: per-phrase features (centered for pitch) are clustered,
/// members are replaced by their uncentered features, and the best cluster
/// by quality is kept. Pitch phrases without sounding notes are skipped.
/// Throws std::invalid_argument when no phrase is usable.
ContourModel learn_contour(std::span<const Phrase> phrases, Feature feature, const ContourOptions& options);

/// Selected mean contour at t in [0, 1), i.e. r((1 + t) / 2) by
/// nearest-sample lookup.
double contour_at(const ContourModel& model, double t);

}  // namespace melcomp
