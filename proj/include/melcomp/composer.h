// Phrase composition: interleaved duration/pitch sampling from the
// parametric Markov models, ending constraints, Gaussian contour
// following, and backtracking over dead ends.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "melcomp/contour.h"
#include "melcomp/markov.h"
#include "melcomp/score.h"

namespace melcomp {

struct GeneratorConfig {
  int order = 4;
  int bars = 4;
  double sigma2_pitch = 4.0;
  double sigma2_rhythm = 0.33;
  double gamma = 3.0;
  std::size_t lowpass_k = kDefaultLowpassK;
  std::size_t max_clusters = 17;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a non-positive field.
  void validate() const;
  RationalTime total_counts() const { return RationalTime(4 * static_cast<std::int64_t>(bars)); }

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

struct ComposerModels {
  const TransitionModel* pitch = nullptr;
  const TransitionModel* duration = nullptr;
  const ContourModel* pitch_contour = nullptr;
  const ContourModel* rhythm_contour = nullptr;
};

struct ComposeOptions {
  /// When false the Gaussian filters are bypassed (weight 1 everywhere).
  bool follow_contours = true;
  /// When false every query uses off-beat 0; pair it with models from
  /// TransitionModel::collapse_offbeats().
  bool parametric = true;
};

/// Uniform source of r in [0, 1) built on a 64-bit Mersenne Twister, with
/// the bit-to-double mapping fixed so sequences are portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// 1 where the duration state fits in the remaining counts.
std::vector<double> ending_mask_duration(std::span<const RationalTime> duration_states, const RationalTime& remaining);

/// On the last note only sounding pitches of the tonic triad (pitch class
/// 0, 4 or 7) survive; otherwise all ones. Rest is kRestPitch.
std::vector<double> ending_mask_pitch(std::span<const int> pitch_states, bool is_last_note);

/// Gaussian density with variance sigma2 at every state. NaN states (the
/// rest pitch) get weight 1.
std::vector<double> gaussian_filter(std::span<const double> states, double mu, double sigma2);

/// t * mask * f, L1-normalized; the zero vector when nothing survives.
std::vector<double> filtered_transition(std::span<const double> t, std::span<const double> mask,
                                        std::span<const double> f);

/// Smallest i with t_prime[i] > 0 and r <= accsum(t_prime)[i]. Falls back
/// to the last positive entry when rounding leaves the sum below r.
/// Throws std::invalid_argument on an all-zero vector.
std::size_t draw_state(std::span<const double> t_prime, double r);

struct Candidate {
  Symbol duration = 0;
  Symbol pitch = 0;
  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// A point of the search tree: the notes committed so far and the
/// bookkeeping for choosing the next note.
struct SearchNode {
  std::size_t depth = 0;
  /// Onset of the next note.
  RationalTime count;
  /// The note this node committed; empty at the root.
  std::optional<Candidate> committed;
  std::optional<Symbol> current_pitch_under_trial;
  /// pitch -> durations that already failed with it for the next note.
  std::map<Symbol, std::set<Symbol>> tried;

  /// Filtered distributions for the next note.
  std::vector<double> duration_dist;
  std::vector<double> pitch_dist;       // next note is not the last
  std::vector<double> pitch_dist_last;  // next note ends the phrase
  /// Durations that end the phrase exactly.
  std::vector<bool> ends_phrase;

  const std::vector<double>& pitch_dist_for(Symbol duration) const {
    return ends_phrase[static_cast<std::size_t>(duration)] ? pitch_dist_last : pitch_dist;
  }
};

/// First (duration, pitch) to try from a fresh node: a duration with at
/// least one admissible pitch, then a pitch given that duration. Empty
/// when the node is a dead end.
std::optional<Candidate> first_candidate(const SearchNode& node, Rng& rng);

/// Records that `failed` led to a dead end and returns the next candidate:
/// another untried duration for the same pitch while one exists, else a
/// fresh untried pitch with any of its durations. Empty means every pitch
/// is exhausted and the search has to climb to the parent.
std::optional<Candidate> backtrack_step(SearchNode& node, const Candidate& failed, Rng& rng);

/// Composes one phrase of exactly 4 * config.bars counts. Throws
/// SearchExhausted when no phrase of that length can be built.
Phrase compose_phrase(const ComposerModels& models, const GeneratorConfig& config, Rng& rng,
                      const ComposeOptions& options = {});

/// Checks that every note of the phrase has positive probability under
/// its off-beat and preceding context in both models. On failure `why`
/// (when given) names the first bad note.
bool replay_valid(const Phrase& phrase, const TransitionModel& pitch, const TransitionModel& duration,
                  bool parametric = true, std::string* why = nullptr);

}  // namespace melcomp
