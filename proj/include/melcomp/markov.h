// Off-beat-parametric Markov models of order 1..m over pitch or duration
// states.

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "melcomp/rational_time.h"

namespace melcomp {

enum class Feature { kPitch, kDuration };

/// Index into a StateAlphabet. kBlank pads contexts at phrase start.
using Symbol = std::int32_t;
inline constexpr Symbol kBlank = -1;

/// Pitch-alphabet value standing for a rest. Sorts before every MIDI pitch.
inline constexpr int kRestPitch = -1;

/// Sorted, duplicate-free list of the states a model can emit.
class StateAlphabet {
 public:
  StateAlphabet() = default;

  /// Pitches in 0..127, optionally including kRestPitch.
  static StateAlphabet for_pitches(std::vector<int> pitches);
  static StateAlphabet for_durations(std::vector<RationalTime> durations);

  Feature feature() const { return feature_; }
  std::size_t size() const { return feature_ == Feature::kPitch ? pitches_.size() : durations_.size(); }

  std::optional<Symbol> find_pitch(std::optional<int> pitch) const;
  std::optional<Symbol> find_duration(const RationalTime& duration) const;

  /// nullopt for the rest state.
  std::optional<int> pitch(Symbol s) const;
  RationalTime duration(Symbol s) const;
  bool is_rest(Symbol s) const { return feature_ == Feature::kPitch && pitches_.at(s) == kRestPitch; }

  /// Numeric coordinate of a state: MIDI number for pitches, quarter notes
  /// for durations. NaN for the rest state.
  double value(Symbol s) const;

  const std::vector<int>& pitches() const { return pitches_; }
  const std::vector<RationalTime>& durations() const { return durations_; }

  friend bool operator==(const StateAlphabet&, const StateAlphabet&) = default;

 private:
  Feature feature_ = Feature::kPitch;
  std::vector<int> pitches_;
  std::vector<RationalTime> durations_;
};

struct ContextKey {
  RationalTime offbeat;
  std::vector<Symbol> context;

  friend bool operator==(const ContextKey&, const ContextKey&) = default;
  friend auto operator<=>(const ContextKey&, const ContextKey&) = default;
};

struct TransitionRow {
  std::vector<std::uint64_t> counts;
  /// counts / sum(counts)
  std::vector<double> probabilities;

  std::uint64_t total() const;
  friend bool operator==(const TransitionRow&, const TransitionRow&) = default;
};

class TransitionModel {
 public:
  TransitionModel() = default;
  TransitionModel(StateAlphabet alphabet, int order);

  const StateAlphabet& alphabet() const { return alphabet_; }
  int order() const { return order_; }
  const std::map<ContextKey, TransitionRow>& rows() const { return rows_; }

  /// Probability vector for the exact (off-beat, context) row, or all zeros
  /// when the row was never observed. There is no backoff to shorter
  /// contexts or other off-beats.
  ///
  /// Throws ModelQueryError for symbols outside the alphabet, contexts
  /// longer than the order, or off-beats outside [0, 1).
  std::vector<double> transition_vector(const RationalTime& offbeat, std::span<const Symbol> context) const;

  const TransitionRow* find(const RationalTime& offbeat, std::span<const Symbol> context) const;

  /// Adds counts to a row and renormalizes it.
  void add_counts(const ContextKey& key, std::span<const std::uint64_t> counts);

  /// Stores a row verbatim (used when loading a persisted model).
  void set_row(const ContextKey& key, TransitionRow row);

  /// Same transitions with every off-beat merged into the single bin 0.
  TransitionModel collapse_offbeats() const;

  friend bool operator==(const TransitionModel&, const TransitionModel&) = default;

 private:
  void check_query(const RationalTime& offbeat, std::span<const Symbol> context) const;

  StateAlphabet alphabet_;
  int order_ = 1;
  std::map<ContextKey, TransitionRow> rows_;
};

struct TrainingEvent {
  Symbol symbol;
  /// Count at which the state starts; its off-beat selects the tensor slice.
  RationalTime onset;
};
using TrainingSequence = std::vector<TrainingEvent>;

/// Counts every successor under (offbeat(successor onset), k preceding
/// symbols) for k = 1..order, with `order` blanks prepended to each
/// sequence, then L1-normalizes every row.
TransitionModel train(std::span<const TrainingSequence> sequences, int order, StateAlphabet alphabet);

/// sum_{i=1..order} alphabet_size^i: the largest number of non-blank
/// contexts per off-beat. Throws std::overflow_error past 2^64-1.
std::uint64_t model_size(std::uint64_t alphabet_size, int order);

}  // namespace melcomp
