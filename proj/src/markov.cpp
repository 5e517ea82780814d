#include "melcomp/markov.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "melcomp/error.h"

namespace melcomp {

StateAlphabet StateAlphabet::for_pitches(std::vector<int> pitches) {
  for (int p : pitches) {
    if (p != kRestPitch && (p < 0 || p > 127)) throw std::invalid_argument("pitch state outside 0..127");
  }
  std::sort(pitches.begin(), pitches.end());
  pitches.erase(std::unique(pitches.begin(), pitches.end()), pitches.end());
  StateAlphabet a;
  a.feature_ = Feature::kPitch;
  a.pitches_ = std::move(pitches);
  return a;
}

StateAlphabet StateAlphabet::for_durations(std::vector<RationalTime> durations) {
  for (const auto& d : durations) {
    if (d <= RationalTime(0)) throw std::invalid_argument("duration state must be positive");
  }
  std::sort(durations.begin(), durations.end());
  durations.erase(std::unique(durations.begin(), durations.end()), durations.end());
  StateAlphabet a;
  a.feature_ = Feature::kDuration;
  a.durations_ = std::move(durations);
  return a;
}

std::optional<Symbol> StateAlphabet::find_pitch(std::optional<int> pitch) const {
  if (feature_ != Feature::kPitch) return std::nullopt;
  int key = pitch.value_or(kRestPitch);
  auto it = std::lower_bound(pitches_.begin(), pitches_.end(), key);
  if (it == pitches_.end() || *it != key) return std::nullopt;
  return static_cast<Symbol>(it - pitches_.begin());
}

std::optional<Symbol> StateAlphabet::find_duration(const RationalTime& duration) const {
  if (feature_ != Feature::kDuration) return std::nullopt;
  auto it = std::lower_bound(durations_.begin(), durations_.end(), duration);
  if (it == durations_.end() || *it != duration) return std::nullopt;
  return static_cast<Symbol>(it - durations_.begin());
}

std::optional<int> StateAlphabet::pitch(Symbol s) const {
  int p = pitches_.at(static_cast<std::size_t>(s));
  if (p == kRestPitch) return std::nullopt;
  return p;
}

RationalTime StateAlphabet::duration(Symbol s) const { return durations_.at(static_cast<std::size_t>(s)); }

double StateAlphabet::value(Symbol s) const {
  if (feature_ == Feature::kDuration) return duration(s).to_double();
  auto p = pitch(s);
  return p ? static_cast<double>(*p) : std::numeric_limits<double>::quiet_NaN();
}

std::uint64_t TransitionRow::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

TransitionModel::TransitionModel(StateAlphabet alphabet, int order) : alphabet_(std::move(alphabet)), order_(order) {
  if (order < 1) throw std::invalid_argument("Markov order must be at least 1");
}

void TransitionModel::check_query(const RationalTime& offbeat, std::span<const Symbol> context) const {
  if (offbeat < RationalTime(0) || offbeat >= RationalTime(1)) {
    throw ModelQueryError("off-beat " + offbeat.to_string() + " outside [0, 1)");
  }
  if (context.size() > static_cast<std::size_t>(order_)) {
    throw ModelQueryError("context of length " + std::to_string(context.size()) + " exceeds order " +
                          std::to_string(order_));
  }
  const auto n = static_cast<Symbol>(alphabet_.size());
  for (Symbol s : context) {
    if (s != kBlank && (s < 0 || s >= n)) throw ModelQueryError("symbol " + std::to_string(s) + " outside alphabet");
  }
}

const TransitionRow* TransitionModel::find(const RationalTime& offbeat, std::span<const Symbol> context) const {
  check_query(offbeat, context);
  auto it = rows_.find(ContextKey{offbeat, std::vector<Symbol>(context.begin(), context.end())});
  return it == rows_.end() ? nullptr : &it->second;
}

std::vector<double> TransitionModel::transition_vector(const RationalTime& offbeat,
                                                       std::span<const Symbol> context) const {
  const TransitionRow* row = find(offbeat, context);
  if (row == nullptr) return std::vector<double>(alphabet_.size(), 0.0);
  return row->probabilities;
}

void TransitionModel::add_counts(const ContextKey& key, std::span<const std::uint64_t> counts) {
  if (counts.size() != alphabet_.size()) throw std::invalid_argument("count vector does not match alphabet size");
  auto& row = rows_[key];
  if (row.counts.empty()) row.counts.assign(alphabet_.size(), 0);
  for (std::size_t i = 0; i < counts.size(); ++i) row.counts[i] += counts[i];
  const double total = static_cast<double>(row.total());
  row.probabilities.assign(alphabet_.size(), 0.0);
  if (total > 0) {
    for (std::size_t i = 0; i < counts.size(); ++i) row.probabilities[i] = static_cast<double>(row.counts[i]) / total;
  }
}

void TransitionModel::set_row(const ContextKey& key, TransitionRow row) {
  check_query(key.offbeat, key.context);
  if (row.counts.size() != alphabet_.size() || row.probabilities.size() != alphabet_.size()) {
    throw std::invalid_argument("row does not match alphabet size");
  }
  rows_[key] = std::move(row);
}

TransitionModel TransitionModel::collapse_offbeats() const {
  TransitionModel out(alphabet_, order_);
  for (const auto& [key, row] : rows_) out.add_counts(ContextKey{RationalTime(0), key.context}, row.counts);
  return out;
}

TransitionModel train(std::span<const TrainingSequence> sequences, int order, StateAlphabet alphabet) {
  TransitionModel model(std::move(alphabet), order);
  const std::size_t n = model.alphabet().size();
  const auto m = static_cast<std::size_t>(order);

  std::map<ContextKey, std::vector<std::uint64_t>> counts;
  for (const auto& seq : sequences) {
    std::vector<Symbol> padded(m, kBlank);
    for (const auto& ev : seq) {
      if (ev.symbol < 0 || static_cast<std::size_t>(ev.symbol) >= n) {
        throw std::invalid_argument("training symbol outside alphabet");
      }
      padded.push_back(ev.symbol);
    }
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::size_t pos = i + m;
      const RationalTime ob = offbeat(seq[i].onset);
      for (std::size_t k = 1; k <= m; ++k) {
        ContextKey key{ob, std::vector<Symbol>(padded.begin() + static_cast<std::ptrdiff_t>(pos - k),
                                               padded.begin() + static_cast<std::ptrdiff_t>(pos))};
        auto& row = counts[key];
        if (row.empty()) row.assign(n, 0);
        ++row[static_cast<std::size_t>(seq[i].symbol)];
      }
    }
  }
  for (const auto& [key, row] : counts) model.add_counts(key, row);
  return model;
}

std::uint64_t model_size(std::uint64_t alphabet_size, int order) {
  if (alphabet_size < 1 || order < 1) throw std::invalid_argument("model_size needs n >= 1 and m >= 1");
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t power = 1;
  std::uint64_t total = 0;
  for (int i = 1; i <= order; ++i) {
    if (power > kMax / alphabet_size) throw std::overflow_error("model_size overflows 64 bits");
    power *= alphabet_size;
    if (total > kMax - power) throw std::overflow_error("model_size overflows 64 bits");
    total += power;
  }
  return total;
}

}  // namespace melcomp
