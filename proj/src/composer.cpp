#include "melcomp/composer.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "melcomp/error.h"

namespace melcomp {

namespace {

std::vector<Symbol> context_of(std::span<const Symbol> history, int order) {
  const auto m = static_cast<std::size_t>(order);
  std::vector<Symbol> ctx(m, kBlank);
  const std::size_t take = std::min(m, history.size());
  std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
            ctx.end() - static_cast<std::ptrdiff_t>(take));
  return ctx;
}

std::vector<double> restrict(std::span<const double> dist, const std::vector<bool>& allowed) {
  std::vector<double> out(dist.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (allowed[i]) {
      out[i] = dist[i];
      sum += dist[i];
    }
  }
  if (sum > 0.0) {
    for (auto& v : out) v /= sum;
  }
  return out;
}

bool any_positive(std::span<const double> v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
}

// Durations admissible together with `pitch` and not yet tried with it.
std::vector<bool> open_durations(const SearchNode& node, Symbol pitch) {
  std::vector<bool> allowed(node.duration_dist.size(), false);
  const auto tried = node.tried.find(pitch);
  for (std::size_t d = 0; d < allowed.size(); ++d) {
    const auto sym = static_cast<Symbol>(d);
    if (node.duration_dist[d] <= 0.0) continue;
    if (node.pitch_dist_for(sym)[static_cast<std::size_t>(pitch)] <= 0.0) continue;
    if (tried != node.tried.end() && tried->second.contains(sym)) continue;
    allowed[d] = true;
  }
  return allowed;
}

class Composer {
 public:
  Composer(const ComposerModels& models, const GeneratorConfig& config, const ComposeOptions& options)
      : models_(models), config_(config), options_(options), total_(config.total_counts()) {
    if (!models.pitch || !models.duration || !models.pitch_contour || !models.rhythm_contour) {
      throw std::invalid_argument("compose_phrase needs both transition models and both contours");
    }
    pitch_values_.reserve(models.pitch->alphabet().size());
    for (std::size_t i = 0; i < models.pitch->alphabet().size(); ++i) {
      pitch_values_.push_back(models.pitch->alphabet().value(static_cast<Symbol>(i)));
    }
    for (std::size_t i = 0; i < models.duration->alphabet().size(); ++i) {
      duration_values_.push_back(models.duration->alphabet().value(static_cast<Symbol>(i)));
    }
  }

  SearchNode make_node(std::size_t depth, const RationalTime& count, std::span<const Symbol> durations,
                       std::span<const Symbol> pitches) const {
    SearchNode node;
    node.depth = depth;
    node.count = count;
    const RationalTime ob = options_.parametric ? offbeat(count) : RationalTime(0);
    const double t = (count / total_).to_double();
    const RationalTime remaining = total_ - count;

    const auto& dur_alphabet = models_.duration->alphabet().durations();
    const auto td = models_.duration->transition_vector(ob, context_of(durations, models_.duration->order()));
    const auto md = ending_mask_duration(dur_alphabet, remaining);
    node.duration_dist = filtered_transition(td, md, filter(duration_values_, *models_.rhythm_contour,
                                                            config_.sigma2_rhythm, t));
    node.ends_phrase.resize(dur_alphabet.size());
    for (std::size_t d = 0; d < dur_alphabet.size(); ++d) node.ends_phrase[d] = dur_alphabet[d] == remaining;

    const auto tp = models_.pitch->transition_vector(ob, context_of(pitches, models_.pitch->order()));
    const auto fp = filter(pitch_values_, *models_.pitch_contour, config_.sigma2_pitch, t);
    const auto& pitch_states = models_.pitch->alphabet().pitches();
    node.pitch_dist = filtered_transition(tp, ending_mask_pitch(pitch_states, false), fp);
    node.pitch_dist_last = filtered_transition(tp, ending_mask_pitch(pitch_states, true), fp);
    return node;
  }

  Phrase run(Rng& rng) const {
    struct Frame {
      SearchNode node;
      Candidate candidate;
    };
    std::vector<Frame> stack;
    std::vector<Symbol> durations;
    std::vector<Symbol> pitches;

    SearchNode root = make_node(0, RationalTime(0), durations, pitches);
    auto first = first_candidate(root, rng);
    if (!first) throw SearchExhausted("no admissible first note");
    stack.push_back({std::move(root), *first});

    while (true) {
      Frame& top = stack.back();
      const RationalTime next_count =
          top.node.count + models_.duration->alphabet().duration(top.candidate.duration);
      durations.push_back(top.candidate.duration);
      pitches.push_back(top.candidate.pitch);

      if (next_count == total_) return to_phrase(durations, pitches);

      SearchNode child = make_node(top.node.depth + 1, next_count, durations, pitches);
      child.committed = top.candidate;
      if (auto c = first_candidate(child, rng)) {
        stack.push_back({std::move(child), *c});
        continue;
      }

      // The child is a dead end: retract its note and ask the ancestors
      // for alternatives, climbing while they are exhausted.
      while (true) {
        durations.pop_back();
        pitches.pop_back();
        Frame& f = stack.back();
        if (auto next = backtrack_step(f.node, f.candidate, rng)) {
          f.candidate = *next;
          break;
        }
        stack.pop_back();
        if (stack.empty()) {
          throw SearchExhausted("search exhausted for " + std::to_string(config_.bars) + " bar(s)");
        }
      }
    }
  }

 private:
  std::vector<double> filter(const std::vector<double>& values, const ContourModel& contour, double sigma2,
                             double t) const {
    if (!options_.follow_contours) return std::vector<double>(values.size(), 1.0);
    return gaussian_filter(values, contour_at(contour, t), sigma2);
  }

  Phrase to_phrase(std::span<const Symbol> durations, std::span<const Symbol> pitches) const {
    Phrase phrase;
    phrase.source_id = "composed";
    RationalTime onset;
    for (std::size_t i = 0; i < durations.size(); ++i) {
      Note n;
      n.pitch = models_.pitch->alphabet().pitch(pitches[i]);
      n.duration = models_.duration->alphabet().duration(durations[i]);
      n.onset = onset;
      onset += n.duration;
      phrase.notes.push_back(n);
    }
    return phrase;
  }

  const ComposerModels& models_;
  const GeneratorConfig& config_;
  const ComposeOptions& options_;
  RationalTime total_;
  std::vector<double> pitch_values_;
  std::vector<double> duration_values_;
};

}  // namespace

void GeneratorConfig::validate() const {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (bars < 1) throw std::invalid_argument("bars must be >= 1");
  if (!(sigma2_pitch > 0.0) || !(sigma2_rhythm > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (lowpass_k < 1) throw std::invalid_argument("lowpass-k must be >= 1");
  if (max_clusters < 1) throw std::invalid_argument("max-clusters must be >= 1");
}

std::vector<double> ending_mask_duration(std::span<const RationalTime> duration_states, const RationalTime& remaining) {
  std::vector<double> mask(duration_states.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = duration_states[i] <= remaining ? 1.0 : 0.0;
  return mask;
}

std::vector<double> ending_mask_pitch(std::span<const int> pitch_states, bool is_last_note) {
  std::vector<double> mask(pitch_states.size(), 1.0);
  if (!is_last_note) return mask;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const int p = pitch_states[i];
    const int pc = p % 12;
    mask[i] = (p != kRestPitch && (pc == 0 || pc == 4 || pc == 7)) ? 1.0 : 0.0;
  }
  return mask;
}

std::vector<double> gaussian_filter(std::span<const double> states, double mu, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be positive");
  const double sigma = std::sqrt(sigma2);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> f(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (std::isnan(states[i])) {
      f[i] = 1.0;
      continue;
    }
    const double d = states[i] - mu;
    f[i] = norm * std::exp(-(d * d) / (2.0 * sigma2));
  }
  return f;
}

std::vector<double> filtered_transition(std::span<const double> t, std::span<const double> mask,
                                        std::span<const double> f) {
  if (t.size() != mask.size() || t.size() != f.size()) throw std::invalid_argument("vector dimensions differ");
  std::vector<double> out(t.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out[i] = t[i] * mask[i] * f[i];
    sum += out[i];
  }
  if (sum > 0.0) {
    for (auto& v : out) v /= sum;
  } else {
    std::fill(out.begin(), out.end(), 0.0);
  }
  return out;
}

std::size_t draw_state(std::span<const double> t_prime, double r) {
  double acc = 0.0;
  std::optional<std::size_t> last_positive;
  for (std::size_t i = 0; i < t_prime.size(); ++i) {
    if (t_prime[i] <= 0.0) continue;
    acc += t_prime[i];
    last_positive = i;
    if (r <= acc) return i;
  }
  if (!last_positive) throw std::invalid_argument("draw_state on an all-zero vector");
  return *last_positive;
}

std::optional<Candidate> first_candidate(const SearchNode& node, Rng& rng) {
  std::vector<bool> usable(node.duration_dist.size(), false);
  for (std::size_t d = 0; d < usable.size(); ++d) {
    usable[d] = node.duration_dist[d] > 0.0 && any_positive(node.pitch_dist_for(static_cast<Symbol>(d)));
  }
  const auto durations = restrict(node.duration_dist, usable);
  if (!any_positive(durations)) return std::nullopt;
  const auto d = static_cast<Symbol>(draw_state(durations, rng.uniform()));
  const auto p = static_cast<Symbol>(draw_state(node.pitch_dist_for(d), rng.uniform()));
  return Candidate{d, p};
}

std::optional<Candidate> backtrack_step(SearchNode& node, const Candidate& failed, Rng& rng) {
  node.tried[failed.pitch].insert(failed.duration);
  node.current_pitch_under_trial = failed.pitch;

  auto same_pitch = restrict(node.duration_dist, open_durations(node, failed.pitch));
  if (any_positive(same_pitch)) {
    return Candidate{static_cast<Symbol>(draw_state(same_pitch, rng.uniform())), failed.pitch};
  }

  // Marginal weight of every untried pitch over its admissible durations.
  const std::size_t np = node.pitch_dist.size();
  std::vector<double> weights(np, 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    if (node.tried.contains(static_cast<Symbol>(p))) continue;
    for (std::size_t d = 0; d < node.duration_dist.size(); ++d) {
      weights[p] += node.duration_dist[d] * node.pitch_dist_for(static_cast<Symbol>(d))[p];
    }
  }
  if (!any_positive(weights)) return std::nullopt;
  const auto pitch = static_cast<Symbol>(draw_state(filtered_transition(weights, std::vector<double>(np, 1.0),
                                                                        std::vector<double>(np, 1.0)),
                                                    rng.uniform()));
  node.tried[pitch];
  node.current_pitch_under_trial = pitch;
  const auto durations = restrict(node.duration_dist, open_durations(node, pitch));
  return Candidate{static_cast<Symbol>(draw_state(durations, rng.uniform())), pitch};
}

Phrase compose_phrase(const ComposerModels& models, const GeneratorConfig& config, Rng& rng,
                      const ComposeOptions& options) {
  config.validate();
  return Composer(models, config, options).run(rng);
}

bool replay_valid(const Phrase& phrase, const TransitionModel& pitch, const TransitionModel& duration,
                  bool parametric, std::string* why) {
  std::vector<Symbol> pitches;
  std::vector<Symbol> durations;
  for (std::size_t i = 0; i < phrase.notes.size(); ++i) {
    const Note& n = phrase.notes[i];
    const auto ps = pitch.alphabet().find_pitch(n.pitch);
    const auto ds = duration.alphabet().find_duration(n.duration);
    auto fail = [&](const std::string& msg) {
      if (why) *why = "note " + std::to_string(i) + ": " + msg;
      return false;
    };
    if (!ps || !ds) return fail("state outside the trained alphabet");
    const RationalTime ob = parametric ? offbeat(n.onset) : RationalTime(0);
    if (duration.transition_vector(ob, context_of(durations, duration.order()))[static_cast<std::size_t>(*ds)] <= 0.0) {
      return fail("duration " + n.duration.to_string() + " has zero probability");
    }
    if (pitch.transition_vector(ob, context_of(pitches, pitch.order()))[static_cast<std::size_t>(*ps)] <= 0.0) {
      return fail("pitch has zero probability");
    }
    pitches.push_back(*ps);
    durations.push_back(*ds);
  }
  return true;
}

}  // namespace melcomp
