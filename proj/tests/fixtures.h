// Synthetic corpora and SMF builders shared by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "melcomp/corpus.h"
#include "melcomp/rational_time.h"
#include "melcomp/score.h"

namespace melcomp::testing {

inline constexpr int kCMajor[] = {55, 57, 59, 60, 62, 64, 65, 67, 69, 71, 72, 74, 76, 77, 79};
inline constexpr int kCMajorSize = static_cast<int>(std::size(kCMajor));

inline bool is_tonic_triad(int pitch) {
  const int pc = pitch % 12;
  return pc == 0 || pc == 4 || pc == 7;
}

// Index of the scale degree closest to `pitch`, restricted to triad tones
// when `triad_only` is set.
inline int nearest_degree(double pitch, bool triad_only) {
  int best = -1;
  for (int i = 0; i < kCMajorSize; ++i) {
    if (triad_only && !is_tonic_triad(kCMajor[i])) continue;
    if (best < 0 || std::abs(kCMajor[i] - pitch) < std::abs(kCMajor[best] - pitch)) best = i;
  }
  return best;
}

// A phrase of `bars` 4/4 bars following target(t) in C major with a random
// scale-step deviation of up to `jitter` degrees. Durations are eighths,
// quarters and halves; the last note is a tonic-triad pitch.
template <typename Target>
Phrase shaped_phrase(std::mt19937_64& rng, int bars, Target target, int jitter, const std::string& id) {
  const RationalTime total(4 * bars);
  const RationalTime choices[] = {RationalTime(1, 2), RationalTime(1), RationalTime(2)};
  std::vector<std::pair<std::optional<int>, RationalTime>> notes;
  RationalTime t;
  while (t < total) {
    std::vector<RationalTime> fits;
    for (const auto& c : choices) {
      // Keep eighths paired so onsets stay on the eighth grid.
      if (c <= total - t && (c != RationalTime(1, 2) || t.mod1() == RationalTime(0))) fits.push_back(c);
    }
    RationalTime d = t.mod1() == RationalTime(0) ? fits[rng() % fits.size()] : RationalTime(1, 2);
    const bool last = t + d == total;
    const double goal = target((t / total).to_double());
    int degree = nearest_degree(goal, last);
    if (!last && jitter > 0) {
      degree += static_cast<int>(rng() % static_cast<std::uint64_t>(2 * jitter + 1)) - jitter;
      degree = std::clamp(degree, 0, kCMajorSize - 1);
    }
    notes.push_back({kCMajor[degree], d});
    t += d;
  }
  return make_phrase(notes, id);
}

// `count` single-phrase songs of 4 bars doing a random walk on C major.
inline std::vector<Phrase> scale_walk_phrases(std::uint64_t seed, int count, int bars = 4) {
  std::mt19937_64 rng(seed);
  std::vector<Phrase> out;
  for (int i = 0; i < count; ++i) {
    double level = 64.0 + static_cast<double>(rng() % 7);
    double step = (rng() % 2 == 0) ? 3.0 : -3.0;
    auto walk = [&](double) {
      level += step * (static_cast<double>(rng() % 1000) / 1000.0 - 0.5);
      level = std::clamp(level, 57.0, 77.0);
      return level;
    };
    out.push_back(shaped_phrase(rng, bars, walk, 1, "walk" + std::to_string(i)));
  }
  return out;
}

// Phrases whose pitch rises and falls once over the phrase.
inline std::vector<Phrase> arch_phrases(std::uint64_t seed, int count, int bars = 4) {
  std::mt19937_64 rng(seed);
  std::vector<Phrase> out;
  for (int i = 0; i < count; ++i) {
    auto arch = [](double t) { return 60.0 + 14.0 * std::sin(std::numbers::pi * t); };
    out.push_back(shaped_phrase(rng, bars, arch, 2, "arch" + std::to_string(i)));
  }
  return out;
}

// A phrase of exactly 16 counts in which every (off-beat, context) of any
// length up to 4 has a single successor for both pitch and duration:
// distinct pitches over a repeating quarter, eighth, dotted-quarter cell.
inline Phrase deterministic_chain_phrase() {
  const RationalTime cell[] = {RationalTime(1), RationalTime(1, 2), RationalTime(3, 2)};
  std::vector<std::pair<std::optional<int>, RationalTime>> notes;
  for (int i = 0; i < 16; ++i) notes.push_back({57 + i, cell[i % 3]});
  return make_phrase(notes, "chain");
}

// Each phrase as its own one-phrase song.
inline std::vector<CorpusEntry> as_corpus(const std::vector<Phrase>& phrases) {
  std::vector<CorpusEntry> corpus;
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    CorpusEntry e;
    e.file = phrases[i].source_id + ".mid";
    e.sha256 = std::string(64, '0');
    e.melody.phrases.push_back(phrases[i]);
    corpus.push_back(std::move(e));
  }
  return corpus;
}

// Minimal SMF writer independent of the library: one MTrk with the given
// raw event bytes (delta times included), end of track appended.
inline void push_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::vector<std::uint8_t> tmp{static_cast<std::uint8_t>(v & 0x7F)};
  while ((v >>= 7) != 0) tmp.push_back(static_cast<std::uint8_t>((v & 0x7F) | 0x80));
  out.insert(out.end(), tmp.rbegin(), tmp.rend());
}

struct SmfEvent {
  std::uint32_t delta;
  std::vector<std::uint8_t> bytes;
};

inline std::vector<std::uint8_t> smf(int ppq, const std::vector<SmfEvent>& events, bool time_sig_44 = true) {
  std::vector<std::uint8_t> track;
  if (time_sig_44) track.insert(track.end(), {0x00, 0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08});
  for (const auto& ev : events) {
    push_vlq(track, ev.delta);
    track.insert(track.end(), ev.bytes.begin(), ev.bytes.end());
  }
  track.insert(track.end(), {0x00, 0xFF, 0x2F, 0x00});
  std::vector<std::uint8_t> out = {'M', 'T', 'h', 'd', 0, 0, 0, 6, 0, 0, 0, 1,
                                   static_cast<std::uint8_t>(ppq >> 8), static_cast<std::uint8_t>(ppq)};
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(track.size() >> s));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

inline SmfEvent note_on(std::uint32_t delta, int pitch) {
  return {delta, {0x90, static_cast<std::uint8_t>(pitch), 0x60}};
}
inline SmfEvent note_off(std::uint32_t delta, int pitch) {
  return {delta, {0x80, static_cast<std::uint8_t>(pitch), 0x00}};
}
inline SmfEvent text_marker(std::uint32_t delta) { return {delta, {0xFF, 0x01, 0x01, 'x'}}; }

// A monophonic file of (pitch, length in ticks) notes played back to back.
inline std::vector<std::uint8_t> legato_smf(int ppq, const std::vector<std::pair<int, std::uint32_t>>& notes) {
  std::vector<SmfEvent> events;
  for (const auto& [pitch, len] : notes) {
    events.push_back(note_on(0, pitch));
    events.push_back(note_off(len, pitch));
  }
  return smf(ppq, events);
}

}  // namespace melcomp::testing
