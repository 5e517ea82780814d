// Monophonic score model: notes, phrases and melodies.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "melcomp/rational_time.h"

namespace melcomp {

struct Note {
  /// MIDI pitch 0..127, or nullopt for a rest.
  std::optional<int> pitch;
  RationalTime duration;
  /// Counts from the start of the enclosing phrase.
  RationalTime onset;

  bool is_rest() const { return !pitch.has_value(); }
  RationalTime end() const { return onset + duration; }

  friend bool operator==(const Note&, const Note&) = default;
};

/// A gap-free run of notes. `start` is the phrase's position in the song
/// (counts from the song start), so `start + onset` is the absolute count
/// of a note.
struct Phrase {
  std::vector<Note> notes;
  std::string source_id;
  int index_in_song = 0;
  RationalTime start;

  RationalTime total_duration() const;
  bool has_pitch() const;

  friend bool operator==(const Phrase&, const Phrase&) = default;
};

struct TimeSignature {
  int numerator = 4;
  int denominator = 4;
  friend bool operator==(const TimeSignature&, const TimeSignature&) = default;
};

struct Melody {
  std::vector<Phrase> phrases;
  int transpose_applied = 0;
  TimeSignature time_signature;
  /// Phrase separator positions found in the source file, ascending.
  std::vector<RationalTime> markers;

  /// All notes with absolute onsets, in order.
  std::vector<Note> flattened() const;
};

/// Throws std::invalid_argument when notes are not gap-free from 0, when a
/// duration is not positive or a pitch is outside 0..127.
void check_phrase(const Phrase& phrase);

/// Builds a gap-free phrase from (pitch, duration) pairs starting at 0.
Phrase make_phrase(const std::vector<std::pair<std::optional<int>, RationalTime>>& notes,
                   std::string source_id = {}, int index_in_song = 0);

}  // namespace melcomp
