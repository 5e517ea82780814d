#include "melcomp/score.h"

#include <algorithm>
#include <stdexcept>

namespace melcomp {

RationalTime Phrase::total_duration() const {
  RationalTime total;
  for (const auto& n : notes) total += n.duration;
  return total;
}

bool Phrase::has_pitch() const {
  return std::any_of(notes.begin(), notes.end(), [](const Note& n) { return !n.is_rest(); });
}

std::vector<Note> Melody::flattened() const {
  std::vector<Note> out;
  for (const auto& phrase : phrases) {
    for (auto note : phrase.notes) {
      note.onset += phrase.start;
      out.push_back(note);
    }
  }
  return out;
}

void check_phrase(const Phrase& phrase) {
  RationalTime expected;
  for (std::size_t i = 0; i < phrase.notes.size(); ++i) {
    const auto& n = phrase.notes[i];
    if (n.duration <= RationalTime(0)) {
      throw std::invalid_argument("note " + std::to_string(i) + " has non-positive duration");
    }
    if (n.pitch && (*n.pitch < 0 || *n.pitch > 127)) {
      throw std::invalid_argument("note " + std::to_string(i) + " pitch out of range");
    }
    if (n.onset != expected) {
      throw std::invalid_argument("note " + std::to_string(i) + " onset " + n.onset.to_string() +
                                  " breaks the gap-free layout (expected " + expected.to_string() + ")");
    }
    expected += n.duration;
  }
}

Phrase make_phrase(const std::vector<std::pair<std::optional<int>, RationalTime>>& notes,
                   std::string source_id, int index_in_song) {
  Phrase phrase;
  phrase.source_id = std::move(source_id);
  phrase.index_in_song = index_in_song;
  RationalTime onset;
  for (const auto& [pitch, duration] : notes) {
    phrase.notes.push_back(Note{pitch, duration, onset});
    onset += duration;
  }
  return phrase;
}

}  // namespace melcomp
