// Standard MIDI File reading and writing for monophonic melodies.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "melcomp/score.h"

namespace melcomp {

/// Onsets and durations are quantized to 1/kGridDivisions of a quarter note.
inline constexpr std::int64_t kGridDivisions = 24;

inline constexpr std::uint8_t kMetaText = 0x01;
inline constexpr std::uint8_t kMetaMarker = 0x06;

struct MidiReadOptions {
  int transpose = 0;
  /// Meta event types treated as phrase separators.
  std::vector<std::uint8_t> marker_types{kMetaText, kMetaMarker};
};

/// Decodes a format 0/1 SMF into a Melody holding a single phrase that
/// spans the whole file (start 0, rests made explicit) plus the marker
/// positions. Tempo is ignored.
///
/// Throws PolyphonicInput when two notes overlap and ParseError for any
/// structural problem (unknown chunk, truncated data, SMPTE division,
/// transposed pitch out of range).
Melody parse_midi(std::span<const std::uint8_t> bytes, const MidiReadOptions& options = {});

struct MidiWriteOptions {
  int ppq = 480;
  int tempo_bpm = 120;
  std::uint8_t velocity = 80;
};

/// Writes phrases back to back as a format 0 file with a tempo, 4/4 meter
/// and C major key signature. A Marker meta event is emitted at the start
/// of every phrase after the first.
std::vector<std::uint8_t> write_midi(std::span<const Phrase> phrases, const MidiWriteOptions& options = {});
std::vector<std::uint8_t> write_midi(const Phrase& phrase, const MidiWriteOptions& options = {});

}  // namespace melcomp
