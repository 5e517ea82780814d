// Corpus ingestion: filename transposition infixes, phrase splitting,
// statistics, and the normalized corpus archive.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "melcomp/midi.h"
#include "melcomp/score.h"

namespace melcomp {

/// Semitone shift encoded in a file name just before ".mid"/".midi":
/// "_m2" means -2, "_p3" means +3, no infix means 0. The result is added to
/// every pitch. Throws ParseError naming the file for "_m"/"_p" without
/// digits.
int parse_transpose_infix(std::string_view filename);

/// Splits the melody (all phrases flattened) at the given markers. Markers
/// falling strictly inside a note snap to that note's onset; markers at or
/// outside the melody bounds are ignored.
std::vector<Phrase> split_phrases(const Melody& melody, const std::vector<RationalTime>& markers,
                                  const std::string& source_id = {});

struct CorpusStats {
  std::size_t songs = 0;
  std::size_t phrases = 0;
  double mean_phrases_per_song = 0.0;
  double mean_phrase_len_bars = 0.0;
};

CorpusStats corpus_stats(const std::vector<Melody>& melodies);

enum class FileStatus { kOk, kSkippedPolyphonic, kError };
std::string_view to_string(FileStatus status);

/// One ingested song in its normalized form.
struct CorpusEntry {
  std::string file;
  std::string sha256;
  Melody melody;
};

struct ReportRow {
  std::string file;
  FileStatus status = FileStatus::kOk;
  std::size_t phrases = 0;
  RationalTime total_counts;
  std::string message;
};

struct IngestResult {
  std::vector<CorpusEntry> entries;
  std::vector<ReportRow> report;
  std::size_t usable() const { return entries.size(); }
};

/// Reads one MIDI file: applies the infix transposition, requires 4/4 and
/// splits phrases at the configured markers.
CorpusEntry load_midi_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& marker_types);

/// Ingests every *.mid / *.midi file of a directory in sorted filename
/// order. Per-file failures are reported, not thrown.
IngestResult ingest_directory(const std::filesystem::path& dir, const std::vector<std::uint8_t>& marker_types);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

/// JSON archive of ingested songs. Deterministic: same entries give the
/// same bytes.
std::string corpus_to_json(const std::vector<CorpusEntry>& entries);
std::vector<CorpusEntry> corpus_from_json(std::string_view text);

}  // namespace melcomp
