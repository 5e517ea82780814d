#include "melcomp/corpus.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "json_util.h"
#include "melcomp/error.h"

namespace melcomp {

namespace {

std::string_view strip_extension(std::string_view name) {
  for (std::string_view ext : {".midi", ".mid"}) {
    if (name.size() >= ext.size()) {
      auto tail = name.substr(name.size() - ext.size());
      if (std::equal(tail.begin(), tail.end(), ext.begin(),
                     [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == b; })) {
        return name.substr(0, name.size() - ext.size());
      }
    }
  }
  return {};
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int parse_transpose_infix(std::string_view filename) {
  auto slash = filename.find_last_of("/\\");
  std::string_view base = slash == std::string_view::npos ? filename : filename.substr(slash + 1);
  std::string_view stem = strip_extension(base);
  if (stem.empty()) throw ParseError(std::string(filename) + ": not a .mid/.midi file name");

  std::size_t digits = 0;
  while (digits < stem.size() && std::isdigit(static_cast<unsigned char>(stem[stem.size() - 1 - digits]))) ++digits;
  std::size_t sign_pos = stem.size() - digits;
  if (sign_pos < 2 || stem[sign_pos - 2] != '_' || (stem[sign_pos - 1] != 'm' && stem[sign_pos - 1] != 'p')) {
    return 0;
  }
  if (digits == 0) {
    throw ParseError(std::string(filename) + ": transposition infix '_" + stem[sign_pos - 1] + "' has no digits");
  }
  int k = std::stoi(std::string(stem.substr(sign_pos)));
  return stem[sign_pos - 1] == 'm' ? -k : k;
}

std::vector<Phrase> split_phrases(const Melody& melody, const std::vector<RationalTime>& markers,
                                  const std::string& source_id) {
  std::vector<Note> notes = melody.flattened();
  std::vector<Phrase> phrases;
  if (notes.empty()) return phrases;
  RationalTime begin = notes.front().onset;
  RationalTime end = notes.back().end();

  std::vector<RationalTime> bounds{begin};
  for (const auto& m : markers) {
    if (m <= begin || m >= end) continue;
    auto it = std::find_if(notes.begin(), notes.end(), [&](const Note& n) { return n.end() > m; });
    bounds.push_back(it->onset);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  bounds.push_back(end);

  std::size_t next = 0;
  for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
    Phrase phrase;
    phrase.source_id = source_id;
    phrase.index_in_song = static_cast<int>(b);
    phrase.start = bounds[b];
    while (next < notes.size() && notes[next].onset < bounds[b + 1]) {
      Note n = notes[next++];
      n.onset -= phrase.start;
      phrase.notes.push_back(n);
    }
    phrases.push_back(std::move(phrase));
  }
  return phrases;
}

CorpusStats corpus_stats(const std::vector<Melody>& melodies) {
  CorpusStats stats;
  if (melodies.empty()) return stats;
  double bars = 0.0;
  stats.songs = melodies.size();
  for (const auto& m : melodies) {
    stats.phrases += m.phrases.size();
    for (const auto& p : m.phrases) bars += p.total_duration().to_double() / 4.0;
  }
  stats.mean_phrases_per_song = static_cast<double>(stats.phrases) / static_cast<double>(stats.songs);
  if (stats.phrases > 0) stats.mean_phrase_len_bars = bars / static_cast<double>(stats.phrases);
  return stats;
}

std::string_view to_string(FileStatus status) {
  switch (status) {
    case FileStatus::kOk:
      return "ok";
    case FileStatus::kSkippedPolyphonic:
      return "skipped_polyphonic";
    case FileStatus::kError:
      return "error";
  }
  return "error";
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

CorpusEntry load_midi_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& marker_types) {
  auto bytes = read_bytes(path);
  MidiReadOptions options;
  options.transpose = parse_transpose_infix(path.filename().string());
  options.marker_types = marker_types;

  CorpusEntry entry;
  entry.file = path.filename().string();
  entry.sha256 = sha256_hex(bytes);
  entry.melody = parse_midi(bytes, options);
  const auto& ts = entry.melody.time_signature;
  if (ts != TimeSignature{4, 4}) {
    throw ParseError(entry.file + ": time signature " + std::to_string(ts.numerator) + "/" +
                     std::to_string(ts.denominator) + " is not 4/4");
  }
  entry.melody.phrases = split_phrases(entry.melody, entry.melody.markers, entry.file);
  return entry;
}

IngestResult ingest_directory(const std::filesystem::path& dir, const std::vector<std::uint8_t>& marker_types) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("cannot read directory " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && !strip_extension(e.path().filename().string()).empty()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  IngestResult result;
  for (const auto& path : files) {
    ReportRow row;
    row.file = path.filename().string();
    try {
      CorpusEntry entry = load_midi_file(path, marker_types);
      row.phrases = entry.melody.phrases.size();
      for (const auto& p : entry.melody.phrases) row.total_counts += p.total_duration();
      result.entries.push_back(std::move(entry));
    } catch (const PolyphonicInput& e) {
      row.status = FileStatus::kSkippedPolyphonic;
      row.message = e.what();
    } catch (const Error& e) {
      row.status = FileStatus::kError;
      row.message = e.what();
    }
    result.report.push_back(std::move(row));
  }
  return result;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "file,status,phrases,total_counts\n";
  for (const auto& r : rows) {
    out << r.file << ',' << to_string(r.status) << ',' << r.phrases << ',' << r.total_counts.to_string() << '\n';
  }
}

std::string corpus_to_json(const std::vector<CorpusEntry>& entries) {
  using nlohmann::json;
  json files = json::array();
  for (const auto& e : entries) {
    json phrases = json::array();
    for (const auto& p : e.melody.phrases) {
      json notes = json::array();
      for (const auto& n : p.notes) {
        notes.push_back(json::array({n.pitch ? json(*n.pitch) : json(nullptr), n.duration.to_string()}));
      }
      phrases.push_back({{"index", p.index_in_song}, {"start", p.start.to_string()}, {"notes", std::move(notes)}});
    }
    files.push_back({{"file", e.file},
                     {"sha256", e.sha256},
                     {"transpose", e.melody.transpose_applied},
                     {"time_signature", {e.melody.time_signature.numerator, e.melody.time_signature.denominator}},
                     {"phrases", std::move(phrases)}});
  }
  json root{{"version", 1}, {"kind", "corpus"}, {"files", std::move(files)}};
  return root.dump(2) + "\n";
}

std::vector<CorpusEntry> corpus_from_json(std::string_view text) {
  using namespace json_util;
  json root = parse(text);
  if (integer(field(root, "version", ""), "/version") != 1) throw SchemaError("/version", "unsupported version");
  std::vector<CorpusEntry> entries;
  const auto& files = array(field(root, "files", ""), "/files");
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::string fp = child("/files", i);
    const json& f = files[i];
    CorpusEntry e;
    e.file = string(field(f, "file", fp), child(fp, "file"));
    e.sha256 = string(field(f, "sha256", fp), child(fp, "sha256"));
    e.melody.transpose_applied = static_cast<int>(integer(field(f, "transpose", fp), child(fp, "transpose")));
    const auto& ts = array(field(f, "time_signature", fp), child(fp, "time_signature"));
    if (ts.size() != 2) throw SchemaError(child(fp, "time_signature"), "expected [numerator, denominator]");
    e.melody.time_signature = {static_cast<int>(integer(ts[0], child(fp, "time_signature/0"))),
                               static_cast<int>(integer(ts[1], child(fp, "time_signature/1")))};
    const auto& phrases = array(field(f, "phrases", fp), child(fp, "phrases"));
    for (std::size_t k = 0; k < phrases.size(); ++k) {
      std::string pp = child(child(fp, "phrases"), k);
      Phrase p;
      p.source_id = e.file;
      p.index_in_song = static_cast<int>(integer(field(phrases[k], "index", pp), child(pp, "index")));
      p.start = rational(field(phrases[k], "start", pp), child(pp, "start"));
      const auto& notes = array(field(phrases[k], "notes", pp), child(pp, "notes"));
      RationalTime onset;
      for (std::size_t n = 0; n < notes.size(); ++n) {
        std::string np = child(child(pp, "notes"), n);
        if (!notes[n].is_array() || notes[n].size() != 2) throw SchemaError(np, "expected [pitch|null, duration]");
        Note note;
        if (!notes[n][0].is_null()) note.pitch = static_cast<int>(integer(notes[n][0], child(np, 0)));
        note.duration = rational(notes[n][1], child(np, 1));
        note.onset = onset;
        onset += note.duration;
        p.notes.push_back(note);
      }
      try {
        check_phrase(p);
      } catch (const std::invalid_argument& ex) {
        throw SchemaError(pp, ex.what());
      }
      e.melody.phrases.push_back(std::move(p));
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace melcomp
