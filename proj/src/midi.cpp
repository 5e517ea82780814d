#include "melcomp/midi.h"

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>

#include "melcomp/error.h"

namespace melcomp {

namespace {

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  bool done() const { return pos_ >= data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint8_t peek() {
    need(1);
    return data_[pos_];
  }
  std::uint32_t be(int bytes) {
    std::uint32_t v = 0;
    for (int i = 0; i < bytes; ++i) v = (v << 8) | u8();
    return v;
  }
  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return v;
    }
    throw ParseError("variable-length quantity longer than 4 bytes");
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw ParseError("unexpected end of MIDI data");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

struct RawNoteEvent {
  std::uint64_t tick = 0;
  bool on = false;
  int pitch = 0;
};

struct RawFile {
  int ppq = 0;
  std::vector<RawNoteEvent> notes;
  std::vector<std::uint64_t> markers;
  std::optional<TimeSignature> time_signature;
};

void read_track(ByteReader& track, const std::vector<std::uint8_t>& marker_types, RawFile& out) {
  std::uint64_t tick = 0;
  std::uint8_t running = 0;
  while (!track.done()) {
    tick += track.vlq();
    std::uint8_t status = track.peek();
    if (status & 0x80) {
      track.u8();
    } else if (running == 0) {
      throw ParseError("data byte without running status");
    } else {
      status = running;
    }

    if (status == 0xFF) {
      std::uint8_t type = track.u8();
      auto payload = track.take(track.vlq());
      if (type == 0x2F) break;
      if (std::find(marker_types.begin(), marker_types.end(), type) != marker_types.end()) {
        out.markers.push_back(tick);
      }
      if (type == 0x58 && payload.size() >= 2 && !out.time_signature) {
        out.time_signature = TimeSignature{payload[0], 1 << payload[1]};
      }
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      track.take(track.vlq());
      continue;
    }
    if (status >= 0xF0) throw ParseError("unsupported system message in track");

    running = status;
    std::uint8_t kind = status & 0xF0;
    std::uint8_t d1 = track.u8();
    std::uint8_t d2 = (kind == 0xC0 || kind == 0xD0) ? 0 : track.u8();
    if (kind == 0x90 && d2 > 0) {
      out.notes.push_back({tick, true, d1});
    } else if (kind == 0x80 || kind == 0x90) {
      out.notes.push_back({tick, false, d1});
    }
  }
}

RawFile read_raw(std::span<const std::uint8_t> bytes, const std::vector<std::uint8_t>& marker_types) {
  ByteReader r(bytes);
  auto id = r.take(4);
  if (std::string_view(reinterpret_cast<const char*>(id.data()), 4) != "MThd") {
    throw ParseError("missing MThd header");
  }
  std::uint32_t header_len = r.be(4);
  if (header_len < 6) throw ParseError("MThd chunk too short");
  std::uint32_t format = r.be(2);
  std::uint32_t ntracks = r.be(2);
  std::uint32_t division = r.be(2);
  r.take(header_len - 6);
  if (format > 1) throw ParseError("unsupported SMF format " + std::to_string(format));
  if (division & 0x8000) throw ParseError("SMPTE time division is not supported");
  if (division == 0) throw ParseError("zero ticks per quarter note");

  RawFile raw;
  raw.ppq = static_cast<int>(division);
  std::uint32_t tracks_seen = 0;
  while (!r.done()) {
    auto chunk_id = r.take(4);
    std::string_view name(reinterpret_cast<const char*>(chunk_id.data()), 4);
    std::uint32_t len = r.be(4);
    if (name != "MTrk") throw ParseError("unknown chunk '" + std::string(name) + "'");
    ByteReader track(r.take(len));
    read_track(track, marker_types, raw);
    ++tracks_seen;
  }
  if (tracks_seen != ntracks) {
    throw ParseError("header declares " + std::to_string(ntracks) + " tracks, found " + std::to_string(tracks_seen));
  }
  return raw;
}

RationalTime quantize(std::uint64_t tick, int ppq) {
  // Round half up to the nearest grid step.
  auto q = static_cast<std::int64_t>((2 * tick * kGridDivisions + static_cast<std::uint64_t>(ppq)) /
                                     (2 * static_cast<std::uint64_t>(ppq)));
  return RationalTime(q, kGridDivisions);
}

void append_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while ((v >>= 7) != 0) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n > 0) out.push_back(buf[--n]);
}

void append_be(std::vector<std::uint8_t>& out, std::uint32_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

}  // namespace

Melody parse_midi(std::span<const std::uint8_t> bytes, const MidiReadOptions& options) {
  RawFile raw = read_raw(bytes, options.marker_types);

  // Note-offs sort before note-ons on the same tick so that legato
  // successions are not mistaken for overlaps.
  std::stable_sort(raw.notes.begin(), raw.notes.end(), [](const RawNoteEvent& a, const RawNoteEvent& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    return !a.on && b.on;
  });

  struct Span {
    std::uint64_t start, end;
    int pitch;
  };
  std::vector<Span> spans;
  RawNoteEvent sounding;
  bool active = false;
  for (const auto& ev : raw.notes) {
    if (ev.on) {
      if (active) {
        throw PolyphonicInput("notes " + std::to_string(sounding.pitch) + " and " + std::to_string(ev.pitch) +
                              " overlap at tick " + std::to_string(ev.tick));
      }
      sounding = ev;
      active = true;
    } else if (active && sounding.pitch == ev.pitch) {
      spans.push_back({sounding.tick, ev.tick, ev.pitch});
      active = false;
    }
  }
  if (active) throw ParseError("note " + std::to_string(sounding.pitch) + " is never released");

  Phrase all;
  RationalTime cursor;
  for (const auto& s : spans) {
    RationalTime start = quantize(s.start, raw.ppq);
    RationalTime end = quantize(s.end, raw.ppq);
    if (end <= start) continue;
    int pitch = s.pitch + options.transpose;
    if (pitch < 0 || pitch > 127) {
      throw ParseError("transposed pitch " + std::to_string(pitch) + " outside 0..127");
    }
    if (start > cursor) all.notes.push_back(Note{std::nullopt, start - cursor, cursor});
    all.notes.push_back(Note{pitch, end - start, start});
    cursor = end;
  }

  Melody melody;
  melody.transpose_applied = options.transpose;
  melody.time_signature = raw.time_signature.value_or(TimeSignature{});
  melody.phrases.push_back(std::move(all));
  for (auto tick : raw.markers) melody.markers.push_back(quantize(tick, raw.ppq));
  std::sort(melody.markers.begin(), melody.markers.end());
  melody.markers.erase(std::unique(melody.markers.begin(), melody.markers.end()), melody.markers.end());
  return melody;
}

std::vector<std::uint8_t> write_midi(std::span<const Phrase> phrases, const MidiWriteOptions& options) {
  auto to_ticks = [&](const RationalTime& t) -> std::uint32_t {
    RationalTime ticks = t * RationalTime(options.ppq);
    if (ticks.denominator() != 1 || ticks.numerator() < 0) {
      throw std::invalid_argument("time " + t.to_string() + " is not representable at " +
                                  std::to_string(options.ppq) + " PPQ");
    }
    return static_cast<std::uint32_t>(ticks.numerator());
  };

  std::vector<std::uint8_t> track;
  auto meta = [&](std::uint32_t delta, std::uint8_t type, std::initializer_list<std::uint8_t> data) {
    append_vlq(track, delta);
    track.push_back(0xFF);
    track.push_back(type);
    append_vlq(track, static_cast<std::uint32_t>(data.size()));
    track.insert(track.end(), data.begin(), data.end());
  };

  std::uint32_t us_per_quarter = 60'000'000u / static_cast<std::uint32_t>(options.tempo_bpm);
  meta(0, 0x51, {static_cast<std::uint8_t>(us_per_quarter >> 16), static_cast<std::uint8_t>(us_per_quarter >> 8),
                 static_cast<std::uint8_t>(us_per_quarter)});
  meta(0, 0x58, {4, 2, 24, 8});
  meta(0, 0x59, {0, 0});

  std::uint32_t last_tick = 0;
  RationalTime phrase_start;
  for (std::size_t p = 0; p < phrases.size(); ++p) {
    if (p > 0) {
      std::uint32_t t = to_ticks(phrase_start);
      append_vlq(track, t - last_tick);
      last_tick = t;
      const std::string_view text = "phrase";
      track.push_back(0xFF);
      track.push_back(kMetaMarker);
      append_vlq(track, static_cast<std::uint32_t>(text.size()));
      track.insert(track.end(), text.begin(), text.end());
    }
    for (const auto& note : phrases[p].notes) {
      if (note.is_rest()) continue;
      if (*note.pitch < 0 || *note.pitch > 127) throw std::invalid_argument("pitch outside 0..127");
      auto key = static_cast<std::uint8_t>(*note.pitch);
      std::uint32_t on = to_ticks(phrase_start + note.onset);
      std::uint32_t off = to_ticks(phrase_start + note.end());
      append_vlq(track, on - last_tick);
      track.insert(track.end(), {0x90, key, options.velocity});
      append_vlq(track, off - on);
      track.insert(track.end(), {0x80, key, 0});
      last_tick = off;
    }
    phrase_start += phrases[p].total_duration();
  }
  meta(to_ticks(phrase_start) - last_tick, 0x2F, {});

  std::vector<std::uint8_t> out;
  for (char c : std::string_view("MThd")) out.push_back(static_cast<std::uint8_t>(c));
  append_be(out, 6, 4);
  append_be(out, 0, 2);
  append_be(out, 1, 2);
  append_be(out, static_cast<std::uint32_t>(options.ppq), 2);
  for (char c : std::string_view("MTrk")) out.push_back(static_cast<std::uint8_t>(c));
  append_be(out, static_cast<std::uint32_t>(track.size()), 4);
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

std::vector<std::uint8_t> write_midi(const Phrase& phrase, const MidiWriteOptions& options) {
  return write_midi(std::span<const Phrase>(&phrase, 1), options);
}

}  // namespace melcomp
