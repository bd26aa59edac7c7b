#include "moodpipe/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <set>

namespace moodpipe {

namespace {

constexpr std::array<std::string_view, kEmotionCount> kEmotionNames = {
    "amazement", "solemnity", "tenderness",        "nostalgia", "calmness",
    "power",     "joyful_activation", "tension",   "sadness",
};

constexpr std::array<std::string_view, 4> kGenreNames = {"classical", "rock", "pop", "electronic"};

std::string normalize_header(std::string_view s) {
  std::string out;
  for (char c : trim(s)) {
    if (c == ' ' || c == '-') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

std::string_view emotion_name(Emotion e) { return kEmotionNames[index_of(e)]; }

std::optional<Emotion> parse_emotion(std::string_view name) {
  const std::string n = normalize_header(name);
  for (std::size_t i = 0; i < kEmotionCount; ++i)
    if (n == kEmotionNames[i]) return kAllEmotions[i];
  return std::nullopt;
}

std::string_view genre_name(Genre g) { return kGenreNames[static_cast<std::size_t>(g)]; }

std::optional<Genre> parse_genre(std::string_view name) {
  const std::string n = normalize_header(name);
  for (std::size_t i = 0; i < kGenreNames.size(); ++i)
    if (n == kGenreNames[i]) return static_cast<Genre>(i);
  return std::nullopt;
}

AnnotationTable::AnnotationTable(std::vector<AnnotationRecord> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.track_id == 0) throw InputError("annotation record " + std::to_string(i) + ": track id must be positive");
    if (r.selections.count() > kMaxSelections) {
      throw InputError("annotation record " + std::to_string(i) + ": more than 3 emotions selected");
    }
    ++counts_[r.track_id];
    auto [it, inserted] = genres_.emplace(r.track_id, r.genre);
    if (!inserted && it->second != r.genre) {
      throw InputError("track " + std::to_string(r.track_id) + " listed under two genres");
    }
  }
  track_ids_.reserve(counts_.size());
  for (const auto& [id, n] : counts_) track_ids_.push_back(id);
}

std::size_t AnnotationTable::annotation_count(std::uint32_t track_id) const {
  auto it = counts_.find(track_id);
  return it == counts_.end() ? 0 : it->second;
}

std::optional<Genre> AnnotationTable::genre_of(std::uint32_t track_id) const {
  auto it = genres_.find(track_id);
  if (it == genres_.end()) return std::nullopt;
  return it->second;
}

bool AnnotationTable::contains(std::uint32_t track_id) const { return counts_.contains(track_id); }

AnnotationTable parse_annotations(std::istream& in, std::vector<std::string>* warnings) {
  std::string line;
  std::size_t line_no = 0;
  // Skip leading blank lines; the first non-blank line is the header.
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw InputError("annotation file is empty");

  const auto header = split(line, ',');
  std::optional<std::size_t> id_col, genre_col;
  std::array<std::optional<std::size_t>, kEmotionCount> emotion_cols{};
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = normalize_header(header[c]);
    if (name == "track_id" || name == "trackid" || name == "track") {
      id_col = c;
    } else if (name == "genre") {
      genre_col = c;
    } else if (auto e = parse_emotion(name)) {
      emotion_cols[index_of(*e)] = c;
    } else if (warnings) {
      warnings->push_back("ignoring column '" + std::string(trim(header[c])) + "'");
    }
  }
  if (!id_col) throw InputError("annotation header lacks a track id column");
  if (!genre_col) throw InputError("annotation header lacks a genre column");
  for (std::size_t i = 0; i < kEmotionCount; ++i) {
    if (!emotion_cols[i]) {
      throw InputError("annotation header lacks emotion column '" + std::string(kEmotionNames[i]) + "'");
    }
  }

  std::vector<AnnotationRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    const auto fail = [&](const std::string& what) -> InputError {
      return InputError("annotation row " + std::to_string(line_no) + ": " + what);
    };
    if (cells.size() < header.size()) throw fail("expected " + std::to_string(header.size()) + " cells");

    AnnotationRecord rec;
    const auto id_text = trim(cells[*id_col]);
    std::uint64_t id = 0;
    auto [p, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc{} || p != id_text.data() + id_text.size() || id == 0 ||
        id > std::numeric_limits<std::uint32_t>::max()) {
      throw fail("invalid track id '" + std::string(id_text) + "'");
    }
    rec.track_id = static_cast<std::uint32_t>(id);

    auto genre = parse_genre(cells[*genre_col]);
    if (!genre) throw fail("unknown genre '" + std::string(trim(cells[*genre_col])) + "'");
    rec.genre = *genre;

    for (std::size_t i = 0; i < kEmotionCount; ++i) {
      const auto v = trim(cells[*emotion_cols[i]]);
      if (v == "1") {
        rec.selections.set(i);
      } else if (v != "0") {
        throw fail("emotion '" + std::string(kEmotionNames[i]) + "' must be 0 or 1, got '" + std::string(v) + "'");
      }
    }
    if (rec.selections.count() > kMaxSelections) throw fail("more than 3 emotions selected");
    records.push_back(rec);
  }
  if (records.empty()) throw InputError("annotation file has no data rows");
  return AnnotationTable(std::move(records));
}

AnnotationTable load_annotations(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open annotation file " + path.string());
  return parse_annotations(in, warnings);
}

void write_annotations(std::ostream& out, const AnnotationTable& table) {
  out << "track_id,genre";
  for (auto name : kEmotionNames) out << ',' << name;
  out << '\n';
  for (const auto& r : table.records()) {
    out << r.track_id << ',' << genre_name(r.genre);
    for (std::size_t i = 0; i < kEmotionCount; ++i) out << ',' << (r.selections.test(i) ? '1' : '0');
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// WAV

namespace {

std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct ParsedWav {
  AudioInfo info;
  std::size_t data_offset = 0;
  std::size_t data_bytes = 0;
};

bool looks_like_mp3(std::string_view bytes) {
  if (bytes.substr(0, 3) == "ID3") return true;
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
         (static_cast<unsigned char>(bytes[1]) & 0xE0) == 0xE0;
}

ParsedWav parse_wav_header(std::string_view bytes, std::string_view name, bool require_full_data) {
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::string who(name);
  if (looks_like_mp3(bytes)) {
    throw InputError(who + ": mp3 input is not supported; convert the corpus to WAV first");
  }
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    throw InputError(who + ": not a RIFF/WAVE file");
  }
  ParsedWav out;
  bool have_fmt = false;
  std::uint16_t bits = 0;
  std::uint16_t code = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(pos, 4);
    const std::size_t size = le32(b + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) throw InputError(who + ": malformed fmt chunk");
      code = le16(b + body);
      out.info.channels = le16(b + body + 2);
      out.info.sample_rate = le32(b + body + 4);
      bits = le16(b + body + 14);
      if (code == 0xFFFE && size >= 40) code = le16(b + body + 24);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw InputError(who + ": data chunk before fmt chunk");
      out.data_offset = body;
      out.data_bytes = size;
      const std::size_t available = bytes.size() - body;
      if (require_full_data && size > available) {
        throw InputError(who + ": truncated data chunk: expected " + std::to_string(size) + " bytes, got " +
                         std::to_string(available));
      }
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw InputError(who + ": missing fmt chunk");
  if (out.data_offset == 0) throw InputError(who + ": missing data chunk");

  if (code == 1 && bits == 16) {
    out.info.format = SampleFormat::kPcm16;
  } else if (code == 3 && bits == 32) {
    out.info.format = SampleFormat::kFloat32;
  } else {
    throw InputError(who + ": unsupported format (code " + std::to_string(code) + ", " + std::to_string(bits) +
                     " bits); only PCM16 and float32 are accepted");
  }
  if (out.info.channels != 1 && out.info.channels != 2) {
    throw InputError(who + ": unsupported channel count " + std::to_string(out.info.channels));
  }
  if (out.info.sample_rate == 0) throw InputError(who + ": sample rate is zero");
  const std::size_t frame_bytes = out.info.channels * (bits / 8);
  out.info.frames = out.data_bytes / frame_bytes;
  return out;
}

std::string read_file(const std::filesystem::path& path, std::size_t limit = std::string::npos) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  if (limit == std::string::npos) {
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  std::string buf(limit, '\0');
  in.read(buf.data(), static_cast<std::streamsize>(limit));
  buf.resize(static_cast<std::size_t>(in.gcount()));
  return buf;
}

}  // namespace

AudioClip decode_wav(std::string_view bytes, std::string_view name) {
  const ParsedWav w = parse_wav_header(bytes, name, true);
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data()) + w.data_offset;
  AudioClip clip;
  clip.sample_rate = w.info.sample_rate;
  clip.samples.resize(w.info.frames);
  const std::size_t ch = w.info.channels;
  for (std::size_t f = 0; f < w.info.frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < ch; ++c) {
      double v;
      if (w.info.format == SampleFormat::kPcm16) {
        const auto raw = static_cast<std::int16_t>(le16(b + (f * ch + c) * 2));
        v = static_cast<double>(raw) / 32768.0;
      } else {
        const std::uint32_t bits = le32(b + (f * ch + c) * 4);
        float fv;
        std::memcpy(&fv, &bits, sizeof fv);
        v = std::clamp(static_cast<double>(fv), -1.0, 1.0);
      }
      acc += v;
    }
    clip.samples[f] = ch == 1 ? acc : acc / static_cast<double>(ch);
  }
  return clip;
}

AudioClip load_audio(const std::filesystem::path& path) {
  if (path.extension() == ".mp3") {
    throw InputError(path.string() + ": mp3 input is not supported; convert the corpus to WAV first");
  }
  return decode_wav(read_file(path), path.string());
}

AudioInfo probe_audio(const std::filesystem::path& path) {
  if (path.extension() == ".mp3") {
    throw InputError(path.string() + ": mp3 input is not supported; convert the corpus to WAV first");
  }
  // Headers of the files we accept fit in a few hundred bytes.
  const std::string head = read_file(path, 4096);
  ParsedWav w = parse_wav_header(head, path.string(), false);
  const auto total = std::filesystem::file_size(path);
  const std::size_t available = total > w.data_offset ? total - w.data_offset : 0;
  if (w.data_bytes > available) {
    throw InputError(path.string() + ": truncated data chunk: expected " + std::to_string(w.data_bytes) +
                     " bytes, got " + std::to_string(available));
  }
  return w.info;
}

void write_wav(const std::filesystem::path& path, const std::vector<std::vector<double>>& channels,
               std::uint32_t sample_rate, SampleFormat format) {
  if (channels.empty() || channels.size() > 2) throw Error("write_wav: need 1 or 2 channels");
  const std::size_t frames = channels.front().size();
  for (const auto& c : channels)
    if (c.size() != frames) throw Error("write_wav: channel lengths differ");
  const std::uint16_t nch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(frames * nch * (bits / 8));

  std::string out;
  const auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
  };
  const auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  out += "RIFF";
  put32(36 + data_bytes);
  out += "WAVEfmt ";
  put32(16);
  put16(format == SampleFormat::kPcm16 ? 1 : 3);
  put16(nch);
  put32(sample_rate);
  put32(sample_rate * nch * (bits / 8));
  put16(static_cast<std::uint16_t>(nch * (bits / 8)));
  put16(bits);
  out += "data";
  put32(data_bytes);
  for (std::size_t f = 0; f < frames; ++f) {
    for (const auto& c : channels) {
      const double v = std::clamp(c[f], -1.0, 1.0);
      if (format == SampleFormat::kPcm16) {
        const long q = std::lround(v * 32768.0);
        put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
      } else {
        const float fv = static_cast<float>(v);
        std::uint32_t bitsv;
        std::memcpy(&bitsv, &fv, sizeof fv);
        put32(bitsv);
      }
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::optional<std::filesystem::path> find_track_audio(const std::filesystem::path& audio_dir,
                                                      std::uint32_t track_id, std::optional<Genre> genre) {
  const std::string file = std::to_string(track_id) + ".wav";
  std::error_code ec;
  if (auto p = audio_dir / file; std::filesystem::is_regular_file(p, ec)) return p;
  if (genre) {
    if (auto p = audio_dir / std::string(genre_name(*genre)) / file; std::filesystem::is_regular_file(p, ec)) {
      return p;
    }
  }
  return std::nullopt;
}

namespace {

std::optional<std::uint32_t> numeric_stem(const std::filesystem::path& p) {
  const std::string stem = p.stem().string();
  std::uint32_t id = 0;
  auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), id);
  if (ec != std::errc{} || ptr != stem.data() + stem.size() || id == 0) return std::nullopt;
  return id;
}

}  // namespace

CorpusReport validate_corpus(const AnnotationTable& table, const std::filesystem::path& audio_dir) {
  CorpusReport report;
  report.track_count = table.track_ids().size();
  report.annotation_count = table.records().size();
  for (std::uint32_t id : table.track_ids()) {
    ++report.tracks_per_genre[std::string(genre_name(*table.genre_of(id)))];
  }

  std::error_code ec;
  const bool dir_ok = std::filesystem::is_directory(audio_dir, ec);
  if (!dir_ok) report.problems.push_back("audio directory not found: " + audio_dir.string());

  std::size_t min_samples = std::numeric_limits<std::size_t>::max();
  double min_dur = std::numeric_limits<double>::infinity();
  double max_dur = 0.0;
  for (std::uint32_t id : table.track_ids()) {
    std::optional<std::filesystem::path> p;
    if (dir_ok) p = find_track_audio(audio_dir, id, table.genre_of(id));
    if (!p) {
      report.missing_audio.push_back(id);
      continue;
    }
    try {
      const AudioInfo info = probe_audio(*p);
      report.audio_paths[id] = p->string();
      min_samples = std::min(min_samples, info.frames);
      const double d = static_cast<double>(info.frames) / info.sample_rate;
      min_dur = std::min(min_dur, d);
      max_dur = std::max(max_dur, d);
    } catch (const InputError& e) {
      report.problems.push_back(e.what());
      report.missing_audio.push_back(id);
    }
  }

  if (dir_ok) {
    std::set<std::uint32_t> orphans;
    const auto scan = [&](const std::filesystem::path& dir) {
      for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext == ".mp3") {
          report.problems.push_back(entry.path().string() + ": mp3 is not supported; convert to WAV first");
          continue;
        }
        if (ext != ".wav") continue;
        if (auto id = numeric_stem(entry.path()); id && !table.contains(*id)) orphans.insert(*id);
      }
    };
    scan(audio_dir);
    for (auto name : kGenreNames) {
      if (std::filesystem::is_directory(audio_dir / std::string(name), ec)) scan(audio_dir / std::string(name));
    }
    report.audio_without_annotations.assign(orphans.begin(), orphans.end());
  }

  if (!report.audio_paths.empty()) {
    report.min_samples = min_samples;
    report.min_duration_seconds = min_dur;
    report.max_duration_seconds = max_dur;
  }
  return report;
}

nlohmann::json to_json(const CorpusReport& r) {
  nlohmann::json j;
  j["track_count"] = r.track_count;
  j["annotation_count"] = r.annotation_count;
  j["tracks_per_genre"] = r.tracks_per_genre;
  j["missing_audio"] = r.missing_audio;
  j["audio_without_annotations"] = r.audio_without_annotations;
  j["min_samples"] = r.min_samples;
  j["min_duration_seconds"] = r.min_duration_seconds;
  j["max_duration_seconds"] = r.max_duration_seconds;
  j["problems"] = r.problems;
  return j;
}

}  // namespace moodpipe
