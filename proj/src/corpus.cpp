#include "hummit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>

#include "hummit/binio.hpp"
#include "hummit/error.hpp"

namespace fs = std::filesystem;

namespace hummit::corpus {

int Catalog::song_index(const std::string& song_id) const {
    for (std::size_t i = 0; i < songs.size(); ++i)
        if (songs[i].song_id == song_id) return static_cast<int>(i);
    return -1;
}

// ---------------------------------------------------------------------------
// WAV
// ---------------------------------------------------------------------------

SampledAudio decode_wav(std::span<const std::uint8_t> bytes) {
    binio::Reader r(bytes.data(), bytes.size());
    char magic[4];
    if (bytes.size() < 12) raise("MalformedContainer", "file shorter than a RIFF header");
    r.bytes(magic, 4);
    if (std::string_view(magic, 4) != "RIFF") raise("MalformedContainer", "missing RIFF magic");
    r.u32(); // declared riff size; chunk walk below bounds-checks anyway
    r.bytes(magic, 4);
    if (std::string_view(magic, 4) != "WAVE") raise("MalformedContainer", "missing WAVE tag");

    bool have_fmt = false;
    std::uint16_t format_code = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    std::optional<std::pair<std::size_t, std::size_t>> data_span; // offset, length

    while (r.remaining() >= 8) {
        r.bytes(magic, 4);
        std::uint32_t chunk_len = r.u32();
        std::string_view id(magic, 4);
        if (id == "fmt ") {
            if (chunk_len < 16 || r.remaining() < chunk_len)
                raise("MalformedContainer", "fmt chunk truncated");
            std::size_t end = r.pos() + chunk_len;
            format_code = r.u16();
            channels = r.u16();
            sample_rate = r.u32();
            r.u32(); // byte rate
            r.u16(); // block align
            bits = r.u16();
            r.skip(end - r.pos());
            have_fmt = true;
        } else if (id == "data") {
            if (r.remaining() < chunk_len) raise("MalformedContainer", "data chunk truncated");
            data_span = {r.pos(), chunk_len};
            r.skip(chunk_len);
        } else {
            if (r.remaining() < chunk_len) raise("MalformedContainer", "chunk truncated");
            r.skip(chunk_len);
        }
        if (chunk_len % 2 == 1 && r.remaining() > 0) r.skip(1); // RIFF chunks are word-aligned
    }

    if (!have_fmt) raise("MalformedContainer", "no fmt chunk");
    if (!data_span) raise("MalformedContainer", "no data chunk");
    if (format_code != 1) raise("UnsupportedFormat", "only PCM (format 1) is supported");
    if (channels != 1) raise("UnsupportedFormat", "only mono is supported");
    if (bits != 8 && bits != 16) raise("UnsupportedFormat", "only 8- or 16-bit PCM is supported");
    if (sample_rate == 0) raise("MalformedContainer", "zero sample rate");

    SampledAudio out;
    out.sample_rate = static_cast<int>(sample_rate);
    const std::uint8_t* p = bytes.data() + data_span->first;
    std::size_t len = data_span->second;
    if (bits == 16) {
        std::size_t n = len / 2;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::int16_t s = static_cast<std::int16_t>(
                static_cast<std::uint16_t>(p[2 * i]) | static_cast<std::uint16_t>(p[2 * i + 1]) << 8);
            out.samples[i] = static_cast<float>(s) / 32768.0f;
        }
    } else {
        out.samples.resize(len);
        for (std::size_t i = 0; i < len; ++i)
            out.samples[i] = (static_cast<float>(p[i]) - 128.0f) / 128.0f;
    }
    return out;
}

// ---------------------------------------------------------------------------
// MIDI
// ---------------------------------------------------------------------------

namespace {

struct TempoPoint {
    std::int64_t tick;
    std::uint32_t us_per_quarter;
};

std::uint32_t read_vlq(binio::Reader& r) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        std::uint8_t b = r.u8();
        v = (v << 7) | (b & 0x7f);
        if (!(b & 0x80)) return v;
    }
    raise("MalformedMidi", "variable-length quantity longer than 4 bytes");
}

struct RawNote {
    std::int64_t on_tick;
    std::int64_t off_tick;
    int pitch;
};

// Converts a tick to seconds given the sorted tempo map.
double ticks_to_seconds(std::int64_t tick, const std::vector<TempoPoint>& tempi, int ticks_per_quarter) {
    double seconds = 0.0;
    std::int64_t prev_tick = 0;
    std::uint32_t us = 500000; // 120 bpm default
    for (const auto& tp : tempi) {
        if (tp.tick >= tick) break;
        seconds += static_cast<double>(tp.tick - prev_tick) * us * 1e-6 / ticks_per_quarter;
        prev_tick = tp.tick;
        us = tp.us_per_quarter;
    }
    seconds += static_cast<double>(tick - prev_tick) * us * 1e-6 / ticks_per_quarter;
    return seconds;
}

} // namespace

NoteSequence parse_midi(std::span<const std::uint8_t> bytes) {
    binio::Reader r(bytes.data(), bytes.size());
    char magic[4];
    try {
        r.bytes(magic, 4);
        if (std::string_view(magic, 4) != "MThd") raise("MalformedMidi", "missing MThd magic");
        if (r.u32be() != 6) raise("MalformedMidi", "unexpected MThd length");
        std::uint16_t format = r.u16be();
        std::uint16_t ntracks = r.u16be();
        std::uint16_t division = r.u16be();
        if (format > 1) raise("MalformedMidi", "only SMF format 0/1 is supported");

        bool smpte = division & 0x8000;
        double tick_seconds_smpte = 0.0;
        int ticks_per_quarter = 0;
        if (smpte) {
            int fps = -static_cast<std::int8_t>(division >> 8);
            int tpf = division & 0xff;
            if (fps <= 0 || tpf == 0) raise("MalformedMidi", "bad SMPTE division");
            tick_seconds_smpte = 1.0 / (fps * tpf);
        } else {
            ticks_per_quarter = division & 0x7fff;
            if (ticks_per_quarter == 0) raise("MalformedMidi", "zero ticks per quarter");
        }

        std::vector<TempoPoint> tempi;
        std::vector<RawNote> raw;

        for (int t = 0; t < ntracks; ++t) {
            r.bytes(magic, 4);
            if (std::string_view(magic, 4) != "MTrk") raise("MalformedMidi", "missing MTrk chunk");
            std::uint32_t track_len = r.u32be();
            if (r.remaining() < track_len) raise("MalformedMidi", "track chunk truncated");
            binio::Reader tr(bytes.data() + r.pos(), track_len);
            r.skip(track_len);

            std::int64_t tick = 0;
            std::uint8_t status = 0;
            std::map<int, std::int64_t> open_notes; // pitch -> on tick
            auto close_note = [&](int pitch, std::int64_t off_tick) {
                auto it = open_notes.find(pitch);
                if (it == open_notes.end()) return; // stray note-off
                raw.push_back({it->second, off_tick, pitch});
                open_notes.erase(it);
            };

            while (tr.remaining() > 0) {
                tick += read_vlq(tr);
                std::uint8_t b = tr.u8();
                if (b == 0xff) { // meta
                    std::uint8_t type = tr.u8();
                    std::uint32_t len = read_vlq(tr);
                    if (type == 0x51 && len == 3) {
                        std::uint32_t us = 0;
                        for (int i = 0; i < 3; ++i) us = (us << 8) | tr.u8();
                        tempi.push_back({tick, us});
                    } else {
                        if (type == 0x2f) { // end of track
                            tr.skip(len);
                            break;
                        }
                        tr.skip(len);
                    }
                    continue;
                }
                if (b == 0xf0 || b == 0xf7) { // sysex
                    std::uint32_t len = read_vlq(tr);
                    tr.skip(len);
                    continue;
                }
                std::uint8_t data0;
                if (b & 0x80) {
                    status = b;
                    data0 = tr.u8();
                } else {
                    if (!(status & 0x80)) raise("MalformedMidi", "data byte without running status");
                    data0 = b;
                }
                switch (status & 0xf0) {
                case 0x80: { // note off
                    tr.u8();
                    close_note(data0, tick);
                    break;
                }
                case 0x90: { // note on; velocity 0 means off
                    std::uint8_t vel = tr.u8();
                    if (vel == 0) {
                        close_note(data0, tick);
                    } else {
                        open_notes[data0] = tick;
                    }
                    break;
                }
                case 0xa0:
                case 0xb0:
                case 0xe0:
                    tr.u8();
                    break;
                case 0xc0:
                case 0xd0:
                    break;
                default:
                    raise("MalformedMidi", "unexpected status byte");
                }
            }
            // Notes left open end where the track data ends.
            for (auto& [pitch, on_tick] : open_notes)
                if (tick > on_tick) raw.push_back({on_tick, tick, pitch});
        }

        std::sort(tempi.begin(), tempi.end(),
                  [](const TempoPoint& a, const TempoPoint& b) { return a.tick < b.tick; });
        std::sort(raw.begin(), raw.end(), [](const RawNote& a, const RawNote& b) {
            if (a.on_tick != b.on_tick) return a.on_tick < b.on_tick;
            return a.pitch < b.pitch;
        });

        NoteSequence seq;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            std::int64_t off = raw[i].off_tick;
            if (i + 1 < raw.size() && raw[i + 1].on_tick < off) {
                if (raw[i + 1].on_tick == raw[i].on_tick)
                    raise("PolyphonyError", "two notes share an onset; cannot truncate");
                off = raw[i + 1].on_tick; // truncate at the successor's onset
            }
            if (off <= raw[i].on_tick) continue;
            double onset, end;
            if (smpte) {
                onset = raw[i].on_tick * tick_seconds_smpte;
                end = off * tick_seconds_smpte;
            } else {
                onset = ticks_to_seconds(raw[i].on_tick, tempi, ticks_per_quarter);
                end = ticks_to_seconds(off, tempi, ticks_per_quarter);
            }
            seq.notes.push_back({onset, end - onset, raw[i].pitch});
        }
        return seq;
    } catch (const Error& e) {
        if (e.kind() == "Truncated") raise("MalformedMidi", "file truncated");
        throw;
    }
}

// ---------------------------------------------------------------------------
// Corpus scanning
// ---------------------------------------------------------------------------

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool has_ext(const fs::path& p, std::initializer_list<const char*> exts) {
    std::string e = lower(p.extension().string());
    for (const char* x : exts)
        if (e == x) return true;
    return false;
}

void note_skip(std::vector<std::string>* warnings, const std::string& msg) {
    if (warnings) warnings->push_back(msg);
}

// Header-level decode check; full decoding of a large corpus at scan time
// would be wasteful.
bool wav_header_ok(const fs::path& p, std::vector<std::string>* warnings) {
    try {
        auto bytes = binio::read_file(p);
        decode_wav(bytes);
        return true;
    } catch (const Error& e) {
        note_skip(warnings, "skipped " + p.string() + " (" + e.kind() + ")");
        return false;
    }
}

std::vector<fs::path> sorted_files_with_ext(const fs::path& root, std::initializer_list<const char*> exts) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        if (has_ext(entry.path(), exts)) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end()); // deterministic catalog order
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
    auto bytes = binio::read_file(file);
    std::string text(bytes.begin(), bytes.end());
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        rows.push_back(std::move(cells));
    }
    return rows;
}

Catalog scan_mir_qbsh(const fs::path& root, std::vector<std::string>* warnings) {
    Catalog cat;
    for (const auto& mid : sorted_files_with_ext(root, {".mid", ".midi"})) {
        std::string id = mid.stem().string();
        if (cat.song_index(id) >= 0)
            raise("AmbiguousMapping", "two MIDI files share the song id " + id);
        cat.songs.push_back({id, id, mid});
    }
    if (cat.songs.empty()) raise("EmptyCorpus", "no MIDI songs under " + root.string());
    for (const auto& wav : sorted_files_with_ext(root, {".wav"})) {
        if (!wav_header_ok(wav, warnings)) continue;
        std::string sid = wav.stem().string();
        if (cat.song_index(sid) < 0)
            raise("AmbiguousMapping", wav.string() + " matches no song");
        cat.queries.push_back({fs::relative(wav, root).generic_string(), wav, sid, Layout::mir_qbsh});
    }
    return cat;
}

Catalog scan_mtg_qbh(const fs::path& root, std::vector<std::string>* warnings) {
    fs::path csv = root / "queries.csv";
    if (!fs::exists(csv)) raise("EmptyCorpus", "no queries.csv under " + root.string());
    auto rows = read_csv(csv);
    Catalog cat;
    for (std::size_t i = 1; i < rows.size(); ++i) { // row 0 is the header
        if (rows[i].size() < 2) raise("AmbiguousMapping", "queries.csv row with fewer than 2 columns");
        fs::path wav = root / rows[i][0];
        const std::string& sid = rows[i][1];
        if (cat.song_index(sid) < 0) cat.songs.push_back({sid, sid, {}});
        if (!fs::exists(wav)) {
            note_skip(warnings, "skipped " + wav.string() + " (missing file)");
            continue;
        }
        if (!wav_header_ok(wav, warnings)) continue;
        cat.queries.push_back({rows[i][0], wav, sid, Layout::mtg_qbh});
    }
    if (cat.songs.empty()) raise("EmptyCorpus", "queries.csv lists no songs");
    return cat;
}

Catalog scan_flat_manifest(const fs::path& root, std::vector<std::string>* warnings) {
    fs::path csv = root / "manifest.csv";
    if (!fs::exists(csv)) raise("EmptyCorpus", "no manifest.csv under " + root.string());
    auto rows = read_csv(csv);
    if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "query_path" || rows[0][1] != "song_id")
        raise("AmbiguousMapping", "manifest.csv must start with header query_path,song_id");
    Catalog cat;
    std::vector<std::pair<std::string, std::string>> query_rows;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() < 2) raise("AmbiguousMapping", "manifest row with fewer than 2 columns");
        const std::string& path = rows[i][0];
        const std::string& sid = rows[i][1];
        if (has_ext(path, {".mid", ".midi"})) {
            if (cat.song_index(sid) >= 0)
                raise("AmbiguousMapping", "song " + sid + " declared twice");
            cat.songs.push_back({sid, sid, root / path});
        } else {
            query_rows.emplace_back(path, sid);
        }
    }
    if (cat.songs.empty()) raise("EmptyCorpus", "manifest declares no songs");
    for (const auto& [path, sid] : query_rows) {
        if (cat.song_index(sid) < 0)
            raise("AmbiguousMapping", path + " references unknown song " + sid);
        fs::path wav = root / path;
        if (!fs::exists(wav)) {
            note_skip(warnings, "skipped " + wav.string() + " (missing file)");
            continue;
        }
        if (!wav_header_ok(wav, warnings)) continue;
        cat.queries.push_back({path, wav, sid, Layout::flat_manifest});
    }
    return cat;
}

} // namespace

Catalog scan_corpus(const fs::path& root, Layout layout, std::vector<std::string>* warnings) {
    if (!fs::exists(root) || !fs::is_directory(root))
        raise("EmptyCorpus", root.string() + " is not a directory");
    Catalog cat;
    switch (layout) {
    case Layout::mir_qbsh: cat = scan_mir_qbsh(root, warnings); break;
    case Layout::mtg_qbh: cat = scan_mtg_qbh(root, warnings); break;
    case Layout::flat_manifest: cat = scan_flat_manifest(root, warnings); break;
    }
    // query ids must be unique (they double as stable keys for splits)
    std::vector<std::string> ids;
    ids.reserve(cat.queries.size());
    for (const auto& q : cat.queries) ids.push_back(q.query_id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        raise("AmbiguousMapping", "duplicate query id in corpus");
    return cat;
}

Layout layout_from_name(const std::string& name) {
    if (name == "mir-qbsh") return Layout::mir_qbsh;
    if (name == "mtg-qbh") return Layout::mtg_qbh;
    if (name == "flat-manifest") return Layout::flat_manifest;
    raise("UnknownLayout", "layout must be mir-qbsh, mtg-qbh or flat-manifest");
}

std::string layout_name(Layout layout) {
    switch (layout) {
    case Layout::mir_qbsh: return "mir-qbsh";
    case Layout::mtg_qbh: return "mtg-qbh";
    case Layout::flat_manifest: return "flat-manifest";
    }
    return {};
}

} // namespace hummit::corpus
