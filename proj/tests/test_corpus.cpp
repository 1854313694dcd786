#include "doctest.h"

#include <fstream>

#include "hummit/binio.hpp"
#include "hummit/corpus.hpp"
#include "hummit/error.hpp"
#include "hummit/rng.hpp"
#include "testsupport.hpp"

using namespace hummit;

namespace {

std::vector<std::uint8_t> wav_header_only(int sample_rate, int channels, int bits,
                                          std::uint16_t format = 1) {
    binio::Writer w;
    w.bytes("RIFF", 4);
    w.u32(36);
    w.bytes("WAVE", 4);
    w.bytes("fmt ", 4);
    w.u32(16);
    w.u16(format);
    w.u16(static_cast<std::uint16_t>(channels));
    w.u32(static_cast<std::uint32_t>(sample_rate));
    w.u32(static_cast<std::uint32_t>(sample_rate * channels * bits / 8));
    w.u16(static_cast<std::uint16_t>(channels * bits / 8));
    w.u16(static_cast<std::uint16_t>(bits));
    w.bytes("data", 4);
    w.u32(0);
    return w.data();
}

void write_file(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
    binio::write_file_atomic(p, bytes);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    binio::write_file_atomic(p, text);
}

} // namespace

TEST_SUITE("corpus") {

TEST_CASE("decode_wav reads header fields verbatim") {
    auto audio = corpus::decode_wav(wav_header_only(8000, 1, 16));
    CHECK(audio.sample_rate == 8000);
    CHECK(audio.samples.empty());
}

TEST_CASE("16-bit scaling") {
    auto bytes = wav_header_only(8000, 1, 16);
    // patch in one sample of raw value 16384
    bytes[40] = 2; // data chunk length
    bytes.push_back(0x00);
    bytes.push_back(0x40);
    auto audio = corpus::decode_wav(bytes);
    REQUIRE(audio.samples.size() == 1);
    CHECK(audio.samples[0] == 0.5f);
}

TEST_CASE("container and format errors") {
    std::vector<std::uint8_t> junk{'J', 'U', 'N', 'K', 0, 0, 0, 0};
    CHECK_THROWS_WITH_AS(corpus::decode_wav(junk), doctest::Contains("MalformedContainer"), Error);
    CHECK_THROWS_WITH_AS(corpus::decode_wav(wav_header_only(8000, 2, 16)),
                         doctest::Contains("UnsupportedFormat"), Error);
    CHECK_THROWS_WITH_AS(corpus::decode_wav(wav_header_only(8000, 1, 24)),
                         doctest::Contains("UnsupportedFormat"), Error);
    CHECK_THROWS_WITH_AS(corpus::decode_wav(wav_header_only(8000, 1, 16, /*format=*/3)),
                         doctest::Contains("UnsupportedFormat"), Error);
    auto truncated = wav_header_only(8000, 1, 16);
    truncated[40] = 100; // declares 100 data bytes that are not there
    CHECK_THROWS_WITH_AS(corpus::decode_wav(truncated), doctest::Contains("MalformedContainer"),
                         Error);
}

TEST_CASE("8-bit PCM is unsigned around 128") {
    auto bytes = wav_header_only(8000, 1, 8);
    bytes[40] = 3;
    bytes.push_back(128); // zero
    bytes.push_back(0);   // -1.0
    bytes.push_back(255); // +127/128
    auto audio = corpus::decode_wav(bytes);
    REQUIRE(audio.samples.size() == 3);
    CHECK(audio.samples[0] == 0.0f);
    CHECK(audio.samples[1] == -1.0f);
    CHECK(audio.samples[2] == doctest::Approx(127.0 / 128.0));
}

TEST_CASE("decode inverts encode bit-exactly for 16-bit data") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        corpus::SampledAudio a;
        a.sample_rate = 8000;
        const auto n = 1 + rng.below(500);
        for (std::size_t i = 0; i < n; ++i) {
            auto raw = static_cast<std::int16_t>(rng.below(65536) - 32768);
            a.samples.push_back(static_cast<float>(raw) / 32768.0f);
        }
        auto decoded = corpus::decode_wav(testsupport::encode_wav16(a));
        CHECK(decoded.sample_rate == a.sample_rate);
        REQUIRE(decoded.samples.size() == a.samples.size());
        bool identical = true;
        for (std::size_t i = 0; i < n; ++i)
            identical = identical && decoded.samples[i] == a.samples[i];
        CHECK(identical);
    }
}

TEST_CASE("parse_midi timing") {
    corpus::NoteSequence seq;
    seq.notes.push_back({0.0, 0.5, 60}); // 480 ticks at 480 tpq, 120 bpm
    auto parsed = corpus::parse_midi(testsupport::encode_midi(seq));
    REQUIRE(parsed.notes.size() == 1);
    CHECK(parsed.notes[0].onset_s == doctest::Approx(0.0));
    CHECK(parsed.notes[0].duration_s == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(parsed.notes[0].midi_pitch == 60);
}

TEST_CASE("velocity-zero note-on ends the note") {
    // hand-built track: on(62,64) at 0, on(62,0) at 240
    std::vector<std::uint8_t> track{0x00, 0x90, 62, 64, 0x81, 0x70, 0x90, 62, 0,
                                    0x00, 0xff, 0x2f, 0x00};
    binio::Writer w;
    w.bytes("MThd", 4);
    std::uint8_t head[10] = {0, 0, 0, 6, 0, 0, 0, 1, 0x01, 0xe0};
    w.bytes(head, 10);
    w.bytes("MTrk", 4);
    std::uint8_t len[4] = {0, 0, 0, static_cast<std::uint8_t>(track.size())};
    w.bytes(len, 4);
    w.bytes(track.data(), track.size());
    auto parsed = corpus::parse_midi(w.data());
    REQUIRE(parsed.notes.size() == 1);
    CHECK(parsed.notes[0].midi_pitch == 62);
    CHECK(parsed.notes[0].duration_s == doctest::Approx(0.25).epsilon(1e-9)); // 240 ticks
}

TEST_CASE("overlap truncates the earlier note") {
    corpus::NoteSequence seq; // second onset before first off
    seq.notes.push_back({0.0, 1.0, 60});
    seq.notes.push_back({0.4, 0.5, 64});
    // encode_midi emits events in list order; overlapping on/off pairs survive
    std::vector<std::uint8_t> track;
    auto vlq = [&](std::uint32_t v) {
        if (v >= 128) track.push_back(static_cast<std::uint8_t>(0x80 | (v >> 7)));
        track.push_back(static_cast<std::uint8_t>(v & 0x7f));
    };
    vlq(0);
    track.insert(track.end(), {0x90, 60, 64});
    vlq(384); // 0.4 s at 480 tpq 120 bpm
    track.insert(track.end(), {0x90, 64, 64});
    vlq(576); // first off at 1.0 s
    track.insert(track.end(), {0x80, 60, 0});
    vlq(0);
    track.insert(track.end(), {0xff, 0x2f, 0x00});

    binio::Writer w;
    w.bytes("MThd", 4);
    std::uint8_t head[10] = {0, 0, 0, 6, 0, 0, 0, 1, 0x01, 0xe0};
    w.bytes(head, 10);
    w.bytes("MTrk", 4);
    std::uint8_t len[4] = {0, 0, 0, static_cast<std::uint8_t>(track.size())};
    w.bytes(len, 4);
    w.bytes(track.data(), track.size());

    auto parsed = corpus::parse_midi(w.data());
    REQUIRE(parsed.notes.size() == 2);
    CHECK(parsed.notes[0].duration_s == doctest::Approx(0.4).epsilon(1e-9)); // truncated
    CHECK(parsed.notes[1].onset_s == doctest::Approx(0.4).epsilon(1e-9));
    // monophonic after truncation
    for (std::size_t i = 1; i < parsed.notes.size(); ++i) {
        CHECK(parsed.notes[i].onset_s > parsed.notes[i - 1].onset_s);
        CHECK(parsed.notes[i - 1].onset_s + parsed.notes[i - 1].duration_s <=
              parsed.notes[i].onset_s + 1e-9);
    }
}

TEST_CASE("malformed midi") {
    std::vector<std::uint8_t> junk{'X', 'T', 'h', 'd', 0, 0, 0, 6};
    CHECK_THROWS_WITH_AS(corpus::parse_midi(junk), doctest::Contains("MalformedMidi"), Error);
}

TEST_CASE("random melodies round-trip within a tick") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        auto melody = testsupport::random_melody(rng, 8);
        auto parsed = corpus::parse_midi(testsupport::encode_midi(melody));
        REQUIRE(parsed.notes.size() == melody.notes.size());
        for (std::size_t i = 0; i < melody.notes.size(); ++i) {
            CHECK(parsed.notes[i].midi_pitch == melody.notes[i].midi_pitch);
            CHECK(std::fabs(parsed.notes[i].onset_s - melody.notes[i].onset_s) <= 1.1 / 960.0);
            CHECK(std::fabs(parsed.notes[i].duration_s - melody.notes[i].duration_s) <= 2.2 / 960.0);
        }
    }
}

TEST_CASE("scan mir-qbsh layout") {
    testsupport::TempDir dir;
    testsupport::CorpusSpec spec;
    spec.n_songs = 3;
    spec.queries_per_song = 2;
    spec.notes_per_song = 4;
    testsupport::make_corpus(dir.path, spec);

    auto cat = corpus::scan_corpus(dir.path, corpus::Layout::mir_qbsh);
    CHECK(cat.songs.size() == 3);
    CHECK(cat.queries.size() == 6);
    for (const auto& q : cat.queries) CHECK(cat.song_index(q.song_id) >= 0);

    SUBCASE("unreadable wav is skipped with a warning") {
        write_text(dir.path / "waveFile" / "person001" / "00002.wav", "not a wav at all");
        std::vector<std::string> warnings;
        auto cat2 = corpus::scan_corpus(dir.path, corpus::Layout::mir_qbsh, &warnings);
        CHECK(cat2.queries.size() == 5); // the broken replacement is dropped
        CHECK(warnings.size() == 1);
    }
    SUBCASE("query with no matching song is an error") {
        write_file(dir.path / "waveFile" / "person001" / "99999.wav",
                   wav_header_only(8000, 1, 16));
        CHECK_THROWS_WITH_AS(corpus::scan_corpus(dir.path, corpus::Layout::mir_qbsh),
                             doctest::Contains("AmbiguousMapping"), Error);
    }
}

TEST_CASE("empty directory is an empty corpus") {
    testsupport::TempDir dir;
    CHECK_THROWS_WITH_AS(corpus::scan_corpus(dir.path, corpus::Layout::mir_qbsh),
                         doctest::Contains("EmptyCorpus"), Error);
}

TEST_CASE("flat manifest layout") {
    testsupport::TempDir dir;
    corpus::NoteSequence m;
    m.notes.push_back({0.0, 0.5, 60});
    write_file(dir.path / "songA.mid", testsupport::encode_midi(m));
    write_file(dir.path / "songB.mid", testsupport::encode_midi(m));
    write_file(dir.path / "q1.wav", wav_header_only(8000, 1, 16));
    write_file(dir.path / "q2.wav", wav_header_only(8000, 1, 16));

    SUBCASE("well-formed manifest") {
        write_text(dir.path / "manifest.csv",
                   "query_path,song_id\nsongA.mid,A\nsongB.mid,B\nq1.wav,A\nq2.wav,B\n");
        auto cat = corpus::scan_corpus(dir.path, corpus::Layout::flat_manifest);
        CHECK(cat.songs.size() == 2);
        CHECK(cat.queries.size() == 2);
        CHECK(cat.queries[0].song_id == "A");
    }
    SUBCASE("unknown song reference") {
        write_text(dir.path / "manifest.csv",
                   "query_path,song_id\nsongA.mid,A\nsongB.mid,B\nq1.wav,A\nq2.wav,C\n");
        CHECK_THROWS_WITH_AS(corpus::scan_corpus(dir.path, corpus::Layout::flat_manifest),
                             doctest::Contains("AmbiguousMapping"), Error);
    }
    SUBCASE("missing header") {
        write_text(dir.path / "manifest.csv", "songA.mid,A\nq1.wav,A\n");
        CHECK_THROWS_WITH_AS(corpus::scan_corpus(dir.path, corpus::Layout::flat_manifest),
                             doctest::Contains("AmbiguousMapping"), Error);
    }
}

TEST_CASE("mtg layout") {
    testsupport::TempDir dir;
    std::filesystem::create_directories(dir.path / "audio");
    write_file(dir.path / "audio" / "h1.wav", wav_header_only(8000, 1, 16));
    write_file(dir.path / "audio" / "h2.wav", wav_header_only(8000, 1, 16));
    write_text(dir.path / "queries.csv",
               "query,target\naudio/h1.wav,artist1 - tune\naudio/h2.wav,artist2 - other\n");
    auto cat = corpus::scan_corpus(dir.path, corpus::Layout::mtg_qbh);
    CHECK(cat.songs.size() == 2);
    CHECK(cat.queries.size() == 2);
    CHECK(cat.songs[0].midi_path.empty());
}

} // TEST_SUITE
