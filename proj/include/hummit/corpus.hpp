#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hummit::corpus {

/// Decoded mono PCM with amplitudes normalized to [-1, 1].
struct SampledAudio {
    int sample_rate = 0;
    std::vector<float> samples;
};

struct Note {
    double onset_s = 0.0;
    double duration_s = 0.0;
    int midi_pitch = 0;
};

/// Monophonic, non-overlapping, onset-ordered.
struct NoteSequence {
    std::vector<Note> notes;
};

enum class Layout { mir_qbsh, mtg_qbh, flat_manifest };

struct SongEntry {
    std::string song_id;
    std::string title;
    std::filesystem::path midi_path; // empty for corpora without ground-truth MIDI
};

struct QueryEntry {
    std::string query_id;
    std::filesystem::path wav_path;
    std::string song_id;
    Layout corpus_tag = Layout::mir_qbsh;
};

/// Immutable song/query index over a corpus directory.
struct Catalog {
    std::vector<SongEntry> songs;
    std::vector<QueryEntry> queries;

    int song_index(const std::string& song_id) const; // -1 if absent
};

/// RIFF/WAVE PCM decoder, mono, 8- or 16-bit. Stereo and compressed codecs
/// are rejected (UnsupportedFormat), not downmixed: the corpora are specified
/// mono and silent coercion would mask corpus defects.
SampledAudio decode_wav(std::span<const std::uint8_t> bytes);

/// SMF format 0/1 reader producing a monophonic note list. Note-on with
/// velocity 0 closes the note; an overlapping successor truncates its
/// predecessor at the new onset. Tempo defaults to 120 bpm when no set-tempo
/// event exists.
NoteSequence parse_midi(std::span<const std::uint8_t> bytes);

/// Walks `root` following the named layout convention. Unreadable or
/// undecodable files are skipped; a note per skip lands in *warnings when
/// given. Errors: EmptyCorpus, AmbiguousMapping.
///
/// Layouts:
///   mir-qbsh      — ground-truth .mid files anywhere under root (stem =
///                   song_id); every .wav is a query whose stem names its
///                   song.
///   mtg-qbh       — root/queries.csv, header skipped, col 0 = wav path
///                   relative to root, col 1 = song_id; no MIDI.
///   flat-manifest — root/manifest.csv with header `query_path,song_id`;
///                   rows whose path ends in .mid declare a song, all other
///                   rows are queries. Paths relative to root.
Catalog scan_corpus(const std::filesystem::path& root, Layout layout,
                    std::vector<std::string>* warnings = nullptr);

Layout layout_from_name(const std::string& name);
std::string layout_name(Layout layout);

} // namespace hummit::corpus
