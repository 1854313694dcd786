#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hummit/corpus.hpp"

namespace hummit::dataset {

enum class Variant : std::uint8_t { raw = 0, denoised = 1 };
enum class Split : std::uint8_t { train = 0, validation = 1 };

/// One fixed-length, mean-normalized window of a query's contour.
struct QueryFrame {
    std::vector<float> values;
    std::uint32_t label = 0;
    std::string source_query; // empty when loaded from a cache file
    Variant variant = Variant::raw;
    Split split = Split::train;
};

struct LabeledDataset {
    std::vector<QueryFrame> frames;
    std::uint32_t n_classes = 0;
    std::vector<std::string> class_names;
    std::size_t frame_len = 0;
};

struct DatasetConfig {
    double window_s = 5.0;
    double hop_s = 2.0;
    double frame_rate = 100.0;
    bool augment_with_denoised = false;
    bool include_mtg = false;
    std::uint64_t seed = 0;

    std::size_t window_frames() const;
    std::size_t hop_frames() const;
};

/// Per-query contour signals feeding build_dataset. `raw` is the gap-filled
/// noisy pitch vector; `denoised` the expanded piecewise-constant contour
/// (may stay empty when augmentation is off).
struct QueryContours {
    std::string query_id;
    std::string song_id;
    std::vector<double> raw;
    std::vector<double> denoised;
    double frame_rate = 100.0;
};

/// Splits a contour into windows starting at hop multiples that fit
/// entirely; a contour shorter than one window yields a single window
/// right-padded with its last value.
std::vector<std::vector<double>> frame_query(std::span<const double> values, const DatasetConfig& cfg);

/// Subtracts the frame mean. Transposed hums (x and x+7) normalize
/// identically, which is the whole point: keys differ, melodies match.
std::vector<double> normalize_frame(std::span<const double> values);

/// Piecewise-constant rate conversion by nearest source index.
std::vector<double> resample_steps(std::span<const double> values, double fps_in, double fps_out);

/// Assembles frames, labels and the seeded 75/25 query-wise split. Denoised
/// variants are appended for training queries only: validation stays on raw
/// hums, and a denoised twin of a validation query in the training set would
/// leak the answer.
LabeledDataset build_dataset(const corpus::Catalog& catalog, std::span<const QueryContours> contours,
                             const DatasetConfig& cfg);

/// Dataset cache file (magic HUMDS1). Frame records carry label, variant,
/// split and values only, so source_query is not recoverable from a cache.
void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset load_dataset(const std::filesystem::path& path);

} // namespace hummit::dataset
