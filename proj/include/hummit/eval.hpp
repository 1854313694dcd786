#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hummit/contour.hpp"
#include "hummit/corpus.hpp"
#include "hummit/dataset.hpp"
#include "hummit/net.hpp"
#include "hummit/pitch.hpp"

namespace hummit::eval {

/// Knobs of the melody-extraction chain shared by every pipeline consumer.
struct PipelineConfig {
    pitch::PitchConfig pitch;
    double tv_lambda = 0.3;
    contour::SlopeConfig slope;
};

struct ExtractionResult {
    std::vector<dataset::QueryContours> contours; // successfully extracted queries
    corpus::Catalog catalog;                      // input catalog minus failed queries
    std::vector<std::string> warnings;
};

/// Runs decode -> F0 -> fill -> TV denoise -> slope filter for every query
/// in the catalog, fanning out across queries. Queries that fail (silence,
/// too short) are dropped with a warning rather than poisoning the corpus.
ExtractionResult extract_contours(const corpus::Catalog& catalog, const PipelineConfig& cfg);

/// Top-1 fraction: rank-1 song equals the truth. Errors: LengthMismatch,
/// NoQueries.
double accuracy(const std::vector<std::vector<net::RankedSong>>& predictions,
                const std::vector<std::string>& truths);

struct ReportRow {
    std::string label;
    double query_accuracy = 0.0;
    double frame_accuracy = 0.0;
    int n_queries = 0;
    int n_classes = 0;
    std::uint64_t seed = 0;
    bool reference = false; // reported in prior work, not reproduced here
};

struct EvalReport {
    std::vector<ReportRow> rows;
    /// Measured with-augmentation accuracy >= measured without-augmentation.
    bool tvr_check_passed = false;

    std::string to_text() const;
    std::string to_json() const;
};

struct AblationConfig {
    PipelineConfig pipeline;
    dataset::DatasetConfig data;
    net::TrainConfig train;
    std::uint64_t seed = 0; // drives split and training init/shuffle
};

/// Trains and evaluates, on one identical split: the retrieval network with
/// and without denoised-query augmentation, plus the MLP baseline with
/// augmentation. Reference accuracies from prior published comparisons are
/// appended as fixed rows.
EvalReport run_ablation(const corpus::Catalog& catalog, const AblationConfig& cfg);

} // namespace hummit::eval
