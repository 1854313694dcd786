#pragma once

#include <span>
#include <vector>

#include "hummit/pitch.hpp"

namespace hummit::contour {

struct SlopeConfig {
    /// Minimal per-frame slope magnitude counted as a note transition.
    double threshold_semitones = 0.5;
    /// Minimal spacing between transitions; closer candidates merge into the
    /// strongest one — a human cannot hum two transitions this close.
    double min_gap_s = 0.1;
};

struct Segment {
    std::size_t start_frame = 0;
    std::size_t length_frames = 0;
    double pitch = 0.0;
};

/// Piecewise-constant melody: segments tile [0, total_frames) contiguously.
struct NoteContour {
    std::vector<Segment> segments;
    double frame_rate = 0.0;

    std::size_t total_frames() const {
        return segments.empty() ? 0 : segments.back().start_frame + segments.back().length_frames;
    }
};

/// First differences d[i] = x[i+1] - x[i]; length n-1.
std::vector<double> slope(std::span<const double> x);

/// Indices i where |d[i]| >= threshold, after merging candidates closer than
/// round(min_gap_s * frame_rate) frames; the largest-|d| candidate survives a
/// merge (ties keep the earlier index). Strictly increasing result.
std::vector<std::size_t> detect_transitions(std::span<const double> d, const SlopeConfig& cfg,
                                            double frame_rate);

/// Rebuilds the piecewise-constant contour with boundaries at 0, each
/// transition+1 and len(pv); each segment's pitch is the median of the pitch
/// values inside it.
NoteContour rebuild_contour(const pitch::PitchVector& pv, std::span<const std::size_t> transitions);

/// Contour expanded back to one value per frame.
std::vector<double> expand(const NoteContour& contour);

/// Full denoise -> slope -> transitions -> rebuild chain on a gap-free pitch
/// vector.
NoteContour extract_contour(const pitch::PitchVector& filled, double tv_lambda,
                            const SlopeConfig& cfg);

} // namespace hummit::contour
