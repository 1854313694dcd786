#pragma once

#include <span>
#include <vector>

#include "hummit/corpus.hpp"

namespace hummit::pitch {

/// Uniformly sampled F0 trajectory in MIDI-scale semitones with a per-frame
/// voicing mask.
struct PitchVector {
    double frame_rate = 0.0;
    std::vector<double> values;
    std::vector<bool> voiced;

    std::size_t size() const { return values.size(); }
};

struct PitchConfig {
    double frame_length_s = 0.040;
    double hop_s = 0.010;
    double f0_min_hz = 60.0;
    double f0_max_hz = 500.0;
    /// Minimal normalized-autocorrelation peak value for a frame to count as
    /// voiced. Free parameter, not constrained by any corpus convention.
    double voicing_threshold = 0.45;
};

/// 69 + 12*log2(f/440). Errors with NonPositiveFrequency for f <= 0.
double hz_to_semitone(double f_hz);

double semitone_to_hz(double semitone);

/// Frame-wise normalized-autocorrelation F0 tracker with parabolic lag
/// refinement. One frame per hop; frames are unvoiced when the best peak
/// ratio falls under cfg.voicing_threshold or the frame's mean-square energy
/// is below 1e-6 of full scale.
PitchVector estimate_f0(const corpus::SampledAudio& audio, const PitchConfig& cfg);

/// Linearly interpolates interior unvoiced runs and edge-fills leading and
/// trailing ones. Output mask is all-true. Errors with AllUnvoiced when no
/// frame is voiced.
PitchVector fill_unvoiced(const PitchVector& pv);

/// One value per line, `0` meaning unvoiced; the frame rate travels
/// out-of-band (CLI flag --pv-frame-rate).
PitchVector read_pitch_text(const std::string& text, double frame_rate);
std::string write_pitch_text(const PitchVector& pv);

} // namespace hummit::pitch
