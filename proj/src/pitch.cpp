#include "hummit/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hummit/error.hpp"

namespace hummit::pitch {

double hz_to_semitone(double f_hz) {
    if (!(f_hz > 0.0)) raise("NonPositiveFrequency", "frequency must be positive");
    return 69.0 + 12.0 * std::log2(f_hz / 440.0);
}

double semitone_to_hz(double semitone) {
    return 440.0 * std::exp2((semitone - 69.0) / 12.0);
}

namespace {

struct FrameResult {
    double semitone = 0.0;
    bool voiced = false;
};

// Normalized autocorrelation of one frame over [lag_min, lag_max]:
//   nac(L) = sum x[t] x[t+L] / sqrt(sum x[t]^2 * sum x[t+L]^2),
// both sums over t in [0, n-L). Amplitude cancels, so voicing decisions are
// scale-invariant down to the absolute energy floor.
FrameResult analyze_frame(const float* x, int n, int lag_min, int lag_max, int sample_rate,
                          double voicing_threshold) {
    FrameResult out;

    double energy = 0.0;
    for (int t = 0; t < n; ++t) energy += static_cast<double>(x[t]) * x[t];
    if (energy / n <= 1e-6) return out; // below 1e-6 of full-scale mean square

    const int nlags = lag_max - lag_min + 1;
    std::vector<double> nac(nlags, -1.0);
    // prefix sums of x^2 make the sliding norms O(1) per lag
    std::vector<double> sq(n + 1, 0.0);
    for (int t = 0; t < n; ++t) sq[t + 1] = sq[t] + static_cast<double>(x[t]) * x[t];

    for (int lag = lag_min; lag <= lag_max; ++lag) {
        const int m = n - lag;
        if (m < 2) break;
        double cross = 0.0;
        for (int t = 0; t < m; ++t) cross += static_cast<double>(x[t]) * x[t + lag];
        double norm = std::sqrt(sq[m] * (sq[n] - sq[lag]));
        if (norm > 0.0) nac[lag - lag_min] = cross / norm;
    }

    // Candidate lags are local maxima of the nac curve. Among candidates
    // within 90% of the global best, take the shortest lag: period multiples
    // score nearly as high as the true period and would otherwise win on
    // noise, folding the estimate down an octave.
    double best = -1.0;
    for (double v : nac) best = std::max(best, v);
    if (best < voicing_threshold) return out;

    int chosen = -1;
    for (int i = 0; i < nlags; ++i) {
        bool left_ok = (i == 0) || nac[i] >= nac[i - 1];
        bool right_ok = (i == nlags - 1) || nac[i] >= nac[i + 1];
        if (left_ok && right_ok && nac[i] >= 0.9 * best) {
            chosen = i;
            break;
        }
    }
    if (chosen < 0) return out;

    double refined = chosen;
    if (chosen > 0 && chosen < nlags - 1) {
        double a = nac[chosen - 1], b = nac[chosen], c = nac[chosen + 1];
        double denom = a - 2.0 * b + c;
        if (denom < 0.0) {
            double shift = 0.5 * (a - c) / denom;
            if (std::fabs(shift) <= 1.0) refined += shift;
        }
    }

    double lag = refined + lag_min;
    if (lag <= 0.0) return out;
    out.voiced = true;
    out.semitone = hz_to_semitone(static_cast<double>(sample_rate) / lag);
    return out;
}

} // namespace

PitchVector estimate_f0(const corpus::SampledAudio& audio, const PitchConfig& cfg) {
    if (audio.sample_rate <= 0) raise("InvalidConfig", "audio sample rate must be positive");
    if (!(cfg.f0_min_hz > 0.0) || !(cfg.f0_min_hz < cfg.f0_max_hz))
        raise("InvalidConfig", "need 0 < f0_min_hz < f0_max_hz");
    if (cfg.frame_length_s < 2.0 / cfg.f0_min_hz)
        raise("InvalidConfig", "frame shorter than two periods of f0_min_hz");

    const int sr = audio.sample_rate;
    const int frame_len = std::max(2, static_cast<int>(std::lround(cfg.frame_length_s * sr)));
    const int hop = std::max(1, static_cast<int>(std::lround(cfg.hop_s * sr)));
    const auto n = static_cast<long>(audio.samples.size());
    if (n < frame_len) raise("AudioTooShort", "audio shorter than one analysis frame");

    int lag_min = std::max(2, static_cast<int>(std::floor(sr / cfg.f0_max_hz)));
    int lag_max = std::min(frame_len - 2, static_cast<int>(std::ceil(sr / cfg.f0_min_hz)));
    if (lag_max <= lag_min) raise("InvalidConfig", "F0 search range empty at this sample rate");

    const long n_frames = (n - frame_len) / hop + 1;
    PitchVector pv;
    pv.frame_rate = static_cast<double>(sr) / hop;
    pv.values.assign(n_frames, 0.0);
    pv.voiced.assign(n_frames, false);

    std::vector<FrameResult> results(n_frames);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n_frames; ++i) {
        results[i] = analyze_frame(audio.samples.data() + i * hop, frame_len, lag_min, lag_max, sr,
                                   cfg.voicing_threshold);
    }
    for (long i = 0; i < n_frames; ++i) {
        pv.values[i] = results[i].voiced ? results[i].semitone : 0.0;
        pv.voiced[i] = results[i].voiced;
    }
    return pv;
}

PitchVector fill_unvoiced(const PitchVector& pv) {
    const std::size_t n = pv.size();
    if (pv.voiced.size() != n) raise("LengthMismatch", "values and voiced mask differ in length");
    std::size_t first = n, last = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (pv.voiced[i]) {
            if (first == n) first = i;
            last = i;
        }
    }
    if (first == n) raise("AllUnvoiced", "no voiced frame to interpolate from");

    PitchVector out;
    out.frame_rate = pv.frame_rate;
    out.values = pv.values;
    out.voiced.assign(n, true);

    for (std::size_t i = 0; i < first; ++i) out.values[i] = pv.values[first];
    for (std::size_t i = last + 1; i < n; ++i) out.values[i] = pv.values[last];

    std::size_t i = first;
    while (i <= last) {
        if (pv.voiced[i]) {
            ++i;
            continue;
        }
        // [gap_start, gap_end) is an interior unvoiced run
        std::size_t gap_start = i;
        std::size_t gap_end = i;
        while (!pv.voiced[gap_end]) ++gap_end; // last is voiced, so this terminates
        double a = pv.values[gap_start - 1];
        double b = pv.values[gap_end];
        double span = static_cast<double>(gap_end - (gap_start - 1));
        for (std::size_t j = gap_start; j < gap_end; ++j)
            out.values[j] = a + (b - a) * (static_cast<double>(j - (gap_start - 1)) / span);
        i = gap_end;
    }
    return out;
}

PitchVector read_pitch_text(const std::string& text, double frame_rate) {
    if (!(frame_rate > 0.0)) raise("InvalidConfig", "frame rate must be positive");
    PitchVector pv;
    pv.frame_rate = frame_rate;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(line, &used);
        } catch (const std::exception&) {
            raise("MalformedPitchFile", "line " + std::to_string(lineno) + " is not a number");
        }
        while (used < line.size() && std::isspace(static_cast<unsigned char>(line[used]))) ++used;
        if (used != line.size())
            raise("MalformedPitchFile", "trailing characters on line " + std::to_string(lineno));
        pv.values.push_back(v == 0.0 ? 0.0 : v);
        pv.voiced.push_back(v != 0.0);
    }
    return pv;
}

std::string write_pitch_text(const PitchVector& pv) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < pv.size(); ++i) {
        if (pv.voiced[i])
            out << pv.values[i] << '\n';
        else
            out << "0\n";
    }
    return out.str();
}

} // namespace hummit::pitch
