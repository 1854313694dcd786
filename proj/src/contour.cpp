#include "hummit/contour.hpp"

#include <algorithm>
#include <cmath>

#include "hummit/error.hpp"
#include "hummit/tvr.hpp"

namespace hummit::contour {

std::vector<double> slope(std::span<const double> x) {
    if (x.size() < 2) raise("SignalTooShort", "slope needs at least two samples");
    std::vector<double> d(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
    return d;
}

std::vector<std::size_t> detect_transitions(std::span<const double> d, const SlopeConfig& cfg,
                                            double frame_rate) {
    if (!(frame_rate > 0.0)) raise("InvalidConfig", "frame rate must be positive");
    if (!(cfg.threshold_semitones > 0.0) || !(cfg.min_gap_s > 0.0))
        raise("InvalidConfig", "threshold and min gap must be positive");
    const auto gap = static_cast<std::size_t>(std::lround(cfg.min_gap_s * frame_rate));

    std::vector<std::size_t> kept;
    bool have_current = false;
    std::size_t cur = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (std::fabs(d[i]) < cfg.threshold_semitones) continue;
        if (!have_current) {
            cur = i;
            have_current = true;
            continue;
        }
        if (i - cur < gap) {
            // conflict window: the stronger slope wins, earlier index on ties
            if (std::fabs(d[i]) > std::fabs(d[cur])) cur = i;
        } else {
            kept.push_back(cur);
            cur = i;
        }
    }
    if (have_current) kept.push_back(cur);
    return kept;
}

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    double hi = *mid;
    double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

} // namespace

NoteContour rebuild_contour(const pitch::PitchVector& pv, std::span<const std::size_t> transitions) {
    const std::size_t n = pv.size();
    if (n == 0) raise("EmptyContour", "pitch vector is empty");

    std::vector<std::size_t> bounds;
    bounds.push_back(0);
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        std::size_t t = transitions[i];
        if (t + 1 >= n) raise("InvalidTransitionIndex", "transition past the last slope index");
        if (i > 0 && transitions[i] <= transitions[i - 1])
            raise("InvalidTransitionIndex", "transitions must be strictly increasing");
        bounds.push_back(t + 1); // d[t] fires between frames t and t+1
    }
    bounds.push_back(n);

    NoteContour out;
    out.frame_rate = pv.frame_rate;
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        std::vector<double> vals(pv.values.begin() + static_cast<std::ptrdiff_t>(bounds[s]),
                                 pv.values.begin() + static_cast<std::ptrdiff_t>(bounds[s + 1]));
        out.segments.push_back({bounds[s], bounds[s + 1] - bounds[s], median_of(std::move(vals))});
    }
    return out;
}

std::vector<double> expand(const NoteContour& contour) {
    std::vector<double> out(contour.total_frames());
    for (const auto& seg : contour.segments)
        for (std::size_t i = 0; i < seg.length_frames; ++i) out[seg.start_frame + i] = seg.pitch;
    return out;
}

NoteContour extract_contour(const pitch::PitchVector& filled, double tv_lambda,
                            const SlopeConfig& cfg) {
    if (filled.size() == 0) raise("EmptyContour", "pitch vector is empty");
    auto denoised = tvr::denoise_tv(filled.values, {tv_lambda});
    pitch::PitchVector dn;
    dn.frame_rate = filled.frame_rate;
    dn.values = std::move(denoised);
    dn.voiced.assign(dn.values.size(), true);
    if (dn.size() < 2) return rebuild_contour(dn, {});
    auto d = slope(dn.values);
    auto transitions = detect_transitions(d, cfg, filled.frame_rate);
    return rebuild_contour(dn, transitions);
}

} // namespace hummit::contour
