#include "doctest.h"

#include <cmath>

#include "hummit/contour.hpp"
#include "hummit/error.hpp"
#include "hummit/rng.hpp"
#include "hummit/tvr.hpp"

using namespace hummit;

TEST_SUITE("contour") {

TEST_CASE("slope is first differences") {
    auto d = contour::slope(std::vector<double>{1, 1, 2, 2});
    CHECK(d == std::vector<double>{0, 1, 0});
    auto flat = contour::slope(std::vector<double>(5, 3.0));
    CHECK(flat == std::vector<double>(4, 0.0));
    auto sized = contour::slope(std::vector<double>(17, 1.0));
    CHECK(sized.size() == 16);
    CHECK_THROWS_WITH_AS(contour::slope(std::vector<double>{1.0}),
                         doctest::Contains("SignalTooShort"), Error);
}

TEST_CASE("detect_transitions") {
    contour::SlopeConfig cfg; // threshold 0.5, min gap 0.1 s
    SUBCASE("no candidates") {
        std::vector<double> d(50, 0.0);
        CHECK(contour::detect_transitions(d, cfg, 100.0).empty());
    }
    SUBCASE("isolated spike") {
        std::vector<double> d(50, 0.0);
        d[10] = 3.0;
        auto t = contour::detect_transitions(d, cfg, 100.0);
        CHECK(t == std::vector<std::size_t>{10});
    }
    SUBCASE("close spikes merge, larger magnitude wins") {
        std::vector<double> d(50, 0.0);
        d[10] = 3.0;
        d[12] = -5.0;
        cfg.min_gap_s = 0.05; // 5 frames at 100 fps
        auto t = contour::detect_transitions(d, cfg, 100.0);
        CHECK(t == std::vector<std::size_t>{12});
    }
    SUBCASE("tie keeps the earlier index") {
        std::vector<double> d(50, 0.0);
        d[10] = 2.0;
        d[12] = 2.0;
        cfg.min_gap_s = 0.05;
        auto t = contour::detect_transitions(d, cfg, 100.0);
        CHECK(t == std::vector<std::size_t>{10});
    }
    SUBCASE("spacing invariant on random slopes") {
        Rng rng(21);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> d(200);
            for (auto& v : d) v = rng.uniform(-2.0, 2.0);
            auto t = contour::detect_transitions(d, cfg, 100.0);
            const auto gap = static_cast<std::size_t>(std::lround(cfg.min_gap_s * 100.0));
            for (std::size_t i = 1; i < t.size(); ++i) {
                CHECK(t[i] > t[i - 1]);
                CHECK(t[i] - t[i - 1] >= gap);
            }
        }
    }
}

TEST_CASE("rebuild_contour") {
    SUBCASE("two-level step") {
        pitch::PitchVector pv{100.0, {60, 60, 60, 60, 60, 64, 64, 64, 64, 64},
                              std::vector<bool>(10, true)};
        auto nc = contour::rebuild_contour(pv, std::vector<std::size_t>{4});
        REQUIRE(nc.segments.size() == 2);
        CHECK(nc.segments[0].start_frame == 0);
        CHECK(nc.segments[0].length_frames == 5);
        CHECK(nc.segments[0].pitch == 60.0);
        CHECK(nc.segments[1].start_frame == 5);
        CHECK(nc.segments[1].length_frames == 5);
        CHECK(nc.segments[1].pitch == 64.0);
    }
    SUBCASE("no transitions yields one median segment") {
        pitch::PitchVector pv{100.0, {60, 62, 61, 60, 95}, std::vector<bool>(5, true)};
        auto nc = contour::rebuild_contour(pv, {});
        REQUIRE(nc.segments.size() == 1);
        CHECK(nc.segments[0].pitch == 61.0);
        CHECK(nc.segments[0].length_frames == 5);
    }
    SUBCASE("median shrugs off an outlier") {
        pitch::PitchVector pv{100.0, {60, 60, 60, 60, 72}, std::vector<bool>(5, true)};
        auto nc = contour::rebuild_contour(pv, {});
        CHECK(nc.segments[0].pitch == 60.0);
    }
    SUBCASE("bad transition indices rejected") {
        pitch::PitchVector pv{100.0, {60, 61, 62}, std::vector<bool>(3, true)};
        CHECK_THROWS_WITH_AS(contour::rebuild_contour(pv, std::vector<std::size_t>{2}),
                             doctest::Contains("InvalidTransitionIndex"), Error);
        CHECK_THROWS_WITH_AS(contour::rebuild_contour(pv, std::vector<std::size_t>{1, 1}),
                             doctest::Contains("InvalidTransitionIndex"), Error);
    }
}

TEST_CASE("expanded contour tv equals sum of segment steps") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        pitch::PitchVector pv;
        pv.frame_rate = 100.0;
        const int n = 40 + static_cast<int>(rng.below(100));
        for (int i = 0; i < n; ++i) pv.values.push_back(rng.uniform(50.0, 80.0));
        pv.voiced.assign(n, true);
        std::vector<std::size_t> transitions;
        std::size_t t = 3 + rng.below(10);
        while (t + 1 < static_cast<std::size_t>(n)) {
            transitions.push_back(t);
            t += 10 + rng.below(12);
        }
        auto nc = contour::rebuild_contour(pv, transitions);
        auto series = contour::expand(nc);
        REQUIRE(series.size() == static_cast<std::size_t>(n));
        double step_sum = 0.0;
        for (std::size_t s = 1; s < nc.segments.size(); ++s)
            step_sum += std::fabs(nc.segments[s].pitch - nc.segments[s - 1].pitch);
        CHECK(tvr::tv_norm(series) == doctest::Approx(step_sum).epsilon(1e-12));
    }
}

// the full melody-extraction chain on synthetic piecewise-constant truth
TEST_CASE("pipeline recovers transitions through noise") {
    Rng rng(42);
    const double fps = 100.0;
    contour::SlopeConfig scfg;
    const double tv_lambda = 0.3;
    int ok = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        // segments >= 0.3 s, steps >= 2 semitones, noise sigma <= 0.3
        const int n_segments = 3 + static_cast<int>(rng.below(5));
        std::vector<std::size_t> true_transitions;
        std::vector<double> truth;
        double level = rng.uniform(55.0, 75.0);
        for (int s = 0; s < n_segments; ++s) {
            const auto len = static_cast<std::size_t>(30 + rng.below(40));
            truth.insert(truth.end(), len, level);
            if (s + 1 < n_segments) {
                true_transitions.push_back(truth.size() - 1);
                double step = (2.0 + rng.uniform(0.0, 4.0)) * (rng.next_double() < 0.5 ? -1 : 1);
                if (level + step < 45.0 || level + step > 85.0) step = -step;
                level += step;
            }
        }
        const double sigma = rng.uniform(0.1, 0.3);
        pitch::PitchVector pv;
        pv.frame_rate = fps;
        for (double v : truth) pv.values.push_back(v + sigma * rng.next_gaussian());
        pv.voiced.assign(pv.values.size(), true);

        auto denoised = tvr::denoise_tv(pv.values, {tv_lambda});
        auto d = contour::slope(denoised);
        auto found = contour::detect_transitions(d, scfg, fps);
        if (found.size() != true_transitions.size()) continue;
        bool all_close = true;
        for (std::size_t i = 0; i < found.size(); ++i) {
            const auto a = static_cast<std::ptrdiff_t>(found[i]);
            const auto b = static_cast<std::ptrdiff_t>(true_transitions[i]);
            if (std::abs(a - b) > 2) all_close = false;
        }
        ok += all_close;
    }
    CHECK(ok >= 95); // >= 95% of trials
}

} // TEST_SUITE
