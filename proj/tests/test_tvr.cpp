#include "doctest.h"

#include <cmath>
#include <numeric>

#include "hummit/error.hpp"
#include "hummit/rng.hpp"
#include "hummit/tvr.hpp"
#include "tv_oracle.hpp"

using namespace hummit;

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> random_signal(Rng& rng, std::size_t max_len) {
    std::vector<double> f(1 + rng.below(max_len));
    for (auto& v : f) v = rng.uniform(-10.0, 10.0);
    return f;
}

} // namespace

TEST_SUITE("tvr") {

TEST_CASE("tv_norm definition") {
    CHECK(tvr::tv_norm(std::vector<double>{5, 5, 5, 5}) == 0.0);
    CHECK(tvr::tv_norm(std::vector<double>{0, 1, 0}) == 2.0);
    CHECK(tvr::tv_norm(std::vector<double>{0, 1, 2, 3}) == 3.0);
    CHECK(tvr::tv_norm(std::vector<double>{42.0}) == 0.0);
    CHECK_THROWS_WITH_AS(tvr::tv_norm(std::vector<double>{}), doctest::Contains("EmptySignal"),
                         Error);
}

TEST_CASE("tv_objective arithmetic") {
    std::vector<double> a{1, 2};
    CHECK(tvr::tv_objective(a, a, {1.0}) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> f0{0, 0}, u1{1, 1};
    CHECK(tvr::tv_objective(f0, u1, {2.0}) == doctest::Approx(2.0).epsilon(1e-15));
    std::vector<double> f{0, 2}, u{1, 1};
    CHECK(tvr::tv_objective(f, u, {1.0}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(tvr::tv_objective(f, std::vector<double>{1.0}, {1.0}),
                         doctest::Contains("LengthMismatch"), Error);
}

TEST_CASE("two-point closed form") {
    // endpoints shrink toward each other by min(1/lambda, gap/2)
    auto u1 = tvr::denoise_tv(std::vector<double>{0, 2}, {1.0});
    CHECK(std::fabs(u1[0] - 1.0) <= 1e-12);
    CHECK(std::fabs(u1[1] - 1.0) <= 1e-12);
    auto u2 = tvr::denoise_tv(std::vector<double>{0, 4}, {1.0});
    CHECK(std::fabs(u2[0] - 1.0) <= 1e-12);
    CHECK(std::fabs(u2[1] - 3.0) <= 1e-12);
}

TEST_CASE("constant signal is a fixed point") {
    std::vector<double> f{5, 5, 5, 5};
    for (double lambda : {1e-6, 0.3, 7.0, 1e6}) {
        auto u = tvr::denoise_tv(f, {lambda});
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(u[i] == doctest::Approx(5.0).epsilon(1e-14));
    }
}

TEST_CASE("lambda limits") {
    std::vector<double> f{1, 2, 3, 4};
    auto fused = tvr::denoise_tv(f, {1e-9});
    for (double v : fused) CHECK(std::fabs(v - 2.5) <= 1e-6);

    Rng rng(11);
    std::vector<double> g(37);
    for (auto& v : g) v = rng.uniform(-128.0, 128.0);
    auto close = tvr::denoise_tv(g, {1e9});
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::fabs(close[i] - g[i]) <= 1e-6);
    auto flat = tvr::denoise_tv(g, {1e-9});
    const double m = mean_of(g);
    for (double v : flat) CHECK(std::fabs(v - m) <= 1e-6);
}

TEST_CASE("minimizer properties on random signals") {
    Rng rng(1234);
    for (int trial = 0; trial < 300; ++trial) {
        auto f = random_signal(rng, 16);
        const double lambda = std::pow(10.0, rng.uniform(-3.0, 3.0));
        auto u = tvr::denoise_tv(f, {lambda});

        // mean preservation
        CHECK(std::fabs(mean_of(u) - mean_of(f)) <= 1e-9);
        // maximum principle
        const auto [fmin, fmax] = std::minmax_element(f.begin(), f.end());
        for (double v : u) {
            CHECK(v >= *fmin - 1e-12);
            CHECK(v <= *fmax + 1e-12);
        }
        // TV non-increase
        CHECK(tvr::tv_norm(u) <= tvr::tv_norm(f) + 1e-12);

        // no perturbation of the output may win
        const double obj = tvr::tv_objective(f, u, {lambda});
        for (int p = 0; p < 20; ++p) {
            auto v = u;
            for (auto& x : v) x += rng.uniform(-0.1, 0.1);
            CHECK(obj <= tvr::tv_objective(f, v, {lambda}) + 1e-9);
        }
    }
}

TEST_CASE("matches the dual projected-gradient oracle") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto f = random_signal(rng, 16);
        const double lambda = std::pow(10.0, rng.uniform(-3.0, 3.0));
        auto u = tvr::denoise_tv(f, {lambda});
        auto v = testsupport::tv_denoise_dual_pg(f, lambda);
        CHECK(tvr::tv_objective(f, u, {lambda}) <= tvr::tv_objective(f, v, {lambda}) + 1e-9);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::fabs(u[i] - v[i]) <= 1e-6);
    }
}

TEST_CASE("offset equivariance") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto f = random_signal(rng, 24);
        const double lambda = std::pow(10.0, rng.uniform(-2.0, 2.0));
        const double c = rng.uniform(-50.0, 50.0);
        auto base = tvr::denoise_tv(f, {lambda});
        auto shifted_in = f;
        for (auto& v : shifted_in) v += c;
        auto shifted = tvr::denoise_tv(shifted_in, {lambda});
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(std::fabs(shifted[i] - (base[i] + c)) <= 1e-12 * std::max(1.0, std::fabs(c)));
    }
}

TEST_CASE("rejects bad input") {
    CHECK_THROWS_WITH_AS(tvr::denoise_tv(std::vector<double>{1.0, std::nan("")}, {1.0}),
                         doctest::Contains("NonFiniteInput"), Error);
    CHECK_THROWS_WITH_AS(tvr::denoise_tv(std::vector<double>{}, {1.0}),
                         doctest::Contains("EmptySignal"), Error);
    CHECK_THROWS_WITH_AS(tvr::denoise_tv(std::vector<double>{1.0}, {-2.0}),
                         doctest::Contains("InvalidConfig"), Error);
}

TEST_CASE("length-1 passthrough") {
    auto u = tvr::denoise_tv(std::vector<double>{3.25}, {0.5});
    REQUIRE(u.size() == 1);
    CHECK(u[0] == 3.25);
}

} // TEST_SUITE
