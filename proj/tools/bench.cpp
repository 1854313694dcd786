// Compares the OpenMP kernels against the serial reference implementations:
// wall time, speedup and max-abs divergence on identical random inputs.
//
//   hummit_bench [--threads N] [--batch B] [--len L]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "hummit/kernels.hpp"
#include "hummit/ref_kernels.hpp"
#include "hummit/rng.hpp"
#include "hummit/runtime.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<float> random_buf(std::size_t n, hummit::Rng& rng) {
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return v;
}

float max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
    float m = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

struct Timing {
    double serial_ms;
    double parallel_ms;
    float divergence;
};

void report(const char* name, const Timing& t) {
    std::printf("%-22s serial %8.2f ms   parallel %8.2f ms   speedup %5.2fx   max|diff| %.3g\n", name,
                t.serial_ms, t.parallel_ms, t.serial_ms / t.parallel_ms, t.divergence);
}

} // namespace

int main(int argc, char** argv) {
    int threads = 0, batch = 64, len = 500;
    for (int i = 1; i < argc; ++i) {
        auto next_int = [&](int& out) {
            if (i + 1 < argc) out = std::atoi(argv[++i]);
        };
        if (!std::strcmp(argv[i], "--threads")) next_int(threads);
        else if (!std::strcmp(argv[i], "--batch")) next_int(batch);
        else if (!std::strcmp(argv[i], "--len")) next_int(len);
        else {
            std::fprintf(stderr, "usage: hummit_bench [--threads N] [--batch B] [--len L]\n");
            return 1;
        }
    }
    hummit::runtime::set_threads(threads);
    std::printf("threads: %d, batch: %d, len: %d\n", hummit::runtime::threads(), batch, len);

    hummit::Rng rng(7);
    const int reps = 5;

    { // conv1d forward, the dominant training cost (128 -> 256, kernel 5)
        const int in_c = 128, out_c = 256, k = 5;
        auto x = random_buf(static_cast<std::size_t>(batch) * in_c * len, rng);
        auto w = random_buf(static_cast<std::size_t>(out_c) * in_c * k, rng);
        auto b = random_buf(out_c, rng);
        std::vector<float> y0(static_cast<std::size_t>(batch) * out_c * len);
        std::vector<float> y1(y0.size());

        auto t0 = Clock::now();
        hummit::ref::conv1d_forward(x.data(), batch, in_c, len, w.data(), b.data(), out_c, k, y0.data());
        double serial = ms_since(t0);

        hummit::kernels::conv1d_forward(x.data(), batch, in_c, len, w.data(), b.data(), out_c, k,
                                        y1.data()); // warm-up
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r)
            hummit::kernels::conv1d_forward(x.data(), batch, in_c, len, w.data(), b.data(), out_c, k,
                                            y1.data());
        report("conv1d forward", {serial, ms_since(t0) / reps, max_abs_diff(y0, y1)});
    }

    { // affine forward (mlp-scale: len -> 300)
        const int out_dim = 300;
        auto x = random_buf(static_cast<std::size_t>(batch) * len, rng);
        auto w = random_buf(static_cast<std::size_t>(out_dim) * len, rng);
        auto b = random_buf(out_dim, rng);
        std::vector<float> y0(static_cast<std::size_t>(batch) * out_dim);
        std::vector<float> y1(y0.size());

        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r)
            hummit::ref::affine_forward(x.data(), batch, len, w.data(), b.data(), out_dim, y0.data());
        double serial = ms_since(t0) / reps;

        t0 = Clock::now();
        for (int r = 0; r < reps; ++r)
            hummit::kernels::affine_forward(x.data(), batch, len, w.data(), b.data(), out_dim,
                                            y1.data());
        report("affine forward", {serial, ms_since(t0) / reps, max_abs_diff(y0, y1)});
    }

    { // batch norm, train mode (256 channels)
        const int c = 256;
        auto x = random_buf(static_cast<std::size_t>(batch) * c * len, rng);
        std::vector<float> gamma(c, 1.2f), beta(c, -0.3f);
        std::vector<float> y0(x.size()), y1(x.size());

        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r)
            hummit::ref::batchnorm_train_forward(x.data(), batch, c, len, gamma.data(), beta.data(),
                                                 1e-5f, y0.data());
        double serial = ms_since(t0) / reps;

        std::vector<float> mean(c), var(c);
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r) {
            hummit::kernels::batch_stats(x.data(), batch, c, len, mean.data(), var.data());
            hummit::kernels::batchnorm_apply(x.data(), batch, c, len, mean.data(), var.data(),
                                             gamma.data(), beta.data(), 1e-5f, y1.data(),
                                             static_cast<float*>(nullptr));
        }
        report("batchnorm train", {serial, ms_since(t0) / reps, max_abs_diff(y0, y1)});
    }

    { // global average pooling (128 channels)
        const int c = 128;
        auto x = random_buf(static_cast<std::size_t>(batch) * c * len, rng);
        std::vector<float> y0(static_cast<std::size_t>(batch) * c), y1(y0.size());

        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r)
            hummit::ref::gap_forward(x.data(), batch, c, len, y0.data());
        double serial = ms_since(t0) / reps;

        t0 = Clock::now();
        for (int r = 0; r < reps; ++r)
            hummit::kernels::gap_forward(x.data(), batch, c, len, y1.data());
        report("gap forward", {serial, ms_since(t0) / reps, max_abs_diff(y0, y1)});
    }

    return 0;
}
