#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace hummit::ref {

// Plain serial counterparts of the kernels in kernels.hpp, written as the
// textbook definitions with no tiling, no __restrict and no OpenMP. Tests
// cross-check the parallel kernels against these, and the benchmark tool
// measures the gap. Not used on any production path.

template <class T>
void conv1d_forward(const T* x, int batch, int in_c, int len, const T* w, const T* bias, int out_c,
                    int kernel, T* y) {
    const int pl = (kernel - 1) / 2;
    for (int b = 0; b < batch; ++b)
        for (int oc = 0; oc < out_c; ++oc)
            for (int t = 0; t < len; ++t) {
                T acc = bias[oc];
                for (int ic = 0; ic < in_c; ++ic)
                    for (int j = 0; j < kernel; ++j) {
                        int s = t + j - pl;
                        if (s < 0 || s >= len) continue;
                        acc += w[(static_cast<std::size_t>(oc) * in_c + ic) * kernel + j] *
                               x[(static_cast<std::size_t>(b) * in_c + ic) * len + s];
                    }
                y[(static_cast<std::size_t>(b) * out_c + oc) * len + t] = acc;
            }
}

template <class T>
void affine_forward(const T* x, int batch, int in_dim, const T* w, const T* bias, int out_dim, T* y) {
    for (int b = 0; b < batch; ++b)
        for (int o = 0; o < out_dim; ++o) {
            T acc = bias[o];
            for (int i = 0; i < in_dim; ++i)
                acc += w[static_cast<std::size_t>(o) * in_dim + i] *
                       x[static_cast<std::size_t>(b) * in_dim + i];
            y[static_cast<std::size_t>(b) * out_dim + o] = acc;
        }
}

template <class T>
void gap_forward(const T* x, int batch, int channels, int len, T* y) {
    for (int b = 0; b < batch; ++b)
        for (int c = 0; c < channels; ++c) {
            T acc = T(0);
            for (int t = 0; t < len; ++t)
                acc += x[(static_cast<std::size_t>(b) * channels + c) * len + t];
            y[static_cast<std::size_t>(b) * channels + c] = acc / T(len);
        }
}

template <class T>
void batchnorm_train_forward(const T* x, int batch, int channels, int len, const T* gamma,
                             const T* beta, T eps, T* y) {
    const int n = batch * len;
    for (int c = 0; c < channels; ++c) {
        T mean = T(0);
        for (int b = 0; b < batch; ++b)
            for (int t = 0; t < len; ++t)
                mean += x[(static_cast<std::size_t>(b) * channels + c) * len + t];
        mean /= T(n);
        T var = T(0);
        for (int b = 0; b < batch; ++b)
            for (int t = 0; t < len; ++t) {
                T d = x[(static_cast<std::size_t>(b) * channels + c) * len + t] - mean;
                var += d * d;
            }
        var /= T(n);
        for (int b = 0; b < batch; ++b)
            for (int t = 0; t < len; ++t) {
                std::size_t i = (static_cast<std::size_t>(b) * channels + c) * len + t;
                y[i] = gamma[c] * ((x[i] - mean) / std::sqrt(var + eps)) + beta[c];
            }
    }
}

// Direct normalized autocorrelation, no prefix-sum trick.
template <class T>
double frame_nac(const T* x, int n, int lag) {
    double cross = 0.0, e0 = 0.0, e1 = 0.0;
    for (int t = 0; t + lag < n; ++t) {
        cross += static_cast<double>(x[t]) * x[t + lag];
        e0 += static_cast<double>(x[t]) * x[t];
        e1 += static_cast<double>(x[t + lag]) * x[t + lag];
    }
    double norm = std::sqrt(e0 * e1);
    return norm > 0.0 ? cross / norm : -1.0;
}

} // namespace hummit::ref
