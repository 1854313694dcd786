#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace hummit::kernels {

// Data-parallel primitives behind the network. Every kernel assigns each
// output slot to exactly one worker and keeps that slot's summation order
// fixed, so results are byte-identical for any OpenMP thread count,
// including 1. Tensors are dense row-major: series are [batch][channel][len],
// matrices [rows][cols].
//
// Convolutions are cross-correlations with length-preserving zero padding;
// for even kernels the extra pad column sits on the right
// (pad_left = (k-1)/2).

inline int pad_left(int kernel) { return (kernel - 1) / 2; }

template <class T>
void conv1d_forward(const T* x, int batch, int in_c, int len, const T* w, const T* bias, int out_c,
                    int kernel, T* y) {
    const int pl = pad_left(kernel);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < batch; ++b) {
        for (int oc = 0; oc < out_c; ++oc) {
            T* __restrict out = y + (static_cast<std::size_t>(b) * out_c + oc) * len;
            for (int t = 0; t < len; ++t) out[t] = bias[oc];
            for (int ic = 0; ic < in_c; ++ic) {
                const T* __restrict in = x + (static_cast<std::size_t>(b) * in_c + ic) * len;
                const T* __restrict wk = w + (static_cast<std::size_t>(oc) * in_c + ic) * kernel;
                for (int j = 0; j < kernel; ++j) {
                    const int off = j - pl;
                    const int t0 = off < 0 ? -off : 0;
                    const int t1 = off > 0 ? len - off : len;
                    const T wj = wk[j];
                    for (int t = t0; t < t1; ++t) out[t] += wj * in[t + off];
                }
            }
        }
    }
}

template <class T>
void conv1d_backward_input(const T* dy, int batch, int out_c, int len, const T* w, int in_c,
                           int kernel, T* dx) {
    const int pl = pad_left(kernel);
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < batch; ++b) {
        for (int ic = 0; ic < in_c; ++ic) {
            T* __restrict out = dx + (static_cast<std::size_t>(b) * in_c + ic) * len;
            for (int t = 0; t < len; ++t) out[t] = T(0);
            for (int oc = 0; oc < out_c; ++oc) {
                const T* __restrict g = dy + (static_cast<std::size_t>(b) * out_c + oc) * len;
                const T* __restrict wk = w + (static_cast<std::size_t>(oc) * in_c + ic) * kernel;
                for (int j = 0; j < kernel; ++j) {
                    // y[t] consumed x[t + j - pl], so x[s] feeds y[s - j + pl]
                    const int off = j - pl;
                    const int t0 = off < 0 ? 0 : off;
                    const int t1 = off < 0 ? len + off : len;
                    const T wj = wk[j];
                    for (int t = t0; t < t1; ++t) out[t] += wj * g[t - off];
                }
            }
        }
    }
}

template <class T>
void conv1d_backward_params(const T* x, const T* dy, int batch, int in_c, int out_c, int len,
                            int kernel, T* dw, T* db) {
    const int pl = pad_left(kernel);
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < out_c; ++oc) {
        T acc = T(0);
        for (int b = 0; b < batch; ++b) {
            const T* __restrict g = dy + (static_cast<std::size_t>(b) * out_c + oc) * len;
            for (int t = 0; t < len; ++t) acc += g[t];
        }
        db[oc] = acc;
        for (int ic = 0; ic < in_c; ++ic) {
            T* __restrict wg = dw + (static_cast<std::size_t>(oc) * in_c + ic) * kernel;
            for (int j = 0; j < kernel; ++j) {
                const int off = j - pl;
                const int t0 = off < 0 ? -off : 0;
                const int t1 = off > 0 ? len - off : len;
                T s = T(0);
                for (int b = 0; b < batch; ++b) {
                    const T* __restrict in = x + (static_cast<std::size_t>(b) * in_c + ic) * len;
                    const T* __restrict g = dy + (static_cast<std::size_t>(b) * out_c + oc) * len;
                    for (int t = t0; t < t1; ++t) s += g[t] * in[t + off];
                }
                wg[j] = s;
            }
        }
    }
}

template <class T>
void affine_forward(const T* x, int batch, int in_dim, const T* w, const T* bias, int out_dim, T* y) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < batch; ++b) {
        for (int o = 0; o < out_dim; ++o) {
            const T* __restrict in = x + static_cast<std::size_t>(b) * in_dim;
            const T* __restrict wr = w + static_cast<std::size_t>(o) * in_dim;
            T acc = bias[o];
            for (int i = 0; i < in_dim; ++i) acc += wr[i] * in[i];
            y[static_cast<std::size_t>(b) * out_dim + o] = acc;
        }
    }
}

template <class T>
void affine_backward(const T* x, const T* w, const T* dy, int batch, int in_dim, int out_dim, T* dx,
                     T* dw, T* db) {
#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_dim; ++o) {
        T acc = T(0);
        for (int b = 0; b < batch; ++b) acc += dy[static_cast<std::size_t>(b) * out_dim + o];
        db[o] = acc;
        T* __restrict wg = dw + static_cast<std::size_t>(o) * in_dim;
        for (int i = 0; i < in_dim; ++i) wg[i] = T(0);
        for (int b = 0; b < batch; ++b) {
            const T g = dy[static_cast<std::size_t>(b) * out_dim + o];
            const T* __restrict in = x + static_cast<std::size_t>(b) * in_dim;
            for (int i = 0; i < in_dim; ++i) wg[i] += g * in[i];
        }
    }
#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        T* __restrict out = dx + static_cast<std::size_t>(b) * in_dim;
        for (int i = 0; i < in_dim; ++i) out[i] = T(0);
        for (int o = 0; o < out_dim; ++o) {
            const T g = dy[static_cast<std::size_t>(b) * out_dim + o];
            const T* __restrict wr = w + static_cast<std::size_t>(o) * in_dim;
            for (int i = 0; i < in_dim; ++i) out[i] += g * wr[i];
        }
    }
}

template <class T>
void relu_forward(T* x, std::size_t n) {
#pragma omp parallel for schedule(static) if (n > 1u << 14)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        if (x[i] < T(0)) x[i] = T(0);
}

// dx = dy where the forward input was positive. `fwd_in` is the
// pre-activation.
template <class T>
void relu_backward(const T* fwd_in, const T* dy, std::size_t n, T* dx) {
#pragma omp parallel for schedule(static) if (n > 1u << 14)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i)
        dx[i] = fwd_in[i] > T(0) ? dy[i] : T(0);
}

template <class T>
void gap_forward(const T* x, int batch, int channels, int len, T* y) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < batch; ++b) {
        for (int c = 0; c < channels; ++c) {
            const T* __restrict in = x + (static_cast<std::size_t>(b) * channels + c) * len;
            T acc = T(0);
            for (int t = 0; t < len; ++t) acc += in[t];
            y[static_cast<std::size_t>(b) * channels + c] = acc / T(len);
        }
    }
}

template <class T>
void gap_backward(const T* dy, int batch, int channels, int len, T* dx) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < batch; ++b) {
        for (int c = 0; c < channels; ++c) {
            const T g = dy[static_cast<std::size_t>(b) * channels + c] / T(len);
            T* __restrict out = dx + (static_cast<std::size_t>(b) * channels + c) * len;
            for (int t = 0; t < len; ++t) out[t] = g;
        }
    }
}

// Per-channel batch statistics over batch x time. Biased variance, the
// normalization convention.
template <class T>
void batch_stats(const T* x, int batch, int channels, int len, T* mean, T* var) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels; ++c) {
        T m = T(0);
        for (int b = 0; b < batch; ++b) {
            const T* __restrict in = x + (static_cast<std::size_t>(b) * channels + c) * len;
            for (int t = 0; t < len; ++t) m += in[t];
        }
        m /= T(batch * len);
        T v = T(0);
        for (int b = 0; b < batch; ++b) {
            const T* __restrict in = x + (static_cast<std::size_t>(b) * channels + c) * len;
            for (int t = 0; t < len; ++t) {
                T d = in[t] - m;
                v += d * d;
            }
        }
        mean[c] = m;
        var[c] = v / T(batch * len);
    }
}

template <class T>
void batchnorm_apply(const T* x, int batch, int channels, int len, const T* mean, const T* var,
                     const T* gamma, const T* beta, T eps, T* y, T* xhat) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < batch; ++b) {
        for (int c = 0; c < channels; ++c) {
            const T inv = T(1) / std::sqrt(var[c] + eps);
            const T m = mean[c], g = gamma[c], bt = beta[c];
            const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * len;
            for (int t = 0; t < len; ++t) {
                T h = (x[base + t] - m) * inv;
                if (xhat) xhat[base + t] = h;
                y[base + t] = g * h + bt;
            }
        }
    }
}

// Train-mode backward through the batch statistics:
//   dx = gamma/sqrt(var+eps) * (dy - mean(dy) - xhat * mean(dy*xhat))
// with the means per channel over batch x time.
template <class T>
void batchnorm_backward(const T* xhat, const T* dy, int batch, int channels, int len, const T* var,
                        const T* gamma, T eps, T* dx, T* dgamma, T* dbeta) {
    const T inv_n = T(1) / T(batch * len);
#pragma omp parallel for schedule(static)
    for (int c = 0; c < channels; ++c) {
        T sum_dy = T(0), sum_dy_xhat = T(0);
        for (int b = 0; b < batch; ++b) {
            const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * len;
            for (int t = 0; t < len; ++t) {
                sum_dy += dy[base + t];
                sum_dy_xhat += dy[base + t] * xhat[base + t];
            }
        }
        dgamma[c] = sum_dy_xhat;
        dbeta[c] = sum_dy;
        const T k = gamma[c] / std::sqrt(var[c] + eps);
        const T mean_dy = sum_dy * inv_n;
        const T mean_dy_xhat = sum_dy_xhat * inv_n;
        for (int b = 0; b < batch; ++b) {
            const std::size_t base = (static_cast<std::size_t>(b) * channels + c) * len;
            for (int t = 0; t < len; ++t)
                dx[base + t] = k * (dy[base + t] - mean_dy - xhat[base + t] * mean_dy_xhat);
        }
    }
}

// Row-wise softmax with max subtraction; returns mean cross-entropy against
// labels and, when dlogits is non-null, (p - onehot)/batch. The loss sum runs
// serially in row order after the parallel row pass, keeping the value
// independent of thread count.
template <class T>
T softmax_cross_entropy(const T* logits, int batch, int classes, const std::uint32_t* labels, T* probs,
                        T* dlogits) {
#pragma omp parallel for schedule(static) if (batch > 8)
    for (int b = 0; b < batch; ++b) {
        const T* __restrict row = logits + static_cast<std::size_t>(b) * classes;
        T* __restrict p = probs + static_cast<std::size_t>(b) * classes;
        T mx = row[0];
        for (int c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
        T sum = T(0);
        for (int c = 0; c < classes; ++c) {
            p[c] = std::exp(row[c] - mx);
            sum += p[c];
        }
        for (int c = 0; c < classes; ++c) p[c] /= sum;
        if (labels && dlogits) {
            T* __restrict d = dlogits + static_cast<std::size_t>(b) * classes;
            for (int c = 0; c < classes; ++c)
                d[c] = (p[c] - (static_cast<std::uint32_t>(c) == labels[b] ? T(1) : T(0))) / T(batch);
        }
    }
    if (!labels) return T(0);
    T loss = T(0);
    for (int b = 0; b < batch; ++b)
        loss += -std::log(std::max(probs[static_cast<std::size_t>(b) * classes + labels[b]],
                                   std::numeric_limits<T>::min()));
    return loss / T(batch);
}

} // namespace hummit::kernels
