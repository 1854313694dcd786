#include "hummit/tvr.hpp"

#include <cmath>
#include <vector>

#include "hummit/error.hpp"

namespace hummit::tvr {

namespace {

void check_lambda(const TvrConfig& cfg) {
    if (!(cfg.lambda_fidelity > 0.0) || !std::isfinite(cfg.lambda_fidelity))
        raise("InvalidConfig", "lambda_fidelity must be positive and finite");
}

// Exact minimizer of  (1/2) * sum (u - y)^2 + w * sum |u[i+1] - u[i]|.
//
// Forward pass propagates the derivative of the running cost-to-go, a
// nondecreasing piecewise-linear function clipped to [-w, +w] at every step.
// The clip points tm/tp become per-sample knots; the backward pass starts at
// the root of the final derivative and follows the knots as pointers:
// u[k] = clamp(u[k+1], tm[k], tp[k]).
//
// The derivative is stored as its leftmost affine piece plus (slope,
// intercept) deltas at interior breakpoints; the rightmost piece is kept
// negated so both scans read symmetrically.
std::vector<double> fused_lasso(std::span<const double> y, double w) {
    const std::size_t n = y.size();
    std::vector<double> u(n);
    if (n == 0) return u;
    if (n == 1 || w <= 0.0) {
        for (std::size_t i = 0; i < n; ++i) u[i] = y[i];
        return u;
    }

    std::vector<double> bp(2 * n);      // breakpoint positions
    std::vector<double> dslope(2 * n);  // slope delta when crossing bp[i]
    std::vector<double> dicept(2 * n);  // intercept delta when crossing bp[i]
    std::vector<double> tm(n - 1);      // lower clip knot per step
    std::vector<double> tp(n - 1);      // upper clip knot per step

    std::size_t left = n - 1;
    std::size_t right = n;

    tm[0] = y[0] - w;
    tp[0] = y[0] + w;
    bp[left] = tm[0];
    bp[right] = tp[0];
    dslope[left] = 1.0;
    dicept[left] = -y[0] + w;
    dslope[right] = -1.0;
    dicept[right] = y[0] + w;
    double lo_slope0 = 1.0, lo_icept0 = -y[1] - w;  // leftmost piece
    double hi_slope0 = -1.0, hi_icept0 = y[1] - w;  // rightmost piece, negated

    for (std::size_t k = 1; k + 1 < n; ++k) {
        // Scan up from the left until the derivative exceeds -w.
        double lo_slope = lo_slope0, lo_icept = lo_icept0;
        std::size_t lo = left;
        for (; lo <= right; ++lo) {
            if (lo_slope * bp[lo] + lo_icept > -w) break;
            lo_slope += dslope[lo];
            lo_icept += dicept[lo];
        }
        // Scan down from the right until the derivative drops below +w.
        double hi_slope = hi_slope0, hi_icept = hi_icept0;
        std::size_t hi = right;
        for (; hi + 1 > lo; --hi) {
            if (-hi_slope * bp[hi] - hi_icept < w) break;
            hi_slope += dslope[hi];
            hi_icept += dicept[hi];
        }

        tm[k] = (-w - lo_icept) / lo_slope;
        left = lo - 1;
        bp[left] = tm[k];
        dslope[left] = lo_slope;
        dicept[left] = lo_icept + w;

        tp[k] = (w + hi_icept) / (-hi_slope);
        right = hi + 1;
        bp[right] = tp[k];
        dslope[right] = hi_slope;
        dicept[right] = hi_icept + w;

        lo_slope0 = 1.0;
        lo_icept0 = -y[k + 1] - w;
        hi_slope0 = -1.0;
        hi_icept0 = y[k + 1] - w;
    }

    // Root of the final derivative gives the last value.
    double lo_slope = lo_slope0, lo_icept = lo_icept0;
    for (std::size_t lo = left; lo <= right; ++lo) {
        if (lo_slope * bp[lo] + lo_icept > 0.0) break;
        lo_slope += dslope[lo];
        lo_icept += dicept[lo];
    }
    u[n - 1] = -lo_icept / lo_slope;

    for (std::size_t k = n - 1; k-- > 0;) {
        if (u[k + 1] > tp[k])
            u[k] = tp[k];
        else if (u[k + 1] < tm[k])
            u[k] = tm[k];
        else
            u[k] = u[k + 1];
    }
    return u;
}

} // namespace

double tv_norm(std::span<const double> x) {
    if (x.empty()) raise("EmptySignal", "tv_norm of empty signal");
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) s += std::fabs(x[i + 1] - x[i]);
    return s;
}

double tv_objective(std::span<const double> f, std::span<const double> u, const TvrConfig& cfg) {
    check_lambda(cfg);
    if (f.size() != u.size()) raise("LengthMismatch", "f and u differ in length");
    double fidelity = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double r = f[i] - u[i];
        fidelity += r * r;
    }
    return tv_norm(u) + 0.5 * cfg.lambda_fidelity * fidelity;
}

std::vector<double> denoise_tv(std::span<const double> f, const TvrConfig& cfg) {
    check_lambda(cfg);
    if (f.empty()) raise("EmptySignal", "denoise_tv of empty signal");
    for (double v : f)
        if (!std::isfinite(v)) raise("NonFiniteInput", "signal contains a non-finite value");
    // The objective weights fidelity by lambda; dividing through by lambda
    // puts the equivalent weight 1/lambda on the TV term.
    return fused_lasso(f, 1.0 / cfg.lambda_fidelity);
}

} // namespace hummit::tvr
