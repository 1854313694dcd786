#pragma once

#include <span>
#include <vector>

namespace hummit::tvr {

/// Weight on the quadratic data-fidelity term of the denoising objective
///     tv_norm(u) + (lambda/2) * sum_i (f[i] - u[i])^2.
/// Larger lambda keeps the output closer to the input. Many TV libraries put
/// their weight on the TV term instead; that convention is the reciprocal of
/// this one.
struct TvrConfig {
    double lambda_fidelity = 0.3;
};

/// Sum of absolute first differences; 0 for length-1 signals.
double tv_norm(std::span<const double> x);

/// Discrete objective tv_norm(u) + (lambda/2) * sum((f - u)^2).
double tv_objective(std::span<const double> f, std::span<const double> u, const TvrConfig& cfg);

/// Exact minimizer of the objective above. Direct taut-string style pass
/// (forward knot propagation, backward pointer substitution), O(n) time.
std::vector<double> denoise_tv(std::span<const double> f, const TvrConfig& cfg);

} // namespace hummit::tvr
