#pragma once

namespace hummit::runtime {

/// Caps OpenMP worker fan-out process-wide. n <= 0 restores the default
/// (hardware parallelism). All parallel kernels assign each output slot to
/// exactly one worker and keep per-slot summation order fixed, so results are
/// byte-identical for every thread count.
void set_threads(int n);

int threads();

} // namespace hummit::runtime
