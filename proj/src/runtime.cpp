#include "hummit/runtime.hpp"

#include <omp.h>

namespace hummit::runtime {

namespace {
int g_threads = 0; // 0 = library default
}

void set_threads(int n) {
    if (n > 0) {
        omp_set_num_threads(n);
        g_threads = n;
    } else {
        omp_set_num_threads(omp_get_num_procs());
        g_threads = 0;
    }
}

int threads() {
    return g_threads > 0 ? g_threads : omp_get_max_threads();
}

} // namespace hummit::runtime
