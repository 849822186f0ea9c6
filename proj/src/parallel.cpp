// SPDX-License-Identifier: Apache-2.0
#include "ct/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace ct {

int configured_threads() {
    if (const char* env = std::getenv("CUSP_TORSION_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return omp_get_max_threads();
}

void apply_thread_env() { omp_set_num_threads(configured_threads()); }

double stable_sum(const std::vector<double>& v) {
    KahanSum s;
    for (double x : v) s.add(x);
    return s.value();
}

}  // namespace ct
