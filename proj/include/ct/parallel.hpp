// SPDX-License-Identifier: Apache-2.0
// OpenMP helpers. Every parallel kernel has a serial twin selected by Exec.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace ct {

enum class Exec { serial, parallel };

// Thread count from CUSP_TORSION_THREADS (falls back to the OpenMP default).
int configured_threads();
void apply_thread_env();

// Evaluates f(i) for i in [0, n). Results are written by index, so the
// output does not depend on the schedule.
template <class F>
std::vector<double> parallel_map(Exec ex, std::size_t n, F&& f) {
    std::vector<double> out(n);
    if (ex == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (long i = 0; i < static_cast<long>(n); ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    }
    return out;
}

// Neumaier-compensated sum in index order.
double stable_sum(const std::vector<double>& v);

class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

}  // namespace ct
