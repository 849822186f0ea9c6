// SPDX-License-Identifier: Apache-2.0
// Serial versus OpenMP timings of the parallel kernels, with result agreement.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include <omp.h>

#include "CLI11.hpp"
#include "ct/chern_anomaly.hpp"
#include "ct/heat_kernel.hpp"
#include "ct/parallel.hpp"
#include "ct/reg_trace.hpp"

namespace {

struct Timed {
    double value = 0;
    double seconds = 0;
};

Timed best_of(int reps, const std::function<double()>& f) {
    Timed t{0, 1e300};
    for (int i = 0; i < reps; ++i) {
        const auto a = std::chrono::steady_clock::now();
        t.value = f();
        t.seconds = std::min(t.seconds, std::chrono::duration<double>(std::chrono::steady_clock::now() - a).count());
    }
    return t;
}

}  // namespace

int main(int argc, char** argv) {
    ct::apply_thread_env();
    CLI::App app{"Serial versus OpenMP kernel timings", "bench_kernels"};
    int reps = 3;
    app.add_option("--reps", reps, "repetitions per kernel (best time is reported)")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    using ct::Exec;
    const ct::CuspPoint u = ct::CuspPoint::polar(std::exp(-2.0), 0.7);
    const ct::HeatDataProvider P = ct::reference_P();
    const ct::HeatDataProvider M = ct::hyperbolic_model_provider(2, 4 * M_PI, 1, 1, {0.4});
    const ct::MetricDescriptor S = ct::round_sphere_metric(0), S2 = ct::round_sphere_metric(0.3);
    const ct::XiMetric triv;

    struct Kernel {
        std::string name;
        std::function<double(Exec)> run;
    };
    const Kernel kernels[] = {
        {"semigroup_integral", [&](Exec e) { return ct::semigroup_integral(0.5, u, e); }},
        {"cusp_diagonal_height", [&](Exec e) { return ct::cusp_diagonal_height(20.0, 3.0, 1e-12, e).value; }},
        {"mellin_trace_curve",
         [&](Exec e) {
             const ct::TraceCurve c = ct::mellin_trace_curve(M, P, 1e-3, e);
             return ct::stable_sum(c.value);
         }},
        {"anomaly_rhs_bgs",
         [&](Exec e) {
             ct::AnomalyOptions o;
             o.exec = e;
             return ct::anomaly_rhs_bgs(S, S2, triv, triv, 0, {}, {}, o).value;
         }},
    };

    std::printf("threads: %d (CUSP_TORSION_THREADS caps this)\n", omp_get_max_threads());
    std::printf("%-22s %12s %12s %8s %s\n", "kernel", "serial_s", "parallel_s", "speedup", "identical");
    int mismatches = 0;
    for (const Kernel& k : kernels) {
        const Timed s = best_of(reps, [&] { return k.run(Exec::serial); });
        const Timed p = best_of(reps, [&] { return k.run(Exec::parallel); });
        const bool same = s.value == p.value;
        mismatches += same ? 0 : 1;
        std::printf("%-22s %12.6f %12.6f %8.2f %s\n", k.name.c_str(), s.seconds, p.seconds, s.seconds / p.seconds,
                    same ? "yes" : "NO");
    }
    return mismatches ? 3 : 0;
}
