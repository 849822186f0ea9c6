// SPDX-License-Identifier: Apache-2.0
// Heat kernels of the Kodaira Laplacian on the half-plane and on the model cusp.
//
// Box acts on functions as half the Laplace-Beltrami operator, so the exact
// n = 0 kernel is McKean's kernel p_tau at tau = t / 2.
#pragma once

#include <memory>
#include <vector>

#include "ct/hyp_geometry.hpp"
#include "ct/parallel.hpp"

namespace ct {

struct KernelConvention {
    // Gaussian factor exp(-d^2 / (2 sigma t)).
    double sigma = 1.0;
};
inline constexpr KernelConvention kKernelConvention{};

// Least-squares fit of sigma from the exact kernel at small time.
double calibrate_gaussian_scale(double t = 1e-3);

// McKean's kernel of exp(-tau Delta) on H^2 by direct quadrature.
double mckean_kernel(double tau, double rho);

// Kernel of exp(-t Box) at geodesic distance r (tabulated per t, thread-safe cache).
double exact_kernel_H_n0(double t, double r);
double exact_kernel_direct(double t, double r);
// Diagonal value in extended precision.
long double exact_kernel_diag_ld(long double t);

constexpr int kMaxParametrixOrder = 6;

// Profiles Phi_i as power series in s = r^2 (radius of convergence pi^2).
struct ParametrixCoeffs {
    int n = 0;
    int k = 0;
    std::vector<std::vector<long double>> profiles;  // Phi_0..Phi_k
    std::vector<std::vector<long double>> transport;  // u_0..u_k (untwisted)
    std::vector<long double> diag;                     // Phi_i(0)

    long double phi(int i, long double r) const;
    long double u(int a, long double r) const;
};

const ParametrixCoeffs& build_parametrix(int n, int k);

// psi(d^2) / t * exp(-d^2 / 2t) * sum_{i<=k} t^i Phi_i(d).
double parametrix_kernel(const ParametrixCoeffs& c, double t, double d);
long double parametrix_diag_ld(const ParametrixCoeffs& c, long double t);

struct CuspKernelValue {
    double t = 0;
    CuspPoint u1, u2;
    double value = 0;
    double imag = 0;  // nonzero only off the diagonal for n != 0
    double trunc_err = 0;
    long trunc_terms = 0;
};

// Tail bound for the n = 0 deck sum beyond |i| > I.
double kernel_deck_tail(HPoint z1, HPoint z2, double t, long I);

CuspKernelValue cusp_kernel(double t, CuspPoint u1, CuspPoint u2, int n, double eps, Exec ex = Exec::serial);

// int k(t, u, w) k(t, w, u) dv(w) over the punctured disc (n = 0), by
// Gauss-Legendre in ln Im w and the trapezoid rule in Re w.
double semigroup_integral(double t, CuspPoint u, Exec ex = Exec::serial, int nx = 128);

// n = 0 diagonal at height y = |ln|u|| (no underflow of |u| deep in the cusp).
CuspKernelValue cusp_diagonal_height(double t, double y, double eps, Exec ex = Exec::serial);

// Error budget for the n != 0 parametrix deck sum at (t, y); see valid-time policy.
double parametrix_error_bound(int n, int k, double t, double y);
// Largest t (on a geometric grid) with parametrix_error_bound < eps at height y.
double valid_t_max(int n, int k, double eps, double y);

// a_{-1}..a_k with a_j = Phi_{j+1}(0); k <= 5.
std::vector<double> diagonal_small_time(CuspPoint u, int n, int k);

// Diagonal defect constant: max over t in [t_lo, t_hi] of |k_exact - k_{t,k}| / t^k at n = 0.
double defect_constant(int k, double t_lo = 0.02, double t_hi = 0.5);

}  // namespace ct
