// SPDX-License-Identifier: Apache-2.0
// Regularized heat traces of surfaces with cusps, relative to the thrice-punctured sphere P.
#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ct/parallel.hpp"
#include "json.hpp"

namespace ct {

// Small-time coefficients of the scalar diagonal, per unit volume.
struct LocalCoeffs {
    double a_minus1 = 0;
    double a_0 = 0;
};

struct HeatDataProvider {
    std::string kind;
    int m = 0;       // cusps
    int n = 0;       // twist
    int rank = 1;
    int dim_H0 = 0;
    double mu = 0;   // spectral gap
    double volume = 0;
    double eta0 = 0;  // outer radius of the modelled cusp collars
    std::optional<LocalCoeffs> local;
    // Full trace of exp(-t Box) over M minus the cusp discs {|u| < eta}.
    std::function<double(double t, double eta)> core_trace;
    // Pointwise trace on cusp chart i is rank * (model cusp kernel) + cusp_deviation(t, i, y),
    // y = |ln|u||. Empty means zero deviation.
    std::function<double(double t, int chart, double y)> cusp_deviation;
    double scale = 0;                 // conformal exponent c of the torus / sphere providers
    std::complex<double> tau{0, 1};   // flat torus modulus
    std::vector<double> eigenvalues;  // spectral providers only
    std::vector<std::pair<double, double>> core_samples;  // sampled providers only
};

// Compact surface given by eigenvalues of Box (with multiplicity).
HeatDataProvider spectral_provider(std::vector<double> eigenvalues, double volume, std::optional<LocalCoeffs> local = {},
                                   int n = 0);
// Flat torus C / (Z + tau Z) rescaled to volume e^{2c}.
HeatDataProvider flat_torus_provider(std::complex<double> tau, double c = 0.0);
// Round unit sphere with metric e^{2c} g.
HeatDataProvider round_sphere_provider(double c = 0.0);

struct CuspPerturbation {
    // delta(t, y) added to the cusp diagonal of every chart, y = |ln|u||.
    std::function<double(double t, double y)> delta;
};

// Locally homogeneous hyperbolic model: core region diagonal equals the
// half-plane diagonal, cusps carry the exact model kernel (n = 0).
HeatDataProvider hyperbolic_model_provider(int m, double volume, int rank = 1, int dim_H0 = 1,
                                           std::vector<double> extra_eigenvalues = {},
                                           std::optional<CuspPerturbation> perturbation = {});
// Reference surface P (three cusps, area 2 pi).
HeatDataProvider reference_P(int n = 0);
// Disjoint union of three copies.
HeatDataProvider triplicate(const HeatDataProvider& p);

HeatDataProvider provider_from_json(const nlohmann::json& j);
nlohmann::json provider_to_json(const HeatDataProvider& p);

// Pointwise cusp trace (n = 0 model kernel plus deviation).
double cusp_diagonal(const HeatDataProvider& p, double t, int chart, double y);

// int over {eta_a < |u| < eta_b} of f(y) dv with y = |ln|u||, computed in w = ln y.
// Signed when eta_a > eta_b; eta_a = 0 gives the punctured disc D*(eta_b).
double cusp_radial_integral(const std::function<double(double y)>& f, double eta_a, double eta_b, double tol = 1e-10);

// Tr^r[exp(-t Box)] (perp = false) or Tr^r[exp^perp(-t Box)] (perp = true).
double regularized_trace(const HeatDataProvider& M, const HeatDataProvider& P, double t, double eta, bool perp = true);

struct SmallTimeCoeffs {
    double A_minus1 = 0;
    double A_0 = 0;
};
SmallTimeCoeffs small_time_coeffs(const HeatDataProvider& M, const HeatDataProvider& P, bool perp = true);
// Compact case (m = 0), or P = reference_P(n) when m > 0.
SmallTimeCoeffs small_time_coeffs(const HeatDataProvider& M, bool perp = true);

struct TailModel {
    double mu = 0;
    double C = 0;
    double fitted_rate = 0;
    bool ok = false;
    std::string reason;
};

struct TraceCurve {
    std::vector<double> t;
    std::vector<double> value;
    // Weights of int f dt/t on the grid (empty for user grids).
    std::vector<double> log_weights;
    double t_min = 0, t_max = 0;  // quadrature edges when log_weights is set
    TailModel tail;
    bool has_coeffs = false;
    double a_minus1 = 0;
    double a_0 = 0;
};

// Composite Gauss-Legendre grid in ln t with a panel edge at t = 1.
struct MellinGrid {
    std::vector<double> t;
    std::vector<double> log_weights;
    double t_min = 0, t_max = 0;
};
MellinGrid mellin_grid(double t_min, double t_max, double panel = 0.25);

TailModel fit_tail(const std::vector<double>& t, const std::vector<double>& v, double mu);

TraceCurve trace_curve(const HeatDataProvider& M, const HeatDataProvider& P, const std::vector<double>& t_grid,
                       double eta = 0.05, Exec ex = Exec::serial);
// Curve on mellin_grid(t_min, t_max) with t_max from the declared gap.
TraceCurve mellin_trace_curve(const HeatDataProvider& M, const HeatDataProvider& P, double t_min = 1e-4,
                              Exec ex = Exec::serial);

struct GaussianCuspBound {
    double integral = 0;
    double bound = 0;  // C sqrt(t) exp(-(c'/2) (ln|ln eps|)^2 / t)
    double C = 0;
    bool holds = false;
};
// Left side of the Gaussian cusp estimate with i du dubar = 2 dx dy.
GaussianCuspBound gaussian_cusp_bound(double eps_radius, double c_prime, double t);
// int over D(eps) of (|u|^2 |ln|u||^{2 - s})^{-1} i du dubar.
double cusp_weight_integral(double eps_radius, double varsigma);

}  // namespace ct
