// SPDX-License-Identifier: Apache-2.0
// First Chern forms, Bott-Chern forms and right-hand sides of the compact-perturbation
// and anomaly formulas on radial cusp charts.
#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ct/metrics_flattenings.hpp"
#include "ct/parallel.hpp"
#include "ct/reg_trace.hpp"
#include "json.hpp"

namespace ct {

// Quadrature carrier for radial integrals over one chart.
// Nodes with s <= -1 live in w = ln|ln r| (s = -e^w); charts reaching r >= 1/e
// continue in s = ln r. Degree-2 forms are densities per ds with the angle integrated out,
// so the integral of a form is sum_i weights[i] * values[i].
struct ChartGrid {
    std::vector<double> w_nodes;    // w for cusp nodes, NaN for s-segment nodes
    std::vector<double> s_nodes;    // ln r, increasing
    std::vector<double> weights;    // quadrature weight times jacobian
    std::vector<double> jacobians;  // |ds/dx| with x = w or s
    int angular_nodes = 1;
    double radius = 0.5;
    double h_max = 0.1;
    double w_max = 40;
    std::size_t panels = 0;
    std::size_t cusp_nodes = 0;  // leading nodes on the w segment, ordered by decreasing w
    std::vector<std::pair<double, double>> w_panels;  // by decreasing w
    std::vector<std::pair<double, double>> s_panels;  // by increasing s
};

struct GridOptions {
    double h_max = 0.05;  // maximal panel width in w or s
    double w_max = 40;   // innermost node at s = -exp(w_max)
    double s_max = 40;   // outer cut for charts covering the plane
};

// Grid over {r < radius} (radius may be +inf) with panel edges at the given s-breakpoints.
ChartGrid make_chart_grid(double radius, const std::vector<double>& breakpoints_s, const GridOptions& opt = {});

struct FormSample {
    int degree = 0;
    std::vector<double> values;
};

struct GridStats {
    std::size_t nodes = 0;
    std::size_t panels = 0;
    double h_max = 0;
    double w_max = 0;
    double tail = 0;  // integrand mass estimate beyond w_max
    std::size_t evaluations = 0;  // adaptive integrand evaluations
};

struct FormIntegral {
    double value = 0;
    double quad_err = 0;
    GridStats grid_stats;
};
nlohmann::json to_json(const FormIntegral& v);

double integrate(const FormSample& f, const ChartGrid& grid);

// c1 = -(1/2 pi) Delta_euc(log_norm) as a density; log_norm = ln ||frame||.
FormSample c1_radial(const ProfilePtr& log_norm, const ChartGrid& grid);
// ln det(h1 / h2) = 2 rank (l1 - l2) for h_i = exp(2 l_i) id.
FormSample bott_chern_deg0(const ProfilePtr& l1, const ProfilePtr& l2, const ChartGrid& grid, int rank = 1);
// (ln(h1/h2)) (c1(h1) + c1(h2)) / 2 for line bundles; Td~ is this divided by 6.
FormSample bott_chern_deg2(const ProfilePtr& l1, const ProfilePtr& l2, const ChartGrid& grid);
// (d dbar / 2 pi i) of a degree-0 form by fourth-order differences on the grid nodes.
// Returns NaN on the two outermost nodes of each segment.
FormSample ddbar_over_2pi_i(const FormSample& f, const ChartGrid& grid);

// Hermitian metric e^{2 chi} id on a rank-r bundle xi, chi given per chart
// (a single profile is reused on every chart; none means chi = 0).
struct XiMetric {
    int rank = 1;
    std::vector<ProfilePtr> charts;
    ProfilePtr chart(std::size_t i) const;
};

struct AnomalyOptions {
    GridOptions grid;
    Exec exec = Exec::serial;
    double interior = 0;  // caller-supplied contribution from outside the charts
};

// Right side of the Bismut-Gillet-Soule anomaly formula for (g1, h1, ||.||1^{2n}) -> (g2, h2, ||.||2^{2n}):
//   int [Td~(omega^{-1}, g1, g2) ch(E, h1) + Td(omega^{-1}, g2) ch~(E, h1, h2)],  E = xi (x) omega(D)^n.
// Equals 2 ln(Q2 / Q1). Norm descriptors may be empty when n = 0.
FormIntegral anomaly_rhs_bgs(const MetricDescriptor& g1, const MetricDescriptor& g2, const XiMetric& xi1,
                             const XiMetric& xi2, int n, const NormDescriptor& norm1, const NormDescriptor& norm2,
                             const AnomalyOptions& opt = {});

// Right side of the anomaly formula for metrics with cusps, (g, h, ||.||) -> (g0, h0, ||.||0):
// the bracketed degree-2 integral over the charts plus opt.interior,
// minus (rank/6) ln(||.||^W / ||.||^W_0) plus (1/2) sum_i ln det(h / h0)|_{P_i}.
// Empty norm descriptors default to the norms induced by the metrics.
FormIntegral anomaly_rhs_cusp(const MetricDescriptor& g, const MetricDescriptor& g0, const XiMetric& xi,
                              const XiMetric& xi0, int n, const NormDescriptor& norm = {},
                              const NormDescriptor& norm0 = {}, const AnomalyOptions& opt = {});

// int c1(xi) (2n ln(||.||_f / ||.||) + ln(g_f / g)) over the charts; c1_xi is sampled on the grid of
// chart `chart`.
FormIntegral compact_perturbation_rhs(const MetricDescriptor& g, const MetricDescriptor& g_f, const NormDescriptor& norm,
                                      const NormDescriptor& norm_f, const FormSample& c1_xi, const ChartGrid& grid,
                                      int n, std::size_t chart = 0);

struct CuspLimitBand {
    double theta = 0;
    double value = 0;       // flattened anomaly integral minus cusp-form integral on the chart
    double target = 0;      // -(rank/6) ln|a|
    double bgs_flat = 0;    // chart integral with the flattened metrics
    double cusp_form = 0;   // chart integral of the cusp-form integrand
    double quad_err = 0;
};
// Reparameterization germ z0 = a z: contribution of the flattening bands as theta -> 0.
CuspLimitBand cusp_limit_band(double theta, std::complex<double> a, int rank = 1, const GridOptions& opt = {});

struct ChSimilarityReport {
    double identity1_residual = 0;  // max |Td~(omega^{-1}) - Td~(omega(D)^{-1})| over nodes, both degrees
    double identity3_value = 0;     // ch~^{[0]}(omega(D)^n) at r = exp(s_probe)
    double identity2_flux = 0;      // int_{r<eps} [Td(omega^{-1})]^{[2]} - [Td(omega(D)^{-1})]^{[2]}
    double identity2_quad_err = 0;
    bool ok1 = false, ok2 = false, ok3 = false;
};
// Identities relating omega and omega(D) for g, g0 on chart 0.
ChSimilarityReport ch_similarity_check(const MetricDescriptor& g, const MetricDescriptor& g0, int n, double s_probe = -40,
                                       double s_eps = -20, const GridOptions& opt = {});

// Poincare metric in the coordinate a z on {s < s_in}, equal to the Poincare metric in z on
// {s > s_out}, joined by a smooth step.
MetricDescriptor localized_germ_metric(std::complex<double> a, double s_in = -4, double s_out = -2, double radius = 0.5);

// Round unit sphere e^{2c} 4|dz|^2/(1+|z|^2)^2 on one chart covering the plane.
MetricDescriptor round_sphere_metric(double c = 0.0);
// Flat unit-area torus e^{2c}|dz|^2 represented by a disc of area 1 (radially symmetric data only).
MetricDescriptor flat_torus_metric(double c = 0.0);

// Spectral side of constant conformal scaling g -> e^{2c} g on a compact surface:
// 2 ln(Q(e^{2c} g) / Q(g)) from zeta'(0) of both spectra and the L2 change on H^0.
double spectral_scaling_shift(const HeatDataProvider& base, const HeatDataProvider& scaled);

}  // namespace ct
