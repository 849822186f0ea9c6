// SPDX-License-Identifier: Apache-2.0
// Zeta-regularized determinants, relative analytic torsion, Selberg zeta and Quillen norms.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ct/reg_trace.hpp"
#include "json.hpp"

namespace ct {

// validated: zeta'(0) = F0 - A_{-1} + gamma A_0.
// literal: zeta'(0) = F0 + A_{-1} + gamma A_0 (Gamma'(-1) read as -gamma), comparison output only.
enum class MellinConstants { validated, literal };

struct ZetaResult {
    double zeta_prime_0 = 0;
    double zeta_0 = 0;  // equals A_0
    double F0 = 0;
    double A_minus1 = 0;
    double A_0 = 0;
    double quad_err = 0;
};

ZetaResult mellin_zeta_prime0(const TraceCurve& curve, MellinConstants constants = MellinConstants::validated);
nlohmann::json to_json(const ZetaResult& z);

// validated: T = exp(-zeta'(0)) T_TZ^{m rk/3}; literal_half uses exp(-zeta'(0)/2).
enum class TorsionConvention { validated, literal_half };

struct TorsionOptions {
    TorsionConvention convention = TorsionConvention::validated;
    // Z_P(1 - n) for n < 0; Z'_P(1) is built in for n = 0.
    std::optional<double> z_value;
    double euler_char_P = -1.0;
};

struct TorsionResult {
    double log_T = 0;
    double T = 0;
    double log_T_TZ = 0;  // ln T_TZ(P, n), 0 when m = 0
    ZetaResult zeta;
};

TorsionResult analytic_torsion(const HeatDataProvider& M, const HeatDataProvider& P, const TraceCurve& curve,
                               const TorsionOptions& opt = {});

// exp(-c_{-n} chi / 2) * Z_value.
double t_tz(int n, double z_value, double euler_char);
// ln T_TZ(P, n) with the built-in Z'_P(1) for n = 0; n < 0 needs z_value.
double log_t_tz_P(int n, std::optional<double> z_value = {}, double euler_char = -1.0);

struct LengthSpectrum {
    std::vector<double> lengths;
    std::vector<int> multiplicities;
};
LengthSpectrum length_spectrum_from_json(const nlohmann::json& j);

struct SelbergValue {
    double value = 1;
    double log_value = 0;
    double k_trunc_err = 0;  // bound on |ln Z| change from k > k_max
    std::string length_truncation = "uncontrolled beyond L_max";
};
SelbergValue selberg_zeta(double s, const LengthSpectrum& spec, int k_max, double tail_tol = 1e-12);

struct DetLineNorm {
    double log_l2 = 0;
    Eigen::MatrixXd gram_h0;
    Eigen::MatrixXd gram_h1;
};
// -1/2 ln det G0 + 1/2 ln det G1 via Cholesky.
DetLineNorm det_line_norm(const Eigen::MatrixXd& gram_h0, const Eigen::MatrixXd& gram_h1);
DetLineNorm disjoint_union(const DetLineNorm& a, const DetLineNorm& b);
double quillen_log_norm(double torsion, const DetLineNorm& det);

}  // namespace ct
