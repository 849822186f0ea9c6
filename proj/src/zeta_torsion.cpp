// SPDX-License-Identifier: Apache-2.0
// Mellin pipeline for zeta'(0), relative torsion, Selberg zeta and determinant-line norms.
#include "ct/zeta_torsion.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/expint.hpp>

#include "ct/errors.hpp"
#include "ct/format.hpp"
#include "ct/parallel.hpp"
#include "ct/special_functions.hpp"

namespace ct {

namespace {

double theta_minus_local(const TraceCurve& c, double t, double v) {
    return t < 1.0 ? v - c.a_minus1 / t - c.a_0 : v;
}

// int over [t_front, t_back] of the Mellin integrand by the trapezoid rule in ln t,
// with the jump at t = 1 handled by interpolating the trace there.
double trapezoid_log(const TraceCurve& c) {
    std::vector<double> u, th;
    for (std::size_t i = 0; i < c.t.size(); ++i) {
        if (i > 0 && c.t[i - 1] < 1.0 && c.t[i] > 1.0) {
            const double u0 = std::log(c.t[i - 1]), u1 = std::log(c.t[i]);
            const double a = -u0 / (u1 - u0);
            u.push_back(0.0);
            th.push_back(c.value[i - 1] + a * (c.value[i] - c.value[i - 1]));
        }
        u.push_back(std::log(c.t[i]));
        th.push_back(c.value[i]);
    }
    KahanSum s;
    for (std::size_t i = 1; i < u.size(); ++i) {
        const double h = u[i] - u[i - 1];
        const double tl = std::exp(u[i - 1]), tr = std::exp(u[i]);
        // Left of t = 1 both ends use the subtracted form, right of it the bare trace.
        const bool left = u[i] <= 0.0;
        const double fl = left ? th[i - 1] - c.a_minus1 / tl - c.a_0 : th[i - 1];
        const double fr = left ? th[i] - c.a_minus1 / tr - c.a_0 : th[i];
        s.add(0.5 * h * (fl + fr));
    }
    return s.value();
}

}  // namespace

ZetaResult mellin_zeta_prime0(const TraceCurve& c, MellinConstants constants) {
    if (!c.has_coeffs) throw CapabilityError("mellin_zeta_prime0: curve carries no small-time coefficients");
    if (!c.tail.ok) throw CapabilityError("mellin_zeta_prime0: no validated tail model (" + c.tail.reason + ")");
    if (c.t.size() < 3 || c.t.size() != c.value.size()) throw DomainError("mellin_zeta_prime0: curve too short");
    if (!(c.t.front() < 1.0 && c.t.back() > 1.0)) throw DomainError("mellin_zeta_prime0: curve must straddle t = 1");
    for (double v : c.value)
        if (!std::isfinite(v)) throw FinitenessError("mellin_zeta_prime0: non-finite trace sample");

    ZetaResult z;
    z.A_minus1 = c.a_minus1;
    z.A_0 = c.a_0;
    z.zeta_0 = c.a_0;

    double body;
    double body_err;
    if (!c.log_weights.empty()) {
        if (c.log_weights.size() != c.t.size()) throw DomainError("mellin_zeta_prime0: weight count mismatch");
        KahanSum s;
        double abs_sum = 0;
        for (std::size_t i = 0; i < c.t.size(); ++i) {
            const double f = c.log_weights[i] * theta_minus_local(c, c.t[i], c.value[i]);
            s.add(f);
            abs_sum += std::abs(f);
        }
        body = s.value();
        body_err = 1e-14 * abs_sum;
    } else {
        body = trapezoid_log(c);
        // Trapezoid error is not controlled; report the difference to a half-resolution sum.
        TraceCurve half = c;
        half.t.clear();
        half.value.clear();
        for (std::size_t i = 0; i < c.t.size(); i += 2) {
            half.t.push_back(c.t[i]);
            half.value.push_back(c.value[i]);
        }
        if (half.t.back() != c.t.back()) {
            half.t.push_back(c.t.back());
            half.value.push_back(c.value.back());
        }
        body_err = std::abs(trapezoid_log(half) - body);
    }

    // int_0^{t_min} r dt / t with r / t ~ A_1 + A_2 t extrapolated from the first two samples.
    const double t1 = c.t[0], t2 = c.t[1];
    const double q1 = theta_minus_local(c, t1, c.value[0]) / t1, q2 = theta_minus_local(c, t2, c.value[1]) / t2;
    const double a2 = t2 < 1.0 ? (q2 - q1) / (t2 - t1) : 0.0;
    const double a1 = q1 - a2 * t1;
    const double lo = c.log_weights.empty() ? t1 : c.t_min;
    if (!(lo > 0 && lo <= t1)) throw DomainError("mellin_zeta_prime0: quadrature lower edge must lie in (0, t_1]");
    const double small = a1 * lo + 0.5 * a2 * lo * lo;
    // Beyond t_max the trace follows the gap model from the last sample.
    const double mu = c.tail.mu;
    const double tl = c.t.back(), vl = c.value.back();
    const double hi = c.log_weights.empty() ? tl : c.t_max;
    if (!(hi >= tl)) throw DomainError("mellin_zeta_prime0: quadrature upper edge below the last sample");
    const double tail = vl == 0.0 ? 0.0 : vl * std::exp(mu * tl) * boost::math::expint(1, mu * hi);

    z.F0 = body + small + tail;
    z.quad_err = std::abs(small - q1 * lo) + std::abs(tail) + body_err;
    const double g = euler_gamma().value;
    if (constants == MellinConstants::validated)
        z.zeta_prime_0 = z.F0 - z.A_minus1 + g * z.A_0;
    else
        z.zeta_prime_0 = z.F0 + z.A_minus1 + g * z.A_0;
    return z;
}

nlohmann::json to_json(const ZetaResult& z) {
    return {{"zeta_prime_0", z.zeta_prime_0}, {"zeta_0", z.zeta_0}, {"F0", z.F0},
            {"A_minus1", z.A_minus1},         {"A_0", z.A_0},       {"quad_err", z.quad_err}};
}

double t_tz(int n, double z_value, double euler_char) {
    if (n > 0) throw DomainError("t_tz: n must be nonpositive");
    if (!(z_value > 0)) throw DomainError("t_tz: Z value must be positive");
    return std::exp(-c_k(-n).value * euler_char / 2) * z_value;
}

double log_t_tz_P(int n, std::optional<double> z_value, double euler_char) {
    if (n > 0) throw DomainError("log_t_tz_P: n must be nonpositive");
    double lz;
    if (z_value) {
        if (!(*z_value > 0)) throw DomainError("log_t_tz_P: Z value must be positive");
        lz = std::log(*z_value);
    } else if (n == 0) {
        lz = log_selberg_prime_P().value;
    } else {
        throw CapabilityError("log_t_tz_P: Z_P(" + std::to_string(1 - n) + ") is not built in; pass it explicitly");
    }
    return -c_k(-n).value * euler_char / 2 + lz;
}

TorsionResult analytic_torsion(const HeatDataProvider& M, const HeatDataProvider& P, const TraceCurve& curve,
                               const TorsionOptions& opt) {
    TorsionResult r;
    r.zeta = mellin_zeta_prime0(curve);
    const double zeta_part = opt.convention == TorsionConvention::validated ? -r.zeta.zeta_prime_0 : -0.5 * r.zeta.zeta_prime_0;
    if (M.m > 0) r.log_T_TZ = log_t_tz_P(P.n, opt.z_value, opt.euler_char_P);
    r.log_T = zeta_part + (M.m * M.rank / 3.0) * r.log_T_TZ;
    r.T = std::exp(r.log_T);
    if (!(r.T > 0) || !std::isfinite(r.T)) throw FinitenessError("analytic_torsion: torsion overflows double range");
    return r;
}

LengthSpectrum length_spectrum_from_json(const nlohmann::json& j) {
    LengthSpectrum s;
    s.lengths = j.at("lengths").get<std::vector<double>>();
    if (j.contains("multiplicities"))
        s.multiplicities = j.at("multiplicities").get<std::vector<int>>();
    else
        s.multiplicities.assign(s.lengths.size(), 1);
    if (s.multiplicities.size() != s.lengths.size()) throw DomainError("length spectrum: multiplicities size mismatch");
    for (std::size_t i = 0; i < s.lengths.size(); ++i) {
        if (!(s.lengths[i] > 0)) throw DomainError("length spectrum: lengths must be positive");
        if (i > 0 && s.lengths[i] < s.lengths[i - 1]) throw DomainError("length spectrum: lengths must be sorted");
        if (s.multiplicities[i] < 1) throw DomainError("length spectrum: multiplicities must be positive");
    }
    return s;
}

SelbergValue selberg_zeta(double s, const LengthSpectrum& spec, int k_max, double tail_tol) {
    if (!(s > 1)) throw DomainError("selberg_zeta: s must exceed 1");
    if (k_max < 0) throw DomainError("selberg_zeta: k_max must be nonnegative");
    if (spec.multiplicities.size() != spec.lengths.size()) throw DomainError("selberg_zeta: multiplicities size mismatch");
    SelbergValue out;
    KahanSum ls;
    double err = 0;
    for (std::size_t g = 0; g < spec.lengths.size(); ++g) {
        const double l = spec.lengths[g];
        if (!(l > 0)) throw DomainError("selberg_zeta: lengths must be positive");
        const int mult = spec.multiplicities[g];
        for (int k = 0; k <= k_max; ++k) ls.add(mult * std::log1p(-std::exp(-(s + k) * l)));
        // sum_{k > k_max} |ln(1 - x_k)| <= x / ((1 - x)(1 - e^{-l})), x = e^{-(s + k_max + 1) l}.
        const double x = std::exp(-(s + k_max + 1) * l);
        err += mult * x / ((1 - x) * -std::expm1(-l));
    }
    out.log_value = ls.value();
    out.value = std::exp(out.log_value);
    out.k_trunc_err = err;
    if (err > tail_tol)
        throw ToleranceError("selberg_zeta: k-truncation bound " + fmt17(err) + " exceeds tail_tol; raise k_max");
    return out;
}

DetLineNorm det_line_norm(const Eigen::MatrixXd& g0, const Eigen::MatrixXd& g1) {
    auto logdet = [](const Eigen::MatrixXd& g, const char* name) {
        if (g.rows() != g.cols()) throw DomainError(std::string("det_line_norm: ") + name + " must be square");
        if (g.rows() == 0) return 0.0;
        if (!g.isApprox(g.transpose(), 1e-12)) throw DomainError(std::string("det_line_norm: ") + name + " must be symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() != Eigen::Success) throw DomainError(std::string("det_line_norm: ") + name + " is not positive definite");
        return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    };
    DetLineNorm d;
    d.gram_h0 = g0;
    d.gram_h1 = g1;
    d.log_l2 = -0.5 * logdet(g0, "gram_h0") + 0.5 * logdet(g1, "gram_h1");
    return d;
}

DetLineNorm disjoint_union(const DetLineNorm& a, const DetLineNorm& b) {
    auto block = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(x.rows() + y.rows(), x.cols() + y.cols());
        m.topLeftCorner(x.rows(), x.cols()) = x;
        m.bottomRightCorner(y.rows(), y.cols()) = y;
        return m;
    };
    return det_line_norm(block(a.gram_h0, b.gram_h0), block(a.gram_h1, b.gram_h1));
}

double quillen_log_norm(double torsion, const DetLineNorm& det) {
    if (!(torsion > 0)) throw DomainError("quillen_log_norm: torsion must be positive");
    return 0.5 * std::log(torsion) + det.log_l2;
}

}  // namespace ct
