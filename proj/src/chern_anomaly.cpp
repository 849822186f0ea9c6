// SPDX-License-Identifier: Apache-2.0
// Chern and Bott-Chern forms on radial charts and quadrature of anomaly right-hand sides.
#include "ct/chern_anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ct/errors.hpp"
#include "ct/format.hpp"
#include "ct/quadrature.hpp"
#include "ct/smooth_step.hpp"
#include "ct/zeta_torsion.hpp"

namespace ct {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Deepest node used for smooth (compact) integrands: s = -60, where r^2 ~ e^{-120}.
const double kSmoothWMax = std::log(60.0);

Jet jet_of(const ProfilePtr& p, double s) { return p ? p->jet(s) : Jet{}; }

// c1 density per ds of a line bundle with ln||frame|| = l.
double c1_of(const Jet& l) { return -l.d2; }

// ln rho_1 - ln rho_2 without cancelling the common Poincare reference.
Jet log_rho_diff(const MetricDescriptor& g1, const MetricDescriptor& g2, std::size_t chart, double s) {
    if (g1.reference == g2.reference)
        return jet_of(g1.charts.at(chart).log_conformal, s) - jet_of(g2.charts.at(chart).log_conformal, s);
    return g1.log_rho(chart, s) - g2.log_rho(chart, s);
}

std::vector<double> grid_breakpoints(std::initializer_list<const MetricDescriptor*> gs, std::size_t chart) {
    std::vector<double> b;
    for (const MetricDescriptor* g : gs)
        for (double x : g->charts.at(chart).breakpoints_s) b.push_back(x);
    return b;
}

double common_radius(std::initializer_list<const MetricDescriptor*> gs, std::size_t chart) {
    double r = std::numeric_limits<double>::infinity();
    for (const MetricDescriptor* g : gs) r = std::min(r, g->charts.at(chart).radius);
    return r;
}

void check_charts(const MetricDescriptor& a, const MetricDescriptor& b, const char* who) {
    if (a.charts.empty() || a.charts.size() != b.charts.size())
        throw DomainError(std::string(who) + ": descriptors must have the same nonzero number of charts");
}

// Fornberg weights for derivatives 0..2 at x0 from nodes x.
void fornberg(double x0, const double* x, int n, double* d1, double* d2) {
    double c[5][3] = {};
    double c1 = 1, c4 = x[0] - x0;
    c[0][0] = 1;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, 2);
        double c2 = 1;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    for (int i = 0; i < n; ++i) {
        d1[i] = c[i][1];
        d2[i] = c[i][2];
    }
}

struct PanelResult {
    double value = 0, err = 0, max_abs = 0;
    std::size_t evals = 0;
};

// GL10 on [lo, hi] in x with bisection until the halves agree; f is the density per dx.
PanelResult adaptive_panel(const std::function<double(double)>& f, double lo, double hi, int depth = 14) {
    static const Rule<double> gl = gauss_legendre<double, 10>();
    auto rule = [&](double a, double b, PanelResult& acc) {
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        KahanSum s;
        for (std::size_t k = 0; k < gl.x.size(); ++k) {
            const double v = f(c + h * gl.x[k]);
            if (!std::isfinite(v)) throw FinitenessError("chern_anomaly: non-finite integrand");
            acc.max_abs = std::max(acc.max_abs, std::abs(v));
            s.add(h * gl.w[k] * v);
        }
        acc.evals += gl.x.size();
        return s.value();
    };
    PanelResult out;
    std::function<double(double, double, double, int)> rec = [&](double a, double b, double whole, int d) {
        const double m = 0.5 * (a + b);
        const double l = rule(a, m, out), r = rule(m, b, out);
        const double diff = std::abs(l + r - whole);
        if (d <= 0 || diff <= 1e-14 + 1e-13 * std::abs(l + r)) {
            out.err += diff;
            return l + r;
        }
        return rec(a, m, l, d - 1) + rec(m, b, r, d - 1);
    };
    const double whole = rule(lo, hi, out);
    out.value = rec(lo, hi, whole, depth);
    return out;
}

// Integral of a density per ds over {r < radius}, panels refined adaptively and reduced in order.
// Cusp integrands get a decay check on the outermost decade of w.
FormIntegral integrate_density(const std::function<double(double)>& dens, double radius,
                               const std::vector<double>& bps, GridOptions opt, Exec ex, bool check_decay) {
    const ChartGrid g = make_chart_grid(radius, bps, opt);
    const std::size_t nw = g.w_panels.size(), np = nw + g.s_panels.size();
    std::vector<PanelResult> res(np);
    parallel_map(ex, np, [&](std::size_t i) {
        if (i < nw) {
            const auto [lo, hi] = g.w_panels[i];
            res[i] = adaptive_panel([&](double w) { const double j = std::exp(w); return j * dens(-j); }, lo, hi);
        } else {
            const auto [lo, hi] = g.s_panels[i - nw];
            res[i] = adaptive_panel(dens, lo, hi);
        }
        return 0.0;
    });
    FormIntegral out;
    KahanSum s;
    for (const PanelResult& r : res) {
        s.add(r.value);
        out.quad_err += r.err;
        out.grid_stats.evaluations += r.evals;
    }
    out.value = s.value();
    double tail = 0;
    if (nw > 0) {
        const double wm = g.w_panels.front().second;
        const double dec = std::log(10.0);
        double m_last = 0, m_prev = 0;
        for (std::size_t i = 0; i < nw; ++i) {
            const double mid = 0.5 * (g.w_panels[i].first + g.w_panels[i].second);
            if (mid >= wm - dec)
                m_last = std::max(m_last, res[i].max_abs);
            else if (mid >= wm - 2 * dec)
                m_prev = std::max(m_prev, res[i].max_abs);
        }
        // Integrands decaying at least like e^{-w} leave about f(w_max) beyond the cut.
        tail = res.front().max_abs;
        if (check_decay && m_last > 1e-300 && !(m_last <= 0.5 * m_prev))
            throw FinitenessError("chern_anomaly: integrand does not decay toward the cusp (outermost decade max " +
                                  std::to_string(m_last) + " vs " + std::to_string(m_prev) + ")");
    }
    out.quad_err += tail;
    out.grid_stats.nodes = g.s_nodes.size();
    out.grid_stats.panels = g.panels;
    out.grid_stats.h_max = g.h_max;
    out.grid_stats.w_max = nw ? g.w_max : kNaN;
    out.grid_stats.tail = tail;
    return out;
}

void accumulate(FormIntegral& total, const FormIntegral& part) {
    total.value += part.value;
    total.quad_err += part.quad_err;
    total.grid_stats.nodes += part.grid_stats.nodes;
    total.grid_stats.panels += part.grid_stats.panels;
    total.grid_stats.h_max = part.grid_stats.h_max;
    total.grid_stats.w_max = part.grid_stats.w_max;
    total.grid_stats.tail += part.grid_stats.tail;
    total.grid_stats.evaluations += part.grid_stats.evaluations;
}

// Degree-2 part of the Bismut-Gillet-Soule integrand on one chart, per ds.
struct BgsIntegrand {
    const MetricDescriptor* g1;
    const MetricDescriptor* g2;
    ProfilePtr chi1, chi2, nu1, nu2;
    int rank, n;
    std::size_t chart;

    double operator()(double s) const {
        const Jet a1 = g1->log_rho(chart, s), a2 = g2->log_rho(chart, s);
        const double da = log_rho_diff(*g1, *g2, chart, s).v;
        const Jet e1 = jet_of(chi1, s) + double(n) * jet_of(nu1, s);
        const Jet e2 = jet_of(chi2, s) + double(n) * jet_of(nu2, s);
        const double ca1 = c1_of(a1), ca2 = c1_of(a2), ce1 = c1_of(e1), ce2 = c1_of(e2);
        const double de = (e1 - e2).v;
        const double r = rank;
        const double td_tilde2 = da * (ca1 + ca2) / 6;
        return r * td_tilde2 + da * r * ce1 + r * de * (ce1 + ce2) + ca2 * r * de;
    }
};

// Degree-2 part of the cusp anomaly integrand on one chart, per ds.
struct CuspIntegrand {
    ProfilePtr chi, chi0, nu, nu0;
    int rank, n;

    double operator()(double s) const {
        const Jet v = jet_of(nu, s), v0 = jet_of(nu0, s);
        const Jet x = jet_of(chi, s), x0 = jet_of(chi0, s);
        // omega(D)^{-1} carries ln||frame|| = -nu.
        const double db = (v0 - v).v;
        const double cb = -c1_of(v), cb0 = -c1_of(v0);
        const double cv = c1_of(v), cv0 = c1_of(v0), cx = c1_of(x), cx0 = c1_of(x0);
        const double r = rank, dn = n;
        const double dx = (x - x0).v, dv = (v - v0).v;
        const double term1 = r * db * (cb + cb0) / 6 + db * r * (cx + dn * cv);
        const double term2 = r * dx * (cx + cx0) + 2 * r * dx * (cb0 / 2 + dn * cv);
        const double term3 = r * dn * dn * dv * (cv + cv0) + 2 * dn * dv * r * (cb0 / 2 + cx0);
        return term1 + term2 + term3;
    }
};

void require_smooth_at_origin(const Jet& j, const char* what, std::size_t chart) {
    if (!std::isfinite(j.v) || std::abs(j.d1) > 1e-6)
        throw DomainError(std::string("anomaly_rhs_bgs: ") + what + " is not smooth at r = 0 on chart " +
                          std::to_string(chart));
}

}  // namespace

ChartGrid make_chart_grid(double radius, const std::vector<double>& breakpoints_s, const GridOptions& opt) {
    if (!(radius > 0)) throw DomainError("make_chart_grid: radius must be positive");
    if (!(opt.h_max > 0) || !(opt.w_max > 0)) throw DomainError("make_chart_grid: h_max and w_max must be positive");
    static const Rule<double> gl = gauss_legendre<double, 10>();
    ChartGrid g;
    g.radius = radius;
    g.h_max = opt.h_max;
    g.w_max = opt.w_max;
    const double s_top = std::isinf(radius) ? opt.s_max : std::log(radius);

    auto panels = [&](double lo, double hi, std::vector<double> cuts) {
        std::vector<double> edges{lo, hi};
        for (double c : cuts)
            if (c > lo && c < hi) edges.push_back(c);
        std::sort(edges.begin(), edges.end());
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 1; i < edges.size(); ++i) {
            const double a = edges[i - 1], b = edges[i];
            if (b - a < 1e-14) continue;
            const int k = std::max(1, static_cast<int>(std::ceil((b - a) / opt.h_max - 1e-9)));
            for (int j = 0; j < k; ++j) out.emplace_back(a + (b - a) * j / k, a + (b - a) * (j + 1) / k);
        }
        return out;
    };

    // w segment, s in (-inf, min(s_top, -1)], nodes emitted by decreasing w.
    const double w_lo = std::log(-std::min(s_top, -1.0));
    if (w_lo < opt.w_max) {
        std::vector<double> cuts;
        for (double b : breakpoints_s)
            if (b < 0) cuts.push_back(std::log(-b));
        auto ps = panels(w_lo, opt.w_max, cuts);
        g.panels += ps.size();
        for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
            g.w_panels.push_back(*it);
            const double c = 0.5 * (it->first + it->second), h = 0.5 * (it->second - it->first);
            std::vector<std::pair<double, double>> nodes;
            for (std::size_t k = 0; k < gl.x.size(); ++k) nodes.emplace_back(c + h * gl.x[k], h * gl.w[k]);
            std::sort(nodes.begin(), nodes.end(), [](auto& a, auto& b) { return a.first > b.first; });
            for (auto [w, wt] : nodes) {
                const double jac = std::exp(w);
                g.w_nodes.push_back(w);
                g.s_nodes.push_back(-jac);
                g.jacobians.push_back(jac);
                g.weights.push_back(wt * jac);
            }
        }
        g.cusp_nodes = g.s_nodes.size();
    }
    // s segment on [-1, s_top].
    if (s_top > -1.0) {
        auto ps = panels(-1.0, s_top, breakpoints_s);
        g.panels += ps.size();
        for (auto& p : ps) {
            g.s_panels.push_back(p);
            const double c = 0.5 * (p.first + p.second), h = 0.5 * (p.second - p.first);
            std::vector<std::pair<double, double>> nodes;
            for (std::size_t k = 0; k < gl.x.size(); ++k) nodes.emplace_back(c + h * gl.x[k], h * gl.w[k]);
            std::sort(nodes.begin(), nodes.end());
            for (auto [s, wt] : nodes) {
                g.w_nodes.push_back(kNaN);
                g.s_nodes.push_back(s);
                g.jacobians.push_back(1.0);
                g.weights.push_back(wt);
            }
        }
    }
    return g;
}

nlohmann::json to_json(const FormIntegral& v) {
    nlohmann::json gs = {{"nodes", v.grid_stats.nodes},
                         {"panels", v.grid_stats.panels},
                         {"h_max", v.grid_stats.h_max},
                         {"tail", v.grid_stats.tail}};
    gs["w_max"] = std::isfinite(v.grid_stats.w_max) ? nlohmann::json(v.grid_stats.w_max) : nlohmann::json(nullptr);
    gs["evaluations"] = v.grid_stats.evaluations;
    return {{"value", v.value}, {"quad_err", v.quad_err}, {"grid_stats", gs}};
}

double integrate(const FormSample& f, const ChartGrid& grid) {
    if (f.degree != 2) throw DomainError("integrate: only degree-2 forms integrate over a chart");
    if (f.values.size() != grid.weights.size()) throw DomainError("integrate: sample size does not match the grid");
    KahanSum s;
    for (std::size_t i = 0; i < f.values.size(); ++i) s.add(grid.weights[i] * f.values[i]);
    return s.value();
}

FormSample c1_radial(const ProfilePtr& log_norm, const ChartGrid& grid) {
    FormSample f{2, {}};
    f.values.reserve(grid.s_nodes.size());
    for (double s : grid.s_nodes) f.values.push_back(c1_of(jet_of(log_norm, s)));
    return f;
}

FormSample bott_chern_deg0(const ProfilePtr& l1, const ProfilePtr& l2, const ChartGrid& grid, int rank) {
    if (rank < 1) throw DomainError("bott_chern_deg0: rank must be positive");
    FormSample f{0, {}};
    f.values.reserve(grid.s_nodes.size());
    for (double s : grid.s_nodes) f.values.push_back(2.0 * rank * (jet_of(l1, s) - jet_of(l2, s)).v);
    return f;
}

FormSample bott_chern_deg2(const ProfilePtr& l1, const ProfilePtr& l2, const ChartGrid& grid) {
    FormSample f{2, {}};
    f.values.reserve(grid.s_nodes.size());
    for (double s : grid.s_nodes) {
        const Jet a = jet_of(l1, s), b = jet_of(l2, s);
        f.values.push_back((a - b).v * (c1_of(a) + c1_of(b)));
    }
    return f;
}

FormSample ddbar_over_2pi_i(const FormSample& f, const ChartGrid& grid) {
    if (f.degree != 0) throw DomainError("ddbar_over_2pi_i: expects a degree-0 form");
    const std::size_t N = grid.s_nodes.size();
    if (f.values.size() != N) throw DomainError("ddbar_over_2pi_i: sample size does not match the grid");
    FormSample out{2, std::vector<double>(N, kNaN)};
    auto segment = [&](std::size_t lo, std::size_t hi, bool in_w) {
        for (std::size_t i = lo + 2; i + 2 < hi; ++i) {
            double x[5], d1[5], d2[5];
            for (int k = 0; k < 5; ++k) x[k] = in_w ? grid.w_nodes[i - 2 + k] : grid.s_nodes[i - 2 + k];
            fornberg(x[2], x, 5, d1, d2);
            double f1 = 0, f2 = 0;
            for (int k = 0; k < 5; ++k) {
                f1 += d1[k] * f.values[i - 2 + k];
                f2 += d2[k] * f.values[i - 2 + k];
            }
            const double s = grid.s_nodes[i];
            const double fss = in_w ? (f2 - f1) / (s * s) : f2;
            // d dbar / (2 pi i) = -(1/4 pi) Delta dA, angle-integrated: -(1/2) f_ss ds.
            out.values[i] = -0.5 * fss;
        }
    };
    segment(0, grid.cusp_nodes, true);
    segment(grid.cusp_nodes, N, false);
    return out;
}

ProfilePtr XiMetric::chart(std::size_t i) const {
    if (charts.empty()) return nullptr;
    if (charts.size() == 1) return charts.front();
    return charts.at(i);
}

FormIntegral anomaly_rhs_bgs(const MetricDescriptor& g1, const MetricDescriptor& g2, const XiMetric& xi1,
                             const XiMetric& xi2, int n, const NormDescriptor& norm1, const NormDescriptor& norm2,
                             const AnomalyOptions& opt) {
    check_charts(g1, g2, "anomaly_rhs_bgs");
    if (xi1.rank != xi2.rank || xi1.rank < 1) throw DomainError("anomaly_rhs_bgs: xi ranks must agree and be positive");
    if (n != 0 && (norm1.charts.size() != g1.charts.size() || norm2.charts.size() != g1.charts.size()))
        throw DomainError("anomaly_rhs_bgs: n != 0 needs omega(D) norms on every chart");
    GridOptions gopt = opt.grid;
    gopt.w_max = std::min(gopt.w_max, kSmoothWMax);
    FormIntegral total;
    for (std::size_t c = 0; c < g1.charts.size(); ++c) {
        BgsIntegrand f{&g1, &g2, xi1.chart(c), xi2.chart(c),
                       n ? norm1.charts[c].log_norm : nullptr, n ? norm2.charts[c].log_norm : nullptr,
                       xi1.rank, n, c};
        const double s_deep = -std::exp(gopt.w_max);
        require_smooth_at_origin(g1.log_rho(c, s_deep), "metric g1", c);
        require_smooth_at_origin(g2.log_rho(c, s_deep), "metric g2", c);
        require_smooth_at_origin(jet_of(f.chi1, s_deep) + double(n) * jet_of(f.nu1, s_deep), "bundle metric 1", c);
        require_smooth_at_origin(jet_of(f.chi2, s_deep) + double(n) * jet_of(f.nu2, s_deep), "bundle metric 2", c);
        const double R = common_radius({&g1, &g2}, c);
        if (std::isinf(R)) {
            // Smooth at infinity: ln rho ~ -2 ln r.
            for (const MetricDescriptor* g : {&g1, &g2})
                if (std::abs(g->log_rho(c, gopt.s_max).d1 + 2) > 1e-6)
                    throw DomainError("anomaly_rhs_bgs: metric is not smooth at infinity on chart " + std::to_string(c));
        }
        accumulate(total, integrate_density(f, R, grid_breakpoints({&g1, &g2}, c), gopt, opt.exec, false));
    }
    total.value += opt.interior;
    return total;
}

FormIntegral anomaly_rhs_cusp(const MetricDescriptor& g, const MetricDescriptor& g0, const XiMetric& xi,
                              const XiMetric& xi0, int n, const NormDescriptor& norm, const NormDescriptor& norm0,
                              const AnomalyOptions& opt) {
    check_charts(g, g0, "anomaly_rhs_cusp");
    if (xi.rank != xi0.rank || xi.rank < 1) throw DomainError("anomaly_rhs_cusp: xi ranks must agree and be positive");
    const NormDescriptor nv = norm.charts.empty() ? induced_norm(g) : norm;
    const NormDescriptor nv0 = norm0.charts.empty() ? induced_norm(g0) : norm0;
    if (nv.charts.size() != g.charts.size() || nv0.charts.size() != g.charts.size())
        throw DomainError("anomaly_rhs_cusp: norm descriptors must match the charts");
    FormIntegral total;
    std::vector<std::complex<double>> hp, hp0;
    double det_term = 0;
    const double s_deep = -std::exp(opt.grid.w_max);
    for (std::size_t c = 0; c < g.charts.size(); ++c) {
        CuspIntegrand f{xi.chart(c), xi0.chart(c), nv.charts[c].log_norm, nv0.charts[c].log_norm, xi.rank, n};
        const double R = common_radius({&g, &g0}, c);
        accumulate(total, integrate_density(f, R, grid_breakpoints({&g, &g0}, c), opt.grid, opt.exec, true));
        hp.push_back(g.charts[c].h_prime_at_zero);
        hp0.push_back(g0.charts[c].h_prime_at_zero);
        // ln det(h / h0) at the puncture, h = e^{2 chi} id.
        const Jet x = jet_of(f.chi, s_deep), x0 = jet_of(f.chi0, s_deep);
        // Constancy in w = ln|ln r|, the scale on which cusp profiles vary.
        if (std::abs(s_deep * x.d1) > 1e-6 || std::abs(s_deep * x0.d1) > 1e-6)
            throw DomainError("anomaly_rhs_cusp: bundle metrics must be constant near the cusps");
        det_term += 0.5 * 2.0 * xi.rank * (x - x0).v;
    }
    const double wolpert = wolpert_log_ratio(hp0) - wolpert_log_ratio(hp);
    total.value += opt.interior - xi.rank / 6.0 * wolpert + det_term;
    return total;
}

FormIntegral compact_perturbation_rhs(const MetricDescriptor& g, const MetricDescriptor& g_f, const NormDescriptor& norm,
                                      const NormDescriptor& norm_f, const FormSample& c1_xi, const ChartGrid& grid,
                                      int n, std::size_t chart) {
    if (c1_xi.degree != 2 || c1_xi.values.size() != grid.s_nodes.size())
        throw DomainError("compact_perturbation_rhs: c1_xi must be a degree-2 sample on the grid");
    if (n != 0 && (norm.charts.size() <= chart || norm_f.charts.size() <= chart))
        throw DomainError("compact_perturbation_rhs: n != 0 needs omega(D) norms");
    const ProfilePtr nu = n ? norm.charts[chart].log_norm : nullptr;
    const ProfilePtr nu_f = n ? norm_f.charts[chart].log_norm : nullptr;
    KahanSum s;
    double abs_sum = 0;
    for (std::size_t i = 0; i < grid.s_nodes.size(); ++i) {
        if (c1_xi.values[i] == 0.0) continue;
        const double x = grid.s_nodes[i];
        const double ratio = 2.0 * n * (jet_of(nu_f, x) - jet_of(nu, x)).v + 2.0 * log_rho_diff(g_f, g, chart, x).v;
        const double term = grid.weights[i] * c1_xi.values[i] * ratio;
        s.add(term);
        abs_sum += std::abs(term);
    }
    FormIntegral out;
    out.value = s.value();
    out.quad_err = 1e-15 * abs_sum;
    out.grid_stats = {grid.s_nodes.size(), grid.panels, grid.h_max, grid.cusp_nodes ? grid.w_max : kNaN, 0.0};
    return out;
}

CuspLimitBand cusp_limit_band(double theta, std::complex<double> a, int rank, const GridOptions& opt) {
    if (std::abs(a) == 0) throw DomainError("cusp_limit_band: a must be nonzero");
    const MetricDescriptor g = poincare_metric(1, 0.5);
    const MetricDescriptor g0 = pullback_linear_germ(g, a);
    const Flattened F = anomaly_flattening(theta, 0.5);
    const MetricDescriptor gf0 = pullback_linear_germ(F.metric, a);
    XiMetric xi;
    xi.rank = rank;
    AnomalyOptions ao;
    ao.grid = opt;

    CuspLimitBand out;
    out.theta = theta;
    out.target = -rank / 6.0 * std::log(std::abs(a));
    const double R = std::min(0.5, 0.5 / std::abs(a));

    GridOptions smooth = opt;
    smooth.w_max = std::min(opt.w_max, kSmoothWMax);
    BgsIntegrand fb{&F.metric, &gf0, nullptr, nullptr, nullptr, nullptr, rank, 0, 0};
    const FormIntegral b = integrate_density(fb, R, grid_breakpoints({&F.metric, &gf0}, 0), smooth, Exec::serial, false);

    const NormDescriptor nv = induced_norm(g), nv0 = induced_norm(g0);
    CuspIntegrand fc{nullptr, nullptr, nv.charts[0].log_norm, nv0.charts[0].log_norm, rank, 0};
    const FormIntegral c = integrate_density(fc, R, grid_breakpoints({&g, &g0, &F.metric, &gf0}, 0), opt, Exec::serial, true);

    out.bgs_flat = b.value;
    out.cusp_form = c.value;
    out.value = b.value - c.value;
    out.quad_err = b.quad_err + c.quad_err;
    return out;
}

ChSimilarityReport ch_similarity_check(const MetricDescriptor& g, const MetricDescriptor& g0, int n, double s_probe,
                                       double s_eps, const GridOptions& opt) {
    check_charts(g, g0, "ch_similarity_check");
    if (!(s_probe < -1) || !(s_eps < -1)) throw DomainError("ch_similarity_check: probes must lie in the cusp region");
    const NormDescriptor nv = induced_norm(g), nv0 = induced_norm(g0);
    const ProfilePtr v = nv.charts[0].log_norm, v0 = nv0.charts[0].log_norm;
    ChSimilarityReport rep;

    // Identity 1 on nodes with s >= s_probe, both degrees of Td~.
    GridOptions o1 = opt;
    o1.w_max = std::log(-s_probe);
    const double R = common_radius({&g, &g0}, 0);
    const ChartGrid g1 = make_chart_grid(R, grid_breakpoints({&g, &g0}, 0), o1);
    for (double s : g1.s_nodes) {
        const Jet a = g.log_rho(0, s), a0 = g0.log_rho(0, s);
        const Jet b = -jet_of(v, s), b0 = -jet_of(v0, s);
        const double da = log_rho_diff(g, g0, 0, s).v, db = (b - b0).v;
        const double r0 = std::abs(da - db);
        const double r2 = std::abs(da * (c1_of(a) + c1_of(a0)) / 6 - db * (c1_of(b) + c1_of(b0)) / 6);
        rep.identity1_residual = std::max({rep.identity1_residual, r0, r2});
    }
    rep.ok1 = rep.identity1_residual < 1e-10;

    // Identity 3: ch~^{[0]}(omega(D)^n, ||.||^{2n}, ||.||_0^{2n}) = 2n (nu - nu0) near the puncture.
    rep.identity3_value = 2.0 * n * (jet_of(v, s_probe) - jet_of(v0, s_probe)).v;
    rep.ok3 = std::abs(rep.identity3_value) < 1e-6;

    // Identity 2 in flux form: punctured-disc integral plus the point mass -f'(-inf)/2.
    auto td2_current = [&](std::function<Jet(double)> f) {
        const FormIntegral p = integrate_density([&](double s) { return 0.5 * c1_of(f(s)); }, std::exp(s_eps), {}, opt,
                                                 Exec::serial, false);
        const double deep = -std::exp(opt.w_max);
        return std::make_pair(p.value - 0.5 * f(deep).d1, p.quad_err);
    };
    const auto t_omega = td2_current([&](double s) { return g0.log_rho(0, s); });
    const auto t_omegaD = td2_current([&](double s) { return -jet_of(v0, s); });
    rep.identity2_flux = t_omega.first - t_omegaD.first;
    rep.identity2_quad_err = t_omega.second + t_omegaD.second;
    rep.ok2 = std::abs(rep.identity2_flux - 0.5) < 1e-3;
    return rep;
}

MetricDescriptor localized_germ_metric(std::complex<double> a, double s_in, double s_out, double radius) {
    if (std::abs(a) == 0) throw DomainError("localized_germ_metric: a must be nonzero");
    if (!(s_in < s_out) || !(s_out < std::log(radius))) throw DomainError("localized_germ_metric: need s_in < s_out < ln radius");
    const double la = std::log(std::abs(a));
    if (!(s_out + la < 0)) throw DomainError("localized_germ_metric: germ leaves the unit disc before s_out");
    MetricDescriptor g = poincare_metric(1, radius);
    MetricChart& c = g.charts[0];
    c.h_prime_at_zero = a;
    c.breakpoints_s = {s_in, s_out};
    c.log_conformal = fn_profile([la, s_in, s_out](double s) {
        const Jet S = Jet::variable(s);
        const Jet sig = compose(mollifier((s_out - s) / (s_out - s_in)), (s_out - S) * (1 / (s_out - s_in)));
        if (sig.v == 0 && sig.d1 == 0 && sig.d2 == 0) return Jet{};
        return sig * (log_abs(S) - log_abs(S + la));
    });
    return g;
}

MetricDescriptor round_sphere_metric(double c) {
    MetricDescriptor g;
    g.reference = Reference::euclidean;
    MetricChart ch;
    ch.id = "plane";
    ch.radius = std::numeric_limits<double>::infinity();
    ch.log_conformal = fn_profile(
        [c](double s) {
            const Jet S = Jet::variable(s);
            // ln 2 + c - ln(1 + e^{2s}), written to stay finite for large s.
            const Jet soft = s > 0 ? 2.0 * S + log(1.0 + exp(-2.0 * S)) : log(1.0 + exp(2.0 * S));
            return std::log(2.0) + c - soft;
        },
        "ln(2)+" + fmt17(c) + "-ln(1+exp(2*ln(r)))");
    g.charts = {ch};
    return g;
}

MetricDescriptor flat_torus_metric(double c) {
    MetricDescriptor g;
    g.reference = Reference::euclidean;
    MetricChart ch;
    ch.id = "torus";
    ch.radius = 1 / std::sqrt(std::numbers::pi);
    ch.log_conformal = const_profile(c);
    g.charts = {ch};
    g.interior_volume = 0;
    return g;
}

double spectral_scaling_shift(const HeatDataProvider& base, const HeatDataProvider& scaled) {
    if (base.m != 0 || scaled.m != 0) throw UnsupportedError("spectral_scaling_shift: compact surfaces only");
    const ZetaResult z0 = mellin_zeta_prime0(mellin_trace_curve(base, base, 1e-4));
    const ZetaResult z1 = mellin_zeta_prime0(mellin_trace_curve(scaled, scaled, 1e-4));
    // ln Q = (1/2) ln T + log_l2, ln T = -zeta'(0); H^0 is spanned by constants with |1|^2 = volume,
    // and the L2 norm on H^1 is conformally invariant in dimension two.
    Eigen::MatrixXd g0(1, 1), g1(1, 1), h1(0, 0);
    g0 << base.volume;
    g1 << scaled.volume;
    const double q0 = quillen_log_norm(std::exp(-z0.zeta_prime_0), det_line_norm(g0, h1));
    const double q1 = quillen_log_norm(std::exp(-z1.zeta_prime_0), det_line_norm(g1, h1));
    return 2 * (q1 - q0);
}

}  // namespace ct
