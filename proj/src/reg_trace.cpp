// SPDX-License-Identifier: Apache-2.0
// Heat-data providers, regularized traces and trace curves.
#include "ct/reg_trace.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "ct/errors.hpp"
#include "ct/heat_kernel.hpp"
#include "ct/hyp_geometry.hpp"
#include "ct/quadrature.hpp"

namespace ct {

namespace {

constexpr double kPi = std::numbers::pi;
const double kDefaultEta0 = std::exp(-4.0);

void check_eta(double eta) {
    if (!(eta > 0 && eta < 1)) throw DomainError("cusp radius must lie in (0, 1)");
}

double model_diag(double t, double y) {
    const double eps = std::max(1e-300, 1e-14 * exact_kernel_H_n0(t, 0.0));
    return cusp_diagonal_height(t, y, eps).value;
}

double eigen_sum(const std::vector<double>& ev, double t) {
    KahanSum s;
    for (double l : ev) {
        const double x = l * t;
        if (x > 745) break;
        s.add(std::exp(-x));
    }
    return s.value();
}

// Adds the model collar {eta < |u| < eta0} of every cusp (signed) to a base trace.
std::function<double(double, double)> with_collars(std::function<double(double)> base, int m, int rank, double eta0,
                                                    std::function<double(double, int, double)> dev) {
    return [=](double t, double eta) {
        check_eta(eta);
        double v = base(t);
        if (m == 0 || eta == eta0) return v;
        const double model = cusp_radial_integral([&](double y) { return model_diag(t, y); }, eta, eta0);
        v += m * rank * model;
        if (dev) {
            for (int i = 0; i < m; ++i)
                v += cusp_radial_integral([&](double y) { return dev(t, i, y); }, eta, eta0);
        }
        return v;
    };
}

int count_zero(const std::vector<double>& ev) {
    return static_cast<int>(std::count_if(ev.begin(), ev.end(), [](double l) { return std::abs(l) < 1e-12; }));
}

double min_positive(const std::vector<double>& ev) {
    double mu = std::numeric_limits<double>::infinity();
    for (double l : ev)
        if (l >= 1e-12) mu = std::min(mu, l);
    return mu;
}

// Lattice theta sum sum_{j,k} exp(-a Q(j, k)) for the Gram matrix (g11, g12, g22).
double lattice_theta(double a, double g11, double g12, double g22) {
    const double tr = g11 + g22, det = g11 * g22 - g12 * g12;
    const double lmin = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det)));
    const long N = static_cast<long>(std::ceil(std::sqrt(50.0 / (a * lmin)))) + 1;
    KahanSum s;
    for (long j = -N; j <= N; ++j)
        for (long k = -N; k <= N; ++k) {
            const double q = g11 * j * j + 2 * g12 * j * k + g22 * k * k;
            const double x = a * q;
            if (x < 745) s.add(std::exp(-x));
        }
    return s.value();
}

}  // namespace

// ---------------------------------------------------------------- providers

HeatDataProvider spectral_provider(std::vector<double> eigenvalues, double volume, std::optional<LocalCoeffs> local, int n) {
    for (double l : eigenvalues)
        if (!(l > -1e-12) || !std::isfinite(l)) throw DomainError("spectral_provider: eigenvalues must be nonnegative");
    if (!(volume > 0)) throw DomainError("spectral_provider: volume must be positive");
    std::sort(eigenvalues.begin(), eigenvalues.end());
    HeatDataProvider p;
    p.kind = "spectral";
    p.n = n;
    p.volume = volume;
    p.local = local;
    p.dim_H0 = count_zero(eigenvalues);
    p.mu = min_positive(eigenvalues);
    p.eta0 = kDefaultEta0;
    p.eigenvalues = eigenvalues;
    auto ev = std::make_shared<const std::vector<double>>(std::move(eigenvalues));
    p.core_trace = [ev](double t, double) { return eigen_sum(*ev, t); };
    return p;
}

HeatDataProvider flat_torus_provider(std::complex<double> tau, double c) {
    const double a = tau.real(), b = tau.imag();
    if (!(b > 0)) throw DomainError("flat_torus_provider: Im tau must be positive");
    HeatDataProvider p;
    p.kind = "flat_torus";
    p.tau = tau;
    p.scale = c;
    p.volume = std::exp(2 * c);
    p.dim_H0 = 1;
    p.local = LocalCoeffs{1 / (2 * kPi), 0.0};
    p.eta0 = kDefaultEta0;
    // Unit-covolume lattice v1 = (1, 0)/sqrt b, v2 = (a, b)/sqrt b and its dual.
    const double v11 = 1 / b, v12 = a / b, v22 = (a * a + b * b) / b;
    const double w11 = b + a * a / b, w12 = -a / b, w22 = 1 / b;
    const double e2c = std::exp(2 * c);
    {
        const double tr = w11 + w22, det = w11 * w22 - w12 * w12;
        p.mu = 2 * kPi * kPi / e2c * 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4 * det)));
        // Exact minimum over small lattice vectors.
        double best = std::numeric_limits<double>::infinity();
        for (int j = -4; j <= 4; ++j)
            for (int k = -4; k <= 4; ++k)
                if (j || k) best = std::min(best, w11 * j * j + 2 * w12 * j * k + w22 * k * k);
        p.mu = 2 * kPi * kPi / e2c * best;
    }
    p.core_trace = [=](double t, double) {
        const double alpha = 2 * kPi * kPi * t / e2c;  // direct sum over the dual lattice
        const double beta = e2c / (2 * t);              // Poisson-dual sum
        if (alpha >= beta) return lattice_theta(alpha, w11, w12, w22);
        return e2c / (2 * kPi * t) * lattice_theta(beta, v11, v12, v22);
    };
    return p;
}

HeatDataProvider round_sphere_provider(double c) {
    HeatDataProvider p;
    p.kind = "round_sphere";
    p.scale = c;
    const double K = std::exp(-2 * c);
    p.volume = 4 * kPi / K;
    p.dim_H0 = 1;
    p.mu = K;
    p.local = LocalCoeffs{1 / (2 * kPi), K / (12 * kPi)};
    p.eta0 = kDefaultEta0;
    p.core_trace = [K](double t, double) {
        KahanSum s;
        for (long l = 0;; ++l) {
            const double x = 0.5 * K * l * (l + 1) * t;
            if (x > 50 && l > 0) break;
            s.add((2 * l + 1) * std::exp(-x));
        }
        return s.value();
    };
    return p;
}

HeatDataProvider hyperbolic_model_provider(int m, double volume, int rank, int dim_H0, std::vector<double> extra,
                                           std::optional<CuspPerturbation> perturbation) {
    if (m < 0) throw DomainError("hyperbolic_model_provider: m must be nonnegative");
    if (rank < 1) throw DomainError("hyperbolic_model_provider: rank must be positive");
    if (!(volume > 0)) throw DomainError("hyperbolic_model_provider: volume must be positive");
    HeatDataProvider p;
    p.kind = "hyperbolic_model";
    p.m = m;
    p.rank = rank;
    p.dim_H0 = dim_H0;
    p.volume = volume;
    p.eta0 = kDefaultEta0;
    std::sort(extra.begin(), extra.end());
    // Bottom of the continuous spectrum of Box on the half-plane is 1/8.
    p.mu = std::min(0.125, min_positive(extra));
    // The point spectrum dim_H0 + extras enters the t -> 0 constant term.
    const auto a = diagonal_small_time(CuspPoint{0.5, 0.0}, 0, 0);
    p.local = LocalCoeffs{a[0], a[1] + (dim_H0 + static_cast<double>(extra.size())) / (rank * volume)};
    const double v_core = volume - m * cusp_volume(p.eta0);
    auto ev = std::make_shared<const std::vector<double>>(extra);
    auto base = [=](double t) { return rank * v_core * exact_kernel_H_n0(t, 0.0) + dim_H0 + eigen_sum(*ev, t); };
    if (perturbation && perturbation->delta) {
        auto d = perturbation->delta;
        p.cusp_deviation = [d](double t, int, double y) { return d(t, y); };
    }
    p.core_trace = with_collars(base, m, rank, p.eta0, p.cusp_deviation);
    p.eigenvalues = extra;
    return p;
}

HeatDataProvider reference_P(int n) {
    if (n > 0) throw DomainError("reference_P: twist must be nonpositive");
    HeatDataProvider p = hyperbolic_model_provider(3, 2 * kPi, 1, n == 0 ? 1 : 0);
    p.kind = "reference_P";
    p.n = n;
    if (n != 0) {
        const auto a = diagonal_small_time(CuspPoint{0.5, 0.0}, n, 0);
        p.local = LocalCoeffs{a[0], a[1] + p.dim_H0 / p.volume};
        p.core_trace = [n](double, double) -> double {
            throw UnsupportedError("reference_P: trace data for n = " + std::to_string(n) + " needs an exact twisted kernel");
        };
    }
    return p;
}

HeatDataProvider triplicate(const HeatDataProvider& p) {
    HeatDataProvider q = p;
    q.kind = "triplicate(" + p.kind + ")";
    q.m = 3 * p.m;
    q.volume = 3 * p.volume;
    q.dim_H0 = 3 * p.dim_H0;
    auto core = p.core_trace;
    q.core_trace = [core](double t, double eta) { return 3 * core(t, eta); };
    if (p.cusp_deviation) {
        auto dev = p.cusp_deviation;
        const int mp = p.m;
        q.cusp_deviation = [dev, mp](double t, int i, double y) { return dev(t, i % mp, y); };
    }
    q.eigenvalues.clear();
    for (int k = 0; k < 3; ++k) q.eigenvalues.insert(q.eigenvalues.end(), p.eigenvalues.begin(), p.eigenvalues.end());
    std::sort(q.eigenvalues.begin(), q.eigenvalues.end());
    if (!p.core_samples.empty()) {
        q.core_samples = p.core_samples;
        for (auto& s : q.core_samples) s.second *= 3;
    }
    return q;
}

HeatDataProvider provider_from_json(const nlohmann::json& j) {
    const std::string kind = j.value("kind", std::string());
    if (kind == "flat_torus") {
        const auto& tau = j.at("tau");
        return flat_torus_provider({tau.at(0).get<double>(), tau.at(1).get<double>()}, j.value("scale", 0.0));
    }
    if (kind == "round_sphere") return round_sphere_provider(j.value("scale", 0.0));
    HeatDataProvider p;
    p.kind = kind.empty() ? "json" : kind;
    p.m = j.value("m", 0);
    p.n = j.value("n", 0);
    p.rank = j.value("rank_xi", 1);
    p.dim_H0 = j.value("dim_H0", 0);
    p.volume = j.at("volume").get<double>();
    p.eta0 = j.value("eta0", kDefaultEta0);
    if (p.m < 0 || p.n > 0 || p.rank < 1 || p.dim_H0 < 0 || !(p.volume > 0))
        throw DomainError("provider_from_json: invalid m, n, rank_xi, dim_H0 or volume");
    if (j.contains("a_minus1") && j.contains("a_0"))
        p.local = LocalCoeffs{j.at("a_minus1").get<double>(), j.at("a_0").get<double>()};
    std::function<double(double)> base;
    if (j.contains("eigenvalues")) {
        p.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        std::sort(p.eigenvalues.begin(), p.eigenvalues.end());
        if (!p.eigenvalues.empty() && p.eigenvalues.front() < -1e-12)
            throw DomainError("provider_from_json: negative eigenvalue");
        auto ev = std::make_shared<const std::vector<double>>(p.eigenvalues);
        base = [ev](double t) { return eigen_sum(*ev, t); };
        if (!j.contains("mu")) p.mu = min_positive(p.eigenvalues);
    } else if (j.contains("core_trace_samples")) {
        for (const auto& s : j.at("core_trace_samples")) p.core_samples.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
        std::sort(p.core_samples.begin(), p.core_samples.end());
        if (p.core_samples.size() < 4) throw DomainError("provider_from_json: need at least 4 core_trace_samples");
        std::vector<double> x, y;
        for (const auto& [t, v] : p.core_samples) {
            if (!(t > 0)) throw DomainError("provider_from_json: sample times must be positive");
            if (!x.empty() && std::log(t) <= x.back()) throw DomainError("provider_from_json: duplicate sample time");
            x.push_back(std::log(t));
            y.push_back(v);
        }
        const double lo = x.front(), hi = x.back();
        auto spline = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(x), std::move(y));
        base = [spline, lo, hi](double t) {
            const double lt = std::log(t);
            if (lt < lo - 1e-12 || lt > hi + 1e-12)
                throw RangeError("provider: t = " + std::to_string(t) + " outside the sampled core trace");
            return (*spline)(std::clamp(lt, lo, hi));
        };
    } else {
        throw CapabilityError("provider_from_json: need eigenvalues or core_trace_samples");
    }
    if (j.contains("mu")) p.mu = j.at("mu").get<double>();
    if (!(p.mu > 0)) throw DomainError("provider_from_json: gap mu must be positive");
    p.core_trace = with_collars(base, p.m, p.rank, p.eta0, nullptr);
    return p;
}

nlohmann::json provider_to_json(const HeatDataProvider& p) {
    nlohmann::json j;
    j["kind"] = p.kind;
    if (p.kind == "flat_torus") {
        j["tau"] = {p.tau.real(), p.tau.imag()};
        j["scale"] = p.scale;
        return j;
    }
    if (p.kind == "round_sphere") {
        j["scale"] = p.scale;
        return j;
    }
    if (p.cusp_deviation) throw CapabilityError("provider_to_json: cusp deviation is not serializable");
    j["m"] = p.m;
    j["n"] = p.n;
    j["rank_xi"] = p.rank;
    j["dim_H0"] = p.dim_H0;
    j["mu"] = p.mu;
    j["volume"] = p.volume;
    j["eta0"] = p.eta0;
    if (p.local) {
        j["a_minus1"] = p.local->a_minus1;
        j["a_0"] = p.local->a_0;
    }
    if (!p.core_samples.empty()) {
        nlohmann::json s = nlohmann::json::array();
        for (const auto& [t, v] : p.core_samples) s.push_back({t, v});
        j["core_trace_samples"] = s;
    } else if (p.kind == "spectral" || p.kind == "json") {
        j["eigenvalues"] = p.eigenvalues;
    } else {
        throw CapabilityError("provider_to_json: provider '" + p.kind + "' has no serializable trace data");
    }
    return j;
}

// ---------------------------------------------------------------- integrals and traces

double cusp_diagonal(const HeatDataProvider& p, double t, int chart, double y) {
    if (chart < 0 || chart >= p.m) throw DomainError("cusp_diagonal: chart index out of range");
    if (p.n != 0) throw UnsupportedError("cusp_diagonal: the model cusp kernel is exact only for n = 0");
    double v = p.rank * model_diag(t, y);
    if (p.cusp_deviation) v += p.cusp_deviation(t, chart, y);
    return v;
}

double cusp_radial_integral(const std::function<double(double y)>& f, double eta_a, double eta_b, double tol) {
    if (eta_a == eta_b) return 0.0;
    if (eta_a > eta_b) return -cusp_radial_integral(f, eta_b, eta_a, tol);
    check_eta(eta_b);
    // dv = dx dy / (r^2 ln^2 r) = 2 pi e^{-w} dw dtheta / (2 pi) with y = e^w.
    auto g = [&](double w) {
        const double y = std::exp(w);
        return 2 * kPi * f(y) * std::exp(-w);
    };
    const double wb = std::log(-std::log(eta_b));
    double err = 0, v;
    if (eta_a == 0) {
        v = integrate_to_inf(g, wb, tol, &err);
    } else {
        check_eta(eta_a);
        const double wa = std::log(-std::log(eta_a));
        v = integrate(g, wb, wa, tol, &err, 12u);
    }
    if (!std::isfinite(v) || err > 1e3 * tol * std::max(1.0, std::abs(v)))
        throw ToleranceError("cusp_radial_integral: achieved residual " + std::to_string(err));
    return v;
}

double regularized_trace(const HeatDataProvider& M, const HeatDataProvider& P, double t, double eta, bool perp) {
    if (!(t > 0)) throw DomainError("regularized_trace: t must be positive");
    check_eta(eta);
    if (!M.core_trace) throw CapabilityError("regularized_trace: provider has no core trace");
    double v = M.core_trace(t, eta);
    double w = 0;
    if (M.m > 0) {
        if (M.n != P.n) throw DomainError("regularized_trace: providers must share the twist n");
        if (P.m != 3) throw DomainError("regularized_trace: reference model must have 3 cusps");
        if (!P.core_trace) throw CapabilityError("regularized_trace: reference provider has no core trace");
        w = M.m * M.rank / 3.0;
        v -= w * P.core_trace(t, eta);
        // Model parts cancel identically; only the deviations enter.
        for (int i = 0; i < M.m; ++i) {
            if (!M.cusp_deviation && !P.cusp_deviation) break;
            auto f = [&](double y) {
                double d = 0;
                if (M.cusp_deviation) d += M.cusp_deviation(t, i, y);
                if (P.cusp_deviation) d -= M.rank * P.cusp_deviation(t, 0, y);
                return d;
            };
            v += cusp_radial_integral(f, 0.0, eta);
        }
    }
    if (perp) v -= M.dim_H0 - w * P.dim_H0;
    return v;
}

SmallTimeCoeffs small_time_coeffs(const HeatDataProvider& M, const HeatDataProvider& P, bool perp) {
    if (!M.local) throw CapabilityError("small_time_coeffs: provider '" + M.kind + "' has no local coefficients a_j");
    SmallTimeCoeffs c;
    c.A_minus1 = M.rank * M.local->a_minus1 * M.volume;
    c.A_0 = M.rank * M.local->a_0 * M.volume;
    double w = 0;
    if (M.m > 0) {
        if (!P.local) throw CapabilityError("small_time_coeffs: reference provider has no local coefficients a_j");
        w = M.m * M.rank / 3.0;
        c.A_minus1 -= w * P.local->a_minus1 * P.volume;
        c.A_0 -= w * P.local->a_0 * P.volume;
    }
    if (perp) c.A_0 -= M.dim_H0 - w * P.dim_H0;
    return c;
}

SmallTimeCoeffs small_time_coeffs(const HeatDataProvider& M, bool perp) {
    if (M.m == 0) return small_time_coeffs(M, M, perp);
    return small_time_coeffs(M, reference_P(M.n), perp);
}

// ---------------------------------------------------------------- curves

MellinGrid mellin_grid(double t_min, double t_max, double panel) {
    if (!(t_min > 0 && t_min < 1 && t_max > 1 && panel > 0)) throw DomainError("mellin_grid: need 0 < t_min < 1 < t_max");
    static const auto gl = gauss_legendre<double, 10>();
    MellinGrid g;
    g.t_min = t_min;
    g.t_max = t_max;
    auto add = [&](double a, double b) {
        const int np = static_cast<int>(std::ceil((b - a) / panel));
        const double h = (b - a) / np;
        for (int p = 0; p < np; ++p)
            for (std::size_t q = 0; q < gl.x.size(); ++q) {
                const double x = a + h * (p + 0.5 * (gl.x[q] + 1));
                g.t.push_back(std::exp(x));
                g.log_weights.push_back(0.5 * h * gl.w[q]);
            }
    };
    add(std::log(t_min), 0.0);
    add(0.0, std::log(t_max));
    // Nodes within a panel come in symmetric order; sort by t with weights.
    std::vector<std::size_t> idx(g.t.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return g.t[a] < g.t[b]; });
    MellinGrid s = g;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        s.t[i] = g.t[idx[i]];
        s.log_weights[i] = g.log_weights[idx[i]];
    }
    return s;
}

TailModel fit_tail(const std::vector<double>& t, const std::vector<double>& v, double mu) {
    // Values below this are treated as rounding noise of the regularized combination.
    constexpr double kNoise = 1e-13;
    TailModel tm;
    tm.mu = mu;
    double t_last = 0;
    bool late = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < 1.0) continue;
        late = true;
        tm.C = std::max(tm.C, std::abs(v[i]) * std::exp(mu * t[i]));
        if (std::abs(v[i]) > kNoise) t_last = t[i];
    }
    if (!late) {
        tm.reason = "no samples beyond t = 1";
        return tm;
    }
    if (t_last == 0) {
        tm.ok = true;
        tm.fitted_rate = std::numeric_limits<double>::infinity();
        return tm;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < std::max(1.0, t_last / 10) || t[i] > t_last || std::abs(v[i]) <= kNoise) continue;
        const double ly = std::log(std::abs(v[i]));
        sx += t[i];
        sy += ly;
        sxx += t[i] * t[i];
        sxy += t[i] * ly;
        ++k;
    }
    if (k < 3) {
        tm.reason = "fewer than 3 samples above rounding in the last decade beyond t = 1";
        return tm;
    }
    tm.fitted_rate = -(k * sxy - sx * sy) / (k * sxx - sx * sx);
    tm.ok = tm.fitted_rate >= mu * (1 - 1e-2);
    if (!tm.ok)
        tm.reason = "fitted decay rate " + std::to_string(tm.fitted_rate) + " below the declared gap " + std::to_string(mu);
    return tm;
}

TraceCurve trace_curve(const HeatDataProvider& M, const HeatDataProvider& P, const std::vector<double>& t_grid, double eta,
                       Exec ex) {
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0)) throw DomainError("trace_curve: t must be positive");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw DomainError("trace_curve: t grid must be strictly increasing");
    }
    TraceCurve c;
    c.t = t_grid;
    c.value = parallel_map(ex, t_grid.size(), [&](std::size_t i) { return regularized_trace(M, P, t_grid[i], eta, true); });
    try {
        const SmallTimeCoeffs a = small_time_coeffs(M, P, true);
        c.a_minus1 = a.A_minus1;
        c.a_0 = a.A_0;
        c.has_coeffs = true;
    } catch (const CapabilityError&) {
        c.has_coeffs = false;
    }
    const double mu = M.m > 0 ? std::min(M.mu, P.mu) : M.mu;
    c.tail = fit_tail(c.t, c.value, mu);
    return c;
}

TraceCurve mellin_trace_curve(const HeatDataProvider& M, const HeatDataProvider& P, double t_min, Exec ex) {
    const double mu = M.m > 0 ? std::min(M.mu, P.mu) : M.mu;
    if (!(mu > 0)) throw CapabilityError("mellin_trace_curve: provider declares no spectral gap");
    const double t_max = std::clamp(30.0 / mu, 10.0, 1e4);
    const MellinGrid g = mellin_grid(t_min, t_max);
    TraceCurve c = trace_curve(M, P, g.t, 0.05, ex);
    c.log_weights = g.log_weights;
    c.t_min = g.t_min;
    c.t_max = g.t_max;
    return c;
}

// ---------------------------------------------------------------- cusp estimates

GaussianCuspBound gaussian_cusp_bound(double eps_radius, double c_prime, double t) {
    if (!(eps_radius > 0 && eps_radius < 1)) throw DomainError("gaussian_cusp_bound: eps must lie in (0, 1)");
    if (!(c_prime > 0 && t > 0)) throw DomainError("gaussian_cusp_bound: c' and t must be positive");
    // In L = |ln r|: i du dubar / (|u|^2 |ln|u||) = 4 pi dL / L after the angular integral.
    const double L0 = -std::log(eps_radius);
    auto f = [&](double L) {
        const double w = std::log(L);
        return 4 * kPi * std::exp(-c_prime * w * w / t) / L;
    };
    GaussianCuspBound b;
    double err = 0;
    b.integral = integrate_to_inf(f, L0, 1e-12, &err);
    const double w0 = std::log(L0);
    b.C = 2 * kPi * std::sqrt(kPi / c_prime);
    b.bound = b.C * std::sqrt(t) * std::exp(-0.5 * c_prime * w0 * w0 / t);
    b.holds = b.integral <= b.bound * (1 + 1e-12);
    return b;
}

double cusp_weight_integral(double eps_radius, double varsigma) {
    if (!(eps_radius > 0 && eps_radius < 1)) throw DomainError("cusp_weight_integral: eps must lie in (0, 1)");
    if (!(varsigma < 1)) throw FinitenessError("cusp_weight_integral: diverges for varsigma >= 1");
    const double L0 = -std::log(eps_radius);
    auto f = [&](double L) { return 4 * kPi * std::pow(L, varsigma - 2); };
    double err = 0;
    const double v = integrate_to_inf(f, L0, 1e-12, &err);
    if (!std::isfinite(v)) throw FinitenessError("cusp_weight_integral: quadrature diverged");
    return v;
}

}  // namespace ct
