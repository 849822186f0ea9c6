// SPDX-License-Identifier: Apache-2.0
#include "ct/metrics_flattenings.hpp"

#include <cmath>

#include "ct/errors.hpp"
#include "ct/format.hpp"
#include "ct/quadrature.hpp"

namespace ct {

namespace {

class ConstProfile final : public RadialProfile {
public:
    explicit ConstProfile(double c) : c_(c) {}
    Jet jet(double) const override { return {c_, 0, 0}; }
    std::string expr() const override { return fmt17(c_); }

private:
    double c_;
};

class ExprProfile final : public RadialProfile {
public:
    explicit ExprProfile(ProfileExpr e) : e_(std::move(e)) {}
    Jet jet(double s) const override { return e_.jet_log(s); }
    std::string expr() const override { return e_.print(); }

private:
    ProfileExpr e_;
};

class FnProfile final : public RadialProfile {
public:
    FnProfile(std::function<Jet(double)> f, std::string text) : f_(std::move(f)), text_(std::move(text)) {}
    Jet jet(double s) const override { return f_(s); }
    std::string expr() const override { return text_; }

private:
    std::function<Jet(double)> f_;
    std::string text_;
};

Jet step(StepKind k, Jet x) { return compose(smooth_step_jet(k, x.v), x); }

Jet value_of(const ProfilePtr& p, double s) { return p ? p->jet(s) : Jet{}; }

}  // namespace

ProfilePtr const_profile(double c) { return std::make_shared<ConstProfile>(c); }
ProfilePtr expr_profile(const ProfileExpr& e) { return std::make_shared<ExprProfile>(e); }
ProfilePtr expr_profile(const std::string& src) { return expr_profile(ProfileExpr::parse(src)); }
ProfilePtr fn_profile(std::function<Jet(double)> f, std::string text) {
    return std::make_shared<FnProfile>(std::move(f), std::move(text));
}
ProfilePtr sum_profile(ProfilePtr a, ProfilePtr b, double cb) {
    std::string text;
    if (!a->expr().empty() && !b->expr().empty())
        text = "(" + a->expr() + ")+(" + fmt17(cb) + ")*(" + b->expr() + ")";
    return fn_profile([a, b, cb](double s) { return a->jet(s) + cb * b->jet(s); }, text);
}
ProfilePtr scaled_profile(ProfilePtr a, double c) {
    std::string text = a->expr().empty() ? "" : "(" + fmt17(c) + ")*(" + a->expr() + ")";
    return fn_profile([a, c](double s) { return c * a->jet(s); }, text);
}

Jet MetricDescriptor::log_rho(std::size_t chart, double s) const {
    Jet lam = value_of(charts.at(chart).log_conformal, s);
    if (reference == Reference::euclidean) return lam;
    Jet S = Jet::variable(s);
    return lam - S - log_abs(S);
}

MetricDescriptor poincare_metric(int charts, double radius) {
    MetricDescriptor g;
    for (int i = 0; i < charts; ++i) {
        MetricChart c;
        c.id = "cusp" + std::to_string(i + 1);
        c.radius = radius;
        c.log_conformal = const_profile(0);
        g.charts.push_back(c);
    }
    return g;
}

NormDescriptor poincare_norm(int charts) {
    NormDescriptor n;
    for (int i = 0; i < charts; ++i) n.charts.push_back({"cusp" + std::to_string(i + 1), expr_profile("w")});
    return n;
}

NormDescriptor induced_norm(const MetricDescriptor& g) {
    if (g.reference != Reference::poincare) throw UnsupportedError("induced_norm: needs a Poincare-referenced metric");
    NormDescriptor n;
    for (const auto& c : g.charts) {
        ProfilePtr lam = c.log_conformal;
        std::string text = lam && !lam->expr().empty() ? "w-(" + lam->expr() + ")" : "";
        n.charts.push_back({c.id, fn_profile(
                                      [lam](double s) {
                                          Jet S = Jet::variable(s);
                                          return log_abs(S) - value_of(lam, s);
                                      },
                                      text)});
    }
    return n;
}

MetricDescriptor pullback_linear_germ(const MetricDescriptor& g0, std::complex<double> a) {
    if (std::abs(a) == 0) throw DomainError("pullback_linear_germ: a must be nonzero");
    const double la = std::log(std::abs(a));
    MetricDescriptor g = g0;
    for (auto& c : g.charts) {
        ProfilePtr lam0 = c.log_conformal;
        if (g.reference == Reference::poincare) {
            c.log_conformal = fn_profile([lam0, la](double s) {
                Jet S = Jet::variable(s);
                Jet S0 = S + la;
                Jet l0 = value_of(lam0, s + la);
                return l0 + log_abs(S) - log_abs(S0);
            });
        } else {
            c.log_conformal = fn_profile([lam0, la](double s) { return value_of(lam0, s + la) + la; });
        }
        c.radius = c.radius / std::abs(a);
        c.h_prime_at_zero *= a;
        for (double& b : c.breakpoints_s) b -= la;
    }
    return g;
}

NormDescriptor pullback_linear_germ(const NormDescriptor& n0, std::complex<double> a) {
    if (std::abs(a) == 0) throw DomainError("pullback_linear_germ: a must be nonzero");
    const double la = std::log(std::abs(a));
    NormDescriptor n = n0;
    for (auto& c : n.charts) {
        ProfilePtr nu0 = c.log_norm;
        c.log_norm = fn_profile([nu0, la](double s) { return value_of(nu0, s + la); });
    }
    return n;
}

CutoffIntegrals cutoff_integrals() {
    auto P = [](double u) { return smooth_step_jet(StepKind::psi, u); };
    double e1 = 0, e2 = 0, e3 = 0, e4 = 0, e5 = 0, e6 = 0;
    const double tol = 1e-12;
    CutoffIntegrals c{};
    c.psi1 = integrate([&](double u) { return P(u).d1; }, 0.5, 1.0, tol, &e1);
    c.u_psi2 = integrate([&](double u) { return u * P(u).d2; }, 0.5, 1.0, tol, &e2);
    c.psi1_psi = integrate([&](double u) { Jet p = P(u); return p.d1 * p.v; }, 0.5, 1.0, tol, &e3);
    c.u_psi2_psi_plus_u_psi1sq = integrate(
        [&](double u) { Jet p = P(u); return u * p.d2 * p.v + u * p.d1 * p.d1; }, 0.5, 1.0, tol, &e4);
    c.u2_psi1_psi2_plus_u_psi1sq = integrate(
        [&](double u) { Jet p = P(u); return u * u * p.d1 * p.d2 + u * p.d1 * p.d1; }, 0.5, 1.0, tol, &e5);
    c.combined = integrate(
        [&](double u) {
            Jet p = P(u);
            return -p.d1 + p.d1 * p.v + u * p.d1 * p.d1 - u * p.d2 / 2 + u * p.d2 * p.v / 2 +
                   u * u * p.d1 * p.d2 / 2;
        },
        0.5, 1.0, tol, &e6);
    c.max_err = std::max({e1, e2, e3, e4, e5, e6});
    return c;
}

FlatteningFamily make_anomaly_family(double theta) {
    if (!(theta > 0 && theta <= std::exp(-3.0))) throw DomainError("anomaly flattening: theta must lie in (0, e^-3]");
    FlatteningFamily f;
    f.kind = FlatteningKind::anomaly;
    f.theta = theta;
    f.bands = {{0, theta, Regime::flat}, {theta, std::sqrt(theta), Regime::band}, {std::sqrt(theta), 1, Regime::poincare}};
    return f;
}

FlatteningFamily make_tight_family(double theta, int n, TightNormalization norm) {
    if (!(theta > 0 && theta <= 0.5)) throw DomainError("tight flattening: theta must lie in (0, 1/2]");
    if (n > 0) throw UnsupportedError("tight flattening: only n <= 0 is supported");
    FlatteningFamily f;
    f.kind = FlatteningKind::tight;
    f.theta = theta;
    f.n = n;
    f.normalization = norm;
    f.bands = {{0, std::pow(theta, 4), Regime::flat}, {std::pow(theta, 4), theta, Regime::band}, {theta, 1, Regime::poincare}};
    return f;
}

Regime anomaly_regime(double theta, double r) {
    if (r >= std::sqrt(theta)) return Regime::poincare;
    if (r <= theta) return Regime::flat;
    return Regime::band;
}

Flattened anomaly_flattening(double theta, double radius) {
    Flattened out;
    out.family = make_anomaly_family(theta);
    const double L = std::log(theta);
    const std::string ps = "psi(ln(r)/ln(" + fmt17(theta) + "))";
    MetricChart c;
    c.id = "cusp1";
    c.radius = radius;
    c.breakpoints_s = {L, L / 2};
    c.log_conformal = fn_profile(
        [L](double s) {
            Jet S = Jet::variable(s);
            Jet p = step(StepKind::psi, S * (1 / L));
            return (1.0 - p) * (S + log_abs(S));
        },
        "(1-" + ps + ")*(ln(r)+w)");
    out.metric.reference = Reference::poincare;
    out.metric.charts = {c};
    out.norm.charts = {{"cusp1", fn_profile(
                                     [L](double s) {
                                         Jet S = Jet::variable(s);
                                         return step(StepKind::psi, S * (1 / L)) * log_abs(S);
                                     },
                                     ps + "*w")}};
    return out;
}

Flattened tight_flattening(double theta, int n, TightNormalization norm, double radius) {
    Flattened out;
    out.family = make_tight_family(theta, n, norm);
    const double L = std::log(theta);
    const double L4 = std::abs(4 * L);
    const double cn = norm == TightNormalization::corrected ? std::pow(4.0, 2 * n) : 1.0;
    // half log of the flat core density
    const double K = 0.5 * (std::log(cn) - 8 * L - 2 * std::log(L4));
    const double dn = n;
    const std::string th = fmt17(theta);
    const std::string v = "(ln(r)/ln(" + th + "))";
    const std::string x = "chi(exp(2*ln(r)-8*ln(" + th + ")))";
    MetricChart c;
    c.id = "cusp1";
    c.radius = radius;
    c.breakpoints_s = {L, 1.25 * L, 1.75 * L, 2 * L, 4 * L + 0.5 * std::log(0.75), 4 * L + 0.5 * std::log(0.5)};
    c.log_conformal = fn_profile(
        [L, K, dn](double s) {
            Jet S = Jet::variable(s);
            Jet V = S * (1 / L);
            Jet lnv = log(V);
            Jet ph = step(StepKind::phi, V);
            Jet X = exp(2.0 * S - 8 * L);
            Jet ch = step(StepKind::chi, X);
            return ch * (dn * ((1.0 - ph) * lnv)) + (1.0 - ch) * (S + log_abs(S) + K);
        },
        x + "*" + fmt17(dn) + "*(1-phi_step" + v + ")*ln" + v + "+(1-" + x + ")*(ln(r)+w+" + fmt17(K) + ")");
    out.metric.reference = Reference::poincare;
    out.metric.charts = {c};
    const double lnL = std::log(std::abs(L));
    out.norm.charts = {{"cusp1", fn_profile(
                                     [L, lnL](double s) {
                                         Jet S = Jet::variable(s);
                                         Jet V = S * (1 / L);
                                         return step(StepKind::phi, V) * log(V) + lnL;
                                     },
                                     fmt17(lnL) + "+phi_step" + v + "*ln" + v)}};
    return out;
}

Flattened flatten(const FlatteningFamily& f, double radius) {
    if (f.kind == FlatteningKind::anomaly) return anomaly_flattening(f.theta, radius);
    return tight_flattening(f.theta, f.n, f.normalization, radius);
}

SandwichReport tight_sandwich_check(double theta, int n, std::size_t samples, TightNormalization norm) {
    Flattened f = tight_flattening(theta, n, norm);
    Flattened sm = tight_flattening(std::exp(-1.5), n, TightNormalization::corrected);
    SandwichReport rep;
    const double L = std::log(theta);
    const double s_hi = std::log(0.5);
    const double s_lo = 12 * L;
    for (std::size_t k = 0; k < samples; ++k) {
        double s;
        if (k % 2 == 0) {
            s = s_lo + (s_hi - s_lo) * (k + 0.5) / samples;
        } else {
            // deep samples, uniform in w
            double w0 = std::log(-s_lo), w1 = w0 + 6;
            s = -std::exp(w0 + (w1 - w0) * (k + 0.5) / samples);
        }
        const double lnP = std::log(std::abs(s));
        double lf = f.metric.charts[0].log_conformal->value(s);
        double nf = f.norm.charts[0].log_norm->value(s);
        double ls = sm.metric.charts[0].log_conformal->value(s);
        double ns = sm.norm.charts[0].log_norm->value(s);
        double prod_f = 2 * lf + 2 * n * nf;
        double prod = 2 * n * lnP;
        double prod_s = 2 * ls + 2 * n * ns;
        rep.worst_upper = std::max(rep.worst_upper, prod_f - prod);
        rep.worst_lower = std::max(rep.worst_lower, prod_s - prod_f);
        rep.worst_norm_upper = std::max(rep.worst_norm_upper, nf - lnP);
        rep.worst_norm_lower = std::max(rep.worst_norm_lower, ns - nf);
        ++rep.samples;
    }
    const double tol = 1e-12;
    rep.upper_ok = rep.worst_upper <= tol && rep.worst_norm_upper <= tol;
    rep.lower_ok = rep.worst_lower <= tol && rep.worst_norm_lower <= tol;
    return rep;
}

double wolpert_log_ratio(const std::vector<std::complex<double>>& h_primes) {
    double s = 0;
    for (auto h : h_primes) {
        if (std::abs(h) == 0) throw DomainError("wolpert_log_ratio: h'(0) must be nonzero");
        s += std::log(std::abs(h));
    }
    return s;
}

CompatReport check_compatibility(const Flattened& a, const Flattened& b, std::size_t samples) {
    if (a.family.kind != b.family.kind) throw DomainError("check_compatibility: families of different kinds");
    double r_lo = 1, r_hi = 0;
    for (const auto* f : {&a.family, &b.family})
        for (const auto& band : f->bands)
            if (band.regime == Regime::band) {
                r_lo = std::min(r_lo, band.r_inner);
                r_hi = std::max(r_hi, band.r_outer);
            }
    CompatReport rep;
    const double s_lo = std::log(r_lo), s_hi = std::log(r_hi);
    for (std::size_t k = 0; k < samples; ++k) {
        double s = s_lo + (s_hi - s_lo) * (k + 0.5) / samples;
        for (std::size_t c = 0; c < std::min(a.metric.charts.size(), b.metric.charts.size()); ++c) {
            double dl = std::abs(a.metric.charts[c].log_conformal->value(s) - b.metric.charts[c].log_conformal->value(s));
            double dn = std::abs(a.norm.charts[c].log_norm->value(s) - b.norm.charts[c].log_norm->value(s));
            double d = std::max(dl, dn);
            if (d > rep.max_deviation) {
                rep.max_deviation = d;
                rep.at_radius = std::exp(s);
            }
        }
    }
    rep.compatible = rep.max_deviation < 1e-10;
    return rep;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::poincare: return "poincare";
        case Regime::band: return "band";
        case Regime::flat: return "flat";
    }
    return "?";
}

nlohmann::json to_json(const MetricDescriptor& g, const NormDescriptor& nrm) {
    nlohmann::json j;
    j["reference"] = g.reference == Reference::poincare ? "poincare" : "euclidean";
    j["interior_volume"] = g.interior_volume;
    nlohmann::json charts = nlohmann::json::array();
    for (std::size_t i = 0; i < g.charts.size(); ++i) {
        const auto& c = g.charts[i];
        nlohmann::json cj;
        cj["id"] = c.id;
        if (std::isfinite(c.radius))
            cj["radius"] = c.radius;
        else
            cj["radius"] = nullptr;
        std::string lc = c.log_conformal ? c.log_conformal->expr() : "0";
        if (lc.empty()) throw CapabilityError("to_json: chart profile has no expression form");
        cj["log_conformal"] = lc;
        if (i < nrm.charts.size()) {
            std::string ln = nrm.charts[i].log_norm ? nrm.charts[i].log_norm->expr() : "";
            if (ln.empty()) throw CapabilityError("to_json: norm profile has no expression form");
            cj["log_norm"] = ln;
        }
        cj["h_prime_at_zero"] = {c.h_prime_at_zero.real(), c.h_prime_at_zero.imag()};
        cj["breakpoints_s"] = c.breakpoints_s;
        charts.push_back(cj);
    }
    j["charts"] = charts;
    return j;
}

void from_json(const nlohmann::json& j, MetricDescriptor& g, NormDescriptor& nrm) {
    g = MetricDescriptor{};
    nrm = NormDescriptor{};
    std::string ref = j.value("reference", "poincare");
    if (ref == "poincare")
        g.reference = Reference::poincare;
    else if (ref == "euclidean")
        g.reference = Reference::euclidean;
    else
        throw DomainError("descriptor: unknown reference '" + ref + "'");
    g.interior_volume = j.value("interior_volume", 0.0);
    for (const auto& cj : j.at("charts")) {
        MetricChart c;
        c.id = cj.value("id", "cusp" + std::to_string(g.charts.size() + 1));
        c.radius = (cj.contains("radius") && !cj["radius"].is_null()) ? cj["radius"].get<double>()
                                                                      : std::numeric_limits<double>::infinity();
        c.log_conformal = expr_profile(cj.value("log_conformal", std::string("0")));
        if (cj.contains("h_prime_at_zero")) {
            auto h = cj["h_prime_at_zero"];
            c.h_prime_at_zero = {h.at(0).get<double>(), h.at(1).get<double>()};
        }
        if (cj.contains("breakpoints_s")) c.breakpoints_s = cj["breakpoints_s"].get<std::vector<double>>();
        g.charts.push_back(c);
        nrm.charts.push_back({c.id, expr_profile(cj.value("log_norm", std::string("w")))});
    }
}

nlohmann::json to_json(const FlatteningFamily& f) {
    nlohmann::json j;
    j["kind"] = f.kind == FlatteningKind::anomaly ? "anomaly" : "tight";
    j["theta"] = f.theta;
    j["n"] = f.n;
    if (f.kind == FlatteningKind::tight)
        j["normalization"] = f.normalization == TightNormalization::corrected ? "corrected" : "literal";
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& b : f.bands) bands.push_back({{"r_inner", b.r_inner}, {"r_outer", b.r_outer}, {"regime", regime_name(b.regime)}});
    j["bands"] = bands;
    return j;
}

FlatteningFamily family_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    double theta = j.at("theta").get<double>();
    if (kind == "anomaly") return make_anomaly_family(theta);
    if (kind == "tight") {
        TightNormalization nm = j.value("normalization", std::string("corrected")) == "literal"
                                    ? TightNormalization::literal
                                    : TightNormalization::corrected;
        return make_tight_family(theta, j.value("n", 0), nm);
    }
    throw DomainError("flattening: unknown kind '" + kind + "'");
}

}  // namespace ct
