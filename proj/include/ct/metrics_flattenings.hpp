// SPDX-License-Identifier: Apache-2.0
// Metric and norm descriptors on cusp charts, flattening families, Wolpert norms.
#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ct/jet.hpp"
#include "ct/profile_dsl.hpp"
#include "ct/smooth_step.hpp"

#include "json.hpp"

namespace ct {

// Radial function of s = ln r with its s-jet.
class RadialProfile {
public:
    virtual ~RadialProfile() = default;
    virtual Jet jet(double s) const = 0;
    double value(double s) const { return jet(s).v; }
    // DSL text, empty if none.
    virtual std::string expr() const { return {}; }
};
using ProfilePtr = std::shared_ptr<const RadialProfile>;

ProfilePtr const_profile(double c);
ProfilePtr expr_profile(const ProfileExpr& e);
ProfilePtr expr_profile(const std::string& src);
ProfilePtr fn_profile(std::function<Jet(double)> f, std::string text = {});
ProfilePtr sum_profile(ProfilePtr a, ProfilePtr b, double cb = 1.0);
ProfilePtr scaled_profile(ProfilePtr a, double c);

// Metric = exp(2 lambda) * reference in the chart.
//   poincare:  |dz|^2 / (|z| ln|z|)^2
//   euclidean: |dz|^2
enum class Reference { poincare, euclidean };

struct MetricChart {
    std::string id = "cusp";
    double radius = 0.5;  // may be +inf for a chart covering the plane
    ProfilePtr log_conformal;
    std::complex<double> h_prime_at_zero{1.0, 0.0};
    std::vector<double> breakpoints_s;  // s-values where profiles change regime
};

struct MetricDescriptor {
    Reference reference = Reference::poincare;
    std::vector<MetricChart> charts;
    double interior_volume = 0;

    // ln rho with metric rho^2 |dz|^2, as an s-jet.
    Jet log_rho(std::size_t chart, double s) const;
};

struct NormChart {
    std::string id = "cusp";
    ProfilePtr log_norm;  // ln || dz (x) s_D / z ||
};

struct NormDescriptor {
    std::vector<NormChart> charts;
};

// Exact cusp data: lambda = 0, log_norm = ln|ln r|.
MetricDescriptor poincare_metric(int charts = 1, double radius = 0.5);
NormDescriptor poincare_norm(int charts = 1);
// Norm on omega(D) induced by the metric: ln|ln r| - lambda.
NormDescriptor induced_norm(const MetricDescriptor& g);

// Re-express chart data given in the coordinate z0 = a z in the coordinate z.
MetricDescriptor pullback_linear_germ(const MetricDescriptor& g0, std::complex<double> a);
NormDescriptor pullback_linear_germ(const NormDescriptor& n0, std::complex<double> a);

struct CutoffIntegrals {
    double psi1, u_psi2, psi1_psi, u_psi2_psi_plus_u_psi1sq, u2_psi1_psi2_plus_u_psi1sq;
    double combined;  // the lemma combination, equal to 1/4
    double max_err;
};
CutoffIntegrals cutoff_integrals();

enum class FlatteningKind { anomaly, tight };
enum class TightNormalization { corrected, literal };
enum class Regime { poincare, band, flat };

struct Band {
    double r_inner, r_outer;
    Regime regime;
};

struct FlatteningFamily {
    FlatteningKind kind = FlatteningKind::anomaly;
    double theta = 1e-3;
    int n = 0;
    TightNormalization normalization = TightNormalization::corrected;
    std::vector<Band> bands;
};

FlatteningFamily make_anomaly_family(double theta);
FlatteningFamily make_tight_family(double theta, int n, TightNormalization norm = TightNormalization::corrected);

struct Flattened {
    MetricDescriptor metric;
    NormDescriptor norm;
    FlatteningFamily family;
};

Flattened anomaly_flattening(double theta, double radius = 0.5);
Flattened tight_flattening(double theta, int n, TightNormalization norm = TightNormalization::corrected,
                           double radius = 0.5);
Flattened flatten(const FlatteningFamily& f, double radius = 0.5);

// Anomaly family regime at radius r.
Regime anomaly_regime(double theta, double r);

struct SandwichReport {
    bool upper_ok = true;  // g_f (x) ||.||_f^{2n} <= g (x) ||.||^{2n} and ||.||_f <= ||.||
    bool lower_ok = true;  // same with the smaller reference family
    double worst_upper = -std::numeric_limits<double>::infinity();  // max of log(lhs / rhs)
    double worst_lower = -std::numeric_limits<double>::infinity();
    double worst_norm_upper = -std::numeric_limits<double>::infinity();
    double worst_norm_lower = -std::numeric_limits<double>::infinity();
    std::size_t samples = 0;
};
// Reference lower family: tight family at theta_sm = exp(-3/2) with the same n.
SandwichReport tight_sandwich_check(double theta, int n, std::size_t samples,
                                    TightNormalization norm = TightNormalization::corrected);

double wolpert_log_ratio(const std::vector<std::complex<double>>& h_primes);

struct CompatReport {
    bool compatible = true;
    double max_deviation = 0;
    double at_radius = 0;
};
CompatReport check_compatibility(const Flattened& a, const Flattened& b, std::size_t samples = 2000);

// JSON round trip using DSL text for profiles.
nlohmann::json to_json(const MetricDescriptor& g, const NormDescriptor& nrm);
void from_json(const nlohmann::json& j, MetricDescriptor& g, NormDescriptor& nrm);
nlohmann::json to_json(const FlatteningFamily& f);
FlatteningFamily family_from_json(const nlohmann::json& j);

const char* regime_name(Regime r);

}  // namespace ct
