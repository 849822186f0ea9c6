#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "ct/errors.hpp"
#include "ct/heat_kernel.hpp"
#include "ct/hyp_geometry.hpp"
#include "ct/reg_trace.hpp"
#include "doctest.h"

using namespace ct;
constexpr double kPi = std::numbers::pi;

namespace {

CuspPerturbation bump(double amp) {
    return {[amp](double t, double y) { return amp * t * std::exp(-t) / std::sqrt(y); }};
}

// Least-squares fit of t * v(t) = a + b t.
std::pair<double, double> fit_laurent(const std::vector<double>& t, const std::vector<double>& v) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double y = t[i] * v[i];
        sx += t[i];
        sy += y;
        sxx += t[i] * t[i];
        sxy += t[i] * y;
    }
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {(sy - b * sx) / n, b};
}

}  // namespace

TEST_CASE("cusp radial integral of the volume form") {
    auto one = [](double) { return 1.0; };
    for (auto [a, b] : {std::pair{0.01, 0.1}, std::pair{1e-8, 0.5}, std::pair{0.3, 0.05}}) {
        const double exact = cusp_volume(b) - cusp_volume(a);
        CHECK(std::abs(cusp_radial_integral(one, a, b) - exact) < 1e-12);
    }
    CHECK(std::abs(cusp_radial_integral(one, 0.0, 0.1) - cusp_volume(0.1)) < 1e-12);
    // int_{D*(eta)} y^{-1} dv = 2 pi / (2 y_eta^2).
    const double yb = -std::log(0.05);
    CHECK(std::abs(cusp_radial_integral([](double y) { return 1 / y; }, 0.0, 0.05) - kPi / (yb * yb)) < 1e-12);
    CHECK_THROWS_AS(cusp_radial_integral(one, 0.0, 1.5), DomainError);
}

TEST_CASE("three copies of P cancel") {
    const HeatDataProvider P = reference_P();
    const HeatDataProvider M = triplicate(P);
    CHECK(M.m == 9);
    for (double t : {0.01, 0.3, 2.0, 8.0}) {
        CHECK(std::abs(regularized_trace(M, P, t, 0.05)) < 1e-8);
        CHECK(std::abs(regularized_trace(M, P, t, 0.05, false)) < 1e-8);
    }
    const SmallTimeCoeffs c = small_time_coeffs(M, P);
    CHECK(std::abs(c.A_minus1) < 1e-14);
    CHECK(std::abs(c.A_0) < 1e-14);
}

TEST_CASE("compact spectral provider is the plain eigenvalue sum") {
    const std::vector<double> ev{0.0, 0.7, 1.3, 1.3, 2.9, 5.0};
    const HeatDataProvider M = spectral_provider(ev, 3.0);
    CHECK(M.dim_H0 == 1);
    CHECK(M.mu == doctest::Approx(0.7));
    for (double t : {0.05, 0.5, 3.0}) {
        double direct = 0;
        for (double l : ev) direct += std::exp(-l * t);
        CHECK(std::abs(regularized_trace(M, M, t, 0.05, false) - direct) < 1e-10);
        CHECK(std::abs(regularized_trace(M, M, t, 0.05, true) - (direct - 1)) < 1e-10);
    }
}

TEST_CASE("regularized trace does not depend on the cutoff radius") {
    const HeatDataProvider P = reference_P();
    const HeatDataProvider M = hyperbolic_model_provider(2, 4 * kPi, 1, 1, {0.4}, bump(0.3));
    for (double t : {0.05, 0.5, 2.0}) {
        const double v0 = regularized_trace(M, P, t, 0.05);
        for (double eta : {0.02, 0.1}) {
            const double v = regularized_trace(M, P, t, eta);
            CHECK_MESSAGE(std::abs(v - v0) < 1e-8, "t=", t, " eta=", eta, " diff=", v - v0);
        }
    }
}

TEST_CASE("non-perp trace differs by the weighted kernel dimensions") {
    const HeatDataProvider P = reference_P();
    const HeatDataProvider M = hyperbolic_model_provider(6, 7 * kPi, 2, 1, {0.3, 0.9});
    const double w = 6 * 2 / 3.0;
    for (double t : {0.1, 1.0}) {
        const double a = regularized_trace(M, P, t, 0.05, false);
        const double b = regularized_trace(M, P, t, 0.05, true);
        CHECK(a - b == doctest::Approx(M.dim_H0 - w * P.dim_H0).epsilon(1e-15));
    }
}

TEST_CASE("small-time coefficients") {
    const HeatDataProvider P = reference_P();
    SUBCASE("equal volume against the reference cancels") {
        const HeatDataProvider M = hyperbolic_model_provider(3, 2 * kPi);
        const SmallTimeCoeffs c = small_time_coeffs(M);
        CHECK(std::abs(c.A_minus1) < 1e-15);
        CHECK(std::abs(c.A_0) < 1e-15);
    }
    SUBCASE("flat torus") {
        const HeatDataProvider T = flat_torus_provider({0.3, 1.2}, 0.4);
        const SmallTimeCoeffs c = small_time_coeffs(T);
        CHECK(c.A_minus1 == doctest::Approx(std::exp(0.8) / (2 * kPi)).epsilon(1e-15));
        CHECK(c.A_0 == doctest::Approx(-1.0).epsilon(1e-15));
    }
    SUBCASE("reference coefficients match the scalar diagonal") {
        CHECK(P.local->a_minus1 == doctest::Approx(1 / (2 * kPi)).epsilon(1e-14));
        // Scalar diagonal constant plus the point-spectrum constant dim_H0 / volume.
        CHECK(P.local->a_0 == doctest::Approx(-1 / (12 * kPi) + 1 / (2 * kPi)).epsilon(1e-12));
        const HeatDataProvider P1 = reference_P(-1);
        CHECK(P1.local->a_0 - P.local->a_0 == doctest::Approx(-1 / (4 * kPi) - 1 / (2 * kPi)).epsilon(1e-12));
    }
    SUBCASE("missing local data") {
        const HeatDataProvider S = spectral_provider({0.0, 1.0}, 1.0);
        CHECK_THROWS_AS(small_time_coeffs(S), CapabilityError);
    }
    SUBCASE("fit on [1e-3, 1e-2]") {
        std::vector<double> t;
        for (int i = 0; i <= 8; ++i) t.push_back(1e-3 * std::pow(10.0, i / 8.0));
        const HeatDataProvider T = flat_torus_provider({0.1, 0.9}, -0.2);
        const HeatDataProvider M = hyperbolic_model_provider(5, 6 * kPi, 1, 1, {0.5}, bump(0.2));
        const HeatDataProvider S = round_sphere_provider(0.3);
        for (const HeatDataProvider* X : {&T, &M, &S}) {
            const TraceCurve c = trace_curve(*X, P, t);
            REQUIRE(c.has_coeffs);
            const auto [a, b] = fit_laurent(c.t, c.value);
            CHECK_MESSAGE(std::abs(a - c.a_minus1) < 1e-3 * std::max(1.0, std::abs(c.a_minus1)), X->kind);
            CHECK_MESSAGE(std::abs(b - c.a_0) < 1e-3 * std::max(1.0, std::abs(c.a_0)), X->kind, " b=", b, " A0=", c.a_0);
        }
    }
}

TEST_CASE("large-time decay") {
    const double mu = 0.37;
    SUBCASE("two-exponential curve") {
        const HeatDataProvider M = spectral_provider({0.0, mu, 2 * mu}, 1.0);
        std::vector<double> t;
        for (int i = 0; i <= 40; ++i) t.push_back(0.5 * std::pow(1.15, i));
        const TraceCurve c = trace_curve(M, M, t);
        for (std::size_t i = 0; i < t.size(); ++i)
            CHECK(std::abs(c.value[i] - (std::exp(-mu * t[i]) + std::exp(-2 * mu * t[i]))) < 1e-12);
        CHECK(c.tail.ok);
        CHECK(c.tail.fitted_rate >= mu * 0.99);
        CHECK(c.tail.C >= 1.0);
    }
    SUBCASE("planted slower mode is flagged") {
        HeatDataProvider M = spectral_provider({0.0, mu / 2, mu}, 1.0);
        M.mu = mu;
        std::vector<double> t;
        for (int i = 0; i <= 40; ++i) t.push_back(0.5 * std::pow(1.15, i));
        const TraceCurve c = trace_curve(M, M, t);
        CHECK_FALSE(c.tail.ok);
        CHECK(c.tail.fitted_rate < mu * 0.6);
        CHECK_FALSE(c.tail.reason.empty());
    }
    SUBCASE("too few late samples") {
        const TailModel tm = fit_tail({0.1, 0.2, 2.0}, {1.0, 0.9, 0.1}, mu);
        CHECK_FALSE(tm.ok);
    }
}

TEST_CASE("mellin grid and curve") {
    const MellinGrid g = mellin_grid(1e-4, 50.0);
    double s = 0, s1 = 0;
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        s += g.log_weights[i];
        s1 += g.log_weights[i] * g.t[i];
        if (i > 0) CHECK(g.t[i] > g.t[i - 1]);
    }
    CHECK(s == doctest::Approx(std::log(50.0 / 1e-4)).epsilon(1e-13));
    CHECK(s1 == doctest::Approx(50.0 - 1e-4).epsilon(1e-13));
    CHECK_THROWS_AS(mellin_grid(2.0, 50.0), DomainError);

    const HeatDataProvider P = reference_P();
    const HeatDataProvider M = hyperbolic_model_provider(4, 5 * kPi, 1, 1, {0.6}, bump(0.1));
    const TraceCurve c = mellin_trace_curve(M, P, 1e-4, Exec::parallel);
    CHECK(c.t.front() < 1.1e-4);
    CHECK(c.t.back() >= 10.0);
    for (double v : c.value) CHECK(std::isfinite(v));
    CHECK(c.tail.ok);
}

TEST_CASE("parallel and serial curves agree") {
    const HeatDataProvider P = reference_P();
    const HeatDataProvider M = hyperbolic_model_provider(3, 3 * kPi, 1, 1, {}, bump(0.2));
    const std::vector<double> t{0.02, 0.2, 1.0, 4.0};
    const TraceCurve a = trace_curve(M, P, t, 0.05, Exec::serial);
    const TraceCurve b = trace_curve(M, P, t, 0.05, Exec::parallel);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(a.value[i] == b.value[i]);
}

TEST_CASE("json providers") {
    SUBCASE("eigenvalue round trip") {
        const HeatDataProvider M = spectral_provider({0.0, 0.5, 2.0}, 2.0, LocalCoeffs{0.1, 0.2});
        const HeatDataProvider N = provider_from_json(provider_to_json(M));
        CHECK(N.dim_H0 == 1);
        CHECK(N.local->a_0 == 0.2);
        CHECK(regularized_trace(N, N, 0.7, 0.05) == doctest::Approx(regularized_trace(M, M, 0.7, 0.05)).epsilon(1e-15));
    }
    SUBCASE("torus by modulus") {
        const HeatDataProvider T = flat_torus_provider({0.2, 1.5}, 0.1);
        const HeatDataProvider U = provider_from_json(provider_to_json(T));
        CHECK(U.core_trace(0.3, 0.05) == doctest::Approx(T.core_trace(0.3, 0.05)).epsilon(1e-15));
    }
    SUBCASE("sampled core trace") {
        nlohmann::json j;
        j["m"] = 0;
        j["volume"] = 1.0;
        j["dim_H0"] = 1;
        j["mu"] = 1.0;
        nlohmann::json s = nlohmann::json::array();
        for (int i = 0; i <= 200; ++i) {
            const double t = 0.1 * std::pow(10.0, i / 100.0);
            s.push_back({t, 1 + std::exp(-t)});
        }
        j["core_trace_samples"] = s;
        const HeatDataProvider M = provider_from_json(j);
        CHECK(std::abs(regularized_trace(M, M, 0.77, 0.05) - std::exp(-0.77)) < 1e-6);
        CHECK_THROWS_AS(regularized_trace(M, M, 20.0, 0.05), RangeError);
        CHECK(provider_from_json(provider_to_json(M)).core_samples.size() == 201);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(provider_from_json(nlohmann::json{{"volume", 1.0}}), CapabilityError);
        CHECK_THROWS_AS(provider_to_json(hyperbolic_model_provider(3, 2 * kPi, 1, 1, {}, bump(0.1))), CapabilityError);
    }
}

TEST_CASE("gaussian cusp estimate") {
    for (double eps : {0.1, 1e-3, 1e-6}) {
        for (double cp : {0.5, 2.0}) {
            for (double t : {0.01, 0.1, 1.0}) {
                const GaussianCuspBound b = gaussian_cusp_bound(eps, cp, t);
                const double w = std::log(-std::log(eps));
                const double oracle = 4 * kPi * 0.5 * std::sqrt(kPi * t / cp) * boost::math::erfc(w * std::sqrt(cp / t));
                CHECK(b.integral == doctest::Approx(oracle).epsilon(1e-9));
                CHECK(b.holds);
            }
        }
    }
    double prev = 1e300;
    for (double t : {0.2, 0.1, 0.05, 0.02, 0.01}) {
        const GaussianCuspBound b = gaussian_cusp_bound(1e-3, 1.0, t);
        CHECK(b.bound < prev);
        prev = b.bound;
    }
    CHECK(prev < 1e-20);
}

TEST_CASE("cusp weight integral") {
    for (double eps : {0.1, 1e-4}) {
        for (double s : {-1.0, 0.0, 0.5}) {
            const double L = -std::log(eps);
            CHECK(cusp_weight_integral(eps, s) == doctest::Approx(4 * kPi * std::pow(L, s - 1) / (1 - s)).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(cusp_weight_integral(0.1, 1.0), FinitenessError);
    CHECK_THROWS_AS(cusp_weight_integral(0.1, 1.5), FinitenessError);
}
