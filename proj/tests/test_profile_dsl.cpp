#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "ct/errors.hpp"
#include "ct/profile_dsl.hpp"
#include "ct/smooth_step.hpp"
#include "doctest.h"

using namespace ct;

TEST_CASE("parse and evaluate basic profiles") {
    auto e = ProfileExpr::parse("1/(r*abs(ln(r))^2)");
    CHECK(std::abs(e.eval(std::exp(-1.0)) - std::exp(1.0)) < 1e-13);
    auto p = ProfileExpr::parse("psi(ln(r)/ln(0.01))");
    CHECK(p.eval(0.1) == 1.0);
    CHECK(ProfileExpr::parse("r").eval(0.25) == 0.25);
    CHECK(ProfileExpr::parse("w").eval(std::exp(-std::exp(2.0))) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(ProfileExpr::parse("-2^2").eval(0.5) == -4);
    CHECK(ProfileExpr::parse("2^3^2").eval(0.5) == 512);
    CHECK(ProfileExpr::parse("2^-1").eval(0.5) == 0.5);
    CHECK(ProfileExpr::parse("1-2-3").eval(0.5) == -4);
    CHECK(ProfileExpr::parse("8/4/2").eval(0.5) == 1);
    CHECK(ProfileExpr::parse("2*pi").eval(0.5) == doctest::Approx(2 * 3.14159265358979).epsilon(1e-14));
    CHECK(ProfileExpr::parse("1.5e-3*2").eval(0.5) == doctest::Approx(3e-3));
}

TEST_CASE("syntax diagnostics carry positions") {
    try {
        ProfileExpr::parse("2*^3");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line == 1);
        CHECK(e.col == 3);
    }
    try {
        ProfileExpr::parse("1 +\n  foo(r)");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line == 2);
        CHECK(e.col == 3);
    }
    CHECK_THROWS_AS(ProfileExpr::parse("(r"), SyntaxError);
    CHECK_THROWS_AS(ProfileExpr::parse("exp r"), SyntaxError);
    CHECK_THROWS_AS(ProfileExpr::parse("r $ 2"), SyntaxError);
    CHECK_THROWS_AS(ProfileExpr::parse(""), SyntaxError);
}

TEST_CASE("domain diagnostics") {
    CHECK_THROWS_AS(ProfileExpr::parse("ln(r-1)").eval(0.5), DomainError);
    CHECK_THROWS_AS(ProfileExpr::parse("1/(r-0.5)").eval(0.5), DomainError);
    CHECK_THROWS_AS(ProfileExpr::parse("r").eval(1.5), DomainError);
    try {
        ProfileExpr::parse("1 + ln(0-r)").eval(0.5);
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("column 5") != std::string::npos);
    }
}

TEST_CASE("ln(r) is exact deep in the cusp") {
    auto e = ProfileExpr::parse("ln(abs(ln(r)))");
    CHECK(e.eval_log(-1e6) == doctest::Approx(std::log(1e6)).epsilon(1e-15));
    CHECK(ProfileExpr::parse("w").eval_log(-1e300) == doctest::Approx(std::log(1e300)));
}

TEST_CASE("derivatives against closed forms") {
    double r0 = std::exp(-2.0);
    CHECK(std::abs(ProfileExpr::parse("ln(abs(ln(r)))").deriv(r0, 1) - (-std::exp(2.0) / 2)) < 1e-7);
    CHECK(std::abs(ProfileExpr::parse("3.5").deriv(0.3, 1)) < 1e-12);
    CHECK(std::abs(ProfileExpr::parse("3.5").deriv(0.3, 2)) < 1e-12);

    struct Case {
        const char* src;
        std::function<double(double)> d1, d2;
    };
    std::vector<Case> battery = {
        {"r^2", [](double r) { return 2 * r; }, [](double) { return 2.0; }},
        {"exp(r)", [](double r) { return std::exp(r); }, [](double r) { return std::exp(r); }},
        {"ln(r)", [](double r) { return 1 / r; }, [](double r) { return -1 / (r * r); }},
        {"w", [](double r) { return 1 / (r * std::log(r)); },
         [](double r) { double l = std::log(r); return -(l + 1) / (r * r * l * l); }},
        {"1/r", [](double r) { return -1 / (r * r); }, [](double r) { return 2 / (r * r * r); }},
        {"r*ln(r)", [](double r) { return std::log(r) + 1; }, [](double r) { return 1 / r; }},
        {"exp(-r^2)", [](double r) { return -2 * r * std::exp(-r * r); },
         [](double r) { return (4 * r * r - 2) * std::exp(-r * r); }},
        {"abs(ln(r))^0.5", [](double r) { return -0.5 / (r * std::sqrt(-std::log(r))); },
         [](double r) { double L = -std::log(r); return 0.5 / (r * r * std::sqrt(L)) - 0.25 / (r * r * L * std::sqrt(L)); }},
        {"(1+r)^3", [](double r) { return 3 * (1 + r) * (1 + r); }, [](double r) { return 6 * (1 + r); }},
        {"r/(1+r)", [](double r) { return 1 / ((1 + r) * (1 + r)); }, [](double r) { return -2 / ((1 + r) * (1 + r) * (1 + r)); }},
        {"ln(r)^2", [](double r) { return 2 * std::log(r) / r; }, [](double r) { return (2 - 2 * std::log(r)) / (r * r); }},
        {"w*ln(r)", [](double r) { double l = std::log(r); return (1 + std::log(-l)) / r; },
         [](double r) { double l = std::log(r); return (1 / l - 1 - std::log(-l)) / (r * r); }},
    };
    CHECK(battery.size() == 12);
    for (const auto& c : battery) {
        auto e = ProfileExpr::parse(c.src);
        for (double r : {0.05, 0.2, 0.5, 0.8, 0.97}) {
            double a1 = e.deriv(r, 1), a2 = e.deriv(r, 2);
            double e1 = c.d1(r), e2 = c.d2(r);
            INFO(c.src << " at r=" << r);
            CHECK(std::abs(a1 - e1) <= 1e-6 * std::max(1.0, std::abs(e1)));
            CHECK(std::abs(a2 - e2) <= 1e-6 * std::max(1.0, std::abs(e2)));
        }
    }
}

TEST_CASE("jets in s and w coordinates") {
    auto e = ProfileExpr::parse("w");  // ln|s|
    for (double s : {-0.5, -3.0, -50.0, -1e5}) {
        Jet j = e.jet_log(s);
        CHECK(std::abs(j.v - std::log(-s)) < 1e-14 * std::max(1.0, std::abs(j.v)));
        CHECK(std::abs(j.d1 - 1 / s) < 1e-8 / std::abs(s));
        CHECK(std::abs(j.d2 + 1 / (s * s)) < 1e-7 / (s * s));
    }
    auto p = ProfileExpr::parse("psi(ln(r)/ln(0.001))*w");
    for (double s : {-4.0, -5.0, -6.0}) {
        double L = std::log(0.001);
        Jet ps = smooth_step_jet(StepKind::psi, s / L);
        double d1 = ps.d1 / L * std::log(-s) + ps.v / s;
        Jet j = p.jet_log(s);
        CHECK(std::abs(j.d1 - d1) < 1e-8);
    }
}

namespace {

std::string random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
    static const char* fns[] = {"exp", "abs", "psi", "chi", "phi_step"};
    switch (pick(rng)) {
        case 0: return "r";
        case 1: return "w";
        case 2: {
            std::uniform_real_distribution<double> u(0.1, 3);
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", u(rng));
            return buf;
        }
        case 3: return "(" + random_expr(rng, depth - 1) + "+" + random_expr(rng, depth - 1) + ")";
        case 4: return random_expr(rng, depth - 1) + "-" + random_expr(rng, depth - 1);
        case 5: return "(" + random_expr(rng, depth - 1) + ")*(" + random_expr(rng, depth - 1) + ")";
        case 6: return "-" + random_expr(rng, depth - 1);
        case 7: return "(" + random_expr(rng, depth - 1) + ")/(2+r)";
        case 8: return "abs(" + random_expr(rng, depth - 1) + ")^(" + std::string("0.5") + ")";
        default: {
            std::uniform_int_distribution<int> f(0, 4);
            return std::string(fns[f(rng)]) + "(" + random_expr(rng, depth - 1) + "/10)";
        }
    }
}

}  // namespace

TEST_CASE("fuzz: print/parse round trip preserves text and value") {
    std::mt19937_64 rng(2024);
    int checked = 0;
    for (int k = 0; k < 2000; ++k) {
        std::string src = random_expr(rng, 4);
        ProfileExpr e = ProfileExpr::parse(src);
        std::string norm = e.print();
        ProfileExpr e2 = ProfileExpr::parse(norm);
        CHECK(e2.print() == norm);
        for (double r : {0.01, 0.3, 0.7}) {
            double a, b;
            try {
                a = e.eval(r);
            } catch (const DomainError&) {
                CHECK_THROWS_AS(e2.eval(r), DomainError);
                continue;
            }
            b = e2.eval(r);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
            ++checked;
        }
    }
    CHECK(checked > 1000);
}
