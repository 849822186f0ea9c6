#include <cmath>
#include <numbers>

#include "ct/errors.hpp"
#include "ct/special_functions.hpp"
#include "doctest.h"

using namespace ct;

namespace {

// ln A from the hyperfactorial asymptotic, independent of the zeta'(2) route.
long double glaisher_log(int n) {
    long double s = 0;
    for (int k = 2; k <= n; ++k) s += k * std::log(static_cast<long double>(k));
    long double N = n;
    long double main = (N * N / 2 + N / 2 + 1.0L / 12) * std::log(N) - N * N / 4;
    return s - main - 1.0L / (720 * N * N) + 1.0L / (5040 * N * N * N * N);
}

// Richardson on a_n = H_n - ln n (error expansion in 1/n).
double gamma_richardson() {
    constexpr int L = 6;
    long double T[L][L];
    for (int j = 0; j < L; ++j) {
        long n = 1000L << j;
        long double h = 0;
        for (long k = n; k >= 1; --k) h += 1.0L / k;
        T[j][0] = h - std::log(static_cast<long double>(n));
    }
    for (int m = 1; m < L; ++m)
        for (int j = m; j < L; ++j) {
            long double f = std::ldexp(1.0L, m);
            T[j][m] = (f * T[j][m - 1] - T[j - 1][m - 1]) / (f - 1);
        }
    return static_cast<double>(T[L - 1][L - 1]);
}

// Second implementation of c_k for k >= 1: reversed loops, lgamma for ln l!.
double c_k_oracle(int k, double zp) {
    const double ln2 = std::log(2.0), ln2pi = std::log(2 * std::numbers::pi);
    double s = 4 * zp - 2 * (k + 0.5) * (k + 0.5);
    for (int l = k - 1; l >= 1; --l) s -= 4 * std::lgamma(l + 1.0);
    s -= 2 * std::lgamma(k + 1.0);
    s += (2.0 * k + 1) * ln2pi + (k * k + k + 1.0 / 3) * ln2;
    for (int l = k - 1; l >= 0; --l) {
        double a = 2.0 * k + 2.0 * k * l - 1.0 * l * l - l;
        s += (2.0 * k - 2.0 * l - 1) * std::log(a / 2);
    }
    return s;
}

}  // namespace

TEST_CASE("zeta'(-1) matches the Glaisher hyperfactorial oracle") {
    HighPrecReal z = zeta_prime_minus1();
    CHECK(z.abs_err <= 1e-12);
    double oracle = static_cast<double>(1.0L / 12 - glaisher_log(400));
    CHECK(std::abs(z.value - oracle) <= std::max(z.abs_err, 1e-13));
    CHECK(z.value < 0);
    CHECK(z.value == doctest::Approx(-0.1654211437).epsilon(1e-10));
}

TEST_CASE("Glaisher oracle is stable in its cutoff") {
    CHECK(std::abs(static_cast<double>(glaisher_log(400) - glaisher_log(200))) < 1e-12);
}

TEST_CASE("euler gamma: Richardson and log-gamma derivative oracles") {
    HighPrecReal g = euler_gamma();
    CHECK(g.abs_err <= 1e-12);
    CHECK(std::abs(g.value - gamma_richardson()) < 1e-12);
    // Gamma'(1) = -gamma via a Richardson central difference of lgamma
    auto d = [](double h) { return (std::lgamma(1 + h) - std::lgamma(1 - h)) / (2 * h); };
    double h = 1e-3;
    double r1 = d(h), r2 = d(h / 2), r3 = d(h / 4);
    double e1 = (4 * r2 - r1) / 3, e2 = (4 * r3 - r2) / 3;
    double fd = (16 * e2 - e1) / 15;
    CHECK(std::abs(fd + g.value) < 1e-10);
    CHECK(g.value > 0.5);
    CHECK(g.value < 0.6);
}

TEST_CASE("c_0 equals the three-term closed form") {
    double zp = zeta_prime_minus1().value;
    HighPrecReal c0 = c_k(0);
    CHECK(std::abs(c0.value - (4 * zp - 0.5 + std::log(2 * std::numbers::pi))) < 1e-15);
    CHECK(std::abs(c0.value - 0.6761925) < 1e-7);
}

TEST_CASE("c_k for k >= 1 agrees with an independent re-summation") {
    double zp = zeta_prime_minus1().value;
    for (int k = 1; k <= 6; ++k) {
        HighPrecReal c = c_k(k);
        CHECK(std::abs(c.value - c_k_oracle(k, zp)) <= std::max(c.abs_err, 1e-10));
    }
    // reference values from 30-digit arithmetic
    CHECK(std::abs(c_k(1).value - 1.969290045732771789) < 1e-10);
    CHECK(std::abs(c_k(2).value - 2.209392370019298995) < 1e-10);
    CHECK(std::abs(c_k(3).value - 2.009297106144620160) < 1e-10);
    CHECK(std::abs(c_k(4).value - 1.505337532538472470) < 1e-10);
    CHECK_THROWS_AS(c_k(-1), DomainError);
}

TEST_CASE("dedekind eta at i matches the gamma closed form") {
    HighPrecReal e = dedekind_eta(1.0);
    double oracle = std::tgamma(0.25) / (2 * std::pow(std::numbers::pi, 0.75));
    CHECK(e.abs_err <= 1e-12);
    CHECK(std::abs(e.value - oracle) < 1e-14);
    CHECK_THROWS_AS(dedekind_eta(0.0), DomainError);
    CHECK_THROWS_AS(dedekind_eta(-1.0), DomainError);
}

TEST_CASE("dedekind eta modularity") {
    CHECK(std::abs(dedekind_eta(0.5).value - std::sqrt(2.0) * dedekind_eta(2.0).value) < 1e-10);
    unsigned s = 12345;
    for (int i = 0; i < 10; ++i) {
        s = s * 1103515245u + 12345u;
        double t = 0.5 + 1.5 * ((s >> 8) & 0xffff) / 65535.0;
        CHECK(std::abs(dedekind_eta(1 / t).value - std::sqrt(t) * dedekind_eta(t).value) < 1e-10);
    }
    double T = 50;
    CHECK(std::abs(dedekind_eta(T).value * std::exp(std::numbers::pi * T / 12) - 1) < 1e-14);
}

TEST_CASE("ln Z'_P(1)") {
    HighPrecReal z = log_selberg_prime_P();
    CHECK(std::abs(z.value - 1.9463560) < 1e-6);
    CHECK(std::abs(z.value - 1.946356025563036555) < 1e-12);
}
