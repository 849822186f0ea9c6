// SPDX-License-Identifier: Apache-2.0
#include "ct/special_functions.hpp"

#include <cmath>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/bernoulli.hpp>

#include "ct/errors.hpp"

namespace ct {

namespace {

using ld = long double;
constexpr ld kPi = boost::math::constants::pi<ld>();

ld harmonic(int m) {
    ld h = 0;
    for (int j = 1; j <= m; ++j) h += 1.0L / j;
    return h;
}

}  // namespace

HighPrecReal euler_gamma() {
    // Euler-Maclaurin on H_N - ln N.
    constexpr int N = 20;
    constexpr int K = 8;
    ld g = harmonic(N) - std::log(static_cast<ld>(N)) - 1.0L / (2 * N);
    ld npow = 1;
    for (int k = 1; k <= K; ++k) {
        npow *= static_cast<ld>(N) * N;
        g += boost::math::bernoulli_b2n<ld>(k) / (2 * k * npow);
    }
    npow *= static_cast<ld>(N) * N;
    ld next = std::abs(boost::math::bernoulli_b2n<ld>(K + 1) / (2 * (K + 1) * npow));
    return {static_cast<double>(g), static_cast<double>(next) + 1e-18};
}

HighPrecReal zeta_prime_2() {
    // -sum ln n / n^2 with Euler-Maclaurin tail at N.
    constexpr int N = 30;
    constexpr int K = 10;
    ld s = 0;
    for (int n = 2; n < N; ++n) s += std::log(static_cast<ld>(n)) / (static_cast<ld>(n) * n);
    const ld x = N;
    const ld lx = std::log(x);
    s += (lx + 1) / x + lx / (2 * x * x);
    // f^{(m)}(x) = (-1)^m (m+1)! x^{-m-2} (ln x - H_{m+1} + 1) for f = ln x / x^2
    auto deriv = [&](int m) {
        ld fact = 1;
        for (int j = 2; j <= m + 1; ++j) fact *= j;
        ld sign = (m % 2) ? -1.0L : 1.0L;
        return sign * fact * std::pow(x, static_cast<ld>(-m - 2)) * (lx - harmonic(m + 1) + 1);
    };
    ld tail_err = 0;
    ld fact2k = 1;
    for (int k = 1; k <= K + 1; ++k) {
        fact2k *= static_cast<ld>(2 * k - 1) * (2 * k);
        ld term = boost::math::bernoulli_b2n<ld>(k) / fact2k * deriv(2 * k - 1);
        if (k <= K)
            s -= term;
        else
            tail_err = std::abs(term);
    }
    return {static_cast<double>(-s), static_cast<double>(tail_err) + 1e-17};
}

HighPrecReal zeta_prime_minus1() {
    // ln A = (gamma + ln 2pi)/12 - zeta'(2)/(2 pi^2); zeta'(-1) = 1/12 - ln A.
    HighPrecReal g = euler_gamma();
    HighPrecReal z2 = zeta_prime_2();
    ld lnA = (static_cast<ld>(g.value) + std::log(2 * kPi)) / 12 - static_cast<ld>(z2.value) / (2 * kPi * kPi);
    double err = g.abs_err / 12 + z2.abs_err / (2 * 9.8696) + 1e-16;
    return {static_cast<double>(1.0L / 12 - lnA), err};
}

HighPrecReal c_k(int k) {
    if (k < 0) throw DomainError("c_k: k must be nonnegative");
    const ld zp = zeta_prime_minus1().value;
    const ld ln2 = std::log(2.0L);
    const ld ln2pi = std::log(2 * kPi);
    if (k == 0) return {static_cast<double>(4 * zp - 0.5L + ln2pi), 4e-15};
    ld s = 0;
    for (int l = 0; l <= k - 1; ++l) {
        ld arg = 2.0L * k + 2.0L * k * l - static_cast<ld>(l) * l - l;
        s += (2.0L * k - 2.0L * l - 1) * (std::log(arg) - ln2);
    }
    const ld kk = k;
    s += (1.0L / 3 + kk + kk * kk) * ln2 + (2 * kk + 1) * ln2pi + 4 * zp - 2 * (kk + 0.5L) * (kk + 0.5L);
    ld lfact = 0, sum_lfact = 0;
    for (int l = 1; l <= k - 1; ++l) {
        lfact += std::log(static_cast<ld>(l));
        sum_lfact += lfact;
    }
    s -= 4 * sum_lfact;
    s -= 2 * std::lgamma(kk + 1);
    return {static_cast<double>(s), 1e-13 * (1 + k * k)};
}

HighPrecReal dedekind_eta(double tau_im) {
    if (!(tau_im > 0)) throw DomainError("dedekind_eta: tau_im must be positive");
    if (tau_im < 0.25) {
        // eta(i y) = eta(i / y) / sqrt(y)
        HighPrecReal e = dedekind_eta(1.0 / tau_im);
        double f = 1.0 / std::sqrt(tau_im);
        return {e.value * f, e.abs_err * f};
    }
    const ld y = tau_im;
    const ld q = std::exp(-2 * kPi * y);
    ld logp = -kPi * y / 12;
    ld qk = 1;
    ld bound = 1;
    for (int k = 1; k < 100000; ++k) {
        qk *= q;
        logp += std::log1p(-qk);
        // |sum_{j>k} ln(1 - q^j)| <= q^{k+1} / ((1 - q)(1 - q^{k+1}))
        ld qn = qk * q;
        bound = qn / ((1 - q) * (1 - qn));
        if (bound < 1e-17L) break;
    }
    ld v = std::exp(logp);
    return {static_cast<double>(v), static_cast<double>(v * bound * 1.01L) + 1e-17 * static_cast<double>(v)};
}

HighPrecReal log_selberg_prime_P() {
    HighPrecReal zp = zeta_prime_minus1();
    ld v = 4 * static_cast<ld>(zp.value) + std::log(2 * kPi) + 10.0L / 9 * std::log(2.0L);
    return {static_cast<double>(v), 4 * zp.abs_err + 1e-16};
}

}  // namespace ct
