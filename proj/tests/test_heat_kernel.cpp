#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/bernoulli.hpp>

#include "ct/errors.hpp"
#include "ct/heat_kernel.hpp"
#include "ct/quadrature.hpp"
#include "doctest.h"

using namespace ct;
constexpr double kPi = std::numbers::pi;

namespace {

double rel(double a, double b) { return std::abs(a / b - 1.0); }

// Coefficients of 4 pi tau p_tau(0) in powers of tau, from
// x / sinh x = sum (2 - 2^{2m}) B_{2m} x^{2m} / (2m)! and Gaussian moments.
std::vector<long double> diag_series_oracle(int order) {
    std::vector<long double> c(order + 1), e(order + 1), out(order + 1, 0.0L);
    long double fact = 1, dfact = 1;  // (2m)!, (2m-1)!! / 2^m
    for (int m = 0; m <= order; ++m) {
        if (m > 0) {
            fact *= (2.0L * m - 1) * (2.0L * m);
            dfact *= (2.0L * m - 1) / 2.0L;
        }
        const long double B = boost::math::bernoulli_b2n<long double>(m);
        c[m] = (2.0L - std::ldexp(1.0L, 2 * m)) * B / fact * dfact;
    }
    long double f = 1;
    for (int m = 0; m <= order; ++m) {
        if (m > 0) f *= -0.25L / m;
        e[m] = f;
    }
    for (int i = 0; i <= order; ++i)
        for (int j = 0; i + j <= order; ++j) out[i + j] += e[i] * c[j];
    return out;
}

double u0(double r) { return r == 0 ? 1.0 : std::sqrt(r / std::sinh(r)); }

// (H u0)(rho) for the twisted radial operator, central differences with Richardson.
double H_u0_fd(double rho, int n) {
    auto lap = [&](double h) {
        const double d2 = (u0(rho + h) - 2 * u0(rho) + u0(rho - h)) / (h * h);
        const double d1 = (u0(rho + h) - u0(rho - h)) / (2 * h);
        return d2 + d1 / std::tanh(rho);
    };
    const double L = (4 * lap(5e-4) - lap(1e-3)) / 3;
    const double th = std::tanh(rho / 2);
    return -L + n * n * th * th * u0(rho);
}

// u_1(r) = -(r j^{1/2})^{-1} int_0^r j^{1/2} H u0, midpoint rule at N and 2N with Richardson.
double u1_fd(double r, int n) {
    auto jh = [](double x) { return std::sqrt(std::sinh(x) / x); };
    auto mid = [&](int N) {
        const double h = r / N;
        double s = 0;
        for (int j = 0; j < N; ++j) {
            const double x = (j + 0.5) * h;
            s += jh(x) * H_u0_fd(x, n);
        }
        return s * h;
    };
    const double I = (4 * mid(400) - mid(200)) / 3;
    return -I / (r * jh(r));
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

TEST_CASE("McKean kernel against high-precision reference values") {
    struct Ref {
        double t, r, v;
    };
    const Ref refs[] = {{0.01, 0.05, 14.019069131678348353},  {0.1, 0.5, 0.43932006703052303885},
                        {1, 0, 0.13505600024041982128},       {1, 2, 0.013668272010699108823},
                        {10, 5, 0.0002860611361831795218},    {10, 20, 2.5461042333997095206e-15}};
    for (const auto& x : refs) {
        CHECK(rel(exact_kernel_direct(x.t, x.r), x.v) < 1e-13);
        CHECK(rel(exact_kernel_H_n0(x.t, x.r), x.v) < 1e-12);
    }
}

TEST_CASE("tabulated kernel agrees with direct quadrature") {
    for (double t : {1e-4, 3e-3, 0.07, 0.5, 2.0, 10.0}) {
        for (int i = 0; i <= 60; ++i) {
            const double r = 0.0137 * i * i;
            const double d = exact_kernel_direct(t, r);
            if (d < 1e-200) continue;
            CHECK(rel(exact_kernel_H_n0(t, r), d) < 1e-12);
        }
    }
    CHECK_THROWS_AS(exact_kernel_H_n0(0.0, 1.0), DomainError);
}

TEST_CASE("exact kernel: positivity and monotonicity in r") {
    for (double t : {0.01, 1.0, 10.0}) {
        double prev = exact_kernel_H_n0(t, 0.0);
        CHECK(prev > 0);
        // Up to where the value stays above double underflow.
        const double rmax = std::min(10.0, 0.9 * std::sqrt(1400 * t));
        for (int i = 1; 0.05 * i <= rmax; ++i) {
            const double v = exact_kernel_H_n0(t, 0.05 * i);
            CHECK(v > 0);
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("exact kernel: unit mass") {
    for (double t : {0.1, 1.0, 10.0}) {
        auto f = [&](double r) { return 2 * kPi * exact_kernel_direct(t, r) * std::sinh(r); };
        double m = 0;
        const double R = std::max(6.0, 12 * std::sqrt(t) + 2 * t);
        for (int j = 0; j < 40; ++j) m += integrate(f, R * j / 40, R * (j + 1) / 40, 1e-12);
        CHECK(std::abs(m - 1.0) < 1e-6);
    }
}

TEST_CASE("exact kernel: small-time Gaussian ratio") {
    const double t = 1e-3;
    const double sigma = kKernelConvention.sigma;
    CHECK(std::abs(calibrate_gaussian_scale(t) - sigma) < 1e-4);
    for (int i = 0; i <= 100; ++i) {
        const double r = 0.01 * i;
        const double ratio = exact_kernel_H_n0(t, r) * 2 * kPi * t * std::exp(r * r / (2 * sigma * t));
        // Leading amplitude (r / sinh r)^{1/2} is part of the Gaussian profile.
        CHECK(std::abs(ratio / u0(r) - 1.0) < 1e-3);
        if (r <= 0.05) CHECK(std::abs(ratio - 1.0) < 1e-3);
    }
}

TEST_CASE("exact kernel: diagonal leading term") {
    const double t = 1e-4;
    CHECK(std::abs(t * exact_kernel_H_n0(t, 0.0) - 1 / (2 * kPi)) < 1e-4);
    for (double s : {1e-3, 0.1, 1.0, 4.0}) {
        const long double d = exact_kernel_diag_ld(s);
        CHECK(rel(static_cast<double>(d), exact_kernel_direct(s, 0.0)) < 1e-13);
    }
    // Extended-precision diagonal against the small-time series.
    const auto ser = diag_series_oracle(8);
    const long double tl = 1e-3L, tau = tl / 2;
    long double sum = 0, p = 1;
    for (int a = 0; a <= 8; ++a, p *= tau) sum += ser[a] * p;
    const long double oracle = sum / (4 * std::numbers::pi_v<long double> * tau);
    CHECK(std::abs(static_cast<double>(exact_kernel_diag_ld(tl) / oracle - 1)) < 1e-17);
}

TEST_CASE("parametrix: transport coefficients at the origin") {
    const auto ser = diag_series_oracle(6);
    const ParametrixCoeffs& c = build_parametrix(0, 6);
    REQUIRE(c.profiles.size() == 7);
    for (int a = 0; a <= 6; ++a) {
        CHECK(std::abs(static_cast<double>(c.u(a, 0) / ser[a] - 1)) < 1e-15);
        CHECK(std::abs(static_cast<double>(c.diag[a] * 2 * std::numbers::pi_v<long double> * std::ldexp(1.0L, a) / ser[a] - 1)) < 1e-15);
    }
    CHECK(std::abs(static_cast<double>(c.u(1, 0)) + 1.0 / 3) < 1e-17);
    CHECK(std::abs(static_cast<double>(c.u(2, 0)) - 1.0 / 15) < 1e-17);
}

TEST_CASE("parametrix: normalization and the n = -1 shift") {
    const ParametrixCoeffs& c0 = build_parametrix(0, 2);
    const ParametrixCoeffs& cm = build_parametrix(-1, 2);
    CHECK(std::abs(static_cast<double>(c0.diag[0]) - 1 / (2 * kPi)) < 1e-17);
    CHECK(c0.diag[0] == cm.diag[0]);
    const double shift = static_cast<double>(cm.diag[1] - c0.diag[1]);
    CHECK(std::abs(shift + 1 / (4 * kPi)) < 1e-15);
    // Independent finite-difference integration of the transport equation.
    for (double r : {0.1, 0.3, 0.6, 0.9}) {
        for (int n : {0, -1, -2}) {
            const ParametrixCoeffs& c = build_parametrix(n, 1);
            CHECK(std::abs(static_cast<double>(c.u(1, r)) - u1_fd(r, n)) < 1e-8);
            const double phi1 = (u1_fd(r, n) / 2 + 0.5 * n * u0(r)) / (2 * kPi);
            CHECK(std::abs(static_cast<double>(c.phi(1, r)) - phi1) < 1e-8);
        }
    }
    const double r = 1e-3;
    const double fd_shift = ((u1_fd(r, -1) - u1_fd(r, 0)) / 2 - 0.5 * u0(r)) / (2 * kPi);
    CHECK(std::abs(fd_shift + 1 / (4 * kPi)) < 1e-6);
}

TEST_CASE("parametrix: profiles are smooth on [0, 1]") {
    const ParametrixCoeffs& c = build_parametrix(-2, 6);
    const long double h = 1e-3L;
    for (int i = 0; i <= 6; ++i) {
        for (int j = 1; j < 100; ++j) {
            const long double r = 0.01L * j;
            const long double d2 = (c.phi(i, r + h) - 2 * c.phi(i, r) + c.phi(i, r - h)) / (h * h);
            CHECK(std::isfinite(static_cast<double>(d2)));
            CHECK(std::abs(static_cast<double>(d2)) < 10.0);
        }
    }
    CHECK_THROWS_AS(build_parametrix(0, 7), UnsupportedError);
}

TEST_CASE("parametrix: defect order on the diagonal") {
    struct Window {
        int k;
        double lo, hi;
    };
    for (const Window& w : {Window{1, 1e-4, 1e-2}, Window{2, 1e-4, 1e-2}, Window{3, 1e-2, 1e-1}}) {
        const ParametrixCoeffs& c = build_parametrix(0, w.k);
        std::vector<double> lx, ly;
        for (int j = 0; j <= 12; ++j) {
            const long double t = w.lo * std::pow(w.hi / w.lo, j / 12.0);
            const long double D = std::abs(exact_kernel_diag_ld(t) - parametrix_diag_ld(c, t));
            lx.push_back(std::log(static_cast<double>(t)));
            ly.push_back(std::log(static_cast<double>(D)));
        }
        const double s = slope(lx, ly);
        MESSAGE("k = " << w.k << " slope " << s);
        CHECK(s >= w.k - 0.1);
        if (w.k == 2) CHECK(std::abs(s - 2.0) <= 0.1);
    }
}

TEST_CASE("parametrix: off-diagonal agreement inside the cutoff core") {
    const ParametrixCoeffs& c = build_parametrix(0, 4);
    for (double t : {1e-3, 1e-2}) {
        for (int i = 0; i <= 14; ++i) {
            const double d = 0.05 * i;
            const double ex = exact_kernel_H_n0(t, d);
            if (ex < 1e-250) continue;
            CHECK(rel(parametrix_kernel(c, t, d), ex) < 1e-9);
        }
    }
    CHECK(parametrix_kernel(c, 0.1, 1.0) == 0.0);
}

TEST_CASE("diagonal_small_time coefficients") {
    // a_{-1} from a small-t fit of the exact diagonal: t k(t, 0) = a + b t + O(t^2).
    const double t1 = 1e-4, t2 = 2e-4;
    const double f1 = t1 * exact_kernel_H_n0(t1, 0), f2 = t2 * exact_kernel_H_n0(t2, 0);
    const double a_fit = 2 * f1 - f2;
    const auto a = diagonal_small_time(CuspPoint::polar(std::exp(-2.0), 0.0), 0, 3);
    REQUIRE(a.size() == 5);
    CHECK(std::abs(a[0] - a_fit) < 1e-8);
    CHECK(std::abs(a[0] - 1 / (2 * kPi)) < 1e-16);
    const auto b = diagonal_small_time(CuspPoint::polar(std::exp(-5.0), 1.0), 0, 3);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-10);
    CHECK_THROWS_AS(diagonal_small_time(CuspPoint::polar(0.5, 0), 0, 6), UnsupportedError);
    CHECK_THROWS_AS(diagonal_small_time(CuspPoint{1.5, 0}, 0, 2), DomainError);
}

TEST_CASE("cusp kernel: rotation invariance, symmetry, positivity") {
    for (double t : {0.05, 0.5, 3.0}) {
        for (double l : {0.3, 2.0, 6.0}) {
            const double r = std::exp(-l);
            const auto v0 = cusp_kernel(t, CuspPoint::polar(r, 0), CuspPoint::polar(r, 0), 0, 1e-12);
            CHECK(v0.value > 0);
            for (double a : {kPi / 3, kPi}) {
                const auto v = cusp_kernel(t, CuspPoint::polar(r, a), CuspPoint::polar(r, a), 0, 1e-12);
                CHECK(std::abs(v.value - v0.value) <= v.trunc_err + v0.trunc_err + 1e-14 * v0.value);
            }
            const CuspPoint p = CuspPoint::polar(r, 0.4), q = CuspPoint::polar(std::sqrt(r), 2.9);
            const auto pq = cusp_kernel(t, p, q, 0, 1e-12), qp = cusp_kernel(t, q, p, 0, 1e-12);
            CHECK(pq.value > 0);
            CHECK(std::abs(pq.value - qp.value) < 1e-12);
        }
    }
}

TEST_CASE("cusp kernel: semigroup identity") {
    const CuspPoint u = CuspPoint::polar(std::exp(-2.0), 0.7);
    const double lhs = semigroup_integral(0.5, u, Exec::parallel);
    const double rhs = cusp_kernel(1.0, u, u, 0, 1e-14).value;
    CHECK(rel(lhs, rhs) < 1e-4);
    CHECK(std::abs(semigroup_integral(0.5, u, Exec::serial) - lhs) < 1e-14 * rhs);
}

TEST_CASE("cusp kernel: deck tail certification") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> lt(std::log(0.05), std::log(5.0)), ll(0.2, 8.0), ua(0, 2 * kPi);
    for (int c = 0; c < 100; ++c) {
        const double t = std::exp(lt(rng));
        const CuspPoint u1 = CuspPoint::polar(std::exp(-ll(rng)), ua(rng));
        const CuspPoint u2 = CuspPoint::polar(std::exp(-ll(rng)), ua(rng));
        const auto v = cusp_kernel(t, u1, u2, 0, 1e-10);
        CHECK(v.trunc_err < 1e-10);
        const long I = (v.trunc_terms - 1) / 2;
        const long J = 10 * std::max<long>(I, 1);
        HPoint z1 = lift(u1), z2 = lift(u2);
        z2.x = z1.x - reduce_dx(z1.x - z2.x);
        KahanSum ext;
        for (long i = -J; i <= J; ++i) ext.add(exact_kernel_H_n0(t, deck_distance(z1, z2, i)));
        CHECK(std::abs(ext.value() - v.value) <= v.trunc_err);
    }
}

TEST_CASE("cusp kernel: Moser-type envelope on a held-out grid") {
    auto val = [](double t, double l) {
        const CuspPoint u = CuspPoint::polar(std::exp(-l), 0.0);
        return cusp_kernel(t, u, u, 0, 1e-12).value * t / (rho_weight(u) * rho_weight(u));
    };
    // Fit ln(value t / rho^2) <= ln C + c t on the fit grid.
    std::vector<double> ts, ys;
    for (double l : {0.5, 2.0, 8.0, 20.0})
        for (double t : {0.02, 0.2, 1.0, 3.0}) {
            ts.push_back(t);
            ys.push_back(std::log(val(t, l)));
        }
    const double c = std::max(0.0, slope(ts, ys));
    double lnC = -1e300;
    for (std::size_t i = 0; i < ts.size(); ++i) lnC = std::max(lnC, ys[i] - c * ts[i]);
    lnC += std::log(1.5);
    for (double l : {0.3, 1.1, 4.0, 12.0, 40.0})
        for (double t : {0.01, 0.07, 0.5, 2.0, 4.0}) CHECK(std::log(val(t, l)) <= lnC + c * t);
}

TEST_CASE("cusp kernel: remainder of the small-time expansion") {
    const double l = 10.0;
    const CuspPoint u = CuspPoint::polar(std::exp(-l), 0.0);
    const int k = 2;
    const auto a = diagonal_small_time(u, 0, k);
    auto remainder = [&](double t) {
        double s = 0;
        for (int j = -1; j <= k; ++j) s += a[j + 1] * std::pow(t, j);
        return std::abs(cusp_kernel(t, u, u, 0, 1e-13).value - s);
    };
    // c' from the shortest deck orbit, loosened by 10 %.
    const double d1 = orbit_separation(u);
    const double cp = 0.9 * 0.5 * d1 * d1 * l * l;
    auto shape = [&](double t) { return std::pow(t, k) + std::exp(-cp / (t * l * l)) / t; };
    double C = 0;
    for (int j = 0; j <= 10; ++j) {
        const double t = 1e-3 * std::pow(100.0, j / 10.0);
        C = std::max(C, remainder(t) / shape(t));
    }
    C *= 1.5;
    for (int j = 0; j < 10; ++j) {
        const double t = 1e-3 * std::pow(100.0, (j + 0.5) / 10.0);
        CHECK(remainder(t) <= C * shape(t));
    }
}

TEST_CASE("cusp kernel: twisted parametrix and valid-time policy") {
    const CuspPoint u = CuspPoint::polar(std::exp(-1.0), 0.2);
    const ParametrixCoeffs& c = build_parametrix(-1, kMaxParametrixOrder);
    const double t = 0.02;
    const auto v = cusp_kernel(t, u, u, -1, 1e-6);
    CHECK(v.trunc_terms == 1);
    CHECK(std::abs(v.value - static_cast<double>(parametrix_diag_ld(c, t))) < 1e-12 * v.value);
    CHECK(v.trunc_err < 1e-6);
    CHECK(std::abs(v.imag) < 1e-15);
    const double tmax = valid_t_max(-1, kMaxParametrixOrder, 1e-6, 1.0);
    CHECK(tmax > 0.02);
    CHECK_THROWS_AS(cusp_kernel(10.0 * tmax + 1.0, u, u, -1, 1e-6), RangeError);
    // Deep in the cusp several deck terms enter with a phase.
    const CuspPoint w = CuspPoint::polar(std::exp(-12.0), 0.0);
    const auto vw = cusp_kernel(0.01, w, w, -1, 1e-6);
    CHECK(vw.trunc_terms > 1);
    CHECK(std::abs(vw.imag) < 1e-12 * std::abs(vw.value));
}

TEST_CASE("cusp kernel: large-time deck sum against a long direct sum") {
    // Oracle: 2 * 20000 direct terms plus a midpoint-rule integral for the rest.
    for (double t : {5.0, 30.0}) {
        for (double y : {3.0, 10.0}) {
            const long N = 20000;
            auto f = [&](double x) {
                const double q = (2 * kPi * x) * (2 * kPi * x) / (2 * y * y);
                const double d = q < 1e8 ? std::acosh(1 + q) : std::log(2 * q) + 1 / q;
                return exact_kernel_H_n0(t, d);
            };
            double s = exact_kernel_H_n0(t, 0.0);
            for (long i = 1; i <= N; ++i) s += 2 * f(static_cast<double>(i));
            const double a = N + 0.5;
            const double tail = integrate_to_inf([&](double u) { return u > 300 ? 0.0 : f(std::exp(u)) * std::exp(u); }, std::log(a), 1e-13);
            const double h = 1e-2 * a;
            s += 2 * (tail + (f(a + h) - f(a - h)) / (2 * h) / 24);
            const auto v = cusp_diagonal_height(t, y, 1e-14 * exact_kernel_H_n0(t, 0.0));
            CHECK_MESSAGE(rel(v.value, s) < 1e-10, "t=", t, " y=", y, " rel=", rel(v.value, s));
            CHECK(v.trunc_err < 1e-10 * v.value);
        }
    }
}
