// SPDX-License-Identifier: Apache-2.0
// Exact McKean kernel, transport-recursion parametrix and deck sums on the cusp.
#include "ct/heat_kernel.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>

#include "ct/errors.hpp"
#include "ct/quadrature.hpp"
#include "ct/smooth_step.hpp"

namespace ct {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------- McKean

// ln p_tau(rho) + rho^2 / (4 tau), from
// p = sqrt2 e^{-tau/4} (4 pi tau)^{-3/2} int_rho^inf s e^{-s^2/4tau} / sqrt(cosh s - cosh rho) ds
// with s = rho + x^2 and the factor e^{-rho/2} pulled out of the integral.
double log_mckean_shifted(double tau, double rho) {
    auto f = [&](double x) {
        const double q = x * x;
        const double a = rho + 0.5 * q;
        const double y = 0.5 * q;
        const double da = -std::expm1(-2.0 * a) * 0.5;
        const double dy = y > 1e-300 ? -std::expm1(-2.0 * y) / (2.0 * y) : 1.0;
        const double ex = (2.0 * rho * q + q * q) / (4.0 * tau) + y;
        return 2.0 * (rho + q) * std::exp(-ex) / std::sqrt(da * dy);
    };
    const double b = rho / (2.0 * tau) + 0.5;
    const double q70 = 2.0 * tau * (-b + std::sqrt(b * b + 70.0 / tau));
    const double X = std::sqrt(q70);
    double J = 0;
    const double split = std::min(X, 4.0 * std::sqrt(rho + tau));
    J += integrate(f, 0.0, split, 1e-12);
    if (X > split) J += integrate(f, split, X, 1e-12);
    return 0.5 * std::log(2.0) - tau / 4.0 - 1.5 * std::log(4.0 * kPi * tau) - rho / 2.0 + std::log(J);
}

double table_rmax(double t) {
    const double tau = 0.5 * t;
    return -tau + std::sqrt(tau * tau + 3040.0 * tau);
}

constexpr int kDeg = 16;

struct Panel {
    double a = 0, b = 0;
    std::array<double, kDeg + 1> c{};
};

struct KernelTable {
    double t = 0;
    double rmax = 0;
    std::vector<Panel> panels;

    double eval_shifted(double r) const {
        std::size_t idx = r < 4.0 ? static_cast<std::size_t>(r / 0.5) : 8 + static_cast<std::size_t>((r - 4.0) / 4.0);
        if (idx >= panels.size()) idx = panels.size() - 1;
        const Panel& p = panels[idx];
        const double x = (2.0 * r - p.a - p.b) / (p.b - p.a);
        double b1 = 0, b2 = 0;
        for (int k = kDeg; k >= 1; --k) {
            const double b0 = 2.0 * x * b1 - b2 + p.c[k];
            b2 = b1;
            b1 = b0;
        }
        return x * b1 - b2 + p.c[0];
    }
};

std::shared_ptr<const KernelTable> build_table(double t) {
    auto tab = std::make_shared<KernelTable>();
    tab->t = t;
    tab->rmax = table_rmax(t);
    const double tau = 0.5 * t;
    std::vector<double> edges;
    for (double e = 0; e < 4.0 - 1e-12; e += 0.5) edges.push_back(e);
    for (double e = 4.0;; e += 4.0) {
        edges.push_back(e);
        if (e >= tab->rmax) break;
    }
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        Panel p;
        p.a = edges[i];
        p.b = edges[i + 1];
        std::array<double, kDeg + 1> f{};
        constexpr int N = kDeg + 1;
        for (int j = 0; j < N; ++j) {
            const double x = std::cos(kPi * (j + 0.5) / N);
            const double r = 0.5 * (p.a + p.b) + 0.5 * (p.b - p.a) * x;
            f[j] = log_mckean_shifted(tau, r);
        }
        for (int k = 0; k < N; ++k) {
            double s = 0;
            for (int j = 0; j < N; ++j) s += f[j] * std::cos(kPi * k * (j + 0.5) / N);
            p.c[k] = 2.0 * s / N;
        }
        p.c[0] *= 0.5;
        tab->panels.push_back(p);
        if (edges[i + 1] >= tab->rmax) break;
    }
    return tab;
}

std::shared_ptr<const KernelTable> table_for(double t) {
    static std::shared_mutex mu;
    static std::map<double, std::shared_ptr<const KernelTable>> cache;
    {
        std::shared_lock lk(mu);
        auto it = cache.find(t);
        if (it != cache.end()) return it->second;
    }
    auto tab = build_table(t);
    std::unique_lock lk(mu);
    if (cache.size() > 4096) cache.clear();
    cache.emplace(t, tab);
    return tab;
}

void check_time(double t) {
    if (!(t > 0) || !std::isfinite(t)) throw DomainError("heat kernel: t must be positive and finite");
}

// ---------------------------------------------------------------- series in s = r^2

constexpr int kTerms = 40;
using Series = std::vector<long double>;

Series mul(const Series& a, const Series& b) {
    Series c(kTerms, 0.0L);
    for (int i = 0; i < kTerms; ++i)
        for (int j = 0; i + j < kTerms; ++j) c[i + j] += a[i] * b[j];
    return c;
}

Series recip(const Series& a) {
    Series b(kTerms, 0.0L);
    b[0] = 1.0L / a[0];
    for (int m = 1; m < kTerms; ++m) {
        long double s = 0;
        for (int j = 1; j <= m; ++j) s += a[j] * b[m - j];
        b[m] = -s / a[0];
    }
    return b;
}

Series sqrt_series(const Series& a) {
    Series b(kTerms, 0.0L);
    b[0] = std::sqrt(a[0]);
    for (int m = 1; m < kTerms; ++m) {
        long double s = a[m];
        for (int j = 1; j < m; ++j) s -= b[j] * b[m - j];
        b[m] = s / (2.0L * b[0]);
    }
    return b;
}

Series deriv(const Series& a) {
    Series b(kTerms, 0.0L);
    for (int m = 0; m + 1 < kTerms; ++m) b[m] = (m + 1) * a[m + 1];
    return b;
}

long double horner(const Series& a, long double s) {
    long double v = 0;
    for (int m = kTerms - 1; m >= 0; --m) v = v * s + a[m];
    return v;
}

ParametrixCoeffs build_unchecked(int n, int k) {
    ParametrixCoeffs pc;
    pc.n = n;
    pc.k = k;
    Series j(kTerms), ch(kTerms);
    long double fact = 1;  // (2m)!
    for (int m = 0; m < kTerms; ++m) {
        if (m > 0) fact *= (2.0L * m - 1) * (2.0L * m);
        ch[m] = 1.0L / fact;
        j[m] = 1.0L / (fact * (2.0L * m + 1));
    }
    const Series rc = mul(ch, recip(j));  // r coth r
    Series chm1 = ch, chp1 = ch;
    chm1[0] -= 1.0L;
    chp1[0] += 1.0L;
    Series V = mul(chm1, recip(chp1));  // tanh^2(r/2)
    for (auto& v : V) v *= static_cast<long double>(n) * n;
    const Series jh = sqrt_series(j);
    const Series ijh = recip(jh);

    pc.transport.push_back(ijh);
    for (int a = 1; a <= k; ++a) {
        const Series& u = pc.transport.back();
        const Series u1 = deriv(u);
        const Series u2 = deriv(u1);
        const Series rcu1 = mul(rc, u1);
        const Series Vu = mul(V, u);
        Series Hu(kTerms, 0.0L);
        for (int m = 0; m < kTerms; ++m) {
            const long double su2 = m > 0 ? u2[m - 1] : 0.0L;
            Hu[m] = -(4.0L * su2 + 2.0L * u1[m] + 2.0L * rcu1[m]) + Vu[m];
        }
        Series g = mul(jh, Hu);
        for (int m = 0; m < kTerms; ++m) g[m] /= (2.0L * m + a);
        Series ua = mul(ijh, g);
        for (auto& v : ua) v = -v;
        pc.transport.push_back(ua);
    }
    const long double half_n = 0.5L * n;
    const long double inv2pi = 1.0L / (2.0L * std::numbers::pi_v<long double>);
    for (int i = 0; i <= k; ++i) {
        Series phi(kTerms, 0.0L);
        long double bf = 1;  // (n/2)^b / b!
        for (int b = 0; b <= i; ++b) {
            if (b > 0) bf *= half_n / b;
            const int a = i - b;
            const long double w = bf * std::ldexp(1.0L, -a) * inv2pi;
            for (int m = 0; m < kTerms; ++m) phi[m] += w * pc.transport[a][m];
        }
        pc.diag.push_back(phi[0]);
        pc.profiles.push_back(std::move(phi));
    }
    return pc;
}

const ParametrixCoeffs& cached_parametrix(int n, int k) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::unique_ptr<ParametrixCoeffs>> cache;
    std::lock_guard lk(mu);
    auto& slot = cache[{n, k}];
    if (!slot) slot = std::make_unique<ParametrixCoeffs>(build_unchecked(n, k));
    return *slot;
}

long double parametrix_series_diag(const ParametrixCoeffs& c, long double t, int order) {
    long double s = 0, tp = 1;
    for (int i = 0; i <= order; ++i) {
        s += tp * c.diag[i];
        tp *= t;
    }
    return s / t;
}

// ---------------------------------------------------------------- deck helpers

struct Lifted {
    HPoint z1, z2;  // z1.x - z2.x in [-pi, pi]
};

Lifted lift_pair(CuspPoint u1, CuspPoint u2) {
    Lifted L;
    L.z1 = lift(u1);
    L.z2 = lift(u2);
    L.z2.x = L.z1.x - reduce_dx(L.z1.x - L.z2.x);
    return L;
}

// Lower bound for d(z1, z2 + 2 pi i), |i| >= 1, with |dx| <= pi.
double deck_lower(double Y, double x) {
    const double a = 2.0 * kPi * x - kPi;
    return std::acosh(1.0 + a * a / (2.0 * Y));
}

long find_truncation(HPoint z1, HPoint z2, double t, double eps) {
    if (kernel_deck_tail(z1, z2, t, 0) < eps) return 0;
    long hi = 1;
    while (kernel_deck_tail(z1, z2, t, hi) >= eps) {
        hi *= 2;
        if (hi > (1L << 30)) throw RangeError("cusp_kernel: deck truncation did not converge");
    }
    long lo = hi / 2;
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (kernel_deck_tail(z1, z2, t, mid) < eps)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double deck_sum_n0(const Lifted& L, double t, long I, Exec ex) {
    const std::size_t cnt = static_cast<std::size_t>(2 * I + 1);
    auto terms = parallel_map(ex, cnt, [&](std::size_t j) {
        const long i = static_cast<long>(j) - I;
        return exact_kernel_H_n0(t, deck_distance(L.z1, L.z2, i));
    });
    return stable_sum(terms);
}

// Direct terms kept before the remaining deck terms are summed by Euler-Maclaurin.
constexpr long kDirectDeckTerms = 1024;

// Distance from z1 to z2 + 2 pi x for real x > 0 on one side (sign = +1 or -1), from s = ln x.
double deck_distance_log(const Lifted& L, double s, int sign) {
    const double dy = L.z1.y - L.z2.y;
    const double rel = sign * (L.z1.x - L.z2.x) * std::exp(-s) / (2.0 * kPi);
    // ln(dx^2 + dy^2) with dx = 2 pi e^s (1 - rel), dy^2 negligible once e^s is large.
    double lnd2;
    if (s < 30.0) {
        const double dx = 2.0 * kPi * std::exp(s) * (1.0 - rel);
        lnd2 = std::log(dx * dx + dy * dy);
    } else {
        lnd2 = 2.0 * (std::log(2.0 * kPi) + s + std::log1p(-rel));
    }
    const double lnq = lnd2 - std::log(2.0 * L.z1.y * L.z2.y);
    if (lnq < 18.0) return std::acosh(1.0 + std::exp(lnq));
    return std::log(2.0) + lnq + std::exp(-lnq);
}

// sum_{i > J} f(i) on one side via the midpoint Euler-Maclaurin form
// int_{J+1/2}^inf f + f'(J+1/2)/24; err gets the size of the next correction.
double deck_tail_em(const Lifted& L, double t, long J, int sign, double* err) {
    auto f = [&](double x) { return exact_kernel_H_n0(t, deck_distance_log(L, std::log(x), sign)); };
    const double a = J + 0.5;
    double qerr = 0;
    const double integral = integrate_to_inf(
        [&](double s) {
            const double k = exact_kernel_H_n0(t, deck_distance_log(L, s, sign));
            return k == 0.0 ? 0.0 : k * std::exp(s);
        },
        std::log(a), 1e-13, &qerr);
    const double h = 1e-2 * a;
    const double d1 = (f(a + h) - f(a - h)) / (2 * h);
    const double d3 = (f(a + 2 * h) - 2 * f(a + h) + 2 * f(a - h) - f(a - 2 * h)) / (2 * h * h * h);
    if (err) *err = qerr + std::abs(7.0 / 5760.0 * d3) + 1e-4 * std::abs(d1) / 24.0;
    return integral + d1 / 24.0;
}

// n = 0 deck sum to absolute accuracy eps; returns the number of direct terms used.
long deck_sum_n0_eps(const Lifted& L, double t, double eps, Exec ex, double& value, double& err) {
    if (kernel_deck_tail(L.z1, L.z2, t, kDirectDeckTerms) < eps) {
        const long I = find_truncation(L.z1, L.z2, t, eps);
        value = deck_sum_n0(L, t, I, ex);
        err = kernel_deck_tail(L.z1, L.z2, t, I);
        return 2 * I + 1;
    }
    double ep = 0, em = 0;
    const double tail = deck_tail_em(L, t, kDirectDeckTerms, +1, &ep) + deck_tail_em(L, t, kDirectDeckTerms, -1, &em);
    value = deck_sum_n0(L, t, kDirectDeckTerms, ex) + tail;
    err = ep + em;
    return 2 * kDirectDeckTerms + 1;
}

}  // namespace

// ---------------------------------------------------------------- public API

double mckean_kernel(double tau, double rho) {
    if (!(tau > 0)) throw DomainError("mckean_kernel: tau must be positive");
    if (!(rho >= 0)) throw DomainError("mckean_kernel: rho must be nonnegative");
    return std::exp(log_mckean_shifted(tau, rho) - rho * rho / (4.0 * tau));
}

double exact_kernel_direct(double t, double r) {
    check_time(t);
    return mckean_kernel(0.5 * t, std::abs(r));
}

double exact_kernel_H_n0(double t, double r) {
    check_time(t);
    r = std::abs(r);
    auto tab = table_for(t);
    if (r >= tab->rmax) return 0.0;
    return std::exp(tab->eval_shifted(r) - r * r / (2.0 * t));
}

long double exact_kernel_diag_ld(long double t) {
    if (!(t > 0)) throw DomainError("exact_kernel_diag_ld: t must be positive");
    const long double tau = 0.5L * t;
    const long double st = std::sqrt(tau);
    auto f = [&](long double v) {
        const long double x = st * v;
        long double q;
        if (x < 1e-4L)
            q = 1.0L / (st * (1.0L + x * x / 6.0L + x * x * x * x / 120.0L));
        else
            q = v / std::sinh(x);
        return std::exp(-v * v) * q;
    };
    const long double I = integrate<decltype(f)&, long double>(f, 0.0L, 12.0L, 1e-19L);
    const long double pi = std::numbers::pi_v<long double>;
    return std::exp(-tau / 4.0L) * 4.0L * tau / std::pow(4.0L * pi * tau, 1.5L) * I;
}

double calibrate_gaussian_scale(double t) {
    // Fit ln(2 pi t k / u0) = -x / sigma + b with x = r^2 / (2t).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int i = 1; i <= 20; ++i) {
        const double r = 0.05 * i;
        const double u0 = std::sqrt(r / std::sinh(r));
        const double y = std::log(2.0 * kPi * t * exact_kernel_direct(t, r) / u0);
        const double x = r * r / (2.0 * t);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return -1.0 / slope;
}

const ParametrixCoeffs& build_parametrix(int n, int k) {
    if (k < 0) throw DomainError("build_parametrix: k must be nonnegative");
    if (k > kMaxParametrixOrder)
        throw UnsupportedError("build_parametrix: order k = " + std::to_string(k) + " exceeds " +
                               std::to_string(kMaxParametrixOrder));
    return cached_parametrix(n, k);
}

long double ParametrixCoeffs::phi(int i, long double r) const {
    if (i < 0 || i > k) throw DomainError("ParametrixCoeffs::phi: index out of range");
    return horner(profiles[static_cast<std::size_t>(i)], r * r);
}

long double ParametrixCoeffs::u(int a, long double r) const {
    if (a < 0 || a > k) throw DomainError("ParametrixCoeffs::u: index out of range");
    return horner(transport[static_cast<std::size_t>(a)], r * r);
}

double parametrix_kernel(const ParametrixCoeffs& c, double t, double d) {
    check_time(t);
    d = std::abs(d);
    const double s = d * d;
    if (s >= 1.0) return 0.0;
    const double cut = smooth_step(StepKind::psi, s);
    long double sum = 0, tp = 1;
    for (int i = 0; i <= c.k; ++i) {
        sum += tp * c.phi(i, d);
        tp *= t;
    }
    return static_cast<double>(cut * std::exp(-s / (2.0 * t)) * sum / t);
}

long double parametrix_diag_ld(const ParametrixCoeffs& c, long double t) {
    if (!(t > 0)) throw DomainError("parametrix_diag_ld: t must be positive");
    return parametrix_series_diag(c, t, c.k);
}

double kernel_deck_tail(HPoint z1, HPoint z2, double t, long I) {
    check_time(t);
    const double Y = z1.y * z2.y;
    const double rmax = table_rmax(t);
    constexpr long kDirect = 64;
    KahanSum s;
    const long start = std::max<long>(I, 0) + 1;
    for (long i = start; i < start + kDirect; ++i) s.add(exact_kernel_H_n0(t, deck_lower(Y, static_cast<double>(i))));
    // sum_{i >= J} f(i) <= f(J) + int_J^inf f, with x(l) = (pi + 2 sqrt(Y) sinh(l/2)) / (2 pi).
    const double J = static_cast<double>(start + kDirect);
    const double lJ = deck_lower(Y, J);
    s.add(exact_kernel_H_n0(t, lJ));
    if (lJ < rmax) {
        auto g = [&](double l) { return exact_kernel_H_n0(t, l) * std::sqrt(Y) * std::cosh(0.5 * l) / (2.0 * kPi); };
        static const auto gl = gauss_legendre<double, 10>();
        const double w = std::min(0.5, 0.5 * std::sqrt(t));
        KahanSum acc;
        for (double a = lJ; a < rmax; a += w) {
            double p = 0;
            for (std::size_t q = 0; q < gl.x.size(); ++q) p += gl.w[q] * g(a + 0.5 * w * (gl.x[q] + 1.0));
            p *= 0.5 * w;
            acc.add(p);
            // Past the maximum of g the remaining panels decay faster than geometrically.
            if (a > 0.5 * t + 1.0 && p <= 1e-18 * acc.value()) break;
        }
        s.add(acc.value());
    }
    return 2.0 * s.value();
}

double defect_constant(int k, double t_lo, double t_hi) {
    static std::mutex mu;
    static std::map<std::tuple<int, double, double>, double> cache;
    {
        std::lock_guard lk(mu);
        auto it = cache.find({k, t_lo, t_hi});
        if (it != cache.end()) return it->second;
    }
    const ParametrixCoeffs& c = cached_parametrix(0, k);
    double C = 0;
    constexpr int N = 40;
    for (int j = 0; j <= N; ++j) {
        const long double t = t_lo * std::pow(t_hi / t_lo, static_cast<double>(j) / N);
        const long double D = std::abs(exact_kernel_diag_ld(t) - parametrix_series_diag(c, t, k));
        C = std::max(C, static_cast<double>(D / std::pow(t, static_cast<long double>(k))));
    }
    std::lock_guard lk(mu);
    cache[{k, t_lo, t_hi}] = C;
    return C;
}

double parametrix_error_bound(int n, int k, double t, double y) {
    check_time(t);
    if (k > kMaxParametrixOrder) throw UnsupportedError("parametrix_error_bound: order too large");
    const HPoint z{0.0, y};
    const long mult = std::max<long>(1, deck_ball_count(z, z, 1.0));
    const ParametrixCoeffs& next = cached_parametrix(n, k + 1);
    const double C = std::max(defect_constant(k), 2.0 * std::abs(static_cast<double>(next.diag[k + 1])));
    const double model = 10.0 * C * std::pow(t, k) * static_cast<double>(mult);
    // Deck terms outside the core region, majorized by the n = 0 kernel.
    const long I = find_truncation(z, z, t, 1e-300 + 1e-3 * model);
    KahanSum outside;
    for (long i = -I; i <= I; ++i) {
        const double d = deck_distance(z, z, i);
        if (d >= std::sqrt(0.5)) outside.add(exact_kernel_H_n0(t, d));
    }
    const double cutoff = std::exp(0.5 * n * t) * (outside.value() + kernel_deck_tail(z, z, t, I));
    return model + cutoff;
}

double valid_t_max(int n, int k, double eps, double y) {
    double best = 0;
    constexpr int N = 120;
    for (int j = 0; j <= N; ++j) {
        const double t = 1e-3 * std::pow(1e4, static_cast<double>(j) / N);
        if (parametrix_error_bound(n, k, t, y) < eps)
            best = t;
        else
            break;
    }
    return best;
}

CuspKernelValue cusp_kernel(double t, CuspPoint u1, CuspPoint u2, int n, double eps, Exec ex) {
    check_time(t);
    if (!(eps > 0)) throw DomainError("cusp_kernel: eps must be positive");
    CuspKernelValue out;
    out.t = t;
    out.u1 = u1;
    out.u2 = u2;
    const Lifted L = lift_pair(u1, u2);
    if (n == 0) {
        out.trunc_terms = deck_sum_n0_eps(L, t, eps, ex, out.value, out.trunc_err);
        return out;
    }
    const int k = kMaxParametrixOrder;
    const double y = std::sqrt(L.z1.y * L.z2.y);
    const double bound = parametrix_error_bound(n, k, t, y);
    if (!(bound < eps)) {
        throw RangeError("cusp_kernel: t = " + std::to_string(t) + " outside the valid range for n = " + std::to_string(n) +
                         " (error bound " + std::to_string(bound) + ", valid up to t = " +
                         std::to_string(valid_t_max(n, k, eps, y)) + ")");
    }
    const ParametrixCoeffs& c = cached_parametrix(n, k);
    const long I = deck_ball_count(L.z1, L.z2, 1.0) + 1;
    KahanSum re, im;
    long used = 0;
    const std::complex<double> z1(L.z1.x, L.z1.y);
    for (long i = -I; i <= I; ++i) {
        const double d = deck_distance(L.z1, L.z2, i);
        if (d >= 1.0) continue;
        const std::complex<double> w(L.z2.x + 2.0 * kPi * static_cast<double>(i), L.z2.y);
        const double da = std::arg((z1 - std::conj(w)) / (w - std::conj(z1)));
        const double v = parametrix_kernel(c, t, d);
        re.add(v * std::cos(n * da));
        im.add(v * std::sin(n * da));
        ++used;
    }
    out.value = re.value();
    out.imag = im.value();
    out.trunc_err = bound;
    out.trunc_terms = used;
    return out;
}

CuspKernelValue cusp_diagonal_height(double t, double y, double eps, Exec ex) {
    check_time(t);
    if (!(y > 0) || !std::isfinite(y)) throw DomainError("cusp_diagonal_height: y must be positive and finite");
    if (!(eps > 0)) throw DomainError("cusp_diagonal_height: eps must be positive");
    const Lifted L{{0.0, y}, {0.0, y}};
    CuspKernelValue out;
    out.t = t;
    out.trunc_terms = deck_sum_n0_eps(L, t, eps, ex, out.value, out.trunc_err);
    return out;
}

double semigroup_integral(double t, CuspPoint u, Exec ex, int nx) {
    check_time(t);
    const HPoint zu = lift(u);
    // Radius beyond which k(t, .) < 1e-18 k(t, 0).
    const double k0 = exact_kernel_H_n0(t, 0.0);
    double lo = 0, hi = table_rmax(t);
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (exact_kernel_H_n0(t, mid) < 1e-18 * k0 ? hi : lo) = mid;
    }
    const double dmax = hi;
    auto kern = [&](HPoint w) {
        HPoint a = zu;
        HPoint b = w;
        b.x = a.x - reduce_dx(a.x - b.x);
        const double Y = a.y * b.y;
        const long I = static_cast<long>(std::ceil((kPi + 2.0 * std::sqrt(Y) * std::sinh(0.5 * dmax)) / (2.0 * kPi)));
        KahanSum s;
        for (long i = -I; i <= I; ++i) s.add(exact_kernel_H_n0(t, deck_distance(a, b, i)));
        return s.value();
    };
    const auto gl = gauss_legendre<double, 10>();
    const double v0 = std::log(zu.y) - dmax;
    const double v1 = std::log(zu.y) + dmax;
    const int panels = static_cast<int>(std::ceil((v1 - v0) / 0.25));
    const double pw = (v1 - v0) / panels;
    const std::size_t nv = static_cast<std::size_t>(panels) * gl.x.size();
    auto rows = parallel_map(ex, nv, [&](std::size_t idx) {
        const std::size_t p = idx / gl.x.size();
        const std::size_t q = idx % gl.x.size();
        const double v = v0 + pw * (static_cast<double>(p) + 0.5 * (gl.x[q] + 1.0));
        const double y = std::exp(v);
        KahanSum row;
        for (int j = 0; j < nx; ++j) {
            const double k = kern({2.0 * kPi * j / nx, y});
            row.add(k * k);
        }
        // dv = dx dy / y^2 = dx dv / y
        return row.value() * (2.0 * kPi / nx) / y * 0.5 * pw * gl.w[q];
    });
    return stable_sum(rows);
}

std::vector<double> diagonal_small_time(CuspPoint u, int n, int k) {
    const double a = u.abs();
    if (!(a > 0 && a < 1)) throw DomainError("diagonal_small_time: need 0 < |u| < 1");
    if (k < -1) throw DomainError("diagonal_small_time: k must be >= -1");
    if (k + 1 > kMaxParametrixOrder) throw UnsupportedError("diagonal_small_time: k <= 5 supported");
    const ParametrixCoeffs& c = cached_parametrix(n, k + 1);
    std::vector<double> out;
    for (int j = 0; j <= k + 1; ++j) out.push_back(static_cast<double>(c.diag[j]));
    return out;
}

}  // namespace ct
