#include <cmath>
#include <numbers>
#include <random>

#include "ct/errors.hpp"
#include "ct/hyp_geometry.hpp"
#include "ct/quadrature.hpp"
#include "doctest.h"

using namespace ct;
constexpr double kPi = std::numbers::pi;

namespace {

// Length of the geodesic through two points at equal height: the circle
// centered at (0, 0) with radius R, integrated as ds = R dphi / (R sin phi).
double geodesic_length_equal_height(double x1, double x2, double y) {
    double c = (x1 + x2) / 2;
    double p1 = std::atan2(y, x2 - c), p2 = std::atan2(y, x1 - c);
    return integrate([](double phi) { return 1.0 / std::sin(phi); }, p1, p2);
}

}  // namespace

TEST_CASE("dist_h closed-form values and oracles") {
    CHECK(dist_h({0, 1}, {0, 1}) == 0);
    double vert = integrate([](double y) { return 1.0 / y; }, 1.0, 2.0);
    CHECK(std::abs(dist_h({0, 1}, {0, 2}) - vert) < 1e-13);
    CHECK(std::abs(dist_h({0, 1}, {0, 2}) - std::log(2.0)) < 1e-15);
    double shoot = geodesic_length_equal_height(0, 1, 1);
    CHECK(std::abs(dist_h({0, 1}, {1, 1}) - shoot) < 1e-12);
    CHECK(std::abs(dist_h({0, 1}, {1, 1}) - 2 * std::log((1 + std::sqrt(5.0)) / 2)) < 1e-14);
}

TEST_CASE("dist_h metric axioms and isometries") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-5, 5), uy(0.05, 5);
    for (int k = 0; k < 1000; ++k) {
        HPoint a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)}, c{ux(rng), uy(rng)};
        double ab = dist_h(a, b), bc = dist_h(b, c), ac = dist_h(a, c);
        CHECK(ac <= ab + bc + 1e-12);
        CHECK(ab == dist_h(b, a));
        double s = ux(rng), lam = uy(rng);
        CHECK(std::abs(dist_h({a.x + s, a.y}, {b.x + s, b.y}) - ab) < 1e-12 * (1 + ab));
        CHECK(std::abs(dist_h({lam * a.x, lam * a.y}, {lam * b.x, lam * b.y}) - ab) < 1e-12 * (1 + ab));
    }
}

TEST_CASE("covering map and lift") {
    HPoint z = lift({std::exp(-1.0), 0});
    CHECK(std::abs(z.x) < 1e-15);
    CHECK(std::abs(z.y - 1) < 1e-15);
    CuspPoint u = covering_rho({kPi, 2});
    CHECK(std::abs(u.abs() - std::exp(-2.0)) < 1e-16);
    CHECK(std::abs(std::abs(u.arg()) - kPi) < 1e-15);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ur(0.01, 0.99), ua(-kPi, kPi);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        CuspPoint v = CuspPoint::polar(ur(rng), ua(rng));
        HPoint w = lift(v);
        CHECK(w.x >= 0);
        CHECK(w.x < 2 * kPi);
        CuspPoint back = covering_rho(w);
        worst = std::max(worst, std::hypot(back.re - v.re, back.im - v.im));
    }
    CHECK(worst < 1e-14);
    CHECK_THROWS_AS(lift({1.0, 0}), DomainError);
    CHECK_THROWS_AS(lift({0.8, 0.8}), DomainError);
}

TEST_CASE("radial cusp distance") {
    CHECK(dist_cusp_radial(0.3, 0.3) == 0);
    CHECK(std::abs(dist_cusp_radial(std::exp(-1.0), std::exp(-std::exp(1.0))) - 1) < 1e-15);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ur(1e-6, 0.5), ua(0, 2 * kPi);
    for (int k = 0; k < 200; ++k) {
        double r1 = ur(rng), r2 = ur(rng);
        CuspPoint a = CuspPoint::polar(r1, ua(rng)), b = CuspPoint::polar(r2, ua(rng));
        HPoint za = lift(a), zb = lift(b);
        double best = 1e300;
        for (int i = -1; i <= 1; ++i) best = std::min(best, deck_distance(za, zb, i));
        CHECK(dist_cusp_radial(r1, r2) <= best + 1e-12);
        // same circle: distance bounded by the circle length
        CuspPoint c = CuspPoint::polar(r1, ua(rng));
        HPoint zc = lift(c);
        double same = 1e300;
        for (int i = -1; i <= 1; ++i) same = std::min(same, deck_distance(za, zc, i));
        CHECK(same <= 2 * kPi / std::abs(std::log(r1)) + 1e-12);
    }
}

TEST_CASE("rho weight") {
    CHECK(std::abs(rho_weight({std::exp(-4.0), 0}) - 2) < 1e-15);
    CHECK(rho_weight({0.9, 0}) == 1);
    double prev = 1e300;
    for (double r = 1e-8; r <= std::exp(-1.0); r *= 1.5) {
        double w = rho_weight({r, 0});
        CHECK(w <= prev);
        CHECK(w >= 1);
        prev = w;
    }
}

TEST_CASE("volume density and cusp volume") {
    // radial integral 2 pi int_0^{1/2} dr / (r ln^2 r), with s = -ln r
    double oracle = 2 * kPi * integrate_to_inf([](double s) { return 1 / (s * s); }, std::log(2.0));
    CHECK(std::abs(cusp_volume(0.5) - oracle) < 1e-9);
    CHECK(std::abs(cusp_volume(0.5) - 9.06472) < 1e-5);
    CHECK(std::abs(volume_density_cusp({std::exp(-1.0), 0}) - std::exp(2.0)) < 1e-13);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0, 2 * kPi), uy(0.1, 20);
    for (int k = 0; k < 20; ++k) {
        HPoint z{ux(rng), uy(rng)};
        CuspPoint u = covering_rho(z);
        double r = u.abs();
        // |du|^2 = |u|^2 |dz|^2
        CHECK(std::abs(volume_density_cusp(u) * r * r * z.y * z.y - 1) < 1e-12);
    }
    CHECK_THROWS_AS(cusp_volume(1.0), DomainError);
}

TEST_CASE("deck truncation bound is certified by brute force") {
    HPoint i1{0, 1};
    long I = deck_truncation_bound(i1, i1, 1.0, 1e-8);
    double tail = 0;
    for (long i = I + 1; i <= 10 * (I + 1) + 1000; ++i) {
        double d = deck_distance(i1, i1, i), e = deck_distance(i1, i1, -i);
        tail += std::exp(-d * d) + std::exp(-e * e);
    }
    CHECK(tail < 1e-8);
    CHECK(tail <= deck_tail_majorant(i1, i1, 1.0, I));
    if (I > 0) CHECK(deck_tail_majorant(i1, i1, 1.0, I - 1) >= 1e-8);

    long prev = 1L << 40;
    for (double eps : {1e-12, 1e-10, 1e-8, 1e-6, 1e-3, 1e-1}) {
        long J = deck_truncation_bound({0.3, 2.0}, {5.0, 3.5}, 0.7, eps);
        CHECK(J <= prev);
        prev = J;
    }
}

TEST_CASE("deck lower bound d >= ln(i^2 / y1 y2)") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ux(-kPi, kPi), uy(0.05, 30);
    for (int k = 0; k < 300; ++k) {
        HPoint a{0, uy(rng)}, b{ux(rng), uy(rng)};
        for (long i = 1; i < 200; ++i) {
            double lb = std::log(double(i) * double(i) / (a.y * b.y));
            CHECK(deck_distance(a, b, i) >= lb - 1e-12);
            CHECK(deck_distance(a, b, -i) >= lb - 1e-12);
        }
    }
}

TEST_CASE("ball count grows like sqrt((y1+1)(y2+1))") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> ux(0, 2 * kPi), ly(-3, 6);
    double C = 0;
    for (int k = 0; k < 200; ++k) {
        HPoint a{ux(rng), std::exp(ly(rng))}, b{ux(rng), std::exp(ly(rng))};
        C = std::max(C, deck_ball_count(a, b, 2.0) / std::sqrt((a.y + 1) * (b.y + 1)));
    }
    CHECK(C > 0);
    CHECK(C < 2);
    for (int k = 0; k < 500; ++k) {
        HPoint a{ux(rng), std::exp(ly(rng))}, b{ux(rng), std::exp(ly(rng))};
        CHECK(deck_ball_count(a, b, 2.0) <= 1.05 * C * std::sqrt((a.y + 1) * (b.y + 1)) + 1);
    }
}

TEST_CASE("orbit separation scales like 1/|ln|u||") {
    std::vector<double> lx, ly;
    double Cmin = 1e300;
    for (double L = 10; L <= 700; L *= 1.2) {
        CuspPoint u{std::exp(-L), 0};
        double s = orbit_separation(u);
        CHECK(std::abs(s - dist_h(lift(u), {lift(u).x + 2 * kPi, lift(u).y})) < 1e-12);
        Cmin = std::min(Cmin, s * L);
        lx.push_back(std::log(L));
        ly.push_back(std::log(s));
    }
    for (double r = 1e-3; r <= 0.5; r *= 1.3) Cmin = std::min(Cmin, orbit_separation({r, 0}) * std::abs(std::log(r)));
    CHECK(Cmin > 0);
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double num = 0, den = 0;
    for (size_t i = 0; i < lx.size(); ++i) num += (lx[i] - mx) * (ly[i] - my), den += (lx[i] - mx) * (lx[i] - mx);
    CHECK(std::abs(num / den + 1) < 0.05);
}
