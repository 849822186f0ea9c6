// SPDX-License-Identifier: Apache-2.0
#include "ct/hyp_geometry.hpp"

#include <cmath>
#include <numbers>

#include "ct/errors.hpp"

namespace ct {

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;
}

double dist_h(HPoint a, HPoint b) {
    double chord = std::hypot(a.x - b.x, a.y - b.y);
    return 2 * std::asinh(chord / (2 * std::sqrt(a.y * b.y)));
}

CuspPoint covering_rho(HPoint z) { return CuspPoint::polar(std::exp(-z.y), z.x); }

HPoint lift(CuspPoint u) {
    double r = u.abs();
    if (!(r > 0 && r < 1)) throw DomainError("lift: need 0 < |u| < 1");
    double x = u.arg();
    if (x < 0) x += kTwoPi;
    if (x >= kTwoPi) x -= kTwoPi;
    return {x, -std::log(r)};
}

double dist_cusp_radial(double r1, double r2) {
    if (!(r1 > 0 && r1 < 1 && r2 > 0 && r2 < 1)) throw DomainError("dist_cusp_radial: radii must lie in (0,1)");
    return std::abs(std::log(std::abs(std::log(r1))) - std::log(std::abs(std::log(r2))));
}

double rho_weight(CuspPoint u) {
    double r = u.abs();
    if (!(r > 0 && r < 1)) throw DomainError("rho_weight: need 0 < |u| < 1");
    return std::max(1.0, std::sqrt(std::abs(std::log(r))));
}

double volume_density_cusp(CuspPoint u) {
    double r = u.abs();
    if (!(r > 0 && r < 1)) throw DomainError("volume_density_cusp: need 0 < |u| < 1");
    double l = r * std::log(r);
    return 1.0 / (l * l);
}

double cusp_volume(double r_out) {
    if (!(r_out > 0 && r_out < 1)) throw DomainError("cusp_volume: need 0 < r_out < 1");
    return kTwoPi / std::abs(std::log(r_out));
}

double reduce_dx(double dx) {
    dx = std::remainder(dx, kTwoPi);
    return dx;
}

double deck_distance(HPoint z1, HPoint z2, long i) {
    return dist_h(z1, {z2.x + kTwoPi * static_cast<double>(i), z2.y});
}

double deck_tail_majorant(HPoint z1, HPoint z2, double t, long I) {
    // Terms with i^2 <= Y carry no usable bound and are majorized by 1.
    const double Y = z1.y * z2.y;
    const long J = std::max<long>(I, static_cast<long>(std::ceil(std::sqrt(Y))));
    double s = 0;
    for (long i = I + 1; i <= J; ++i) {
        double L = std::log(static_cast<double>(i) * static_cast<double>(i) / Y);
        s += (L > 0) ? std::exp(-L * L / t) : 1.0;
    }
    // sum_{i > J} f(i) <= int_J^inf f, f decreasing there.
    double v0 = std::log(static_cast<double>(J) * static_cast<double>(J) / Y);
    double tail = 0.5 * std::sqrt(Y) * std::exp(t / 16) * std::sqrt(std::numbers::pi * t) / 2 *
                  std::erfc((v0 - t / 4) / std::sqrt(t));
    return 2 * (s + tail);
}

long deck_truncation_bound(HPoint z1, HPoint z2, double t, double eps) {
    if (!(t > 0 && eps > 0)) throw DomainError("deck_truncation_bound: t and eps must be positive");
    long hi = 1;
    while (deck_tail_majorant(z1, z2, t, hi) >= eps) {
        hi *= 2;
        if (hi > (1L << 40)) throw RangeError("deck_truncation_bound: no finite truncation found");
    }
    long lo = 0;
    if (deck_tail_majorant(z1, z2, t, 0) < eps) return 0;
    while (hi - lo > 1) {
        long mid = lo + (hi - lo) / 2;
        if (deck_tail_majorant(z1, z2, t, mid) < eps)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

long deck_ball_count(HPoint z1, HPoint z2, double radius) {
    // cosh d = 1 + ((dx + 2 pi i)^2 + dy^2) / (2 y1 y2)
    double dx = z1.x - z2.x;
    double rhs = 2 * z1.y * z2.y * (std::cosh(radius) - 1) - (z1.y - z2.y) * (z1.y - z2.y);
    if (rhs <= 0) return 0;
    double half = std::sqrt(rhs);
    long lo = static_cast<long>(std::ceil((-half - dx) / kTwoPi)) - 1;
    long hi = static_cast<long>(std::floor((half - dx) / kTwoPi)) + 1;
    long c = 0;
    for (long i = lo; i <= hi; ++i)
        if (dist_h(z1, {z2.x + kTwoPi * static_cast<double>(i), z2.y}) < radius) ++c;
    return c;
}

double orbit_separation(CuspPoint u) {
    HPoint z = lift(u);
    return 2 * std::asinh(std::numbers::pi / z.y);
}

}  // namespace ct
