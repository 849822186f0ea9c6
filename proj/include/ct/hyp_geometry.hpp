// SPDX-License-Identifier: Apache-2.0
// Upper half-plane, punctured disc, covering map u = exp(iz) and deck translations z -> z + 2 pi i.
#pragma once

#include <complex>

namespace ct {

struct HPoint {
    double x = 0;
    double y = 1;
};

struct CuspPoint {
    double re = 0;
    double im = 0;
    double abs() const { return std::hypot(re, im); }
    double arg() const { return std::atan2(im, re); }
    static CuspPoint polar(double r, double phi) { return {r * std::cos(phi), r * std::sin(phi)}; }
};

double dist_h(HPoint a, HPoint b);

CuspPoint covering_rho(HPoint z);
// Representative with x in [0, 2 pi).
HPoint lift(CuspPoint u);

double dist_cusp_radial(double r1, double r2);
double rho_weight(CuspPoint u);

// Lebesgue-relative density (|u| |ln|u||)^{-2}.
double volume_density_cusp(CuspPoint u);
// Area of {0 < |u| < r_out}: 2 pi / |ln r_out|.
double cusp_volume(double r_out);

// Distance from z1 to z2 + 2 pi i.
double deck_distance(HPoint z1, HPoint z2, long i);

// Majorant of sum_{|i| > I} exp(-d(z1, U^i z2)^2 / t) built from d >= ln(i^2 / (y1 y2)).
double deck_tail_majorant(HPoint z1, HPoint z2, double t, long I);
// Smallest I with deck_tail_majorant < eps.
long deck_truncation_bound(HPoint z1, HPoint z2, double t, double eps);

// #{i : d(z1, U^i z2) < radius}.
long deck_ball_count(HPoint z1, HPoint z2, double radius);

// d(lift(u), lift(u) + 2 pi).
double orbit_separation(CuspPoint u);

// x1 - x2 reduced to [-pi, pi].
double reduce_dx(double dx);

}  // namespace ct
