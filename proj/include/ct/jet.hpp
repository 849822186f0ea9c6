// SPDX-License-Identifier: Apache-2.0
// Second-order jets: value and first two derivatives in one variable.
#pragma once

#include <cmath>

namespace ct {

struct Jet {
    double v = 0, d1 = 0, d2 = 0;

    static Jet constant(double c) { return {c, 0, 0}; }
    static Jet variable(double x) { return {x, 1, 0}; }
};

inline Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
inline Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
inline Jet operator-(Jet a) { return {-a.v, -a.d1, -a.d2}; }
inline Jet operator*(double c, Jet a) { return {c * a.v, c * a.d1, c * a.d2}; }
inline Jet operator*(Jet a, Jet b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2 * a.d1 * b.d1 + a.v * b.d2};
}
inline Jet operator+(Jet a, double c) { return {a.v + c, a.d1, a.d2}; }

// f composed with g, where fj holds f and its derivatives at g.v.
inline Jet compose(Jet fj, Jet g) { return {fj.v, fj.d1 * g.d1, fj.d2 * g.d1 * g.d1 + fj.d1 * g.d2}; }

inline Jet log(Jet a) { return compose({std::log(a.v), 1 / a.v, -1 / (a.v * a.v)}, a); }
inline Jet log_abs(Jet a) { return compose({std::log(std::abs(a.v)), 1 / a.v, -1 / (a.v * a.v)}, a); }
inline Jet exp(Jet a) {
    double e = std::exp(a.v);
    return compose({e, e, e}, a);
}

}  // namespace ct

namespace ct {

inline Jet operator*(Jet a, double c) { return c * a; }
inline Jet operator+(double c, Jet a) { return a + c; }
inline Jet operator-(Jet a, double c) { return {a.v - c, a.d1, a.d2}; }
inline Jet operator-(double c, Jet a) { return {c - a.v, -a.d1, -a.d2}; }

}  // namespace ct
