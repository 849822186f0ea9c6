// SPDX-License-Identifier: Apache-2.0
// Thin wrappers over Boost.Math quadrature.
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ct {

template <class Real>
struct Rule {
    std::vector<Real> x;  // nodes on [-1, 1]
    std::vector<Real> w;
};

// Full Gauss-Legendre rule with N points on [-1, 1].
template <class Real, unsigned N>
Rule<Real> gauss_legendre() {
    using G = boost::math::quadrature::gauss<Real, N>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    Rule<Real> r;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == Real(0)) {
            r.x.push_back(0);
            r.w.push_back(wt[i]);
        } else {
            r.x.push_back(-a[i]);
            r.w.push_back(wt[i]);
            r.x.push_back(a[i]);
            r.w.push_back(wt[i]);
        }
    }
    return r;
}

// Adaptive Gauss-Kronrod (61 points) on a finite interval.
template <class F, class Real = double>
Real integrate(F&& f, Real a, Real b, Real tol = Real(1e-13), Real* err = nullptr, unsigned depth = 18) {
    Real e = 0;
    Real v = boost::math::quadrature::gauss_kronrod<Real, 61>::integrate(f, a, b, depth, tol, &e);
    if (err) *err = e;
    return v;
}

// Integral of f over [a, inf) via exp-sinh.
template <class F>
double integrate_to_inf(F&& f, double a, double tol = 1e-13, double* err = nullptr) {
    boost::math::quadrature::exp_sinh<double> es;
    double e = 0, l1 = 0;
    double v = es.integrate([&](double x) { return f(x + a); }, 0.0, std::numeric_limits<double>::infinity(), tol, &e, &l1);
    if (err) *err = e;
    return v;
}

}  // namespace ct
