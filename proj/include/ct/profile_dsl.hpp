// SPDX-License-Identifier: Apache-2.0
// Small expression language for radial profiles in r, with w = ln|ln r|.
//
// Grammar (LL(1)):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'r' | 'w' | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := exp | ln | abs | psi | chi | phi_step
#pragma once

#include <functional>
#include <memory>
#include <string>

#include "ct/jet.hpp"

namespace ct {

struct ExprNode;

class ProfileExpr {
public:
    ProfileExpr();
    static ProfileExpr parse(const std::string& src);
    static ProfileExpr constant(double c);

    // Normalized text; parse(print()) prints identically.
    std::string print() const;

    // r in (0, 1).
    double eval(double r) const;
    // Evaluation from s = ln r; r itself may underflow.
    double eval_log(double s) const;

    // d^order/dr^order by Richardson-extrapolated differences, order <= 2.
    double deriv(double r, int order) const;
    // d^order/ds^order with s = ln r.
    double deriv_log(double s, int order) const;
    // d^order/dw^order with w = ln|ln r| (r < 1).
    double deriv_w(double w, int order) const;

    // Value and s-derivatives; deep in the cusp the w chart is used.
    Jet jet_log(double s) const;

    bool depends_on_w() const;

private:
    explicit ProfileExpr(std::shared_ptr<const ExprNode> root);
    std::shared_ptr<const ExprNode> root_;
};

struct RichardsonResult {
    double value = 0;
    double err = 0;
};

// Richardson tableau on central (or one-sided, sign = +1 forward / -1 backward)
// differences of f at x with initial step h.
RichardsonResult richardson_derivative(const std::function<double(double)>& f, double x, int order, double h,
                                       int one_sided = 0);

}  // namespace ct
