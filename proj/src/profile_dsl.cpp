// SPDX-License-Identifier: Apache-2.0
#include "ct/profile_dsl.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <vector>

#include "ct/errors.hpp"
#include "ct/smooth_step.hpp"

namespace ct {

enum class Op { num, var_r, var_w, neg, add, sub, mul, div, pow, call };
enum class Fn { exp, ln, abs, psi, chi, phi_step };

struct ExprNode {
    Op op;
    double num = 0;
    Fn fn = Fn::exp;
    std::shared_ptr<const ExprNode> a, b;
    int line = 1, col = 1;
};

namespace {

using NodeP = std::shared_ptr<const ExprNode>;

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::exp: return "exp";
        case Fn::ln: return "ln";
        case Fn::abs: return "abs";
        case Fn::psi: return "psi";
        case Fn::chi: return "chi";
        case Fn::phi_step: return "phi_step";
    }
    return "?";
}

bool fn_from_name(const std::string& s, Fn& f) {
    static const std::array<std::pair<const char*, Fn>, 6> tbl{{{"exp", Fn::exp},
                                                                {"ln", Fn::ln},
                                                                {"abs", Fn::abs},
                                                                {"psi", Fn::psi},
                                                                {"chi", Fn::chi},
                                                                {"phi_step", Fn::phi_step}}};
    for (auto& [n, v] : tbl)
        if (s == n) {
            f = v;
            return true;
        }
    return false;
}

enum class Tok { num, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
    Tok kind;
    std::string text;
    double num = 0;
    int line, col;
};

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto adv = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            adv(1);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                    j = k;
                }
            }
            std::string t = src.substr(i, j - i);
            double v = 0;
            auto res = std::from_chars(t.data(), t.data() + t.size(), v);
            if (res.ec != std::errc() || res.ptr != t.data() + t.size())
                throw SyntaxError("malformed number '" + t + "'", line, col);
            out.push_back({Tok::num, t, v, line, col});
            adv(j - i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Tok::ident, src.substr(i, j - i), 0, line, col});
            adv(j - i);
            continue;
        }
        Tok k;
        switch (c) {
            case '+': k = Tok::plus; break;
            case '-': k = Tok::minus; break;
            case '*': k = Tok::star; break;
            case '/': k = Tok::slash; break;
            case '^': k = Tok::caret; break;
            case '(': k = Tok::lparen; break;
            case ')': k = Tok::rparen; break;
            default: throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
        }
        out.push_back({k, std::string(1, c), 0, line, col});
        adv(1);
    }
    out.push_back({Tok::end, "", 0, line, col});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    NodeP parse_all() {
        NodeP e = expr();
        if (peek().kind != Tok::end) fail("unexpected '" + peek().text + "'");
        return e;
    }

private:
    const Token& peek() const { return t_[p_]; }
    const Token& take() { return t_[p_++]; }
    [[noreturn]] void fail(const std::string& msg) const {
        const Token& k = peek();
        throw SyntaxError(k.kind == Tok::end ? "unexpected end of input" : msg, k.line, k.col);
    }

    static NodeP mk(Op op, const Token& at, NodeP a = nullptr, NodeP b = nullptr) {
        auto n = std::make_shared<ExprNode>();
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        n->line = at.line;
        n->col = at.col;
        return n;
    }

    NodeP expr() {
        NodeP l = term();
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            const Token& o = take();
            NodeP r = term();
            l = mk(o.kind == Tok::plus ? Op::add : Op::sub, o, l, r);
        }
        return l;
    }
    NodeP term() {
        NodeP l = unary();
        while (peek().kind == Tok::star || peek().kind == Tok::slash) {
            const Token& o = take();
            NodeP r = unary();
            l = mk(o.kind == Tok::star ? Op::mul : Op::div, o, l, r);
        }
        return l;
    }
    NodeP unary() {
        if (peek().kind == Tok::minus) {
            const Token& o = take();
            return mk(Op::neg, o, unary());
        }
        return power();
    }
    NodeP power() {
        NodeP base = primary();
        if (peek().kind == Tok::caret) {
            const Token& o = take();
            return mk(Op::pow, o, base, unary());
        }
        return base;
    }
    NodeP primary() {
        const Token& k = peek();
        switch (k.kind) {
            case Tok::num: {
                take();
                auto n = std::const_pointer_cast<ExprNode>(mk(Op::num, k));
                n->num = k.num;
                return n;
            }
            case Tok::lparen: {
                take();
                NodeP e = expr();
                if (peek().kind != Tok::rparen) fail("expected ')'");
                take();
                return e;
            }
            case Tok::ident: {
                take();
                if (k.text == "r") return mk(Op::var_r, k);
                if (k.text == "w") return mk(Op::var_w, k);
                if (k.text == "pi") {
                    auto n = std::const_pointer_cast<ExprNode>(mk(Op::num, k));
                    n->num = std::numbers::pi;
                    return n;
                }
                Fn f;
                if (!fn_from_name(k.text, f))
                    throw SyntaxError("unknown identifier '" + k.text + "'", k.line, k.col);
                if (peek().kind != Tok::lparen) fail("expected '(' after " + k.text);
                take();
                NodeP arg = expr();
                if (peek().kind != Tok::rparen) fail("expected ')'");
                take();
                auto n = std::const_pointer_cast<ExprNode>(mk(Op::call, k, arg));
                n->fn = f;
                return n;
            }
            default: fail("unexpected '" + k.text + "'");
        }
    }

    std::vector<Token> t_;
    std::size_t p_ = 0;
};

int prec(const ExprNode& n) {
    switch (n.op) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::pow: return 4;
        default: return 5;
    }
}

std::string fmt_num(double v) {
    if (v == std::numbers::pi) return "pi";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void print_node(const ExprNode& n, std::string& out) {
    auto sub = [&](const ExprNode& c, bool paren) {
        if (paren) out += '(';
        print_node(c, out);
        if (paren) out += ')';
    };
    switch (n.op) {
        case Op::num: out += fmt_num(n.num); return;
        case Op::var_r: out += 'r'; return;
        case Op::var_w: out += 'w'; return;
        case Op::neg:
            out += '-';
            sub(*n.a, prec(*n.a) < 3);
            return;
        case Op::call:
            out += fn_name(n.fn);
            out += '(';
            print_node(*n.a, out);
            out += ')';
            return;
        case Op::pow:
            sub(*n.a, prec(*n.a) <= 4);
            out += '^';
            sub(*n.b, prec(*n.b) < 3);
            return;
        default: {
            int p = prec(n);
            sub(*n.a, prec(*n.a) < p);
            const char* o = n.op == Op::add ? "+" : n.op == Op::sub ? "-" : n.op == Op::mul ? "*" : "/";
            out += o;
            sub(*n.b, prec(*n.b) <= p);
            return;
        }
    }
}

struct Point {
    double s;  // ln r
};

[[noreturn]] void domain_fail(const ExprNode& n, const std::string& msg) {
    throw DomainError(msg + " at line " + std::to_string(n.line) + ", column " + std::to_string(n.col));
}

double ev(const ExprNode& n, const Point& p) {
    switch (n.op) {
        case Op::num: return n.num;
        case Op::var_r: return std::exp(p.s);
        case Op::var_w:
            if (p.s == 0) domain_fail(n, "w = ln|ln r| undefined at r = 1");
            return std::log(std::abs(p.s));
        case Op::neg: return -ev(*n.a, p);
        case Op::add: return ev(*n.a, p) + ev(*n.b, p);
        case Op::sub: return ev(*n.a, p) - ev(*n.b, p);
        case Op::mul: return ev(*n.a, p) * ev(*n.b, p);
        case Op::div: {
            double d = ev(*n.b, p);
            if (d == 0) domain_fail(n, "division by zero");
            return ev(*n.a, p) / d;
        }
        case Op::pow: {
            double a = ev(*n.a, p), b = ev(*n.b, p);
            if (a < 0 && b != std::floor(b)) domain_fail(n, "negative base with non-integer exponent");
            if (a == 0 && b < 0) domain_fail(n, "zero to a negative power");
            return std::pow(a, b);
        }
        case Op::call: {
            if (n.fn == Fn::ln) {
                // ln r is carried exactly
                if (n.a->op == Op::var_r) return p.s;
                double a = ev(*n.a, p);
                if (!(a > 0)) domain_fail(n, "ln of nonpositive value");
                return std::log(a);
            }
            double a = ev(*n.a, p);
            switch (n.fn) {
                case Fn::exp: return std::exp(a);
                case Fn::abs: return std::abs(a);
                case Fn::psi: return smooth_step(StepKind::psi, a);
                case Fn::chi: return smooth_step(StepKind::chi, a);
                case Fn::phi_step: return smooth_step(StepKind::phi, a);
                default: break;
            }
        }
    }
    domain_fail(n, "bad node");
}

bool uses_w(const ExprNode& n) {
    if (n.op == Op::var_w) return true;
    return (n.a && uses_w(*n.a)) || (n.b && uses_w(*n.b));
}

}  // namespace

RichardsonResult richardson_derivative(const std::function<double(double)>& f, double x, int order, double h,
                                       int one_sided) {
    constexpr int L = 10;
    const double c = 2.0;
    double T[L][L];
    auto diff = [&](double hh) {
        if (one_sided == 0) {
            if (order == 0) return f(x);
            if (order == 1) return (f(x + hh) - f(x - hh)) / (2 * hh);
            return (f(x + hh) - 2 * f(x) + f(x - hh)) / (hh * hh);
        }
        double sg = one_sided > 0 ? 1.0 : -1.0;
        double e = sg * hh;
        if (order == 0) return f(x);
        if (order == 1) return (-3 * f(x) + 4 * f(x + e) - f(x + 2 * e)) / (2 * e);
        return (2 * f(x) - 5 * f(x + e) + 4 * f(x + 2 * e) - f(x + 3 * e)) / (e * e);
    };
    if (order < 0 || order > 2) throw DomainError("derivative order must be 0, 1 or 2");
    if (order == 0) return {f(x), 0};
    RichardsonResult best{0, 1e300};
    double hh = h;
    for (int i = 0; i < L; ++i, hh /= c) {
        T[i][0] = diff(hh);
        for (int m = 1; m <= i; ++m) {
            double pw = one_sided == 0 ? 2.0 * m : m + 1.0;
            double f = std::pow(c, pw);
            T[i][m] = (f * T[i][m - 1] - T[i - 1][m - 1]) / (f - 1);
            double e = std::max(std::abs(T[i][m] - T[i][m - 1]), std::abs(T[i][m] - T[i - 1][m - 1]));
            if (e <= best.err) best = {T[i][m], e};
        }
        if (i >= 2 && std::abs(T[i][i] - T[i - 1][i - 1]) >= 2 * best.err) break;
    }
    if (best.err == 1e300) best = {T[0][0], std::abs(T[0][0])};
    return best;
}

ProfileExpr::ProfileExpr() : ProfileExpr(constant(0)) {}
ProfileExpr::ProfileExpr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

ProfileExpr ProfileExpr::parse(const std::string& src) {
    Parser p(lex(src));
    return ProfileExpr(p.parse_all());
}

ProfileExpr ProfileExpr::constant(double c) {
    auto n = std::make_shared<ExprNode>();
    n->op = Op::num;
    n->num = c;
    return ProfileExpr(n);
}

std::string ProfileExpr::print() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

double ProfileExpr::eval(double r) const {
    if (!(r > 0 && r < 1)) throw DomainError("eval: r must lie in (0, 1)");
    return eval_log(std::log(r));
}

double ProfileExpr::eval_log(double s) const {
    double v = ev(*root_, Point{s});
    if (!std::isfinite(v)) domain_fail(*root_, "non-finite value");
    return v;
}

bool ProfileExpr::depends_on_w() const { return uses_w(*root_); }

double ProfileExpr::deriv(double r, int order) const {
    if (!(r > 0 && r < 1)) throw DomainError("deriv: r must lie in (0, 1)");
    auto f = [this](double x) { return eval(x); };
    double hc = std::min(0.1 * r, 0.45 * (1 - r));
    if (hc >= 0.02 * r) return richardson_derivative(f, r, order, hc, 0).value;
    // near r = 1: backward stencil stays inside (0, 1)
    return richardson_derivative(f, r, order, 0.05 * r, -1).value;
}

double ProfileExpr::deriv_log(double s, int order) const {
    auto f = [this](double x) { return eval_log(x); };
    double h = 0.05 * std::max(1.0, std::abs(s));
    if (depends_on_w() && s != 0) h = std::min(h, 0.3 * std::abs(s));
    return richardson_derivative(f, s, order, h, 0).value;
}

double ProfileExpr::deriv_w(double w, int order) const {
    auto f = [this](double x) { return eval_log(-std::exp(x)); };
    return richardson_derivative(f, w, order, 0.1, 0).value;
}

Jet ProfileExpr::jet_log(double s) const {
    double v = eval_log(s);
    if (s < -4) {
        double w = std::log(-s);
        double gw = deriv_w(w, 1), gww = deriv_w(w, 2);
        return {v, gw / s, (gww - gw) / (s * s)};
    }
    return {v, deriv_log(s, 1), deriv_log(s, 2)};
}

}  // namespace ct
