#pragma once

// Small closed-form expression language for time-dependent coefficients and
// standalone phase functions.  Grammar (whitespace insignificant):
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' int)?
//   atom   := number | var | 'exp' '(' expr ')' | '(' expr ')' | '-' atom
//
// Unary minus binds looser than '^', so -t^2 parses as -(t^2).
// Coefficient mode: single variable 't', integer exponents, exp only.
// Phase mode additionally allows xi1..xi3, sqrt, and real exponents.
// Every parsed expression carries an exact symbolic first derivative.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "hyplab/errors.hpp"

namespace hyplab::expr {

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow, Exp, Sqrt, Neg };
    Kind kind;
    double value = 0.0;  // Const
    int var = 0;         // Var slot
    double expo = 0.0;   // Pow exponent
    NodePtr a, b;
};

namespace detail {

inline NodePtr constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Const;
    n->value = v;
    return n;
}

inline bool is_const(const NodePtr& n, double v) {
    return n->kind == Node::Kind::Const && n->value == v;
}

inline NodePtr variable(int slot) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Var;
    n->var = slot;
    return n;
}

inline NodePtr node2(Node::Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

// Constructors fold constants so that derivatives of constant expressions
// reduce to a literal 0 (used to detect constant coefficients).
inline NodePtr add(NodePtr a, NodePtr b) {
    if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const) return constant(a->value + b->value);
    if (is_const(a, 0)) return b;
    if (is_const(b, 0)) return a;
    return node2(Node::Kind::Add, std::move(a), std::move(b));
}

inline NodePtr neg(NodePtr a);

inline NodePtr sub(NodePtr a, NodePtr b) {
    if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const) return constant(a->value - b->value);
    if (is_const(b, 0)) return a;
    if (is_const(a, 0)) return neg(std::move(b));
    return node2(Node::Kind::Sub, std::move(a), std::move(b));
}

inline NodePtr mul(NodePtr a, NodePtr b) {
    if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const) return constant(a->value * b->value);
    if (is_const(a, 0) || is_const(b, 0)) return constant(0);
    if (is_const(a, 1)) return b;
    if (is_const(b, 1)) return a;
    return node2(Node::Kind::Mul, std::move(a), std::move(b));
}

inline NodePtr div(NodePtr a, NodePtr b) {
    if (a->kind == Node::Kind::Const && b->kind == Node::Kind::Const && b->value != 0)
        return constant(a->value / b->value);
    if (is_const(a, 0)) return constant(0);
    if (is_const(b, 1)) return a;
    return node2(Node::Kind::Div, std::move(a), std::move(b));
}

inline NodePtr pow(NodePtr a, double p) {
    if (p == 0) return constant(1);
    if (p == 1) return a;
    if (a->kind == Node::Kind::Const) return constant(std::pow(a->value, p));
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Pow;
    n->expo = p;
    n->a = std::move(a);
    return n;
}

inline NodePtr expf_(NodePtr a) {
    if (a->kind == Node::Kind::Const) return constant(std::exp(a->value));
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Exp;
    n->a = std::move(a);
    return n;
}

inline NodePtr sqrtf_(NodePtr a) {
    if (a->kind == Node::Kind::Const) return constant(std::sqrt(a->value));
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Sqrt;
    n->a = std::move(a);
    return n;
}

inline NodePtr neg(NodePtr a) {
    if (a->kind == Node::Kind::Const) return constant(-a->value);
    if (a->kind == Node::Kind::Neg) return a->a;
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Neg;
    n->a = std::move(a);
    return n;
}

}  // namespace detail

inline double eval_node(const Node& n, const double* vars) {
    using K = Node::Kind;
    switch (n.kind) {
        case K::Const: return n.value;
        case K::Var: return vars[n.var];
        case K::Add: return eval_node(*n.a, vars) + eval_node(*n.b, vars);
        case K::Sub: return eval_node(*n.a, vars) - eval_node(*n.b, vars);
        case K::Mul: return eval_node(*n.a, vars) * eval_node(*n.b, vars);
        case K::Div: {
            const double denom = eval_node(*n.b, vars);
            if (denom == 0) throw EvalError("division by zero while evaluating expression");
            return eval_node(*n.a, vars) / denom;
        }
        case K::Pow: {
            const double base = eval_node(*n.a, vars);
            const double p = n.expo;
            if (p == std::floor(p) && p > 0 && p <= 32) {
                double r = 1.0, b = base;
                for (long k = static_cast<long>(p); k > 0; k >>= 1) {
                    if (k & 1) r *= b;
                    b *= b;
                }
                return r;
            }
            return std::pow(base, p);
        }
        case K::Exp: return std::exp(eval_node(*n.a, vars));
        case K::Sqrt: return std::sqrt(eval_node(*n.a, vars));
        case K::Neg: return -eval_node(*n.a, vars);
    }
    throw EvalError("corrupt expression node");
}

inline NodePtr differentiate(const NodePtr& n, int wrt) {
    using K = Node::Kind;
    using namespace detail;
    switch (n->kind) {
        case K::Const: return constant(0);
        case K::Var: return constant(n->var == wrt ? 1 : 0);
        case K::Add: return add(differentiate(n->a, wrt), differentiate(n->b, wrt));
        case K::Sub: return sub(differentiate(n->a, wrt), differentiate(n->b, wrt));
        case K::Mul:
            return add(mul(differentiate(n->a, wrt), n->b), mul(n->a, differentiate(n->b, wrt)));
        case K::Div:
            // (u/v)' = (u'v - uv') / v^2
            return div(sub(mul(differentiate(n->a, wrt), n->b), mul(n->a, differentiate(n->b, wrt))),
                       pow(n->b, 2));
        case K::Pow:
            // (u^p)' = p u^{p-1} u'
            return mul(mul(constant(n->expo), pow(n->a, n->expo - 1)), differentiate(n->a, wrt));
        case K::Exp: return mul(expf_(n->a), differentiate(n->a, wrt));
        case K::Sqrt: return div(differentiate(n->a, wrt), mul(constant(2), sqrtf_(n->a)));
        case K::Neg: return neg(differentiate(n->a, wrt));
    }
    throw EvalError("corrupt expression node");
}

struct ParseOptions {
    std::vector<std::string> variables;  // name -> slot by position
    bool allow_sqrt = false;
    bool allow_real_exponents = false;
};

namespace detail {

class Parser {
public:
    Parser(const std::string& src, const ParseOptions& opt) : src_(src), opt_(opt) {}

    NodePtr run() {
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) throw ParseError("trailing input after expression", pos_);
        return e;
    }

private:
    const std::string& src_;
    const ParseOptions& opt_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }
    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    NodePtr parse_expr() {
        NodePtr e = parse_term();
        for (;;) {
            if (accept('+'))
                e = add(e, parse_term());
            else if (accept('-'))
                e = sub(e, parse_term());
            else
                return e;
        }
    }

    NodePtr parse_term() {
        NodePtr e = parse_factor();
        for (;;) {
            if (accept('*'))
                e = mul(e, parse_factor());
            else if (accept('/'))
                e = div(e, parse_factor());
            else
                return e;
        }
    }

    NodePtr parse_factor() {
        // Unary minus binds looser than '^': -t^2 == -(t^2).
        if (accept('-')) return neg(parse_factor());
        NodePtr base = parse_atom();
        if (accept('^')) {
            const double p = parse_exponent();
            return pow(std::move(base), p);
        }
        return base;
    }

    double parse_exponent() {
        skip_ws();
        const std::size_t start = pos_;
        bool neg_exp = false;
        if (accept('-')) neg_exp = true;
        skip_ws();
        if (pos_ >= src_.size() || (!std::isdigit(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '.'))
            throw ParseError("expected numeric exponent after '^'", pos_);
        const double v = parse_number_literal();
        if (!opt_.allow_real_exponents && v != std::floor(v))
            throw ParseError("non-integer exponent", start);
        return neg_exp ? -v : v;
    }

    double parse_number_literal() {
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = parse_expr();
            expect(')');
            return e;
        }
        if (c == '-') {
            ++pos_;
            return neg(parse_factor());
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return constant(parse_number_literal());
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            std::string ident;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ident += src_[pos_++];
            if (ident == "exp") {
                expect('(');
                NodePtr e = parse_expr();
                expect(')');
                return expf_(e);
            }
            if (ident == "sqrt" && opt_.allow_sqrt) {
                expect('(');
                NodePtr e = parse_expr();
                expect(')');
                return sqrtf_(e);
            }
            for (std::size_t slot = 0; slot < opt_.variables.size(); ++slot)
                if (ident == opt_.variables[slot]) return variable(static_cast<int>(slot));
            throw ParseError("unknown identifier '" + ident + "'", start);
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }
};

}  // namespace detail

inline NodePtr parse(const std::string& source, const ParseOptions& opt) {
    return detail::Parser(source, opt).run();
}

}  // namespace hyplab::expr
