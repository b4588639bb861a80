#include "fosls/expr.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace fosls::expr {

struct Expr::Node {
    enum class Kind { Num, Var, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp } kind;
    double num = 0;
    int var = 0;  // 0 t, 1 x, 2 y
    std::shared_ptr<const Node> a, b;

    double eval(double t, double x, double y) const {
        switch (kind) {
            case Kind::Num: return num;
            case Kind::Var: return var == 0 ? t : (var == 1 ? x : y);
            case Kind::Add: return a->eval(t, x, y) + b->eval(t, x, y);
            case Kind::Sub: return a->eval(t, x, y) - b->eval(t, x, y);
            case Kind::Mul: return a->eval(t, x, y) * b->eval(t, x, y);
            case Kind::Div: return a->eval(t, x, y) / b->eval(t, x, y);
            case Kind::Neg: return -a->eval(t, x, y);
            case Kind::Sin: return std::sin(a->eval(t, x, y));
            case Kind::Cos: return std::cos(a->eval(t, x, y));
            case Kind::Exp: return std::exp(a->eval(t, x, y));
        }
        return 0;
    }

    int degree() const {
        switch (kind) {
            case Kind::Num: return 0;
            case Kind::Var: return 1;
            case Kind::Add:
            case Kind::Sub: {
                const int da = a->degree(), db = b->degree();
                return (da < 0 || db < 0) ? -1 : std::max(da, db);
            }
            case Kind::Mul: {
                const int da = a->degree(), db = b->degree();
                return (da < 0 || db < 0) ? -1 : da + db;
            }
            case Kind::Div: {
                const int da = a->degree(), db = b->degree();
                return (da < 0 || db != 0) ? -1 : da;
            }
            case Kind::Neg: return a->degree();
            default: return -1;  // sin/cos/exp
        }
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Kind = Expr::Node::Kind;

NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("expression error at position " + std::to_string(pos) +
                                    ": " + what + " in '" + s + "'");
    }

    NodePtr parse() {
        NodePtr e = expr();
        skip();
        if (pos != s.size()) fail("trailing input");
        return e;
    }

    NodePtr expr() {
        NodePtr e = term();
        for (;;) {
            if (eat('+'))
                e = make(Kind::Add, e, term());
            else if (eat('-'))
                e = make(Kind::Sub, e, term());
            else
                return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        for (;;) {
            if (eat('*'))
                e = make(Kind::Mul, e, factor());
            else if (eat('/'))
                e = make(Kind::Div, e, factor());
            else
                return e;
        }
    }

    NodePtr factor() {
        if (eat('-')) return make(Kind::Neg, factor());
        if (eat('+')) return factor();
        return primary();
    }

    NodePtr primary() {
        skip();
        if (pos >= s.size()) fail("unexpected end");
        if (eat('(')) {
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v;
            try {
                v = std::stod(s.substr(pos), &used);
            } catch (const std::exception&) {
                fail("bad number");
            }
            pos += used;
            auto n = std::make_shared<Expr::Node>();
            n->kind = Kind::Num;
            n->num = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t end = pos;
            while (end < s.size() &&
                   std::isalnum(static_cast<unsigned char>(s[end])))
                ++end;
            const std::string name = s.substr(pos, end - pos);
            pos = end;
            if (name == "pi") {
                auto n = std::make_shared<Expr::Node>();
                n->kind = Kind::Num;
                n->num = M_PI;
                return n;
            }
            if (name == "t" || name == "x" || name == "y") {
                auto n = std::make_shared<Expr::Node>();
                n->kind = Kind::Var;
                n->var = name == "t" ? 0 : (name == "x" ? 1 : 2);
                return n;
            }
            Kind k;
            if (name == "sin")
                k = Kind::Sin;
            else if (name == "cos")
                k = Kind::Cos;
            else if (name == "exp")
                k = Kind::Exp;
            else
                fail("unknown identifier '" + name + "'");
            if (!eat('(')) fail("expected '(' after function name");
            NodePtr arg = expr();
            if (!eat(')')) fail("expected ')'");
            return make(k, arg);
        }
        fail("unexpected character");
    }
};

}  // namespace

Expr::Expr(const std::string& text) : text_(text) {
    Parser p{text};
    root_ = p.parse();
}

Expr::Expr(const Expr&) = default;
Expr::Expr(Expr&&) noexcept = default;
Expr::~Expr() = default;

double Expr::eval(double t, double x, double y) const { return root_->eval(t, x, y); }

int Expr::poly_degree() const { return root_->degree(); }

systems::Field Expr::as_spatial_field() const {
    auto r = root_;
    return {[r](mesh::Vec2 p) { return r->eval(0.0, p.x, p.y); }, poly_degree()};
}

systems::Field Expr::as_spacetime_field() const {
    auto r = root_;
    return {[r](mesh::Vec2 p) { return r->eval(p.x, p.y, 0.0); }, poly_degree()};
}

}  // namespace fosls::expr
