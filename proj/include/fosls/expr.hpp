#pragma once

// Small arithmetic expression grammar for data fields in run configs:
// numbers, + - * /, parentheses, unary minus, sin/cos/exp, pi, and the
// variables t, x, y.  Polynomial degree is tracked so the quadrature layer
// can stay degree-exact for polynomial data.

#include <memory>
#include <string>

#include "fosls/systems.hpp"

namespace fosls::expr {

class Expr {
  public:
    explicit Expr(const std::string& text);
    Expr(const Expr&);
    Expr(Expr&&) noexcept;
    ~Expr();

    double eval(double t, double x, double y) const;
    // total polynomial degree; -1 when not a polynomial
    int poly_degree() const;
    const std::string& text() const { return text_; }

    // field over spatial coordinates (x, y)
    systems::Field as_spatial_field() const;
    // field over space-time coordinates (t, x); first mesh axis is t
    systems::Field as_spacetime_field() const;

  private:
    struct Node;
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace fosls::expr
