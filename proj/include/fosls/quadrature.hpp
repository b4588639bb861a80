#pragma once

// Symmetric quadrature on the reference triangle {(x,y): x,y >= 0, x+y <= 1}
// and Gauss-Legendre rules on the unit segment [0,1].  All rules have
// positive weights; weights sum to the reference measure (1/2 or 1).

#include <array>
#include <cstddef>
#include <vector>

namespace fosls::quad {

struct QuadRule {
    int degree = 0;                          // exact for total degree <= degree
    std::vector<std::array<double, 3>> bary; // barycentric points (triangle) or (s,1-s,0) (segment)
    std::vector<double> weights;
    std::size_t size() const { return weights.size(); }
};

// Smallest positive-weight symmetric rule exact at least to `degree`, 0..6.
// degree 2 is the 3-point edge-midpoint rule (points on the element boundary).
QuadRule triangle_rule(int degree);

// Same exactness, but every point strictly inside the triangle.
QuadRule triangle_rule_interior(int degree);

// Gauss-Legendre on [0,1]; bary entries hold (s, 1-s, 0).
QuadRule segment_rule(int degree);

}  // namespace fosls::quad
