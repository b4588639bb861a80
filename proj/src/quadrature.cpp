#include "fosls/quadrature.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace fosls::quad {

namespace {

void push_orbit3(QuadRule& r, double a, double w) {
    // points (b,a,a) and permutations, b = 1-2a; w already scaled to sum 1/2
    const double b = 1.0 - 2.0 * a;
    r.bary.push_back({b, a, a});
    r.bary.push_back({a, b, a});
    r.bary.push_back({a, a, b});
    r.weights.insert(r.weights.end(), 3, w);
}

void push_orbit6(QuadRule& r, double a, double b, double w) {
    const double c = 1.0 - a - b;
    r.bary.push_back({a, b, c});
    r.bary.push_back({a, c, b});
    r.bary.push_back({b, a, c});
    r.bary.push_back({b, c, a});
    r.bary.push_back({c, a, b});
    r.bary.push_back({c, b, a});
    r.weights.insert(r.weights.end(), 6, w);
}

QuadRule centroid_rule() {
    QuadRule r;
    r.degree = 1;
    r.bary.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.5);
    return r;
}

QuadRule midpoint3_rule() {
    QuadRule r;
    r.degree = 2;
    r.bary.push_back({0.5, 0.5, 0.0});
    r.bary.push_back({0.0, 0.5, 0.5});
    r.bary.push_back({0.5, 0.0, 0.5});
    r.weights.insert(r.weights.end(), 3, 1.0 / 6.0);
    return r;
}

QuadRule interior3_rule() {
    QuadRule r;
    r.degree = 2;
    push_orbit3(r, 1.0 / 6.0, 1.0 / 6.0);
    return r;
}

// Dunavant weights below are normalized to sum 1; scale by |T_ref| = 1/2.
QuadRule dunavant4() {
    QuadRule r;
    r.degree = 4;
    push_orbit3(r, 0.445948490915965, 0.5 * 0.223381589678011);
    push_orbit3(r, 0.091576213509771, 0.5 * 0.109951743655322);
    return r;
}

QuadRule dunavant5() {
    QuadRule r;
    r.degree = 5;
    r.bary.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    r.weights.push_back(0.5 * 0.225);
    push_orbit3(r, 0.470142064105115, 0.5 * 0.132394152788506);
    push_orbit3(r, 0.101286507323456, 0.5 * 0.125939180544827);
    return r;
}

QuadRule dunavant6() {
    QuadRule r;
    r.degree = 6;
    push_orbit3(r, 0.249286745170910, 0.5 * 0.116786275726379);
    push_orbit3(r, 0.063089014491502, 0.5 * 0.050844906370207);
    push_orbit6(r, 0.053145049844816, 0.310352451033785, 0.5 * 0.082851075618374);
    return r;
}

}  // namespace

QuadRule triangle_rule(int degree) {
    if (degree < 0 || degree > 6) throw std::invalid_argument("triangle_rule: unsupported degree");
    if (degree <= 1) return centroid_rule();
    if (degree == 2) return midpoint3_rule();
    if (degree <= 4) return dunavant4();
    if (degree == 5) return dunavant5();
    return dunavant6();
}

QuadRule triangle_rule_interior(int degree) {
    if (degree == 2) return interior3_rule();
    return triangle_rule(degree);  // all other supported rules are interior
}

QuadRule segment_rule(int degree) {
    if (degree < 0 || degree > 7) throw std::invalid_argument("segment_rule: unsupported degree");
    const int npts = degree / 2 + 1;  // n-point Gauss exact to 2n-1
    // nodes/weights on [-1,1]
    static const std::array<std::vector<std::array<double, 2>>, 4> tables = {{
        {{{0.0, 2.0}}},
        {{{-0.5773502691896257645091488, 1.0}, {0.5773502691896257645091488, 1.0}}},
        {{{-0.7745966692414833770358531, 5.0 / 9.0},
          {0.0, 8.0 / 9.0},
          {0.7745966692414833770358531, 5.0 / 9.0}}},
        {{{-0.8611363115940525752239465, 0.3478548451374538573730639},
          {-0.3399810435848562648026658, 0.6521451548625461426269361},
          {0.3399810435848562648026658, 0.6521451548625461426269361},
          {0.8611363115940525752239465, 0.3478548451374538573730639}}},
    }};
    QuadRule r;
    r.degree = 2 * npts - 1;
    for (const auto& [t, w] : tables[npts - 1]) {
        const double s = 0.5 * (t + 1.0);
        r.bary.push_back({s, 1.0 - s, 0.0});
        r.weights.push_back(0.5 * w);
    }
    return r;
}

}  // namespace fosls::quad
