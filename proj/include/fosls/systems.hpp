#pragma once

// First-order operators L and data F for each problem family: pointwise
// residual components, local L(K)- and V(K)-norm densities including the
// initial-trace terms of the space-time problems.  Operators are immutable
// and evaluation is pure.

#include <functional>
#include <memory>
#include <vector>

#include "fosls/fespace.hpp"

namespace fosls::systems {

using fespace::ProblemTag;
using fespace::ProductSpace;
using fespace::ShapeEval;
using mesh::Vec2;

// Scalar data field with its polynomial degree (-1: not a polynomial, the
// residual quadrature is then flagged inexact).
struct Field {
    std::function<double(Vec2)> fn;
    int degree = 0;
    double operator()(Vec2 x) const { return fn(x); }

    static Field constant(double c) {
        return {[c](Vec2) { return c; }, 0};
    }
    static Field zero() { return constant(0.0); }
};

// Point values and first-order derivatives of a product-space function,
// one ShapeEval per factor.
struct StateEval {
    std::vector<ShapeEval> f;
};

class SystemOperator {
  public:
    virtual ~SystemOperator() = default;

    ProblemTag tag() const { return tag_; }
    int n_volume() const { return n_volume_; }
    int n_trace() const { return n_trace_; }
    bool has_initial_trace() const { return n_trace_ > 0; }
    int n_residual_components() const { return n_volume_ + n_trace_; }

    // max polynomial degree among residual components for discrete arguments;
    // -1 when data or coefficients are not polynomial
    int residual_degree() const { return residual_degree_; }
    // degree-exact default for the squared residual (design default 2x),
    // capped at 6 and flagged inexact for non-polynomial data
    int default_quad_degree() const;
    bool quadrature_exact() const { return residual_degree_ >= 0 && 2 * residual_degree_ <= 6; }

    // (L theta) at x for a factor's shape function; writes n_volume entries.
    virtual void basis_image(int factor, const ShapeEval&, Vec2 x, double* out) const = 0;
    // trace part of (L theta) on the initial-time boundary; n_trace entries
    virtual void trace_basis_image(int factor, const ShapeEval&, double* out) const;
    virtual void data(Vec2 x, double* out) const = 0;
    virtual void trace_data(Vec2 x, double* out) const;

    // squared V-norm densities: integrand of ||.||^2_V(K) at x and of the
    // initial-trace contribution on d0(K)
    virtual double vnorm_volume_density(const StateEval&) const = 0;
    virtual double vnorm_trace_density(const StateEval&) const;

  protected:
    SystemOperator(ProblemTag tag, int nvol, int ntrace, int rdeg)
        : tag_(tag), n_volume_(nvol), n_trace_(ntrace), residual_degree_(rdeg) {}
    ProblemTag tag_;
    int n_volume_;
    int n_trace_;
    int residual_degree_;
};

// -div sigma - k^2 u = f, grad u - sigma = g  (g = 0 for the plain problem).
// k = 0: Poisson; k > 0: Helmholtz, k^2 must not be a Dirichlet-Laplacian
// eigenvalue of the domain (caller's responsibility).
std::unique_ptr<SystemOperator> poisson_helmholtz(double k, Field f);
std::unique_ptr<SystemOperator> poisson_general(double k, Field f, Field g1, Field g2);

std::unique_ptr<SystemOperator> elasticity(double lambda, double mu, Field f1, Field f2);

// space-time advection-reaction-diffusion in 1+1D, coordinates (t, x)
std::unique_ptr<SystemOperator> heat(Field a, Field b, Field c, Field f, Field u0);

// space-time acoustic wave in 1+1D
std::unique_ptr<SystemOperator> wave(Field f, Field g, Field v0, Field sigma0);

// Poisson-constrained optimal control with cost |u - z|^2 + lambda |q|^2
std::unique_ptr<SystemOperator> ocp_poisson(double lambda, Field f, Field z);
std::unique_ptr<SystemOperator> ocp_poisson_general(double lambda, Field f, Field g1, Field g2,
                                                    Field z);

// elasticity tensor C^s on 2x2 matrices (row-major m[4]), s in {-1/2, 1/2, 1}:
// spectral formula (2mu)^s on the trace-free part, (2mu+2lambda)^s on the
// trace part
void elasticity_tensor_pow(double lambda, double mu, double s, const double m[4], double out[4]);

// ---- generic evaluation over a product space ----

StateEval eval_state(const ProductSpace&, const std::vector<double>& coeffs, int K, Vec2 x,
                     bool check_inside = true);

// all volume components of F - L v at x in K
std::vector<double> residual_at(const SystemOperator&, const ProductSpace&,
                                const std::vector<double>& coeffs, int K, Vec2 x);

// trace components of F - L v at a point of the initial-time edge of K
std::vector<double> trace_residual_at(const SystemOperator&, const ProductSpace&,
                                      const std::vector<double>& coeffs, int K, Vec2 x);

// residual components from precomputed state data (used by the NN path)
std::vector<double> residual_from_state(const SystemOperator&, const StateEval&, Vec2 x);
std::vector<double> trace_residual_from_state(const SystemOperator&, const StateEval&, Vec2 x);

// ||v||^2_V(K) (volume + owned initial-trace facet) by quadrature of the
// given degree against an arbitrary state evaluator
double vnorm_squared_element(
    const SystemOperator&, const ProductSpace&, int K,
    const std::function<StateEval(int /*K*/, Vec2)>& state_at, int quad_degree);

// initial-trace edges owned by K (label Initial); empty for stationary tags
std::vector<int> owned_initial_edges(const ProductSpace&, int K);

}  // namespace fosls::systems
