#pragma once

// LSQ Galerkin normal equations: G_ij = (L theta_i, L theta_j)_L,
// b_i = (F, L theta_i)_L, c = ||F||^2_L, so LS(v;F) = v'Gv - 2v'b + c.
// Assembly runs parallel over elements with a deterministic reduction;
// FOSLS_THREADS caps the worker count.

#include <optional>
#include <string>
#include <vector>

#include "fosls/kernels.hpp"
#include "fosls/systems.hpp"

namespace fosls::lsq {

using systems::ProductSpace;
using systems::SystemOperator;

struct LsqSystem {
    kernels::Csr gram;
    std::vector<double> load;
    double data_norm = 0;  // ||F||^2_L
    int ndof = 0;

    // crude conditioning indicator, recorded but not acted upon
    double diag_ratio() const;
    std::string dump_coo() const;  // "row col value" lines
};

struct EstimatorField {
    std::vector<double> per_element;  // eta_K (not squared)
    double total = 0;                 // eta = sqrt(sum eta_K^2)
};

struct SolveOptions {
    enum class Method { Cg, Direct } method = Method::Cg;
    double tol = 1e-10;
    int maxit_factor = 10;  // maxit = factor * ndof
};

struct SolveResult {
    std::vector<double> coeffs;
    bool converged = true;
    int iterations = 0;
    double residual = 0;  // achieved ||Gx-b|| / ||b||
};

LsqSystem assemble(const SystemOperator&, const ProductSpace&, int quad_degree = -1);

SolveResult solve(const LsqSystem&, SolveOptions opts = {});

// LS(v;F) by elementwise quadrature (the functional itself)
double ls_value(const SystemOperator&, const ProductSpace&, const std::vector<double>& coeffs);
// LS(v;F) = v'Gv - 2v'b + c; agrees with ls_value to 1e-10 relative
double ls_value_gram(const LsqSystem&, const std::vector<double>& coeffs);

EstimatorField estimate(const SystemOperator&, const ProductSpace&,
                        const std::vector<double>& coeffs);

// quadrature-discretized loss E_T^2 using exactly the given degree
double discrete_loss(const SystemOperator&, const ProductSpace&,
                     const std::vector<double>& coeffs, int quad_degree);

// ||G v - b||_inf / max(1, ||b||_inf)
double residual_orthogonality(const LsqSystem&, const std::vector<double>& coeffs);

// ||U - v||_V over the mesh against a closed-form state (degree-8 quadrature)
double vnorm_error(const SystemOperator&, const ProductSpace&, const std::vector<double>& coeffs,
                   const std::function<systems::StateEval(mesh::Vec2)>& exact);

}  // namespace fosls::lsq
