#pragma once

// Exact NN emulation of the FE spaces: indicator nets, the multiply-by-step
// identity, basis nets for S1/S0/RT0 (ReLU+BiSU, depths 5/3/5), a ReLU-only
// S1 variant, product-space FoSLS nets whose hidden layers depend only on
// the mesh, output-layer coefficient setting, and the deep LSQ solve.

#include <utility>
#include <vector>

#include "fosls/lsq.hpp"
#include "fosls/nn.hpp"

namespace fosls::nnemu {

using fespace::FeSpace;
using fespace::ProductSpace;
using mesh::Vec2;
using systems::SystemOperator;

// 2-layer ReLU net computing x*y exactly for x in [-kappa,kappa], y in {0,1}:
// x*y = relu(x - kappa(1-y)) - relu(-x - kappa(1-y))
nn::NeuralNet mult_by_step_net(double kappa);

// Depth-3 BiSU net equal to 1 on the half-open ownership region of K and 0
// elsewhere (owned edges closed, unowned edges open), matching the
// smallest-index point-location convention a.e.
nn::NeuralNet indicator_net(const mesh::SimplicialMesh&, int K);

enum class BasisKind : uint8_t {
    Standard,  // ReLU+BiSU: depth 5 for S1/RT0, 3 for S0
    ReluOnly,  // S1 only: hat = max(0, min of patch affines), validated per vertex
};

// In parallel emulates the shape functions of the active DOFs.  Output rows
// are entity-major; RT0 emits ncomp=2 consecutive rows per edge.
nn::NeuralNet basis_net(const FeSpace&, BasisKind kind = BasisKind::Standard);

enum class Variant : uint8_t { PerFactor, Shared };

class FoslsNet {
  public:
    // hidden layers + basis output layer; depth 5
    const nn::NeuralNet& basis() const { return basis_; }
    Variant variant() const { return variant_; }
    int total_dim() const { return total_dim_; }
    int num_factors() const { return static_cast<int>(factor_ncomp_.size()); }
    int factor_ncomp(int k) const { return factor_ncomp_[k]; }
    bool has_coeffs() const { return !coeffs_.empty() || total_dim_ == 0; }
    const std::vector<double>& coeffs() const { return coeffs_; }

    // coefficient net: hidden layers bit-identical to basis(), output rows
    // factor-major with factor_ncomp(k) rows per factor
    nn::NeuralNet materialize() const;

    // forward pass of the coefficient net
    std::vector<double> realize(Vec2 x) const;

    bool same_signature(const FoslsNet&) const;

    friend FoslsNet fosls_basis_net(const ProductSpace&, Variant);
    friend FoslsNet set_output_weights(const FoslsNet&, std::vector<double> coeffs);

  private:
    nn::NeuralNet basis_{2, {nn::Layer{kernels::Csr::from_triplets(1, 2, {}),
                                       {0.0},
                                       {nn::Act::Id}}}};
    Variant variant_ = Variant::PerFactor;
    int total_dim_ = 0;
    std::vector<int> factor_ncomp_;
    // output row (factor-major, comp-within-factor) as a combination of
    // basis rows: (basis_row, coefficient_index)
    std::vector<std::vector<std::pair<int, int>>> comb_;
    std::vector<double> coeffs_;
};

FoslsNet fosls_basis_net(const ProductSpace&, Variant variant = Variant::PerFactor);
FoslsNet set_output_weights(const FoslsNet&, std::vector<double> coeffs);

// coefficients c1 + lam*c2 on a common hidden-layer signature
FoslsNet nn_linear_comb(const FoslsNet& n1, double lam, const FoslsNet& n2);

struct DeepSolveResult {
    FoslsNet net;
    double ls_value = 0;
    lsq::SolveResult fem;
};

DeepSolveResult deep_lsq_solve(const SystemOperator&, const ProductSpace&,
                               Variant variant = Variant::PerFactor,
                               lsq::SolveOptions opts = {});

// estimator recomputed purely from the net realization (per-element affine
// reconstruction from interior samples)
lsq::EstimatorField estimate_from_net(const SystemOperator&, const ProductSpace&,
                                      const FoslsNet&);

}  // namespace fosls::nnemu
