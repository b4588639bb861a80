#pragma once

// Lowest-order de Rham compatible spaces S1, S0, RT0 on a simplicial mesh,
// homogeneous essential boundary conditions via entity masks, and tagged
// Cartesian products with a global DOF map.  Spaces are immutable after
// construction; evaluation is pure.

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "fosls/mesh.hpp"

namespace fosls::fespace {

using mesh::SimplicialMesh;
using mesh::Vec2;

enum class SpaceKind : uint8_t { S1, S0, RT0 };

const char* to_string(SpaceKind);

// Value and first-order derivative data of one shape function at a point.
// Scalar kinds use value[0] and grad; RT0 uses value[0..1] and div.
struct ShapeEval {
    int ncomp = 1;
    double value[2] = {0, 0};
    double grad[2] = {0, 0};
    double div = 0;
};

class FeSpace {
  public:
    FeSpace(const SimplicialMesh& mesh, SpaceKind kind,
            std::set<mesh::BoundaryLabel> dirichlet);

    const SimplicialMesh& mesh() const { return *mesh_; }
    SpaceKind kind() const { return kind_; }
    int dim() const { return static_cast<int>(entity_of_dof_.size()); }
    int ncomp() const { return kind_ == SpaceKind::RT0 ? 2 : 1; }

    int entity_of_dof(int dof) const { return entity_of_dof_[dof]; }
    int dof_of_entity(int entity) const { return dof_of_entity_[entity]; }
    bool entity_active(int entity) const { return dof_of_entity_[entity] >= 0; }
    int num_entities() const { return static_cast<int>(dof_of_entity_.size()); }

    // Local entities (vertices/edges/this triangle) carrying dofs on K,
    // including masked ones (dof -1).
    struct LocalDof {
        int entity;
        int dof;  // -1 when masked
    };
    std::vector<LocalDof> local_dofs(int K) const;

    // Shape function of `dof` restricted to K, at x in K. Zero eval when the
    // dof is not supported on K. Throws when x lies outside K.
    ShapeEval eval_shape(int dof, int K, Vec2 x) const;

    // As above, keyed by entity and valid also for masked entities; the
    // affine extension is evaluated without the x-in-K check.
    ShapeEval eval_entity_local(int entity, int K, Vec2 x, bool check_inside = true) const;

    // RT0 orientation: +1 when the global edge normal points out of K.
    // The global normal points from the lower- to the higher-index adjacent
    // triangle; on the boundary it points outward.
    double rt0_sign(int K, int edge) const;

    std::vector<double> interpolate(const std::function<void(Vec2, double*)>& f) const;
    std::vector<double> interpolate_scalar(const std::function<double(Vec2)>& f) const;

  private:
    const SimplicialMesh* mesh_;
    SpaceKind kind_;
    std::vector<int> entity_of_dof_;
    std::vector<int> dof_of_entity_;
};

enum class ProblemTag : uint8_t { Poisson, Elasticity, Heat, Wave, OcpPoisson };

const char* to_string(ProblemTag);
ProblemTag problem_tag_from(const std::string&);

struct ProductSpace {
    std::vector<FeSpace> factors;
    std::vector<std::string> names;
    std::vector<int> offset;  // per factor; offset.back() == total_dim
    ProblemTag tag;

    int total_dim() const { return offset.back(); }
    int num_factors() const { return static_cast<int>(factors.size()); }
    const SimplicialMesh& mesh() const { return factors.front().mesh(); }
};

ProductSpace make_product(ProblemTag, const SimplicialMesh&);

}  // namespace fosls::fespace
