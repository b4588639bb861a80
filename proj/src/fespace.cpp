#include "fosls/fespace.hpp"

#include <cmath>
#include <stdexcept>

#include "fosls/quadrature.hpp"

namespace fosls::fespace {

const char* to_string(SpaceKind k) {
    switch (k) {
        case SpaceKind::S1: return "S1";
        case SpaceKind::S0: return "S0";
        case SpaceKind::RT0: return "RT0";
    }
    return "?";
}

const char* to_string(ProblemTag t) {
    switch (t) {
        case ProblemTag::Poisson: return "poisson";
        case ProblemTag::Elasticity: return "elasticity";
        case ProblemTag::Heat: return "heat";
        case ProblemTag::Wave: return "wave";
        case ProblemTag::OcpPoisson: return "ocp_poisson";
    }
    return "?";
}

ProblemTag problem_tag_from(const std::string& s) {
    if (s == "poisson" || s == "helmholtz") return ProblemTag::Poisson;
    if (s == "elasticity") return ProblemTag::Elasticity;
    if (s == "heat") return ProblemTag::Heat;
    if (s == "wave") return ProblemTag::Wave;
    if (s == "ocp_poisson") return ProblemTag::OcpPoisson;
    if (s == "maxwell" || s == "ocp_maxwell")
        throw std::invalid_argument("problem '" + s + "' requires d=3 and is not supported");
    throw std::invalid_argument("unknown problem tag: " + s);
}

FeSpace::FeSpace(const SimplicialMesh& mesh, SpaceKind kind,
                 std::set<mesh::BoundaryLabel> dirichlet)
    : mesh_(&mesh), kind_(kind) {
    // DOF order follows the canonical entity order: vertices by index, edges
    // by sorted vertex pair, triangles by index.
    if (kind == SpaceKind::S1) {
        std::vector<char> masked(mesh.num_vertices(), 0);
        for (int e = 0; e < mesh.num_edges(); ++e) {
            auto l = mesh.boundary_label(e);
            if (l && dirichlet.count(*l)) {
                masked[mesh.edges()[e].first] = 1;
                masked[mesh.edges()[e].second] = 1;
            }
        }
        dof_of_entity_.assign(mesh.num_vertices(), -1);
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            if (masked[v]) continue;
            dof_of_entity_[v] = static_cast<int>(entity_of_dof_.size());
            entity_of_dof_.push_back(v);
        }
    } else if (kind == SpaceKind::S0) {
        dof_of_entity_.resize(mesh.num_triangles());
        for (int t = 0; t < mesh.num_triangles(); ++t) {
            dof_of_entity_[t] = t;
            entity_of_dof_.push_back(t);
        }
    } else {
        // no essential conditions on RT0 here
        dof_of_entity_.resize(mesh.num_edges());
        for (int e = 0; e < mesh.num_edges(); ++e) {
            dof_of_entity_[e] = e;
            entity_of_dof_.push_back(e);
        }
    }
}

std::vector<FeSpace::LocalDof> FeSpace::local_dofs(int K) const {
    std::vector<LocalDof> out;
    if (kind_ == SpaceKind::S1) {
        for (int v : mesh_->tri(K)) out.push_back({v, dof_of_entity_[v]});
    } else if (kind_ == SpaceKind::S0) {
        out.push_back({K, dof_of_entity_[K]});
    } else {
        for (int e : mesh_->tri_edges(K)) out.push_back({e, dof_of_entity_[e]});
    }
    return out;
}

double FeSpace::rt0_sign(int K, int edge) const {
    // the global normal points out of the owner triangle
    return K == mesh_->edge_owner(edge) ? 1.0 : -1.0;
}

ShapeEval FeSpace::eval_entity_local(int entity, int K, Vec2 x, bool check_inside) const {
    if (check_inside && !mesh_->tri_contains(K, x)) {
        // allow tiny slack for points constructed on edges
        const double h = mesh_->diameter(K);
        bool inside = true;
        const auto& tr = mesh_->tri(K);
        for (int j = 0; j < 3; ++j) {
            const Vec2 a = mesh_->vertex(tr[(j + 1) % 3]), b = mesh_->vertex(tr[(j + 2) % 3]);
            if ((b - a).cross(x - a) < -1e-12 * h * h) inside = false;
        }
        if (!inside) throw std::invalid_argument("eval_shape: point outside element");
    }
    ShapeEval ev;
    const auto& tr = mesh_->tri(K);
    if (kind_ == SpaceKind::S1) {
        ev.ncomp = 1;
        int loc = -1;
        for (int j = 0; j < 3; ++j)
            if (tr[j] == entity) loc = j;
        if (loc < 0) return ev;
        const Vec2 p = mesh_->vertex(tr[(loc + 1) % 3]);
        const Vec2 q = mesh_->vertex(tr[(loc + 2) % 3]);
        const double twoA = 2.0 * mesh_->area(K);
        const Vec2 e = q - p;
        ev.value[0] = e.cross(x - p) / twoA;
        ev.grad[0] = -e.y / twoA;
        ev.grad[1] = e.x / twoA;
    } else if (kind_ == SpaceKind::S0) {
        ev.ncomp = 1;
        ev.value[0] = (entity == K) ? 1.0 : 0.0;
    } else {
        ev.ncomp = 2;
        int loc = -1;
        const auto& te = mesh_->tri_edges(K);
        for (int j = 0; j < 3; ++j)
            if (te[j] == entity) loc = j;
        if (loc < 0) return ev;
        const auto [a, b] = mesh_->edges()[entity];
        const double len = (mesh_->vertex(b) - mesh_->vertex(a)).norm();
        const Vec2 opp = mesh_->vertex(tr[loc]);  // local edge j is opposite vertex j
        const double s = rt0_sign(K, entity);
        const double c = s * len / (2.0 * mesh_->area(K));
        ev.value[0] = c * (x.x - opp.x);
        ev.value[1] = c * (x.y - opp.y);
        ev.div = 2.0 * c;
    }
    return ev;
}

ShapeEval FeSpace::eval_shape(int dof, int K, Vec2 x) const {
    return eval_entity_local(entity_of_dof_[dof], K, x);
}

std::vector<double> FeSpace::interpolate(const std::function<void(Vec2, double*)>& f) const {
    std::vector<double> coeffs(dim(), 0.0);
    if (kind_ == SpaceKind::S1) {
        for (int i = 0; i < dim(); ++i) {
            double v[2] = {0, 0};
            f(mesh_->vertex(entity_of_dof_[i]), v);
            coeffs[i] = v[0];
        }
    } else if (kind_ == SpaceKind::S0) {
        for (int i = 0; i < dim(); ++i) {
            double v[2] = {0, 0};
            f(mesh_->centroid(entity_of_dof_[i]), v);
            coeffs[i] = v[0];
        }
    } else {
        // edge-mean normal flux against the global normal
        const auto rule = quad::segment_rule(5);
        for (int i = 0; i < dim(); ++i) {
            const int e = entity_of_dof_[i];
            const auto [a, b] = mesh_->edges()[e];
            const Vec2 pa = mesh_->vertex(a), pb = mesh_->vertex(b);
            const Vec2 t = pb - pa;
            Vec2 n{t.y, -t.x};
            n = n * (1.0 / n.norm());
            // orient away from the owner triangle
            const int lo = mesh_->edge_owner(e);
            if (n.dot((pa + pb) * 0.5 - mesh_->centroid(lo)) < 0) n = n * (-1.0);
            double mean = 0;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Vec2 x = pa + t * rule.bary[q][0];
                double v[2] = {0, 0};
                f(x, v);
                mean += rule.weights[q] * (v[0] * n.x + v[1] * n.y);
            }
            coeffs[i] = mean;
        }
    }
    return coeffs;
}

std::vector<double> FeSpace::interpolate_scalar(const std::function<double(Vec2)>& f) const {
    return interpolate([&](Vec2 x, double* out) { out[0] = f(x); });
}

ProductSpace make_product(ProblemTag tag, const SimplicialMesh& mesh) {
    const std::set<mesh::BoundaryLabel> dir = {mesh::BoundaryLabel::Dirichlet};
    const std::set<mesh::BoundaryLabel> none = {};
    ProductSpace p;
    p.tag = tag;
    auto add = [&](SpaceKind k, const std::set<mesh::BoundaryLabel>& bc, std::string name) {
        p.factors.emplace_back(mesh, k, bc);
        p.names.push_back(std::move(name));
    };
    switch (tag) {
        case ProblemTag::Poisson:
            add(SpaceKind::S1, dir, "u");
            add(SpaceKind::RT0, none, "sigma");
            break;
        case ProblemTag::Elasticity:
            add(SpaceKind::S1, dir, "u1");
            add(SpaceKind::S1, dir, "u2");
            add(SpaceKind::RT0, none, "sigma1");
            add(SpaceKind::RT0, none, "sigma2");
            break;
        case ProblemTag::Heat:
            // lateral condition only; initial data enters the residual
            add(SpaceKind::S1, dir, "u1");
            add(SpaceKind::S1, none, "u2");
            break;
        case ProblemTag::Wave:
            add(SpaceKind::S1, dir, "v");
            add(SpaceKind::S1, none, "sigma");
            break;
        case ProblemTag::OcpPoisson:
            add(SpaceKind::S1, dir, "u");
            add(SpaceKind::RT0, none, "sigma_y");
            add(SpaceKind::S1, dir, "p");
            add(SpaceKind::RT0, none, "sigma_p");
            break;
    }
    p.offset.assign(1, 0);
    for (const auto& f : p.factors) p.offset.push_back(p.offset.back() + f.dim());
    return p;
}

}  // namespace fosls::fespace
