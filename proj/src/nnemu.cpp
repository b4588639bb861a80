#include "fosls/nnemu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fosls/quadrature.hpp"

namespace fosls::nnemu {

using fespace::ShapeEval;
using fespace::SpaceKind;
using kernels::Csr;
using mesh::SimplicialMesh;
using nn::Act;
using nn::Layer;
using nn::NeuralNet;
using Triplet = std::tuple<int, int, double>;

namespace {

struct Affine {
    double a0 = 0, ax = 0, ay = 0;
    double operator()(Vec2 p) const { return a0 + ax * p.x + ay * p.y; }
};

// g > 0 strictly inside K on the side of local edge j (opposite vertex j);
// g(x) = e x (x - p) for the CCW edge direction e = q - p
Affine edge_function(const SimplicialMesh& m, int K, int j) {
    const auto& tr = m.tri(K);
    const Vec2 p = m.vertex(tr[(j + 1) % 3]);
    const Vec2 q = m.vertex(tr[(j + 2) % 3]);
    const Vec2 e = q - p;
    return {e.y * p.x - e.x * p.y, -e.y, e.x};
}

// barycentric coordinate of local vertex j on K as a global affine
Affine barycentric(const SimplicialMesh& m, int K, int j) {
    Affine g = edge_function(m, K, j);
    const double twoA = 2.0 * m.area(K);
    return {g.a0 / twoA, g.ax / twoA, g.ay / twoA};
}

double max_abs_over_vertices(const SimplicialMesh& m, const Affine& a) {
    double mx = 0;
    for (int v = 0; v < m.num_vertices(); ++v) mx = std::max(mx, std::abs(a(m.vertex(v))));
    return mx;
}

// Rows of the two indicator layers of element K appended to triplet lists.
// Layer-1 rows are BiSU half-plane tests (negated for owned edges); the
// layer-2 counting row fires exactly on the half-open ownership region.
struct IndicatorRows {
    int l1_first;  // first of 3 layer-1 rows
    int l2_row;    // counting row in layer 2
};

IndicatorRows emit_indicator(const SimplicialMesh& m, int K, std::vector<Triplet>& a1,
                             std::vector<double>& b1, std::vector<Act>& act1,
                             std::vector<Triplet>& a2, std::vector<double>& b2,
                             std::vector<Act>& act2) {
    IndicatorRows rows{static_cast<int>(b1.size()), 0};
    int n_open = 0;
    std::array<double, 3> sign;
    for (int j = 0; j < 3; ++j) {
        const int e = m.tri_edges(K)[j];
        const bool owned = m.tri_owns_edge(K, e);
        Affine g = edge_function(m, K, j);
        const double s = owned ? -1.0 : 1.0;  // owned: count violations of g >= 0
        sign[j] = owned ? -1.0 : 1.0;
        if (!owned) ++n_open;
        const int r = static_cast<int>(b1.size());
        if (g.ax != 0.0) a1.emplace_back(r, 0, s * g.ax);
        if (g.ay != 0.0) a1.emplace_back(r, 1, s * g.ay);
        b1.push_back(s * g.a0);
        act1.push_back(Act::BiSU);
    }
    rows.l2_row = static_cast<int>(b2.size());
    for (int j = 0; j < 3; ++j) a2.emplace_back(rows.l2_row, rows.l1_first + j, sign[j]);
    b2.push_back(-(static_cast<double>(n_open) - 0.5));
    act2.push_back(Act::BiSU);
    return rows;
}

Layer make_layer(int rows, int cols, std::vector<Triplet> trip, std::vector<double> b,
                 std::vector<Act> act) {
    Layer l;
    l.A = Csr::from_triplets(rows, cols, std::move(trip));
    l.b = std::move(b);
    l.act = std::move(act);
    return l;
}

// Depth-5 ReLU+BiSU net emulating, in parallel, one affine piece times the
// element indicator for every (dof, element) pair of a scalar or vector
// lowest-order space, summed per dof in the output layer.
//
// layer 1: per pair: 3 BiSU half-planes + ncomp Id affine carries
// layer 2: per pair: 1 BiSU counting unit + ncomp Id carries
// layer 3: per pair and comp: relu(+a - k + k b), relu(-a - k + k b)
// layer 4: per pair and comp: product = relu difference (Id)
// layer 5: output, one row per (dof, comp): sum over the dof's elements
struct PieceworkSpec {
    // per dof: list of (element, affine per component)
    std::vector<std::vector<std::pair<int, std::vector<Affine>>>> pieces;
    int ncomp = 1;
};

NeuralNet piecework_net(const SimplicialMesh& m, const PieceworkSpec& spec) {
    std::vector<Triplet> a1, a2, a3, a4, a5;
    std::vector<double> b1, b2, b3, b4, b5;
    std::vector<Act> c1, c2, c3, c4, c5;
    const int ncomp = spec.ncomp;

    for (std::size_t dof = 0; dof < spec.pieces.size(); ++dof) {
        for (const auto& [K, affs] : spec.pieces[dof]) {
            const IndicatorRows ind = emit_indicator(m, K, a1, b1, c1, a2, b2, c2);
            // affine carries in layer 1 and layer 2
            std::vector<int> carry1(ncomp), carry2(ncomp);
            for (int c = 0; c < ncomp; ++c) {
                carry1[c] = static_cast<int>(b1.size());
                if (affs[c].ax != 0.0) a1.emplace_back(carry1[c], 0, affs[c].ax);
                if (affs[c].ay != 0.0) a1.emplace_back(carry1[c], 1, affs[c].ay);
                b1.push_back(affs[c].a0);
                c1.push_back(Act::Id);

                carry2[c] = static_cast<int>(b2.size());
                a2.emplace_back(carry2[c], carry1[c], 1.0);
                b2.push_back(0.0);
                c2.push_back(Act::Id);
            }
            for (int c = 0; c < ncomp; ++c) {
                const double kap = max_abs_over_vertices(m, affs[c]) + 1.0;
                const int rp = static_cast<int>(b3.size());
                a3.emplace_back(rp, carry2[c], 1.0);
                a3.emplace_back(rp, ind.l2_row, kap);
                b3.push_back(-kap);
                c3.push_back(Act::ReLU);
                const int rm = static_cast<int>(b3.size());
                a3.emplace_back(rm, carry2[c], -1.0);
                a3.emplace_back(rm, ind.l2_row, kap);
                b3.push_back(-kap);
                c3.push_back(Act::ReLU);

                const int prod = static_cast<int>(b4.size());
                a4.emplace_back(prod, rp, 1.0);
                a4.emplace_back(prod, rm, -1.0);
                b4.push_back(0.0);
                c4.push_back(Act::Id);

                a5.emplace_back(static_cast<int>(dof) * ncomp + c, prod, 1.0);
            }
        }
    }
    const int n1 = static_cast<int>(b1.size());
    const int n2 = static_cast<int>(b2.size());
    const int n3 = static_cast<int>(b3.size());
    const int n4 = static_cast<int>(b4.size());
    const int nout = static_cast<int>(spec.pieces.size()) * ncomp;
    b5.assign(nout, 0.0);
    c5.assign(nout, Act::Id);
    std::vector<Layer> layers;
    layers.push_back(make_layer(n1, 2, std::move(a1), std::move(b1), std::move(c1)));
    layers.push_back(make_layer(n2, n1, std::move(a2), std::move(b2), std::move(c2)));
    layers.push_back(make_layer(n3, n2, std::move(a3), std::move(b3), std::move(c3)));
    layers.push_back(make_layer(n4, n3, std::move(a4), std::move(b4), std::move(c4)));
    layers.push_back(make_layer(nout, n4, std::move(a5), std::move(b5), std::move(c5)));
    return NeuralNet(2, std::move(layers));
}

PieceworkSpec s1_spec(const FeSpace& space) {
    const auto& m = space.mesh();
    PieceworkSpec spec;
    spec.ncomp = 1;
    spec.pieces.resize(space.dim());
    for (int dof = 0; dof < space.dim(); ++dof) {
        const int v = space.entity_of_dof(dof);
        for (int K : m.vertex_tris(v)) {
            const auto& tr = m.tri(K);
            int loc = -1;
            for (int j = 0; j < 3; ++j)
                if (tr[j] == v) loc = j;
            spec.pieces[dof].push_back({K, {barycentric(m, K, loc)}});
        }
    }
    return spec;
}

PieceworkSpec rt0_spec(const FeSpace& space) {
    const auto& m = space.mesh();
    PieceworkSpec spec;
    spec.ncomp = 2;
    spec.pieces.resize(space.dim());
    for (int dof = 0; dof < space.dim(); ++dof) {
        const int e = space.entity_of_dof(dof);
        const auto [va, vb] = m.edges()[e];
        const double len = (m.vertex(vb) - m.vertex(va)).norm();
        for (int K : m.edge_tris(e)) {
            if (K < 0) continue;
            const auto& tr = m.tri(K);
            int loc = -1;
            const auto& te = m.tri_edges(K);
            for (int j = 0; j < 3; ++j)
                if (te[j] == e) loc = j;
            const Vec2 opp = m.vertex(tr[loc]);
            const double c = space.rt0_sign(K, e) * len / (2.0 * m.area(K));
            spec.pieces[dof].push_back(
                {K, {Affine{-c * opp.x, c, 0.0}, Affine{-c * opp.y, 0.0, c}}});
        }
    }
    return spec;
}

NeuralNet s0_net(const FeSpace& space) {
    const auto& m = space.mesh();
    std::vector<NeuralNet> nets;
    nets.reserve(space.dim());
    for (int dof = 0; dof < space.dim(); ++dof)
        nets.push_back(indicator_net(m, space.entity_of_dof(dof)));
    return parallelize(nets);
}

// ---- ReLU-only S1 net: hat_i = max(0, min over patch affines) ----

// validation: the lattice formula must reproduce the hat on every element
void validate_cpwl_vertex(const SimplicialMesh& m, int v,
                          const std::vector<std::pair<int, Affine>>& patch) {
    auto formula = [&](Vec2 x) {
        double mn = patch.front().second(x);
        for (const auto& [K, a] : patch) mn = std::min(mn, a(x));
        return std::max(0.0, mn);
    };
    const auto rule = quad::triangle_rule_interior(6);
    for (int K = 0; K < m.num_triangles(); ++K) {
        const Affine* own = nullptr;
        for (const auto& [pk, a] : patch)
            if (pk == K) own = &a;
        const auto& tr = m.tri(K);
        const Vec2 p0 = m.vertex(tr[0]), p1 = m.vertex(tr[1]), p2 = m.vertex(tr[2]);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const auto& l = rule.bary[q];
            const Vec2 x = p0 * l[0] + p1 * l[1] + p2 * l[2];
            const double want = own ? std::max(0.0, (*own)(x)) : 0.0;
            if (std::abs(formula(x) - want) > 1e-9) {
                std::ostringstream os;
                os << "basis_net(ReluOnly): max-min formula invalid for vertex " << v
                   << " (element " << K << ")";
                throw std::runtime_error(os.str());
            }
        }
    }
}

// min tree over 2^stages leaves; leaves are affine functions of the input.
// Each stage halves the count with min(a,b) = relu(a-b) + relu(b) - relu(-b)
// ... combined as a - relu(a-b) expressed through the previous layer.
NeuralNet cpwl_hat_net(const SimplicialMesh& m, int v, int stages) {
    std::vector<std::pair<int, Affine>> patch;
    for (int K : m.vertex_tris(v)) {
        const auto& tr = m.tri(K);
        int loc = -1;
        for (int j = 0; j < 3; ++j)
            if (tr[j] == v) loc = j;
        patch.push_back({K, barycentric(m, K, loc)});
    }
    validate_cpwl_vertex(m, v, patch);

    const int nleaf = 1 << stages;
    // pad by repeating the first affine: min(a,a) = a
    std::vector<Affine> leaf(nleaf, patch.front().second);
    for (std::size_t i = 0; i < patch.size(); ++i) leaf[i] = patch[i].second;

    std::vector<Layer> layers;
    // stage 1 consumes the input x directly: units per pair (u,w):
    //   relu(w - u), relu(w), relu(-w); min(u,w) = w - relu(w-u)
    //                                            = relu(w) - relu(-w) - relu(w-u)
    // subsequent stages consume the previous stage's 3-unit groups.
    {
        std::vector<Triplet> a;
        std::vector<double> b;
        std::vector<Act> c;
        const int npair = nleaf / 2;
        for (int p = 0; p < npair; ++p) {
            const Affine &u = leaf[2 * p], &w = leaf[2 * p + 1];
            const Affine diff{w.a0 - u.a0, w.ax - u.ax, w.ay - u.ay};
            const std::array<std::pair<Affine, double>, 3> units = {
                {{diff, 1.0}, {w, 1.0}, {w, -1.0}}};
            for (int t = 0; t < 3; ++t) {
                const int r = 3 * p + t;
                const Affine& af = units[t].first;
                const double s = units[t].second;
                if (af.ax != 0.0) a.emplace_back(r, 0, s * af.ax);
                if (af.ay != 0.0) a.emplace_back(r, 1, s * af.ay);
                b.push_back(s * af.a0);
                c.push_back(Act::ReLU);
            }
        }
        layers.push_back(make_layer(3 * npair, 2, std::move(a), std::move(b), std::move(c)));
    }
    for (int s = 1; s < stages; ++s) {
        // previous stage: groups of 3 units; value_p = g1 - g2 - g0 with
        // g = (relu(u-w), relu(w), relu(-w))
        const int nprev = 1 << (stages - s);      // values available
        const int npair = nprev / 2;
        std::vector<Triplet> a;
        std::vector<double> b;
        std::vector<Act> c;
        auto val_into = [&](int row, int group, double scale) {
            a.emplace_back(row, 3 * group + 0, -scale);
            a.emplace_back(row, 3 * group + 1, scale);
            a.emplace_back(row, 3 * group + 2, -scale);
        };
        for (int p = 0; p < npair; ++p) {
            const int gu = 2 * p, gw = 2 * p + 1;
            // relu(w - u), relu(w), relu(-w)
            val_into(3 * p + 0, gw, 1.0);
            val_into(3 * p + 0, gu, -1.0);
            val_into(3 * p + 1, gw, 1.0);
            val_into(3 * p + 2, gw, -1.0);
            for (int t = 0; t < 3; ++t) {
                b.push_back(0.0);
                c.push_back(Act::ReLU);
            }
        }
        layers.push_back(
            make_layer(3 * npair, 3 * nprev, std::move(a), std::move(b), std::move(c)));
    }
    {
        // final relu(min): one unit reading the last group's value
        std::vector<Triplet> a = {{0, 0, -1.0}, {0, 1, 1.0}, {0, 2, -1.0}};
        layers.push_back(make_layer(1, 3, std::move(a), {0.0}, {Act::ReLU}));
    }
    {
        std::vector<Triplet> a = {{0, 0, 1.0}};
        layers.push_back(make_layer(1, 1, std::move(a), {0.0}, {Act::Id}));
    }
    return NeuralNet(2, std::move(layers));
}

NeuralNet cpwl_net(const FeSpace& space) {
    const auto& m = space.mesh();
    int smax = 1;
    for (int dof = 0; dof < space.dim(); ++dof) {
        const int s = static_cast<int>(m.vertex_tris(space.entity_of_dof(dof)).size());
        int st = 0;
        while ((1 << st) < s) ++st;
        smax = std::max(smax, std::max(1, st));
    }
    std::vector<NeuralNet> nets;
    for (int dof = 0; dof < space.dim(); ++dof)
        nets.push_back(cpwl_hat_net(m, space.entity_of_dof(dof), smax));
    return parallelize(nets);
}

}  // namespace

NeuralNet mult_by_step_net(double kappa) {
    if (!(kappa > 0)) throw std::invalid_argument("mult_by_step_net: kappa must be positive");
    std::vector<Triplet> a1 = {{0, 0, 1.0}, {0, 1, kappa}, {1, 0, -1.0}, {1, 1, kappa}};
    std::vector<Triplet> a2 = {{0, 0, 1.0}, {0, 1, -1.0}};
    std::vector<Layer> layers;
    layers.push_back(
        make_layer(2, 2, std::move(a1), {-kappa, -kappa}, {Act::ReLU, Act::ReLU}));
    layers.push_back(make_layer(1, 2, std::move(a2), {0.0}, {Act::Id}));
    return NeuralNet(2, std::move(layers));
}

NeuralNet indicator_net(const SimplicialMesh& m, int K) {
    if (K < 0 || K >= m.num_triangles())
        throw std::invalid_argument("indicator_net: bad triangle index");
    std::vector<Triplet> a1, a2;
    std::vector<double> b1, b2;
    std::vector<Act> c1, c2;
    emit_indicator(m, K, a1, b1, c1, a2, b2, c2);
    std::vector<Triplet> a3 = {{0, 0, 1.0}};
    std::vector<Layer> layers;
    layers.push_back(make_layer(3, 2, std::move(a1), std::move(b1), std::move(c1)));
    layers.push_back(make_layer(1, 3, std::move(a2), std::move(b2), std::move(c2)));
    layers.push_back(make_layer(1, 1, std::move(a3), {0.0}, {Act::Id}));
    return NeuralNet(2, std::move(layers));
}

NeuralNet basis_net(const FeSpace& space, BasisKind kind) {
    if (kind == BasisKind::ReluOnly) {
        if (space.kind() != SpaceKind::S1)
            throw std::invalid_argument("basis_net: ReLU-only variant exists for S1 only");
        return cpwl_net(space);
    }
    switch (space.kind()) {
        case SpaceKind::S0: return s0_net(space);
        case SpaceKind::S1: return piecework_net(space.mesh(), s1_spec(space));
        case SpaceKind::RT0: return piecework_net(space.mesh(), rt0_spec(space));
    }
    throw std::logic_error("basis_net: unreachable");
}

nn::NeuralNet FoslsNet::materialize() const {
    if (!has_coeffs()) throw std::logic_error("FoslsNet: no output coefficients set");
    const auto& layers = basis_.layers();
    std::vector<Layer> out(layers.begin(), layers.end() - 1);
    const Layer& last = layers.back();
    std::vector<Triplet> trip;
    std::vector<double> b(comb_.size(), 0.0);
    for (std::size_t row = 0; row < comb_.size(); ++row) {
        for (const auto& [br, ci] : comb_[row]) {
            const double c = coeffs_[ci];
            if (c == 0.0) continue;
            for (int k = last.A.rowptr[br]; k < last.A.rowptr[br + 1]; ++k)
                trip.emplace_back(static_cast<int>(row), last.A.colidx[k],
                                  c * last.A.vals[k]);
            b[row] += c * last.b[br];
        }
    }
    Layer lout;
    lout.A = Csr::from_triplets(static_cast<int>(comb_.size()), last.cols(), std::move(trip));
    lout.b = std::move(b);
    lout.act.assign(comb_.size(), Act::Id);
    out.push_back(std::move(lout));
    return NeuralNet(basis_.input_dim(), std::move(out));
}

std::vector<double> FoslsNet::realize(Vec2 x) const {
    if (!has_coeffs()) throw std::logic_error("FoslsNet: no output coefficients set");
    const auto base = basis_.realize2(x.x, x.y);
    std::vector<double> out(comb_.size(), 0.0);
    for (std::size_t row = 0; row < comb_.size(); ++row)
        for (const auto& [br, ci] : comb_[row]) out[row] += coeffs_[ci] * base[br];
    return out;
}

bool FoslsNet::same_signature(const FoslsNet& o) const {
    if (variant_ != o.variant_ || total_dim_ != o.total_dim_ ||
        factor_ncomp_ != o.factor_ncomp_ || comb_ != o.comb_)
        return false;
    if (basis_.depth() != o.basis_.depth()) return false;
    for (int l = 0; l < basis_.depth(); ++l) {
        if (basis_.layer(l).rows() != o.basis_.layer(l).rows()) return false;
        if (basis_.layer(l).act != o.basis_.layer(l).act) return false;
    }
    return true;
}

FoslsNet fosls_basis_net(const ProductSpace& sp, Variant variant) {
    FoslsNet out;
    out.variant_ = variant;
    out.total_dim_ = sp.total_dim();
    for (int k = 0; k < sp.num_factors(); ++k)
        out.factor_ncomp_.push_back(sp.factors[k].ncomp());

    if (variant == Variant::PerFactor) {
        std::vector<NeuralNet> nets;
        std::vector<int> row0;
        int rows = 0;
        for (int k = 0; k < sp.num_factors(); ++k) {
            nets.push_back(basis_net(sp.factors[k]));
            row0.push_back(rows);
            rows += nets.back().output_dim();
        }
        out.basis_ = parallelize(nets);
        for (int k = 0; k < sp.num_factors(); ++k) {
            const int nc = sp.factors[k].ncomp();
            for (int c = 0; c < nc; ++c) {
                std::vector<std::pair<int, int>> terms;
                for (int j = 0; j < sp.factors[k].dim(); ++j)
                    terms.emplace_back(row0[k] + j * nc + c, sp.offset[k] + j);
                out.comb_.push_back(std::move(terms));
            }
        }
        return out;
    }

    // Shared: one basis net per distinct factor kind, emulating the union of
    // the factors' active entities; masked factors contribute zero weights.
    struct Group {
        SpaceKind kind;
        std::vector<int> entities;        // union, canonical order
        std::map<int, int> entity_slot;   // entity -> position
        int row0 = 0;
        int ncomp = 1;
    };
    std::vector<Group> groups;
    std::map<int, int> factor_group;
    for (int k = 0; k < sp.num_factors(); ++k) {
        const FeSpace& f = sp.factors[k];
        int gi = -1;
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (groups[g].kind == f.kind()) gi = static_cast<int>(g);
        if (gi < 0) {
            gi = static_cast<int>(groups.size());
            groups.push_back({f.kind(), {}, {}, 0, f.ncomp()});
        }
        factor_group[k] = gi;
        for (int j = 0; j < f.dim(); ++j) groups[gi].entity_slot[f.entity_of_dof(j)] = 1;
    }
    std::vector<NeuralNet> nets;
    int rows = 0;
    for (auto& g : groups) {
        int slot = 0;
        for (auto& [e, s] : g.entity_slot) {
            s = slot++;
            g.entities.push_back(e);
        }
        PieceworkSpec spec;
        const auto& m = sp.mesh();
        if (g.kind == SpaceKind::S1) {
            spec = PieceworkSpec{};
            spec.ncomp = 1;
            spec.pieces.resize(g.entities.size());
            for (std::size_t i = 0; i < g.entities.size(); ++i) {
                const int v = g.entities[i];
                for (int K : m.vertex_tris(v)) {
                    const auto& tr = m.tri(K);
                    int loc = -1;
                    for (int j = 0; j < 3; ++j)
                        if (tr[j] == v) loc = j;
                    spec.pieces[i].push_back({K, {barycentric(m, K, loc)}});
                }
            }
            nets.push_back(piecework_net(m, spec));
        } else if (g.kind == SpaceKind::RT0) {
            // union is always the full edge set here
            FeSpace full(m, SpaceKind::RT0, {});
            nets.push_back(piecework_net(m, rt0_spec(full)));
            g.entities.clear();
            g.entity_slot.clear();
            for (int e = 0; e < m.num_edges(); ++e) {
                g.entity_slot[e] = e;
                g.entities.push_back(e);
            }
        } else {
            FeSpace full(m, SpaceKind::S0, {});
            nets.push_back(s0_net(full));
            g.entities.clear();
            g.entity_slot.clear();
            for (int t = 0; t < m.num_triangles(); ++t) {
                g.entity_slot[t] = t;
                g.entities.push_back(t);
            }
        }
        g.row0 = rows;
        rows += nets.back().output_dim();
    }
    out.basis_ = nets.size() == 1 ? nets.front() : parallelize(nets);
    for (int k = 0; k < sp.num_factors(); ++k) {
        const Group& g = groups[factor_group[k]];
        const FeSpace& f = sp.factors[k];
        const int nc = f.ncomp();
        for (int c = 0; c < nc; ++c) {
            std::vector<std::pair<int, int>> terms;
            for (int j = 0; j < f.dim(); ++j) {
                const int slot = g.entity_slot.at(f.entity_of_dof(j));
                terms.emplace_back(g.row0 + slot * nc + c, sp.offset[k] + j);
            }
            out.comb_.push_back(std::move(terms));
        }
    }
    return out;
}

FoslsNet set_output_weights(const FoslsNet& basis, std::vector<double> coeffs) {
    if (static_cast<int>(coeffs.size()) != basis.total_dim())
        throw std::invalid_argument("set_output_weights: coefficient length mismatch");
    FoslsNet out = basis;
    out.coeffs_ = std::move(coeffs);
    return out;
}

FoslsNet nn_linear_comb(const FoslsNet& n1, double lam, const FoslsNet& n2) {
    if (!n1.same_signature(n2))
        throw std::invalid_argument("nn_linear_comb: hidden-layer signatures differ");
    if (!n1.has_coeffs() || !n2.has_coeffs())
        throw std::invalid_argument("nn_linear_comb: both nets need coefficients");
    std::vector<double> c = n1.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += lam * n2.coeffs()[i];
    return set_output_weights(n1, std::move(c));
}

DeepSolveResult deep_lsq_solve(const SystemOperator& sys, const ProductSpace& sp,
                               Variant variant, lsq::SolveOptions opts) {
    const auto ls = lsq::assemble(sys, sp);
    auto sol = lsq::solve(ls, opts);
    DeepSolveResult out;
    out.net = set_output_weights(fosls_basis_net(sp, variant), sol.coeffs);
    out.ls_value = lsq::ls_value(sys, sp, sol.coeffs);
    out.fem = std::move(sol);
    return out;
}

lsq::EstimatorField estimate_from_net(const SystemOperator& sys, const ProductSpace& sp,
                                      const FoslsNet& net) {
    const auto& m = sp.mesh();
    const int nf = sp.num_factors();
    lsq::EstimatorField ef;
    double total_sq = 0;
    const int deg = sys.default_quad_degree();
    const auto vol_rule = quad::triangle_rule_interior(deg);
    const auto seg_rule = quad::segment_rule(std::min(7, deg));

    for (int K = 0; K < m.num_triangles(); ++K) {
        // the realization is affine on K: reconstruct it exactly from three
        // interior samples
        const Vec2 cen = m.centroid(K);
        std::array<Vec2, 3> pts;
        std::array<std::vector<double>, 3> vals;
        for (int j = 0; j < 3; ++j) {
            pts[j] = cen + (m.vertex(m.tri(K)[j]) - cen) * 0.5;
            vals[j] = net.realize(pts[j]);
        }
        const int nout = static_cast<int>(vals[0].size());
        // solve [1 x y][a0 ax ay]' = v for each output row
        const double det = (pts[1].x - pts[0].x) * (pts[2].y - pts[0].y) -
                           (pts[2].x - pts[0].x) * (pts[1].y - pts[0].y);
        std::vector<Affine> aff(nout);
        for (int r = 0; r < nout; ++r) {
            const double d1 = vals[1][r] - vals[0][r];
            const double d2 = vals[2][r] - vals[0][r];
            const double ax = (d1 * (pts[2].y - pts[0].y) - d2 * (pts[1].y - pts[0].y)) / det;
            const double ay = (d2 * (pts[1].x - pts[0].x) - d1 * (pts[2].x - pts[0].x)) / det;
            aff[r] = {vals[0][r] - ax * pts[0].x - ay * pts[0].y, ax, ay};
        }
        auto state_at = [&](Vec2 x) {
            systems::StateEval st;
            st.f.resize(nf);
            int row = 0;
            for (int k = 0; k < nf; ++k) {
                const int nc = net.factor_ncomp(k);
                ShapeEval s;
                s.ncomp = nc;
                for (int c = 0; c < nc; ++c) s.value[c] = aff[row + c](x);
                if (nc == 1) {
                    s.grad[0] = aff[row].ax;
                    s.grad[1] = aff[row].ay;
                } else {
                    s.div = aff[row].ax + aff[row + 1].ay;
                }
                st.f[k] = s;
                row += nc;
            }
            return st;
        };

        const auto& tr = m.tri(K);
        const Vec2 a = m.vertex(tr[0]), b = m.vertex(tr[1]), c = m.vertex(tr[2]);
        const double two_area = 2.0 * m.area(K);
        double e2 = 0;
        for (std::size_t q = 0; q < vol_rule.size(); ++q) {
            const auto& l = vol_rule.bary[q];
            const Vec2 x = a * l[0] + b * l[1] + c * l[2];
            const auto r = systems::residual_from_state(sys, state_at(x), x);
            double rr = 0;
            for (double v : r) rr += v * v;
            e2 += two_area * vol_rule.weights[q] * rr;
        }
        if (sys.has_initial_trace()) {
            for (int e : systems::owned_initial_edges(sp, K)) {
                const auto [p, q] = m.edges()[e];
                const Vec2 pa = m.vertex(p), pb = m.vertex(q);
                const double len = (pb - pa).norm();
                for (std::size_t i = 0; i < seg_rule.size(); ++i) {
                    const Vec2 x = pa + (pb - pa) * seg_rule.bary[i][0];
                    const auto r = systems::trace_residual_from_state(sys, state_at(x), x);
                    double rr = 0;
                    for (double v : r) rr += v * v;
                    e2 += len * seg_rule.weights[i] * rr;
                }
            }
        }
        ef.per_element.push_back(std::sqrt(std::max(0.0, e2)));
        total_sq += e2;
    }
    ef.total = std::sqrt(std::max(0.0, total_sq));
    return ef;
}

}  // namespace fosls::nnemu
