#include "fosls/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fosls::mesh {

double Vec2::norm() const { return std::hypot(x, y); }

const char* to_string(BoundaryLabel l) {
    switch (l) {
        case BoundaryLabel::Dirichlet: return "dirichlet";
        case BoundaryLabel::Initial: return "initial";
        case BoundaryLabel::Free: return "free";
    }
    return "?";
}

BoundaryLabel boundary_label_from(const std::string& s) {
    if (s == "dirichlet") return BoundaryLabel::Dirichlet;
    if (s == "initial") return BoundaryLabel::Initial;
    if (s == "free") return BoundaryLabel::Free;
    throw std::invalid_argument("unknown boundary label: " + s);
}

int EntitySet::max_multiplicity() const {
    int m = 0;
    for (int s : multiplicity) m = std::max(m, s);
    return m;
}

namespace {
double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * (b - a).cross(c - a); }
}  // namespace

SimplicialMesh::SimplicialMesh(std::vector<Vec2> vertices,
                               std::vector<std::array<int, 3>> triangles,
                               std::map<EdgeKey, BoundaryLabel> boundary_marks,
                               std::vector<int> refinement_edge, std::vector<int> generation)
    : verts_(std::move(vertices)),
      tris_(std::move(triangles)),
      refedge_(std::move(refinement_edge)),
      gen_(std::move(generation)),
      boundary_(std::move(boundary_marks)) {
    for (auto& t : tris_) {
        for (int v : t)
            if (v < 0 || v >= num_vertices())
                throw std::invalid_argument("triangle vertex index out of range");
        if (signed_area(verts_[t[0]], verts_[t[1]], verts_[t[2]]) <= 0.0)
            throw std::invalid_argument("triangle with non-positive signed area");
    }
    if (gen_.empty()) gen_.assign(tris_.size(), 0);
    if (gen_.size() != tris_.size()) throw std::invalid_argument("generation size mismatch");
    if (refedge_.empty()) {
        // Longest-edge NVB initialization; ties broken by the smallest
        // opposite-vertex index.
        refedge_.reserve(tris_.size());
        for (const auto& t : tris_) {
            int best = 0;
            double best_len = -1.0;
            for (int r = 0; r < 3; ++r) {
                const double len = (verts_[t[(r + 2) % 3]] - verts_[t[(r + 1) % 3]]).norm();
                const double tol = 1e-12 * (len + best_len);
                if (len > best_len + tol ||
                    (std::abs(len - best_len) <= tol && t[r] < t[best])) {
                    best = r;
                    best_len = std::max(len, best_len);
                }
            }
            refedge_.push_back(best);
        }
    }
    if (refedge_.size() != tris_.size())
        throw std::invalid_argument("refinement edge size mismatch");
    build_connectivity();
}

void SimplicialMesh::build_connectivity() {
    edges_.clear();
    for (const auto& t : tris_)
        for (int j = 0; j < 3; ++j) edges_.push_back(edge_key(t[j], t[(j + 1) % 3]));
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    edge_tris_.assign(edges_.size(), {-1, -1});
    tri_edges_.assign(tris_.size(), {-1, -1, -1});
    for (int t = 0; t < num_triangles(); ++t) {
        for (int j = 0; j < 3; ++j) {
            // local edge j is opposite local vertex j
            const int e = edge_index(edge_key(tris_[t][(j + 1) % 3], tris_[t][(j + 2) % 3]));
            tri_edges_[t][j] = e;
            if (edge_tris_[e][0] < 0)
                edge_tris_[e][0] = t;
            else if (edge_tris_[e][1] < 0)
                edge_tris_[e][1] = t;
            else
                throw std::runtime_error("edge shared by more than two triangles");
        }
    }
    vert_tris_.assign(verts_.size(), {});
    for (int t = 0; t < num_triangles(); ++t)
        for (int v : tris_[t]) vert_tris_[v].push_back(t);
}

int SimplicialMesh::edge_index(EdgeKey k) const {
    auto it = std::lower_bound(edges_.begin(), edges_.end(), k);
    if (it == edges_.end() || *it != k) return -1;
    return static_cast<int>(it - edges_.begin());
}

std::optional<BoundaryLabel> SimplicialMesh::boundary_label(int e) const {
    auto it = boundary_.find(edges_[e]);
    if (it == boundary_.end()) return std::nullopt;
    return it->second;
}

double SimplicialMesh::area(int t) const {
    return signed_area(verts_[tris_[t][0]], verts_[tris_[t][1]], verts_[tris_[t][2]]);
}

double SimplicialMesh::total_area() const {
    double s = 0;
    for (int t = 0; t < num_triangles(); ++t) s += area(t);
    return s;
}

Vec2 SimplicialMesh::centroid(int t) const {
    const auto& tr = tris_[t];
    return (verts_[tr[0]] + verts_[tr[1]] + verts_[tr[2]]) * (1.0 / 3.0);
}

double SimplicialMesh::diameter(int t) const {
    const auto& tr = tris_[t];
    double d = 0;
    for (int j = 0; j < 3; ++j)
        d = std::max(d, (verts_[tr[(j + 1) % 3]] - verts_[tr[j]]).norm());
    return d;
}

double SimplicialMesh::max_diameter() const {
    double d = 0;
    for (int t = 0; t < num_triangles(); ++t) d = std::max(d, diameter(t));
    return d;
}

int SimplicialMesh::edge_owner(int e) const {
    const auto& ts = edge_tris_[e];
    if (ts[1] < 0) return ts[0];
    return std::min(ts[0], ts[1]);
}

bool SimplicialMesh::tri_contains(int t, Vec2 p) const {
    const auto& tr = tris_[t];
    for (int j = 0; j < 3; ++j) {
        const Vec2 a = verts_[tr[(j + 1) % 3]], b = verts_[tr[(j + 2) % 3]];
        if ((b - a).cross(p - a) < 0.0) return false;
    }
    return true;
}

int SimplicialMesh::locate(Vec2 p) const {
    for (int t = 0; t < num_triangles(); ++t)
        if (tri_contains(t, p)) return t;
    return -1;
}

void SimplicialMesh::validate() const {
    for (int t = 0; t < num_triangles(); ++t)
        if (area(t) <= 0.0) throw std::runtime_error("validate: non-positive area");
    // hanging vertices: no vertex may lie in the open interior of an edge
    for (int e = 0; e < num_edges(); ++e) {
        const Vec2 a = verts_[edges_[e].first], b = verts_[edges_[e].second];
        const double len2 = (b - a).dot(b - a);
        for (int v = 0; v < num_vertices(); ++v) {
            if (v == edges_[e].first || v == edges_[e].second) continue;
            const Vec2 p = verts_[v];
            const double cr = (b - a).cross(p - a);
            const double s = (p - a).dot(b - a) / len2;
            if (std::abs(cr) < 1e-12 * len2 && s > 1e-12 && s < 1.0 - 1e-12)
                throw std::runtime_error("validate: hanging vertex on edge");
        }
    }
    // every boundary edge must carry a label, interior edges must not
    for (int e = 0; e < num_edges(); ++e) {
        const bool has = boundary_.count(edges_[e]) > 0;
        if (edge_on_boundary(e) != has)
            throw std::runtime_error("validate: boundary label bookkeeping broken");
    }
}

SimplicialMesh build_reference_mesh(const std::string& name, double T) {
    if (name == "unit_square") {
        std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
        std::map<EdgeKey, BoundaryLabel> b;
        for (EdgeKey k : {edge_key(0, 1), edge_key(1, 2), edge_key(2, 3), edge_key(0, 3)})
            b[k] = BoundaryLabel::Dirichlet;
        return SimplicialMesh(std::move(v), std::move(t), std::move(b));
    }
    if (name == "l_shape") {
        // (-1,1)^2 minus the quadrant [0,1)x(-1,0]; fan of 6 around the
        // reentrant corner at the origin.
        std::vector<Vec2> v = {{0, 0},  {1, 0},  {1, 1},   {0, 1},
                               {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}};
        std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4},
                                             {0, 4, 5}, {0, 5, 6}, {0, 6, 7}};
        std::map<EdgeKey, BoundaryLabel> b;
        for (auto [p, q] : std::vector<std::pair<int, int>>{
                 {0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 0}})
            b[edge_key(p, q)] = BoundaryLabel::Dirichlet;
        return SimplicialMesh(std::move(v), std::move(t), std::move(b));
    }
    if (name == "spacetime_rect") {
        if (!(T > 0)) throw std::invalid_argument("spacetime_rect: T must be positive");
        // axis t first: [0,T] x [0,1]; lateral x in {0,1} is Dirichlet,
        // t=0 is the initial trace, t=T is free
        std::vector<Vec2> v = {{0, 0}, {T, 0}, {T, 1}, {0, 1}};
        std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
        std::map<EdgeKey, BoundaryLabel> b;
        b[edge_key(0, 1)] = BoundaryLabel::Dirichlet;  // x = 0 lateral
        b[edge_key(2, 3)] = BoundaryLabel::Dirichlet;  // x = 1 lateral
        b[edge_key(0, 3)] = BoundaryLabel::Initial;    // t = 0
        b[edge_key(1, 2)] = BoundaryLabel::Free;       // t = T
        return SimplicialMesh(std::move(v), std::move(t), std::move(b));
    }
    throw std::invalid_argument("unknown reference mesh: " + name);
}

SimplicialMesh refine_nvb(const SimplicialMesh& m, const std::set<int>& marked) {
    for (int t : marked)
        if (t < 0 || t >= m.num_triangles())
            throw std::invalid_argument("refine_nvb: marked triangle out of range");
    if (marked.empty()) return m;

    // close the set of edges to bisect: a triangle with any marked edge must
    // have its refinement edge marked too
    std::vector<char> edge_marked(m.num_edges(), 0);
    for (int t : marked) edge_marked[m.tri_edges(t)[m.refinement_edge(t)]] = 1;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int t = 0; t < m.num_triangles(); ++t) {
            const auto& te = m.tri_edges(t);
            const int ref = te[m.refinement_edge(t)];
            if (edge_marked[ref]) continue;
            if (edge_marked[te[0]] || edge_marked[te[1]] || edge_marked[te[2]]) {
                edge_marked[ref] = 1;
                changed = true;
            }
        }
    }

    std::vector<Vec2> verts(m.verts_);
    std::map<EdgeKey, BoundaryLabel> boundary(m.boundary_);
    std::vector<int> midpoint(m.num_edges(), -1);
    for (int e = 0; e < m.num_edges(); ++e) {
        if (!edge_marked[e]) continue;
        const auto [a, b] = m.edges()[e];
        midpoint[e] = static_cast<int>(verts.size());
        verts.push_back((m.vertex(a) + m.vertex(b)) * 0.5);
        if (auto it = boundary.find(m.edges()[e]); it != boundary.end()) {
            const BoundaryLabel l = it->second;
            boundary.erase(it);
            boundary[edge_key(a, midpoint[e])] = l;
            boundary[edge_key(midpoint[e], b)] = l;
        }
    }

    std::vector<std::array<int, 3>> tris;
    std::vector<int> refedge, gen;
    auto emit = [&](int v0, int v1, int v2, int g) {
        tris.push_back({v0, v1, v2});
        refedge.push_back(0);  // children: refinement edge opposite the new vertex
        gen.push_back(g);
    };
    // bisect (peak,p,q) at the midpoint of its refinement edge {p,q}; if a
    // child's refinement edge {peak,p} or {q,peak} is also marked, bisect it
    // too (child refinement edges are always edges of the original mesh)
    auto bisect = [&](int peak, int p, int q, int g, auto&& self) -> void {
        const int mid = midpoint[m.edge_index(edge_key(p, q))];
        const int ce1 = m.edge_index(edge_key(peak, p));
        if (ce1 >= 0 && edge_marked[ce1])
            self(mid, peak, p, g + 1, self);
        else
            emit(mid, peak, p, g + 1);
        const int ce2 = m.edge_index(edge_key(q, peak));
        if (ce2 >= 0 && edge_marked[ce2])
            self(mid, q, peak, g + 1, self);
        else
            emit(mid, q, peak, g + 1);
    };

    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tr = m.tri(t);
        const int r = m.refinement_edge(t);
        const int ref_e = m.tri_edges(t)[r];
        if (!edge_marked[ref_e]) {
            tris.push_back(tr);
            refedge.push_back(r);
            gen.push_back(m.generation(t));
            continue;
        }
        bisect(tr[r], tr[(r + 1) % 3], tr[(r + 2) % 3], m.generation(t), bisect);
    }
    return SimplicialMesh(std::move(verts), std::move(tris), std::move(boundary),
                          std::move(refedge), std::move(gen));
}

SimplicialMesh refine_uniform(const SimplicialMesh& m) {
    std::set<int> all;
    for (int t = 0; t < m.num_triangles(); ++t) all.insert(t);
    return refine_nvb(m, all);
}

EntitySet entities(const SimplicialMesh& m, EntityKind kind) {
    EntitySet s;
    s.kind = kind;
    if (kind == EntityKind::Vertex) {
        for (int v = 0; v < m.num_vertices(); ++v) {
            s.items.push_back(v);
            s.multiplicity.push_back(static_cast<int>(m.vertex_tris(v).size()));
        }
    } else if (kind == EntityKind::Edge) {
        for (int e = 0; e < m.num_edges(); ++e) {
            s.items.push_back(e);
            s.multiplicity.push_back(m.edge_on_boundary(e) ? 1 : 2);
        }
    } else {
        for (int t = 0; t < m.num_triangles(); ++t) {
            s.items.push_back(t);
            s.multiplicity.push_back(1);
        }
    }
    return s;
}

std::vector<int> patch(const SimplicialMesh& m, int K) {
    if (K < 0 || K >= m.num_triangles()) throw std::invalid_argument("patch: bad triangle");
    std::set<int> out;
    for (int v : m.tri(K))
        for (int t : m.vertex_tris(v)) out.insert(t);
    return {out.begin(), out.end()};
}

double shape_regularity(const SimplicialMesh& m) {
    double min_angle = 4.0;  // > pi
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& tr = m.tri(t);
        for (int j = 0; j < 3; ++j) {
            const Vec2 a = m.vertex(tr[j]);
            const Vec2 u = m.vertex(tr[(j + 1) % 3]) - a;
            const Vec2 v = m.vertex(tr[(j + 2) % 3]) - a;
            min_angle = std::min(min_angle, std::atan2(std::abs(u.cross(v)), u.dot(v)));
        }
    }
    return min_angle;
}

std::string SimplicialMesh::to_json() const {
    nlohmann::json j;
    auto& jv = j["vertices"] = nlohmann::json::array();
    for (const auto& v : verts_) jv.push_back({v.x, v.y});
    auto& jt = j["triangles"] = nlohmann::json::array();
    for (const auto& t : tris_) jt.push_back({t[0], t[1], t[2]});
    j["refine_edge"] = refedge_;
    j["generation"] = gen_;
    auto& jb = j["boundary"] = nlohmann::json::array();
    for (const auto& [k, l] : boundary_) jb.push_back({k.first, k.second, to_string(l)});
    return j.dump(2);
}

SimplicialMesh SimplicialMesh::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    std::vector<Vec2> verts;
    for (const auto& v : j.at("vertices")) verts.push_back({v.at(0), v.at(1)});
    std::vector<std::array<int, 3>> tris;
    for (const auto& t : j.at("triangles")) tris.push_back({t.at(0), t.at(1), t.at(2)});
    std::map<EdgeKey, BoundaryLabel> boundary;
    for (const auto& b : j.at("boundary"))
        boundary[edge_key(b.at(0), b.at(1))] = boundary_label_from(b.at(2));
    std::vector<int> refedge, gen;
    if (j.contains("refine_edge")) refedge = j["refine_edge"].get<std::vector<int>>();
    if (j.contains("generation")) gen = j["generation"].get<std::vector<int>>();
    return SimplicialMesh(std::move(verts), std::move(tris), std::move(boundary),
                          std::move(refedge), std::move(gen));
}

SimplicialMesh read_node_ele(const std::string& node_path, const std::string& ele_path) {
    std::ifstream nf(node_path);
    if (!nf) throw std::runtime_error("cannot open " + node_path);
    auto next_data_line = [](std::ifstream& f, std::istringstream& ls) {
        std::string line;
        while (std::getline(f, line)) {
            const auto pos = line.find('#');
            if (pos != std::string::npos) line.erase(pos);
            if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
            ls = std::istringstream(line);
            return true;
        }
        return false;
    };
    std::istringstream ls;
    if (!next_data_line(nf, ls)) throw std::runtime_error("empty .node file");
    int nv = 0, dim = 0, nattr = 0, nmark = 0;
    ls >> nv >> dim >> nattr >> nmark;
    if (dim != 2) throw std::runtime_error(".node: only 2D supported");
    std::vector<Vec2> verts(nv);
    std::vector<int> marker(nv, 1);
    int base = -1;
    for (int i = 0; i < nv; ++i) {
        if (!next_data_line(nf, ls)) throw std::runtime_error(".node: truncated");
        int idx;
        double x, y;
        ls >> idx >> x >> y;
        if (base < 0) base = idx;  // 0- or 1-based, detected from the first index
        for (int a = 0; a < nattr; ++a) { double skip; ls >> skip; }
        if (nmark > 0) ls >> marker[idx - base];
        verts[idx - base] = {x, y};
    }

    std::ifstream ef(ele_path);
    if (!ef) throw std::runtime_error("cannot open " + ele_path);
    if (!next_data_line(ef, ls)) throw std::runtime_error("empty .ele file");
    int nt = 0, npt = 0;
    ls >> nt >> npt;
    if (npt != 3) throw std::runtime_error(".ele: only 3-node triangles supported");
    std::vector<std::array<int, 3>> tris(nt);
    for (int i = 0; i < nt; ++i) {
        if (!next_data_line(ef, ls)) throw std::runtime_error(".ele: truncated");
        int idx, a, b, c;
        ls >> idx >> a >> b >> c;
        std::array<int, 3> t = {a - base, b - base, c - base};
        if (signed_area(verts[t[0]], verts[t[1]], verts[t[2]]) < 0) std::swap(t[1], t[2]);
        tris[idx - base] = t;
    }

    // boundary edges get Dirichlet where both endpoint markers are nonzero
    std::map<EdgeKey, int> count;
    for (const auto& t : tris)
        for (int j = 0; j < 3; ++j) count[edge_key(t[j], t[(j + 1) % 3])]++;
    std::map<EdgeKey, BoundaryLabel> boundary;
    for (const auto& [k, c] : count)
        if (c == 1)
            boundary[k] = (marker[k.first] != 0 && marker[k.second] != 0)
                              ? BoundaryLabel::Dirichlet
                              : BoundaryLabel::Free;
    return SimplicialMesh(std::move(verts), std::move(tris), std::move(boundary));
}

}  // namespace fosls::mesh
