#pragma once

// Regular simplicial 2D meshes with newest-vertex-bisection refinement.
// Triangles are stored CCW; the refinement edge of triangle t is the edge
// opposite local vertex refedge[t].  A finished mesh is immutable and can
// be shared across threads; refine_nvb returns a new mesh.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fosls::mesh {

struct Vec2 {
    double x = 0, y = 0;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const;
};

enum class BoundaryLabel : uint8_t { Dirichlet, Initial, Free };

const char* to_string(BoundaryLabel);
BoundaryLabel boundary_label_from(const std::string&);

using EdgeKey = std::pair<int, int>;  // sorted vertex pair
inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

enum class EntityKind : uint8_t { Vertex, Edge, Triangle };

struct EntitySet {
    EntityKind kind;
    // Canonical items: vertices and triangles by index; edges by position in
    // the lexicographically sorted edge list (see SimplicialMesh::edges()).
    std::vector<int> items;
    std::vector<int> multiplicity;  // s(i)
    int max_multiplicity() const;   // s-fraktur(I)
};

class SimplicialMesh {
  public:
    SimplicialMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                   std::map<EdgeKey, BoundaryLabel> boundary_marks,
                   std::vector<int> refinement_edge = {}, std::vector<int> generation = {});

    int num_vertices() const { return static_cast<int>(verts_.size()); }
    int num_triangles() const { return static_cast<int>(tris_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }

    Vec2 vertex(int v) const { return verts_[v]; }
    const std::array<int, 3>& tri(int t) const { return tris_[t]; }
    int refinement_edge(int t) const { return refedge_[t]; }
    int generation(int t) const { return gen_[t]; }

    double area(int t) const;         // positive
    double total_area() const;
    Vec2 centroid(int t) const;
    double diameter(int t) const;
    double max_diameter() const;      // mesh width

    // Edges sorted lexicographically by (min,max) vertex pair.
    const std::vector<EdgeKey>& edges() const { return edges_; }
    int edge_index(EdgeKey) const;                    // -1 if absent
    const std::array<int, 2>& edge_tris(int e) const { return edge_tris_[e]; }  // -1 pad
    bool edge_on_boundary(int e) const { return edge_tris_[e][1] < 0; }
    std::optional<BoundaryLabel> boundary_label(int e) const;
    const std::array<int, 3>& tri_edges(int t) const { return tri_edges_[t]; }
    const std::vector<int>& vertex_tris(int v) const { return vert_tris_[v]; }

    // Smallest-index adjacent triangle; boundary edges are owned by their
    // unique neighbor.  Half-open point ownership follows this convention.
    int edge_owner(int e) const;
    bool tri_owns_edge(int t, int e) const { return edge_owner(e) == t; }

    // Closed-triangle membership and half-open point location (smallest-index
    // owner among containing triangles); -1 when outside the mesh.
    bool tri_contains(int t, Vec2 p) const;
    int locate(Vec2 p) const;

    // Checks regularity; throws std::runtime_error with a description.
    void validate() const;

    std::string to_json() const;
    static SimplicialMesh from_json(const std::string&);

  private:
    std::vector<Vec2> verts_;
    std::vector<std::array<int, 3>> tris_;
    std::vector<int> refedge_;
    std::vector<int> gen_;
    std::map<EdgeKey, BoundaryLabel> boundary_;

    std::vector<EdgeKey> edges_;
    std::vector<std::array<int, 2>> edge_tris_;
    std::vector<std::array<int, 3>> tri_edges_;
    std::vector<std::vector<int>> vert_tris_;

    void build_connectivity();
    friend SimplicialMesh refine_nvb(const SimplicialMesh&, const std::set<int>&);
};

SimplicialMesh build_reference_mesh(const std::string& name, double T = 1.0);

// Bisects every marked triangle at least once and closes the mesh to a
// conforming NVB refinement.
SimplicialMesh refine_nvb(const SimplicialMesh&, const std::set<int>& marked);
SimplicialMesh refine_uniform(const SimplicialMesh&);

EntitySet entities(const SimplicialMesh&, EntityKind);

// All triangles sharing at least a vertex with K, including K.
std::vector<int> patch(const SimplicialMesh&, int K);

// Minimum interior angle over all triangles, radians.
double shape_regularity(const SimplicialMesh&);

// Triangle-style plain text mesh files.
SimplicialMesh read_node_ele(const std::string& node_path, const std::string& ele_path);

}  // namespace fosls::mesh
