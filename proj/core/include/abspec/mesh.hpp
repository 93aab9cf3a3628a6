#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "abspec/geometry.hpp"

namespace abspec {

struct Triangle {
  std::array<int, 3> v;  // CCW
};

// Conforming triangulation. When a pole is attached it is a mesh vertex and
// any branch cuts are resolved as chains of mesh edges.
struct Mesh {
  std::vector<Vec2> points;
  std::vector<Triangle> triangles;
  std::vector<std::uint8_t> boundary_vertex;
  int pole_vertex = -1;
  std::vector<std::vector<int>> cut_chains;  // vertex ids, pole first
  std::vector<double> dist_to_pole;          // filled when a pole is attached

  int vertex_count() const { return (int)points.size(); }
  int triangle_count() const { return (int)triangles.size(); }
  int edge_count() const;
  double total_area() const;
  double min_angle_deg() const;
  double min_edge_length() const;
  // V - E + F == 2 with the outer face counted.
  bool euler_ok() const;
  // Brute-force point location; returns triangle id or -1, fills barycentrics.
  int locate(const Vec2& p, std::array<double, 3>& bary) const;
};

// Triangle adjacency: nbr[t][i] is the triangle across the edge opposite
// vertex i of triangle t, or -1 on the boundary.
std::vector<std::array<int, 3>> mesh_adjacency(const Mesh& mesh);

// Triangles incident to a vertex, in rotation order.
struct VertexFan {
  std::vector<int> tris;
  bool closed = false;
};
VertexFan vertex_fan(const Mesh& mesh, int v);

struct GradingSpec {
  double gamma = 0.5;       // in (0, 1]
  double radius = 0.0;      // 0 = auto: min(0.2, dist(pole, boundary))
  double floor_size = 0.0;  // 0 = auto: h^(1+gamma)
};

struct MeshOptions {
  double h = 0.1;
  GradingSpec grading;
  std::size_t max_vertices = 400000;
  double min_angle_deg = 20.0;
};

// Graded Delaunay-refinement triangulation. Boundary and cut polylines are
// honored as mesh edges; the pole (when given) becomes a mesh vertex.
Mesh triangulate(const Domain& domain, const MeshOptions& opt,
                 const Pole* pole = nullptr, const std::vector<Cut>& cuts = {});

// One duplicated DOF pair per interior cut vertex; copies couple with
// sign -1. The pole keeps a single vertex, constrained to zero later.
struct CutPair {
  int left;
  int right;
};

struct CutMesh {
  Mesh mesh;
  std::vector<int> chain_left;   // pole first; original vertex ids
  std::vector<int> chain_right;  // pole shared at index 0, then duplicates
  std::vector<CutPair> pairs;    // interior cut vertices (free DOF pairs)
  int pole_vertex = -1;
};

CutMesh insert_cut(const Mesh& mesh, std::size_t chain_index = 0);

// Two copies of the cut mesh glued crosswise along the cut. deck is the
// sheet-swap vertex permutation; it fixes only the pole.
struct CoverMesh {
  Mesh mesh;
  std::vector<int> deck;
  int pole_vertex = -1;
};

CoverMesh double_cover(const CutMesh& cm);

// Plain-text exchange format: header "V E T", vertex lines "id x y flags",
// triangle lines "id v1 v2 v3". Round-trips doubles exactly.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace abspec
