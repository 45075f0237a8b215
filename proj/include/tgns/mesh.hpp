#pragma once

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <memory>
#include <vector>

namespace tgns {

class Mesh;
using MeshPtr = std::shared_ptr<const Mesh>;

// Conforming triangulation of the unit square.  Meshes are immutable after
// construction; refined meshes keep a handle to their parent so that nested
// finite-element spaces can walk the ancestry chain.
class Mesh {
 public:
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;       // vertex ids, counterclockwise
  std::vector<std::array<int, 2>> edges;           // vertex id pairs, lo < hi
  std::vector<std::array<int, 3>> triangle_edges;  // edge ids; local edge k is opposite vertex k
  std::vector<bool> boundary_vertex;
  std::vector<bool> boundary_edge;
  int level = 0;
  MeshPtr parent;                    // null for a base mesh
  std::vector<int> parent_triangle;  // child element -> parent element (empty for base)
  double h_max = 0.0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_edges() const { return static_cast<int>(edges.size()); }

  double signed_area(int t) const;
  // True if `ancestor` appears in this mesh's parent chain (or is this mesh).
  bool descends_from(const Mesh& ancestor) const;
};

struct MeshStats {
  double h_max;
  double min_angle_deg;
  double regularity_ratio;  // circumradius / inradius
};

// n-by-n grid of squares, each split along the lower-left to upper-right
// diagonal: 2n^2 triangles, (n+1)^2 vertices.  Rejects n < 1.
MeshPtr unit_square_mesh(int n);

// Red refinement: every triangle is split into four congruent children by its
// edge midpoints.  The result is nested in the input (coarse vertices keep
// their ids) and geometrically identical to unit_square_mesh(2n) when the
// input is unit_square_mesh(n).
MeshPtr refine_uniform(const MeshPtr& m);

MeshStats mesh_stats(const Mesh& m);

// Plain-text dump: "v x y" per vertex, "t i j k" per triangle (0-based).
void write_mesh_txt(const Mesh& m, std::ostream& os);

}  // namespace tgns
