#include "tgns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>

namespace tgns {

namespace {

constexpr double kBoundaryTol = 1e-12;

bool on_unit_boundary(const Eigen::Vector2d& p) {
  return std::abs(p.x()) <= kBoundaryTol || std::abs(p.x() - 1.0) <= kBoundaryTol ||
         std::abs(p.y()) <= kBoundaryTol || std::abs(p.y() - 1.0) <= kBoundaryTol;
}

// Builds edge list, triangle->edge maps, and boundary flags; computes h_max.
void finalize(Mesh& m) {
  std::map<std::pair<int, int>, int> edge_ids;
  std::vector<int> edge_use;
  m.triangle_edges.resize(m.triangles.size());
  for (size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tri = m.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_ids.try_emplace({a, b}, static_cast<int>(m.edges.size()));
      if (inserted) {
        m.edges.push_back({a, b});
        edge_use.push_back(0);
      }
      m.triangle_edges[t][k] = it->second;
      ++edge_use[it->second];
    }
  }

  m.boundary_vertex.assign(m.vertices.size(), false);
  for (size_t v = 0; v < m.vertices.size(); ++v) m.boundary_vertex[v] = on_unit_boundary(m.vertices[v]);
  m.boundary_edge.assign(m.edges.size(), false);
  for (size_t e = 0; e < m.edges.size(); ++e) {
    if (edge_use[e] == 1) {
      m.boundary_edge[e] = true;
    } else if (edge_use[e] != 2) {
      throw std::runtime_error("mesh: edge shared by more than two triangles");
    }
  }

  m.h_max = 0.0;
  for (const auto& e : m.edges)
    m.h_max = std::max(m.h_max, (m.vertices[e[0]] - m.vertices[e[1]]).norm());

  for (size_t t = 0; t < m.triangles.size(); ++t)
    if (m.signed_area(static_cast<int>(t)) <= 0.0)
      throw std::runtime_error("mesh: nonpositive triangle orientation");
}

}  // namespace

double Mesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  const Eigen::Vector2d a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

bool Mesh::descends_from(const Mesh& ancestor) const {
  for (const Mesh* m = this; m != nullptr; m = m->parent.get())
    if (m == &ancestor) return true;
  return false;
}

MeshPtr unit_square_mesh(int n) {
  if (n < 1) throw std::domain_error("unit_square_mesh: n must be >= 1");
  auto mesh = std::make_shared<Mesh>();
  mesh->vertices.reserve(static_cast<size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh->vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  mesh->triangles.reserve(static_cast<size_t>(2) * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      mesh->triangles.push_back({v00, v10, v11});
      mesh->triangles.push_back({v00, v11, v01});
    }
  }
  mesh->level = 0;
  finalize(*mesh);
  return mesh;
}

MeshPtr refine_uniform(const MeshPtr& coarse) {
  if (!coarse) throw std::domain_error("refine_uniform: null mesh");
  const Mesh& c = *coarse;
  auto fine = std::make_shared<Mesh>();
  fine->vertices = c.vertices;
  fine->vertices.reserve(c.vertices.size() + c.edges.size());
  for (const auto& e : c.edges)
    fine->vertices.emplace_back(0.5 * (c.vertices[e[0]] + c.vertices[e[1]]));

  const int nv = c.n_vertices();
  fine->triangles.reserve(static_cast<size_t>(4) * c.triangles.size());
  fine->parent_triangle.reserve(static_cast<size_t>(4) * c.triangles.size());
  for (int t = 0; t < c.n_triangles(); ++t) {
    const auto& tri = c.triangles[t];
    // m[k] is the midpoint of the edge opposite vertex k.
    const int m0 = nv + c.triangle_edges[t][0];
    const int m1 = nv + c.triangle_edges[t][1];
    const int m2 = nv + c.triangle_edges[t][2];
    fine->triangles.push_back({tri[0], m2, m1});
    fine->triangles.push_back({tri[1], m0, m2});
    fine->triangles.push_back({tri[2], m1, m0});
    fine->triangles.push_back({m0, m1, m2});
    for (int k = 0; k < 4; ++k) fine->parent_triangle.push_back(t);
  }
  fine->level = c.level + 1;
  fine->parent = coarse;
  finalize(*fine);
  return fine;
}

MeshStats mesh_stats(const Mesh& m) {
  MeshStats s{m.h_max, 180.0, 0.0};
  double worst_ratio = 0.0;
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    const double la = (m.vertices[tri[1]] - m.vertices[tri[2]]).norm();
    const double lb = (m.vertices[tri[2]] - m.vertices[tri[0]]).norm();
    const double lc = (m.vertices[tri[0]] - m.vertices[tri[1]]).norm();
    const double area = m.signed_area(t);
    const double circum = la * lb * lc / (4.0 * area);
    const double inr = 2.0 * area / (la + lb + lc);
    worst_ratio = std::max(worst_ratio, circum / inr);
    // Law of cosines per corner.
    const double angles[3] = {
        std::acos(std::clamp((lb * lb + lc * lc - la * la) / (2 * lb * lc), -1.0, 1.0)),
        std::acos(std::clamp((la * la + lc * lc - lb * lb) / (2 * la * lc), -1.0, 1.0)),
        std::acos(std::clamp((la * la + lb * lb - lc * lc) / (2 * la * lb), -1.0, 1.0))};
    for (double a : angles) s.min_angle_deg = std::min(s.min_angle_deg, a * 180.0 / M_PI);
  }
  s.regularity_ratio = worst_ratio;
  return s;
}

void write_mesh_txt(const Mesh& m, std::ostream& os) {
  os.precision(17);
  for (const auto& v : m.vertices) os << "v " << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : m.triangles) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace tgns
