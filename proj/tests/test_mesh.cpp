#include "tgns/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace tgns;

TEST_SUITE("mesh") {

TEST_CASE("unit square counts") {
  const MeshPtr m1 = unit_square_mesh(1);
  CHECK(m1->n_triangles() == 2);
  CHECK(m1->n_vertices() == 4);
  int nb = 0;
  for (bool b : m1->boundary_vertex) nb += b;
  CHECK(nb == 4);

  const MeshPtr m2 = unit_square_mesh(2);
  CHECK(m2->n_triangles() == 8);
  CHECK(m2->n_vertices() == 9);
  nb = 0;
  for (bool b : m2->boundary_vertex) nb += b;
  CHECK(nb == 8);

  const MeshPtr m4 = unit_square_mesh(4);
  CHECK(m4->n_triangles() == 32);
  CHECK(m4->n_vertices() == 25);
  CHECK(m4->h_max == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-15));

  CHECK_THROWS_AS(unit_square_mesh(0), std::domain_error);
}

TEST_CASE("refinement counts and exact halving") {
  const MeshPtr m1 = unit_square_mesh(1);
  const MeshPtr r1 = refine_uniform(m1);
  CHECK(r1->n_triangles() == 8);
  CHECK(r1->n_vertices() == 9);  // 4 vertices + 5 edges
  CHECK(r1->level == 1);
  CHECK(r1->parent.get() == m1.get());
  CHECK(r1->h_max == m1->h_max / 2);  // dyadic coordinates: exact

  const MeshPtr m2 = unit_square_mesh(2);
  MeshPtr r = refine_uniform(refine_uniform(m2));
  const MeshPtr m8 = unit_square_mesh(8);
  REQUIRE(r->n_vertices() == m8->n_vertices());
  std::set<std::pair<double, double>> a, b;
  for (const auto& v : r->vertices) a.insert({v.x(), v.y()});
  for (const auto& v : m8->vertices) b.insert({v.x(), v.y()});
  CHECK(a == b);
}

TEST_CASE("nesting: coarse vertices appear bitwise among fine vertices") {
  MeshPtr m = unit_square_mesh(3);
  const MeshPtr fine = refine_uniform(m);
  for (int v = 0; v < m->n_vertices(); ++v) {
    CHECK(fine->vertices[v].x() == m->vertices[v].x());
    CHECK(fine->vertices[v].y() == m->vertices[v].y());
  }
}

TEST_CASE("parent map: four children per parent covering its area") {
  const MeshPtr m = unit_square_mesh(2);
  const MeshPtr f = refine_uniform(m);
  std::vector<int> child_count(m->n_triangles(), 0);
  std::vector<double> child_area(m->n_triangles(), 0.0);
  for (int t = 0; t < f->n_triangles(); ++t) {
    child_count[f->parent_triangle[t]]++;
    child_area[f->parent_triangle[t]] += f->signed_area(t);
  }
  for (int t = 0; t < m->n_triangles(); ++t) {
    CHECK(child_count[t] == 4);
    CHECK(child_area[t] == doctest::Approx(m->signed_area(t)).epsilon(1e-14));
  }
}

TEST_CASE("euler identity and positive orientation on several meshes") {
  for (int n : {1, 2, 3, 4, 8}) {
    MeshPtr m = unit_square_mesh(n);
    for (int lvl = 0; lvl < 2; ++lvl) {
      CHECK(m->n_vertices() - m->n_edges() + m->n_triangles() == 1);
      for (int t = 0; t < m->n_triangles(); ++t) CHECK(m->signed_area(t) > 0.0);
      m = refine_uniform(m);
    }
  }
}

TEST_CASE("interior edges shared by two triangles, boundary edges by one") {
  const MeshPtr m = unit_square_mesh(3);
  std::vector<int> use(m->n_edges(), 0);
  for (const auto& te : m->triangle_edges)
    for (int e : te) use[e]++;
  for (int e = 0; e < m->n_edges(); ++e) CHECK(use[e] == (m->boundary_edge[e] ? 1 : 2));
}

TEST_CASE("stats: right isoceles structured mesh") {
  const MeshPtr m = unit_square_mesh(4);
  const MeshStats s = mesh_stats(*m);
  CHECK(s.min_angle_deg == doctest::Approx(45.0).epsilon(1e-12));
  CHECK(s.h_max == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-15));

  // Regularity ratio constant along a refinement chain (congruent triangles).
  MeshPtr mm = unit_square_mesh(2);
  const double r0 = mesh_stats(*mm).regularity_ratio;
  CHECK(r0 == doctest::Approx(std::sqrt(2.0) + 1.0).epsilon(1e-12));
  for (int lvl = 0; lvl < 3; ++lvl) {
    mm = refine_uniform(mm);
    CHECK(mesh_stats(*mm).regularity_ratio == doctest::Approx(r0).epsilon(1e-12));
  }
}

TEST_CASE("plain-text dump format") {
  const MeshPtr m = unit_square_mesh(1);
  std::ostringstream os;
  write_mesh_txt(*m, os);
  std::istringstream is(os.str());
  std::string tag;
  int nv = 0, nt = 0;
  while (is >> tag) {
    if (tag == "v") {
      double x, y;
      REQUIRE(static_cast<bool>(is >> x >> y));
      ++nv;
    } else if (tag == "t") {
      int a, b, c;
      REQUIRE(static_cast<bool>(is >> a >> b >> c));
      CHECK(a >= 0);
      CHECK(a < m->n_vertices());
      ++nt;
    } else {
      FAIL("unexpected tag in mesh dump");
    }
  }
  CHECK(nv == m->n_vertices());
  CHECK(nt == m->n_triangles());
}

TEST_CASE("descends_from walks the chain") {
  const MeshPtr m = unit_square_mesh(2);
  const MeshPtr f1 = refine_uniform(m);
  const MeshPtr f2 = refine_uniform(f1);
  CHECK(f2->descends_from(*m));
  CHECK(f2->descends_from(*f1));
  CHECK(f2->descends_from(*f2));
  CHECK(!m->descends_from(*f1));
  const MeshPtr other = unit_square_mesh(2);
  CHECK(!f2->descends_from(*other));
}

}  // TEST_SUITE
