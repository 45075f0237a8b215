#include "tgns/spaces.hpp"

#include <Eigen/Dense>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tgns;

namespace {

int free_scalar_nodes(const MixedSpace& sp) {
  int n = 0;
  for (int k = 0; k < sp.n_scalar_nodes; ++k)
    if (!sp.dirichlet_mask[2 * k]) ++n;
  return n;
}

FEFunction random_velocity(const SpacePtr& sp, unsigned seed, bool masked = true) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FEFunction f = FEFunction::zero_velocity(sp);
  for (int d = 0; d < sp->n_velocity_dofs; ++d) {
    if (masked && sp->dirichlet_mask[d]) continue;
    f.coeffs[d] = dist(rng);
  }
  return f;
}

// Largest discrepancy between f and g (on an ancestor space) over all
// quadrature points of f's space.
double max_pointwise_gap(const FEFunction& f, const FEFunction& g) {
  const MixedSpace& sp = *f.space;
  double worst = 0.0;
  for (int t = 0; t < sp.mesh->n_triangles(); ++t) {
    const auto geo = sp.geometry(t);
    // ancestor element of t in g's mesh
    int ce = t;
    for (const Mesh* m = sp.mesh.get(); m != g.space->mesh.get(); m = m->parent.get())
      ce = m->parent_triangle[ce];
    const auto cgeo = g.space->geometry(ce);
    for (const auto& pt : sp.quad.points) {
      const double l[3] = {pt.l0, pt.l1, pt.l2};
      const Eigen::Vector2d phys = geo.origin + geo.jac * Eigen::Vector2d(pt.l1, pt.l2);
      const Eigen::Vector2d ref = cgeo.jac.inverse() * (phys - cgeo.origin);
      const double cl[3] = {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
      const Eigen::Vector2d gap =
          evaluate_velocity(f, t, l).value - evaluate_velocity(g, ce, cl).value;
      worst = std::max(worst, gap.lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE("spaces") {

TEST_CASE("dof counts") {
  const auto th2 = ElementFamily::make(Family::taylor_hood_2);
  const auto mini = ElementFamily::make(Family::mini);

  const SpacePtr a = build_space(unit_square_mesh(1), th2);
  CHECK(a->n_scalar_nodes == 9);  // 4 vertices + 5 edges
  CHECK(free_scalar_nodes(*a) == 1);
  CHECK(a->n_pressure_dofs == 4);

  const SpacePtr b = build_space(unit_square_mesh(2), mini);
  CHECK(b->n_scalar_nodes == 17);  // 9 vertices + 8 bubbles
  CHECK(b->n_pressure_dofs == 9);

  const SpacePtr c = build_space(unit_square_mesh(4), th2);
  CHECK(c->n_pressure_dofs == 25);
}

TEST_CASE("dirichlet mask counts 4n vertices plus 4n midpoints") {
  for (int n : {2, 3, 4, 8}) {
    const SpacePtr th2 = build_space(unit_square_mesh(n), ElementFamily::make(Family::taylor_hood_2));
    const SpacePtr mini = build_space(unit_square_mesh(n), ElementFamily::make(Family::mini));
    int masked_th2 = 0, masked_mini = 0;
    for (int k = 0; k < th2->n_scalar_nodes; ++k) masked_th2 += th2->dirichlet_mask[2 * k];
    for (int k = 0; k < mini->n_scalar_nodes; ++k) masked_mini += mini->dirichlet_mask[2 * k];
    CHECK(masked_th2 == 8 * n);
    CHECK(masked_mini == 4 * n);
  }
}

TEST_CASE("partition of unity for the non-bubble scalar basis") {
  for (Family fam : {Family::mini, Family::taylor_hood_2}) {
    const SpacePtr sp = build_space(unit_square_mesh(2), ElementFamily::make(fam));
    const int non_bubble = sp->family.has_bubble() ? 3 : sp->family.local_velocity_nodes();
    for (const auto& row : sp->vel_basis) {
      double sum = 0.0;
      for (int i = 0; i < non_bubble; ++i) sum += row[i];
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("evaluate: zeros, quadratic reproduction, bubble normalization") {
  const SpacePtr sp = build_space(unit_square_mesh(2), ElementFamily::make(Family::taylor_hood_2));
  const FEFunction zero = FEFunction::zero_velocity(sp);
  const double bary[3] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(evaluate_velocity(zero, 0, bary).value.norm() == 0.0);
  CHECK_THROWS_AS(evaluate_velocity(zero, 999, bary), std::out_of_range);

  // P2 interpolant of x^2 is exact.
  const FEFunction q = interpolate_velocity(
      sp, [](double x, double) { return Eigen::Vector2d(x * x, 0.0); });
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    double l1 = dist(rng), l2 = dist(rng) * (1.0 - l1);
    const double l[3] = {1.0 - l1 - l2, l1, l2};
    const int t = static_cast<int>(dist(rng) * sp->mesh->n_triangles()) % sp->mesh->n_triangles();
    const auto geo = sp->geometry(t);
    const Eigen::Vector2d phys = geo.origin + geo.jac * Eigen::Vector2d(l[1], l[2]);
    const auto s = evaluate_velocity(q, t, l);
    CHECK(s.value.x() == doctest::Approx(phys.x() * phys.x()).epsilon(1e-14));
    CHECK(s.grad(0, 0) == doctest::Approx(2.0 * phys.x()).epsilon(1e-12));
  }

  // Bubble value 1 at the barycenter.
  const SpacePtr mini = build_space(unit_square_mesh(2), ElementFamily::make(Family::mini));
  FEFunction bub = FEFunction::zero_velocity(mini);
  const int node = mini->mesh->n_vertices() + 3;  // bubble of element 3
  bub.coeffs[2 * node] = 1.0;
  CHECK(evaluate_velocity(bub, 3, bary).value.x() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("prolong reproduces constants") {
  for (Family fam : {Family::mini, Family::taylor_hood_2}) {
    const MeshPtr coarse = unit_square_mesh(2);
    const SpacePtr csp = build_space(coarse, ElementFamily::make(fam));
    const SpacePtr fsp = build_space(refine_uniform(coarse), ElementFamily::make(fam));
    const FEFunction c = interpolate_velocity(csp, [](double, double) {
      return Eigen::Vector2d(1.0, 0.0);
    });
    const FEFunction f = prolong(c, fsp);
    CHECK(max_pointwise_gap(f, c) <= 1e-14);
  }
}

TEST_CASE("prolong is pointwise exact for taylor_hood_2") {
  const MeshPtr coarse = unit_square_mesh(2);
  const SpacePtr csp = build_space(coarse, ElementFamily::make(Family::taylor_hood_2));
  const SpacePtr fsp = build_space(refine_uniform(coarse), ElementFamily::make(Family::taylor_hood_2));
  const FEFunction c = random_velocity(csp, 11, /*masked=*/false);
  const FEFunction f = prolong(c, fsp);
  CHECK(max_pointwise_gap(f, c) <= 1e-12);
}

TEST_CASE("prolong for mini: exact P1 part, nodal bubble matching") {
  const MeshPtr coarse = unit_square_mesh(2);
  const MeshPtr fine = refine_uniform(coarse);
  const SpacePtr csp = build_space(coarse, ElementFamily::make(Family::mini));
  const SpacePtr fsp = build_space(fine, ElementFamily::make(Family::mini));

  FEFunction c = random_velocity(csp, 23, /*masked=*/false);
  for (int t = 0; t < coarse->n_triangles(); ++t) {
    const int node = coarse->n_vertices() + t;
    c.coeffs[2 * node] = c.coeffs[2 * node + 1] = 0.0;  // bubble-free: exact
  }
  CHECK(max_pointwise_gap(prolong(c, fsp), c) <= 1e-12);

  // With bubbles the fine function still matches at every fine nodal point
  // (vertices and barycenters); the coarse bubble itself is not in the fine
  // space, so pointwise identity cannot hold in between.
  const FEFunction cb = random_velocity(csp, 29, /*masked=*/false);
  const FEFunction fb = prolong(cb, fsp);
  for (int v = 0; v < fine->n_vertices(); ++v) {
    // fine vertex v sits in some fine element; locate one
    for (int t = 0; t < fine->n_triangles(); ++t) {
      const auto& tri = fine->triangles[t];
      for (int k = 0; k < 3; ++k) {
        if (tri[k] != v) continue;
        double l[3] = {0, 0, 0};
        l[k] = 1.0;
        int ce = fine->parent_triangle[t];
        const auto cgeo = csp->geometry(ce);
        const Eigen::Vector2d ref = cgeo.jac.inverse() * (fine->vertices[v] - cgeo.origin);
        const double cl[3] = {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
        const Eigen::Vector2d gap =
            evaluate_velocity(fb, t, l).value - evaluate_velocity(cb, ce, cl).value;
        CHECK(gap.lpNorm<Eigen::Infinity>() <= 1e-12);
        t = fine->n_triangles();
        break;
      }
    }
  }
}

TEST_CASE("prolongation composes across two levels (taylor_hood_2)") {
  const MeshPtr m0 = unit_square_mesh(2);
  const MeshPtr m1 = refine_uniform(m0);
  const MeshPtr m2 = refine_uniform(m1);
  const auto fam = ElementFamily::make(Family::taylor_hood_2);
  const SpacePtr s0 = build_space(m0, fam), s1 = build_space(m1, fam), s2 = build_space(m2, fam);
  const FEFunction c = random_velocity(s0, 37, /*masked=*/false);
  const FEFunction direct = prolong(c, s2);
  const FEFunction composed = prolong(prolong(c, s1), s2);
  CHECK((direct.coeffs - composed.coeffs).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("prolong rejects family mismatch and non-ancestors") {
  const MeshPtr coarse = unit_square_mesh(2);
  const MeshPtr fine = refine_uniform(coarse);
  const SpacePtr cm = build_space(coarse, ElementFamily::make(Family::mini));
  const SpacePtr fth = build_space(fine, ElementFamily::make(Family::taylor_hood_2));
  const FEFunction c = FEFunction::zero_velocity(cm);
  CHECK_THROWS_AS(prolong(c, fth), std::domain_error);

  const SpacePtr other = build_space(unit_square_mesh(4), ElementFamily::make(Family::mini));
  CHECK_THROWS_AS(prolong(c, other), std::domain_error);
}

TEST_CASE("pressure prolongation is exact for P1") {
  const MeshPtr coarse = unit_square_mesh(3);
  const SpacePtr csp = build_space(coarse, ElementFamily::make(Family::taylor_hood_2));
  const SpacePtr fsp = build_space(refine_uniform(coarse), ElementFamily::make(Family::taylor_hood_2));
  const FEFunction p = interpolate_pressure(csp, [](double x, double y) { return 2 * x - y + 1; });
  const FEFunction pf = prolong(p, fsp);
  const FEFunction direct =
      interpolate_pressure(fsp, [](double x, double y) { return 2 * x - y + 1; });
  CHECK((pf.coeffs - direct.coeffs).lpNorm<Eigen::Infinity>() <= 1e-14);
}

}  // TEST_SUITE
