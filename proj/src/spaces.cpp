#include "tgns/spaces.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>

namespace tgns {

namespace {

const Eigen::Vector2d kRefGrad[3] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};

}  // namespace

ElementFamily ElementFamily::make(Family f) {
  switch (f) {
    case Family::mini:
      // Worst convection integrand (bubble * grad bubble * bubble) has
      // degree 8; exact integration keeps skew-symmetry at rounding level.
      return {Family::mini, 1, 1, 8};
    case Family::taylor_hood_2:
      return {Family::taylor_hood_2, 2, 1, 6};
    case Family::p1_p1:
      return {Family::p1_p1, 1, 1, 4};
  }
  throw std::domain_error("ElementFamily::make: unknown family");
}

int ElementFamily::local_velocity_nodes() const {
  switch (family) {
    case Family::mini: return 4;
    case Family::taylor_hood_2: return 6;
    case Family::p1_p1: return 3;
  }
  return 0;
}

const char* ElementFamily::name() const {
  switch (family) {
    case Family::mini: return "mini";
    case Family::taylor_hood_2: return "taylor_hood_2";
    case Family::p1_p1: return "p1_p1";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  if (s == "mini") return Family::mini;
  if (s == "taylor_hood_2") return Family::taylor_hood_2;
  if (s == "p1_p1") return Family::p1_p1;
  throw std::domain_error("unknown element family: " + s);
}

int MixedSpace::velocity_node(int t, int i) const {
  if (i < 3) return mesh->triangles[t][i];
  if (family.family == Family::taylor_hood_2) return mesh->n_vertices() + mesh->triangle_edges[t][i - 3];
  return mesh->n_vertices() + t;  // mini bubble
}

MixedSpace::ElementGeometry MixedSpace::geometry(int t) const {
  const auto& tri = mesh->triangles[t];
  ElementGeometry g;
  g.origin = mesh->vertices[tri[0]];
  g.jac.col(0) = mesh->vertices[tri[1]] - g.origin;
  g.jac.col(1) = mesh->vertices[tri[2]] - g.origin;
  g.det = g.jac.determinant();
  g.jinv_t = g.jac.inverse().transpose();
  return g;
}

void MixedSpace::eval_velocity_basis(const double l[3], double* v, Eigen::Vector2d* g) const {
  switch (family.family) {
    case Family::p1_p1:
    case Family::mini:
      for (int i = 0; i < 3; ++i) {
        v[i] = l[i];
        if (g) g[i] = kRefGrad[i];
      }
      if (family.family == Family::mini) {
        v[3] = 27.0 * l[0] * l[1] * l[2];
        if (g) g[3] = 27.0 * (l[1] * l[2] * kRefGrad[0] + l[0] * l[2] * kRefGrad[1] + l[0] * l[1] * kRefGrad[2]);
      }
      break;
    case Family::taylor_hood_2:
      for (int i = 0; i < 3; ++i) {
        v[i] = l[i] * (2.0 * l[i] - 1.0);
        if (g) g[i] = (4.0 * l[i] - 1.0) * kRefGrad[i];
      }
      for (int k = 0; k < 3; ++k) {
        const int a = (k + 1) % 3, b = (k + 2) % 3;
        v[3 + k] = 4.0 * l[a] * l[b];
        if (g) g[3 + k] = 4.0 * (l[a] * kRefGrad[b] + l[b] * kRefGrad[a]);
      }
      break;
  }
}

void MixedSpace::eval_pressure_basis(const double l[3], double* v) const {
  v[0] = l[0];
  v[1] = l[1];
  v[2] = l[2];
}

SpacePtr build_space(const MeshPtr& mesh, const ElementFamily& fam) {
  if (!mesh) throw std::domain_error("build_space: null mesh");
  auto sp = std::make_shared<MixedSpace>();
  sp->mesh = mesh;
  sp->family = fam;

  switch (fam.family) {
    case Family::mini: sp->n_scalar_nodes = mesh->n_vertices() + mesh->n_triangles(); break;
    case Family::taylor_hood_2: sp->n_scalar_nodes = mesh->n_vertices() + mesh->n_edges(); break;
    case Family::p1_p1: sp->n_scalar_nodes = mesh->n_vertices(); break;
  }
  sp->n_velocity_dofs = 2 * sp->n_scalar_nodes;
  sp->n_pressure_dofs = mesh->n_vertices();

  sp->dirichlet_mask.assign(sp->n_velocity_dofs, false);
  for (int v = 0; v < mesh->n_vertices(); ++v) {
    if (mesh->boundary_vertex[v]) sp->dirichlet_mask[2 * v] = sp->dirichlet_mask[2 * v + 1] = true;
  }
  if (fam.family == Family::taylor_hood_2) {
    for (int e = 0; e < mesh->n_edges(); ++e) {
      if (mesh->boundary_edge[e]) {
        const int node = mesh->n_vertices() + e;
        sp->dirichlet_mask[2 * node] = sp->dirichlet_mask[2 * node + 1] = true;
      }
    }
  }

  sp->quad = triangle_quadrature(fam.quadrature_degree);
  const int nq = static_cast<int>(sp->quad.points.size());
  const int nb = fam.local_velocity_nodes();
  sp->vel_basis.assign(nq, std::vector<double>(nb));
  sp->vel_grad.assign(nq, std::vector<Eigen::Vector2d>(nb));
  sp->p_basis.assign(nq, std::vector<double>(3));
  for (int q = 0; q < nq; ++q) {
    const auto& pt = sp->quad.points[q];
    const double l[3] = {pt.l0, pt.l1, pt.l2};
    sp->eval_velocity_basis(l, sp->vel_basis[q].data(), sp->vel_grad[q].data());
    sp->eval_pressure_basis(l, sp->p_basis[q].data());
  }
  return sp;
}

FEFunction FEFunction::zero_velocity(const SpacePtr& sp) {
  return {sp, FieldKind::velocity, Eigen::VectorXd::Zero(sp->n_velocity_dofs)};
}

FEFunction FEFunction::zero_pressure(const SpacePtr& sp) {
  return {sp, FieldKind::pressure, Eigen::VectorXd::Zero(sp->n_pressure_dofs)};
}

VelocitySample evaluate_velocity(const FEFunction& f, int element, const double lambda[3]) {
  const MixedSpace& sp = *f.space;
  if (f.kind != FieldKind::velocity) throw std::domain_error("evaluate_velocity: pressure field");
  if (element < 0 || element >= sp.mesh->n_triangles())
    throw std::out_of_range("evaluate_velocity: element index");
  const int nb = sp.family.local_velocity_nodes();
  double vals[6];
  Eigen::Vector2d grads[6];
  sp.eval_velocity_basis(lambda, vals, grads);
  const auto geo = sp.geometry(element);
  VelocitySample out{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero()};
  for (int i = 0; i < nb; ++i) {
    const int node = sp.velocity_node(element, i);
    const Eigen::Vector2d phys_grad = geo.jinv_t * grads[i];
    for (int c = 0; c < 2; ++c) {
      const double coef = f.coeffs[2 * node + c];
      out.value[c] += coef * vals[i];
      out.grad.row(c) += coef * phys_grad.transpose();
    }
  }
  return out;
}

double evaluate_pressure(const FEFunction& f, int element, const double lambda[3]) {
  const MixedSpace& sp = *f.space;
  if (f.kind != FieldKind::pressure) throw std::domain_error("evaluate_pressure: velocity field");
  if (element < 0 || element >= sp.mesh->n_triangles())
    throw std::out_of_range("evaluate_pressure: element index");
  const auto& tri = sp.mesh->triangles[element];
  return f.coeffs[tri[0]] * lambda[0] + f.coeffs[tri[1]] * lambda[1] + f.coeffs[tri[2]] * lambda[2];
}

namespace {

// Element of `coarse` containing fine element t (walking child->parent maps).
int ancestor_element(const Mesh& fine, int t, const Mesh& coarse) {
  const Mesh* m = &fine;
  while (m != &coarse) {
    if (!m->parent) throw std::domain_error("prolong: spaces are not nested");
    t = m->parent_triangle[t];
    m = m->parent.get();
  }
  return t;
}

// Barycentric coordinates of physical point p inside element t.
void barycentric_in(const MixedSpace& sp, int t, const Eigen::Vector2d& p, double l[3]) {
  const auto geo = sp.geometry(t);
  const Eigen::Vector2d xy = geo.jac.inverse() * (p - geo.origin);
  l[0] = 1.0 - xy.x() - xy.y();
  l[1] = xy.x();
  l[2] = xy.y();
}

Eigen::Vector2d eval_coarse_at(const FEFunction& coarse, const MixedSpace& fine_sp, int fine_elem,
                               const Eigen::Vector2d& p) {
  const int ce = ancestor_element(*fine_sp.mesh, fine_elem, *coarse.space->mesh);
  double l[3];
  barycentric_in(*coarse.space, ce, p, l);
  return evaluate_velocity(coarse, ce, l).value;
}

}  // namespace

FEFunction prolong(const FEFunction& coarse, const SpacePtr& fine) {
  const MixedSpace& csp = *coarse.space;
  const MixedSpace& fsp = *fine;
  if (csp.family.family != fsp.family.family) throw std::domain_error("prolong: family mismatch");
  if (!fsp.mesh->descends_from(*csp.mesh)) throw std::domain_error("prolong: spaces are not nested");
  if (csp.mesh.get() == fsp.mesh.get()) return {fine, coarse.kind, coarse.coeffs};

  const Mesh& fm = *fsp.mesh;
  if (coarse.kind == FieldKind::pressure) {
    FEFunction out = FEFunction::zero_pressure(fine);
    std::vector<char> done(fm.n_vertices(), 0);
    for (int t = 0; t < fm.n_triangles(); ++t) {
      const int ce = ancestor_element(fm, t, *csp.mesh);
      for (int k = 0; k < 3; ++k) {
        const int v = fm.triangles[t][k];
        if (done[v]) continue;
        done[v] = 1;
        double l[3];
        barycentric_in(csp, ce, fm.vertices[v], l);
        out.coeffs[v] = evaluate_pressure(coarse, ce, l);
      }
    }
    return out;
  }

  FEFunction out = FEFunction::zero_velocity(fine);
  std::vector<char> done(fsp.n_scalar_nodes, 0);
  const int nloc = fsp.family.local_velocity_nodes();
  // Vertex and edge-midpoint nodes: direct evaluation of the coarse function.
  for (int t = 0; t < fm.n_triangles(); ++t) {
    for (int i = 0; i < nloc; ++i) {
      const int node = fsp.velocity_node(t, i);
      if (done[node] || (fsp.family.has_bubble() && i == 3)) continue;
      done[node] = 1;
      Eigen::Vector2d p;
      if (i < 3) {
        p = fm.vertices[fm.triangles[t][i]];
      } else {
        const auto& e = fm.edges[fm.triangle_edges[t][i - 3]];
        p = 0.5 * (fm.vertices[e[0]] + fm.vertices[e[1]]);
      }
      const Eigen::Vector2d val = eval_coarse_at(coarse, fsp, t, p);
      out.coeffs[2 * node] = val.x();
      out.coeffs[2 * node + 1] = val.y();
    }
  }
  // Mini bubbles: match the coarse function at child barycenters on top of
  // the P1 interpolant (the coarse bubble itself is not in the fine space).
  if (fsp.family.has_bubble()) {
    for (int t = 0; t < fm.n_triangles(); ++t) {
      const auto& tri = fm.triangles[t];
      const Eigen::Vector2d bc =
          (fm.vertices[tri[0]] + fm.vertices[tri[1]] + fm.vertices[tri[2]]) / 3.0;
      const Eigen::Vector2d val = eval_coarse_at(coarse, fsp, t, bc);
      const int node = fm.n_vertices() + t;
      for (int c = 0; c < 2; ++c) {
        const double p1_part =
            (out.coeffs[2 * tri[0] + c] + out.coeffs[2 * tri[1] + c] + out.coeffs[2 * tri[2] + c]) / 3.0;
        out.coeffs[2 * node + c] = val[c] - p1_part;
      }
    }
  }
  return out;
}

FEFunction interpolate_velocity(const SpacePtr& sp,
                                const std::function<Eigen::Vector2d(double, double)>& g) {
  const Mesh& m = *sp->mesh;
  FEFunction out = FEFunction::zero_velocity(sp);
  for (int v = 0; v < m.n_vertices(); ++v) {
    const Eigen::Vector2d val = g(m.vertices[v].x(), m.vertices[v].y());
    out.coeffs[2 * v] = val.x();
    out.coeffs[2 * v + 1] = val.y();
  }
  if (sp->family.family == Family::taylor_hood_2) {
    for (int e = 0; e < m.n_edges(); ++e) {
      const Eigen::Vector2d p = 0.5 * (m.vertices[m.edges[e][0]] + m.vertices[m.edges[e][1]]);
      const Eigen::Vector2d val = g(p.x(), p.y());
      const int node = m.n_vertices() + e;
      out.coeffs[2 * node] = val.x();
      out.coeffs[2 * node + 1] = val.y();
    }
  } else if (sp->family.has_bubble()) {
    for (int t = 0; t < m.n_triangles(); ++t) {
      const auto& tri = m.triangles[t];
      const Eigen::Vector2d bc = (m.vertices[tri[0]] + m.vertices[tri[1]] + m.vertices[tri[2]]) / 3.0;
      const Eigen::Vector2d val = g(bc.x(), bc.y());
      const int node = m.n_vertices() + t;
      for (int c = 0; c < 2; ++c) {
        const double p1_part =
            (out.coeffs[2 * tri[0] + c] + out.coeffs[2 * tri[1] + c] + out.coeffs[2 * tri[2] + c]) / 3.0;
        out.coeffs[2 * node + c] = val[c] - p1_part;
      }
    }
  }
  return out;
}

FEFunction interpolate_pressure(const SpacePtr& sp, const std::function<double(double, double)>& g) {
  const Mesh& m = *sp->mesh;
  FEFunction out = FEFunction::zero_pressure(sp);
  for (int v = 0; v < m.n_vertices(); ++v) out.coeffs[v] = g(m.vertices[v].x(), m.vertices[v].y());
  return out;
}

}  // namespace tgns
