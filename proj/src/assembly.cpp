#include "tgns/assembly.hpp"

#include <Eigen/Dense>

#include "tgns/saddle.hpp"

#include <stdexcept>
#include <vector>

namespace tgns {

namespace {

// Values and gradients of a discrete velocity field at the quadrature points
// of a target space, where the field may live on the target space itself or
// on any ancestor space (exact through the nested-mesh ancestry).
class SampledVelocity {
 public:
  SampledVelocity(const FEFunction& w, const MixedSpace& target) : w_(w), target_(target) {
    if (w.kind != FieldKind::velocity) throw std::domain_error("convection: field is not a velocity");
    const Mesh& wm = *w.space->mesh;
    const Mesh& tm = *target.mesh;
    same_space_ = (&wm == &tm) && (w.space->family.family == target.family.family);
    if (!same_space_ && !tm.descends_from(wm))
      throw std::domain_error("convection: field space is not an ancestor of the target space");
  }

  // Fills per-point samples for one target element.
  void sample(int elem, std::vector<VelocitySample>& out) const {
    const int nq = static_cast<int>(target_.quad.points.size());
    out.resize(nq);
    if (same_space_) {
      const auto geo = target_.geometry(elem);
      const int nb = target_.family.local_velocity_nodes();
      for (int q = 0; q < nq; ++q) {
        VelocitySample s{Eigen::Vector2d::Zero(), Eigen::Matrix2d::Zero()};
        for (int i = 0; i < nb; ++i) {
          const int node = target_.velocity_node(elem, i);
          const Eigen::Vector2d pg = geo.jinv_t * target_.vel_grad[q][i];
          for (int c = 0; c < 2; ++c) {
            const double coef = w_.coeffs[2 * node + c];
            s.value[c] += coef * target_.vel_basis[q][i];
            s.grad.row(c) += coef * pg.transpose();
          }
        }
        out[q] = s;
      }
      return;
    }
    // Ancestor path: map each quadrature point to the coarse element.
    int ce = elem;
    for (const Mesh* mm = target_.mesh.get(); mm != w_.space->mesh.get(); mm = mm->parent.get())
      ce = mm->parent_triangle[ce];
    const auto tgeo = target_.geometry(elem);
    const auto cgeo = w_.space->geometry(ce);
    const Eigen::Matrix2d cinv = cgeo.jac.inverse();
    for (int q = 0; q < nq; ++q) {
      const auto& pt = target_.quad.points[q];
      const Eigen::Vector2d phys =
          tgeo.origin + tgeo.jac * Eigen::Vector2d(pt.l1, pt.l2);
      const Eigen::Vector2d ref = cinv * (phys - cgeo.origin);
      const double l[3] = {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
      out[q] = evaluate_velocity(w_, ce, l);
    }
  }

 private:
  const FEFunction& w_;
  const MixedSpace& target_;
  bool same_space_;
};

void add_identity_for_masked(std::vector<Eigen::Triplet<double>>& trips, const MixedSpace& sp) {
  for (int d = 0; d < sp.n_velocity_dofs; ++d)
    if (sp.dirichlet_mask[d]) trips.emplace_back(d, d, 1.0);
}

}  // namespace

OperatorSet assemble_operators(const SpacePtr& spp, DirichletMask mask) {
  const MixedSpace& sp = *spp;
  const Mesh& mesh = *sp.mesh;
  const int nb = sp.family.local_velocity_nodes();
  const int nq = static_cast<int>(sp.quad.points.size());
  const bool masked = (mask == DirichletMask::apply);

  std::vector<Eigen::Triplet<double>> tm, ta, tb, tmp;
  Eigen::VectorXd p_int = Eigen::VectorXd::Zero(sp.n_pressure_dofs);

  Eigen::MatrixXd mloc(nb, nb), aloc(nb, nb);
  Eigen::MatrixXd bloc0(3, nb), bloc1(3, nb);  // per velocity component
  Eigen::Matrix3d mploc;
  std::vector<Eigen::Vector2d> pg(nb);

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto geo = sp.geometry(t);
    mloc.setZero();
    aloc.setZero();
    bloc0.setZero();
    bloc1.setZero();
    mploc.setZero();
    for (int q = 0; q < nq; ++q) {
      const double w = sp.quad.points[q].weight * geo.det;
      const auto& phi = sp.vel_basis[q];
      for (int i = 0; i < nb; ++i) pg[i] = geo.jinv_t * sp.vel_grad[q][i];
      for (int i = 0; i < nb; ++i) {
        for (int j = 0; j < nb; ++j) {
          mloc(i, j) += w * phi[i] * phi[j];
          aloc(i, j) += w * pg[i].dot(pg[j]);
        }
      }
      const auto& psi = sp.p_basis[q];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < nb; ++j) {
          bloc0(i, j) += w * psi[i] * pg[j].x();
          bloc1(i, j) += w * psi[i] * pg[j].y();
        }
        for (int j = 0; j < 3; ++j) mploc(i, j) += w * psi[i] * psi[j];
        p_int[sp.pressure_node(t, i)] += w * psi[i];
      }
    }

    for (int i = 0; i < nb; ++i) {
      const int ni = sp.velocity_node(t, i);
      for (int j = 0; j < nb; ++j) {
        const int nj = sp.velocity_node(t, j);
        for (int c = 0; c < 2; ++c) {
          const int r = 2 * ni + c, col = 2 * nj + c;
          if (masked && (sp.dirichlet_mask[r] || sp.dirichlet_mask[col])) continue;
          tm.emplace_back(r, col, mloc(i, j));
          ta.emplace_back(r, col, aloc(i, j));
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      const int pi = sp.pressure_node(t, i);
      for (int j = 0; j < nb; ++j) {
        const int nj = sp.velocity_node(t, j);
        if (!masked || !sp.dirichlet_mask[2 * nj]) tb.emplace_back(pi, 2 * nj, bloc0(i, j));
        if (!masked || !sp.dirichlet_mask[2 * nj + 1]) tb.emplace_back(pi, 2 * nj + 1, bloc1(i, j));
      }
      for (int j = 0; j < 3; ++j) tmp.emplace_back(pi, sp.pressure_node(t, j), mploc(i, j));
    }
  }

  OperatorSet ops;
  ops.M.resize(sp.n_velocity_dofs, sp.n_velocity_dofs);
  ops.A.resize(sp.n_velocity_dofs, sp.n_velocity_dofs);
  ops.B.resize(sp.n_pressure_dofs, sp.n_velocity_dofs);
  ops.Mp.resize(sp.n_pressure_dofs, sp.n_pressure_dofs);
  if (masked) {
    add_identity_for_masked(tm, sp);
    add_identity_for_masked(ta, sp);
  }
  ops.M.setFromTriplets(tm.begin(), tm.end());
  ops.A.setFromTriplets(ta.begin(), ta.end());
  ops.B.setFromTriplets(tb.begin(), tb.end());
  ops.Mp.setFromTriplets(tmp.begin(), tmp.end());
  ops.M.makeCompressed();
  ops.A.makeCompressed();
  ops.B.makeCompressed();
  ops.Mp.makeCompressed();
  ops.p_integral = std::move(p_int);
  return ops;
}

double trilinear_b(const FEFunction& u, const FEFunction& v, const FEFunction& w) {
  if (v.space.get() != w.space.get())
    throw std::domain_error("trilinear_b: v and w must share a space");
  const MixedSpace& sp = *v.space;
  if (v.kind != FieldKind::velocity || w.kind != FieldKind::velocity)
    throw std::domain_error("trilinear_b: fields must be velocities");
  SampledVelocity su(u, sp);
  const int nq = static_cast<int>(sp.quad.points.size());
  const int nb = sp.family.local_velocity_nodes();
  std::vector<VelocitySample> us;
  double total = 0.0;
  for (int t = 0; t < sp.mesh->n_triangles(); ++t) {
    const auto geo = sp.geometry(t);
    su.sample(t, us);
    for (int q = 0; q < nq; ++q) {
      Eigen::Vector2d vv = Eigen::Vector2d::Zero(), wv = Eigen::Vector2d::Zero();
      Eigen::Matrix2d vg = Eigen::Matrix2d::Zero();
      for (int i = 0; i < nb; ++i) {
        const int node = sp.velocity_node(t, i);
        const Eigen::Vector2d pgi = geo.jinv_t * sp.vel_grad[q][i];
        for (int c = 0; c < 2; ++c) {
          vv[c] += v.coeffs[2 * node + c] * sp.vel_basis[q][i];
          wv[c] += w.coeffs[2 * node + c] * sp.vel_basis[q][i];
          vg.row(c) += v.coeffs[2 * node + c] * pgi.transpose();
        }
      }
      const auto& s = us[q];
      const double divu = s.grad.trace();
      const Eigen::Vector2d f = vg * s.value + 0.5 * divu * vv;
      total += sp.quad.points[q].weight * geo.det * f.dot(wv);
    }
  }
  return total;
}

ConvectionMatrices convection_matrix(const FEFunction& w, const SpacePtr& spp, ConvectionMode mode,
                                     DirichletMask mask) {
  const MixedSpace& sp = *spp;
  const bool masked = (mask == DirichletMask::apply);
  SampledVelocity sw(w, sp);
  const int nb = sp.family.local_velocity_nodes();
  const int nq = static_cast<int>(sp.quad.points.size());

  std::vector<Eigen::Triplet<double>> t1, t2;
  const bool pair = (mode == ConvectionMode::newton_pair);
  Eigen::MatrixXd n1loc(nb, nb);                       // component-diagonal part
  Eigen::MatrixXd n2loc(2 * nb, 2 * nb);               // full coupling (newton only)
  std::vector<VelocitySample> ws;
  std::vector<Eigen::Vector2d> pg(nb);

  for (int t = 0; t < sp.mesh->n_triangles(); ++t) {
    const auto geo = sp.geometry(t);
    sw.sample(t, ws);
    n1loc.setZero();
    if (pair) n2loc.setZero();
    for (int q = 0; q < nq; ++q) {
      const double wq = sp.quad.points[q].weight * geo.det;
      const auto& phi = sp.vel_basis[q];
      for (int i = 0; i < nb; ++i) pg[i] = geo.jinv_t * sp.vel_grad[q][i];
      const auto& s = ws[q];
      const double divw = s.grad.trace();
      for (int i = 0; i < nb; ++i) {
        for (int j = 0; j < nb; ++j) {
          double adv = s.value.dot(pg[j]);
          if (mode != ConvectionMode::plain) adv += 0.5 * divw * phi[j];
          n1loc(i, j) += wq * phi[i] * adv;
        }
      }
      if (pair) {
        // (F(phi_j e_d, w), phi_i e_c) = phi_i [ phi_j dw_c/dx_d + 1/2 dphi_j/dx_d w_c ]
        for (int i = 0; i < nb; ++i) {
          for (int j = 0; j < nb; ++j) {
            for (int c = 0; c < 2; ++c) {
              for (int d = 0; d < 2; ++d) {
                n2loc(2 * i + c, 2 * j + d) +=
                    wq * phi[i] * (phi[j] * s.grad(c, d) + 0.5 * pg[j][d] * s.value[c]);
              }
            }
          }
        }
      }
    }
    for (int i = 0; i < nb; ++i) {
      const int ni = sp.velocity_node(t, i);
      for (int j = 0; j < nb; ++j) {
        const int nj = sp.velocity_node(t, j);
        for (int c = 0; c < 2; ++c) {
          const int r = 2 * ni + c;
          if (masked && sp.dirichlet_mask[r]) continue;
          for (int d = 0; d < 2; ++d) {
            const int col = 2 * nj + d;
            if (masked && sp.dirichlet_mask[col]) continue;
            if (c == d) t1.emplace_back(r, col, n1loc(i, j));
            if (pair) t2.emplace_back(r, col, n2loc(2 * i + c, 2 * j + d));
          }
        }
      }
    }
  }

  ConvectionMatrices out;
  out.N1.resize(sp.n_velocity_dofs, sp.n_velocity_dofs);
  out.N1.setFromTriplets(t1.begin(), t1.end());
  out.N1.makeCompressed();
  if (pair) {
    out.N2.resize(sp.n_velocity_dofs, sp.n_velocity_dofs);
    out.N2.setFromTriplets(t2.begin(), t2.end());
    out.N2.makeCompressed();
  }
  return out;
}

Eigen::VectorXd velocity_load(const SpacePtr& spp, const VelocityField& g, DirichletMask mask) {
  const MixedSpace& sp = *spp;
  const bool masked = (mask == DirichletMask::apply);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(sp.n_velocity_dofs);
  const int nb = sp.family.local_velocity_nodes();
  const int nq = static_cast<int>(sp.quad.points.size());
  for (int t = 0; t < sp.mesh->n_triangles(); ++t) {
    const auto geo = sp.geometry(t);
    for (int q = 0; q < nq; ++q) {
      const auto& pt = sp.quad.points[q];
      const Eigen::Vector2d phys = geo.origin + geo.jac * Eigen::Vector2d(pt.l1, pt.l2);
      const Eigen::Vector2d gv = g(phys.x(), phys.y());
      const double wq = pt.weight * geo.det;
      for (int i = 0; i < nb; ++i) {
        const int node = sp.velocity_node(t, i);
        load[2 * node] += wq * sp.vel_basis[q][i] * gv.x();
        load[2 * node + 1] += wq * sp.vel_basis[q][i] * gv.y();
      }
    }
  }
  if (masked)
    for (int d = 0; d < sp.n_velocity_dofs; ++d)
      if (sp.dirichlet_mask[d]) load[d] = 0.0;
  return load;
}

Eigen::VectorXd convection_load(const FEFunction& w, const SpacePtr& spp, ConvectionMode mode,
                                DirichletMask mask) {
  if (mode == ConvectionMode::newton_pair)
    throw std::domain_error("convection_load: mode must be skew or plain");
  const MixedSpace& sp = *spp;
  const bool masked = (mask == DirichletMask::apply);
  SampledVelocity sw(w, sp);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(sp.n_velocity_dofs);
  const int nb = sp.family.local_velocity_nodes();
  const int nq = static_cast<int>(sp.quad.points.size());
  std::vector<VelocitySample> ws;
  for (int t = 0; t < sp.mesh->n_triangles(); ++t) {
    const auto geo = sp.geometry(t);
    sw.sample(t, ws);
    for (int q = 0; q < nq; ++q) {
      const auto& s = ws[q];
      Eigen::Vector2d f = s.grad * s.value;
      if (mode == ConvectionMode::skew) f += 0.5 * s.grad.trace() * s.value;
      const double wq = sp.quad.points[q].weight * geo.det;
      for (int i = 0; i < nb; ++i) {
        const int node = sp.velocity_node(t, i);
        load[2 * node] += wq * sp.vel_basis[q][i] * f.x();
        load[2 * node + 1] += wq * sp.vel_basis[q][i] * f.y();
      }
    }
  }
  if (masked)
    for (int d = 0; d < sp.n_velocity_dofs; ++d)
      if (sp.dirichlet_mask[d]) load[d] = 0.0;
  return load;
}

FEFunction discrete_leray_projection(const VelocityField& g, const SpacePtr& sp) {
  OperatorSet ops = assemble_operators(sp);
  SaddleSystem sys;
  sys.K = ops.M;
  sys.B = ops.B;
  sys.rhs_u = velocity_load(sp, g);
  sys.rhs_p = Eigen::VectorXd::Zero(sp->n_pressure_dofs);
  sys.p_integral = ops.p_integral;
  SaddleSolution sol = solve_saddle(sys);
  return {sp, FieldKind::velocity, std::move(sol.u)};
}

namespace {

void accumulate_norm(const FEFunction& f, double& l2sq, double& h1sq) {
  const MixedSpace& sp = *f.space;
  const int nq = static_cast<int>(sp.quad.points.size());
  l2sq = 0.0;
  h1sq = 0.0;
  if (f.kind == FieldKind::velocity) {
    const int nb = sp.family.local_velocity_nodes();
    for (int t = 0; t < sp.mesh->n_triangles(); ++t) {
      const auto geo = sp.geometry(t);
      for (int q = 0; q < nq; ++q) {
        Eigen::Vector2d val = Eigen::Vector2d::Zero();
        Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
        for (int i = 0; i < nb; ++i) {
          const int node = sp.velocity_node(t, i);
          const Eigen::Vector2d pg = geo.jinv_t * sp.vel_grad[q][i];
          for (int c = 0; c < 2; ++c) {
            val[c] += f.coeffs[2 * node + c] * sp.vel_basis[q][i];
            grad.row(c) += f.coeffs[2 * node + c] * pg.transpose();
          }
        }
        const double wq = sp.quad.points[q].weight * geo.det;
        l2sq += wq * val.squaredNorm();
        h1sq += wq * grad.squaredNorm();
      }
    }
  } else {
    for (int t = 0; t < sp.mesh->n_triangles(); ++t) {
      const auto geo = sp.geometry(t);
      const auto& tri = sp.mesh->triangles[t];
      Eigen::Vector2d pgrad = Eigen::Vector2d::Zero();
      for (int i = 0; i < 3; ++i) {
        static const Eigen::Vector2d ref[3] = {{-1, -1}, {1, 0}, {0, 1}};
        pgrad += f.coeffs[tri[i]] * (geo.jinv_t * ref[i]);
      }
      for (int q = 0; q < nq; ++q) {
        const auto& pt = sp.quad.points[q];
        const double val =
            f.coeffs[tri[0]] * pt.l0 + f.coeffs[tri[1]] * pt.l1 + f.coeffs[tri[2]] * pt.l2;
        const double wq = pt.weight * geo.det;
        l2sq += wq * val * val;
        h1sq += wq * pgrad.squaredNorm();
      }
    }
  }
}

}  // namespace

double fe_l2_norm(const FEFunction& f) {
  double l2, h1;
  accumulate_norm(f, l2, h1);
  return std::sqrt(l2);
}

double fe_h1_seminorm(const FEFunction& f) {
  double l2, h1;
  accumulate_norm(f, l2, h1);
  return std::sqrt(h1);
}

double fe_h1_norm(const FEFunction& f) {
  double l2, h1;
  accumulate_norm(f, l2, h1);
  return std::sqrt(l2 + h1);
}

}  // namespace tgns
