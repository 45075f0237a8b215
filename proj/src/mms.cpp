#include "tgns/mms.hpp"

#include <cmath>
#include <stdexcept>

namespace tgns {

namespace {

// One-dimensional profile q(s) = s^2 (1-s)^2 and derivatives.
double q0(double s) { return s * s * (1.0 - s) * (1.0 - s); }
double q1(double s) { return 2.0 * s - 6.0 * s * s + 4.0 * s * s * s; }
double q2(double s) { return 2.0 - 12.0 * s + 12.0 * s * s; }
double q3(double s) { return -12.0 + 24.0 * s; }

// Stream function psi = g(t) q(x) q(y); u = curl psi = (psi_y, -psi_x).
// Pressure p = g(t) (x^3 + y^3 - 1/2); forcing closes
// u_t - Lap(u) + (u.grad)u + grad p = f.
ManufacturedCase make_polystream() {
  ManufacturedCase c;
  c.name = "polystream";
  c.notes = "smooth stream-function flow, g(t) = 1 + sin(t)/2";
  auto g = [](double t) { return 1.0 + 0.5 * std::sin(t); };
  auto gp = [](double t) { return 0.5 * std::cos(t); };
  c.velocity = [g](double t, double x, double y) {
    return Eigen::Vector2d(g(t) * q0(x) * q1(y), -g(t) * q1(x) * q0(y));
  };
  c.velocity_grad = [g](double t, double x, double y) {
    Eigen::Matrix2d gr;
    gr(0, 0) = g(t) * q1(x) * q1(y);
    gr(0, 1) = g(t) * q0(x) * q2(y);
    gr(1, 0) = -g(t) * q2(x) * q0(y);
    gr(1, 1) = -g(t) * q1(x) * q1(y);
    return gr;
  };
  c.pressure = [g](double t, double x, double y) {
    return g(t) * (x * x * x + y * y * y - 0.5);
  };
  c.forcing = [g, gp](double t, double x, double y) {
    const double gt = g(t), gpt = gp(t);
    Eigen::Vector2d f;
    // time derivative
    f.x() = gpt * q0(x) * q1(y);
    f.y() = -gpt * q1(x) * q0(y);
    // -Laplacian
    f.x() -= gt * (q2(x) * q1(y) + q0(x) * q3(y));
    f.y() += gt * (q3(x) * q0(y) + q1(x) * q2(y));
    // convection (u.grad)u
    f.x() += gt * gt * q0(x) * q1(x) * (q1(y) * q1(y) - q0(y) * q2(y));
    f.y() += gt * gt * q0(y) * q1(y) * (q1(x) * q1(x) - q0(x) * q2(x));
    // pressure gradient
    f.x() += gt * 3.0 * x * x;
    f.y() += gt * 3.0 * y * y;
    return f;
  };
  return c;
}

// Steady Stokes data with the same stream function at g = 1 and p = x - 1/2;
// f = -Lap(u) + grad p (no inertia).  For saddle-solver validation only.
ManufacturedCase make_stokes_poly() {
  ManufacturedCase c;
  c.name = "stokes_poly";
  c.notes = "steady Stokes validation data (no convection in f)";
  c.velocity = [](double, double x, double y) {
    return Eigen::Vector2d(q0(x) * q1(y), -q1(x) * q0(y));
  };
  c.velocity_grad = [](double, double x, double y) {
    Eigen::Matrix2d gr;
    gr(0, 0) = q1(x) * q1(y);
    gr(0, 1) = q0(x) * q2(y);
    gr(1, 0) = -q2(x) * q0(y);
    gr(1, 1) = -q1(x) * q1(y);
    return gr;
  };
  c.pressure = [](double, double x, double) { return x - 0.5; };
  c.forcing = [](double, double x, double y) {
    Eigen::Vector2d f;
    f.x() = -(q2(x) * q1(y) + q0(x) * q3(y)) + 1.0;
    f.y() = q3(x) * q0(y) + q1(x) * q2(y);
    return f;
  };
  return c;
}

}  // namespace

const ManufacturedCase& mms_case(const std::string& name) {
  static const ManufacturedCase polystream = make_polystream();
  static const ManufacturedCase stokes_poly = make_stokes_poly();
  if (name == "polystream") return polystream;
  if (name == "stokes_poly") return stokes_poly;
  throw std::domain_error("unknown manufactured case: " + name);
}

MmsSample mms_eval(const ManufacturedCase& c, double t, double x, double y) {
  return {c.velocity(t, x, y), c.pressure(t, x, y), c.forcing(t, x, y)};
}

ErrorNorms error_norms(const FEFunction& u, const FEFunction* p, const ManufacturedCase& c,
                       double t, int quad_degree) {
  const MixedSpace& sp = *u.space;
  const Mesh& mesh = *sp.mesh;
  const QuadratureRule rule = triangle_quadrature(quad_degree);
  const int nq = static_cast<int>(rule.points.size());
  const int nb = sp.family.local_velocity_nodes();
  std::vector<double> vb(nb);
  std::vector<Eigen::Vector2d> vg(nb);

  double l2sq = 0.0, semsq = 0.0;
  double perr_int = 0.0, perr_sq = 0.0, area = 0.0;

  for (int el = 0; el < mesh.n_triangles(); ++el) {
    const auto geo = sp.geometry(el);
    for (int q = 0; q < nq; ++q) {
      const auto& pt = rule.points[q];
      const double l[3] = {pt.l0, pt.l1, pt.l2};
      sp.eval_velocity_basis(l, vb.data(), vg.data());
      const Eigen::Vector2d phys = geo.origin + geo.jac * Eigen::Vector2d(pt.l1, pt.l2);
      Eigen::Vector2d val = Eigen::Vector2d::Zero();
      Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();
      for (int i = 0; i < nb; ++i) {
        const int node = sp.velocity_node(el, i);
        const Eigen::Vector2d pg = geo.jinv_t * vg[i];
        for (int comp = 0; comp < 2; ++comp) {
          val[comp] += u.coeffs[2 * node + comp] * vb[i];
          grad.row(comp) += u.coeffs[2 * node + comp] * pg.transpose();
        }
      }
      const double wq = pt.weight * geo.det;
      const Eigen::Vector2d du = val - c.velocity(t, phys.x(), phys.y());
      const Eigen::Matrix2d dg = grad - c.velocity_grad(t, phys.x(), phys.y());
      l2sq += wq * du.squaredNorm();
      semsq += wq * dg.squaredNorm();
      if (p) {
        const auto& tri = mesh.triangles[el];
        const double ph = p->coeffs[tri[0]] * pt.l0 + p->coeffs[tri[1]] * pt.l1 + p->coeffs[tri[2]] * pt.l2;
        const double diff = ph - c.pressure(t, phys.x(), phys.y());
        perr_int += wq * diff;
        perr_sq += wq * diff * diff;
        area += wq;
      }
    }
  }

  ErrorNorms out;
  out.vel_l2 = std::sqrt(l2sq);
  out.vel_h1_semi = std::sqrt(semsq);
  out.vel_h1 = std::sqrt(l2sq + semsq);
  if (p) {
    const double mean = perr_int / area;
    out.p_l2_quotient = std::sqrt(std::max(0.0, perr_sq - area * mean * mean));
  }
  return out;
}

}  // namespace tgns
