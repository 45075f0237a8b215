#pragma once

#include "tgns/spaces.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>

namespace tgns {

// Exact solution triple for the method of manufactured solutions: u is
// divergence free and vanishes on the boundary of the unit square, p has
// zero mean, and f closes the Navier-Stokes residual for the pair.
struct ManufacturedCase {
  std::string name;
  std::function<Eigen::Vector2d(double t, double x, double y)> velocity;
  std::function<Eigen::Matrix2d(double t, double x, double y)> velocity_grad;  // du_i/dx_j
  std::function<double(double t, double x, double y)> pressure;
  std::function<Eigen::Vector2d(double t, double x, double y)> forcing;
  std::string notes;
};

// Registry lookup; throws std::domain_error for unknown names.
// Built-in cases: "polystream" (time-dependent Navier-Stokes) and
// "stokes_poly" (steady Stokes data for saddle-solver validation).
const ManufacturedCase& mms_case(const std::string& name);

struct MmsSample {
  Eigen::Vector2d u;
  double p;
  Eigen::Vector2d f;
};
MmsSample mms_eval(const ManufacturedCase& c, double t, double x, double y);

struct ErrorNorms {
  double vel_l2 = 0.0;
  double vel_h1 = 0.0;       // full H1 norm
  double vel_h1_semi = 0.0;  // seminorm, for diagnostics
  double p_l2_quotient = 0.0;
};

// Errors against the exact fields at time t, measured with a fixed-degree
// quadrature independent of the family rule.  The pressure error subtracts
// each field's own mean (L2 quotient norm).  Pass p = nullptr to skip the
// pressure column.
ErrorNorms error_norms(const FEFunction& u, const FEFunction* p, const ManufacturedCase& c,
                       double t, int quad_degree = 10);

}  // namespace tgns
