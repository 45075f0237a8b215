#pragma once

#include "tgns/mesh.hpp"
#include "tgns/quadrature.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace tgns {

// Velocity/pressure pairs on triangles.  `mini` is P1+bubble / P1,
// `taylor_hood_2` is P2 / P1.  `p1_p1` (equal-order, not inf-sup stable) is
// kept only as the negative control for the inf-sup estimator.
enum class Family { mini, taylor_hood_2, p1_p1 };

struct ElementFamily {
  Family family = Family::taylor_hood_2;
  int velocity_degree = 2;  // polynomial degree of the velocity space (bubble excluded)
  int pressure_degree = 1;
  int quadrature_degree = 6;

  static ElementFamily make(Family f);
  bool has_bubble() const { return family == Family::mini; }
  // Scalar velocity basis functions per element (vertices, edges, bubble).
  int local_velocity_nodes() const;
  const char* name() const;
};

Family family_from_string(const std::string& s);

class MixedSpace;
using SpacePtr = std::shared_ptr<const MixedSpace>;

// Degree-of-freedom layout of one velocity/pressure pair on one mesh.
// Scalar velocity nodes are numbered vertices first, then edge midpoints
// (taylor_hood_2) or element bubbles (mini); a node's two velocity components
// are interleaved as dofs (2*node, 2*node+1).  Pressure nodes are the mesh
// vertices.  Immutable after build_space.
class MixedSpace {
 public:
  MeshPtr mesh;
  ElementFamily family;

  int n_scalar_nodes = 0;    // scalar velocity nodes
  int n_velocity_dofs = 0;   // 2 * n_scalar_nodes
  int n_pressure_dofs = 0;   // vertices
  std::vector<bool> dirichlet_mask;  // per velocity dof, true on the boundary

  QuadratureRule quad;
  // Reference-element tables at quadrature points:
  // vel_basis[q][i], vel_grad[q][i] = d(phi_i)/d(ref x, ref y).
  std::vector<std::vector<double>> vel_basis;
  std::vector<std::vector<Eigen::Vector2d>> vel_grad;
  std::vector<std::vector<double>> p_basis;

  // Global scalar velocity node for local basis index i of element t.
  int velocity_node(int t, int i) const;
  int pressure_node(int t, int i) const { return mesh->triangles[t][i]; }

  // Affine geometry of element t: Jacobian determinant (2*area) and the
  // inverse-transpose mapping reference gradients to physical ones.
  struct ElementGeometry {
    double det;  // 2 * area
    Eigen::Matrix2d jinv_t;
    Eigen::Vector2d origin;  // vertex 0
    Eigen::Matrix2d jac;     // columns v1-v0, v2-v0
  };
  ElementGeometry geometry(int t) const;

  // Scalar velocity basis values/reference gradients at a barycentric point.
  void eval_velocity_basis(const double lambda[3], double* values, Eigen::Vector2d* grads) const;
  void eval_pressure_basis(const double lambda[3], double* values) const;
};

SpacePtr build_space(const MeshPtr& mesh, const ElementFamily& fam);

enum class FieldKind { velocity, pressure };

// Coefficient vector tagged with its space.  Velocity coefficients are
// interleaved (x,y) per scalar node; discrete solutions carry zeros on the
// Dirichlet mask.
struct FEFunction {
  SpacePtr space;
  FieldKind kind = FieldKind::velocity;
  Eigen::VectorXd coeffs;

  static FEFunction zero_velocity(const SpacePtr& sp);
  static FEFunction zero_pressure(const SpacePtr& sp);
};

// Value (and gradient: grad(i,j) = d u_i / d x_j) of a velocity function at a
// barycentric point of element t.
struct VelocitySample {
  Eigen::Vector2d value;
  Eigen::Matrix2d grad;
};
VelocitySample evaluate_velocity(const FEFunction& f, int element, const double lambda[3]);
double evaluate_pressure(const FEFunction& f, int element, const double lambda[3]);

// Interpolates a coarse function into a space on a descendant mesh of its own
// mesh (same family, same kind).  Exact for taylor_hood_2 and for pressures;
// for mini the element bubbles are matched at child barycenters, which
// preserves nodal values but not the bubble part pointwise (the coarse bubble
// is not contained in the fine space).
FEFunction prolong(const FEFunction& coarse, const SpacePtr& fine);

// Interpolates analytic data at the space's nodal points (no boundary
// handling; used for initial guesses and tests).
FEFunction interpolate_velocity(const SpacePtr& sp,
                                const std::function<Eigen::Vector2d(double, double)>& g);
FEFunction interpolate_pressure(const SpacePtr& sp, const std::function<double(double, double)>& g);

}  // namespace tgns
