#pragma once

#include "tgns/spaces.hpp"

#include <Eigen/Sparse>

#include <functional>

namespace tgns {

using SparseMat = Eigen::SparseMatrix<double>;

// Whether Dirichlet velocity dofs are eliminated: masked rows/columns of M
// and A are zeroed with a unit diagonal, masked columns of B are zeroed, and
// masked load entries are dropped.  Solvers then carry identity rows for the
// constrained dofs.
enum class DirichletMask { apply, none };

struct OperatorSet {
  SparseMat M;   // vector velocity mass
  SparseMat A;   // vector velocity stiffness (grad:grad)
  SparseMat B;   // (q_i, div phi_j), pressure rows by velocity columns
  SparseMat Mp;  // pressure mass
  Eigen::VectorXd p_integral;  // (q_i, 1), used for the pressure gauge
};

OperatorSet assemble_operators(const SpacePtr& sp, DirichletMask mask = DirichletMask::apply);

// u may live on the same space as v,w or on an ancestor space (evaluated
// through the mesh ancestry, which is exact for nested meshes).
// b(u,v,w) = integral of [(u.grad)v + 1/2 (div u) v] . w
double trilinear_b(const FEFunction& u, const FEFunction& v, const FEFunction& w);

enum class ConvectionMode { skew, plain, newton_pair };

struct ConvectionMatrices {
  SparseMat N1;  // advection by w:  (F(w, phi_j), phi_i)  (or plain (w.grad phi_j, phi_i))
  SparseMat N2;  // reaction:        (F(phi_j, w), phi_i)  (newton_pair only)
};

// Convecting field w is a velocity function on sp or on an ancestor space.
ConvectionMatrices convection_matrix(const FEFunction& w, const SpacePtr& sp, ConvectionMode mode,
                                     DirichletMask mask = DirichletMask::apply);

using VelocityField = std::function<Eigen::Vector2d(double, double)>;

// Load vector (g, phi_i) over the velocity space.
Eigen::VectorXd velocity_load(const SpacePtr& sp, const VelocityField& g,
                              DirichletMask mask = DirichletMask::apply);

// Load vectors from a discrete convecting field w (on sp or an ancestor):
// entries b(w, w, phi_i) with the skew form, or ((w.grad)w, phi_i) plain.
Eigen::VectorXd convection_load(const FEFunction& w, const SpacePtr& sp, ConvectionMode mode,
                                DirichletMask mask = DirichletMask::apply);

// Discrete Leray projection: L2 projection onto the discretely
// divergence-free subspace, computed from the mass/divergence saddle system.
FEFunction discrete_leray_projection(const VelocityField& g, const SpacePtr& sp);

// Norms of discrete fields by quadrature (full H1 norm = L2 + seminorm).
double fe_l2_norm(const FEFunction& f);
double fe_h1_seminorm(const FEFunction& f);
double fe_h1_norm(const FEFunction& f);

}  // namespace tgns
