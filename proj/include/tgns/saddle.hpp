#pragma once

#include "tgns/assembly.hpp"

#include <stdexcept>
#include <string>

namespace tgns {

// Thrown when a factorization or linear solve cannot be completed.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

enum class PressureGauge { lagrange_mean, pin_and_shift };

// Block system  K u - B^T p = rhs_u,  B u = rhs_p,  with the pressure
// constant mode fixed by `gauge`.  K carries identity rows for Dirichlet
// dofs and B zeroed columns there.
struct SaddleSystem {
  SparseMat K;
  SparseMat B;
  Eigen::VectorXd rhs_u;
  Eigen::VectorXd rhs_p;
  Eigen::VectorXd p_integral;  // (q_i, 1)
  PressureGauge gauge = PressureGauge::lagrange_mean;
};

struct SaddleSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd p;  // zero mean (both gauges)
};

// Sparse direct solve; rejects non-finite inputs and verifies the block
// residuals against rtol * ||rhs||.
SaddleSolution solve_saddle(const SaddleSystem& sys, double rtol = 1e-10);

// Numerical inf-sup constant: sqrt of the smallest nonzero eigenvalue of the
// pressure Schur complement B A^{-1} B^T against the pressure mass matrix,
// with the constant pressure mode deflated.  Dense eigensolve; small meshes.
double infsup_estimate(const SpacePtr& sp);

}  // namespace tgns
