#include "tgns/saddle.hpp"

#include <Eigen/Dense>
#include <Eigen/UmfPackSupport>

#include <cstdlib>
#include <vector>

namespace tgns {

namespace {

// Threaded BLAS slows the mid-size factorizations here and couples results to
// the ambient thread count; default it off unless the user asked otherwise.
[[maybe_unused]] const bool kBlasSingleThread = [] {
  setenv("OPENBLAS_NUM_THREADS", "1", /*overwrite=*/0);
  return true;
}();

void append_block(std::vector<Eigen::Triplet<double>>& trips, const SparseMat& m, int row0,
                  int col0, double scale = 1.0) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMat::InnerIterator it(m, k); it; ++it)
      trips.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()),
                         scale * it.value());
}

}  // namespace

// The pressure is determined only up to constants (B^T annihilates them), so
// one continuity row is redundant: both gauges factor a sparse nonsingular
// matrix with one pressure dof pinned and recover their normalization
// afterwards.  For lagrange_mean the multiplier is eliminated exactly first
// (row-summing the continuity block gives mu = sum(rhs_p)/|Omega|), which
// keeps the factored matrix free of the dense mean row; the returned solution
// solves the bordered system exactly.  The two gauges pin different rows, so
// they provide independent solution paths.
SaddleSolution solve_saddle(const SaddleSystem& sys, double rtol) {
  const int nu = static_cast<int>(sys.K.rows());
  const int np = static_cast<int>(sys.B.rows());
  if (sys.K.cols() != nu || sys.B.cols() != nu)
    throw std::domain_error("solve_saddle: block dimensions disagree");
  if (!sys.rhs_u.allFinite() || !sys.rhs_p.allFinite())
    throw SolverError("solve_saddle: non-finite right-hand side");

  const bool lagrange = (sys.gauge == PressureGauge::lagrange_mean);
  const double area = sys.p_integral.sum();

  double mu = 0.0;
  Eigen::VectorXd rhs_p_eff = sys.rhs_p;
  int pin_row = 0;
  if (lagrange) {
    mu = sys.rhs_p.sum() / area;
    rhs_p_eff -= mu * sys.p_integral;
    pin_row = np - 1;
  }

  const int n = nu + np;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sys.K.nonZeros() + 2 * sys.B.nonZeros() + 1);
  append_block(trips, sys.K, 0, 0);
  for (int k = 0; k < sys.B.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(sys.B, k); it; ++it) {
      trips.emplace_back(static_cast<int>(it.col()), nu + static_cast<int>(it.row()),
                         -it.value());  // -B^T in the momentum rows
      if (it.row() != pin_row)
        trips.emplace_back(nu + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  trips.emplace_back(nu + pin_row, nu + pin_row, 1.0);

  SparseMat mat(n, n);
  mat.setFromTriplets(trips.begin(), trips.end());
  mat.makeCompressed();
  if (!Eigen::Map<const Eigen::VectorXd>(mat.valuePtr(), mat.nonZeros()).allFinite())
    throw SolverError("solve_saddle: non-finite matrix entries");

  Eigen::VectorXd rhs(n);
  rhs.head(nu) = sys.rhs_u;
  rhs.segment(nu, np) = rhs_p_eff;
  rhs[nu + pin_row] = 0.0;

  Eigen::UmfPackLU<SparseMat> lu;
  lu.compute(mat);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve_saddle: singular factorization of the saddle block");
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite())
    throw SolverError("solve_saddle: back substitution failed");

  SaddleSolution out;
  out.u = sol.head(nu);
  out.p = sol.segment(nu, np);

  // Zero-mean pressure in both gauges (pressure-mass weighted).
  const double mean = sys.p_integral.dot(out.p) / area;
  out.p.array() -= mean;

  const double scale = std::max(1.0, std::max(sys.rhs_u.norm(), sys.rhs_p.norm()));
  const double res_u = (sys.K * out.u - sys.B.transpose() * out.p - sys.rhs_u).norm();
  Eigen::VectorXd cont = sys.B * out.u - sys.rhs_p;
  if (lagrange) cont += mu * sys.p_integral;
  const double res_p = cont.norm();
  if (res_u > rtol * scale || res_p > rtol * scale)
    throw SolverError("solve_saddle: residual exceeds tolerance (momentum " +
                      std::to_string(res_u) + ", continuity " + std::to_string(res_p) + ")");
  return out;
}

double infsup_estimate(const SpacePtr& sp) {
  OperatorSet ops = assemble_operators(sp);
  const int nu = sp->n_velocity_dofs;
  const int np = sp->n_pressure_dofs;

  Eigen::UmfPackLU<SparseMat> lu;
  lu.compute(ops.A);
  if (lu.info() != Eigen::Success) throw SolverError("infsup_estimate: stiffness factorization failed");

  Eigen::MatrixXd bt = Eigen::MatrixXd(ops.B).transpose();
  Eigen::MatrixXd x(nu, np);
  for (int j = 0; j < np; ++j) x.col(j) = lu.solve(bt.col(j));
  const Eigen::MatrixXd schur = Eigen::MatrixXd(ops.B) * x;
  const Eigen::MatrixXd mp = Eigen::MatrixXd(ops.Mp);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(schur, mp);
  if (es.info() != Eigen::Success) throw SolverError("infsup_estimate: eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  // Skip the deflated constant-pressure mode (eigenvalue ~ 0).
  const double cutoff = 1e-10 * std::max(1.0, ev[np - 1]);
  for (int i = 0; i < np; ++i)
    if (ev[i] > cutoff) return std::sqrt(ev[i]);
  throw SolverError("infsup_estimate: Schur complement is numerically zero");
}

}  // namespace tgns
