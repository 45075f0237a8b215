#pragma once

#include "tgns/assembly.hpp"
#include "tgns/saddle.hpp"

#include <functional>
#include <vector>

namespace tgns {

// Coarse nonlinear solve failed to reach the residual tolerance.
class NewtonError : public SolverError {
 public:
  NewtonError(const std::string& what, double residual)
      : SolverError(what), last_residual(residual) {}
  double last_residual;
};

enum class TimeScheme { backward_euler, bdf2 };
enum class FineConvection { plain, skew };
enum class Algorithm { galerkin_only, alg1, alg2, dpp };

struct SchemeConfig {
  TimeScheme scheme = TimeScheme::bdf2;
  double dt = 0.0;
  double T = 0.0;
  double newton_tol = 1e-12;
  int newton_max_iters = 25;
  FineConvection fine_convection = FineConvection::plain;  // Algorithm 1 only
};

// Time-operator coefficients for the solve of u^{n+1}:
//   (alpha u^{n+1} - c0 u^n - c1 u^{n-1}) / dt.
// The two-step formula starts with one backward Euler step.
struct BdfStep {
  double alpha;
  double c0;
  double c1;
};
BdfStep bdf_coefficients(TimeScheme scheme, int step_index);

struct LevelState {
  FEFunction u;
  FEFunction p;
  std::vector<Eigen::VectorXd> history;  // velocity at the previous-but-one level (bdf2)
};

struct TwoGridState {
  double t = 0.0;
  int step_index = 0;
  LevelState coarse;
  LevelState fine;
};

using ForcingField = std::function<Eigen::Vector2d(double t, double x, double y)>;

// Drives one coarse/fine pair through the implicit schemes.  The coarse level
// is the standard Galerkin discretization; the fine level solves one linear
// problem per step, linearized around the coarse velocity at the new time
// level (the coarse level is advanced first and never sees the fine one).
class TwoGridStepper {
 public:
  TwoGridStepper(SpacePtr coarse_sp, SpacePtr fine_sp, SchemeConfig cfg, ForcingField forcing,
                 PressureGauge gauge = PressureGauge::lagrange_mean);

  // Both levels start from the discrete Leray projection of u0; pressures are
  // set at the first step.
  TwoGridState init_state(const VelocityField& u0) const;

  // Advances the coarse level to s.t + dt by a damped Newton iteration on the
  // velocity-pressure saddle system.  Does not touch s.t.
  void coarse_step(TwoGridState& s) const;

  // One linear fine-grid solve each; require the coarse level to be at
  // s.t + dt already.
  void fine_step_oseen(TwoGridState& s) const;
  void fine_step_newton(TwoGridState& s) const;
  void fine_step_dpp(TwoGridState& s) const;

  // Full step: coarse, then the fine solve selected by `alg`, then t += dt.
  void advance(TwoGridState& s, Algorithm alg) const;

  const SpacePtr& coarse_space() const { return coarse_sp_; }
  const SpacePtr& fine_space() const { return fine_sp_; }
  const OperatorSet& coarse_ops() const { return cops_; }
  const OperatorSet& fine_ops() const { return fops_; }
  const SchemeConfig& config() const { return cfg_; }

  double m_norm_coarse(const TwoGridState& s) const;
  double m_norm_fine(const TwoGridState& s) const;

 private:
  struct FineSystem {
    SparseMat K;
    Eigen::VectorXd rhs;
  };
  FineSystem fine_base(const TwoGridState& s) const;  // time operator + stiffness + loads
  void fine_solve(TwoGridState& s, SparseMat K, Eigen::VectorXd rhs) const;

  SpacePtr coarse_sp_, fine_sp_;
  SchemeConfig cfg_;
  ForcingField forcing_;
  PressureGauge gauge_;
  OperatorSet cops_, fops_;
};

struct RunPlan {
  Algorithm algorithm = Algorithm::alg1;
  SchemeConfig cfg;
  std::vector<int> snapshot_steps;  // states to copy out (in addition to the final one)
};

struct RunResult {
  TwoGridState final_state;
  std::vector<TwoGridState> snapshots;
  // Discrete M-norms of the velocities after every step (index 0 = initial).
  std::vector<double> coarse_m_norms;
  std::vector<double> fine_m_norms;
};

// Advances coarse-then-fine over N = round(T/dt) steps and records snapshots.
RunResult run_two_grid(const TwoGridStepper& stepper, const RunPlan& plan, const VelocityField& u0);

}  // namespace tgns
