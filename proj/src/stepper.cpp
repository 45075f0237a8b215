#include "tgns/stepper.hpp"

#include <cmath>
#include <stdexcept>

namespace tgns {

BdfStep bdf_coefficients(TimeScheme scheme, int step_index) {
  if (scheme == TimeScheme::backward_euler || step_index == 0) return {1.0, 1.0, 0.0};
  return {1.5, 2.0, -0.5};
}

TwoGridStepper::TwoGridStepper(SpacePtr coarse_sp, SpacePtr fine_sp, SchemeConfig cfg,
                               ForcingField forcing, PressureGauge gauge)
    : coarse_sp_(std::move(coarse_sp)),
      fine_sp_(std::move(fine_sp)),
      cfg_(cfg),
      forcing_(std::move(forcing)),
      gauge_(gauge) {
  if (cfg_.dt <= 0.0) throw std::domain_error("TwoGridStepper: dt must be positive");
  if (!fine_sp_->mesh->descends_from(*coarse_sp_->mesh))
    throw std::domain_error("TwoGridStepper: fine space must descend from the coarse space");
  cops_ = assemble_operators(coarse_sp_);
  fops_ = (fine_sp_.get() == coarse_sp_.get()) ? cops_ : assemble_operators(fine_sp_);
}

TwoGridState TwoGridStepper::init_state(const VelocityField& u0) const {
  TwoGridState s;
  s.t = 0.0;
  s.step_index = 0;
  s.coarse.u = discrete_leray_projection(u0, coarse_sp_);
  s.coarse.p = FEFunction::zero_pressure(coarse_sp_);
  if (fine_sp_.get() == coarse_sp_.get()) {
    s.fine.u = s.coarse.u;
  } else {
    s.fine.u = discrete_leray_projection(u0, fine_sp_);
  }
  s.fine.p = FEFunction::zero_pressure(fine_sp_);
  return s;
}

void TwoGridStepper::coarse_step(TwoGridState& s) const {
  const BdfStep bdf = bdf_coefficients(cfg_.scheme, s.step_index);
  const double dt = cfg_.dt;
  const double t_new = s.t + dt;

  Eigen::VectorXd hist = bdf.c0 * s.coarse.u.coeffs;
  if (bdf.c1 != 0.0) hist += bdf.c1 * s.coarse.history.at(0);
  const Eigen::VectorXd load =
      velocity_load(coarse_sp_, [&](double x, double y) { return forcing_(t_new, x, y); });
  const Eigen::VectorXd rhs_u = cops_.M * hist + dt * load;
  const double scale = 1.0 + rhs_u.norm();

  // Initial guess: previous level, extrapolated once bdf2 history exists.
  FEFunction u_it = s.coarse.u;
  if (bdf.c1 != 0.0) u_it.coeffs = 2.0 * s.coarse.u.coeffs - s.coarse.history.at(0);
  Eigen::VectorXd q = dt * s.coarse.p.coeffs;  // saddle solves scale pressure by dt

  auto residual = [&](const FEFunction& u, const Eigen::VectorXd& qv, Eigen::VectorXd& ru,
                      Eigen::VectorXd& rp) {
    ru = bdf.alpha * (cops_.M * u.coeffs) + dt * (cops_.A * u.coeffs) +
         dt * convection_load(u, coarse_sp_, ConvectionMode::skew) -
         cops_.B.transpose() * qv - rhs_u;
    rp = cops_.B * u.coeffs;
  };

  Eigen::VectorXd ru, rp;
  residual(u_it, q, ru, rp);
  double res = std::sqrt(ru.squaredNorm() + rp.squaredNorm());

  int iter = 0;
  while (res > cfg_.newton_tol * scale) {
    if (iter++ >= cfg_.newton_max_iters)
      throw NewtonError("coarse_step: Newton did not converge (residual " + std::to_string(res) + ")",
                        res);
    ConvectionMatrices conv = convection_matrix(u_it, coarse_sp_, ConvectionMode::newton_pair);
    SaddleSystem sys;
    sys.K = bdf.alpha * cops_.M + dt * cops_.A + dt * conv.N1 + dt * conv.N2;
    sys.B = cops_.B;
    sys.rhs_u = -ru;
    sys.rhs_p = -rp;
    sys.p_integral = cops_.p_integral;
    sys.gauge = gauge_;
    SaddleSolution delta = solve_saddle(sys);

    // Halve the step while the residual grows (at most 5 times).
    double lambda = 1.0;
    FEFunction u_try = u_it;
    Eigen::VectorXd q_try;
    double res_try = res;
    for (int halving = 0; halving <= 5; ++halving) {
      u_try.coeffs = u_it.coeffs + lambda * delta.u;
      q_try = q + lambda * delta.p;
      Eigen::VectorXd ru_t, rp_t;
      residual(u_try, q_try, ru_t, rp_t);
      res_try = std::sqrt(ru_t.squaredNorm() + rp_t.squaredNorm());
      if (res_try <= res || halving == 5) {
        ru.swap(ru_t);
        rp.swap(rp_t);
        break;
      }
      lambda *= 0.5;
    }
    u_it = u_try;
    q = q_try;
    res = res_try;
  }

  if (cfg_.scheme == TimeScheme::bdf2) s.coarse.history = {s.coarse.u.coeffs};
  s.coarse.u = u_it;
  s.coarse.p.coeffs = q / dt;
  const double mean = cops_.p_integral.dot(s.coarse.p.coeffs) / cops_.p_integral.sum();
  s.coarse.p.coeffs.array() -= mean;
}

TwoGridStepper::FineSystem TwoGridStepper::fine_base(const TwoGridState& s) const {
  const BdfStep bdf = bdf_coefficients(cfg_.scheme, s.step_index);
  const double dt = cfg_.dt;
  const double t_new = s.t + dt;
  Eigen::VectorXd hist = bdf.c0 * s.fine.u.coeffs;
  if (bdf.c1 != 0.0) hist += bdf.c1 * s.fine.history.at(0);
  FineSystem out;
  out.K = bdf.alpha * fops_.M + dt * fops_.A;
  out.rhs = fops_.M * hist +
            dt * velocity_load(fine_sp_, [&](double x, double y) { return forcing_(t_new, x, y); });
  return out;
}

void TwoGridStepper::fine_solve(TwoGridState& s, SparseMat K, Eigen::VectorXd rhs) const {
  SaddleSystem sys;
  sys.K = std::move(K);
  sys.B = fops_.B;
  sys.rhs_u = std::move(rhs);
  sys.rhs_p = Eigen::VectorXd::Zero(fine_sp_->n_pressure_dofs);
  sys.p_integral = fops_.p_integral;
  sys.gauge = gauge_;
  SaddleSolution sol = solve_saddle(sys);
  if (cfg_.scheme == TimeScheme::bdf2) s.fine.history = {s.fine.u.coeffs};
  s.fine.u.coeffs = std::move(sol.u);
  s.fine.p.coeffs = sol.p / cfg_.dt;
}

void TwoGridStepper::fine_step_oseen(TwoGridState& s) const {
  FineSystem base = fine_base(s);
  const ConvectionMode mode =
      cfg_.fine_convection == FineConvection::skew ? ConvectionMode::skew : ConvectionMode::plain;
  ConvectionMatrices conv = convection_matrix(s.coarse.u, fine_sp_, mode);
  base.K += cfg_.dt * conv.N1;
  fine_solve(s, std::move(base.K), std::move(base.rhs));
}

void TwoGridStepper::fine_step_newton(TwoGridState& s) const {
  FineSystem base = fine_base(s);
  ConvectionMatrices conv = convection_matrix(s.coarse.u, fine_sp_, ConvectionMode::newton_pair);
  base.K += cfg_.dt * conv.N1 + cfg_.dt * conv.N2;
  base.rhs += cfg_.dt * convection_load(s.coarse.u, fine_sp_, ConvectionMode::skew);
  fine_solve(s, std::move(base.K), std::move(base.rhs));
}

void TwoGridStepper::fine_step_dpp(TwoGridState& s) const {
  FineSystem base = fine_base(s);
  base.rhs -= cfg_.dt * convection_load(s.coarse.u, fine_sp_, ConvectionMode::plain);
  fine_solve(s, std::move(base.K), std::move(base.rhs));
}

void TwoGridStepper::advance(TwoGridState& s, Algorithm alg) const {
  coarse_step(s);
  switch (alg) {
    case Algorithm::galerkin_only: break;
    case Algorithm::alg1: fine_step_oseen(s); break;
    case Algorithm::alg2: fine_step_newton(s); break;
    case Algorithm::dpp: fine_step_dpp(s); break;
  }
  s.t += cfg_.dt;
  ++s.step_index;
}

double TwoGridStepper::m_norm_coarse(const TwoGridState& s) const {
  return std::sqrt(s.coarse.u.coeffs.dot(cops_.M * s.coarse.u.coeffs));
}

double TwoGridStepper::m_norm_fine(const TwoGridState& s) const {
  return std::sqrt(s.fine.u.coeffs.dot(fops_.M * s.fine.u.coeffs));
}

RunResult run_two_grid(const TwoGridStepper& stepper, const RunPlan& plan, const VelocityField& u0) {
  const SchemeConfig& cfg = plan.cfg;
  if (cfg.dt <= 0.0 || cfg.T < 0.0) throw std::domain_error("run_two_grid: invalid time grid");
  const int n_steps = static_cast<int>(std::llround(cfg.T / cfg.dt));
  if (std::abs(n_steps * cfg.dt - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
    throw std::domain_error("run_two_grid: T must be an integer multiple of dt");
  if (cfg.scheme == TimeScheme::bdf2 && n_steps > 0 && n_steps < 2)
    throw std::domain_error("run_two_grid: bdf2 needs at least two steps");

  RunResult out;
  TwoGridState s = stepper.init_state(u0);
  out.coarse_m_norms.push_back(stepper.m_norm_coarse(s));
  out.fine_m_norms.push_back(stepper.m_norm_fine(s));
  for (int step : plan.snapshot_steps)
    if (step == 0) out.snapshots.push_back(s);

  for (int n = 0; n < n_steps; ++n) {
    stepper.advance(s, plan.algorithm);
    out.coarse_m_norms.push_back(stepper.m_norm_coarse(s));
    out.fine_m_norms.push_back(stepper.m_norm_fine(s));
    for (int step : plan.snapshot_steps)
      if (step == n + 1) out.snapshots.push_back(s);
  }
  out.final_state = std::move(s);
  return out;
}

}  // namespace tgns
