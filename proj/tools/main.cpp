// Command-line driver: convergence studies, single runs, mesh reports, and
// the inf-sup estimator.  Exit codes: 0 success, 2 configuration error,
// 3 solver failure, 4 I/O failure.

#include "tgns/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

using namespace tgns;

int thread_count_from_env() {
  const char* env = std::getenv("TGNS_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "galerkin_only") return Algorithm::galerkin_only;
  if (s == "alg1") return Algorithm::alg1;
  if (s == "alg2") return Algorithm::alg2;
  if (s == "dpp") return Algorithm::dpp;
  throw ConfigError("unknown algorithm: " + s);
}

int cmd_study(const std::string& plan_path, bool serial, int threads) {
  StudyPlan plan = load_study_plan(plan_path);
  if (serial) {
    plan.zero_wall_time = true;
    threads = 1;
  }
  StudyReport report = run_convergence_study(plan, threads);
  emit_report(report);
  write_csv(report, std::cout);
  return 0;
}

int cmd_run(const std::string& alg_s, const std::string& family_s, const std::string& case_name,
            int n, int steps, double T, const std::string& coupling_s,
            const std::string& scheme_s, const std::string& fine_conv_s, int newton_max_iters) {
  StudyPlan plan;
  plan.algorithm = algorithm_from_string(alg_s);
  plan.family = family_from_string(family_s);
  plan.case_name = case_name;
  plan.levels = {n};
  plan.coupling = [&] {
    if (coupling_s == "h_half") return Coupling{CouplingRule::h_half, 1};
    if (coupling_s == "h_two_thirds") return Coupling{CouplingRule::h_two_thirds, 1};
    if (coupling_s == "h_three_quarters") return Coupling{CouplingRule::h_three_quarters, 1};
    if (coupling_s.rfind("fixed_ratio", 0) == 0) {
      const auto open = coupling_s.find('('), close = coupling_s.find(')');
      if (open == std::string::npos || close == std::string::npos)
        throw ConfigError("coupling: expected fixed_ratio(k)");
      return Coupling{CouplingRule::fixed_ratio,
                      std::stoi(coupling_s.substr(open + 1, close - open - 1))};
    }
    throw ConfigError("unknown coupling rule: " + coupling_s);
  }();
  if (scheme_s == "backward_euler") plan.scheme = TimeScheme::backward_euler;
  else if (scheme_s == "bdf2") plan.scheme = TimeScheme::bdf2;
  else throw ConfigError("unknown scheme: " + scheme_s);
  if (fine_conv_s == "plain") plan.fine_convection = FineConvection::plain;
  else if (fine_conv_s == "skew") plan.fine_convection = FineConvection::skew;
  else throw ConfigError("unknown fine convection form: " + fine_conv_s);
  if (steps < 1) throw ConfigError("run: --N must be positive");
  if (n < 1) throw ConfigError("run: --n must be positive");
  if (T <= 0.0) throw ConfigError("run: --T must be positive");
  plan.T = T;
  plan.dt_rule = DtRule::fixed;
  plan.dt_fixed = T / steps;

  const ManufacturedCase& mms = mms_case(plan.case_name);
  const ElementFamily fam = ElementFamily::make(plan.family);
  int base = n;
  while (base % 2 == 0) base /= 2;
  std::vector<MeshPtr> chain{unit_square_mesh(base)};
  while (base << (chain.size() - 1) < n) chain.push_back(refine_uniform(chain.back()));
  const int fine_idx = static_cast<int>(chain.size()) - 1;
  const int coarse_idx = plan.algorithm == Algorithm::galerkin_only
                             ? fine_idx
                             : couple_H(fine_idx, plan.coupling, base, fine_idx + 1);
  SpacePtr fine_sp = build_space(chain[fine_idx], fam);
  SpacePtr coarse_sp = coarse_idx == fine_idx ? fine_sp : build_space(chain[coarse_idx], fam);

  SchemeConfig cfg;
  cfg.scheme = plan.scheme;
  cfg.dt = plan.dt_fixed;
  cfg.T = T;
  cfg.fine_convection = plan.fine_convection;
  if (newton_max_iters > 0) cfg.newton_max_iters = newton_max_iters;

  TwoGridStepper stepper(coarse_sp, fine_sp, cfg, mms.forcing);
  RunPlan rp;
  rp.algorithm = plan.algorithm;
  rp.cfg = cfg;
  RunResult res =
      run_two_grid(stepper, rp, [&](double x, double y) { return mms.velocity(0.0, x, y); });
  const LevelState& st =
      plan.algorithm == Algorithm::galerkin_only ? res.final_state.coarse : res.final_state.fine;
  const ErrorNorms err = error_norms(st.u, &st.p, mms, T);

  StudyReport report;
  report.plan = plan;
  report.version = version_string();
  StudyRow row;
  row.n = n;
  row.h = chain[fine_idx]->h_max;
  row.H = chain[coarse_idx]->h_max;
  row.dt = cfg.dt;
  row.vel_l2 = err.vel_l2;
  row.vel_h1 = err.vel_h1;
  row.p_l2 = err.p_l2_quotient;
  report.rows.push_back(row);
  write_csv(report, std::cout);
  return 0;
}

int cmd_mesh_info(int n, int refine) {
  MeshPtr mesh = unit_square_mesh(n);
  for (int k = 0; k < refine; ++k) mesh = refine_uniform(mesh);
  const MeshStats stats = mesh_stats(*mesh);
  std::cout << "vertices " << mesh->n_vertices() << "\n"
            << "edges " << mesh->n_edges() << "\n"
            << "triangles " << mesh->n_triangles() << "\n"
            << "h_max " << stats.h_max << "\n"
            << "min_angle_deg " << stats.min_angle_deg << "\n"
            << "regularity_ratio " << stats.regularity_ratio << "\n";
  return 0;
}

int cmd_infsup(const std::string& family_s, int n) {
  const ElementFamily fam = ElementFamily::make(family_from_string(family_s));
  SpacePtr sp = build_space(unit_square_mesh(n), fam);
  std::cout << "beta_h " << infsup_estimate(sp) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-grid incompressible Navier-Stokes solver and convergence harness"};
  app.require_subcommand(1);

  auto* study = app.add_subcommand("study", "run a convergence study from a plan file");
  std::string plan_path;
  bool serial = false;
  study->add_option("--plan", plan_path, "plan file")->required();
  study->add_flag("--serial", serial, "single-threaded, deterministic output (wall times zeroed)");

  auto* run = app.add_subcommand("run", "single simulation; prints final errors as CSV");
  std::string alg = "galerkin_only", family = "taylor_hood_2", case_name = "polystream";
  std::string coupling = "h_half", scheme = "bdf2", fine_conv = "plain";
  int n = 8, steps = 8;
  double T = 0.5;
  int newton_max_iters = 0;
  run->add_option("--algorithm", alg, "galerkin_only|alg1|alg2|dpp");
  run->add_option("--family", family, "mini|taylor_hood_2");
  run->add_option("--case", case_name, "manufactured case name");
  run->add_option("--n", n, "fine mesh subdivisions");
  run->add_option("--N", steps, "time steps");
  run->add_option("--T", T, "final time");
  run->add_option("--coupling", coupling, "h_half|h_two_thirds|h_three_quarters|fixed_ratio(k)");
  run->add_option("--scheme", scheme, "backward_euler|bdf2");
  run->add_option("--fine-convection", fine_conv, "plain|skew");
  run->add_option("--newton-max-iters", newton_max_iters, "cap coarse Newton iterations");

  auto* mesh_info = app.add_subcommand("mesh-info", "mesh statistics");
  int mi_n = 4, mi_refine = 0;
  mesh_info->add_option("--n", mi_n, "subdivisions per side")->required();
  mesh_info->add_option("--refine", mi_refine, "uniform refinements");

  auto* infsup = app.add_subcommand("infsup", "numerical inf-sup constant");
  std::string is_family = "taylor_hood_2";
  int is_n = 8;
  infsup->add_option("--family", is_family, "mini|taylor_hood_2|p1_p1")->required();
  infsup->add_option("--n", is_n, "subdivisions per side")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (study->parsed()) return cmd_study(plan_path, serial, thread_count_from_env());
    if (run->parsed())
      return cmd_run(alg, family, case_name, n, steps, T, coupling, scheme, fine_conv,
                     newton_max_iters);
    if (mesh_info->parsed()) return cmd_mesh_info(mi_n, mi_refine);
    if (infsup->parsed()) return cmd_infsup(is_family, is_n);
  } catch (const tgns::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tgns::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const tgns::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
