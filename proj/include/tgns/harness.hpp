#pragma once

#include "tgns/mms.hpp"
#include "tgns/stepper.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgns {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

enum class CouplingRule { fixed_ratio, h_half, h_two_thirds, h_three_quarters };

struct Coupling {
  CouplingRule rule = CouplingRule::h_half;
  int fixed_levels = 1;  // fixed_ratio only: H/h = 2^fixed_levels
};

enum class DtRule { fixed, proportional_to_h, proportional_to_h32 };

struct StudyPlan {
  Algorithm algorithm = Algorithm::alg1;
  Family family = Family::taylor_hood_2;
  std::string case_name = "polystream";
  std::vector<int> levels;  // fine n values, strictly increasing, base * 2^k
  Coupling coupling;
  TimeScheme scheme = TimeScheme::bdf2;
  DtRule dt_rule = DtRule::proportional_to_h;
  double dt_fixed = 0.0;
  double T = 0.5;
  std::string out_csv;
  std::string out_svg;
  FineConvection fine_convection = FineConvection::plain;
  bool zero_wall_time = false;  // deterministic-output mode (--serial)
};

struct StudyRow {
  int n = 0, nH = 0, steps = 0;
  double h = 0, H = 0, dt = 0;
  double vel_l2 = 0, vel_h1 = 0, p_l2 = 0;
  double wall_s = 0;
};

struct StudyRates {
  double vel_l2 = 0, vel_h1 = 0, p_l2 = 0;
};

struct StudyReport {
  StudyPlan plan;
  std::vector<StudyRow> rows;
  std::optional<StudyRates> rates;  // present when >= 3 rows
  std::string version;
};

// Index (within a chain of meshes n = base * 2^k, k = 0..chain_length-1) of
// the coarse companion for the fine level at `fine_level_index`.  The H = h^a
// rules target H* = (1/n)^a and snap to the coarsest chain level with mesh
// size 1/n <= H*.  Throws ConfigError when the chain cannot supply the level.
int couple_H(int fine_level_index, const Coupling& rule, int chain_base_n, int chain_length);

// Least-squares slope of log(error) against log(size); the two-point case
// degenerates to the log ratio.  Sizes must be strictly decreasing, inputs
// positive.
double estimate_rate(const std::vector<double>& errors, const std::vector<double>& sizes);

// Steps for one study cell under the plan's dt rule.
int steps_for_level(const StudyPlan& plan, int n);

StudyReport run_convergence_study(const StudyPlan& plan, int n_threads = 1);

void write_csv(const StudyReport& report, std::ostream& os);
void write_svg(const StudyReport& report, std::ostream& os);
// Writes the files named by the plan (out_csv, optional out_svg).
void emit_report(const StudyReport& report);

// Key/value plan file: keys algorithm, family, case, levels, coupling,
// scheme, dt_rule, T, out_csv, out_svg.
StudyPlan parse_study_plan(std::istream& is);
StudyPlan load_study_plan(const std::string& path);

const std::string& version_string();

}  // namespace tgns
