#include "tgns/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace tgns {

const std::string& version_string() {
  static const std::string v = "tgns 0.1.0";
  return v;
}

int couple_H(int fine_level_index, const Coupling& rule, int chain_base_n, int chain_length) {
  if (fine_level_index < 0 || fine_level_index >= chain_length)
    throw ConfigError("couple_H: fine level outside the chain");
  if (rule.rule == CouplingRule::fixed_ratio) {
    const int idx = fine_level_index - rule.fixed_levels;
    if (idx < 0) throw ConfigError("couple_H: refinement chain too short for fixed_ratio");
    return idx;
  }
  double alpha = 0.5;
  if (rule.rule == CouplingRule::h_two_thirds) alpha = 2.0 / 3.0;
  if (rule.rule == CouplingRule::h_three_quarters) alpha = 3.0 / 4.0;
  const double n_fine = chain_base_n * std::pow(2.0, fine_level_index);
  // Coarsest chain level with 1/n <= (1/n_fine)^alpha.
  const double n_target = std::pow(n_fine, alpha);
  int idx = static_cast<int>(std::ceil(std::log2(n_target / chain_base_n) - 1e-9));
  idx = std::max(idx, 0);
  if (idx > fine_level_index) idx = fine_level_index;
  return idx;
}

double estimate_rate(const std::vector<double>& errors, const std::vector<double>& sizes) {
  if (errors.size() != sizes.size() || errors.size() < 2)
    throw std::domain_error("estimate_rate: need matching inputs of length >= 2");
  for (size_t i = 0; i < sizes.size(); ++i) {
    if (errors[i] <= 0.0 || sizes[i] <= 0.0)
      throw std::domain_error("estimate_rate: inputs must be positive");
    if (i > 0 && sizes[i] >= sizes[i - 1])
      throw std::domain_error("estimate_rate: sizes must be strictly decreasing");
  }
  const size_t n = errors.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = std::log(sizes[i]), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int steps_for_level(const StudyPlan& plan, int n) {
  switch (plan.dt_rule) {
    case DtRule::fixed: {
      if (plan.dt_fixed <= 0.0) throw ConfigError("dt_rule fixed: dt must be positive");
      const int steps = static_cast<int>(std::llround(plan.T / plan.dt_fixed));
      if (steps < 1 || std::abs(steps * plan.dt_fixed - plan.T) > 1e-9 * std::max(1.0, plan.T))
        throw ConfigError("dt_rule fixed: T must be an integer multiple of dt");
      return steps;
    }
    case DtRule::proportional_to_h:
      return n;
    case DtRule::proportional_to_h32:
      return static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 1.5) - 1e-9));
  }
  throw ConfigError("unknown dt rule");
}

namespace {

struct Chain {
  int base_n = 1;
  std::vector<MeshPtr> meshes;  // meshes[k] has n = base_n * 2^k
  int index_of(int n) const {
    for (size_t k = 0; k < meshes.size(); ++k)
      if (base_n << k == n) return static_cast<int>(k);
    throw ConfigError("level " + std::to_string(n) + " is not on the refinement chain");
  }
};

Chain build_chain(const std::vector<int>& levels) {
  int g = 0;
  for (int n : levels) g = std::gcd(g, n);
  int base = g;
  while (base % 2 == 0) base /= 2;
  for (int n : levels) {
    int m = n;
    while (m > base && m % 2 == 0) m /= 2;
    if (m != base)
      throw ConfigError("levels must share one dyadic chain (base " + std::to_string(base) + ")");
  }
  Chain chain;
  chain.base_n = base;
  chain.meshes.push_back(unit_square_mesh(base));
  const int n_max = *std::max_element(levels.begin(), levels.end());
  while ((chain.base_n << (chain.meshes.size() - 1)) < n_max)
    chain.meshes.push_back(refine_uniform(chain.meshes.back()));
  return chain;
}

void validate_plan(const StudyPlan& plan) {
  if (plan.levels.empty()) throw ConfigError("plan: empty level list");
  for (size_t i = 1; i < plan.levels.size(); ++i)
    if (plan.levels[i] <= plan.levels[i - 1])
      throw ConfigError("plan: levels must be strictly increasing");
  for (int n : plan.levels)
    if (n < 1) throw ConfigError("plan: levels must be positive");
  if (plan.T <= 0.0) throw ConfigError("plan: T must be positive");
  mms_case(plan.case_name);  // throws for unknown names
  if (plan.family == Family::p1_p1) throw ConfigError("plan: p1_p1 is not a solver family");
}

StudyRow run_cell(const StudyPlan& plan, const Chain& chain, int n) {
  const auto t0 = std::chrono::steady_clock::now();
  const ManufacturedCase& mms = mms_case(plan.case_name);

  const int fine_idx = chain.index_of(n);
  int coarse_idx = fine_idx;
  if (plan.algorithm != Algorithm::galerkin_only)
    coarse_idx = couple_H(fine_idx, plan.coupling, chain.base_n, static_cast<int>(chain.meshes.size()));

  const ElementFamily fam = ElementFamily::make(plan.family);
  SpacePtr fine_sp = build_space(chain.meshes[fine_idx], fam);
  SpacePtr coarse_sp = (coarse_idx == fine_idx) ? fine_sp : build_space(chain.meshes[coarse_idx], fam);

  StudyRow row;
  row.n = n;
  row.nH = chain.base_n << coarse_idx;
  row.steps = steps_for_level(plan, n);
  row.dt = plan.T / row.steps;
  row.h = chain.meshes[fine_idx]->h_max;
  row.H = chain.meshes[coarse_idx]->h_max;

  SchemeConfig cfg;
  cfg.scheme = plan.scheme;
  cfg.dt = row.dt;
  cfg.T = plan.T;
  cfg.fine_convection = plan.fine_convection;
  if (cfg.scheme == TimeScheme::bdf2 && row.steps < 2)
    throw ConfigError("plan: bdf2 needs at least two steps per run");

  TwoGridStepper stepper(coarse_sp, fine_sp, cfg, mms.forcing);
  RunPlan rp;
  rp.algorithm = plan.algorithm;
  rp.cfg = cfg;
  RunResult res = run_two_grid(stepper, rp,
                               [&](double x, double y) { return mms.velocity(0.0, x, y); });

  const bool use_coarse = (plan.algorithm == Algorithm::galerkin_only);
  const LevelState& st = use_coarse ? res.final_state.coarse : res.final_state.fine;
  const ErrorNorms err = error_norms(st.u, &st.p, mms, plan.T);
  row.vel_l2 = err.vel_l2;
  row.vel_h1 = err.vel_h1;
  row.p_l2 = err.p_l2_quotient;

  row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (plan.zero_wall_time) row.wall_s = 0.0;
  return row;
}

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double parse12(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

// Rates recomputed from the 12-digit formatted values so that the CSV is
// self-consistent under parse/recompute round trips.
StudyRates rates_from_rows(const std::vector<StudyRow>& rows) {
  std::vector<double> h, e0, e1, ep;
  for (const auto& r : rows) {
    h.push_back(parse12(fmt12(r.h)));
    e0.push_back(parse12(fmt12(r.vel_l2)));
    e1.push_back(parse12(fmt12(r.vel_h1)));
    ep.push_back(parse12(fmt12(r.p_l2)));
  }
  StudyRates rates;
  rates.vel_l2 = estimate_rate(e0, h);
  rates.vel_h1 = estimate_rate(e1, h);
  rates.p_l2 = estimate_rate(ep, h);
  return rates;
}

}  // namespace

StudyReport run_convergence_study(const StudyPlan& plan, int n_threads) {
  validate_plan(plan);
  Chain chain = build_chain(plan.levels);
  // Extend the chain downward if the coupling needs levels below min(levels):
  // couple_H snaps upward, so index 0 is always enough; nothing to do.

  StudyReport report;
  report.plan = plan;
  report.version = version_string();
  report.rows.resize(plan.levels.size());

  if (n_threads <= 1) {
    for (size_t i = 0; i < plan.levels.size(); ++i)
      report.rows[i] = run_cell(plan, chain, plan.levels[i]);
  } else {
    std::vector<std::thread> pool;
    std::mutex mu;
    size_t next = 0;
    std::exception_ptr first_error;
    auto worker = [&]() {
      for (;;) {
        size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= plan.levels.size() || first_error) return;
          i = next++;
        }
        try {
          StudyRow row = run_cell(plan, chain, plan.levels[i]);
          std::lock_guard<std::mutex> lock(mu);
          report.rows[i] = row;
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    const int nt = std::min<int>(n_threads, static_cast<int>(plan.levels.size()));
    for (int k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (const auto& r : report.rows)
    if (!std::isfinite(r.vel_l2) || !std::isfinite(r.vel_h1) || !std::isfinite(r.p_l2))
      throw SolverError("study: non-finite error norms at n = " + std::to_string(r.n));

  if (report.rows.size() >= 3) report.rates = rates_from_rows(report.rows);
  return report;
}

void write_csv(const StudyReport& report, std::ostream& os) {
  os << "h,H,dt,vel_l2,vel_h1,p_l2,wall_s\n";
  for (const auto& r : report.rows) {
    os << fmt12(r.h) << ',' << fmt12(r.H) << ',' << fmt12(r.dt) << ',' << fmt12(r.vel_l2) << ','
       << fmt12(r.vel_h1) << ',' << fmt12(r.p_l2) << ',' << fmt12(r.wall_s) << '\n';
  }
  if (report.rates) {
    os << "# rates,,," << fmt12(report.rates->vel_l2) << ',' << fmt12(report.rates->vel_h1) << ','
       << fmt12(report.rates->p_l2) << ",\n";
  }
}

namespace {

struct PlotSeries {
  const char* label;
  const char* color;
  std::vector<double> values;
};

}  // namespace

void write_svg(const StudyReport& report, std::ostream& os) {
  const int width = 640, height = 480;
  const double ml = 70, mr = 160, mt = 30, mb = 50;

  std::vector<PlotSeries> series = {{"vel_l2", "#1f77b4", {}},
                                    {"vel_h1", "#d62728", {}},
                                    {"p_l2", "#2ca02c", {}}};
  std::vector<double> hs;
  for (const auto& r : report.rows) {
    hs.push_back(r.h);
    series[0].values.push_back(r.vel_l2);
    series[1].values.push_back(r.vel_h1);
    series[2].values.push_back(r.p_l2);
  }

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (double h : hs) {
    xmin = std::min(xmin, std::log10(h));
    xmax = std::max(xmax, std::log10(h));
  }
  for (const auto& s : series)
    for (double v : s.values)
      if (v > 0) {
        ymin = std::min(ymin, std::log10(v));
        ymax = std::max(ymax, std::log10(v));
      }
  if (!(xmax > xmin)) xmax = xmin + 1;
  if (!(ymax > ymin)) ymax = ymin + 1;
  ymin -= 0.3;
  ymax += 0.3;

  auto px = [&](double logh) { return ml + (logh - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double logv) { return height - mb - (logv - ymin) / (ymax - ymin) * (height - mt - mb); };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
     << "errors vs h (log-log), case " << report.plan.case_name << "</text>\n";

  // Axes.
  os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
     << height - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (width - mr + ml) / 2 << "\" y=\"" << height - 14
     << "\" text-anchor=\"middle\" font-size=\"12\">h</text>\n";

  // Reference slopes anchored at the coarsest datum.
  if (!hs.empty()) {
    const double x0 = std::log10(hs.front());
    double y0 = -1e300;
    for (const auto& s : series)
      if (!s.values.empty() && s.values.front() > 0) y0 = std::max(y0, std::log10(s.values.front()));
    for (int slope = 1; slope <= 3; ++slope) {
      const double x1 = std::log10(hs.back());
      const double yy0 = y0 + 0.2, yy1 = yy0 + slope * (x1 - x0);
      os << "<line x1=\"" << px(x0) << "\" y1=\"" << py(yy0) << "\" x2=\"" << px(x1) << "\" y2=\""
         << py(yy1) << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
      os << "<text x=\"" << px(x1) - 4 << "\" y=\"" << py(yy1) - 4
         << "\" font-size=\"10\" fill=\"#777777\">slope " << slope << "</text>\n";
    }
  }

  int legend_row = 0;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < hs.size(); ++i) {
      if (s.values[i] <= 0) continue;
      os << px(std::log10(hs[i])) << ',' << py(std::log10(s.values[i])) << ' ';
    }
    os << "\"/>\n";
    for (size_t i = 0; i < hs.size(); ++i) {
      if (s.values[i] <= 0) continue;
      os << "<circle cx=\"" << px(std::log10(hs[i])) << "\" cy=\"" << py(std::log10(s.values[i]))
         << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    }
    const double ly = mt + 16 + 18 * legend_row++;
    os << "<line x1=\"" << width - mr + 14 << "\" y1=\"" << ly << "\" x2=\"" << width - mr + 40
       << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << width - mr + 46 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << s.label
       << "</text>\n";
  }
  os << "</svg>\n";
}

void emit_report(const StudyReport& report) {
  if (!report.plan.out_csv.empty()) {
    std::ofstream f(report.plan.out_csv);
    if (!f) throw IoError("cannot open " + report.plan.out_csv + " for writing");
    write_csv(report, f);
    if (!f.good()) throw IoError("write failed: " + report.plan.out_csv);
  }
  if (!report.plan.out_svg.empty()) {
    std::ofstream f(report.plan.out_svg);
    if (!f) throw IoError("cannot open " + report.plan.out_svg + " for writing");
    write_svg(report, f);
    if (!f.good()) throw IoError("write failed: " + report.plan.out_svg);
  }
}

namespace {

Coupling parse_coupling(const std::string& v) {
  Coupling c;
  if (v == "h_half") {
    c.rule = CouplingRule::h_half;
  } else if (v == "h_two_thirds") {
    c.rule = CouplingRule::h_two_thirds;
  } else if (v == "h_three_quarters") {
    c.rule = CouplingRule::h_three_quarters;
  } else if (v.rfind("fixed_ratio", 0) == 0) {
    c.rule = CouplingRule::fixed_ratio;
    const auto open = v.find('('), close = v.find(')');
    if (open == std::string::npos || close == std::string::npos || close <= open + 1)
      throw ConfigError("coupling: expected fixed_ratio(k)");
    c.fixed_levels = std::stoi(v.substr(open + 1, close - open - 1));
    if (c.fixed_levels < 0) throw ConfigError("coupling: fixed_ratio needs k >= 0");
  } else {
    throw ConfigError("unknown coupling rule: " + v);
  }
  return c;
}

}  // namespace

StudyPlan parse_study_plan(std::istream& is) {
  StudyPlan plan;
  std::map<std::string, bool> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto sep = line.find('=');
    if (sep == std::string::npos) sep = line.find(':');
    if (sep == std::string::npos)
      throw ConfigError("plan line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, sep));
    const std::string val = trim(line.substr(sep + 1));
    if (seen[key]) throw ConfigError("plan: duplicate key " + key);
    seen[key] = true;

    if (key == "algorithm") {
      if (val == "galerkin_only") plan.algorithm = Algorithm::galerkin_only;
      else if (val == "alg1") plan.algorithm = Algorithm::alg1;
      else if (val == "alg2") plan.algorithm = Algorithm::alg2;
      else if (val == "dpp") plan.algorithm = Algorithm::dpp;
      else throw ConfigError("unknown algorithm: " + val);
    } else if (key == "family") {
      plan.family = family_from_string(val);
    } else if (key == "case") {
      plan.case_name = val;
    } else if (key == "levels") {
      plan.levels.clear();
      std::string item;
      std::stringstream ss(val);
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
          plan.levels.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw ConfigError("levels: not an integer: " + item);
        }
      }
      if (plan.levels.empty()) throw ConfigError("levels: empty list");
    } else if (key == "coupling") {
      plan.coupling = parse_coupling(val);
    } else if (key == "scheme") {
      if (val == "backward_euler") plan.scheme = TimeScheme::backward_euler;
      else if (val == "bdf2") plan.scheme = TimeScheme::bdf2;
      else throw ConfigError("unknown scheme: " + val);
    } else if (key == "dt_rule") {
      if (val == "proportional_to_h") {
        plan.dt_rule = DtRule::proportional_to_h;
      } else if (val == "proportional_to_h32") {
        plan.dt_rule = DtRule::proportional_to_h32;
      } else if (val.rfind("fixed", 0) == 0) {
        plan.dt_rule = DtRule::fixed;
        const auto open = val.find('('), close = val.find(')');
        if (open == std::string::npos || close == std::string::npos || close <= open + 1)
          throw ConfigError("dt_rule: expected fixed(dt)");
        plan.dt_fixed = std::stod(val.substr(open + 1, close - open - 1));
      } else {
        throw ConfigError("unknown dt_rule: " + val);
      }
    } else if (key == "T") {
      try {
        plan.T = std::stod(val);
      } catch (const std::exception&) {
        throw ConfigError("T: not a number: " + val);
      }
    } else if (key == "out_csv") {
      plan.out_csv = val;
    } else if (key == "out_svg") {
      plan.out_svg = val;
    } else {
      throw ConfigError("plan: unknown key " + key);
    }
  }
  if (plan.levels.empty()) throw ConfigError("plan: missing levels");
  return plan;
}

StudyPlan load_study_plan(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open plan file: " + path);
  return parse_study_plan(f);
}

}  // namespace tgns
