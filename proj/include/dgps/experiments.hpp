#pragma once
// Batch experiments: condition numbers, PCG iteration counts, the heat
// problem, temporal eigenvalues and the self-test. Each run returns a long
// format table (CSV) and a compact display table (markdown).

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dg_solver.hpp"
#include "selftest.hpp"

namespace dgps {

enum class Experiment { cond_table, cond_mesh_p, cond_asymptotic_p, iters_2d, iters_p_sweep, heat, eigs, selftest };
enum class ModeSelection { direct, mg, both };
enum class OutputFormat { csv, markdown };

inline constexpr std::pair<Experiment, const char*> kExperimentNames[] = {
    {Experiment::cond_table, "cond_table"},
    {Experiment::cond_mesh_p, "cond_mesh_p"},
    {Experiment::cond_asymptotic_p, "cond_asymptotic_p"},
    {Experiment::iters_2d, "iters_2d"},
    {Experiment::iters_p_sweep, "iters_p_sweep"},
    {Experiment::heat, "heat"},
    {Experiment::eigs, "eigs"},
    {Experiment::selftest, "selftest"},
};

inline std::string to_string(Experiment e) {
  for (const auto& [value, name] : kExperimentNames)
    if (value == e) return name;
  return "?";
}

inline Experiment parse_experiment(const std::string& s) {
  for (const auto& [value, name] : kExperimentNames)
    if (s == name) return value;
  throw ValidationError("unknown experiment '" + s + "'");
}

inline std::string to_string(ModeSelection m) {
  return m == ModeSelection::direct ? "direct" : m == ModeSelection::mg ? "mg" : "both";
}

/// Empty lists and unset optionals mean "experiment default" (see resolve).
struct ExperimentConfig {
  Experiment experiment = Experiment::cond_table;
  std::vector<int> p;
  std::vector<int> h_exp;
  std::vector<double> tau;
  std::optional<int> dim;
  std::optional<ModeSelection> mode;
  std::vector<int> vcycles;
  double tol = 1e-6;
  std::optional<int> maxit;  ///< PCG default 200, Lanczos default 2000
  std::uint64_t seed = 7;
  int threads = 1;
  std::string out;
  OutputFormat format = OutputFormat::csv;
  bool allow_large = false;
  InitialDatum u0 = InitialDatum::interpolation;
  double perturb_k = 0.0;
};

inline constexpr int kMaxDegree = 1024;
inline constexpr int kMaxLevel2d = 10;
inline constexpr int kDefaultMaxLevel2d = 8;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline long long parse_int(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ValidationError(key + ": expected an integer, got '" + s + "'");
  return v;
}

inline double parse_double(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ValidationError(key + ": expected a number, got '" + s + "'");
  return v;
}

/// "4", "4,6,8", "5..10", "4..14:2" or a mix separated by commas.
inline std::vector<int> parse_int_list(const std::string& key, const std::string& s) {
  std::vector<int> out;
  for (const std::string& item : split(s, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(static_cast<int>(parse_int(key, item)));
      continue;
    }
    std::string upper = item.substr(dots + 2);
    long long step = 1;
    if (const auto colon = upper.find(':'); colon != std::string::npos) {
      step = parse_int(key, upper.substr(colon + 1));
      upper = upper.substr(0, colon);
    }
    const long long a = parse_int(key, item.substr(0, dots)), b = parse_int(key, upper);
    if (step <= 0 || b < a || (b - a) / step > 100000) throw ValidationError(key + ": bad range '" + item + "'");
    for (long long v = a; v <= b; v += step) out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ValidationError(key + ": empty list");
  return out;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const std::string& item : split(s, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ValidationError(key + ": empty list");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ValidationError(key + ": expected true/false, got '" + s + "'");
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace detail

/// Applies one key=value setting. Keys accept '-' or '_'.
inline void apply_setting(ExperimentConfig& c, std::string key, const std::string& raw) {
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = detail::trim(raw);
  if (key == "experiment") c.experiment = parse_experiment(value);
  else if (key == "p") c.p = detail::parse_int_list(key, value);
  else if (key == "h_exp") c.h_exp = detail::parse_int_list(key, value);
  else if (key == "tau") c.tau = detail::parse_double_list(key, value);
  else if (key == "dim") c.dim = static_cast<int>(detail::parse_int(key, value));
  else if (key == "mode") {
    if (value == "direct") c.mode = ModeSelection::direct;
    else if (value == "mg") c.mode = ModeSelection::mg;
    else if (value == "both") c.mode = ModeSelection::both;
    else throw ValidationError("mode: expected direct, mg or both, got '" + value + "'");
  } else if (key == "vcycles") c.vcycles = detail::parse_int_list(key, value);
  else if (key == "tol") c.tol = detail::parse_double(key, value);
  else if (key == "maxit") c.maxit = static_cast<int>(detail::parse_int(key, value));
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(detail::parse_int(key, value));
  else if (key == "threads") c.threads = static_cast<int>(detail::parse_int(key, value));
  else if (key == "out") c.out = value;
  else if (key == "format") {
    if (value == "csv") c.format = OutputFormat::csv;
    else if (value == "markdown" || value == "md") c.format = OutputFormat::markdown;
    else throw ValidationError("format: expected csv or markdown, got '" + value + "'");
  } else if (key == "allow_large") c.allow_large = detail::parse_bool(key, value);
  else if (key == "u0") {
    if (value == "interpolation") c.u0 = InitialDatum::interpolation;
    else if (value == "projection" || value == "l2_projection") c.u0 = InitialDatum::projection;
    else throw ValidationError("u0: expected interpolation or projection, got '" + value + "'");
  } else if (key == "perturb_k") c.perturb_k = detail::parse_double(key, value);
  else throw ValidationError("unknown setting '" + key + "'");
}

/// Flat key=value text; '#' starts a comment.
inline void apply_config_text(ExperimentConfig& c, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(number) + ": expected key = value");
    apply_setting(c, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

inline void apply_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(c, text.str());
}

/// Fills experiment defaults and validates ranges.
inline ExperimentConfig resolve(ExperimentConfig c) {
  const HeatProblem heat;
  auto fill = [](auto& v, auto def) {
    if (v.empty()) v = def;
  };
  switch (c.experiment) {
    case Experiment::cond_table:
      fill(c.p, std::vector<int>{2});
      fill(c.h_exp, std::vector<int>{5});
      fill(c.tau, std::vector<double>{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0});
      break;
    case Experiment::cond_mesh_p:
      fill(c.p, std::vector<int>{1, 2, 3, 4, 5, 6});
      fill(c.h_exp, std::vector<int>{5, 6, 7, 8, 9, 10});
      fill(c.tau, std::vector<double>{0.1});
      break;
    case Experiment::cond_asymptotic_p:
      fill(c.p, std::vector<int>{8, 16, 32, 64, 128, 256});
      fill(c.h_exp, std::vector<int>{5});
      fill(c.tau, std::vector<double>{0.1});
      break;
    case Experiment::iters_2d:
      fill(c.p, std::vector<int>{2});
      fill(c.h_exp, std::vector<int>{6, 7, 8});
      fill(c.tau, std::vector<double>{0.1});
      fill(c.vcycles, std::vector<int>{1, 2, 3});
      if (!c.mode) c.mode = ModeSelection::both;
      break;
    case Experiment::iters_p_sweep:
      fill(c.p, std::vector<int>{4, 6, 8, 10, 12, 14});
      fill(c.h_exp, std::vector<int>{7});
      fill(c.tau, std::vector<double>{0.1});
      fill(c.vcycles, std::vector<int>{1});
      if (!c.mode) c.mode = ModeSelection::mg;
      break;
    case Experiment::heat:
      fill(c.p, std::vector<int>{0, 1});
      fill(c.h_exp, std::vector<int>{8});
      fill(c.tau, std::vector<double>{heat.T_final, heat.T_final / 2, heat.T_final / 4, heat.T_final / 8});
      fill(c.vcycles, std::vector<int>{1});
      if (!c.mode) c.mode = ModeSelection::both;
      break;
    case Experiment::eigs:
      fill(c.p, std::vector<int>{100});
      break;
    case Experiment::selftest:
      break;
  }
  const bool spatial = c.experiment != Experiment::eigs && c.experiment != Experiment::selftest;
  const bool one_d = c.experiment == Experiment::cond_table || c.experiment == Experiment::cond_mesh_p ||
                     c.experiment == Experiment::cond_asymptotic_p;
  if (!c.dim && spatial) c.dim = one_d ? 1 : 2;
  if (spatial) {
    if (one_d && *c.dim != 1) throw ValidationError(to_string(c.experiment) + " requires dim = 1");
    if (!one_d && *c.dim != 2) throw ValidationError(to_string(c.experiment) + " requires dim = 2");
  }
  if (!c.mode) c.mode = ModeSelection::direct;
  if (!c.maxit) c.maxit = one_d ? 2000 : 200;
  for (int p : c.p)
    if (p < 0 || p > kMaxDegree)
      throw ValidationError("p = " + std::to_string(p) + " outside [0, " + std::to_string(kMaxDegree) + "]");
  if (spatial)
    for (int k : c.h_exp) {
      const int kmax = *c.dim == 1 ? 20 : kMaxLevel2d;
      if (k < 2 || k > kmax)
        throw ValidationError("h = 2^-" + std::to_string(k) + " outside [2^-" + std::to_string(kmax) +
                              ", 2^-2] for dim " + std::to_string(*c.dim));
      if (*c.dim == 2 && k > kDefaultMaxLevel2d && !c.allow_large)
        throw ValidationError("h = 2^-" + std::to_string(k) +
                              " in 2D needs --allow-large (several GB of memory, long runtime)");
    }
  for (double t : c.tau)
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("tau must be positive and finite");
  for (int n : c.vcycles)
    if (n < 1 || n > 100) throw ValidationError("vcycles must lie in [1, 100]");
  if (!(c.tol > 0.0) || c.tol >= 1.0) throw ValidationError("tol must lie in (0, 1)");
  if (*c.maxit < 1) throw ValidationError("maxit must be positive");
  if (c.threads < 1 || c.threads > 256) throw ValidationError("threads must lie in [1, 256]");
  if (c.experiment == Experiment::heat) {
    for (double t : c.tau) {
      const double steps = std::round(heat.T_final / t);
      if (steps < 1.0 || std::abs(steps * t - heat.T_final) > 1e-12 * heat.T_final)
        throw ValidationError("heat: tau must divide T = 0.1 evenly");
    }
  }
  return c;
}

/// Single-line echo of every setting, embedded in each report.
inline std::string describe(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(12);
  os << kVersion << " | experiment=" << to_string(c.experiment) << " p=" << detail::join(c.p)
     << " h_exp=" << detail::join(c.h_exp) << " tau=" << detail::join(c.tau)
     << " dim=" << (c.dim ? std::to_string(*c.dim) : "default")
     << " mode=" << (c.mode ? to_string(*c.mode) : "default") << " vcycles=" << detail::join(c.vcycles)
     << " tol=" << c.tol << " maxit=" << (c.maxit ? std::to_string(*c.maxit) : "default") << " seed=" << c.seed << " threads=" << c.threads
     << " u0=" << to_string(c.u0) << " allow_large=" << (c.allow_large ? "true" : "false");
  if (c.perturb_k != 0.0) os << " perturb_k=" << c.perturb_k;
  return os.str();
}

// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    require(row.size() == columns.size(), "Table::add: row width differs from header");
    rows.push_back(std::move(row));
  }
};

struct Report {
  ExperimentConfig config;
  std::string title;
  Table data;
  Table display;
  std::vector<std::string> notes;
  bool passed = true;
};

namespace detail {

inline std::string num(double x, int digits = 10) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline std::string h_label(int k) { return "2^-" + std::to_string(k); }

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

inline std::string md_cell(const std::string& s) {
  std::string out;
  for (char ch : s) out += ch == '|' ? std::string("\\|") : std::string(1, ch);
  return out;
}

}  // namespace detail

inline void write_csv(const Report& r, std::ostream& os) {
  os << "# " << describe(r.config) << "\n";
  for (std::size_t i = 0; i < r.data.columns.size(); ++i)
    os << (i ? "," : "") << detail::csv_field(r.data.columns[i]);
  os << "\n";
  for (const auto& row : r.data.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_field(row[i]);
    os << "\n";
  }
}

inline void write_markdown(const Report& r, std::ostream& os) {
  os << "## " << r.title << "\n\n`" << describe(r.config) << "`\n\n";
  const Table& t = r.display;
  os << "|";
  for (const auto& c : t.columns) os << " " << detail::md_cell(c) << " |";
  os << "\n|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << "---|";
  os << "\n";
  for (const auto& row : t.rows) {
    os << "|";
    for (const auto& cell : row) os << " " << detail::md_cell(cell) << " |";
    os << "\n";
  }
  if (!r.notes.empty()) {
    os << "\n";
    for (const auto& n : r.notes) os << "- " << n << "\n";
  }
}

inline void write_report(const Report& r, std::ostream& os) {
  if (r.config.format == OutputFormat::csv) write_csv(r, os);
  else write_markdown(r, os);
}

// ---------------------------------------------------------------------------

namespace detail {

inline Report run_condition(const ExperimentConfig& c) {
  Report r{c, "", {{"p", "h_exp", "tau", "kappa", "ritz_min", "ritz_max", "lanczos_steps", "converged"}, {}},
           {}, {}, true};
  std::map<int, TemporalBasis> bases;
  std::map<int, SpatialPair> pairs;
  // kappa[p][k][tau index]
  std::map<int, std::map<int, std::vector<double>>> kappa;
  for (int p : c.p) {
    auto& basis = bases.try_emplace(p, build_basis(p)).first->second;
    for (int k : c.h_exp) {
      auto& pair = pairs.try_emplace(k, assemble_1d(k)).first->second;
      for (double tau : c.tau) {
        const DgStepOperator op(basis, pair, tau, {}, c.threads);
        const ConditionEstimate est = estimate_condition(op, *c.maxit, c.seed);
        r.data.add({std::to_string(p), std::to_string(k), num(tau), num(est.kappa), num(est.ritz_min),
                    num(est.ritz_max), std::to_string(est.iterations), est.converged ? "1" : "0"});
        kappa[p][k].push_back(est.kappa);
        r.passed = r.passed && est.converged;
      }
    }
  }
  if (c.experiment == Experiment::cond_table) {
    r.title = "Condition number versus time step";
    r.display.columns = {"p", "h"};
    for (double tau : c.tau) r.display.columns.push_back("tau=" + num(tau, 3));
    for (int p : c.p)
      for (int k : c.h_exp) {
        std::vector<std::string> row{std::to_string(p), h_label(k)};
        for (double v : kappa[p][k]) row.push_back(num(v, 4));
        r.display.add(std::move(row));
      }
  } else {
    r.title = c.experiment == Experiment::cond_mesh_p ? "Condition number versus mesh size and degree"
                                                      : "Condition number for large degree";
    r.display.columns = {"p"};
    for (int k : c.h_exp)
      for (double tau : c.tau)
        r.display.columns.push_back("h=" + h_label(k) + (c.tau.size() > 1 ? " tau=" + num(tau, 3) : ""));
    for (int p : c.p) {
      std::vector<std::string> row{std::to_string(p)};
      for (int k : c.h_exp)
        for (double v : kappa[p][k]) row.push_back(num(v, 4));
      r.display.add(std::move(row));
    }
  }
  if (!r.passed) r.notes.push_back("some Lanczos runs hit maxit before the extremes settled");
  return r;
}

/// u* = H^{-1} w with w uniform in [0,1)^n (exact H): a random target whose
/// error is not concentrated on mesh-scale modes, so iteration counts do not
/// drift with h.
inline BlockVector manufactured_solution(const DgStepOperator& exact_op, std::uint64_t seed) {
  SplitMix64 rng(seed);
  return exact_op.apply_Hinv(BlockVector::random_unit(exact_op.blocks(), exact_op.spatial_dim(), rng));
}

struct IterMode {
  std::string label;
  DgModes modes;
};

inline std::vector<IterMode> iteration_modes(const ExperimentConfig& c) {
  std::vector<IterMode> out;
  if (*c.mode != ModeSelection::mg) out.push_back({"Direct", {}});
  if (*c.mode != ModeSelection::direct)
    for (int n : c.vcycles)
      out.push_back({std::to_string(n) + (n == 1 ? " V-cycle" : " V-cycles"),
                     {SolverMode::exact(), SolverMode::vcycles(n)}});
  return out;
}

inline Report run_iterations(const ExperimentConfig& c) {
  Report r{c,
           c.experiment == Experiment::iters_2d ? "PCG iterations versus mesh size"
                                                : "PCG iterations versus degree",
           {{"p", "h_exp", "tau", "dof", "mode", "iterations", "converged", "final_energy_error",
             "kappa_estimate"},
            {}},
           {},
           {},
           true};
  const auto modes = iteration_modes(c);
  r.display.columns = {"h", "p", "tau", "DoF"};
  for (const auto& m : modes) r.display.columns.push_back(m.label);
  const PcgControls controls{c.tol, *c.maxit, StopCriterion::true_energy_error};
  for (int k : c.h_exp) {
    const Discretization disc = discretize(2, k);
    for (int p : c.p) {
      const TemporalBasis basis = build_basis(p);
      for (double tau : c.tau) {
        const std::size_t dof = basis.size() * disc.pair.size();
        std::vector<std::string> row{h_label(k), std::to_string(p), num(tau, 3), std::to_string(dof)};
        const BlockVector ustar = manufactured_solution(DgStepOperator(basis, disc.pair, tau, {}, c.threads), c.seed);
        for (const auto& m : modes) {
          const DgStepOperator op(basis, disc.pair, tau, m.modes, c.threads);
          const PcgResult res = pcg(op, op.apply_L(ustar), controls, &ustar);
          const auto& rep = res.report;
          r.data.add({std::to_string(p), std::to_string(k), num(tau), std::to_string(dof), m.label,
                      std::to_string(rep.iterations), rep.converged ? "1" : "0",
                      num(rep.energy_error_history.back()), num(rep.kappa_estimate)});
          row.push_back(rep.converged ? std::to_string(rep.iterations) : ">" + std::to_string(rep.iterations));
          r.passed = r.passed && rep.converged;
        }
        r.display.add(std::move(row));
      }
    }
  }
  r.notes.push_back("exact solution H^-1 w, w seeded uniform [0,1); stop on relative energy error <= " +
                    num(c.tol, 3));
  return r;
}

inline Report run_heat(const ExperimentConfig& c) {
  const HeatProblem problem;
  Report r{c,
           "Heat problem final-time errors",
           {{"h_exp", "p", "steps", "tau", "mode", "final_error", "mean_iterations", "diff_to_direct"}, {}},
           {},
           {},
           true};
  std::vector<HeatMode> modes;
  if (*c.mode != ModeSelection::mg) modes.push_back(HeatMode::direct);
  if (*c.mode != ModeSelection::direct) modes.push_back(HeatMode::multigrid);
  r.display.columns = {"h", "tau/T"};
  for (int p : c.p)
    for (HeatMode m : modes) r.display.columns.push_back("err p=" + std::to_string(p) + " (" + to_string(m) + ")");
  if (modes.size() == 2)
    for (int p : c.p) r.display.columns.push_back("p=" + std::to_string(p) + " (D)-(MG)");
  for (int p : c.p)
    for (HeatMode m : modes) r.display.columns.push_back("iters p=" + std::to_string(p) + " (" + to_string(m) + ")");

  for (int k : c.h_exp) {
    const Discretization disc = discretize(2, k);
    for (double tau : c.tau) {
      const int steps = static_cast<int>(std::lround(problem.T_final / tau));
      std::vector<std::string> errs, diffs, iters;
      for (int p : c.p) {
        Vector direct;
        for (HeatMode m : modes) {
          HeatRun run;
          run.p = p;
          run.steps = steps;
          run.mode = m;
          run.controls = {c.tol, *c.maxit, StopCriterion::relative_preconditioned_residual};
          run.threads = c.threads;
          run.initial = c.u0;
          run.h_cycles = c.vcycles.front();
          const HeatReport rep = solve_heat(problem, disc, run);
          std::string diff;
          if (m == HeatMode::direct) {
            direct = rep.final_solution;
          } else if (!direct.empty()) {
            Vector d = rep.final_solution;
            axpy(-1.0, direct, d);
            const double dn = l2_error(disc.level(), d, [](double, double) { return 0.0; });
            diff = num(dn);
            diffs.push_back(num(dn, 4));
          }
          r.data.add({std::to_string(k), std::to_string(p), std::to_string(steps), num(rep.tau), to_string(m),
                      num(rep.final_error), num(rep.mean_iterations), diff});
          errs.push_back(num(rep.final_error, 4));
          iters.push_back(num(rep.mean_iterations, 3));
        }
      }
      std::vector<std::string> row{h_label(k), steps == 1 ? "1" : "1/" + std::to_string(steps)};
      row.insert(row.end(), errs.begin(), errs.end());
      row.insert(row.end(), diffs.begin(), diffs.end());
      row.insert(row.end(), iters.begin(), iters.end());
      r.display.add(std::move(row));
    }
  }
  r.notes.push_back("T = 0.1, u0 = x(1-x) sin(pi y) by " + to_string(c.u0) +
                    "; (MG): 5 V-cycles for A^-1, " + std::to_string(c.vcycles.front()) +
                    " per shifted solve; PCG stops on relative preconditioned residual <= " + num(c.tol, 3));
  return r;
}

inline Report run_eigs(const ExperimentConfig& c) {
  Report r{c, "Temporal eigenvalues", {{"p", "j", "lambda", "lambda_scaled_j2", "lambda_scaled_p4"}, {}}, {}, {},
           true};
  for (int p : c.p) {
    const TemporalBasis basis = build_basis(p);
    for (std::size_t j = 0; j < basis.size(); ++j)
      r.data.add({std::to_string(p), std::to_string(j), num(basis.lambda[j], 17),
                  num(basis.lambda[j] * (j + 1.0) * (j + 1.0), 12),
                  num(basis.lambda[j] * std::pow(p + 1.0, 4), 12)});
  }
  const EigenvalueDecayReport decay = verify_eigenvalue_decay(c.p);
  r.display.columns = {"p", "max_j lambda_j (j+1)^2", "lambda_p (p+1)^4", "bulk slope", "tail slope"};
  for (std::size_t i = 0; i < c.p.size(); ++i)
    r.display.add({std::to_string(c.p[i]), num(decay.upper_scaled_per_p[i], 6), num(decay.lower_scaled_per_p[i], 6),
                   num(decay.bulk_slopes[i], 4), num(decay.tail_slopes[i], 4)});
  if (c.p.size() >= 2) r.notes.push_back("slope of log lambda_p against log(p+1): " + num(decay.smallest_slope, 4));
  return r;
}

inline Report run_selftest_report(const ExperimentConfig& c) {
  Report r{c, "Self-test", {{"suite", "result", "detail"}, {}}, {{"suite", "result", "detail", "seconds"}, {}},
           {}, true};
  for (const SuiteResult& s : run_selftest({c.seed, c.perturb_k})) {
    r.data.add({s.name, s.passed ? "PASS" : "FAIL", s.detail});
    r.display.add({s.name, s.passed ? "PASS" : "FAIL", s.detail, num(s.seconds, 3)});
    r.passed = r.passed && s.passed;
  }
  return r;
}

}  // namespace detail

/// Runs a (not yet resolved) configuration.
inline Report run_experiment(const ExperimentConfig& config) {
  const ExperimentConfig c = resolve(config);
  switch (c.experiment) {
    case Experiment::cond_table:
    case Experiment::cond_mesh_p:
    case Experiment::cond_asymptotic_p:
      return detail::run_condition(c);
    case Experiment::iters_2d:
    case Experiment::iters_p_sweep:
      return detail::run_iterations(c);
    case Experiment::heat:
      return detail::run_heat(c);
    case Experiment::eigs:
      return detail::run_eigs(c);
    case Experiment::selftest:
      return detail::run_selftest_report(c);
  }
  throw ValidationError("unhandled experiment");
}

}  // namespace dgps
