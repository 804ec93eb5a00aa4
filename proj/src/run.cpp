// SPDX-License-Identifier: Apache-2.0
#include "steiner/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "json.hpp"
#include "steiner/error.hpp"
#include "steiner/expression.hpp"
#include "steiner/io.hpp"
#include "steiner/rearrange.hpp"
#include "steiner/star.hpp"

#ifndef STEINER_VERSION
#define STEINER_VERSION "0.0.0"
#endif

namespace steiner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Slice-stack CSV: x,j,value in 1D and x1,x2,j,value in 2D, for j = 1..N.
CsvWriter stack_csv(const SliceStack& st, const std::string& value_name) {
  const bool two_d = st.grid()->dim() == 2;
  CsvWriter csv(two_d ? std::vector<std::string>{"x1", "x2", "j", value_name}
                      : std::vector<std::string>{"x", "j", value_name});
  for (int j = 1; j <= st.N(); ++j) {
    for (std::size_t c = 0; c < st.cells(); ++c) {
      const auto& x = st.grid()->cell(c).center;
      if (two_d) csv.row({x[0], x[1], double(j), st(j, c)});
      else csv.row({x[0], double(j), st(j, c)});
    }
  }
  return csv;
}

SliceStack read_gridded_source(const fs::path& path, const GridPtr& grid, int N) {
  const CsvTable t = read_csv(path);
  const int cx = t.column("x1") >= 0 ? t.column("x1") : t.column("x");
  const int cy = grid->dim() == 2 ? (t.column("x2") >= 0 ? t.column("x2") : t.column("y")) : -1;
  const int cj = t.column("j");
  const int cf = t.column("f") >= 0 ? t.column("f") : static_cast<int>(t.header.size()) - 1;
  if (cx < 0 || cj < 0 || (grid->dim() == 2 && cy < 0)) {
    throw InvalidArgument(path.string() + ": gridded f needs columns " +
                          std::string(grid->dim() == 2 ? "x1,x2" : "x") + ",j,f");
  }
  const double dx = grid->dx();
  auto key = [dx](double a, double b) { return std::make_pair(std::llround(2.0 * a / dx), std::llround(2.0 * b / dx)); };
  std::map<std::pair<long long, long long>, std::size_t> lookup;
  for (std::size_t c = 0; c < grid->size(); ++c) {
    const auto& x = grid->cell(c).center;
    lookup[key(x[0], grid->dim() == 2 ? x[1] : 0.0)] = c;
  }
  SliceStack f(grid, N);
  std::vector<char> seen(grid->size() * static_cast<std::size_t>(N), 0);
  for (const auto& row : t.rows) {
    const double jv = row[static_cast<std::size_t>(cj)];
    const int j = static_cast<int>(std::llround(jv));
    if (j < 1 || j > N || jv != j) continue;
    const auto it = lookup.find(key(row[static_cast<std::size_t>(cx)], cy >= 0 ? row[static_cast<std::size_t>(cy)] : 0.0));
    if (it == lookup.end()) continue;
    f.set(j, it->second, row[static_cast<std::size_t>(cf)]);
    seen[static_cast<std::size_t>(j - 1) * grid->size() + it->second] = 1;
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (!seen[k]) {
      throw InvalidArgument(path.string() + ": no value for slice " + std::to_string(k / grid->size() + 1) +
                            ", cell " + std::to_string(k % grid->size()));
    }
  }
  return f;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void save_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

CsvWriter comparison_csv(const ComparisonReport& r) {
  CsvWriter csv({"j", "s", "U", "V", "gap"});
  for (std::size_t j = 0; j < r.U.size(); ++j) {
    for (std::size_t i = 0; i < r.s.size(); ++i) {
      csv.row({double(j + 1), r.s[i], r.U[j][i], r.V[j][i], r.gap[j][i]});
    }
  }
  return csv;
}

CsvWriter profiles_csv(const ComparisonReport& r, int M, Grading grading) {
  CsvWriter csv({"j", "s", "u_star", "v_star"});
  if (!r.u || !r.v) return csv;
  const auto s_grid = make_radial_grid(r.n, r.u->grid()->total_measure(), M, grading);
  for (int j = 1; j <= r.N; ++j) {
    const auto su = r.u->slice(j);
    const auto sv = r.v->slice(j);
    const Profile pu = decreasing_rearrangement(ScalarField(r.u->grid(), {su.begin(), su.end()}), s_grid);
    const Profile pv = decreasing_rearrangement(ScalarField(r.v->grid(), {sv.begin(), sv.end()}), s_grid);
    for (std::size_t i = 0; i < pu.values.size(); ++i) csv.row({double(j), s_grid->s(i), pu.values[i], pv.values[i]});
  }
  return csv;
}

json report_json(const ComparisonReport& r, double slack_C, int M, const std::vector<double>& lq) {
  json j;
  j["pass"] = r.pass;
  j["worst_gap"] = r.worst_gap;
  j["slack_budget"] = r.slack_budget;
  j["budgets"] = {{"C", slack_C}, {"dx", r.dx}, {"ds", r.ds}, {"h", r.h}};
  j["metadata"] = {{"nonlinearity", r.nl_name}, {"n", r.n},  {"N", r.N},
                   {"M", M},                    {"cells", r.u ? r.u->cells() : 0},
                   {"eps", optional_number(r.eps)}, {"tau", optional_number(r.tau)}};
  j["star_gap"] = optional_number(r.star_gap);
  j["star_sweeps"] = r.star_sweeps;
  j["worst_subsolution_slack"] = finite_or_null(r.worst_subsolution_slack);
  j["radial_violation"] = r.radial_violation;
  j["solver"] = {{"energy_u", r.energy_u},       {"energy_v", r.energy_v},
                 {"residual_u", r.residual_u},   {"residual_v", r.residual_v},
                 {"iterations_u", r.iterations_u}, {"iterations_v", r.iterations_v},
                 {"min_u", r.min_u}};
  json lqs = json::array();
  for (double q : lq) {
    const LqResult res = verify_lq_consequence(r, q);
    lqs.push_back({{"q", q}, {"lhs", res.lhs}, {"rhs", res.rhs}, {"slack", res.slack}, {"holds", res.holds}});
  }
  j["lq"] = lqs;
  j["stage_seconds"] = r.stage_seconds;
  return j;
}

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

void merge_seconds(std::map<std::string, double>& into, const std::map<std::string, double>& from) {
  for (const auto& [k, v] : from) into[k] += v;
}

// ---------------------------------------------------------------------------

bool run_solve(const ExperimentConfig& cfg, const fs::path& out, RunManifest& m) {
  PipelineSpec spec = build_pipeline_spec(cfg);
  std::optional<double> eps, tau;
  const Nonlinearity nl = effective_nonlinearity(spec, &eps, &tau);
  const SliceStack f = spec.f_stack ? *spec.f_stack : sample_source(spec.grid, spec.N, spec.f);

  Stopwatch sw;
  DiscreteSolution sol = [&] {
    try {
      return solve_ph(DiscreteProblem(spec.grid, nl, f), spec.solver);
    } catch (const std::exception& e) {
      throw StageError("solve_ph", e.what());
    }
  }();
  bool extrapolated = false;
  if (cfg.richardson && tau && *tau > 0.0) {
    // Linear extrapolation tau -> 0 from the solves at tau and tau/2.
    try {
      const Nonlinearity half = moreau_yosida(spec.base, *eps, *tau / 2).as_nonlinearity();
      const DiscreteSolution sol2 = solve_ph(DiscreteProblem(spec.grid, half, f), spec.solver);
      auto a = sol.u.interior_values();
      const auto b = sol2.u.interior_values();
      for (std::size_t k = 0; k < a.size(); ++k) a[k] = 2.0 * b[k] - a[k];
      extrapolated = true;
    } catch (const std::exception& e) {
      throw StageError("richardson", e.what());
    }
  }
  m.stage_seconds["solve_ph"] = sw.seconds();

  double min_u = std::numeric_limits<double>::infinity();
  for (double v : sol.u.interior_values()) min_u = std::min(min_u, v);
  if (cfg.write_csv) {
    stack_csv(sol.u, "u").save(out / "solution.csv");
    m.artifacts.push_back("solution.csv");
  }
  if (cfg.write_json) {
    json j;
    j["J_h"] = sol.energy;
    j["residual"] = sol.residual_norm;
    j["iterations"] = sol.iterations;
    j["energy_history"] = sol.energy_history;
    j["converged"] = true;
    j["min_u"] = min_u;
    j["nonlinearity"] = nl.name();
    j["eps"] = optional_number(eps);
    j["tau"] = optional_number(tau);
    j["richardson"] = extrapolated;
    j["N"] = spec.N;
    j["h"] = 1.0 / (spec.N + 1);
    j["dx"] = spec.grid->dx();
    j["cells"] = spec.grid->size();
    save_json(out / "energy.json", j);
    m.artifacts.push_back("energy.json");
  }
  return true;
}

bool run_star_check(const ExperimentConfig& cfg, const fs::path& out, std::uint64_t seed, RunManifest& m) {
  PipelineSpec spec = build_pipeline_spec(cfg);
  std::optional<double> eps, tau;
  const Nonlinearity nl = effective_nonlinearity(spec, &eps, &tau);
  const auto s_grid = make_radial_grid(spec.grid->dim(), spec.grid->total_measure(), spec.M, spec.grading);
  const StarOperator op(s_grid, nl);

  Stopwatch sw;
  AccretivityReport acc;
  try {
    acc = t_accretivity_check(op, cfg.accretivity_trials, cfg.accretivity_lambdas, seed);
  } catch (const std::exception& e) {
    throw StageError("accretivity", e.what());
  }
  m.stage_seconds["accretivity"] = sw.seconds();

  Stopwatch sw2;
  const SliceStack f = spec.f_stack ? *spec.f_stack : sample_source(spec.grid, spec.N, spec.f);
  std::vector<std::vector<double>> slack;
  try {
    const DiscreteSolution sol = solve_ph(DiscreteProblem(spec.grid, nl, f), spec.solver);
    const StarData data = build_star_data(sol.u, f, s_grid);
    slack = subsolution_residual(data.U, data.F, op, 1.0 / (spec.N + 1));
  } catch (const std::exception& e) {
    throw StageError("subsolution", e.what());
  }
  m.stage_seconds["subsolution"] = sw2.seconds();

  double worst_slack = std::numeric_limits<double>::infinity();
  CsvWriter csv({"j", "s", "slack"});
  for (std::size_t j = 0; j < slack.size(); ++j) {
    for (std::size_t i = 0; i < slack[j].size(); ++i) {
      csv.row({double(j + 1), s_grid->s(i), slack[j][i]});
      if (i > 0) worst_slack = std::min(worst_slack, slack[j][i]);
    }
  }
  const bool pass = acc.violations == 0;
  if (cfg.write_csv) {
    csv.save(out / "subsolution.csv");
    m.artifacts.push_back("subsolution.csv");
  }
  if (cfg.write_json) {
    json j;
    j["trials"] = acc.trials;
    j["lambdas"] = acc.lambdas;
    j["evaluations"] = acc.evaluations;
    j["violations"] = acc.violations;
    j["worst_margin"] = acc.worst_margin;
    j["threshold"] = -1e-9;
    j["pass"] = pass;
    j["seed"] = seed;
    j["nonlinearity"] = nl.name();
    j["n"] = spec.grid->dim();
    j["M"] = spec.M;
    j["worst_subsolution_slack"] = finite_or_null(worst_slack);
    save_json(out / "accretivity.json", j);
    m.artifacts.push_back("accretivity.json");
  }
  return pass;
}

bool run_compare(const ExperimentConfig& cfg, const fs::path& out, RunManifest& m) {
  const PipelineSpec spec = build_pipeline_spec(cfg);
  const ComparisonReport r = verify_mass_comparison(spec);
  merge_seconds(m.stage_seconds, r.stage_seconds);
  if (cfg.write_csv) {
    comparison_csv(r).save(out / "comparison.csv");
    profiles_csv(r, spec.M, spec.grading).save(out / "profiles.csv");
    m.artifacts.push_back("comparison.csv");
    m.artifacts.push_back("profiles.csv");
  }
  if (cfg.write_json) {
    save_json(out / "report.json", report_json(r, spec.slack_C, spec.M, cfg.lq));
    m.artifacts.push_back("report.json");
  }
  return r.pass;
}

bool run_sweep(const ExperimentConfig& cfg, const RunOptions& opt, const fs::path& out, RunManifest& m) {
  const PipelineSpec spec = build_pipeline_spec(cfg);
  const std::string param = opt.sweep_param.empty() ? "h" : opt.sweep_param;
  SweepReport rep;
  std::vector<double> values = opt.sweep_values;
  if (param == "eps" || param == "tau") {
    if (values.empty()) values = param == "eps" ? cfg.sweep_eps : cfg.sweep_tau;
    for (double v : values) {
      if (!(v >= 0.0) || (param == "eps" && !(v > 0.0))) throw InvalidArgument("sweep values must be positive");
    }
    rep = param == "eps" ? epsilon_tau_sweep(spec, values, {spec.tau}, opt.threads)
                         : epsilon_tau_sweep(spec, {spec.eps}, values, opt.threads);
  } else if (param == "h") {
    std::vector<int> Ns;
    if (values.empty()) {
      Ns = cfg.sweep_N;
    } else {
      for (double v : values) {
        if (!(v > 0.0)) throw InvalidArgument("sweep values must be positive");
        Ns.push_back(v < 1.0 ? static_cast<int>(std::lround(1.0 / v - 1.0)) : static_cast<int>(std::lround(v)));
        if (Ns.back() < 1) throw InvalidArgument("h sweep value maps to N < 1");
      }
    }
    values.assign(Ns.begin(), Ns.end());
    rep = h_refinement_study(spec, Ns, opt.threads);
  } else {
    throw InvalidArgument("sweep --param must be eps, tau or h");
  }

  json points = json::array();
  CsvWriter trend({"index", "value", "eps", "tau", "N", "worst_gap", "slack_budget", "energy_u", "l1_to_next"});
  for (std::size_t k = 0; k < rep.points.size(); ++k) {
    const auto& pt = rep.points[k];
    json p;
    p["index"] = k;
    p["value"] = param == "h" ? double(pt.N) : (param == "eps" ? pt.eps : pt.tau);
    p["eps"] = pt.eps;
    p["tau"] = pt.tau;
    p["N"] = pt.N;
    p["ok"] = pt.ok;
    p["error"] = pt.error;
    const double l1 = k < rep.successive_l1.size() ? rep.successive_l1[k] : std::nan("");
    if (pt.ok) {
      const auto& r = *pt.report;
      merge_seconds(m.stage_seconds, r.stage_seconds);
      p["worst_gap"] = r.worst_gap;
      p["slack_budget"] = r.slack_budget;
      p["pass"] = r.pass;
      p["energy_u"] = r.energy_u;
      const fs::path dir = out / ("point_" + std::to_string(k));
      ensure_dir(dir);
      if (cfg.write_csv) {
        const std::string rel = "point_" + std::to_string(k) + "/comparison.csv";
        comparison_csv(r).save(out / rel);
        m.artifacts.push_back(rel);
        p["artifact"] = rel;
      }
      if (cfg.write_json) {
        const std::string rel = "point_" + std::to_string(k) + "/report.json";
        save_json(out / rel, report_json(r, spec.slack_C, spec.M, cfg.lq));
        m.artifacts.push_back(rel);
      }
      trend.row({double(k), p["value"].get<double>(), pt.eps, pt.tau, double(pt.N), r.worst_gap, r.slack_budget,
                 r.energy_u, l1});
    } else {
      p["worst_gap"] = nullptr;
      p["slack_budget"] = nullptr;
      p["pass"] = false;
      p["energy_u"] = nullptr;
      const double nan = std::nan("");
      trend.row({double(k), p["value"].get<double>(), pt.eps, pt.tau, double(pt.N), nan, nan, nan, l1});
    }
    if (k < rep.h1_norms.size()) p["h1_norm"] = finite_or_null(rep.h1_norms[k]);
    points.push_back(p);
  }
  if (cfg.write_csv) {
    trend.save(out / "sweep.csv");
    m.artifacts.push_back("sweep.csv");
  }
  if (cfg.write_json) {
    json j;
    j["param"] = param;
    j["values"] = values;
    j["points"] = points;
    j["successive_l1"] = json::array();
    for (double v : rep.successive_l1) j["successive_l1"].push_back(finite_or_null(v));
    j["h1_norms"] = json::array();
    for (double v : rep.h1_norms) j["h1_norms"].push_back(finite_or_null(v));
    j["energy_monotone"] = rep.energy_monotone;
    j["l1_decreasing"] = rep.l1_decreasing;
    j["all_pass"] = rep.all_pass;
    save_json(out / "sweep.json", j);
    m.artifacts.push_back("sweep.json");
  }
  return rep.all_pass;
}

}  // namespace

// ---------------------------------------------------------------------------

GridPtr build_grid(const ExperimentConfig& cfg) {
  switch (cfg.omega_kind) {
    case OmegaKind::Interval: return make_interval_grid(cfg.omega_size, cfg.resolution);
    case OmegaKind::Square: return make_square_grid(cfg.omega_size, cfg.resolution);
    case OmegaKind::Disk:
      if (cfg.dim == 1) return make_interval_grid(2.0 * cfg.omega_size, cfg.resolution, -cfg.omega_size);
      return make_disk_grid(cfg.omega_size, cfg.resolution);
  }
  throw InvalidArgument("unknown cross-section kind");
}

Nonlinearity build_nonlinearity(const ExperimentConfig& cfg) {
  switch (cfg.nl.kind) {
    case NlKind::PLaplacian: return make_p_laplacian(cfg.nl.p);
    case NlKind::ShiftedP: return make_shifted_p(cfg.nl.p, cfg.nl.tau);
    case NlKind::Tabulated: return load_tabulated(cfg.nl.path);
  }
  throw InvalidArgument("unknown nonlinearity kind");
}

SliceStack mollify(const SliceStack& f, double delta) {
  if (!(delta > 0.0)) return f;
  const auto& grid = f.grid();
  const std::size_t n = grid->size();
  const double cutoff2 = 9.0 * delta * delta;
  SliceStack out(grid, f.N());
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::pair<std::size_t, double>> w;
    double total = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      const auto& a = grid->cell(c).center;
      const auto& b = grid->cell(d).center;
      const double r2 = (a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]);
      if (r2 > cutoff2) continue;
      const double k = std::exp(-r2 / (delta * delta)) * grid->cell(d).measure;
      w.emplace_back(d, k);
      total += k;
    }
    for (int j = 1; j <= f.N(); ++j) {
      double s = 0.0;
      for (const auto& [d, k] : w) s += k * f(j, d);
      out.set(j, c, s / total);
    }
  }
  return out;
}

PipelineSpec build_pipeline_spec(const ExperimentConfig& cfg) {
  PipelineSpec spec;
  spec.grid = build_grid(cfg);
  spec.base = build_nonlinearity(cfg);
  spec.N = cfg.N;
  spec.M = cfg.M;
  spec.grading = cfg.sqrt_grading ? Grading::Sqrt : Grading::Uniform;
  spec.eps = cfg.eps;
  spec.tau = cfg.tau;
  spec.force_regularization = cfg.force_regularization;
  spec.solver.tol = cfg.tol;
  spec.solver.max_iter = cfg.max_iter;
  spec.solver.radial_tol_dx = cfg.radial_tol_dx;
  spec.slack_C = cfg.slack_C;
  spec.solve_star = cfg.solve_star;
  spec.star_tol = cfg.star_tol;
  if (!cfg.f_csv.empty()) {
    spec.f_stack = mollify(read_gridded_source(cfg.f_csv, spec.grid, cfg.N), cfg.f_mollify);
  } else {
    const Expression e = Expression::parse(cfg.f_expr);
    spec.f = [e](double x1, double x2, double y) { return e(x1, x2, y); };
  }
  return spec;
}

std::string RunManifest::to_json() const {
  json j;
  j["subcommand"] = subcommand;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["version"] = version;
  j["threads"] = threads;
  j["stage_seconds"] = stage_seconds;
  j["artifacts"] = artifacts;
  j["pass"] = pass;
  j["exit_code"] = exit_code;
  j["stage"] = stage.empty() ? json(nullptr) : json(stage);
  j["message"] = message;
  return j.dump(2) + "\n";
}

RunManifest run(const ExperimentConfig& cfg, const RunOptions& options) {
  RunManifest m;
  m.subcommand = options.subcommand;
  m.config_hash = hex64(fnv1a(cfg.canonical()));
  m.seed = options.seed.value_or(cfg.seed);
  m.version = STEINER_VERSION;
  m.threads = std::max(1, options.threads);
  const fs::path out = options.out_dir.value_or(cfg.out_dir);

  Stopwatch total;
  try {
    ensure_dir(out);
    RunOptions opt = options;
    opt.threads = m.threads;
    bool pass = false;
    if (options.subcommand == "solve") pass = run_solve(cfg, out, m);
    else if (options.subcommand == "star-check") pass = run_star_check(cfg, out, m.seed, m);
    else if (options.subcommand == "compare") pass = run_compare(cfg, out, m);
    else if (options.subcommand == "sweep") pass = run_sweep(cfg, opt, out, m);
    else throw InvalidArgument("unknown subcommand '" + options.subcommand + "'");
    m.pass = pass;
    m.exit_code = pass ? kExitOk : kExitCheckFailed;
    m.message = pass ? "ok" : "verification failed";
  } catch (const StageError& e) {
    m.exit_code = kExitStage;
    m.stage = e.stage();
    m.message = e.what();
  } catch (const IoError& e) {
    m.exit_code = kExitIo;
    m.message = e.what();
  } catch (const NumericalError& e) {
    m.exit_code = kExitStage;
    m.stage = options.subcommand;
    m.message = e.what();
  } catch (const InvalidArgument& e) {
    m.exit_code = kExitConfig;
    m.message = e.what();
  } catch (const std::exception& e) {
    m.exit_code = kExitStage;
    m.stage = options.subcommand;
    m.message = e.what();
  }
  m.stage_seconds["total"] = total.seconds();
  try {
    if (fs::is_directory(out)) {
      m.artifacts.push_back("manifest.json");
      write_text(out / "manifest.json", m.to_json());
    }
  } catch (const std::exception& e) {
    if (m.exit_code == kExitOk || m.exit_code == kExitCheckFailed) {
      m.exit_code = kExitIo;
      m.message = e.what();
    }
  }
  return m;
}

}  // namespace steiner
