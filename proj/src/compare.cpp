// SPDX-License-Identifier: Apache-2.0
#include "steiner/compare.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>

#include "steiner/error.hpp"
#include "steiner/rearrange.hpp"
#include "steiner/star.hpp"

namespace steiner {

namespace {

template <class F>
auto stage(const char* name, std::map<std::string, double>& seconds, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      seconds[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
      auto out = body();
      seconds[name] += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return out;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

double min_value(std::span<const double> v) {
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) m = std::min(m, x);
  return v.empty() ? 0.0 : m;
}

// Runs fn(i) for i in [0, count) on up to `threads` workers; results keep index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t count, int threads, F fn) {
  std::vector<T> out(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::size_t next = 0;
  while (next < count) {
    std::vector<std::future<T>> batch;
    for (int t = 0; t < threads && next < count; ++t, ++next) {
      batch.push_back(std::async(std::launch::async, fn, next));
    }
    const std::size_t base = next - batch.size();
    for (std::size_t k = 0; k < batch.size(); ++k) out[base + k] = batch[k].get();
  }
  return out;
}

}  // namespace

Nonlinearity effective_nonlinearity(const PipelineSpec& spec, std::optional<double>* eps_used,
                                    std::optional<double>* tau_used) {
  if (!spec.force_regularization && spec.base.smooth_eps()) {
    if (eps_used) eps_used->reset();
    if (tau_used) tau_used->reset();
    return spec.base;
  }
  if (eps_used) *eps_used = spec.eps;
  if (tau_used) *tau_used = spec.tau;
  return moreau_yosida(spec.base, spec.eps, spec.tau).as_nonlinearity();
}

ComparisonReport verify_mass_comparison(const PipelineSpec& spec) {
  if (!spec.grid) throw StageError("setup", "pipeline needs a cross-section grid");
  if (!spec.f && !spec.f_stack) throw StageError("setup", "pipeline needs data f");
  ComparisonReport rep;
  auto& sec = rep.stage_seconds;
  rep.n = spec.grid->dim();
  rep.N = spec.N;
  rep.h = 1.0 / (spec.N + 1);
  rep.dx = spec.grid->dx();

  const Nonlinearity nl =
      stage("regularize", sec, [&] { return effective_nonlinearity(spec, &rep.eps, &rep.tau); });
  rep.nl_name = nl.name();

  const SliceStack f = stage("data", sec, [&] {
    if (spec.f_stack) {
      if (spec.f_stack->N() != spec.N || spec.f_stack->cells() != spec.grid->size()) {
        throw InvalidArgument("pre-sampled data does not match the grid or N");
      }
      return *spec.f_stack;
    }
    return sample_source(spec.grid, spec.N, spec.f);
  });

  const DiscreteSolution u = stage("solve_ph", sec, [&] {
    return solve_ph(DiscreteProblem(spec.grid, nl, f), spec.solver);
  });
  rep.energy_u = u.energy;
  rep.residual_u = u.residual_norm;
  rep.iterations_u = u.iterations;
  rep.min_u = min_value(u.u.interior_values());

  const GridPtr sym = make_symmetrized_grid(*spec.grid);
  const SliceStack f_star = stage("rearrange", sec, [&] { return steiner_rearrangement(f, sym); });

  const DiscreteSolution v = stage("solve_ph_symmetrized", sec, [&] {
    return solve_ph_symmetrized(DiscreteProblem(sym, nl, f_star), f_star, spec.solver);
  });
  rep.energy_v = v.energy;
  rep.residual_v = v.residual_norm;
  rep.iterations_v = v.iterations;
  rep.radial_violation = v.radial_violation;

  const RadialGridPtr s_grid = stage("s_grid", sec, [&] {
    return make_radial_grid(rep.n, spec.grid->total_measure(), spec.M, spec.grading);
  });
  rep.ds = s_grid->max_spacing();
  rep.s.assign(s_grid->s().begin(), s_grid->s().end());

  const StarData data = stage("star_data", sec, [&] { return build_star_data(u.u, f, s_grid); });
  const auto Vs = stage("star_data", sec, [&] { return mass_functions(v.u, s_grid); });

  rep.worst_gap = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= spec.N; ++j) {
    const auto& Uj = data.U[static_cast<std::size_t>(j)].values;
    const auto& Vj = Vs[static_cast<std::size_t>(j)].values;
    std::vector<double> g(Uj.size());
    for (std::size_t i = 0; i < Uj.size(); ++i) {
      g[i] = Vj[i] - Uj[i];
      rep.worst_gap = std::min(rep.worst_gap, g[i]);
    }
    rep.U.push_back(Uj);
    rep.V.push_back(Vj);
    rep.gap.push_back(std::move(g));
  }
  rep.slack_budget = spec.slack_C * (rep.dx + rep.ds + rep.h);
  rep.pass = rep.worst_gap >= -rep.slack_budget;

  const StarOperator op(s_grid, nl);
  stage("subsolution", sec, [&] {
    const auto slack = subsolution_residual(data.U, data.F, op, rep.h);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& row : slack) {
      for (std::size_t i = 1; i < row.size(); ++i) worst = std::min(worst, row[i]);
    }
    rep.worst_subsolution_slack = worst;
  });

  if (spec.solve_star) {
    stage("star_system", sec, [&] {
      const StarSolution star = solve_star_system(op, data.F, rep.h, spec.star_tol);
      double gap = 0.0;
      for (int j = 1; j <= spec.N; ++j) {
        const auto& a = Vs[static_cast<std::size_t>(j)].values;
        const auto& b = star.V[static_cast<std::size_t>(j)].values;
        for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
      }
      rep.star_gap = gap;
      rep.star_sweeps = star.sweeps;
    });
  }
  rep.u = u.u;
  rep.v = v.u;
  return rep;
}

LqResult verify_lq_consequence(const ComparisonReport& report, double q) {
  if (!(q >= 1.0)) throw InvalidArgument("L^q check needs q >= 1");
  if (!report.u || !report.v) throw InvalidArgument("report carries no solved stacks");
  LqResult out;
  out.q = q;
  double bound = 0.0;
  auto integrate = [&](const SliceStack& st) {
    double total = 0.0;
    for (int j = 1; j <= st.N(); ++j) {
      const auto sl = st.slice(j);
      for (std::size_t c = 0; c < sl.size(); ++c) {
        total += st.h() * st.grid()->cell(c).measure * std::pow(std::abs(sl[c]), q);
        bound = std::max(bound, std::abs(sl[c]));
      }
    }
    return total;
  };
  out.lhs = integrate(*report.u);
  out.rhs = integrate(*report.v);
  // A mass deficit d at every node moves int phi(u) by at most phi'(M) d per
  // slice; both ends of the profile contribute, hence the factor 2.
  const double deficit = std::max(0.0, -report.worst_gap);
  out.slack = 2.0 * q * std::pow(bound, q - 1.0) * deficit + 1e-12 * out.rhs;
  out.holds = out.lhs <= out.rhs + out.slack;
  return out;
}

SweepReport epsilon_tau_sweep(const PipelineSpec& spec, const std::vector<double>& eps_list,
                              const std::vector<double>& tau_list, int threads) {
  SweepReport rep;
  rep.param = "eps,tau";
  struct Job {
    double eps;
    double tau;
  };
  std::vector<Job> jobs;
  for (double tau : tau_list) {
    for (double eps : eps_list) jobs.push_back({eps, tau});
  }
  rep.points = parallel_map<SweepPoint>(jobs.size(), threads, [&](std::size_t k) {
    SweepPoint pt;
    pt.eps = jobs[k].eps;
    pt.tau = jobs[k].tau;
    pt.N = spec.N;
    PipelineSpec s = spec;
    s.eps = pt.eps;
    s.tau = pt.tau;
    s.force_regularization = true;
    try {
      pt.report = verify_mass_comparison(s);
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    return pt;
  });

  for (const auto& pt : rep.points) {
    rep.worst_gaps.push_back(pt.ok ? pt.report->worst_gap : std::numeric_limits<double>::quiet_NaN());
    rep.all_pass = rep.all_pass && pt.ok && pt.report->pass;
  }
  // Per fixed tau, walk the eps list in the order given.
  const std::size_t ne = eps_list.size();
  for (std::size_t t = 0; t < tau_list.size(); ++t) {
    std::vector<double> run_l1;
    for (std::size_t e = 0; e + 1 < ne; ++e) {
      const auto& a = rep.points[t * ne + e];
      const auto& b = rep.points[t * ne + e + 1];
      if (!a.ok || !b.ok) {
        rep.energy_monotone = false;
        rep.l1_decreasing = false;
        continue;
      }
      // Smaller eps means a larger regularized energy density, so the
      // minimum energy cannot drop.
      const double ea = a.report->energy_u;
      const double eb = b.report->energy_u;
      const double tol = 1e-10 * std::max({1.0, std::abs(ea), std::abs(eb)});
      if (a.eps > b.eps && eb < ea - tol) rep.energy_monotone = false;
      if (a.eps < b.eps && ea < eb - tol) rep.energy_monotone = false;
      const double d = l1_distance_y(YInterpolant(*a.report->u), YInterpolant(*b.report->u));
      run_l1.push_back(d);
      rep.successive_l1.push_back(d);
    }
    for (std::size_t k = 1; k < run_l1.size(); ++k) {
      if (!(run_l1[k] < run_l1[k - 1])) rep.l1_decreasing = false;
    }
  }
  return rep;
}

SweepReport h_refinement_study(const PipelineSpec& spec, const std::vector<int>& N_list, int threads) {
  SweepReport rep;
  rep.param = "h";
  for (std::size_t k = 1; k < N_list.size(); ++k) {
    if (N_list[k] <= N_list[k - 1]) throw InvalidArgument("h refinement needs an increasing N list");
  }
  rep.points = parallel_map<SweepPoint>(N_list.size(), threads, [&](std::size_t k) {
    SweepPoint pt;
    pt.N = N_list[k];
    pt.eps = spec.eps;
    pt.tau = spec.tau;
    PipelineSpec s = spec;
    s.N = pt.N;
    s.f_stack.reset();
    try {
      pt.report = verify_mass_comparison(s);
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.error = e.what();
    }
    return pt;
  });
  for (const auto& pt : rep.points) {
    rep.worst_gaps.push_back(pt.ok ? pt.report->worst_gap : std::numeric_limits<double>::quiet_NaN());
    rep.h1_norms.push_back(pt.ok ? h1_norm(*pt.report->u) : std::numeric_limits<double>::quiet_NaN());
    rep.all_pass = rep.all_pass && pt.ok && pt.report->pass;
  }
  for (std::size_t k = 0; k + 1 < rep.points.size(); ++k) {
    const auto& a = rep.points[k];
    const auto& b = rep.points[k + 1];
    if (!a.ok || !b.ok) {
      rep.l1_decreasing = false;
      continue;
    }
    rep.successive_l1.push_back(l1_distance_y(YInterpolant(*a.report->u), YInterpolant(*b.report->u)));
  }
  for (std::size_t k = 1; k < rep.successive_l1.size(); ++k) {
    if (!(rep.successive_l1[k] < rep.successive_l1[k - 1])) rep.l1_decreasing = false;
  }
  rep.energy_monotone = true;
  return rep;
}

}  // namespace steiner
