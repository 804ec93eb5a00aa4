// SPDX-License-Identifier: Apache-2.0
#include "steiner/steiner.h"

#include <cstdio>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "steiner/compare.hpp"
#include "steiner/config.hpp"
#include "steiner/error.hpp"
#include "steiner/io.hpp"
#include "steiner/run.hpp"

struct steiner_config {
  steiner::ExperimentConfig cfg;
  std::string hash;
};

struct steiner_manifest {
  steiner::RunManifest manifest;
  std::string json;
};

struct steiner_nonlinearity {
  steiner::Nonlinearity nl;
  std::optional<steiner::RegularizedNonlinearity> regularized;
};

struct steiner_report {
  steiner::ComparisonReport report;
};

namespace {

thread_local std::string last_error;
thread_local std::vector<steiner::ConfigIssue> last_issues;

steiner_status fail(steiner_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Maps the exception in flight to a status code.
steiner_status translate() {
  try {
    throw;
  } catch (const steiner::ConfigError& e) {
    last_issues = e.issues();
    return fail(STEINER_E_CONFIG, e.what());
  } catch (const steiner::StageError& e) {
    return fail(STEINER_E_STAGE, e.what());
  } catch (const steiner::HypothesisViolation& e) {
    return fail(STEINER_E_HYPOTHESIS, e.what());
  } catch (const steiner::NumericalError& e) {
    return fail(STEINER_E_NUMERICAL, e.what());
  } catch (const steiner::IoError& e) {
    return fail(STEINER_E_IO, e.what());
  } catch (const steiner::InvalidArgument& e) {
    return fail(STEINER_E_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(STEINER_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(STEINER_E_INTERNAL, e.what());
  } catch (...) {
    return fail(STEINER_E_INTERNAL, "unknown error");
  }
}

template <class F>
steiner_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return STEINER_OK;
  } catch (...) {
    return translate();
  }
}

steiner_status make_config(steiner::ExperimentConfig cfg, steiner_config** out) {
  auto* c = new steiner_config{std::move(cfg), {}};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(steiner::fnv1a(c->cfg.canonical())));
  c->hash = buf;
  *out = c;
  return STEINER_OK;
}

steiner_status wrap_nl(steiner::Nonlinearity nl, steiner_nonlinearity** out) {
  *out = new steiner_nonlinearity{std::move(nl), std::nullopt};
  return STEINER_OK;
}

}  // namespace

extern "C" {

const char* steiner_version(void) { return STEINER_VERSION; }

const char* steiner_status_string(steiner_status status) {
  switch (status) {
    case STEINER_OK: return "ok";
    case STEINER_E_INVALID_ARGUMENT: return "invalid argument";
    case STEINER_E_CONFIG: return "invalid configuration";
    case STEINER_E_NUMERICAL: return "numerical failure";
    case STEINER_E_HYPOTHESIS: return "hypothesis violated";
    case STEINER_E_STAGE: return "pipeline stage failed";
    case STEINER_E_IO: return "i/o error";
    case STEINER_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* steiner_last_error(void) { return last_error.c_str(); }

steiner_status steiner_config_parse(const char* text, const char* base_dir, steiner_config** out) {
  if (!text || !out) return fail(STEINER_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  last_issues.clear();
  steiner_status s = guarded([&] {
    make_config(steiner::parse_config(text, base_dir ? base_dir : "."), out);
  });
  return s;
}

steiner_status steiner_config_load(const char* path, steiner_config** out) {
  if (!path || !out) return fail(STEINER_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  last_issues.clear();
  return guarded([&] { make_config(steiner::load_config(path), out); });
}

size_t steiner_config_issue_count(void) { return last_issues.size(); }

steiner_status steiner_config_issue(size_t i, int* line, const char** message) {
  if (i >= last_issues.size()) return fail(STEINER_E_INVALID_ARGUMENT, "issue index out of range");
  if (line) *line = last_issues[i].line;
  if (message) *message = last_issues[i].message.c_str();
  return STEINER_OK;
}

const char* steiner_config_hash(const steiner_config* cfg) { return cfg ? cfg->hash.c_str() : ""; }

void steiner_config_free(steiner_config* cfg) { delete cfg; }

void steiner_run_options_init(steiner_run_options* opts) {
  if (!opts) return;
  *opts = steiner_run_options{};
  opts->subcommand = "compare";
  opts->threads = 1;
}

steiner_status steiner_run(const steiner_config* cfg, const steiner_run_options* opts, steiner_manifest** out) {
  if (!cfg || !opts || !out || !opts->subcommand) return fail(STEINER_E_INVALID_ARGUMENT, "null argument");
  if (opts->sweep_count > 0 && !opts->sweep_values) return fail(STEINER_E_INVALID_ARGUMENT, "null sweep values");
  *out = nullptr;
  return guarded([&] {
    steiner::RunOptions ro;
    ro.subcommand = opts->subcommand;
    if (opts->out_dir) ro.out_dir = opts->out_dir;
    if (opts->has_seed) ro.seed = opts->seed;
    ro.threads = opts->threads;
    if (opts->sweep_param) ro.sweep_param = opts->sweep_param;
    ro.sweep_values.assign(opts->sweep_values, opts->sweep_values + opts->sweep_count);
    auto* m = new steiner_manifest{steiner::run(cfg->cfg, ro), {}};
    m->json = m->manifest.to_json();
    if (m->manifest.exit_code != 0) last_error = m->manifest.message;
    *out = m;
  });
}

int steiner_manifest_exit_code(const steiner_manifest* m) { return m ? m->manifest.exit_code : -1; }
int steiner_manifest_pass(const steiner_manifest* m) { return m && m->manifest.pass ? 1 : 0; }
const char* steiner_manifest_message(const steiner_manifest* m) { return m ? m->manifest.message.c_str() : ""; }
const char* steiner_manifest_json(const steiner_manifest* m) { return m ? m->json.c_str() : ""; }
void steiner_manifest_free(steiner_manifest* m) { delete m; }

steiner_status steiner_nl_p_laplacian(double p, steiner_nonlinearity** out) {
  if (!out) return fail(STEINER_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { wrap_nl(steiner::make_p_laplacian(p), out); });
}

steiner_status steiner_nl_shifted_p(double p, double tau, steiner_nonlinearity** out) {
  if (!out) return fail(STEINER_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { wrap_nl(steiner::make_shifted_p(p, tau), out); });
}

steiner_status steiner_nl_tabulated(const double* t, const double* beta, size_t n, steiner_nonlinearity** out) {
  if (!t || !beta || !out) return fail(STEINER_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { wrap_nl(steiner::make_tabulated({t, n}, {beta, n}), out); });
}

steiner_status steiner_nl_regularize(const steiner_nonlinearity* base, double eps, double tau,
                                     steiner_nonlinearity** out) {
  if (!base || !out) return fail(STEINER_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto reg = steiner::moreau_yosida(base->nl, eps, tau);
    auto* h = new steiner_nonlinearity{reg.as_nonlinearity(), std::nullopt};
    h->regularized.emplace(std::move(reg));
    *out = h;
  });
}

steiner_status steiner_nl_eval(const steiner_nonlinearity* nl, double t, double* beta, double* A, double* B) {
  if (!nl) return fail(STEINER_E_INVALID_ARGUMENT, "null handle");
  if (!(t >= 0.0)) return fail(STEINER_E_INVALID_ARGUMENT, "t must be >= 0");
  return guarded([&] {
    if (beta) *beta = nl->nl.beta(t);
    if (A) *A = nl->nl.A(t);
    if (B) *B = nl->nl.B(t);
  });
}

steiner_status steiner_nl_envelope(const steiner_nonlinearity* nl, double t, double* value, double* point) {
  if (!nl) return fail(STEINER_E_INVALID_ARGUMENT, "null handle");
  if (!nl->regularized) return fail(STEINER_E_INVALID_ARGUMENT, "handle is not a regularized nonlinearity");
  if (!(t >= 0.0)) return fail(STEINER_E_INVALID_ARGUMENT, "t must be >= 0");
  return guarded([&] {
    const auto r = nl->regularized->envelope(t);
    if (value) *value = r.value;
    if (point) *point = r.point;
  });
}

void steiner_nl_free(steiner_nonlinearity* nl) { delete nl; }

steiner_status steiner_compare(const steiner_config* cfg, steiner_report** out) {
  if (!cfg || !out) return fail(STEINER_E_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto report = steiner::verify_mass_comparison(steiner::build_pipeline_spec(cfg->cfg));
    *out = new steiner_report{std::move(report)};
  });
}

int steiner_report_pass(const steiner_report* r) { return r && r->report.pass ? 1 : 0; }
double steiner_report_worst_gap(const steiner_report* r) { return r ? r->report.worst_gap : 0.0; }
double steiner_report_slack_budget(const steiner_report* r) { return r ? r->report.slack_budget : 0.0; }
size_t steiner_report_slices(const steiner_report* r) { return r ? r->report.gap.size() : 0; }
size_t steiner_report_nodes(const steiner_report* r) { return r ? r->report.s.size() : 0; }

steiner_status steiner_report_gap(const steiner_report* r, size_t j, size_t i, double* value) {
  if (!r || !value) return fail(STEINER_E_INVALID_ARGUMENT, "null argument");
  if (j < 1 || j > r->report.gap.size() || i >= r->report.s.size()) {
    return fail(STEINER_E_INVALID_ARGUMENT, "index out of range");
  }
  *value = r->report.gap[j - 1][i];
  return STEINER_OK;
}

void steiner_report_free(steiner_report* r) { delete r; }

}  // extern "C"
