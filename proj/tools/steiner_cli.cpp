// SPDX-License-Identifier: Apache-2.0
// Command-line front end; talks to the library only through the C interface.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "steiner/steiner.h"

namespace {

struct Args {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string param = "h";
  std::vector<double> values;
};

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("--config,-c", a.config, "experiment config file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out,-o", a.out, "output directory (overrides [output] dir)");
  sub->add_option("--seed", a.seed, "random seed (overrides [verify] seed)");
  sub->add_option("--threads", a.threads, "worker threads for independent sweep points")
      ->check(CLI::Range(1, 256));
}

int report_config_errors() {
  std::fprintf(stderr, "error: invalid configuration\n");
  const size_t n = steiner_config_issue_count();
  if (n == 0) std::fprintf(stderr, "  %s\n", steiner_last_error());
  for (size_t i = 0; i < n; ++i) {
    int line = 0;
    const char* msg = "";
    steiner_config_issue(i, &line, &msg);
    if (line > 0) std::fprintf(stderr, "  line %d: %s\n", line, msg);
    else std::fprintf(stderr, "  %s\n", msg);
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mass comparison experiments for anisotropic elliptic problems"};
  app.set_version_flag("--version", std::string(steiner_version()));
  app.require_subcommand(1);

  Args a;
  auto* solve = app.add_subcommand("solve", "solve the y-discretized problem; writes solution.csv, energy.json");
  auto* star = app.add_subcommand("star-check", "T-accretivity trials and subsolution slack; writes accretivity.json, subsolution.csv");
  auto* compare = app.add_subcommand("compare", "mass comparison of u and its symmetrized counterpart; writes comparison.csv, report.json");
  auto* sweep = app.add_subcommand("sweep", "repeat compare over eps, tau or N; writes sweep.json");
  for (auto* sub : {solve, star, compare, sweep}) add_common(sub, a);
  sweep->add_option("--param", a.param, "swept parameter")->check(CLI::IsMember({"eps", "tau", "h"}));
  sweep->add_option("--values", a.values, "values (N counts or h for --param h)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  const bool seed_given = app.get_subcommands().front()->count("--seed") > 0;

  steiner_config* cfg = nullptr;
  if (steiner_config_load(a.config.c_str(), &cfg) != STEINER_OK) return report_config_errors();

  steiner_run_options opts;
  steiner_run_options_init(&opts);
  opts.subcommand = subcommand.c_str();
  opts.out_dir = a.out.empty() ? nullptr : a.out.c_str();
  opts.has_seed = seed_given ? 1 : 0;
  opts.seed = a.seed;
  opts.threads = a.threads;
  if (subcommand == "sweep") {
    opts.sweep_param = a.param.c_str();
    opts.sweep_values = a.values.data();
    opts.sweep_count = a.values.size();
  }

  steiner_manifest* m = nullptr;
  const steiner_status st = steiner_run(cfg, &opts, &m);
  steiner_config_free(cfg);
  if (st != STEINER_OK) {
    std::fprintf(stderr, "error: %s: %s\n", steiner_status_string(st), steiner_last_error());
    return 3;
  }
  const int rc = steiner_manifest_exit_code(m);
  if (rc == 0) std::printf("%s: pass\n", subcommand.c_str());
  else if (rc == 1) std::printf("%s: FAIL (%s)\n", subcommand.c_str(), steiner_manifest_message(m));
  else std::fprintf(stderr, "error: %s\n", steiner_manifest_message(m));
  steiner_manifest_free(m);
  return rc;
}
