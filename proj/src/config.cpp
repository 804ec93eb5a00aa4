// SPDX-License-Identifier: Apache-2.0
#include "steiner/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "steiner/expression.hpp"
#include "steiner/io.hpp"

namespace steiner {

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string out = "invalid configuration:";
  for (const auto& i : issues) {
    out += "\n  ";
    if (i.line > 0) out += "line " + std::to_string(i.line) + ": ";
    out += i.message;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

std::optional<long long> to_int(const std::string& s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  return std::nullopt;
}

std::vector<std::string> split_list(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// A handler returns an error message, or an empty string on success.
using Handler = std::function<std::string(ExperimentConfig&, const std::string&)>;

Handler real(double ExperimentConfig::*field, double lo, double hi, bool lo_open = false) {
  return [=](ExperimentConfig& c, const std::string& v) -> std::string {
    const auto d = to_double(v);
    if (!d) return "expected a number, got '" + v + "'";
    if (!(lo_open ? *d > lo : *d >= lo) || !(*d <= hi)) {
      return "value " + v + " out of range " + (lo_open ? "(" : "[") + format_double(lo) + ", " +
             format_double(hi) + "]";
    }
    c.*field = *d;
    return {};
  };
}

Handler integer(int ExperimentConfig::*field, long long lo, long long hi) {
  return [=](ExperimentConfig& c, const std::string& v) -> std::string {
    const auto d = to_int(v);
    if (!d) return "expected an integer, got '" + v + "'";
    if (*d < lo || *d > hi) {
      return "value " + v + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    }
    c.*field = static_cast<int>(*d);
    return {};
  };
}

Handler boolean(bool ExperimentConfig::*field) {
  return [=](ExperimentConfig& c, const std::string& v) -> std::string {
    const auto b = to_bool(v);
    if (!b) return "expected true or false, got '" + v + "'";
    c.*field = *b;
    return {};
  };
}

Handler real_list(std::vector<double> ExperimentConfig::*field, double lo, bool lo_open) {
  return [=](ExperimentConfig& c, const std::string& v) -> std::string {
    std::vector<double> out;
    for (const auto& item : split_list(v)) {
      const auto d = to_double(item);
      if (!d) return "expected a list of numbers, got '" + item + "'";
      if (lo_open ? !(*d > lo) : !(*d >= lo)) return "list entry " + item + " must be " + (lo_open ? "> " : ">= ") + format_double(lo);
      out.push_back(*d);
    }
    if (out.empty()) return "list must not be empty";
    c.*field = std::move(out);
    return {};
  };
}

// Parses `name(arg, ...)`.
bool parse_call(const std::string& s, std::string& name, std::vector<std::string>& args) {
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') {
    name = trim(s);
    args.clear();
    return open == std::string::npos;
  }
  name = trim(s.substr(0, open));
  args = split_list(s.substr(open + 1, s.size() - open - 2));
  return true;
}

std::string parse_nl(NlConfig& nl, const std::string& v) {
  std::string name;
  std::vector<std::string> args;
  if (!parse_call(v, name, args)) return "malformed nonlinearity '" + v + "'";
  auto num = [&](std::size_t i, double& out) -> bool {
    const auto d = to_double(args[i]);
    if (!d) return false;
    out = *d;
    return true;
  };
  if (name == "p_laplacian") {
    if (args.size() != 1 || !num(0, nl.p)) return "p_laplacian expects one numeric argument p";
    nl.kind = NlKind::PLaplacian;
  } else if (name == "shifted_p") {
    if (args.size() != 2 || !num(0, nl.p) || !num(1, nl.tau)) return "shifted_p expects (p, tau)";
    nl.kind = NlKind::ShiftedP;
  } else if (name == "tabulated") {
    if (args.size() != 1 || args[0].empty()) return "tabulated expects a file path";
    nl.kind = NlKind::Tabulated;
    nl.path = unquote(args[0]);
  } else {
    return "unknown nonlinearity '" + name + "' (expected p_laplacian, shifted_p or tabulated)";
  }
  return {};
}

struct KeySpec {
  std::string section;
  Handler handler;
};

const std::map<std::string, KeySpec>& key_table() {
  using C = ExperimentConfig;
  static const std::map<std::string, KeySpec> table = {
      {"nl", {"problem", [](C& c, const std::string& v) { return parse_nl(c.nl, v); }}},
      {"nl.kind", {"problem", [](C& c, const std::string& v) -> std::string {
         if (v == "p_laplacian") c.nl.kind = NlKind::PLaplacian;
         else if (v == "shifted_p") c.nl.kind = NlKind::ShiftedP;
         else if (v == "tabulated") c.nl.kind = NlKind::Tabulated;
         else return "unknown nonlinearity '" + v + "'";
         return {};
       }}},
      {"nl.p", {"problem", [](C& c, const std::string& v) -> std::string {
         const auto d = to_double(v);
         if (!d) return "expected a number, got '" + v + "'";
         if (!(*d > 1.0) || !(*d <= 100.0)) return "p must lie in (1, 100]";
         c.nl.p = *d;
         return {};
       }}},
      {"nl.tau", {"problem", [](C& c, const std::string& v) -> std::string {
         const auto d = to_double(v);
         if (!d) return "expected a number, got '" + v + "'";
         if (!(*d >= 0.0)) return "nl.tau must be >= 0";
         c.nl.tau = *d;
         return {};
       }}},
      {"nl.path", {"problem", [](C& c, const std::string& v) -> std::string {
         c.nl.path = unquote(v);
         return {};
       }}},
      {"omega1.kind", {"problem", [](C& c, const std::string& v) -> std::string {
         if (v == "interval") c.omega_kind = OmegaKind::Interval;
         else if (v == "square") c.omega_kind = OmegaKind::Square;
         else if (v == "disk") c.omega_kind = OmegaKind::Disk;
         else return "omega1.kind must be interval, square or disk";
         return {};
       }}},
      {"omega1.dim", {"problem", integer(&C::dim, 1, 2)}},
      {"omega1.size", {"problem", real(&C::omega_size, 0.0, 1e6, true)}},
      {"omega1.resolution", {"problem", integer(&C::resolution, 4, 4096)}},
      {"slices.N", {"problem", integer(&C::N, 1, 4096)}},
      {"sgrid.M", {"problem", integer(&C::M, 2, 1 << 20)}},
      {"sgrid.grading", {"problem", [](C& c, const std::string& v) -> std::string {
         if (v == "uniform") c.sqrt_grading = false;
         else if (v == "sqrt") c.sqrt_grading = true;
         else return "sgrid.grading must be uniform or sqrt";
         return {};
       }}},
      {"f.expr", {"problem", [](C& c, const std::string& v) -> std::string {
         try {
           Expression::parse(unquote(v));
         } catch (const std::exception& e) {
           return e.what();
         }
         c.f_expr = unquote(v);
         return {};
       }}},
      {"f.csv", {"problem", [](C& c, const std::string& v) -> std::string {
         c.f_csv = unquote(v);
         return {};
       }}},
      {"f.mollify", {"problem", real(&C::f_mollify, 0.0, 1e6)}},
      {"tol", {"solver", real(&C::tol, 0.0, 1.0, true)}},
      {"max_iter", {"solver", integer(&C::max_iter, 1, 100000)}},
      {"regularization.eps", {"solver", real(&C::eps, 0.0, 1e6, true)}},
      {"regularization.tau", {"solver", real(&C::tau, 0.0, 1e6)}},
      {"regularization.force", {"solver", boolean(&C::force_regularization)}},
      {"regularization.richardson", {"solver", boolean(&C::richardson)}},
      {"star.tol", {"solver", real(&C::star_tol, 0.0, 1.0, true)}},
      {"star.solve", {"solver", boolean(&C::solve_star)}},
      {"radial_tol_dx", {"solver", real(&C::radial_tol_dx, 0.0, 1e6)}},
      {"slack_C", {"verify", real(&C::slack_C, 0.0, 1e12)}},
      {"seed", {"verify", [](C& c, const std::string& v) -> std::string {
         std::uint64_t s = 0;
         auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
         if (ec != std::errc() || ptr != v.data() + v.size()) return "seed must be a nonnegative integer";
         c.seed = s;
         return {};
       }}},
      {"accretivity.trials", {"verify", integer(&C::accretivity_trials, 1, 100000000)}},
      {"accretivity.lambdas", {"verify", real_list(&C::accretivity_lambdas, 0.0, true)}},
      {"lq", {"verify", real_list(&C::lq, 1.0, false)}},
      {"sweep.eps", {"verify", real_list(&C::sweep_eps, 0.0, true)}},
      {"sweep.tau", {"verify", real_list(&C::sweep_tau, 0.0, false)}},
      {"sweep.N", {"verify", [](C& c, const std::string& v) -> std::string {
         std::vector<int> out;
         for (const auto& item : split_list(v)) {
           const auto d = to_int(item);
           if (!d) return "expected a list of integers, got '" + item + "'";
           if (*d < 1 || *d > 4096) return "sweep.N entries must lie in [1, 4096]";
           out.push_back(static_cast<int>(*d));
         }
         if (out.empty()) return "list must not be empty";
         c.sweep_N = std::move(out);
         return {};
       }}},
      {"dir", {"output", [](C& c, const std::string& v) -> std::string {
         if (v.empty()) return "output dir must not be empty";
         c.out_dir = unquote(v);
         return {};
       }}},
      {"formats", {"output", [](C& c, const std::string& v) -> std::string {
         c.write_csv = c.write_json = false;
         for (const auto& item : split_list(v)) {
           if (item == "csv") c.write_csv = true;
           else if (item == "json") c.write_json = true;
           else return "unknown output format '" + item + "' (expected csv, json)";
         }
         return {};
       }}},
  };
  return table;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : InvalidArgument(join_issues(issues)), issues_(std::move(issues)) {}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::vector<ConfigIssue> issues;
  std::map<std::string, int> seen;  // "section.key" -> line
  std::map<std::string, int> key_line;
  std::string section;
  const auto& table = key_table();

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        issues.push_back({line_no, "malformed section header '" + line + "'"});
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "solver" && section != "verify" && section != "output") {
        issues.push_back({line_no, "unknown section [" + section + "]"});
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line_no, "expected 'key = value', got '" + line + "'"});
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) {
      issues.push_back({line_no, "key '" + key + "' appears before any section"});
      continue;
    }
    if (key.rfind(section + ".", 0) == 0 && !table.count(key)) key = key.substr(section.size() + 1);
    const auto it = table.find(key);
    if (it == table.end() || it->second.section != section) {
      std::string msg = "unknown key '" + key + "' in [" + section + "]";
      if (it != table.end()) msg += " (belongs in [" + it->second.section + "])";
      issues.push_back({line_no, msg});
      continue;
    }
    const std::string full = section + "." + key;
    if (const auto prev = seen.find(full); prev != seen.end()) {
      issues.push_back({line_no, "duplicate key '" + key + "' (lines " + std::to_string(prev->second) +
                                     " and " + std::to_string(line_no) + ")"});
      continue;
    }
    seen[full] = line_no;
    key_line[key] = line_no;
    if (value.empty()) {
      issues.push_back({line_no, "missing value for '" + key + "'"});
      continue;
    }
    if (auto err = it->second.handler(cfg, value); !err.empty()) {
      issues.push_back({line_no, key + ": " + err});
    }
  }

  auto line_of = [&](const std::string& key) {
    const auto it = key_line.find(key);
    return it == key_line.end() ? 0 : it->second;
  };

  // Cross-field checks.
  if (!key_line.count("omega1.dim")) cfg.dim = cfg.omega_kind == OmegaKind::Interval ? 1 : 2;
  if (cfg.omega_kind == OmegaKind::Interval && cfg.dim != 1) {
    issues.push_back({line_of("omega1.dim"), "omega1.kind = interval requires omega1.dim = 1"});
  }
  if (cfg.omega_kind == OmegaKind::Square && cfg.dim != 2) {
    issues.push_back({line_of("omega1.dim"), "omega1.kind = square requires omega1.dim = 2"});
  }
  if (cfg.omega_kind == OmegaKind::Disk && cfg.dim == 2 && cfg.resolution < 8) {
    issues.push_back({line_of("omega1.resolution"), "a disk needs omega1.resolution >= 8"});
  }
  const int nl_line = std::max(line_of("nl"), std::max(line_of("nl.kind"), line_of("nl.p")));
  if (!(cfg.nl.p > 1.0)) issues.push_back({nl_line, "nonlinearity exponent p must be > 1"});
  if (cfg.nl.kind == NlKind::ShiftedP && !(cfg.nl.tau > 0.0)) {
    issues.push_back({nl_line, "shifted_p needs tau > 0"});
  }
  if (cfg.nl.kind == NlKind::Tabulated) {
    const int l = std::max(line_of("nl"), line_of("nl.path"));
    if (cfg.nl.path.empty()) {
      issues.push_back({l, "tabulated nonlinearity needs a file path"});
    } else {
      if (cfg.nl.path.is_relative()) cfg.nl.path = base_dir / cfg.nl.path;
      if (!std::filesystem::exists(cfg.nl.path)) {
        issues.push_back({l, "file not found: " + cfg.nl.path.string()});
      }
    }
  }
  if (key_line.count("f.csv") && key_line.count("f.expr")) {
    issues.push_back({line_of("f.csv"), "f.expr (line " + std::to_string(line_of("f.expr")) +
                                            ") and f.csv are mutually exclusive"});
  }
  if (!cfg.f_csv.empty()) {
    if (cfg.f_csv.is_relative()) cfg.f_csv = base_dir / cfg.f_csv;
    if (!std::filesystem::exists(cfg.f_csv)) {
      issues.push_back({line_of("f.csv"), "file not found: " + cfg.f_csv.string()});
    }
  }
  if (!cfg.write_csv && !cfg.write_json) {
    issues.push_back({line_of("formats"), "at least one output format is required"});
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({{0, "cannot open config file " + path.string()}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  auto list = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, int>) s += std::to_string(v[i]);
      else s += format_double(v[i]);
    }
    return s;
  };
  const char* kinds[] = {"p_laplacian", "shifted_p", "tabulated"};
  const char* omegas[] = {"interval", "square", "disk"};
  o << "nl.kind=" << kinds[static_cast<int>(nl.kind)] << "\n"
    << "nl.p=" << format_double(nl.p) << "\n"
    << "nl.tau=" << format_double(nl.tau) << "\n"
    << "nl.path=" << nl.path.generic_string() << "\n"
    << "omega1.kind=" << omegas[static_cast<int>(omega_kind)] << "\n"
    << "omega1.dim=" << dim << "\n"
    << "omega1.size=" << format_double(omega_size) << "\n"
    << "omega1.resolution=" << resolution << "\n"
    << "slices.N=" << N << "\n"
    << "sgrid.M=" << M << "\n"
    << "sgrid.grading=" << (sqrt_grading ? "sqrt" : "uniform") << "\n"
    << "f.expr=" << (f_csv.empty() ? f_expr : "") << "\n"
    << "f.csv=" << f_csv.generic_string() << "\n"
    << "f.mollify=" << format_double(f_mollify) << "\n"
    << "tol=" << format_double(tol) << "\n"
    << "max_iter=" << max_iter << "\n"
    << "regularization.eps=" << format_double(eps) << "\n"
    << "regularization.tau=" << format_double(tau) << "\n"
    << "regularization.force=" << force_regularization << "\n"
    << "regularization.richardson=" << richardson << "\n"
    << "star.tol=" << format_double(star_tol) << "\n"
    << "star.solve=" << solve_star << "\n"
    << "radial_tol_dx=" << format_double(radial_tol_dx) << "\n"
    << "slack_C=" << format_double(slack_C) << "\n"
    << "accretivity.trials=" << accretivity_trials << "\n"
    << "accretivity.lambdas=" << list(accretivity_lambdas) << "\n"
    << "lq=" << list(lq) << "\n"
    << "sweep.eps=" << list(sweep_eps) << "\n"
    << "sweep.tau=" << list(sweep_tau) << "\n"
    << "sweep.N=" << list(sweep_N) << "\n";
  return o.str();
}

}  // namespace steiner
