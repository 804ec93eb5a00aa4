#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "steiner/config.hpp"
#include "steiner/expression.hpp"
#include "steiner/io.hpp"
#include "steiner/run.hpp"

using namespace steiner;
namespace fs = std::filesystem;

namespace {

std::vector<ConfigIssue> issues_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool has_issue(const std::vector<ConfigIssue>& issues, int line, const std::string& needle) {
  for (const auto& i : issues) {
    if (i.line == line && i.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

const char* kSmall = R"(# small interval problem
[problem]
nl = p_laplacian(3)
omega1.kind = interval
omega1.resolution = 24
slices.N = 3
sgrid.M = 16
f.expr = exp(-30*(x-0.3)^2) * (1 + y)

[solver]
tol = 1e-9

[verify]
accretivity.trials = 20
)";

}  // namespace

TEST_CASE("minimal and full configs") {
  const auto c = parse_config("[problem]\nnl = p_laplacian(2)\n");
  CHECK(c.nl.kind == NlKind::PLaplacian);
  CHECK(c.nl.p == 2.0);
  CHECK(c.N == 7);
  CHECK(c.dim == 1);

  const auto s = parse_config(kSmall);
  CHECK(s.nl.p == 3.0);
  CHECK(s.resolution == 24);
  CHECK(s.N == 3);
  CHECK(s.M == 16);
  CHECK(s.accretivity_trials == 20);

  const auto d = parse_config(
      "[problem]\nnl = shifted_p(2.5, 0.1)\nomega1.kind = disk\nomega1.size = 0.6\nsgrid.grading = sqrt\n"
      "[verify]\nsweep.eps = 0.1, 0.01\nlq = 1, 2, 5\n[output]\nformats = json\n");
  CHECK(d.nl.kind == NlKind::ShiftedP);
  CHECK(d.nl.tau == 0.1);
  CHECK(d.omega_kind == OmegaKind::Disk);
  CHECK(d.dim == 2);
  CHECK(d.sqrt_grading);
  CHECK(d.sweep_eps == std::vector<double>{0.1, 0.01});
  CHECK(d.lq.size() == 3);
  CHECK_FALSE(d.write_csv);
  CHECK(d.write_json);

  // Canonical text ignores comments, spacing and the seed.
  const auto a = parse_config("[problem]\n# c\nnl   =  p_laplacian(3)\n[verify]\nseed = 1\n");
  const auto b = parse_config("[problem]\nnl = p_laplacian(3)\n[verify]\nseed = 2\n");
  CHECK(a.canonical() == b.canonical());
  CHECK(a.canonical() != c.canonical());
}

TEST_CASE("config errors carry line numbers") {
  auto is = issues_of("[problem]\nnl = p_laplacian(2)\nslices.N = 0\n");
  REQUIRE(is.size() == 1);
  CHECK(is[0].line == 3);
  CHECK(is[0].message.find("slices.N") != std::string::npos);

  is = issues_of("[problem]\nslices.N = 3\nnl = p_laplacian(2)\nslices.N = 5\n");
  CHECK(has_issue(is, 4, "lines 2 and 4"));

  is = issues_of(
      "tol = 1\n[problem]\nnl = p_laplacian(0.5)\nbogus = 3\ntol = 1e-8\n[nowhere]\nfoo\n[solver]\nmax_iter = ten\n");
  CHECK(has_issue(is, 1, "before any section"));
  CHECK(has_issue(is, 3, "p must be > 1"));
  CHECK(has_issue(is, 4, "unknown key 'bogus'"));
  CHECK(has_issue(is, 5, "belongs in [solver]"));
  CHECK(has_issue(is, 6, "unknown section"));
  CHECK(has_issue(is, 9, "max_iter"));
  CHECK(is.size() >= 6);

  is = issues_of("[problem]\nomega1.kind = square\nomega1.dim = 1\nf.expr = 1\nf.csv = missing.csv\n");
  CHECK(has_issue(is, 3, "requires omega1.dim = 2"));
  CHECK(has_issue(is, 5, "f.expr"));
  CHECK(has_issue(is, 5, "file not found"));

  is = issues_of("[problem]\nnl = shifted_p(3, 0)\nslices.N =\n[output]\nformats = none\n");
  CHECK(has_issue(is, 2, "tau > 0"));
  CHECK(has_issue(is, 3, "missing value"));
  CHECK_THROWS_AS(load_config("/nonexistent/steiner.ini"), Error);
}

TEST_CASE("expressions") {
  using std::numbers::pi;
  CHECK(Expression::parse("1 + 2 * 3")(0, 0, 0) == 7.0);
  CHECK(Expression::parse("2^3^2")(0, 0, 0) == 512.0);
  CHECK(Expression::parse("-2^2")(0, 0, 0) == -4.0);
  CHECK(Expression::parse("x + 10*x2 + 100*y")(1, 2, 3) == 321.0);
  CHECK(Expression::parse("x1")(4, 0, 0) == 4.0);
  CHECK(Expression::parse("r")(3, 4, 0) == 5.0);
  CHECK(Expression::parse("sin(pi/2) + cos(0) + exp(0) + log(e)")(0, 0, 0) == doctest::Approx(4.0));
  CHECK(Expression::parse("max(1, x) - min(x, 0)")(5, 0, 0) == 5.0);
  CHECK_THROWS_AS(Expression::parse("max(1, 2, 3)"), InvalidArgument);
  CHECK(Expression::parse("step(x - 0.5)")(0.7, 0, 0) == 1.0);
  CHECK(Expression::parse("step(x - 0.5)")(0.3, 0, 0) == 0.0);
  CHECK(Expression::parse("sqrt(abs(-16)) * tanh(0) + floor(2.7)")(0, 0, 0) == 2.0);
  CHECK(Expression::parse("2*pi*y")(0, 0, 0.5) == doctest::Approx(pi));
  CHECK(Expression::parse("1e-3 * 2E2")(0, 0, 0) == doctest::Approx(0.2));
  for (const char* bad : {"", "1 +", "(1", "foo(1)", "z", "1 2", "sin 1", "max()"}) {
    CHECK_THROWS_AS(Expression::parse(bad), InvalidArgument);
  }
  try {
    Expression::parse("1 + * 2");
    FAIL("accepted");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("column") != std::string::npos);
  }
}

TEST_CASE("csv and number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_double(third)) == third);

  CsvWriter w({"a", "b"});
  w.row({1.0, 0.25});
  w.row(std::vector<double>{-3.0, 1e20});
  CHECK(w.text() == "a,b\n1,0.25\n-3,1e+20\n");
  CHECK_THROWS_AS(w.row({1.0}), InvalidArgument);

  const auto dir = fresh_dir("steiner_io_test");
  fs::create_directories(dir);
  w.save(dir / "t.csv");
  const auto t = read_csv(dir / "t.csv");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK(t.column("b") == 1);
  CHECK(t.column("zz") == -1);
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[1][1] == 1e20);
  CHECK_THROWS_AS(read_csv(dir / "none.csv"), IoError);
  CHECK_THROWS_AS(write_text(dir / "no" / "such" / "x.txt", "x"), IoError);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  fs::remove_all(dir);
}

TEST_CASE("runs are deterministic and write a manifest") {
  const auto cfg = parse_config(kSmall);
  const auto d1 = fresh_dir("steiner_run_a");
  const auto d2 = fresh_dir("steiner_run_b");
  RunOptions o;
  o.subcommand = "compare";
  o.out_dir = d1;
  const auto m1 = run(cfg, o);
  o.out_dir = d2;
  o.threads = 2;
  const auto m2 = run(cfg, o);
  CHECK(m1.exit_code == kExitOk);
  CHECK(m1.pass);
  CHECK(m1.config_hash == m2.config_hash);
  CHECK(m1.config_hash.size() == 16);
  for (const char* f : {"comparison.csv", "profiles.csv"}) {
    REQUIRE(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  CHECK(fs::exists(d1 / "report.json"));
  CHECK(fs::exists(d1 / "manifest.json"));
  CHECK(slurp(d1 / "manifest.json").find("\"config_hash\"") != std::string::npos);

  o.subcommand = "star-check";
  o.out_dir = d1;
  const auto sc = run(cfg, o);
  CHECK(sc.exit_code == kExitOk);
  CHECK(fs::exists(d1 / "accretivity.json"));

  o.subcommand = "solve";
  CHECK(run(cfg, o).exit_code == kExitOk);
  CHECK(fs::exists(d1 / "solution.csv"));
  CHECK(fs::exists(d1 / "energy.json"));

  o.subcommand = "nonsense";
  CHECK(run(cfg, o).exit_code == kExitConfig);

  // An output path that is a regular file cannot hold artifacts.
  std::ofstream(d1 / "blocker") << "x";
  o.subcommand = "compare";
  o.out_dir = d1 / "blocker";
  CHECK(run(cfg, o).exit_code == kExitIo);
  fs::remove_all(d1);
  fs::remove_all(d2);
}
