"""End-to-end checks of the steiner command line tool.

Usage: test_cli.py <steiner executable> <schema dir> <scratch dir>
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema

EXE, SCHEMAS, WORK = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])

SYMMETRIC = """\
[problem]
nl = p_laplacian(3)
omega1.kind = disk
omega1.dim = 1
omega1.size = 0.5
omega1.resolution = 30
slices.N = 5
sgrid.M = 16
f.expr = (1 - 4*x^2) * (1 + y)

[verify]
accretivity.trials = 30
lq = 1, 2, 5
"""

BUMP = """\
[problem]
nl = p_laplacian(2)
omega1.kind = interval
omega1.resolution = 24
slices.N = 3
sgrid.M = 16
f.expr = exp(-30*(x - 0.3)^2)
"""

INVALID = """\
[problem]
nl = p_laplacian(3)
slices.N = 0
bogus = 1
"""

failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(*args):
    return subprocess.run([EXE, *args], capture_output=True, text=True)


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def valid(path, name):
    try:
        jsonschema.validate(json.loads(path.read_text()), schema(name))
        return True
    except (jsonschema.ValidationError, OSError, json.JSONDecodeError) as e:
        print(f"     {path}: {e}")
        return False


shutil.rmtree(WORK, ignore_errors=True)
WORK.mkdir(parents=True)
(WORK / "sym.ini").write_text(SYMMETRIC)
(WORK / "bump.ini").write_text(BUMP)
(WORK / "bad.ini").write_text(INVALID)

r = run("compare", "-c", str(WORK / "bad.ini"), "-o", str(WORK / "bad"))
check(r.returncode == 2, "invalid config exits with 2")
check("line 3" in r.stderr and "line 4" in r.stderr, "invalid config lists every issue with its line")

r = run("compare", "-c", str(WORK / "missing.ini"))
check(r.returncode == 2, "missing config file exits with 2")
r = run("frobnicate")
check(r.returncode == 2, "unknown subcommand exits with 2")

out = WORK / "sym"
r = run("compare", "-c", str(WORK / "sym.ini"), "-o", str(out))
check(r.returncode == 0, "compare on symmetric data exits with 0")
check(valid(out / "report.json", "report"), "report.json matches its schema")
check(valid(out / "manifest.json", "manifest"), "compare manifest.json matches its schema")
rep = json.loads((out / "report.json").read_text())
check(abs(rep["worst_gap"]) <= 1e-9, "symmetric data has zero mass gap")
check([q["q"] for q in rep["lq"]] == [1, 2, 5], "configured L^q exponents are reported")
header = (out / "comparison.csv").read_text().splitlines()[0]
check(header == "j,s,U,V,gap", "comparison.csv header")

r = run("compare", "-c", str(WORK / "sym.ini"), "-o", str(WORK / "sym2"), "--threads", "2")
same = all((out / f).read_bytes() == (WORK / "sym2" / f).read_bytes() for f in ("comparison.csv", "profiles.csv"))
check(r.returncode == 0 and same, "repeated compare runs are byte-identical")

out = WORK / "solve"
r = run("solve", "-c", str(WORK / "bump.ini"), "-o", str(out))
check(r.returncode == 0, "solve exits with 0")
check(valid(out / "energy.json", "energy"), "energy.json matches its schema")
check((out / "solution.csv").read_text().startswith("x,j,u\n"), "one-dimensional solution.csv header")

out = WORK / "star"
r = run("star-check", "-c", str(WORK / "sym.ini"), "-o", str(out), "--seed", "7")
check(r.returncode == 0, "star-check exits with 0")
check(valid(out / "accretivity.json", "accretivity"), "accretivity.json matches its schema")
acc = json.loads((out / "accretivity.json").read_text())
check(acc["seed"] == 7 and acc["violations"] == 0, "seed override is honoured and no violations occur")

out = WORK / "sweep_h"
r = run("sweep", "-c", str(WORK / "bump.ini"), "-o", str(out), "--param", "h", "--values", "3,7,15")
check(r.returncode == 0, "h sweep exits with 0")
check(all((out / f"point_{k}" / "comparison.csv").is_file() for k in range(3)), "h sweep writes three comparison.csv")
check(valid(out / "sweep.json", "sweep"), "sweep.json matches its schema")
check(all(valid(out / f"point_{k}" / "report.json", "report") for k in range(3)), "sweep point reports match")
sw = json.loads((out / "sweep.json").read_text())
check([p["N"] for p in sw["points"]] == [3, 7, 15], "h sweep visits N = 3, 7, 15")
check(len(sw["successive_l1"]) == 2 and sw["l1_decreasing"], "successive L1 differences decrease")

out = WORK / "sweep_eps"
r = run("sweep", "-c", str(WORK / "sym.ini"), "-o", str(out), "--param", "eps", "--values", "0.1,0.01")
check(r.returncode == 0, "eps sweep exits with 0")
check(valid(out / "sweep.json", "sweep"), "eps sweep.json matches its schema")

r = run("sweep", "-c", str(WORK / "bump.ini"), "-o", str(WORK / "bad_sweep"), "--param", "h", "--values", "7,3")
check(r.returncode != 0, "decreasing N list is rejected")
check(valid(WORK / "bad_sweep" / "manifest.json", "manifest"), "failed runs still write a valid manifest")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
