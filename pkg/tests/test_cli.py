import json
import sys
from fractions import Fraction

import pytest

from deweight.cli import main
from deweight.formula import parse

TWO_THIRDS = "p cnf 1 1\n1 0\nc p weight 1 2/3 0\n"
OR_INSTANCE = "p cnf 2 1\n1 2 0\nc p weight 1 2/3 0\nc p weight 2 1/2 0\n"


@pytest.fixture
def cnf(tmp_path):
    def write(text, name="in.cnf"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_reduce_two_thirds(cnf, tmp_path, capsys):
    out_path = tmp_path / "out.cnf"
    code, out, _ = run(capsys, "reduce", cnf(TWO_THIRDS), "-o", out_path)
    assert code == 0
    g = parse(out_path.read_text())
    assert g.num_variables == 2
    assert g.clauses == ((1,), (1, 2))
    assert g.weights == {}
    meta = json.loads((tmp_path / "out.cnf.meta.json").read_text())
    assert meta["c_w"] == "3"
    assert meta["projection_set"] == list(g.sampling_set)
    assert "c_w 3" in out and "total_fresh 1" in out


def test_reduce_uniform_instance(cnf, tmp_path, capsys):
    text = "p cnf 3 2\nc ind 1 2 0\n1 -2 0\n2 3 0\n"
    out_path = tmp_path / "out.cnf"
    assert run(capsys, "reduce", cnf(text), "-o", out_path)[0] == 0
    assert parse(out_path.read_text()) == parse(text)
    assert json.loads((tmp_path / "out.cnf.meta.json").read_text())["c_w"] == "1"


def test_reduce_dyadic(cnf, tmp_path, capsys):
    out_path = tmp_path / "out.cnf"
    code, out, _ = run(capsys, "reduce", cnf(TWO_THIRDS), "-o", out_path, "--mode", "dyadic", "--bits", 2)
    assert code == 0
    meta = json.loads((tmp_path / "out.cnf.meta.json").read_text())
    assert meta["gamma"] == "1/3" and meta["mode"] == "dyadic" and meta["c_w"] == "4"


def test_reduce_budget_unbounded(cnf, tmp_path, capsys):
    out_path = tmp_path / "out.cnf"
    text = "p cnf 1 1\n1 -1 0\nc p weight 1 1/100 0\n"
    assert run(capsys, "reduce", cnf(text), "-o", out_path, "--mode", "budget", "--budget", 2)[0] == 0
    meta = json.loads((tmp_path / "out.cnf.meta.json").read_text())
    assert meta["gamma"] == "unbounded" and meta["mode"] == "budget"


def test_reduce_byte_identical(cnf, tmp_path, capsys):
    src = cnf(OR_INSTANCE)
    a, b = tmp_path / "a.cnf", tmp_path / "b.cnf"
    run(capsys, "reduce", src, "-o", a)
    run(capsys, "reduce", src, "-o", b)
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.cnf.meta.json").read_bytes() == (tmp_path / "b.cnf.meta.json").read_bytes()


def test_reduce_parse_error(cnf, tmp_path, capsys):
    code, _, err = run(capsys, "reduce", cnf("p cnf 1 1\n1 2 0\n"), "-o", tmp_path / "o")
    assert code == 2 and "error" in err


def test_reduce_missing_input(tmp_path, capsys):
    code, _, err = run(capsys, "reduce", tmp_path / "nope.cnf", "-o", tmp_path / "o")
    assert code == 3


def test_reduce_needs_bits(cnf, tmp_path, capsys):
    assert run(capsys, "reduce", cnf(TWO_THIRDS), "-o", tmp_path / "o", "--mode", "dyadic")[0] == 2


def test_approx_weights_four_over_25(cnf, tmp_path, capsys):
    out_path = tmp_path / "adj.cnf"
    text = "p cnf 1 1\n1 -1 0\nc p weight 1 4/25 0\n"
    code, out, _ = run(capsys, "approx-weights", cnf(text), "--budget", 3, "-o", out_path)
    assert code == 0
    assert "c p weight 1 1/6 0" in out_path.read_text()
    assert "4/25" in out and "1/6" in out and "1/150" in out


def test_approx_weights_identity(cnf, tmp_path, capsys):
    out_path = tmp_path / "adj.cnf"
    code, _, _ = run(capsys, "approx-weights", cnf(OR_INSTANCE), "--budget", 8, "-o", out_path)
    assert code == 0
    assert parse(out_path.read_text()) == parse(OR_INSTANCE)


def test_approx_weights_collapse_warns(cnf, tmp_path, capsys):
    out_path = tmp_path / "adj.cnf"
    text = "p cnf 1 1\n1 -1 0\nc p weight 1 1/100 0\n"
    code, out, err = run(capsys, "approx-weights", cnf(text), "--budget", 2, "-o", out_path)
    assert code == 0
    g = parse(out_path.read_text())
    assert g.weights == {} and (-1,) in g.clauses
    assert "warning" in err
    assert "gamma unbounded" in out


def test_count_exact(cnf, capsys):
    code, out, _ = run(capsys, "count", cnf(OR_INSTANCE))
    assert code == 0
    assert "estimate 5/6" in out
    assert "decimal 8.33333333333333e-1" in out
    assert "backend exact" in out


def test_count_unsat(cnf, capsys):
    code, out, _ = run(capsys, "count", cnf("p cnf 1 2\n1 0\n-1 0\nc p weight 1 1/3 0\n"))
    assert code == 0 and "estimate 0" in out


def test_count_external(cnf, tmp_path, capsys):
    script = tmp_path / "fake.py"
    script.write_text("print('s mc 5')\n")
    code, out, _ = run(
        capsys, "count", cnf(OR_INSTANCE), "--backend", "external", "--counter-cmd", f"{sys.executable} {script} {{file}}"
    )
    assert code == 0
    assert "estimate 5/6" in out
    assert "interval [25/54, 3/2]" in out


def test_count_external_env_default(cnf, tmp_path, capsys, monkeypatch):
    script = tmp_path / "fake.py"
    script.write_text("print('Number of solutions is: 5 x 2^0')\n")
    monkeypatch.setenv("DEWEIGHT_COUNTER", f"{sys.executable} {script} {{file}}")
    code, out, _ = run(capsys, "count", cnf(OR_INSTANCE), "--backend", "external", "--counter-pattern", "mult-pow2")
    assert code == 0 and "estimate 5/6" in out


def test_count_external_failure(cnf, tmp_path, capsys):
    script = tmp_path / "fake.py"
    script.write_text("print('nonsense')\n")
    code, _, err = run(
        capsys, "count", cnf(OR_INSTANCE), "--backend", "external", "--counter-cmd", f"{sys.executable} {script} {{file}}"
    )
    assert code == 4 and "nonsense" in err


def test_count_external_needs_command(cnf, capsys, monkeypatch):
    monkeypatch.delenv("DEWEIGHT_COUNTER", raising=False)
    assert run(capsys, "count", cnf(OR_INSTANCE), "--backend", "external")[0] == 2


def test_count_cap_exceeded(cnf, capsys):
    text = "p cnf 30 1\n1 0\n"
    code, _, err = run(capsys, "count", cnf(text))
    assert code == 5 and "external" in err


def test_count_dyadic_mode_reports_combined_tolerance(cnf, capsys):
    code, out, _ = run(capsys, "count", cnf(TWO_THIRDS), "--mode", "dyadic", "--bits", 2)
    assert code == 0
    assert "estimate 3/4" in out
    assert "tolerance 1/3" in out


def test_gamma_66(cnf, capsys):
    text = "p cnf 66 1\n1 0\n" + "".join(f"c p weight {v} 2/3 0\n" for v in range(1, 67))
    code, out, _ = run(capsys, "gamma", cnf(text), "--bits", 2)
    assert code == 0
    lines = dict(l.split(" ", 1) for l in out.splitlines())
    gamma = Fraction(lines["gamma"].split()[0])
    combined = Fraction(lines["combined"].split()[0])
    assert gamma == Fraction(4, 3) ** 66 - 1
    assert combined >= 317 * 10**6


def test_gamma_trivial(cnf, capsys):
    code, out, _ = run(capsys, "gamma", cnf("p cnf 1 1\n1 0\nc p weight 1 1/2 0\n"), "--bits", 1)
    assert code == 0
    assert "gamma 0 " in out and "combined 4/5" in out


def test_gamma_100(cnf, capsys):
    text = "p cnf 100 1\n1 0\n" + "".join(f"c p weight {v} 2/3 0\n" for v in range(1, 101))
    code, out, _ = run(capsys, "gamma", cnf(text), "--bits", 2)
    g = Fraction(out.splitlines()[0].split()[1])
    assert g == Fraction(4, 3) ** 100 - 1


def test_gamma_needs_bits_or_budget(cnf, capsys):
    assert run(capsys, "gamma", cnf(TWO_THIRDS))[0] == 2


def test_selftest_passes(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0
    assert "seed 0" in out and "FAIL" not in out


def test_selftest_seed_sweep(capsys):
    for seed in range(10):
        code, out, _ = run(capsys, "selftest", "--seed", seed)
        assert code == 0, out


def test_selftest_fault_injection(capsys):
    code, out, _ = run(capsys, "selftest", "--inject-fault")
    assert code == 1
    assert "FAIL chain-count" in out
    assert "counterexample (k=" in out


def test_reduce_then_count_coherent(cnf, tmp_path, capsys):
    # counting the reduced file (unweighted, projected) and dividing by c_w
    # gives the weighted answer
    out_path = tmp_path / "r.cnf"
    run(capsys, "reduce", cnf(OR_INSTANCE), "-o", out_path)
    code, out, _ = run(capsys, "count", out_path)
    raw = Fraction(out.splitlines()[0].split()[1])
    c_w = int(json.loads((tmp_path / "r.cnf.meta.json").read_text())["c_w"])
    assert code == 0 and raw / c_w == Fraction(5, 6)
