import csv
import json

import pytest

from pinner.cli import main


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def zeros(tmp_path):
    def make(points):
        return _write(tmp_path / "zeros.json", {"zeros": [{"re": w.real, "im": w.imag} for w in map(complex, points)]})

    return make


def test_inner_single_zero(tmp_path, zeros):
    out = tmp_path / "inner.json"
    assert main(["inner", "--zeros", zeros([0.5]), "--p", "2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["norm"] == pytest.approx(2.0, abs=1e-9)


def test_inner_methods_agree(tmp_path, zeros):
    norms = []
    for method in ("closed", "newton", "project"):
        out = tmp_path / f"{method}.json"
        assert main(["inner", "--zeros", zeros([0.6]), "--p", "3", "--method", method, "--out", str(out)]) == 0
        norms.append(json.loads(out.read_text())["norm"])
    assert max(norms) - min(norms) < 1e-8


def test_inner_bad_inputs(tmp_path, zeros):
    assert main(["inner", "--zeros", zeros([])]) == 2
    assert main(["inner", "--zeros", zeros([0])]) == 2
    assert main(["inner", "--zeros", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["inner", "--zeros", zeros([0.5]), "--p", "1"])
    assert info.value.code == 2


def test_inner_residual_failure_exit_1(tmp_path, zeros):
    # A deliberately short truncation leaves visible orthogonality residuals.
    out = tmp_path / "inner.json"
    assert main(["inner", "--zeros", zeros([0.9]), "--p", "1.5", "--method", "closed", "--degree", "3", "--out", str(out)]) == 1


def test_solver_failure_exit_3(tmp_path, zeros):
    out = tmp_path / "inner.json"
    code = main(
        ["inner", "--zeros", zeros([0.5, -0.7j]), "--p", "1.5", "--method", "project", "--max-iters", "1", "--out", str(out)]
    )
    assert code == 3
    diag = json.loads((tmp_path / "inner.json.diagnostics.json").read_text())
    assert diag["residual"] > 0 and diag["last_iterate"]


def test_project(tmp_path):
    f = _write(tmp_path / "f.json", [[1, 0], [-2, 0]])
    out = tmp_path / "proj.json"
    assert main(["project", "--f", f, "--p", "2", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["norm"] == pytest.approx(2.0, abs=1e-9)
    assert res["co_projection"][1] == pytest.approx([-1.5, 0.0])


def test_project_origin_zero(tmp_path):
    f = _write(tmp_path / "f.json", [[0, 0], [1, 0]])
    assert main(["project", "--f", f]) == 2
    assert main(["project", "--f", f, "--origin-mult", "1", "--out", str(tmp_path / "o.json")]) == 0


def test_zeroset_certificate(tmp_path, zeros):
    out, table = tmp_path / "cert.json", tmp_path / "cert.csv"
    assert main(["zeroset", "--zeros", zeros([0.5, 0.6, 0.7]), "--p", "2", "--out", str(out), "--csv", str(table)]) == 0
    rows = list(csv.DictReader(table.open()))
    assert [r["n"] for r in rows] == ["1", "2", "3"]
    norms = [float(r["norm"]) for r in rows]
    assert norms == pytest.approx([2, 10 / 3, 100 / 21], abs=1e-8)
    assert set(rows[0]) == {"n", "norm", "phi_norm", "bound"}
    assert json.loads(out.read_text())["monotone"] is True


def test_zeroset_n_max(zeros):
    with pytest.raises(SystemExit) as info:
        main(["zeroset", "--zeros", zeros([0.5]), "--n-max", "0"])
    assert info.value.code == 2
    assert main(["zeroset", "--zeros", zeros([0.5]), "--n-max", "3"]) == 2


def test_zeroset_diag(tmp_path, zeros):
    table = tmp_path / "diag.csv"
    args = ["zeroset", "diag", "--zeros", zeros([0.5, 0.75, 0.875])]
    args += ["--blaschke", "--newman", "--vinogradov-eps", "0.5", "--csv", str(table), "--out", str(tmp_path / "d.json")]
    assert main(args) == 0
    rows = list(csv.DictReader(table.open()))
    assert list(rows[0]) == ["n", "blaschke", "newman_ratio", "vinogradov"]
    assert float(rows[-1]["blaschke"]) == pytest.approx(0.875)
    assert float(rows[-1]["newman_ratio"]) == pytest.approx(0.5)


def test_threads_env(tmp_path, zeros, monkeypatch):
    monkeypatch.setenv("PINNER_THREADS", "2")
    out = tmp_path / "c.json"
    assert main(["zeroset", "--zeros", zeros([0.5, 0.6]), "--out", str(out)]) == 0
    monkeypatch.setenv("PINNER_THREADS", "many")
    assert main(["zeroset", "--zeros", zeros([0.5, 0.6]), "--out", str(out)]) == 2


def test_construct(tmp_path):
    out, roots = tmp_path / "family.json", tmp_path / "roots.csv"
    args = ["construct", "--family", "nonblaschke", "--p", "3", "--k-max", "4", "--out", str(out), "--emit-roots", str(roots)]
    assert main(args) == 0
    fam = json.loads(out.read_text())
    assert fam["term_counts"] == [2, 6, 24, 120]
    rows = list(csv.DictReader(roots.open()))
    assert list(rows[0]) == ["level", "modulus", "count", "spacing"]
    assert [int(r["count"]) for r in rows] == [1, 2, 6, 24]


def test_construct_other_families(tmp_path):
    assert main(["construct", "--family", "slow", "--k-max", "3", "--out", str(tmp_path / "s.json")]) == 0
    assert main(["construct", "--family", "geometric", "--k-max", "3", "--rotate", "--out", str(tmp_path / "g.json")]) == 0
    assert main(["construct", "--family", "slow", "--k-max", "7"]) == 2
    assert main(["construct", "--family", "nonblaschke", "--p", "2"]) == 2


def test_verify_exit_codes(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "involution", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["pass"] is True


def test_verify_failure_exit_1(tmp_path, monkeypatch):
    from pinner import cli, verify

    monkeypatch.setitem(cli.SUITES, "pythagorean", lambda seed, cases, opts: verify.pythagorean_suite(seed, 3, tol=-1.0))
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "pythagorean", "--out", str(out)]) == 1
    assert "offending_case" in json.loads(out.read_text())


def test_outputs_are_deterministic(tmp_path, zeros):
    paths = []
    for i in range(2):
        out = tmp_path / f"run{i}.json"
        assert main(["zeroset", "--zeros", zeros([0.5, -0.6, 0.7j]), "--p", "2.5", "--out", str(out)]) == 0
        paths.append(out)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_stdout_when_no_out(zeros, capsys):
    assert main(["inner", "--zeros", zeros([0.5]), "--method", "closed"]) == 0
    assert json.loads(capsys.readouterr().out)["norm"] == pytest.approx(2.0)
