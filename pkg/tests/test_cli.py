import csv
import io
import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from stiffkit import cli
from stiffkit.cli import EXIT_CHECK, EXIT_INPUT, EXIT_MISMATCH, EXIT_NUMERIC, EXIT_OK, main

MODELS = Path(__file__).resolve().parents[1] / "models"

SPRING = {"type": "spring6", "K": np.diag([1.0, 2, 3, 4, 5, 6]).tolist()}


def write(tmp_path, elements, name="m.json"):
    p = tmp_path / name
    p.write_text(json.dumps({"name": "t", "chains": [{"name": "c0", "elements": elements}]}))
    return str(p)


def run_json(capsys, argv):
    code = main(argv + ["--format", "json"])
    return code, json.loads(capsys.readouterr().out)


def test_compute_single_spring(tmp_path, capsys):
    code, out = run_json(capsys, ["compute", write(tmp_path, [SPRING])])
    assert code == EXIT_OK
    np.testing.assert_allclose(out["stiffness"], np.diag([1.0, 2, 3, 4, 5, 6]), rtol=1e-14)
    assert out["rank"] == 6 and out["positive_definite"]


@pytest.mark.parametrize("method", ["dense", "closed", "recursive"])
def test_compute_passive_joint_methods(tmp_path, capsys, method):
    path = write(tmp_path, [SPRING, {"type": "passive", "axis": [1, 0, 0], "kind": "prismatic"}])
    code, out = run_json(capsys, ["compute", path, "--chain", "c0", "--method", method])
    assert code == EXIT_OK and out["rank"] == 5
    np.testing.assert_allclose(out["stiffness"], np.diag([0.0, 2, 3, 4, 5, 6]), atol=1e-14)
    np.testing.assert_allclose(np.abs(out["kernel"][0]), np.eye(6)[0], atol=1e-12)


def test_compute_text_and_csv(tmp_path, capsys):
    path = write(tmp_path, [SPRING])
    assert main(["compute", path]) == EXIT_OK
    assert "rank: 6" in capsys.readouterr().out
    assert main(["compute", path, "--format", "csv"]) == EXIT_OK
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    stiff = [r for r in rows if r[0] == "stiffness"]
    assert len(stiff) == 6 and float(stiff[5][2 + 5]) == pytest.approx(6.0, rel=1e-14)


def test_compute_redundant_joint_exit_3(tmp_path, capsys):
    joint = {"type": "passive", "axis": [0, 0, 1], "kind": "prismatic"}
    path = write(tmp_path, [SPRING, joint, dict(joint, name="again")])
    assert main(["compute", path, "--method", "closed"]) == EXIT_NUMERIC
    err = capsys.readouterr().err
    assert "again" in err and "RedundantPassiveJoint" in err
    code, out = run_json(capsys, ["compute", path, "--skip-redundant"])
    assert code == EXIT_OK and out["rank"] == 5


def test_compute_input_errors(tmp_path, capsys):
    assert main(["compute", str(tmp_path / "none.json")]) == EXIT_INPUT
    assert main(["compute", write(tmp_path, [SPRING]), "--chain", "nope"]) == EXIT_INPUT
    K = np.eye(6)
    K[0, 5] = 0.5
    assert main(["compute", write(tmp_path, [{"type": "spring6", "K": K.tolist()}])]) == EXIT_INPUT
    assert main(["compute"]) == EXIT_INPUT
    assert main(["frobnicate"]) == EXIT_INPUT


def test_compute_fixture_case_b(capsys):
    code, out = run_json(capsys, ["compute", str(MODELS / "stewart_case_B.json")])
    assert code == EXIT_OK and out["rank"] == 6
    assert [l["rank"] for l in out["legs"]] == [1] * 6


def test_verify_fixtures(capsys):
    for case, rank in (("A", 3), ("B", 6)):
        code, out = run_json(capsys, ["verify", str(MODELS / f"stewart_case_{case}.json")])
        assert code == EXIT_OK and out["passed"] and out["rank"] == rank


def test_verify_random(capsys):
    code, out = run_json(capsys, ["verify", "--random", "--seed", "11", "--n-theta", "18", "--n-q", "4"])
    assert code == EXIT_OK
    names = {c["name"] for c in out["checks"]}
    assert any("soft" in n for n in names) and any("order" in n for n in names)


def test_verify_reports_failed_check(monkeypatch, capsys):
    from stiffkit import verify
    real = verify.verify_chain
    monkeypatch.setattr(verify, "verify_chain",
                        lambda c: real(c) + [verify.Check("forced", False, 1.0, 0.0)])
    assert main(["verify", "--random", "--seed", "1"]) == EXIT_CHECK
    assert main(["verify"]) == EXIT_INPUT


@pytest.mark.parametrize("case", ["A", "B"])
def test_stewart_command(case, capsys, tmp_path):
    save = tmp_path / f"{case}.json"
    code, out = run_json(capsys, ["stewart", "--case", case, "--R", "2", "--r", "1", "--h", "1",
                                  "--k11", "1000", "--save", str(save)])
    assert code == EXIT_OK and out["passed"] and out["deviation"] <= 1e-8
    K = np.array(out["numerical"]["stiffness"])
    if case == "A":
        assert abs(K[5, 5]) <= 1e-9 * np.abs(K).max()
    else:
        assert K[5, 5] == pytest.approx(4500.0, rel=1e-5)
        assert out["numerical"]["rank"] == 6
    code, again = run_json(capsys, ["compute", str(save)])
    np.testing.assert_array_equal(again["stiffness"], out["numerical"]["stiffness"])


def test_stewart_fixture_files_are_current(tmp_path, capsys):
    for case in "AB":
        path = tmp_path / f"{case}.json"
        main(["stewart", "--case", case, "--R", "2", "--r", "1", "--h", "1", "--k11", "1000",
              "--save", str(path)])
        assert json.loads(path.read_text()) == json.loads((MODELS / f"stewart_case_{case}.json").read_text())
    capsys.readouterr()


@pytest.mark.parametrize("argv", [
    ["--R", "0", "--r", "1", "--h", "1", "--k11", "1000"],
    ["--R", "2", "--r", "-1", "--h", "1", "--k11", "1000"],
    ["--R", "2", "--r", "1", "--h", "nan", "--k11", "1000"],
    ["--R", "2", "--r", "1", "--h", "1"],
])
def test_stewart_input_errors(argv, capsys):
    assert main(["stewart", "--case", "A"] + argv) == EXIT_INPUT


def test_stewart_mismatch_exit_4(monkeypatch, capsys):
    from stiffkit import stewart
    real = stewart.analytic_case_matrix
    monkeypatch.setattr(stewart, "analytic_case_matrix",
                        lambda p, K11=None: type(real(p, K11))(real(p, K11).K * 1.01))
    assert main(["stewart", "--case", "B", "--R", "2", "--r", "1", "--h", "1", "--k11", "1000"]) == EXIT_MISMATCH


def _bench(capsys, *extra):
    assert main(["bench", "--n-springs", "12", "--n-passive", "3", "--trials", "3", "--seed", "5", *extra]) == EXIT_OK
    return list(csv.DictReader(io.StringIO(capsys.readouterr().out)))


def test_bench_rows_and_determinism(capsys):
    a, b = _bench(capsys), _bench(capsys)
    assert [r["method"] for r in a] == ["dense", "closed", "recursive"]
    assert all(r["valid"] == "True" and float(r["max_deviation"]) <= 1e-9 for r in a)
    assert [(r["method"], r["backend"], r["max_deviation"]) for r in a] == \
           [(r["method"], r["backend"], r["max_deviation"]) for r in b]


def test_bench_compare_backends(capsys):
    rows = _bench(capsys, "--compare-backends")
    assert {r["backend"] for r in rows if r["method"] == "recursive"} == set(cli.kernels.available())


def test_bench_kernels(capsys):
    assert main(["bench", "--kernels", "--iterations", "200"]) == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert {r["backend"] for r in rows} == set(cli.kernels.available())
    assert all(float(r["ns_per_call"]) > 0 for r in rows)


def test_bench_input_errors(capsys):
    assert main(["bench", "--n-springs", "3"]) == EXIT_INPUT
    assert main(["bench", "--n-passive", "6"]) == EXIT_INPUT


def test_console_script():
    exe = shutil.which("stiffkit")
    if exe is None:
        pytest.skip("console script not installed")
    res = subprocess.run([exe, "stewart", "--case", "A", "--R", "0", "--r", "1", "--h", "1", "--k11", "1"],
                         capture_output=True, text=True)
    assert res.returncode == EXIT_INPUT
