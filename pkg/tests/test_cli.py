import json
import math

import pytest

from negwit import conic
from negwit.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_torpedo_classical(capsys):
    code, out = run_cli(capsys, "torpedo", "--d-in", "2", "--d-msg", "2", "--mode", "classical")
    assert code == 0
    payload = json.loads(out)
    assert payload["value"] == 0.75
    assert payload["value_exact"] == "3/4"


def test_torpedo_quantum(capsys):
    code, out = run_cli(capsys, "torpedo", "--d-in", "3", "--d-msg", "3", "--mode", "quantum")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(1.0, abs=1e-9)


def test_cf_examples(capsys):
    code, out = run_cli(capsys, "cf", "--example", "pr_box")
    assert code == 0
    payload = json.loads(out)
    assert payload["cf"] == pytest.approx(1.0, abs=1e-8)
    assert payload["violation"] == pytest.approx(1.0, abs=1e-6)
    code, out = run_cli(capsys, "cf", "--example", "identity_mix")
    assert json.loads(out)["cf"] == pytest.approx(0.0, abs=1e-9)


def test_cf_model_file(tmp_path, capsys):
    from negwit import contextuality as C

    path = tmp_path / "model.json"
    path.write_text(C.example_model("chsh").to_json())
    code, out = run_cli(capsys, "cf", "--model-file", str(path))
    assert code == 0
    assert json.loads(out)["cf"] == pytest.approx(math.sqrt(2) - 1, abs=1e-6)


def test_witness_command(capsys):
    code, out = run_cli(
        capsys,
        "witness",
        "--state",
        "lossy_fock:n=3,eta=0.2",
        "--n",
        "3",
        "--threshold-upper",
        "0.427",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["expectation"] == pytest.approx(0.8**3)
    assert payload["delta"] == pytest.approx(0.8**3 - 0.427)
    code, out = run_cli(
        capsys,
        "witness",
        "--state",
        "lossy_fock:n=3,eta=0.6",
        "--n",
        "3",
        "--threshold-upper",
        "0.427",
    )
    assert json.loads(out)["delta"] is None


def test_threshold_small(capsys):
    code, out = run_cli(capsys, "threshold", "--n", "1", "--m-max", "2")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "m,lower,upper"
    first = lines[1].split(",")
    assert int(first[0]) == 1
    assert abs(float(first[1]) - 0.5) < 1e-6


def test_threshold_weighted(capsys):
    code, out = run_cli(capsys, "threshold", "--weights", "1,1", "--m-max", "7")
    assert code == 0
    last = out.strip().splitlines()[-1].split(",")
    assert float(last[2]) < 0.875


def test_deterministic_output(capsys):
    _, out1 = run_cli(capsys, "plotdata", "--figure", "pssvs")
    _, out2 = run_cli(capsys, "plotdata", "--figure", "pssvs")
    assert out1 == out2


def test_plotdata_curves(capsys):
    code, out = run_cli(capsys, "plotdata", "--figure", "lossy3")
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()[1:]]
    for eta, f3, delta in rows:
        if float(eta) >= 0.5:
            assert float(delta) <= 0.0
    code, out = run_cli(capsys, "plotdata", "--figure", "cat2")
    vals = {float(r.split(",")[0]): float(r.split(",")[1]) for r in out.strip().splitlines()[1:]}
    assert vals[2.0] > 0.5 and vals[1.0] < 0.5 and vals[3.0] < 0.5


def test_emit_sdpa(tmp_path, capsys):
    path = tmp_path / "prog.dat-s"
    code, _ = run_cli(
        capsys, "threshold", "--n", "1", "--m-max", "3", "--emit-sdpa", str(path)
    )
    assert code == 0
    prob = conic.parse_sdpa(path.read_text())
    sol = conic.solve(prob, tol=1e-9)
    assert sol.status == "optimal"


def test_bad_input_exit_code(capsys):
    code, _ = run_cli(
        capsys, "witness", "--state", "bogus:x=1", "--n", "1", "--threshold-upper", "0.5"
    )
    assert code == 1
    code, _ = run_cli(capsys, "cf")
    assert code == 1


def test_output_to_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, _ = run_cli(capsys, "threshold", "--n", "1", "--m-max", "1", "--out", str(path))
    assert code == 0
    assert path.read_text().startswith("m,lower,upper")


def test_plotdata_threshold_small(capsys):
    code, out = run_cli(
        capsys, "plotdata", "--figure", "threshold", "--n-max", "2", "--m-max", "4"
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "n,lower,upper"
    assert len(lines) == 3
    for line in lines[1:]:
        _, lo, up = line.split(",")
        assert abs(float(lo) - 0.5) < 1e-9 and abs(float(up) - 0.5) < 1e-9


def test_threshold_jobs_deterministic(capsys):
    _, serial = run_cli(capsys, "threshold", "--n", "1", "--m-max", "3")
    _, parallel = run_cli(capsys, "threshold", "--n", "1", "--m-max", "3", "--jobs", "3")
    assert serial == parallel
