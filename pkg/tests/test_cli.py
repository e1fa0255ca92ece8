import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from gaussian_witness import from_normal
from gaussian_witness.cli import RunConfig, main
from gaussian_witness.errors import ValidationError
from gaussian_witness.serialization import (
    SchemaError, load_state, normal_to_json, parse_state, quadrature_to_json,
)
from gaussian_witness.states import product, squeezed_vacuum, thermal, twin_beam, vacuum

X_CR_R1 = 10.265990580972302


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    return {
        "vacuum": write(tmp_path, "vacuum.json", quadrature_to_json(from_normal(vacuum(1)))),
        "bad": write(tmp_path, "bad.json", {"modes": 1, "sigma": [[0.4, 0], [0, 0.4]]}),
        "twin": write(tmp_path, "twin.json", normal_to_json(twin_beam(0.3))),
        "sq1": write(tmp_path, "sq1.json", normal_to_json(squeezed_vacuum(1.0))),
        "thermals": write(tmp_path, "thermals.json", normal_to_json(thermal([1.0, 0.5]))),
        "mixed": write(tmp_path, "mixed.json", normal_to_json(product(squeezed_vacuum(0.3), thermal(0.2)))),
    }


def test_validate(files, capsys):
    code, out, _ = run(["validate", "--input", files["vacuum"]], capsys)
    report = json.loads(out)
    assert code == 0 and report["physical"] and report["classical"]
    code, out, _ = run(["validate", "--input", files["bad"]], capsys)
    assert code == 2 and not json.loads(out)["physical"]
    code, out, _ = run(["validate", "--input", files["twin"]], capsys)
    report = json.loads(out)
    assert code == 0 and report["physical"] and not report["classical"]


def test_parse_errors(tmp_path, capsys):
    code, _, err = run(["validate", "--input", str(tmp_path / "missing.json")], capsys)
    assert code == 4
    broken = write(tmp_path, "broken.json", '{"modes": 1,\n "sigma": [[1, 0], [0, 1]\n}')
    code, _, err = run(["validate", "--input", broken], capsys)
    assert code == 4 and "line 3" in err
    wrong = write(tmp_path, "wrong.json", {"modes": 1, "representation": "normal", "B": [0.1], "C": ["x"]})
    code, _, err = run(["validate", "--input", wrong], capsys)
    assert code == 4 and "C[0]" in err


def test_analyze(files, capsys):
    code, out, _ = run(["analyze", "--input", files["sq1"], "--modes", "0"], capsys)
    report = json.loads(out)
    assert code == 0 and report["verdict"] == "nonclassical-detected"
    assert report["x_cr"] == pytest.approx(X_CR_R1, rel=1e-10)
    code, out, _ = run(["analyze", "--input", files["twin"], "--modes", "0,1", "--x", "0"], capsys)
    assert json.loads(out)["verdict"] == "nonclassical-detected"
    code, out, _ = run(["analyze", "--input", files["thermals"]], capsys)
    assert json.loads(out)["verdict"] == "not-detected"
    code, out, _ = run(["analyze", "--input", files["sq1"], "--witness", "M"], capsys)
    assert json.loads(out)["strategy"] == "M-coherent"


def test_analyze_rejects_bad_requests(files, capsys):
    assert run(["analyze", "--input", files["bad"]], capsys)[0] == 2
    assert run(["analyze", "--input", files["twin"], "--modes", "0,1", "--witness", "R"], capsys)[0] == 2
    assert run(["analyze", "--input", files["twin"], "--x", "-1"], capsys)[0] == 2
    with pytest.raises(SystemExit):
        main(["analyze", "--input", files["twin"], "--modes", "a"])


def read_csv(text):
    return list(csv.reader(text.splitlines()))


def test_scan(files, capsys):
    code, out, _ = run(["scan", "--input", files["sq1"], "--modes", "0", "--grid", "0:40:41"], capsys)
    rows = read_csv(out)
    assert code == 0 and rows[0] == ["x", "value", "verdict"] and len(rows) == 42
    values = [float(r[1]) for r in rows[1:]]
    assert values[-1] < values[0] and rows[-1][2] == "detected"
    assert "\r" not in out
    code, out, _ = run(["scan", "--input", files["thermals"], "--modes", "0,1"], capsys)
    assert all(float(r[1]) >= -1e-10 for r in read_csv(out)[1:])
    assert len(read_csv(out)) == 52
    code, out, _ = run(["scan", "--input", files["vacuum"], "--grid", "0:5:6"], capsys)
    assert all(abs(float(r[1])) < 1e-12 for r in read_csv(out)[1:])
    assert run(["scan", "--input", files["vacuum"], "--grid", "0:5:1"], capsys)[0] == 2
    assert run(["scan", "--input", files["vacuum"], "--grid=-1:5:3"], capsys)[0] == 2


def test_scan_with_fixed_phases(files, capsys):
    code, out, _ = run(["scan", "--input", files["twin"], "--phases", "0.3,0.4", "--grid", "0:2:3"], capsys)
    assert code == 0 and len(read_csv(out)) == 4


def test_optimize(files, capsys):
    code, out, _ = run(["optimize", "--input", files["twin"]], capsys)
    report = json.loads(out)
    assert code == 0 and report["witness"] == "M"
    assert np.cos(sum(report["phases"])) == pytest.approx(1.0, abs=1e-8)
    assert all(report["a"] <= c["a"] + 1e-9 for c in report["candidates"].values())
    code, out, _ = run(["optimize", "--input", files["sq1"]], capsys)
    assert json.loads(out)["phases"] == [pytest.approx(-np.pi / 2)]


def test_critical_xi(files, capsys):
    code, out, _ = run(["critical-xi", "--input", files["sq1"]], capsys)
    report = json.loads(out)
    assert code == 0 and report["applicable"] and report["radical_agrees"]
    assert report["xi_cr"] == pytest.approx(np.sqrt(X_CR_R1), rel=1e-10)
    code, out, _ = run(["critical-xi", "--input", files["thermals"], "--modes", "0"], capsys)
    report = json.loads(out)
    assert not report["applicable"] and report["x_cr"] is None


def test_standard_form(files, capsys):
    code, out, _ = run(["standard-form", "--input", files["twin"]], capsys)
    report = json.loads(out)
    s = np.sinh(0.3)
    assert code == 0 and report["q_jl"] == pytest.approx(s * np.cosh(0.3))
    assert report["duan_sum"] == pytest.approx(np.exp(-0.6))
    assert report["phases"] == [0.0, 0.0]
    assert run(["standard-form", "--input", files["mixed"]], capsys)[0] == 2


def test_verify(files, tmp_path, capsys):
    out_path = tmp_path / "verify.csv"
    code, _, _ = run(["verify", "--input", files["twin"], "--samples", "200000", "--seed", "7",
                      "--output", str(out_path)], capsys)
    rows = read_csv(out_path.read_text())
    assert code == 0
    assert rows[0] == ["moment", "engine", "finite_difference", "fd_pass", "monte_carlo", "mc_std_error",
                       "mc_pass", "wick"]
    assert len(rows) == 1 + 9
    assert all(r[3] == "pass" for r in rows[1:])
    assert all(r[6] in ("pass", "n/a") for r in rows[1:])
    wick = {r[0]: float(r[7]) for r in rows[1:]}
    engine = {r[0]: float(r[1]) for r in rows[1:]}
    assert wick["1,1"] == pytest.approx(engine["1,1"], rel=1e-12)
    code, _, _ = run(["verify", "--input", write(tmp_path, "th.json", normal_to_json(thermal(1.0))),
                      "--samples", "100000"], capsys)
    assert code == 0
    assert run(["verify", "--input", files["bad"]], capsys)[0] == 2
    assert run(["verify", "--input", files["twin"], "--cap", "5,5"], capsys)[0] == 2


def test_verify_flags_disagreement(files, capsys):
    code, out, _ = run(["verify", "--input", files["sq1"], "--samples", "20000", "--tol-sigmas", "0"], capsys)
    assert code == 3 and "FAIL" in out


def test_outputs_are_byte_identical(files, tmp_path, capsys):
    for args in (["analyze", "--input", files["twin"]],
                 ["scan", "--input", files["sq1"]],
                 ["verify", "--input", files["mixed"], "--samples", "20000", "--seed", "3"]):
        paths = [tmp_path / f"out{i}" for i in range(2)]
        for p in paths:
            main(args + ["--output", str(p)])
        assert paths[0].read_bytes() == paths[1].read_bytes()


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "gaussian_witness", "validate", "--input", files["vacuum"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["physical"]


def test_run_config_invariants():
    with pytest.raises(ValidationError):
        RunConfig("scan", "x.json", grid=(0.0, 1.0, 1))
    with pytest.raises(ValidationError):
        RunConfig("scan", "x.json", grid=(-0.5, 1.0, 3))
    assert RunConfig("scan", "x.json", grid=(0.0, 1.0, 2)).grid == (0.0, 1.0, 2)


def test_schema_round_trips():
    cm = product(twin_beam(0.2, 0.4), squeezed_vacuum(0.1))
    state, back = parse_state(json.loads(json.dumps(normal_to_json(cm))))
    assert back.allclose(cm)
    state2, cm2 = parse_state(quadrature_to_json(state))
    assert np.allclose(state2.sigma, state.sigma) and cm2.allclose(cm)


def test_schema_errors(tmp_path):
    bad = [
        ({"representation": "normal"}, "modes"),
        ({"modes": 0}, "modes"),
        ({"modes": 1}, "sigma"),
        ({"modes": 1, "sigma": [[1, 0]]}, "sigma"),
        ({"modes": 1, "sigma": [[1, 0], [0, 1]], "mean": [0]}, "mean"),
        ({"modes": 1, "representation": "P"}, "representation"),
        ({"modes": 2, "representation": "normal", "B": [0, 0], "C": [0, 0], "D": {"01": [0, 0]}}, "D"),
        ({"modes": 1, "sigma": [[1, 0.5], [0, 1]]}, "symmetric"),
    ]
    for data, field in bad:
        with pytest.raises(SchemaError, match=field):
            parse_state(data)
    with pytest.raises(SchemaError):
        load_state(write(tmp_path, "list.json", "[1, 2]"))
