import json
import math
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from qrational import io as jio
from qrational.cli import main
from qrational.statespace import StateSpace

DATA = Path(__file__).parent / "data"
FIXTURES = sorted(DATA.glob("*.json"))


def assert_subset(actual, expected, rtol, path=""):
    """Every key/item of ``expected`` must appear in ``actual``; floats compared with ``rtol``."""
    if isinstance(expected, dict):
        assert isinstance(actual, dict), path
        for key, val in expected.items():
            assert key in actual, f"{path}/{key} missing"
            assert_subset(actual[key], val, rtol, f"{path}/{key}")
    elif isinstance(expected, list):
        assert isinstance(actual, list) and len(actual) == len(expected), path
        for i, (a, e) in enumerate(zip(actual, expected)):
            assert_subset(a, e, rtol, f"{path}/{i}")
    elif isinstance(expected, bool) or expected is None or isinstance(expected, str):
        assert actual == expected, f"{path}: {actual!r} != {expected!r}"
    else:
        assert math.isclose(actual, expected, rel_tol=rtol, abs_tol=rtol), \
            f"{path}: {actual!r} != {expected!r}"


def run_cli(args, doc, tmp_path, capsys):
    argv = list(args)
    if doc is not None:
        src = tmp_path / "in.json"
        src.write_text(json.dumps(doc))
        argv += ["--input", str(src)]
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("fixture", FIXTURES, ids=[f.stem for f in FIXTURES])
def test_golden(fixture, tmp_path, capsys):
    case = json.loads(fixture.read_text())
    code, out, err = run_cli(case["args"], case["input"], tmp_path, capsys)
    assert code == case["expected_exit"], err
    if "expected" in case:
        assert_subset(json.loads(out), case["expected"], case.get("rtol", 1e-12))
    if "expected_stderr" in case:
        assert case["expected_stderr"] in err


def test_malformed_json(tmp_path, capsys):
    src = tmp_path / "bad.json"
    src.write_text("{not json")
    assert main(["eval", "--input", str(src)]) == 1
    assert "malformed JSON" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["eval", "--input", "/nonexistent/x.json"]) == 1


def test_output_file_is_deterministic(tmp_path, capsys):
    doc = {"system": {"C": 1, "A": 0.5, "B": 1, "q": 0.3}, "z": [0.1, [0.0, 0.2]]}
    outs = []
    for k in range(2):
        dst = tmp_path / f"out{k}.json"
        code, _, _ = run_cli(["eval", "--output", str(dst)], doc, tmp_path, capsys)
        assert code == 0
        outs.append(dst.read_bytes())
    assert outs[0] == outs[1]


def test_realize_then_taylor_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(5)
    A = np.diag([0.5, -0.3, 0.2j])
    C, B = rng.standard_normal((1, 3)), rng.standard_normal((3, 1))
    coeffs = [complex((C @ np.linalg.matrix_power(A, k) @ B)[0, 0]) for k in range(12)]
    doc = {"coeffs": [[c.real, c.imag] for c in coeffs], "q": 0.0}
    code, out, _ = run_cli(["realize"], doc, tmp_path, capsys)
    assert code == 0
    system = json.loads(out)["system"]
    assert json.loads(out)["state_dim"] == 3
    code, out, _ = run_cli(["taylor"], {"system": system, "K": 15}, tmp_path, capsys)
    got = [jio.decode_matrix(m)[0, 0] for m in json.loads(out)["coeffs"]]
    ref = [(C @ np.linalg.matrix_power(A, k) @ B)[0, 0] for k in range(16)]
    np.testing.assert_allclose(got, ref, atol=1e-9)


def test_star_mul_and_inv(tmp_path, capsys):
    f = jio.encode_statespace(StateSpace([[1.0, 0.5]], np.diag([0.3, -0.2]), [[1.0], [1.0]]), 0.4)
    code, out, _ = run_cli(["inv", "--star"], {"f": f}, tmp_path, capsys)
    assert code == 0
    g = json.loads(out)["system"]
    code, out, _ = run_cli(["mul", "--star"], {"f": f, "g": g}, tmp_path, capsys)
    code, out, _ = run_cli(["taylor"], {"system": json.loads(out)["system"], "K": 5},
                           tmp_path, capsys)
    vals = [jio.decode_matrix(m)[0, 0] for m in json.loads(out)["coeffs"]]
    np.testing.assert_allclose(vals, [1, 0, 0, 0, 0, 0], atol=1e-10)


def test_help_lists_schema(capsys):
    with pytest.raises(SystemExit):
        main(["pick", "--help"])
    assert "tangential" in capsys.readouterr().out


def test_codec_round_trip():
    M = np.array([[1 + 2j, -0.0], [3.5, -1j]])
    np.testing.assert_array_equal(jio.decode_matrix(jio.encode_matrix(M)), M)
    assert jio.encode_complex(-0.0) == [0.0, 0.0]
    with pytest.raises(jio.SchemaError, match="/x/data"):
        jio.decode_matrix({"rows": 2, "cols": 1, "data": [1]}, "/x")


@pytest.mark.skipif(shutil.which("qrat") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["qrat", "kernel-test", "dirichlet", "--n", "30"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and json.loads(res.stdout)["pass"] is True
