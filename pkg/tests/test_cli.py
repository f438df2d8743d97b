import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gatebudget.cli import chamber_grid, main
from gatebudget.gates import InvalidGateSpec, parse_angle, read_matrix, resolve_gate, write_matrix
from gatebudget.numkernel import haar_unitary, random_source

PI = math.pi


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_decompose_swap(capsys):
    code, doc = run_json(capsys, "decompose", "SWAP")
    assert code == 0
    assert doc["canonical"] == pytest.approx([PI / 4] * 3, abs=1e-11)
    assert doc["residual"] <= 1e-10


def test_decompose_b_text_output(capsys):
    code, out, _ = run(capsys, "decompose", "B")
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("canonical:"))
    assert json.loads(line.split(":", 1)[1]) == pytest.approx([PI / 4, PI / 8, 0], abs=1e-11)


def test_decompose_identity_file(capsys, tmp_path):
    path = tmp_path / "eye.json"
    write_matrix(path, np.eye(4), "identity")
    code, doc = run_json(capsys, "decompose", str(path))
    assert code == 0
    assert doc["canonical"] == pytest.approx([0, 0, 0], abs=1e-12)
    for key in ("pre_a", "pre_b", "post_a", "post_b"):
        m = np.array([[complex(*z) for z in row] for row in doc[key]])
        assert abs(abs(np.trace(m)) - 2) <= 1e-9


def test_degrees_flag(capsys):
    _, doc = run_json(capsys, "decompose", "CNOT", "--degrees")
    assert doc["canonical"] == pytest.approx([45, 0, 0], abs=1e-9)


def test_invariants_cnot(capsys):
    code, doc = run_json(capsys, "invariants", "CNOT")
    assert code == 0
    assert doc["g1"] == pytest.approx([0, 0], abs=1e-12)
    assert doc["g2"] == pytest.approx(1.0, abs=1e-12)


def test_minapps_examples(capsys):
    _, doc = run_json(capsys, "minapps", "B")
    assert doc["power"] == pytest.approx(3 * PI / 8, abs=1e-11)
    assert doc["min_applications"] == 2
    assert doc["theorem4"]["1"] is False and doc["theorem4"]["2"] is True
    assert run_json(capsys, "minapps", "SQRT_SWAP")[1]["min_applications"] == 6
    assert run_json(capsys, "minapps", "SWAP")[1]["min_applications"] == "Unbounded"
    assert run(capsys, "minapps", "B", "--n-max", "0")[0] == 3


@pytest.mark.parametrize(
    "gate, pe, cor6",
    [("CNOT", True, True), ("SQRT_SWAP", True, False), ("DCNOT", True, True), ("SWAP", False, False)],
)
def test_classify(capsys, gate, pe, cor6):
    code, doc = run_json(capsys, "classify", gate)
    assert code == 0
    assert doc["perfect_entangler"] is pe and doc["corollary6"] is cor6


def test_classify_identity(capsys):
    _, doc = run_json(capsys, "classify", "IDENTITY")
    assert doc["is_local"] is True
    assert not any(doc[k] for k in ("is_swap_class", "perfect_entangler", "controlled_u", "b_class", "corollary6"))


def test_dual(capsys):
    _, doc = run_json(capsys, "dual", "CNOT")
    assert doc["dual"] == pytest.approx([PI / 4, PI / 4, 0], abs=1e-11)


def test_synth_b_random(capsys):
    code, doc = run_json(capsys, "synth", "--elementary", "B", "--target", "random:7", "-n", "2")
    assert code == 0 and doc["converged"] is True
    assert len(doc["locals"]) == 3
    assert doc["locals"][0]["a"]["rows"]


def test_synth_cnot_random(capsys):
    code, doc = run_json(capsys, "synth", "--elementary", "CNOT", "--target", "random:7", "-n", "3")
    assert code == 0 and doc["residual"] < 1e-6


def test_synth_cnot_swap_not_converged(capsys):
    code, doc = run_json(
        capsys, "synth", "--elementary", "CNOT", "--target", "SWAP", "-n", "2", "--restarts", "5"
    )
    assert code == 2
    assert doc["converged"] is False and doc["invariant_residual"] > 1e-3


def test_check_t7(capsys):
    code, doc = run_json(capsys, "check-t7", "pi/4", "pi/4", "pi/4", "pi/4")
    assert code == 0 and doc["verdict"] == "pass"
    _, doc = run_json(capsys, "check-t7", "pi/8", "pi/8", "pi/4", "pi/8")
    assert doc["verdict"] == "fail" and doc["sum_slack"] < 0
    _, doc = run_json(capsys, "check-t7", "0.3", "0.3", "0.3", "0.3")
    assert doc["verdict"] == "pass"
    assert doc["sum_slack"] == pytest.approx(0, abs=1e-12) or doc["difference_slack"] == pytest.approx(0, abs=1e-12)
    assert run(capsys, "check-t7", "-1", "0", "0", "0")[0] == 3


def test_volume(capsys):
    code, a = run_json(capsys, "volume", "--samples", "100000", "--seed", "3")
    _, b = run_json(capsys, "volume", "--samples", "100000", "--seed", "3")
    assert code == 0 and a == b
    assert a["pe_and_not_corollary6_over_pe"] == pytest.approx(0.5, abs=0.05)
    assert run(capsys, "volume", "--samples", "0")[0] == 3


def test_volume_stderr_at_full_size(capsys):
    _, doc = run_json(capsys, "volume")
    assert doc["corollary6_fraction_stderr"] < 1e-3


def test_exit_codes(capsys, tmp_path):
    assert run(capsys)[0] == 1
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "decompose", "NOPE")[0] == 3
    assert run(capsys, "decompose", "canonical:1,2")[0] == 3
    assert run(capsys, "decompose", "random:x")[0] == 3
    bad = tmp_path / "bad.json"
    write_matrix(bad, np.ones((4, 4)))
    assert run(capsys, "decompose", str(bad))[0] == 3
    garbage = tmp_path / "garbage.json"
    garbage.write_text("not json")
    assert run(capsys, "decompose", str(garbage))[0] == 3
    assert run(capsys, "decompose", str(tmp_path))[0] == 4
    out = tmp_path / "missing" / "grid.csv"
    assert run(capsys, "export-chamber", "--grid-step", "0.1", "--out", str(out))[0] == 4


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gatebudget", "decompose", "CNOT", "--json"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["canonical"][0] == pytest.approx(PI / 4)


@pytest.mark.parametrize("text, value", [("pi/4", PI / 4), ("3*pi/8", 3 * PI / 8), ("-pi", -PI), ("0.25", 0.25)])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value, abs=1e-15)


def test_resolve_gate_forms():
    assert np.allclose(resolve_gate("cnot"), resolve_gate("CNOT"))
    assert np.array_equal(resolve_gate("random:4"), resolve_gate("random:4"))
    assert np.allclose(resolve_gate("canonical:pi/4,pi/8,0"), resolve_gate("B"))
    with pytest.raises(InvalidGateSpec):
        resolve_gate("canonical:1,2,3,4")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matrix_file_roundtrip(tmp_path_factory, seed):
    u = haar_unitary(4, random_source(seed))
    path = tmp_path_factory.mktemp("m") / "u.json"
    write_matrix(path, u, "u")
    assert np.array_equal(read_matrix(path), u)


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_export_chamber_vertices(capsys, tmp_path):
    out = tmp_path / "grid.csv"
    code, doc = run_json(capsys, "export-chamber", "--grid-step", "0.05", "--out", str(out))
    assert code == 0
    rows = _read_csv(out)
    assert doc["rows"] == len(rows)
    by_point = {tuple(round(float(r[k]), 12) for k in ("c1", "c2", "c3")): r for r in rows}
    q = round(PI / 4, 12)
    origin, a, f = by_point[(0.0, 0.0, 0.0)], by_point[(q, 0.0, 0.0)], by_point[(q, q, q)]
    assert (origin["is_pe"], origin["corollary6"]) == ("false", "false")
    assert (a["is_pe"], a["corollary6"]) == ("true", "true")
    assert (f["is_pe"], f["corollary6"]) == ("false", "false")
    assert float(f["P"]) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("step, mirror", [(0.1, False), (0.07, False), (PI / 16, False), (0.1, True)])
def test_export_chamber_row_count(capsys, tmp_path, step, mirror):
    out = tmp_path / "grid.csv"
    argv = ["export-chamber", "--grid-step", str(step), "--out", str(out)] + (["--mirror"] if mirror else [])
    assert run(capsys, *argv)[0] == 0
    n = math.ceil(PI / 4 / step - 1e-9)
    if mirror:
        expected = sum((2 * j + 1) for i in range(n + 1) for j in range(i + 1))
    else:
        expected = math.comb(n + 3, 3)
    brute = sum(1 for i in range(n + 1) for j in range(i + 1) for k in range(-j if mirror else 0, j + 1))
    assert expected == brute
    assert len(_read_csv(out)) == expected
    h, pts = chamber_grid(step, mirror)
    assert h <= step and len(pts) == expected


def test_export_chamber_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "export-chamber", "--grid-step", "0.05", "--out", str(a))
    run(capsys, "export-chamber", "--grid-step", "0.05", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("step", ["0", "-0.1", "0.5"])
def test_export_chamber_bad_step(capsys, tmp_path, step):
    assert run(capsys, "export-chamber", "--grid-step", step, "--out", str(tmp_path / "x.csv"))[0] == 3
