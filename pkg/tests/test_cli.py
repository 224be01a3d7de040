import json
import subprocess
import sys

import pytest

from kstab.cli import random_grid, run, validate_output

M1 = {"curve": {"genus": 0, "degree_alpha": "2"}, "steps": [{"support": ["E0", "H_x"], "new_label": "E1"}]}
BLP2 = {"labels": ["H", "E"], "form": [["1", "0"], ["0", "-1"]], "test_curves": ["E", {"label": "H-E", "class": ["1", "-1"]}]}
P1_BETA = {
    "oracle": {"backend": "curve", "curve": {"genus": 0, "V": "2"}},
    "valuations": [{"label": "x", "A_X": "1", "r": "1"}],
    "xi": ["1"],
}


def call(tmp_path, command, doc, *extra):
    src = tmp_path / "in.json"
    src.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    out = tmp_path / "out.txt"
    code = run([command, str(src), "-o", str(out), *extra])
    text = out.read_text()
    return code, text


def call_json(tmp_path, command, doc, *extra):
    code, text = call(tmp_path, command, doc, *extra)
    result = json.loads(text)
    validate_output(command, result)
    return code, result


def test_invariants_fixture(tmp_path):
    code, out = call_json(tmp_path, "invariants", {"model": M1, "coeffs": ["1", "2"]})
    assert code == 0
    assert out["DF"]["exact"] == "0/1" and out["M_NA"]["exact"] == "0/1" and out["M_A"]["exact"] == "0/1"


def test_beta_fixture(tmp_path):
    code, out = call_json(tmp_path, "beta", P1_BETA)
    assert code == 0 and abs(out["beta"]) < 1e-5


def test_empty_input_is_exit_2(tmp_path):
    code, out = call_json(tmp_path, "beta", "")
    assert code == 2 and out["error"]["kind"] == "input"


def test_schema_violation_is_exit_2(tmp_path):
    code, out = call_json(tmp_path, "volume", {"lattice": BLP2, "class": ["1.5", "0"]})
    assert code == 2 and "schema" in out["error"]["detail"]


def test_module_input_errors_are_exit_2(tmp_path):
    bad = {"curve": {"genus": 0, "degree_alpha": "2"}, "steps": [{"support": ["E0"], "new_label": "E1"}]}
    assert call_json(tmp_path, "build-model", bad)[0] == 2
    assert call_json(tmp_path, "restricted-volume", {"lattice": BLP2, "class": ["1", "-2"], "curve": "E"})[0] == 2
    assert call_json(tmp_path, "volume", {"lattice": BLP2, "class": ["1"]})[0] == 2


def test_lattice_commands(tmp_path):
    code, out = call_json(tmp_path, "zariski", {"lattice": BLP2, "class": ["1", "1"]})
    assert code == 0 and out["positive"] == ["1/1", "0/1"] and out["negative"][0]["curve"] == "E"
    assert call_json(tmp_path, "volume", {"lattice": BLP2, "class": ["1", "-2"]})[1]["volume"] == "0/1"
    code, out = call_json(tmp_path, "restricted-volume", {"lattice": BLP2, "class": ["2", "-1"], "curve": 0})
    assert out["restricted_volume"] == "1/1"


def test_model_commands(tmp_path):
    code, out = call_json(tmp_path, "build-model", M1)
    assert code == 0 and out["points"][1]["log_disc_XP1"] == "2/1"
    doc = {"model": M1, "coeffs": ["1", "0"]}
    assert call_json(tmp_path, "envelope", doc)[1]["values"] == ["1/1", "0/1"]
    ma = call_json(tmp_path, "ma-measure", doc)[1]
    assert [a["mass"] for a in ma["atoms"]] == ["1/2", "1/2"] and ma["entropy"] == "1/2"
    assert call_json(tmp_path, "orthogonality", doc)[1]["orthogonality_defect"] == "0/1"


def test_solve_ma(tmp_path):
    code, out = call_json(tmp_path, "solve-ma", {"model": M1, "xi": ["1/2", "1/2"]})
    assert code == 0 and [a["mass"] for a in out["measure"]["atoms"]] == ["1/2", "1/2"]


def test_identity_violation_is_exit_4(tmp_path, monkeypatch):
    import kstab.cli as cli

    monkeypatch.setattr(cli, "orthogonality_defect", lambda D: 1)
    code, out = call_json(tmp_path, "orthogonality", {"model": M1, "coeffs": ["1", "0"]})
    assert code == 4 and out["error"]["kind"] == "identity"


def test_nonconvergence_is_exit_3(tmp_path):
    doc = dict(P1_BETA, valuations=[{"label": "x"}, {"label": "y"}], xi=["1/3", "2/3"], opt={"max_iters": 1, "tol": 1e-14})
    code, out = call_json(tmp_path, "beta", doc)
    assert code == 3 and out["error"]["kind"] == "numeric"


SCAN = {
    "problem": {"oracle": {"backend": "curve", "curve": {"genus": 1, "V": "1"}}, "valuations": [{"label": "x"}, {"label": "y"}]},
    "grid": [["1/4", "3/4"], ["1/2", "1/2"]],
}


def test_scan_json_and_csv(tmp_path):
    code, out = call_json(tmp_path, "stability-scan", SCAN)
    assert code == 0 and out["min_ratio"] > 0 and len(out["rows"]) == 2
    code, text = call(tmp_path, "stability-scan", SCAN, "--format", "csv")
    lines = text.strip().splitlines()
    assert code == 0 and lines[0].startswith("xi_0,xi_1,beta") and len(lines) == 3


def test_csv_only_for_scans(tmp_path):
    assert call_json(tmp_path, "beta", P1_BETA, "--format", "csv")[0] == 2


def test_random_grid_is_seeded(tmp_path):
    doc = dict(SCAN, grid={"random": 3, "denominator": 50})
    a = call(tmp_path, "stability-scan", doc, "--seed", "7")[1]
    b = call(tmp_path, "stability-scan", doc, "--seed", "7")[1]
    c = call(tmp_path, "stability-scan", doc, "--seed", "8")[1]
    assert a == b and a != c
    for xi in random_grid(3, 20, seed=1):
        assert sum(xi) == 1 and all(x > 0 for x in xi)


def test_empty_grid(tmp_path):
    assert call_json(tmp_path, "stability-scan", dict(SCAN, grid=[]))[0] == 2


def test_tol_override(tmp_path):
    code, out = call_json(tmp_path, "beta", P1_BETA, "--tol", "1e-9")
    assert code == 0


def test_deterministic_bytes(tmp_path):
    doc = {"model": M1, "coeffs": ["3", "-1"]}
    assert call(tmp_path, "invariants", doc)[1] == call(tmp_path, "invariants", doc)[1]


def test_console_script_and_stdin():
    proc = subprocess.run(
        [sys.executable, "-m", "kstab.cli", "volume", "-"],
        input=json.dumps({"lattice": BLP2, "class": ["1", "1"]}),
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["volume"] == "1/1"


def test_unknown_command_rejected():
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate", "x.json"])
    assert exc.value.code == 2
