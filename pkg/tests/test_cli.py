import json
import subprocess
import sys
from fractions import Fraction

import pytest

from dualdeg.boolfn import Convention, gen_named
from dualdeg.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, run_command
from dualdeg.dist import Distribution
from dualdeg.polylib import CubeFn


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(argv, capsys):
    code = run_command([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture
def files(tmp_path):
    return {
        "parity3": write(tmp_path / "parity3.json", gen_named("XOR", 3).to_json()),
        "xor2": write(tmp_path / "xor2.json", gen_named("XOR", 2).to_json()),
        "xor2pm": write(tmp_path / "xor2pm.json",
                        gen_named("XOR", 2, convention=Convention.PLUS_MINUS).to_json()),
        "dir": tmp_path,
    }


def test_degree_threshold(files, capsys):
    code, rep = run(["degree", "--fn", files["parity3"], "--measure", "threshold"], capsys)
    assert code == EXIT_OK
    assert rep["degree"] == 3 and rep["measure"] == "THRESHOLD"
    assert rep["seed"] == 2024 and "timestamp" in rep


def test_degree_approx_needs_eps(files, capsys):
    code, _ = run(["degree", "--fn", files["xor2"]], capsys)
    assert code == EXIT_USAGE
    code, rep = run(["degree", "--fn", files["xor2"], "--eps", "1/3"], capsys)
    assert code == EXIT_OK and rep["degree"] == 2 and rep["eps"] == "1/3"


def test_witness_verify_and_tamper(files, capsys):
    d = files["dir"]
    code, rep = run(["witness", "--fn", files["xor2"], "--eps", "1/3",
                     "--emit", d / "w.json"], capsys)
    assert code == EXIT_OK and rep["degree"] == 1 and rep["dual_value"] == "1/2"
    argv = ["verify", "--fn", files["xor2"], "--kind", "approx", "--degree", 1, "--eps", "1/3"]
    code, rep = run(argv + ["--witness", d / "w.json"], capsys)
    assert code == EXIT_OK and rep["verdict"] == "PASS"
    psi = CubeFn.from_json(json.loads((d / "w.json").read_text())["psi"])
    tampered = psi + CubeFn.from_dict(2, {"00": Fraction(1, 16)})
    code, rep = run(argv + ["--witness", write(d / "t.json", tampered.to_json())], capsys)
    assert code == EXIT_FAILED and rep["verdict"] == "FAIL"


def test_amplify(files, capsys):
    d = files["dir"]
    run(["witness", "--fn", files["xor2"], "--eps", "49/100", "--emit", d / "mu.json"], capsys)
    code, rep = run(["amplify", "--fn", files["xor2"], "--witness", d / "mu.json", "--n", 4,
                     "--eps", "3/4", "--eps2", "49/100", "--mode", "gapmaj"], capsys)
    assert code == EXIT_OK
    assert rep["certificate"]["accepted"] and rep["certificate"]["upp_dt_at_least"] == 2


def test_pattern(files, capsys):
    d = files["dir"]
    code, rep = run(["pattern", "--fn", files["xor2pm"], "--N", 4, "--csv", d / "m.csv",
                     "--labels", d / "l.json"], capsys)
    assert code == EXIT_OK and rep["shape"] == [16, 16] and rep["dense"]
    assert len((d / "m.csv").read_text().split()) == 16
    assert len(json.loads((d / "l.json").read_text())["columns"]) == 16


def test_dist_commands(files, capsys):
    d = files["dir"]
    p = write(d / "p.json", Distribution.uniform(("0", "1")).to_json())
    q = write(d / "q.json", Distribution.point("0", ("0", "1")).to_json())
    code, rep = run(["dist", "m2", "--p", p, "--q", q], capsys)
    assert code == EXIT_OK and rep["accept"] == "9/16"
    code, rep = run(["dist", "metrics", "--p", p, "--q", q], capsys)
    assert rep["tvd"] == "1/2" and rep["l2sq"] == "1/2"
    code, rep = run(["dist", "postselect", "--p", p, "--q", q], capsys)
    assert rep["posterior"]["mass"]["111"] == "2/7"


@pytest.mark.parametrize("argv", [
    ["degree", "--bogus"],
    ["nosuchcommand"],
    ["degree", "--fn", "/nonexistent.json", "--measure", "threshold"],
    ["degree", "--measure", "threshold"],
    ["suite", "--only", "99"],
    ["suite", "--only", "x"],
])
def test_usage_errors(argv, capsys):
    assert run_command(argv) == EXIT_USAGE


def test_library_error_is_usage(files, capsys):
    # eps outside [0, 1/2) for a 0/1 function
    code, _ = run(["degree", "--fn", files["xor2"], "--eps", "3/4"], capsys)
    assert code == EXIT_USAGE


@pytest.mark.parametrize("obj", [
    {"arity": 2, "entries": [3]},
    {"entries": []},
    [1, 2],
    {"arity": 2, "entries": [{"point": "00"}]},
])
def test_malformed_function_is_usage(files, obj, capsys):
    path = write(files["dir"] / "bad.json", obj)
    code, _ = run(["degree", "--fn", path, "--eps", "1/3"], capsys)
    assert code == EXIT_USAGE


def test_entries_shorthand(files, capsys):
    obj = {"arity": 2, "entries": {"00": 0, "10": 1, "01": 1, "11": 0}}
    path = write(files["dir"] / "short.json", obj)
    code, rep = run(["degree", "--fn", path, "--eps", "1/3"], capsys)
    assert code == EXIT_OK and rep["degree"] == 2


def test_deterministic_reports(files, capsys):
    d = files["dir"]
    argv = ["witness", "--fn", files["parity3"], "--eps", "1/3"]
    run(argv + ["--emit", d / "a.json"], capsys)
    run(argv + ["--emit", d / "b.json"], capsys)
    a = json.loads((d / "a.json").read_text())
    b = json.loads((d / "b.json").read_text())
    assert a.pop("timestamp") and b.pop("timestamp")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_config_env_and_seed_override(files, capsys, monkeypatch):
    cfg = write(files["dir"] / "cfg.json", {"seed": 7})
    monkeypatch.setenv("DUALDEG_CONFIG", cfg)
    code, rep = run(["degree", "--fn", files["parity3"], "--measure", "threshold"], capsys)
    assert rep["seed"] == 7
    code, rep = run(["degree", "--fn", files["parity3"], "--measure", "threshold",
                     "--seed", 11], capsys)
    assert rep["seed"] == 11
    bad = write(files["dir"] / "bad.json", {"seeed": 7})
    monkeypatch.setenv("DUALDEG_CONFIG", bad)
    assert run_command(["degree", "--fn", files["parity3"], "--measure", "threshold"]) == EXIT_USAGE


def test_suite_subset(capsys):
    code, rep = run(["suite", "--only", "9,10"], capsys)
    assert code == EXIT_OK
    assert rep["passed"] == rep["total"] == 2
    assert [c["number"] for c in rep["criteria"]] == [9, 10]


def test_suite_failure_exit_code(capsys):
    code, rep = run(["suite", "--only", "8"], capsys)
    assert code == EXIT_FAILED and rep["passed"] == 0


def test_console_script_entry_point(files):
    out = subprocess.run([sys.executable, "-m", "dualdeg.cli", "degree", "--fn", files["parity3"],
                          "--measure", "threshold"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["degree"] == 3
    out = subprocess.run([sys.executable, "-m", "dualdeg.cli", "--help"], capture_output=True,
                         text=True)
    assert out.returncode == 0 and "suite" in out.stdout
