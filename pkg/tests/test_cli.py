import csv
import io
import json
import subprocess
import sys

import pytest

from wartruce import serialize as ser
from wartruce.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_simulate_aggregate_reaches_peace(capsys):
    code, out, err = run(capsys, "simulate", "--p0", "0.9", "--e", "0")
    assert code == 0
    assert out.splitlines()[0] == "t,pbar"
    assert "attractor: peace (1)" in err
    assert float(out.splitlines()[-1].split(",")[1]) > 1 - 1e-3


def test_simulate_two_point_density_collapses_to_conflict(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "e": 3.0,
        "dynamics": {"mode": "density", "initial_density": {"kind": "two_point"}},
        "integration": {"t_end": 100.0},
    })
    out_path = tmp_path / "traj.csv"
    code, out, _ = run(capsys, "simulate", "--config", cfg, "--out", str(out_path))
    assert code == 0
    assert "attractor: conflict (0)" in out
    traj = ser.trajectory_from_csv(out_path.read_text())
    assert traj.is_density and traj.final_pbar < 1e-3


def test_invalid_payoffs_exit_2_naming_field(tmp_path, capsys):
    cfg = write_config(tmp_path, {"payoffs": {"R": 1, "V": 3}})
    code, out, err = run(capsys, "simulate", "--config", cfg)
    assert code == 2 and out == ""
    assert "payoffs.R" in err and "R > V" in err


@pytest.mark.parametrize("doc,field", [
    ({"payoffs": {"S": 2}}, "payoffs.P"),
    ({"commander": {"c": 0}}, "commander.c"),
    ({"commander": {"beta": -1}}, "commander.beta"),
    ({"commander": {"alpha": -1}}, "commander.alpha"),
    ({"e": -0.5}, "e"),
    ({"integration": {"dt": 0}}, "integration.dt"),
    ({"integration": {"t_end": -1}}, "integration.t_end"),
    ({"dynamics": {"p0": 1.5}}, "dynamics.p0"),
    ({"dynamics": {"initial_density": {"sigma": 0}}}, "dynamics.initial_density.sigma"),
    ({"dynamics": {"grid": {"n": 2}}}, "dynamics.grid.n"),
    ({"sweep": {"parameter": "gamma"}}, "sweep.parameter"),
    ({"output": {"format": "xml"}}, "output.format"),
    ({"payoff": {}}, "payoff"),
])
def test_each_invariant_has_its_own_message(tmp_path, capsys, doc, field):
    code, _, err = run(capsys, "stackelberg", "--config", write_config(tmp_path, doc))
    assert code == 2
    assert f"invalid configuration: {field}:" in err


def test_missing_config_file_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "policy", "--config", str(tmp_path / "nope.json"))
    assert code == 2 and "--config" in err


def test_numeric_failure_exits_3(tmp_path, capsys):
    # a unit step breaks the density stability guard
    cfg = write_config(tmp_path, {"dynamics": {"mode": "density"}, "integration": {"dt": 1.0, "t_end": 5.0}})
    code, _, err = run(capsys, "simulate", "--config", cfg)
    assert code == 3 and "numerical error" in err


def test_bifurcate_emits_closed_form_rows(capsys):
    code, out, _ = run(capsys, "bifurcate", "--from", "0", "--to", "3", "--steps", "301")
    assert code == 0
    table = rows(out)
    interior = [r for r in table if r["branch"] == "interior"]
    assert all(float(r["e"]) < 2 for r in interior)
    assert len(interior) == 200
    assert float(interior[0]["pstar"]) == 1 / 3
    assert all(r["stability"] == "stable" for r in table if r["branch"] == "conflict")
    assert len([r for r in table if r["branch"] == "conflict"]) == 301


def test_bifurcate_rejects_other_parameters(capsys):
    code, _, err = run(capsys, "bifurcate", "--param", "alpha")
    assert code == 2 and "sweep.parameter" in err


@pytest.mark.parametrize("alpha,case", [("0.2", "Case1_StablePeaceLowEnforcement"),
                                        ("1", "Case3_TransitionToConflict")])
def test_stackelberg_json(capsys, alpha, case):
    code, out, _ = run(capsys, "stackelberg", "--alpha", alpha, "--beta", "1", "--c", "1")
    assert code == 0
    assert json.loads(out)["case"] == case


def test_stackelberg_case4(capsys):
    code, out, _ = run(capsys, "stackelberg", "--alpha", "0.1", "--beta", "3", "--c", "1")
    doc = json.loads(out)
    assert (doc["regime"], doc["e_star"], doc["U_c"]) == ("Conflict", 3.0, pytest.approx(4.6))


def test_policy_csv(capsys):
    code, out, _ = run(capsys, "policy", "--alpha", "1", "--beta", "1", "--c", "1")
    assert code == 0
    table = {r["lever"]: r for r in rows(out)}
    assert list(table) == ["Alpha", "Beta", "C", "ThresholdRV"]
    assert float(table["Alpha"]["critical"]) == pytest.approx(0.5)
    assert float(table["ThresholdRV"]["critical"]) == pytest.approx(1 + 2 ** 0.5)


def test_sweep_alpha_flips_once_at_half(capsys):
    code, out, _ = run(capsys, "sweep", "--param", "alpha", "--from", "0", "--to", "1", "--steps", "101",
                       "--beta", "1", "--c", "1")
    assert code == 0
    table = rows(out)
    regimes = [r["stackelberg_regime"] for r in table]
    flips = [i for i in range(1, len(regimes)) if regimes[i] != regimes[i - 1]]
    assert len(flips) == 1 and regimes[0] == "Peace"
    assert float(table[flips[0]]["alpha"]) == pytest.approx(0.5, abs=0.01 + 1e-12)


def test_sweep_e_partitions_regimes_at_two(capsys):
    code, out, _ = run(capsys, "sweep", "--param", "e", "--from", "0", "--to", "3", "--steps", "31")
    for r in rows(out):
        e = float(r["e"])
        expected = "Bistable" if e < 2 else "Threshold" if e == 2 else "MonostableConflict"
        assert r["regime"] == expected


def test_sweep_p0_attractor_flips_at_half(tmp_path, capsys):
    cfg = write_config(tmp_path, {"e": 0.5, "integration": {"t_end": 500.0},
                                  "sweep": {"parameter": "p0", "start": 0, "stop": 1, "steps": 51,
                                            "summary": ["attractor", "final_pbar"]}})
    code, out, _ = run(capsys, "sweep", "--config", cfg)
    assert code == 0
    for r in rows(out):
        p0 = float(r["p0"])
        if p0 < 0.5:
            assert r["attractor"] == "conflict (0)"
        elif p0 > 0.5:
            assert r["attractor"] == "peace (1)"


def test_sweep_validates_each_point(capsys):
    code, _, err = run(capsys, "sweep", "--param", "V", "--from", "0", "--to", "5", "--steps", "6")
    assert code == 2 and "sweep.V=3.0" in err


@pytest.mark.parametrize("argv", [
    ["simulate", "--mode", "density", "--e", "0.3"],
    ["bifurcate", "--format", "json"],
    ["stackelberg", "--format", "csv"],
    ["policy", "--format", "json"],
    ["sweep", "--param", "c", "--from", "0.5", "--to", "3", "--steps", "11"],
])
def test_repeated_runs_are_byte_identical(tmp_path, capsys, argv):
    outputs = []
    for i in range(2):
        path = tmp_path / f"out{i}"
        assert main(argv + ["--out", str(path)]) == 0
        outputs.append(path.read_bytes())
    capsys.readouterr()
    assert outputs[0] == outputs[1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "wartruce", "stackelberg", "--alpha", "0.2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["regime"] == "Peace"
