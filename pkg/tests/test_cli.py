import json
import math
import subprocess
import sys

import numpy as np
import pytest

from raremut import io
from raremut.cli import main
from raremut.fitness import FitnessModel
from raremut.flow import replicator_trajectory
from raremut.simplex import ReducedState
from raremut.two_species import TwoSpeciesParams, solution_Z

REFERENCE_MODEL = """
[model]
d = 1
fitness = [2.0, 1.0]
"""


def write(tmp_path, body, name="cfg.toml", out="out"):
    path = tmp_path / name
    path.write_text(body + f'\n[output]\ndir = "{tmp_path / out}"\n')
    return path


def channel(i, k, lam, gamma):
    return f"\n[[channels]]\ni = {i}\nk = {k}\nlambda = {lam}\ngamma = {gamma}\n"


SIM = (
    REFERENCE_MODEL
    + channel(0, 1, 0.5, 0.5)
    + """
[solver]
t_end = 2.0
[monte_carlo]
n_paths = 400
seed = 11
times = [0.5, 1.0]
x0 = [0.5, 0.5]
"""
)


def test_simulate_is_byte_identical_across_runs_and_threads(tmp_path, capsys):
    cfg = write(tmp_path, SIM)
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "c"), "--threads", "2"]) == 0
    for name in ("path.csv", "mc.csv"):
        ref = (tmp_path / "a" / name).read_bytes()
        assert (tmp_path / "b" / name).read_bytes() == ref
        assert (tmp_path / "c" / name).read_bytes() == ref
    header, mc = io.read_csv(tmp_path / "a" / "mc.csv")
    assert header[:3] == ["time", "mean_0", "mean_1"]
    assert list(mc[:, 0]) == [0.5, 1.0, 2.0]
    assert "seed 11" in capsys.readouterr().out


def test_simulate_seed_flag_and_env(tmp_path, monkeypatch, capsys):
    body = SIM.replace("seed = 11\n", "")
    cfg = write(tmp_path, body)
    monkeypatch.delenv("RAREMUT_SEED", raising=False)
    assert main(["simulate", str(cfg)]) == 2
    assert "monte_carlo.seed" in capsys.readouterr().err
    monkeypatch.setenv("RAREMUT_SEED", "11")
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "env")]) == 0
    assert main(["simulate", write(tmp_path, SIM, "s.toml").as_posix(), "--out", str(tmp_path / "cfg")]) == 0
    assert (tmp_path / "env" / "mc.csv").read_bytes() == (tmp_path / "cfg" / "mc.csv").read_bytes()
    assert main(["simulate", str(cfg), "--seed", "12", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "mc.csv").read_bytes() != (tmp_path / "cfg" / "mc.csv").read_bytes()


def test_simulate_without_channels_follows_replicator(tmp_path):
    body = REFERENCE_MODEL + "\n[solver]\nt_end = 3.0\n[monte_carlo]\nn_paths = 5\nseed = 2\ntimes = [1.0]\nx0 = [0.8, 0.2]\n"
    assert main(["simulate", str(write(tmp_path, body))]) == 0
    _, mc = io.read_csv(tmp_path / "out" / "mc.csv")
    ref = replicator_trajectory(FitnessModel.from_constant([2.0, 1.0]), ReducedState([0.2]), [1.0, 3.0])
    np.testing.assert_allclose(mc[:, 2], np.ravel(ref), atol=1e-12)
    np.testing.assert_allclose(mc[:, 4], 0.0, atol=1e-15)


def test_solve_gamma_one_matches_Z(tmp_path, capsys):
    body = REFERENCE_MODEL + channel(0, 1, 0.25, 1.0) + "\n[solver]\nt_end = 2.0\ntimes = [0.5, 1.0, 2.0]\n"
    assert main(["solve", str(write(tmp_path, body))]) == 0
    header, u = io.read_csv(tmp_path / "out" / "u.csv")
    assert header == ["t", "x_1", "u"]
    p = TwoSpeciesParams.from_mutation(2.0, 1.0, m0=0.25, gamma0=1.0)
    assert p.mf0 == 0.5
    at0 = u[u[:, 0] == 0.0]
    np.testing.assert_array_equal(at0[:, 2], at0[:, 1])
    for t in (0.5, 1.0, 2.0):
        rows = u[u[:, 0] == t]
        assert len(rows) == 401
        assert np.abs(rows[:, 2] - solution_Z(p, rows[:, 1], t)).max() <= 5e-3
    assert (tmp_path / "out" / "plot_u.py").exists()
    assert "sup u=" in capsys.readouterr().out


def test_solve_fair_mutation_decays(tmp_path):
    body = REFERENCE_MODEL + channel(1, 0, 0.5, 1.0) + "\n[solver]\nt_end = 12.0\ndt = 1e-2\n"
    assert main(["solve", str(write(tmp_path, body))]) == 0
    _, u = io.read_csv(tmp_path / "out" / "u.csv")
    assert u[u[:, 0] == 12.0][:, 2].max() <= 1e-2


def test_solve_triangle_and_rejects_d3(tmp_path, capsys):
    assert main(["solve", "configs/rps.toml", "--out", str(tmp_path / "rps"), "--t-end", "0.5"]) == 0
    header, _ = io.read_csv(tmp_path / "rps" / "u.csv")
    assert header == ["t", "x_1", "x_2", "u"]
    body = "[model]\nd = 3\nfitness = [1, 1, 1, 1]\n"
    assert main(["solve", str(write(tmp_path, body))]) == 2
    assert "model.d" in capsys.readouterr().err


SWEEP = (
    """
[model]
d = 1
fitness = [3.0, 1.0]
"""
    + channel(0, 1, 2.0 / 3.0, 0.5)
    + """
[solver]
dt = 2e-3
nodes = 201
[sweep]
gammas = [0.2, 0.5, 0.8, 1.0]
x_probe = 0.3
t_probe = 1.0
ubar_gammas = [0.5]
horizon = 2.0
"""
)


def test_sweep_outputs(tmp_path, capsys):
    assert main(["sweep", str(write(tmp_path, SWEEP))]) == 0
    text = capsys.readouterr().out
    g = float(text.split("gamma* = ")[1].split()[0])
    assert abs(g - 0.7968121300) <= 1e-6
    assert "[0.500000, 1]" in text
    header, rows = io.read_csv(tmp_path / "out" / "sweep.csv")
    assert header[:4] == ["gamma", "x_probe", "t_probe", "u_gamma"]
    assert np.all(np.diff(rows[:, 3]) >= -1e-4)
    _, eq = io.read_csv(tmp_path / "out" / "equilibrium.csv")
    assert eq[0, 0] == 0.5 and math.isnan(eq[0, 1])
    assert eq[0, 3] == pytest.approx(0.7968121300, abs=1e-9)
    assert (tmp_path / "out" / "plot_ubar.py").exists()


def test_single_gamma_sweep_equals_single_solve(tmp_path):
    body = SWEEP.replace("[0.2, 0.5, 0.8, 1.0]", "[0.5]").replace("gamma = 0.5", "gamma = 0.5")
    assert main(["sweep", str(write(tmp_path, body))]) == 0
    _, sweep = io.read_csv(tmp_path / "out" / "sweep.csv")
    solve_body = body.replace("nodes = 201", "nodes = 201\nt_end = 1.0")
    assert main(["solve", str(write(tmp_path, solve_body, "s.toml", "solved"))]) == 0
    _, u = io.read_csv(tmp_path / "solved" / "u.csv")
    final = u[u[:, 0] == 1.0]
    assert sweep[0, 3] == pytest.approx(np.interp(0.3, final[:, 1], final[:, 2]), abs=1e-12)


@pytest.mark.parametrize(
    "chan,needle",
    [(channel(1, 0, 0.2, 0.5), "m1 = 0"), (channel(0, 1, 2.0, 0.5), "m0 f0 < s")],
)
def test_sweep_regime_checked_before_work(tmp_path, capsys, chan, needle):
    body = SWEEP.replace(channel(0, 1, 2.0 / 3.0, 0.5), channel(0, 1, 2.0 / 3.0, 0.5) + chan)
    if needle == "m0 f0 < s":
        body = SWEEP.replace(channel(0, 1, 2.0 / 3.0, 0.5), chan)
    assert main(["sweep", str(write(tmp_path, body))]) == 2
    assert needle in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_validate_paths(tmp_path, capsys):
    empty = tmp_path / "empty.toml"
    empty.write_text("")
    assert main(["validate", str(empty)]) == 2
    assert "empty" in capsys.readouterr().err

    assert main(["validate", "--criteria", "6", "--out", str(tmp_path / "ok")]) == 0
    report = json.loads((tmp_path / "ok" / "validate.json").read_text())
    assert report["passed"] and report["criteria"][0]["number"] == 6

    assert main(["validate", "--criteria", "1", "--tolerance-scale", "0", "--out", str(tmp_path / "neg")]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out
    report = json.loads((tmp_path / "neg" / "validate.json").read_text())
    assert not report["passed"] and report["criteria"][0]["passed"] is False

    assert main(["validate", "--criteria", "99"]) == 2
    assert "--criteria" in capsys.readouterr().err


def test_validate_takes_seed_from_config(tmp_path):
    cfg = write(tmp_path, SIM)
    assert main(["validate", str(cfg), "--criteria", "6"]) == 0
    assert json.loads((tmp_path / "out" / "validate.json").read_text())["seed"] == 11


def test_console_script_help():
    res = subprocess.run([sys.executable, "-m", "raremut.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("simulate", "solve", "sweep", "validate"):
        assert cmd in res.stdout
    res = subprocess.run([sys.executable, "-m", "raremut.cli", "simulate"], capture_output=True, text=True)
    assert res.returncode == 2
