import pytest

from raremut.config import SEED_ENV, ConfigError, from_dict, load_config

BASE = {
    "model": {"d": 1, "fitness": [2.0, 1.0]},
    "channels": [{"i": 0, "k": 1, "lambda": 0.5, "gamma": 0.5}],
    "solver": {"t_end": 2.0, "times": [0.5, 1.0, 3.0]},
    "monte_carlo": {"seed": 3, "x0": [0.4, 0.6]},
}


def make(**sections):
    raw = {k: dict(v) if isinstance(v, dict) else v for k, v in BASE.items()}
    raw.update(sections)
    return raw


def test_reference_config_loads(tmp_path):
    cfg = load_config("configs/reference.toml")
    p = cfg.two_species()
    assert (p.s, p.mf0, p.m1, p.gamma0) == (1.0, 0.5, 0.0, 0.5)
    assert cfg.mesh().n_nodes == 401
    assert cfg.monte_carlo.n_paths == 100_000 and cfg.resolve_seed() == 1


def test_rps_config_loads():
    cfg = load_config("configs/rps.toml")
    assert cfg.d == 2 and len(cfg.channels) == 3
    assert not cfg.model.is_constant


def test_times_are_clipped_and_end_included():
    cfg = from_dict(make())
    assert cfg.solve_times() == [0.5, 1.0, 2.0]
    assert cfg.mc_times() == [2.0]


@pytest.mark.parametrize(
    "patch,key",
    [
        ({"channels": [{"i": 0, "k": 2, "lambda": 0.5, "gamma": 0.5}]}, "channels[0].k"),
        ({"channels": [{"i": 0, "k": 1, "lambda": 0.5, "gamma": 1.5}]}, "channels[0]"),
        ({"channels": [{"i": 0, "k": 1, "lambda": 0.5}]}, "channels[0].gamma"),
        ({"channels": [{"i": 0, "k": 1, "lambda": 0.5, "gamma": 0.5, "rate": 1}]}, "channels[0].rate"),
        ({"model": {"d": 1, "fitness": [2.0]}}, "model.fitness"),
        ({"model": {"d": 1, "fitness": [2.0, -1.0]}}, "model.fitness"),
        ({"model": {"d": 1}}, "model.fitness"),
        ({"solver": {"dt": -1}}, "solver.dt"),
        ({"solver": {"times": [1.0, 0.5]}}, "solver.times"),
        ({"monte_carlo": {"x0": [0.5, 0.6]}}, "monte_carlo.x0"),
        ({"monte_carlo": {"seed": -4}}, "monte_carlo.seed"),
        ({"sweep": {"gammas": [0.0, 0.5]}}, "sweep.gammas"),
        ({"plots": {}}, "plots"),
    ],
)
def test_errors_name_the_key(patch, key):
    with pytest.raises(ConfigError) as info:
        from_dict(make(**patch))
    assert info.value.key == key
    assert str(info.value).startswith(key)


def test_empty_and_malformed_files(tmp_path):
    empty = tmp_path / "empty.toml"
    empty.write_text("\n")
    with pytest.raises(ConfigError, match="empty"):
        load_config(empty)
    bad = tmp_path / "bad.toml"
    bad.write_text("[model]\nd = 1\nfitness = [2.0, \n")
    with pytest.raises(ConfigError, match="line"):
        load_config(bad)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")


def test_overrides():
    cfg = from_dict(make()).with_overrides(t_end=1.5, n_paths=50, seed=9, out="elsewhere")
    assert cfg.solver.t_end == 1.5 and cfg.monte_carlo.n_paths == 50
    assert cfg.resolve_seed() == 9 and str(cfg.out_dir) == "elsewhere"
    with pytest.raises(ConfigError, match="--t-end"):
        from_dict(make()).with_overrides(t_end=0)
    with pytest.raises(ConfigError, match="--n-paths"):
        from_dict(make()).with_overrides(n_paths=1)


def test_seed_precedence(monkeypatch):
    monkeypatch.setenv(SEED_ENV, "77")
    cfg = from_dict(make())
    assert cfg.resolve_seed(5) == 5
    assert cfg.resolve_seed() == 3
    unseeded = from_dict(make(monte_carlo={}))
    assert unseeded.resolve_seed() == 77
    monkeypatch.setenv(SEED_ENV, "seven")
    with pytest.raises(ConfigError) as info:
        unseeded.resolve_seed()
    assert info.value.key == SEED_ENV
    monkeypatch.delenv(SEED_ENV)
    with pytest.raises(ConfigError, match="monte_carlo.seed"):
        unseeded.resolve_seed()


def test_default_initial_state_is_vertex_zero():
    cfg = from_dict(make(monte_carlo={}))
    assert list(cfg.x0().freqs) == [1.0, 0.0]


def test_two_species_rejects_payoff_and_higher_d():
    pay = from_dict({"model": {"d": 1, "payoff": [[1, 2], [3, 1]]}})
    with pytest.raises(ConfigError, match="model.payoff"):
        pay.two_species()
    three = from_dict({"model": {"d": 2, "fitness": [1, 1, 1]}})
    with pytest.raises(ConfigError, match="model.d"):
        three.two_species()
