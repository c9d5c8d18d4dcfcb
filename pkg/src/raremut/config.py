"""Experiment configuration read from a TOML file.

    [model]        d, and either fitness = [f_0, ..., f_d] or payoff = [[...], ...]
    [[channels]]   i, k, lambda, gamma           (any number, including none)
    [solver]       dt, t_end, nodes, times, picard_tol, picard_max_iter
    [monte_carlo]  n_paths, seed, times, x0, path_index
    [sweep]        gammas, x_probe, t_probe, ubar_gammas, horizon, tol
    [output]       dir

Every value is re-validated by the module that consumes it; errors are
reported as :class:`ConfigError` naming the offending key.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .fitness import FitnessModel, intensity_bound
from .kolmogorov import SolverConfig
from .mesh import Mesh
from .simplex import MutationChannel, SimplexState
from .two_species import TwoSpeciesParams

SEED_ENV = "RAREMUT_SEED"

_KEYS = {
    "model": {"d", "fitness", "payoff"},
    "channels": {"i", "k", "lambda", "gamma"},
    "solver": {"dt", "t_end", "nodes", "times", "picard_tol", "picard_max_iter"},
    "monte_carlo": {"n_paths", "seed", "times", "x0", "path_index"},
    "sweep": {"gammas", "x_probe", "t_probe", "ubar_gammas", "horizon", "tol"},
    "output": {"dir"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted name of the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class SolverSection:
    dt: float = 1e-3
    t_end: float = 1.0
    nodes: int | None = None  # d = 1: node count; d = 2: subdivisions per side
    times: list | None = None
    picard_tol: float = 1e-10
    picard_max_iter: int = 200


@dataclass
class MonteCarloSection:
    n_paths: int = 10_000
    seed: int | None = None
    times: list | None = None
    x0: list | None = None
    path_index: int = 0


@dataclass
class SweepSection:
    gammas: list = field(default_factory=lambda: [round(0.1 * k, 1) for k in range(1, 11)])
    x_probe: float = 0.3
    t_probe: float = 2.0
    ubar_gammas: list = field(default_factory=lambda: [0.05, 0.5, 0.95])
    horizon: float = 600.0
    tol: float = 1e-4


@dataclass
class ExperimentConfig:
    model: FitnessModel
    channels: list
    solver: SolverSection = field(default_factory=SolverSection)
    monte_carlo: MonteCarloSection = field(default_factory=MonteCarloSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    out_dir: Path = Path("out")
    source: str = "<dict>"

    @property
    def d(self) -> int:
        return self.model.d

    def solver_config(self) -> SolverConfig:
        s = self.solver
        return SolverConfig(dt=s.dt, t_end=s.t_end, picard_tol=s.picard_tol, picard_max_iter=s.picard_max_iter)

    def mesh(self) -> Mesh:
        n = self.solver.nodes
        if self.d == 1:
            return Mesh.uniform_interval(n or 401)
        if self.d == 2:
            return Mesh.triangle(n or 40)
        raise ConfigError("model.d", f"the solver covers d = 1 and d = 2, got d = {self.d}")

    def solve_times(self) -> list:
        return _clip_times(self.solver.times, self.solver.t_end)

    def mc_times(self) -> list:
        return _clip_times(self.monte_carlo.times, self.solver.t_end)

    def x0(self) -> SimplexState:
        x0 = self.monte_carlo.x0
        if x0 is None:
            return SimplexState.vertex(0, self.d)
        try:
            return SimplexState(x0)
        except ValueError as exc:
            raise ConfigError("monte_carlo.x0", str(exc)) from None

    def resolve_seed(self, override: int | None = None) -> int:
        """``--seed`` beats ``monte_carlo.seed`` beats the environment."""
        if override is not None:
            return override
        if self.monte_carlo.seed is not None:
            return self.monte_carlo.seed
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise ConfigError(SEED_ENV, f"not an integer: {env!r}") from None
            if not 0 <= seed < 2**64:
                raise ConfigError(SEED_ENV, "must lie in [0, 2**64)")
            return seed
        raise ConfigError("monte_carlo.seed", f"missing; set it, pass --seed, or export {SEED_ENV}")

    def two_species(self) -> TwoSpeciesParams:
        """The two-species parameters behind a ``d = 1`` constant-fitness config."""
        if self.d != 1:
            raise ConfigError("model.d", "two-species commands need d = 1")
        if not self.model.is_constant:
            raise ConfigError("model.payoff", "two-species commands need constant fitness")
        f0, f1 = (float(v) for v in self.model.constant)
        kw = {}
        for n, c in enumerate(self.channels):
            tag = "0" if c.ancestor == 0 else "1"
            if f"lambda{tag}" in kw:
                raise ConfigError(f"channels[{n}]", f"duplicate channel {c.ancestor}->{c.descendant}")
            kw[f"lambda{tag}"] = c.rate
            kw[f"gamma{tag}"] = c.fraction
        try:
            return TwoSpeciesParams(f0, f1, **kw)
        except ValueError as exc:
            raise ConfigError("model.fitness", str(exc)) from None

    def with_overrides(self, t_end=None, n_paths=None, seed=None, out=None) -> ExperimentConfig:
        cfg = self
        if t_end is not None:
            if not t_end > 0:
                raise ConfigError("--t-end", "must be positive")
            cfg = replace(cfg, solver=replace(cfg.solver, t_end=float(t_end)))
        if n_paths is not None:
            if n_paths < 2:
                raise ConfigError("--n-paths", "must be at least 2")
            cfg = replace(cfg, monte_carlo=replace(cfg.monte_carlo, n_paths=int(n_paths)))
        if seed is not None:
            if not 0 <= seed < 2**64:
                raise ConfigError("--seed", "must lie in [0, 2**64)")
            cfg = replace(cfg, monte_carlo=replace(cfg.monte_carlo, seed=int(seed)))
        if out is not None:
            cfg = replace(cfg, out_dir=Path(out))
        return cfg


def _clip_times(times, t_end) -> list:
    """Snapshot times up to ``t_end``, always including ``t_end`` itself."""
    times = [] if times is None else [float(t) for t in times]
    return sorted({t for t in times if t <= t_end} | {float(t_end)})


def _number(sec: dict, name: str, key: str, default=None, integer=False, positive=False, minimum=None):
    if key not in sec:
        return default
    v = sec[key]
    dotted = f"{name}.{key}"
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(dotted, f"expected a number, got {v!r}")
    if integer and not isinstance(v, int):
        raise ConfigError(dotted, f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(dotted, "must be finite")
    if positive and not v > 0:
        raise ConfigError(dotted, f"must be positive, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(dotted, f"must be >= {minimum}, got {v!r}")
    return v


def _number_list(sec: dict, name: str, key: str, default=None, lo=None, hi=None, sorted_=False):
    if key not in sec:
        return default
    v = sec[key]
    dotted = f"{name}.{key}"
    if not isinstance(v, list) or not v:
        raise ConfigError(dotted, "expected a non-empty list of numbers")
    for e in v:
        if isinstance(e, bool) or not isinstance(e, (int, float)) or not math.isfinite(e):
            raise ConfigError(dotted, f"expected numbers, got {e!r}")
        if lo is not None and not lo(e):
            raise ConfigError(dotted, f"value {e!r} out of range")
        if hi is not None and not hi(e):
            raise ConfigError(dotted, f"value {e!r} out of range")
    if sorted_ and list(v) != sorted(v):
        raise ConfigError(dotted, "must be sorted ascending")
    return [float(e) for e in v]


def _table(raw: dict, name: str) -> dict:
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(name, "expected a table")
    unknown = set(sec) - _KEYS[name]
    if unknown:
        raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown key")
    return sec


def from_dict(raw: dict, source: str = "<dict>") -> ExperimentConfig:
    if not raw:
        raise ConfigError("<config>", "empty configuration")
    unknown = set(raw) - set(_KEYS)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    if "model" not in raw:
        raise ConfigError("model", "missing section")

    msec = _table(raw, "model")
    d = _number(msec, "model", "d", integer=True, minimum=1)
    if d is None:
        raise ConfigError("model.d", "missing")
    if ("fitness" in msec) == ("payoff" in msec):
        raise ConfigError("model.fitness", "give exactly one of model.fitness and model.payoff")
    try:
        if "fitness" in msec:
            f = msec["fitness"]
            if not isinstance(f, list) or len(f) != d + 1:
                raise ConfigError("model.fitness", f"expected a list of d + 1 = {d + 1} numbers")
            model = FitnessModel.from_constant(f)
        else:
            A = msec["payoff"]
            if not isinstance(A, list) or len(A) != d + 1 or any(not isinstance(r, list) or len(r) != d + 1 for r in A):
                raise ConfigError("model.payoff", f"expected a {d + 1} x {d + 1} matrix")
            model = FitnessModel.from_payoff(A)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        key = "model.fitness" if "fitness" in msec else "model.payoff"
        raise ConfigError(key, str(exc)) from None

    raw_ch = raw.get("channels", [])
    if not isinstance(raw_ch, list):
        raise ConfigError("channels", "expected an array of tables ([[channels]])")
    channels = []
    seen = set()
    for n, c in enumerate(raw_ch):
        name = f"channels[{n}]"
        if not isinstance(c, dict):
            raise ConfigError(name, "expected a table")
        unknown = set(c) - _KEYS["channels"]
        if unknown:
            raise ConfigError(f"{name}.{sorted(unknown)[0]}", "unknown key")
        for key in ("i", "k", "lambda", "gamma"):
            if key not in c:
                raise ConfigError(f"{name}.{key}", "missing")
        i = _number(c, name, "i", integer=True, minimum=0)
        k = _number(c, name, "k", integer=True, minimum=0)
        for key, idx in (("i", i), ("k", k)):
            if idx > d:
                raise ConfigError(f"{name}.{key}", f"type index {idx} exceeds d = {d}")
        if (i, k) in seen:
            raise ConfigError(name, f"duplicate channel {i}->{k}")
        seen.add((i, k))
        try:
            channels.append(MutationChannel(i, k, _number(c, name, "lambda"), _number(c, name, "gamma")))
        except ValueError as exc:
            raise ConfigError(name, str(exc)) from None
    intensity_bound(model, channels)

    ssec = _table(raw, "solver")
    solver = SolverSection(
        dt=_number(ssec, "solver", "dt", 1e-3, positive=True),
        t_end=_number(ssec, "solver", "t_end", 1.0, positive=True),
        nodes=_number(ssec, "solver", "nodes", None, integer=True, minimum=2),
        times=_number_list(ssec, "solver", "times", None, lo=lambda t: t >= 0, sorted_=True),
        picard_tol=_number(ssec, "solver", "picard_tol", 1e-10, positive=True),
        picard_max_iter=_number(ssec, "solver", "picard_max_iter", 200, integer=True, minimum=1),
    )

    csec = _table(raw, "monte_carlo")
    seed = _number(csec, "monte_carlo", "seed", None, integer=True, minimum=0)
    if seed is not None and seed >= 2**64:
        raise ConfigError("monte_carlo.seed", "must lie in [0, 2**64)")
    x0 = _number_list(csec, "monte_carlo", "x0", None, lo=lambda v: v >= 0)
    if x0 is not None and len(x0) != d + 1:
        raise ConfigError("monte_carlo.x0", f"expected d + 1 = {d + 1} frequencies")
    mc = MonteCarloSection(
        n_paths=_number(csec, "monte_carlo", "n_paths", 10_000, integer=True, minimum=2),
        seed=seed,
        times=_number_list(csec, "monte_carlo", "times", None, lo=lambda t: t >= 0, sorted_=True),
        x0=x0,
        path_index=_number(csec, "monte_carlo", "path_index", 0, integer=True, minimum=0),
    )

    wsec = _table(raw, "sweep")
    in_unit = lambda g: 0 < g <= 1  # noqa: E731
    sweep = SweepSection(
        gammas=_number_list(wsec, "sweep", "gammas", SweepSection().gammas, lo=in_unit, sorted_=True),
        x_probe=_number(wsec, "sweep", "x_probe", 0.3),
        t_probe=_number(wsec, "sweep", "t_probe", 2.0, positive=True),
        ubar_gammas=_number_list(
            wsec, "sweep", "ubar_gammas", SweepSection().ubar_gammas, lo=lambda g: 0 < g < 1, sorted_=True
        ),
        horizon=_number(wsec, "sweep", "horizon", 600.0, positive=True),
        tol=_number(wsec, "sweep", "tol", 1e-4, positive=True),
    )
    if not 0 <= sweep.x_probe <= 1:
        raise ConfigError("sweep.x_probe", "must lie in [0, 1]")

    osec = _table(raw, "output")
    out = osec.get("dir", "out")
    if not isinstance(out, str) or not out:
        raise ConfigError("output.dir", "expected a non-empty string")

    cfg = ExperimentConfig(model, channels, solver, mc, sweep, Path(out), source)
    cfg.x0()
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc.strerror}") from None
    if not text.strip():
        raise ConfigError(str(path), "empty configuration")
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        where = f" (line {exc.lineno})" if getattr(exc, "lineno", None) and "line" not in str(exc) else ""
        raise ConfigError(str(path), f"TOML syntax error: {exc}{where}") from None
    return from_dict(raw, str(path))
