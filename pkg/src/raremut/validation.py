"""Acceptance suite: eleven numbered checks of solver, simulator and closed forms.

Each check returns a :class:`CriterionResult` with the measured quantities,
the threshold it was held to and its wall time.  ``tolerance_scale``
multiplies every additive tolerance; 0 turns the suite into a negative
control in which any nonzero discretization error fails.

Reference configuration: ``f0 = 2``, ``f1 = 1`` (``s = 1``), channel 0->1
with ``lambda0 = 0.5``, ``gamma0 = 0.5`` (``m0 f0 = 0.5``), no 1->0
channel, 401 nodes, ``dt = 1e-3``.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .kolmogorov import SolverConfig, finite_difference_probe, solve, solve_picard
from .mesh import Mesh
from .simplex import SimplexState
from .simulate import simulate_ensemble
from .two_species import (
    TwoSpeciesParams,
    find_plateau,
    gamma_star,
    solution_X,
    solution_Z,
    sweep_gamma,
)

REFERENCE = TwoSpeciesParams.from_mutation(2.0, 1.0, m0=0.25, gamma0=0.5)
REF_NODES = 401
REF_DT = 1e-3
DEFAULT_SEED = 1
DEFAULT_PATHS = 100_000

NAMES = {
    1: "closed-form solve at gamma = 1",
    2: "quasispecies lower bound and upper bound 1",
    3: "gradient band",
    4: "convexity",
    5: "monotone in gamma with both endpoints",
    6: "threshold root gamma*",
    7: "Monte Carlo against the solver",
    8: "Poisson law of mutation counts",
    9: "simplex invariance of simulated states",
    10: "large-time plateau trend in gamma",
    11: "Picard iteration against semi-Lagrangian",
}


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: dict
    threshold: str
    runtime: float
    budget: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_short(v)}" for k, v in self.measured.items())
        budget = f" (budget {self.budget:g} s)" if self.budget else ""
        return (
            f"criterion {self.number:2d} {status}  {self.name}: {shown}; "
            f"required {self.threshold}; {self.runtime:.2f} s{budget}"
        )

    def to_dict(self) -> dict:
        return asdict(self)


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(e) for e in v) + "]"
    return str(v)


@dataclass
class Suite:
    tolerance_scale: float = 1.0
    n_paths: int = DEFAULT_PATHS
    seed: int = DEFAULT_SEED
    threads: int = 1
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.tolerance_scale < 0:
            raise ValueError("tolerance_scale must be >= 0")

    def tol(self, v: float) -> float:
        return v * self.tolerance_scale

    # shared computations

    def _mesh(self) -> Mesh:
        return Mesh.uniform_interval(REF_NODES)

    def _reference_snapshots(self):
        if "ref" not in self._cache:
            times = [round(0.25 * k, 2) for k in range(0, 21)]
            cfg = SolverConfig(dt=REF_DT)
            self._cache["ref"] = solve(REFERENCE.model(), REFERENCE.channels(), cfg, self._mesh(), times)
        return self._cache["ref"]

    def _ensemble(self, key, p, x0, times):
        if key not in self._cache:
            self._cache[key] = simulate_ensemble(
                p.model(), p.channels(), SimplexState([1.0 - x0, x0]), times, self.n_paths, self.seed,
                threads=self.threads,
            )
        return self._cache[key]

    # criteria

    def c1(self) -> dict:
        # mf = 0.5 (the reference m0 at gamma = 1) and, as a second reading, lambda0 = 0.5 (mf = 1)
        times = [0.5, 1.0, 2.0, 5.0]
        x = self._mesh().x
        errs = {}
        for label, p in (
            ("mf0.5", TwoSpeciesParams.from_mutation(2.0, 1.0, m0=0.25, gamma0=1.0)),
            ("mf1", TwoSpeciesParams(2.0, 1.0, lambda0=0.5, gamma0=1.0)),
        ):
            snaps = solve(p.model(), p.channels(), SolverConfig(dt=REF_DT), self._mesh(), times)
            errs[label] = [float(np.abs(g.values - solution_Z(p, x, g.time)).max()) for g in snaps]
        worst = max(max(e) for e in errs.values())
        tol = self.tol(5e-3)
        return dict(
            passed=worst <= tol,
            measured={"max_err": worst, "err_by_t_mf0.5": errs["mf0.5"], "err_by_t_mf1": errs["mf1"]},
            threshold=f"max |u - Z| <= {tol:g} at t = 0.5, 1, 2, 5",
            budget=10.0,
        )

    def c2(self) -> dict:
        snaps = self._reference_snapshots()
        x = self._mesh().x
        gap = min(float((g.values - solution_X(REFERENCE, x, g.time)).min()) for g in snaps)
        top = max(float(g.values.max()) for g in snaps)
        lo, hi = -self.tol(5e-3), 1.0 + self.tol(1e-9)
        return dict(
            passed=gap >= lo and top <= hi,
            measured={"min_u_minus_X": gap, "max_u": top},
            threshold=f"min(u - X) >= {lo:g}, max u <= 1 + {self.tol(1e-9):g}",
        )

    def c3(self) -> dict:
        snaps = {g.time: g for g in self._reference_snapshots()}
        rate = REFERENCE.s - REFERENCE.mf0
        worst_low, worst_excess = math.inf, -math.inf
        lows, highs = [], []
        for t in (0.5, 1.0, 2.0):
            first, _ = finite_difference_probe(snaps[t])
            lows.append(float(first.min()))
            highs.append(float(first.max()))
            worst_low = min(worst_low, lows[-1])
            worst_excess = max(worst_excess, highs[-1] - math.exp(rate * t))
        ok = worst_low >= -self.tol(1e-6) and worst_excess <= self.tol(1e-3)
        return dict(
            passed=ok,
            measured={"min_slope": lows, "max_slope": highs, "max_excess_over_bound": worst_excess},
            threshold=f"slopes in [-{self.tol(1e-6):g}, exp((s - mf) t) + {self.tol(1e-3):g}] at t = 0.5, 1, 2",
        )

    def c4(self) -> dict:
        worst = min(float(finite_difference_probe(g)[1].min()) for g in self._reference_snapshots())
        lo = -self.tol(1e-6)
        return dict(passed=worst >= lo, measured={"min_second_difference": worst}, threshold=f">= {lo:g}")

    def c5(self) -> dict:
        gammas = [round(0.1 * k, 1) for k in range(1, 11)]
        rows = sweep_gamma(REFERENCE, gammas, 0.3, 2.0, SolverConfig(dt=REF_DT), self._mesh(), threads=self.threads)
        u = np.array([r.u_gamma for r in rows])
        steps = float(np.diff(u).min())
        end_err = abs(rows[-1].u_gamma - rows[-1].z_ref)
        low = rows[0].u_gamma - rows[0].x_ref
        ok = (
            steps >= -self.tol(1e-4)
            and end_err <= self.tol(5e-3)
            and -self.tol(5e-3) <= low <= self.tol(0.08)
        )
        return dict(
            passed=ok,
            measured={"u_gamma": u.tolist(), "min_step": steps, "u1_minus_Z": end_err, "u01_minus_X": low},
            threshold=(
                f"steps >= -{self.tol(1e-4):g}, |u_1 - Z| <= {self.tol(5e-3):g}, "
                f"u_0.1 - X in [-{self.tol(5e-3):g}, {self.tol(0.08):g}]"
            ),
            budget=120.0,
        )

    def c6(self) -> dict:
        s, mf = 2.0, 1.0
        root = gamma_star(s, mf)
        g = lambda v: s * v + mf * math.log1p(-v)  # noqa: E731
        resid = abs(g(root))
        sign = g(0.79) > 0 > g(0.80) and g(math.nextafter(root, 0)) * g(math.nextafter(root, 1)) <= 0
        ok = resid <= self.tol(1e-12) and 0.79 < root < 0.80 and sign
        return dict(
            passed=ok,
            measured={"gamma_star": root, "residual": resid, "sign_change": sign},
            threshold=f"|g| <= {self.tol(1e-12):g}, root in (0.79, 0.80), sign change",
        )

    def c7(self) -> dict:
        snaps = solve(REFERENCE.model(), REFERENCE.channels(), SolverConfig(dt=REF_DT), self._mesh(), [1.0])
        u = snaps[0]
        gaps, allow = [], []
        for x0 in (0.1, 0.5, 0.9):
            est = self._ensemble(("mc", x0), REFERENCE, x0, [1.0]).estimate()
            gaps.append(abs(float(est.mean[0, 1]) - float(u([x0])[0])))
            allow.append(self.tol(3.0 * float(est.std_error[0, 1]) + 5e-3))
        ok = all(g <= a for g, a in zip(gaps, allow))
        return dict(
            passed=ok,
            measured={"abs_gap": gaps, "allowed": allow, "n_paths": self.n_paths, "seed": self.seed},
            threshold="|mean - u| <= 3 SE + 5e-3 at x0 = 0.1, 0.5, 0.9",
            budget=120.0,
        )

    def c8(self) -> dict:
        ens = self._ensemble(("poisson", 0.5), REFERENCE, 0.5, [2.0])
        n = ens.counts[:, 0].astype(float)
        lam = REFERENCE.lambda0 * REFERENCE.f0 * 2.0
        mean, var = float(n.mean()), float(n.var(ddof=1))
        se_mean = math.sqrt(lam / n.size)
        se_var = math.sqrt((lam + 2.0 * lam**2) / n.size)
        ok = abs(mean - lam) <= self.tol(4 * se_mean) and abs(var - lam) <= self.tol(4 * se_var)
        return dict(
            passed=ok,
            measured={"mean": mean, "variance": var, "se_mean": se_mean, "se_variance": se_var},
            threshold=f"mean and variance within 4 SE of {lam:g}",
        )

    def c9(self) -> dict:
        ens = [self._ensemble(("mc", x0), REFERENCE, x0, [1.0]) for x0 in (0.1, 0.5, 0.9)]
        ens.append(self._ensemble(("poisson", 0.5), REFERENCE, 0.5, [2.0]))
        sum_err = max(e.max_sum_error for e in ens)
        low = min(e.min_entry for e in ens)
        ok = sum_err <= self.tol(1e-12) and low >= -self.tol(1e-14)
        return dict(
            passed=ok,
            measured={"max_sum_error": sum_err, "min_entry": low, "paths": sum(e.n_paths for e in ens)},
            threshold=f"|sum - 1| <= {self.tol(1e-12):g}, entries >= -{self.tol(1e-14):g}",
        )

    def c10(self) -> dict:
        values, runtimes = [], []
        for g in (0.05, 0.5, 0.95):
            t0 = time.perf_counter()
            values.append(find_plateau(REFERENCE, g).value)
            runtimes.append(time.perf_counter() - t0)
        mono = all(b >= a - self.tol(1e-4) for a, b in zip(values, values[1:]))
        ok = mono and values[0] <= 0.55 and values[-1] >= 0.9 and max(runtimes) < 180.0
        return dict(
            passed=ok,
            measured={"ubar": values, "runtime_each": runtimes},
            threshold="nondecreasing, ubar_0.05 <= 0.55, ubar_0.95 >= 0.9, each run < 180 s",
        )

    def c11(self) -> dict:
        T = 0.2
        cfg = SolverConfig(dt=REF_DT)
        m, ch, mesh = REFERENCE.model(), REFERENCE.channels(), self._mesh()
        pic = solve_picard(m, ch, T, cfg, mesh)
        sl = solve(m, ch, cfg, mesh, [T])[0]
        gap = float(np.abs(pic.values - sl.values).max())
        tol = self.tol(10.0 * max(REF_DT, 1.0 / 400))
        return dict(passed=gap <= tol, measured={"sup_gap": gap}, threshold=f"<= {tol:g}")

    def run_one(self, number: int) -> CriterionResult:
        if number not in NAMES:
            raise ValueError(f"no criterion {number}; choose from 1..{len(NAMES)}")
        t0 = time.perf_counter()
        try:
            out = getattr(self, f"c{number}")()
        except Exception as exc:  # a crash is reported as a failure of that criterion
            out = dict(passed=False, measured={"error": f"{type(exc).__name__}: {exc}"}, threshold="runs without error")
        runtime = time.perf_counter() - t0
        budget = out.pop("budget", None)
        passed = bool(out.pop("passed")) and (budget is None or runtime < budget)
        return CriterionResult(number, NAMES[number], passed, runtime=runtime, budget=budget, **out)

    def run(self, numbers=None) -> list[CriterionResult]:
        return [self.run_one(n) for n in (numbers or sorted(NAMES))]
