"""Command-line front end: ``raremut {simulate,solve,sweep,validate}``.

Exit codes: 0 success, 1 validation failure or runtime error, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, ExperimentConfig, load_config
from .flow import replicator_trajectory
from .kolmogorov import solve
from .simulate import simulate_ensemble, simulate_path
from .simplex import reduce
from .two_species import PlateauError, equilibrium_xbar, find_plateau, gamma_star, sweep_gamma
from .validation import DEFAULT_PATHS, DEFAULT_SEED, NAMES, Suite


EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    return cfg.with_overrides(
        t_end=getattr(args, "t_end", None),
        n_paths=getattr(args, "n_paths", None),
        seed=getattr(args, "seed", None),
        out=getattr(args, "out", None),
    )


def cmd_simulate(args) -> int:
    cfg = _load(args)
    seed = cfg.resolve_seed()
    x0 = cfg.x0()
    times = cfg.mc_times()
    out = cfg.out_dir
    sample = simulate_path(
        cfg.model, cfg.channels, x0, cfg.solver.t_end, seed, cfg.monte_carlo.path_index, sample_times=times
    )
    io.write_path(out / "path.csv", sample)
    ens = simulate_ensemble(cfg.model, cfg.channels, x0, times, cfg.monte_carlo.n_paths, seed, threads=args.threads)
    est = ens.estimate()
    io.write_mc(out / "mc.csv", est)
    print(f"seed {seed}, {est.n_paths} paths, {int(ens.counts.sum())} mutation events")
    if not cfg.channels:
        ref = replicator_trajectory(cfg.model, reduce(x0), times)
        print(f"no channels: max |mean - replicator| = {float(np.abs(est.mean[:, 1:] - ref).max()):.3e}")
    for t, m, se in zip(est.times, est.mean, est.std_error):
        mean = " ".join(f"{v:.6f}" for v in m)
        err = " ".join(f"{v:.2e}" for v in se)
        print(f"t={t:g}  mean=[{mean}]  se=[{err}]")
    print(f"wrote {out / 'path.csv'} and {out / 'mc.csv'}")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _load(args)
    if cfg.d > 2:
        raise ConfigError("model.d", f"the solver covers d = 1 and d = 2; use 'simulate' for d = {cfg.d}")
    times = sorted(set(cfg.solve_times()) | {0.0})
    snaps = solve(cfg.model, cfg.channels, cfg.solver_config(), cfg.mesh(), times)
    out = cfg.out_dir
    io.write_u(out / "u.csv", snaps)
    io.write_plot_scripts(out, ["u"] if cfg.d == 1 else [])
    prev = None
    for g in snaps:
        step = "" if prev is None else f"  sup|u - u_prev|={float(np.abs(g.values - prev).max()):.3e}"
        print(f"t={g.time:g}  min u={g.values.min():.6f}  sup u={g.values.max():.6f}{step}")
        prev = g.values
    print(f"wrote {out / 'u.csv'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    p = cfg.two_species()
    if p.m1 != 0:
        raise ConfigError("channels", "the gamma sweep needs no 1->0 channel (m1 = 0)")
    if not 0 < p.mf0 < p.s:
        raise ConfigError("channels", f"the gamma sweep needs 0 < m0 f0 < s, got m0 f0 = {p.mf0:g}, s = {p.s:g}")
    g_star = gamma_star(p.s, p.mf0)
    xbar = equilibrium_xbar(p)
    print(f"gamma* = {g_star:.9f}")
    print(f"plateau bracket [mf/s, 1] = [{p.mf0 / p.s:.6f}, 1]")

    sw = cfg.sweep
    rows = sweep_gamma(p, sw.gammas, sw.x_probe, sw.t_probe, cfg.solver_config(), cfg.mesh(), threads=args.threads)
    for r in rows:
        print(f"gamma={r.gamma:g}  u={r.u_gamma:.6f}  Z={r.z_ref:.6f}  X={r.x_ref:.6f}")
    out = cfg.out_dir
    io.write_sweep(out / "sweep.csv", rows)

    eq = []
    for g in sw.ubar_gammas:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                pl = find_plateau(p, g, horizon=sw.horizon, tol=sw.tol)
                ubar = pl.value
                print(f"gamma={g:g}  ubar={ubar:.6f}  (flat by t={pl.time:g})")
            except PlateauError as exc:
                ubar = math.nan
                print(f"gamma={g:g}  {exc}")
        for w in caught:
            print(f"warning: {w.message}")
        eq.append((g, ubar, xbar, g_star))
    io.write_equilibrium(out / "equilibrium.csv", eq)
    io.write_plot_scripts(out, ["ubar"])
    print(f"wrote {out / 'sweep.csv'} and {out / 'equilibrium.csv'}")
    return EXIT_OK


def _criteria(text: str | None):
    if not text:
        return None
    try:
        numbers = sorted({int(v) for v in text.split(",")})
    except ValueError:
        raise ConfigError("--criteria", f"expected comma-separated integers, got {text!r}") from None
    bad = [n for n in numbers if n not in NAMES]
    if bad:
        raise ConfigError("--criteria", f"no criterion {bad[0]}; choose from 1..{len(NAMES)}")
    return numbers


def cmd_validate(args) -> int:
    seed, out = DEFAULT_SEED, Path(args.out or "out")
    if args.config is not None:
        cfg = _load(args)
        seed = cfg.monte_carlo.seed if cfg.monte_carlo.seed is not None else seed
        out = cfg.out_dir
    if args.seed is not None:
        seed = args.seed
    if args.tolerance_scale < 0:
        raise ConfigError("--tolerance-scale", "must be >= 0")
    suite = Suite(
        tolerance_scale=args.tolerance_scale,
        n_paths=args.n_paths or DEFAULT_PATHS,
        seed=seed,
        threads=args.threads,
    )
    results = []
    for n in _criteria(args.criteria) or sorted(NAMES):
        r = suite.run_one(n)
        print(r.line(), flush=True)
        results.append(r)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "passed": all(r.passed for r in results),
        "seed": seed,
        "n_paths": suite.n_paths,
        "tolerance_scale": suite.tolerance_scale,
        "criteria": [r.to_dict() for r in results],
    }
    (out / "validate.json").write_text(json.dumps(report, indent=2) + "\n")
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed; report in {out / 'validate.json'}")
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raremut", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        if config_required:
            sp.add_argument("config", help="TOML experiment configuration")
        else:
            sp.add_argument("config", nargs="?", help="optional TOML configuration (seed and output dir)")
        sp.add_argument("--out", help="output directory (overrides output.dir)")
        sp.add_argument("--threads", type=int, default=1, help="maximum worker threads (default 1)")

    sp = sub.add_parser("simulate", help="one logged path and an ensemble mean")
    common(sp)
    sp.add_argument("--t-end", type=float, help="overrides solver.t_end (path horizon)")
    sp.add_argument("--seed", type=_seed, help="overrides monte_carlo.seed and RAREMUT_SEED")
    sp.add_argument("--n-paths", type=int, help="overrides monte_carlo.n_paths")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("solve", help="expected frequencies on a mesh")
    common(sp)
    sp.add_argument("--t-end", type=float, help="overrides solver.t_end")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="two-species study over the jump fraction gamma")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="run the acceptance suite")
    common(sp, config_required=False)
    sp.add_argument("--seed", type=_seed, help=f"Monte Carlo seed (default {DEFAULT_SEED})")
    sp.add_argument("--n-paths", type=int, help=f"paths per Monte Carlo check (default {DEFAULT_PATHS})")
    sp.add_argument("--criteria", help="comma-separated subset, e.g. 1,6,11")
    sp.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every tolerance (0 = negative control)")
    sp.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, RuntimeError, NotImplementedError) as exc:
        print(f"error in '{args.command}': {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
