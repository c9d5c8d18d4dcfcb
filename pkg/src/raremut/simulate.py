"""Simulation of the frequency jump process and Monte Carlo expectations.

Between mutation events a path follows the replicator flow.  Events are
generated by thinning: candidate times come from a homogeneous Poisson
clock with the dominating rate ``Lambda = intensity_bound(m, channels)``, a
candidate at state ``x`` is accepted with probability ``lambda(x) / Lambda``
and is given mark ``c`` with probability ``rate_c f_anc(x) / lambda(x)``.

All paths of an ensemble advance together as numpy arrays, but each path
owns its own clock and its own counter-based random stream, so a path is
bit-identical whether it is simulated alone or inside any batch.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .fitness import FitnessModel, channel_intensities, intensity_bound
from .flow import FlowConfig, flow_array
from .simplex import MutationChannel, SimplexState, lift_array, reduced_jump_array

log = logging.getLogger(__name__)

# draws per candidate: slot 0 = waiting time, slot 1 = accept/mark
_SLOTS = 2


@dataclass
class PathSample:
    initial: SimplexState
    events: list  # (time, (ancestor, descendant), state_after)
    horizon: float
    sample_times: list = field(default_factory=list)  # (time, state)

    @property
    def n_events(self) -> int:
        return len(self.events)

    def state_at(self, t: float) -> SimplexState:
        """State after the last event at or before ``t`` (no drift applied)."""
        state = self.initial
        for time, _, after in self.events:
            if time > t:
                break
            state = after
        return state


@dataclass
class MonteCarloEstimate:
    times: np.ndarray
    mean: np.ndarray  # (n_times, d + 1)
    std_error: np.ndarray  # (n_times, d + 1)
    n_paths: int
    seed: int


@dataclass
class Ensemble:
    """Raw output of an ensemble run."""

    times: np.ndarray
    states: np.ndarray  # (n_paths, n_times, d + 1)
    counts: np.ndarray  # (n_paths, n_channels) accepted events per channel
    seed: int
    min_entry: float  # smallest coordinate over snapshots and post-jump states
    max_sum_error: float  # largest |sum - 1| over the same states

    @property
    def n_paths(self) -> int:
        return self.states.shape[0]

    def estimate(self) -> MonteCarloEstimate:
        n = self.n_paths
        mean = self.states.mean(axis=0)
        se = self.states.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
        return MonteCarloEstimate(self.times.copy(), mean, se, n, self.seed)


def _check_inputs(m: FitnessModel, channels, x0: SimplexState):
    if x0.d != m.d:
        raise ValueError(f"initial state has d={x0.d}, model has d={m.d}")
    for c in channels:
        if not isinstance(c, MutationChannel):
            raise TypeError("channels must be MutationChannel instances")
        if max(c.ancestor, c.descendant) > m.d:
            raise ValueError(f"channel {c.ancestor}->{c.descendant} out of range for d={m.d}")


def _run_batch(m, channels, x0, times, seed, path_index, cfg, log_events=False):
    """Simulate the paths ``path_index`` (array) and record states at ``times``."""
    n = path_index.size
    d = m.d
    n_ch = len(channels)
    n_times = times.size
    keys = rng.path_keys(seed, path_index)
    bound = intensity_bound(m, channels)

    # drift is always integrated from the last accepted event (the anchor), so
    # snapshots and rejected candidates never perturb the trajectory
    anchor = np.repeat(x0.freqs[None, 1:], n, axis=0)
    t_anchor = np.zeros(n)
    r = anchor.copy()
    n_cand = np.zeros(n, dtype=np.int64)
    if bound > 0:
        cand = -np.log(rng.uniforms(keys, 0)) / bound
    else:
        cand = np.full(n, np.inf)
    ptr = np.zeros(n, dtype=np.int64)
    states = np.empty((n, n_times, d + 1))
    counts = np.zeros((n, n_ch), dtype=np.int64)
    min_entry = float(x0.freqs.min())
    max_sum_err = 0.0
    events = []

    active = np.flatnonzero(ptr < n_times)
    while active.size:
        next_snap = times[ptr[active]]
        is_cand = cand[active] < next_snap
        target = np.where(is_cand, cand[active], next_snap)
        r[active] = flow_array(m, anchor[active], -(target - t_anchor[active]), cfg)

        snap = active[~is_cand]
        if snap.size:
            x = lift_array(r[snap])
            states[snap, ptr[snap]] = x
            min_entry = min(min_entry, float(x.min()))
            max_sum_err = max(max_sum_err, float(np.abs(x.sum(axis=1) - 1).max()))
            ptr[snap] += 1

        hit = active[is_cand]
        if hit.size:
            u = rng.uniforms(keys[hit], _SLOTS * n_cand[hit] + 1)
            cum = np.cumsum(channel_intensities(m, channels, lift_array(r[hit])), axis=1)
            level = u * bound
            accepted = level < cum[:, -1]
            mark = np.argmax(cum > level[:, None], axis=1)
            for ci, c in enumerate(channels):
                sel = hit[accepted & (mark == ci)]
                if sel.size == 0:
                    continue
                r[sel] = reduced_jump_array(r[sel], c.ancestor, c.descendant, c.fraction)
                anchor[sel] = r[sel]
                t_anchor[sel] = cand[sel]
                counts[sel, ci] += 1
                x = lift_array(r[sel])
                min_entry = min(min_entry, float(x.min()))
                max_sum_err = max(max_sum_err, float(np.abs(x.sum(axis=1) - 1).max()))
                if log_events:
                    for j, row in zip(sel, x):
                        events.append((float(cand[j]), (c.ancestor, c.descendant), row))
            n_cand[hit] += 1
            cand[hit] += -np.log(rng.uniforms(keys[hit], _SLOTS * n_cand[hit])) / bound

        active = np.flatnonzero(ptr < n_times)

    events.sort(key=lambda e: e[0])
    return states, counts, min_entry, max_sum_err, events


def simulate_ensemble(
    m: FitnessModel,
    channels,
    x0: SimplexState,
    times,
    n_paths: int,
    seed: int,
    cfg: FlowConfig | None = None,
    threads: int = 1,
    chunk: int = 16384,
) -> Ensemble:
    """Simulate ``n_paths`` independent paths and record their states at ``times``.

    Paths are split into chunks that may run on up to ``threads`` workers;
    results are gathered in path-index order so they do not depend on the
    schedule.
    """
    channels = list(channels)
    _check_inputs(m, channels, x0)
    seed = rng.check_seed(seed)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d sequence")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be sorted and nonnegative")
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    cfg = cfg or FlowConfig()

    blocks = [np.arange(lo, min(lo + chunk, n_paths), dtype=np.int64) for lo in range(0, n_paths, chunk)]

    def work(idx):
        return _run_batch(m, channels, x0, times, seed, idx, cfg)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, blocks))
    else:
        results = [work(b) for b in blocks]

    states = np.concatenate([res[0] for res in results])
    counts = np.concatenate([res[1] for res in results])
    log.debug("simulated %d paths, %d events", n_paths, int(counts.sum()))
    return Ensemble(
        times=times,
        states=states,
        counts=counts,
        seed=seed,
        min_entry=min(res[2] for res in results),
        max_sum_error=max(res[3] for res in results),
    )


def simulate_path(
    m: FitnessModel,
    channels,
    x0: SimplexState,
    horizon: float,
    seed: int,
    path_index: int = 0,
    sample_times=None,
    cfg: FlowConfig | None = None,
) -> PathSample:
    """One trajectory on ``[0, horizon]`` with its full event log.

    ``(seed, path_index)`` selects the random stream; path ``j`` of
    :func:`simulate_ensemble` with the same seed is the same trajectory.
    """
    channels = list(channels)
    _check_inputs(m, channels, x0)
    seed = rng.check_seed(seed)
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    grid = sorted(set(float(s) for s in (sample_times or [])) | {float(horizon)})
    if grid[0] < 0 or grid[-1] > horizon:
        raise ValueError("sample times must lie in [0, horizon]")
    states, _, _, _, events = _run_batch(
        m, channels, x0, np.array(grid), seed, np.array([path_index], dtype=np.int64),
        cfg or FlowConfig(), log_events=True,
    )
    return PathSample(
        initial=x0,
        events=[(time, mark, SimplexState(row)) for time, mark, row in events],
        horizon=float(horizon),
        sample_times=[(time, SimplexState(row)) for time, row in zip(grid, states[0])],
    )


def monte_carlo_expectation(
    m: FitnessModel,
    channels,
    x0: SimplexState,
    times,
    n_paths: int,
    seed: int,
    cfg: FlowConfig | None = None,
    threads: int = 1,
) -> MonteCarloEstimate:
    """Sample mean and standard error of the frequencies at each of ``times``."""
    if n_paths < 2:
        raise ValueError("n_paths must be at least 2 for a standard error")
    return simulate_ensemble(m, channels, x0, times, n_paths, seed, cfg, threads).estimate()
