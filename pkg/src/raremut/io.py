"""CSV artifacts and the plotting scripts emitted next to them.

Numbers are written with 17 significant digits so every double round-trips
exactly; output is a deterministic function of its inputs.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

NO_MARK = -1


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0]))


def write_path(path, sample) -> Path:
    """One trajectory: the initial state, every event and every snapshot, in time order.

    Rows without an event carry ``mark_i = mark_k = -1``; at equal times an
    event precedes the snapshot, so the snapshot shows the post-jump state.
    """
    d = sample.initial.d
    header = ["time", "mark_i", "mark_k"] + [f"x_{k}" for k in range(d + 1)]
    rows = [(0.0, NO_MARK, NO_MARK, *sample.initial.freqs)]
    tagged = [(t, 0, (i, k), st) for t, (i, k), st in sample.events]
    tagged += [(t, 1, (NO_MARK, NO_MARK), st) for t, st in sample.sample_times]
    for t, _, (i, k), st in sorted(tagged, key=lambda e: (e[0], e[1])):
        rows.append((t, i, k, *st.freqs))
    return write_csv(path, header, rows)


def write_mc(path, est) -> Path:
    d = est.mean.shape[1] - 1
    header = ["time"] + [f"mean_{k}" for k in range(d + 1)] + [f"se_{k}" for k in range(d + 1)]
    rows = [(t, *m, *s) for t, m, s in zip(est.times, est.mean, est.std_error)]
    return write_csv(path, header, rows)


def write_u(path, snapshots) -> Path:
    """Nodal values of every snapshot, stacked: ``t, x_1..x_d, u``."""
    d = snapshots[0].mesh.d
    header = ["t"] + [f"x_{k}" for k in range(1, d + 1)] + ["u"]
    rows = []
    for g in snapshots:
        for node, val in zip(g.mesh.nodes, g.values):
            rows.append((g.time, *node, val))
    return write_csv(path, header, rows)


def write_sweep(path, rows) -> Path:
    header = ["gamma", "x_probe", "t_probe", "u_gamma", "z_ref", "x_ref"]
    return write_csv(path, header, [(r.gamma, r.x_probe, r.t_probe, r.u_gamma, r.z_ref, r.x_ref) for r in rows])


def write_equilibrium(path, rows) -> Path:
    """``rows``: ``(gamma, ubar, xbar, gamma_star)``; ``ubar`` may be NaN when no plateau was found."""
    return write_csv(path, ["gamma", "ubar", "xbar", "gamma_star"], rows)


PLOT_U = '''"""u(x, t) against x, one curve per snapshot time (reads u.csv)."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else "u.csv"
curves = defaultdict(list)
with open(src) as fh:
    reader = csv.DictReader(fh)
    if "x_2" in reader.fieldnames:
        sys.exit("u.csv holds a d = 2 solution; this script plots d = 1 only")
    for row in reader:
        curves[float(row["t"])].append((float(row["x_1"]), float(row["u"])))
for t, pts in sorted(curves.items()):
    pts.sort()
    plt.plot([p[0] for p in pts], [p[1] for p in pts], label=f"t = {t:g}")
plt.xlabel("x")
plt.ylabel("u(x, t)")
plt.legend()
plt.savefig("u.png", dpi=150)
'''

PLOT_UBAR = '''"""Large-time plateau against gamma, with the quasispecies equilibrium (reads equilibrium.csv)."""
import csv
import math
import sys

import matplotlib.pyplot as plt

src = sys.argv[1] if len(sys.argv) > 1 else "equilibrium.csv"
with open(src) as fh:
    rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]
rows = [r for r in rows if not math.isnan(r["ubar"])]
plt.plot([r["gamma"] for r in rows], [r["ubar"] for r in rows], "o-", label="plateau")
if rows:
    plt.axhline(rows[0]["xbar"], ls="--", c="k", label="quasispecies equilibrium")
    if not math.isnan(rows[0]["gamma_star"]):
        plt.axvline(rows[0]["gamma_star"], ls=":", c="r", label="gamma*")
plt.xlabel("gamma")
plt.ylabel("plateau")
plt.ylim(0, 1.05)
plt.legend()
plt.savefig("ubar.png", dpi=150)
'''


def write_plot_scripts(out_dir, which=("u", "ubar")) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    texts = {"u": ("plot_u.py", PLOT_U), "ubar": ("plot_ubar.py", PLOT_UBAR)}
    written = []
    for key in which:
        name, text = texts[key]
        (out_dir / name).write_text(text)
        written.append(out_dir / name)
    return written
