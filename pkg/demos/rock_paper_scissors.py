"""Three cyclically dominant types with rare cyclic mutations: one path and the ensemble mean.

Run: python demos/rock_paper_scissors.py
"""

from raremut import FitnessModel, MutationChannel, SimplexState, simulate_ensemble, simulate_path

A = [[1.0, 0.5, 2.0], [2.0, 1.0, 0.5], [0.5, 2.0, 1.0]]
m = FitnessModel.from_payoff(A)
channels = [MutationChannel(i, (i + 1) % 3, 0.2, 0.5) for i in range(3)]
x0 = SimplexState([0.6, 0.3, 0.1])


def show(v):
    return "[" + ", ".join(f"{e:.4f}" for e in v) + "]"


path = simulate_path(m, channels, x0, 10.0, seed=7, sample_times=[2.0, 4.0, 6.0, 8.0])
print(f"one path, {len(path.events)} events on [0, 10]")
for time, (i, k), state in path.events[:8]:
    print(f"  t={time:6.3f}  {i}->{k}  x={show(state.freqs)}")

times = [1.0, 2.0, 5.0, 10.0]
est = simulate_ensemble(m, channels, x0, times, 5000, seed=7).estimate()
print("\nensemble mean over 5000 paths")
for t, mean, se in zip(est.times, est.mean, est.std_error):
    print(f"  t={t:5.1f}  mean={show(mean)}  max se={se.max():.1e}")
