import numpy as np
import pytest

from raremut.fitness import FitnessModel
from raremut.flow import flow_array
from raremut.kolmogorov import (
    PicardError,
    SolverConfig,
    default_mesh,
    finite_difference_probe,
    identity_datum,
    nonlocal_J,
    solve,
    solve_picard,
    step_operator,
    step_semi_lagrangian,
)
from raremut.mesh import GridFunction, Mesh
from raremut.simplex import MutationChannel, ReducedState
from raremut.two_species import TwoSpeciesParams, bounds, solution_X, strong_case_display

TWO = FitnessModel.from_constant([2.0, 1.0])
RPS = FitnessModel.from_payoff([[1.0, 0.5, 2.0], [2.0, 1.0, 0.5], [0.5, 2.0, 1.0]])
RPS_CH = [MutationChannel(0, 1, 0.4, 0.5), MutationChannel(1, 2, 0.4, 0.3), MutationChannel(2, 0, 0.4, 0.7)]
REF = TwoSpeciesParams.from_mutation(2.0, 1.0, m0=0.25, gamma0=0.5)
MESH = Mesh.uniform_interval(401)
CFG = SolverConfig(dt=1e-3)


def datum(mesh=MESH, k=1):
    return GridFunction(mesh, k, identity_datum(mesh, k), 0.0)


def test_nonlocal_examples():
    const = GridFunction(MESH, 1, np.full(MESH.n_nodes, 0.7), 0.0)
    for x in (0.0, 0.3, 1.0):
        assert nonlocal_J(const, TWO, REF.channels(), ReducedState([x])) == pytest.approx(0.0, abs=1e-15)
    assert nonlocal_J(datum(), TWO, [MutationChannel(0, 1, 0.5, 0.5)], ReducedState([0.5])) == pytest.approx(0.25)
    for x in (0.2, 0.9):
        got = nonlocal_J(datum(), TWO, [MutationChannel(1, 0, 0.8, 0.3)], ReducedState([x]))
        assert got == pytest.approx(-0.8 * 1.0 * 0.3 * x)


def test_step_examples():
    x = MESH.x
    dt = 0.01
    feet = flow_array(TWO, x[:, None], -dt)[:, 0]
    pure = step_semi_lagrangian(datum(), TWO, [], dt)
    np.testing.assert_allclose(pure.values, feet, atol=1e-14)
    assert pure.time == dt
    ch = [MutationChannel(0, 1, 0.5, 0.5)]
    one = step_semi_lagrangian(datum(), TWO, ch, dt)
    np.testing.assert_allclose(one.values, feet + dt * 0.5 * 2.0 * 0.5 * (1 - feet), atol=1e-14)
    const = GridFunction(MESH, 1, np.full(MESH.n_nodes, 0.3), 0.0)
    np.testing.assert_allclose(step_semi_lagrangian(const, TWO, [], dt).values, 0.3, atol=1e-15)


def test_step_cap_and_auto_reduction():
    ch = [MutationChannel(0, 1, 5.0, 0.5)]  # Lambda = 10, cap 0.01
    with pytest.raises(ValueError):
        step_operator(MESH, TWO, ch, 0.05)
    coarse = solve(TWO, ch, SolverConfig(dt=0.05), MESH, [1.0])[0]
    fine = solve(TWO, ch, SolverConfig(dt=0.01), MESH, [1.0])[0]
    np.testing.assert_allclose(coarse.values, fine.values, atol=1e-12)


def test_operator_is_row_stochastic():
    A = step_operator(Mesh.triangle(20), RPS, RPS_CH, 0.04).toarray()
    assert A.min() >= 0
    np.testing.assert_allclose(A.sum(axis=1), 1.0, atol=1e-12)


def test_identity_datum_echo_and_vertex():
    snaps = solve(REF.model(), REF.channels(), CFG, MESH, [0.0, 3.0])
    np.testing.assert_array_equal(snaps[0].values, MESH.x)
    assert snaps[1].values[-1] == pytest.approx(1.0, abs=1e-12)


def test_fair_mutation_envelope():
    # m0 = 0, m1 f1 = 0.5: replicator above, quasispecies below, decay to 0
    p = TwoSpeciesParams(2.0, 1.0, lambda1=1.0, gamma1=0.5)
    times = [0.5, 1.0, 2.0, 5.0, 12.0]
    snaps = solve(p.model(), p.channels(), CFG, MESH, times)
    for g in snaps:
        lower, upper = bounds(p, MESH.x, g.time)
        assert (g.values - upper).max() <= 5e-3
        assert (g.values - lower).min() >= -5e-3
    assert snaps[-1].values.max() <= 1e-2


def test_strong_unfair_sandwich():
    p = TwoSpeciesParams.from_mutation(2.0, 1.0, m0=0.8, gamma0=0.5)
    for g in solve(p.model(), p.channels(), CFG, MESH, [0.5, 2.0, 5.0]):
        X = solution_X(p, MESH.x, g.time)
        assert g.values.max() <= 1 + 1e-9
        assert (g.values - X).min() >= -5e-3
        assert np.all(strong_case_display(p, MESH.x, g.time) <= X + 1e-15)
    edge = TwoSpeciesParams.from_mutation(2.0, 1.0, m0=0.5, gamma0=0.5)
    g = solve(edge.model(), edge.channels(), CFG, MESH, [2.0])[0]
    assert (g.values - solution_X(edge, MESH.x, 2.0)).min() >= -5e-3


def test_comparison_in_datum():
    lo = identity_datum(MESH, 1)
    hi = np.minimum(lo + 0.1, 1.0)
    a = solve(REF.model(), REF.channels(), CFG, MESH, [1.0, 3.0], datum=lo)
    b = solve(REF.model(), REF.channels(), CFG, MESH, [1.0, 3.0], datum=hi)
    for ga, gb in zip(a, b):
        assert (ga.values - gb.values).max() <= 1e-9


def test_refinement_is_first_order():
    levels = [(101, 4e-3), (201, 2e-3), (401, 1e-3)]
    sols = []
    for n, dt in levels:
        mesh = Mesh.uniform_interval(n)
        g = solve(REF.model(), REF.channels(), SolverConfig(dt=dt), mesh, [1.0])[0]
        sols.append(g(np.linspace(0, 1, 101)))
    ratio = np.abs(sols[0] - sols[1]).max() / np.abs(sols[1] - sols[2]).max()
    assert 1.5 <= ratio <= 2.5


def test_triangle_bounds_and_transport():
    mesh = Mesh.triangle(40)
    for k in (1, 2):
        for g in solve(RPS, RPS_CH, SolverConfig(dt=5e-3), mesh, [0.5, 2.0], component=k):
            assert g.values.min() >= -1e-12 and g.values.max() <= 1 + 1e-9
    # no channels: the datum rides the characteristics
    g = solve(RPS, [], SolverConfig(dt=5e-3), mesh, [1.0], component=2)[0]
    exact = flow_array(RPS, mesh.nodes, -1.0)[:, 1]
    assert np.abs(g.values - exact).max() <= 5e-3


def test_components_sum_to_one_on_triangle():
    mesh = Mesh.triangle(30)
    u1, u2 = (solve(RPS, RPS_CH, SolverConfig(dt=5e-3), mesh, [1.5], component=k)[0].values for k in (1, 2))
    assert (u1 + u2).max() <= 1 + 1e-9


def test_default_mesh():
    assert default_mesh(1).n_nodes == 401
    assert default_mesh(2).counts == (40,)
    with pytest.raises(NotImplementedError):
        default_mesh(3)


def test_picard_no_channels_single_iteration():
    g, gaps = solve_picard(TWO, [], 0.5, SolverConfig(dt=1e-2), MESH, return_history=True)
    assert len(gaps) == 1 and gaps[0] == 0.0
    np.testing.assert_allclose(g.values, flow_array(TWO, MESH.x[:, None], -0.5)[:, 0], atol=1e-14)


def test_picard_contracts_and_agrees():
    T = 0.2
    g, gaps = solve_picard(REF.model(), REF.channels(), T, CFG, MESH, return_history=True)
    ratios = np.array(gaps[1:]) / np.array(gaps[:-1])
    bound = 2 * REF.model().sup_norm() * T
    assert np.all(ratios[: len(ratios) - 1] <= bound)
    sl = solve(REF.model(), REF.channels(), CFG, MESH, [T])[0]
    assert np.abs(g.values - sl.values).max() <= 10 * max(CFG.dt, MESH.spacing)


def test_picard_on_triangle():
    mesh = Mesh.triangle(20)
    cfg = SolverConfig(dt=5e-3)
    g = solve_picard(RPS, RPS_CH, 0.3, cfg, mesh, component=2)
    sl = solve(RPS, RPS_CH, cfg, mesh, [0.3], component=2)[0]
    assert np.abs(g.values - sl.values).max() <= 10 * max(cfg.dt, mesh.spacing)


def test_picard_reports_horizon():
    cfg = SolverConfig(dt=5e-2, picard_max_iter=2, picard_tol=1e-14)
    with pytest.raises(PicardError, match="contraction horizon"):
        solve_picard(REF.model(), REF.channels(), 2.0, cfg, Mesh.uniform_interval(21))


def test_finite_difference_probe():
    mesh = Mesh.graded_interval(201)
    first, second = finite_difference_probe(GridFunction(mesh, 1, mesh.x.copy(), 0.0))
    np.testing.assert_allclose(first, 1.0, atol=1e-9)
    np.testing.assert_allclose(second, 0.0, atol=1e-3)
    m = Mesh.uniform_interval(101)
    _, second = finite_difference_probe(GridFunction(m, 1, m.x**2, 0.0))
    np.testing.assert_allclose(second, 2.0, atol=1e-8)
    with pytest.raises(ValueError):
        finite_difference_probe(GridFunction(Mesh.triangle(3), 1, np.zeros(10), 0.0))


def test_config_validation():
    for kw in ({"dt": 0}, {"t_end": -1}, {"picard_tol": 0}, {"picard_max_iter": 0}, {"interpolation": "cubic"}):
        with pytest.raises(ValueError):
            SolverConfig(**kw)
    with pytest.raises(ValueError):
        solve(RPS, [], CFG, MESH)
