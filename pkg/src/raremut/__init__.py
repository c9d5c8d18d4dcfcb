"""Frequency dynamics of evolutionary games driven by rare, large mutation events."""

from .fitness import FitnessModel, channel_intensities, fitness_at, intensity_bound, mean_fitness
from .flow import FlowConfig, characteristic_flow, drift_a, replicator_trajectory
from .kolmogorov import SolverConfig, finite_difference_probe, nonlocal_J, solve, solve_picard, step_semi_lagrangian
from .mesh import GridFunction, Mesh
from .simplex import MutationChannel, ReducedState, SimplexError, SimplexState, apply_jump, lift, reduce
from .simulate import monte_carlo_expectation, simulate_ensemble, simulate_path
from .two_species import (
    TwoSpeciesParams,
    equilibrium_xbar,
    gamma_star,
    residual_Kgamma1,
    solution_X,
    solution_Z,
    sweep_gamma,
    ubar_gamma,
)

__version__ = "0.1.0"
