"""Simulation and verification lab for the self-repelling walk with directed edges."""

__version__ = "0.1.0"

from .weights import WeightFunction, exponential_weight, make_weight, two_level_weight
from .measures import (
    DiscreteDistribution,
    EtaSampler,
    dist_variance,
    eta_kernel_row,
    eta_nstep_dist,
    eta_step,
    rho_minus,
    rho_zero,
    xi_step_probs,
)
from .walk import (
    LocalTimeProfile,
    WalkParams,
    hitting_indices,
    simulate_batch,
    simulate_to_T,
    triangle_limit,
)
from .ray_knight import CoupledSample, coupled_profile, l_chain_tau, profile_via_eta
from .fields import (
    FluctuationParams,
    LimitFieldSample,
    sample_limit_field,
    y_double_prime,
    y_from_zeta,
    y_pm,
    y_prime,
)
from .experiments import ExperimentConfig, RunResult, run_experiment
from .rng import replicate_rng

__all__ = [
    "WeightFunction", "exponential_weight", "make_weight", "two_level_weight",
    "DiscreteDistribution", "EtaSampler", "dist_variance", "eta_kernel_row",
    "eta_nstep_dist", "eta_step", "rho_minus", "rho_zero", "xi_step_probs",
    "LocalTimeProfile", "WalkParams", "hitting_indices", "simulate_batch",
    "simulate_to_T", "triangle_limit",
    "CoupledSample", "coupled_profile", "l_chain_tau", "profile_via_eta",
    "FluctuationParams", "LimitFieldSample", "sample_limit_field",
    "y_double_prime", "y_from_zeta", "y_pm", "y_prime",
    "ExperimentConfig", "RunResult", "run_experiment", "replicate_rng",
]
