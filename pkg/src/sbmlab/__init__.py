"""sbmlab: numerics for the boundary of super-Brownian motion.

The pieces fit together as follows: the shooting solver (profile) and the
scaled semilinear flow (pde) compute the same singular profile two
independent ways; the killed Ornstein-Uhlenbeck eigensystem (spectral)
turns it into the lead eigenvalue lambda0; the branching particle system
(particles) checks the predicted left-tail exponent 2 lambda0 - 1 and
boundary-set dimension 2 - 2 lambda0 with the estimators in dimension;
tauberian supplies the exact transform-to-tail constants.
"""
from .profile import ProfileF, ShotOutcome, integrate_shot, profile_identities, solve_profile
from .spectral import (
    GridFunction,
    SpectralSystem,
    conditioned_kernel,
    eigensystem,
    heat_kernel,
    ou_kernel_exact,
    s_star,
    schrodinger_potential,
    survival_probability,
    variational_bounds,
)
from .pde import PdeSolution, evolve, h_u, rate_experiment, tilde_v, v_infinity, v_lambda
from .particles import (
    DensityField,
    ParticleCloud,
    density_field,
    extinction_experiment,
    extract_bz,
    holder_scan,
    laplace_check,
    left_tail,
    simulate,
    simulate_fields,
)
from .dimension import PointSet, box_dimension, cantor_points, riesz_energy, subordinator_range
from .tauberian import lower_coeff_d1, upper_bound_U, verify_on_family
from .results import ResultTable

__version__ = "0.1.0"

__all__ = [
    "ProfileF", "ShotOutcome", "integrate_shot", "profile_identities",
    "solve_profile", "GridFunction", "SpectralSystem", "conditioned_kernel",
    "eigensystem", "heat_kernel", "ou_kernel_exact", "s_star",
    "schrodinger_potential", "survival_probability", "variational_bounds",
    "PdeSolution", "evolve", "h_u", "rate_experiment", "tilde_v",
    "v_infinity", "v_lambda", "DensityField", "ParticleCloud",
    "density_field", "extinction_experiment", "extract_bz", "holder_scan",
    "laplace_check", "left_tail", "simulate", "simulate_fields", "PointSet",
    "box_dimension", "cantor_points", "riesz_energy", "subordinator_range",
    "lower_coeff_d1", "upper_bound_U", "verify_on_family", "ResultTable",
]
