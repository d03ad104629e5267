"""Pseudo-spectral laboratory for the damped quintic wave equation
d^2_t u + gamma d_t u - Laplace(u) + f(u) = g with Dirichlet conditions
on the box (0, pi)^d: Galerkin time integration, energy identities,
space-time norm probes, splitting and attractor sampling.
"""

from .spectral import (
    Basis,
    CoeffField,
    StatePair,
    basis_vector,
    field_from_modes,
    from_grid,
    laplacian_apply,
    make_basis,
    project,
    random_field,
    random_state,
    sobolev_norm,
    to_grid,
    zero_field,
)
from .nonlinearity import AssumptionCertificate, NonlinearitySpec, certify, eval_F, eval_f
from .solver import (
    NonConvergence,
    Overflow,
    ProblemSpec,
    SolverError,
    Trajectory,
    evolve,
    linear_evolve,
    step,
)

__all__ = [
    "Basis",
    "CoeffField",
    "StatePair",
    "make_basis",
    "to_grid",
    "from_grid",
    "project",
    "laplacian_apply",
    "sobolev_norm",
    "zero_field",
    "basis_vector",
    "field_from_modes",
    "random_field",
    "random_state",
    "NonlinearitySpec",
    "AssumptionCertificate",
    "eval_f",
    "eval_F",
    "certify",
    "ProblemSpec",
    "Trajectory",
    "SolverError",
    "NonConvergence",
    "Overflow",
    "step",
    "evolve",
    "linear_evolve",
]
