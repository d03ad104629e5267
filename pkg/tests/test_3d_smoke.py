"""Short 3-D runs: the transforms and the solver on the cube."""

import numpy as np

from conftest import quintic_problem
from qwlab import from_grid, make_basis, random_state, to_grid
from qwlab.diagnostics import energy_norm, full_energy, residual_per_unit_time
from qwlab.solver import evolve


def test_3d_basis_and_roundtrip():
    b = make_basis(3, 4, 4)
    assert b.eigenvalues[0] == 3.0  # mode (1,1,1)
    assert b.n_modes == 64
    rng = np.random.default_rng(0)
    f = random_state(b, rng).u
    back = from_grid(to_grid(f), b)
    assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-10


def test_3d_parseval():
    b = make_basis(3, 4, 4)
    rng = np.random.default_rng(1)
    f = random_state(b, rng).u
    g = to_grid(f)
    quad = np.sqrt(np.sum(g**2) * b.quadrature_weight)
    assert abs(quad - np.sqrt(np.sum(f.coeffs**2))) < 1e-10


def test_3d_quintic_short_run_dissipates():
    b = make_basis(3, 8, 4)
    prob = quintic_problem(b)
    rng = np.random.default_rng(2)
    xi = random_state(b, rng, e_norm=0.4, max_mode=8)
    traj = evolve(prob, xi, T=0.5, dt=1e-2)
    assert energy_norm(traj.states[-1]) < energy_norm(traj.states[0])
    e = [full_energy(prob, s) for s in traj.states]
    assert e[-1] < e[0]
    assert residual_per_unit_time(traj) < 1e-6
