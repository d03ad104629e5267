import math

import numpy as np
import pytest
from scipy.integrate import quad

from _oracles import (
    damped_mode,
    g_alpha_min_eigenvalue,
    single_mode_equilibrium_amplitude,
)
from conftest import free_problem, quintic_problem
from qwlab import (
    NonlinearitySpec,
    ProblemSpec,
    StatePair,
    basis_vector,
    evolve,
    field_from_modes,
    linear_evolve,
    make_basis,
    random_state,
    zero_field,
)
from qwlab.csvio import read_csv
from qwlab.diagnostics import (
    ENERGY_CSV_HEADER,
    continuous_dependence_probe,
    decay_fit,
    default_perturbation_params,
    dtu_negative_norm_series,
    e1_norm,
    e_delta_norm,
    energy_identity_residual,
    energy_norm,
    energy_report,
    fit_convergence_order,
    full_energy,
    g_alpha_positivity,
    h2_bound_check,
    interpolation_check,
    lp_norm,
    modified_energy_norm,
    perturbed_energy_report,
    residual_per_unit_time,
    space_time_norm,
    strichartz_norm,
    strichartz_ratio_probe,
    write_energy_csv,
)

SIN6_INTEGRAL = 5.0 * math.pi / 16.0
SIN12_INTEGRAL = math.pi * 10395.0 / 46080.0  # Wallis: (11!!/12!!) pi


def zero_state(basis):
    return StatePair(zero_field(basis), zero_field(basis))


# -- norms ---------------------------------------------------------------------


def test_energy_norm_eigenstates():
    b = make_basis(1, 4, 4)
    assert energy_norm(StatePair(basis_vector(b, 0), zero_field(b))) == pytest.approx(1.0)
    xi = StatePair(zero_field(b), basis_vector(b, 0))
    assert energy_norm(xi) == pytest.approx(1.0)
    assert e1_norm(xi) == pytest.approx(1.0)
    assert e1_norm(StatePair(basis_vector(b, 1), zero_field(b))) == pytest.approx(4.0)


def test_e_delta_interpolates(basis8, rng):
    xi = random_state(basis8, rng)
    assert e_delta_norm(xi, 0.0) == pytest.approx(energy_norm(xi))
    assert e_delta_norm(xi, 1.0) == pytest.approx(e1_norm(xi))


def test_lp_norm_parseval(basis8, rng):
    xi = random_state(basis8, rng)
    assert lp_norm(xi.u, 2.0) == pytest.approx(
        math.sqrt(np.sum(xi.u.coeffs**2)), abs=1e-10
    )


def test_lp_norm_sin6_oracle():
    b = make_basis(1, 4, 4)
    expect = ((2.0 / math.pi) ** 3 * SIN6_INTEGRAL) ** (1.0 / 6.0)
    assert lp_norm(basis_vector(b, 0), 6.0) == pytest.approx(expect, abs=1e-12)


def test_lp_norm_monotone_in_p_for_unit_mass():
    # on a probability-normalized measure |u|_p increases with p; our measure
    # has mass pi, so compare the normalized quantities
    b = make_basis(1, 4, 4)
    u = basis_vector(b, 0)
    vol = math.pi
    normalized = [lp_norm(u, p) / vol ** (1.0 / p) for p in (2, 4, 6, 8)]
    assert all(a < b_ for a, b_ in zip(normalized, normalized[1:]))


def test_modified_energy_norm_adds_lp_term(basis8, rng):
    xi = random_state(basis8, rng)
    base = energy_norm(xi) ** 2
    assert modified_energy_norm(xi, 3) == pytest.approx(
        math.sqrt(base + lp_norm(xi.u, 6.0) ** 6)
    )


def test_lp_norm_rejects_p_below_one(basis8, rng):
    with pytest.raises(ValueError):
        lp_norm(random_state(basis8, rng).u, 0.5)


# -- space-time norms ----------------------------------------------------------


def test_strichartz_zero_trajectory(basis8):
    traj = linear_evolve(basis8, 1.0, None, zero_state(basis8), 1.0, 1e-2)
    assert strichartz_norm(traj, 0.0, 1.0) == 0.0


def test_strichartz_stationary_exact():
    b = make_basis(1, 4, 8)
    g = field_from_modes(b, {(1,): 1.0})
    ustar = type(g)(b, g.coeffs / b.eigenvalues)
    traj = linear_evolve(b, 1.0, g, StatePair(ustar, zero_field(b)), 1.0, 1e-2)
    expect = lp_norm(ustar, 12.0) * 1.0 ** (1.0 / 4.0)
    assert strichartz_norm(traj, 0.0, 1.0) == pytest.approx(expect, rel=1e-12)


def test_strichartz_single_mode_matches_quadrature_oracle():
    # grid_factor 8 makes the sin^12 quadrature exact; time integral by quad
    b = make_basis(1, 1, 8)
    traj = linear_evolve(b, 1.0, None, StatePair(basis_vector(b, 0), zero_field(b)), 1.0, 1e-3)
    l12 = ((2.0 / math.pi) ** 6 * SIN12_INTEGRAL) ** (1.0 / 12.0)
    integral, _ = quad(lambda t: abs(damped_mode(1.0, 1.0, 1.0, 0.0, t)[0] * l12) ** 4, 0, 1)
    assert strichartz_norm(traj, 0.0, 1.0) == pytest.approx(integral**0.25, rel=1e-9)


def test_strichartz_window_validation(basis8):
    traj = linear_evolve(basis8, 1.0, None, zero_state(basis8), 1.0, 1e-2)
    with pytest.raises(ValueError):
        strichartz_norm(traj, 0.0, 2.0)


def test_interpolation_theta_one_is_identity(basis8, rng):
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.4), 1.0, 1e-2)
    rep = interpolation_check(traj, 0.0, 1.0, 1.0)
    assert rep.ratio == pytest.approx(1.0, abs=1e-12)


def test_interpolation_theta_zero_below_sampled_sobolev_constant(basis8, rng):
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.4), 1.0, 1e-2)
    rep = interpolation_check(traj, 0.0, 1.0, 0.0)
    # sampled discrete H1 -> L6 constant, maximized over random fields and the
    # trajectory's own states
    candidates = [random_state(basis8, rng).u for _ in range(200)]
    candidates += [s.u for s in traj.states]
    c6 = max(
        lp_norm(u, 6.0) / math.sqrt(np.sum(basis8.eigenvalues * u.coeffs**2))
        for u in candidates
        if np.any(u.coeffs != 0)
    )
    assert rep.ratio <= c6 * (1.0 + 1e-12)


def test_interpolation_theta_45_is_l5l10(basis8, rng):
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.4), 1.0, 1e-2)
    rep = interpolation_check(traj, 0.0, 1.0, 0.8)
    assert rep.lhs == pytest.approx(space_time_norm(traj, 0.0, 1.0, 5.0, 10.0))


def test_interpolation_rejects_bad_theta(basis8):
    traj = linear_evolve(basis8, 1.0, None, zero_state(basis8), 1.0, 1e-2)
    with pytest.raises(ValueError):
        interpolation_check(traj, 0.0, 1.0, 1.5)


# -- energy identity -----------------------------------------------------------


def test_energy_conserved_in_undamped_limit():
    b = make_basis(1, 4, 4)
    prob = free_problem(b, gamma=1e-12)
    xi = StatePair(basis_vector(b, 0), basis_vector(b, 2))
    traj = evolve(prob, xi, 1.0, 1e-3)
    assert residual_per_unit_time(traj) < 1e-10


def test_energy_identity_order_two(basis8, rng):
    prob = quintic_problem(basis8)
    xi = random_state(basis8, rng, e_norm=0.4, max_mode=4)
    dts = [1e-2, 5e-3, 2.5e-3]
    resid = [residual_per_unit_time(evolve(prob, xi, 1.0, dt)) for dt in dts]
    order = fit_convergence_order(dts, resid)
    assert 1.8 <= order <= 2.2


def test_energy_identity_stationary_state():
    # equilibrium of the one-mode truncation from an independent root-finder
    b = make_basis(1, 4, 4)
    g1 = 0.5
    prob = quintic_problem(b, forcing=field_from_modes(b, {(1,): g1}), galerkin_n=1)
    bstar = single_mode_equilibrium_amplitude(1.0, prob.nonlinearity.coeffs, g1)
    xi = StatePair(bstar * basis_vector(b, 0), zero_field(b))
    traj = evolve(prob, xi, 1.0, 1e-3)
    assert np.max(energy_identity_residual(traj)) < 1e-10
    drift = max(abs(s.u.coeffs[0] - bstar) for s in traj.states)
    assert drift < 1e-10


def test_energy_report_invariants(basis8, rng):
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.4), 1.0, 1e-2)
    rep = energy_report(traj)
    assert np.all(rep.e_norm >= 0)
    assert np.all(np.diff(rep.dissipation_accum) >= 0)
    assert np.all(np.isfinite(rep.identity_residual))
    assert np.all(rep.e_norm_modified >= rep.e_norm)


def test_shifted_energy_monotone_for_dissipative_run(basis8, rng):
    # g = 0 and certified dissipativity: E decreases up to the scheme residual
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.4), 2.0, 1e-2)
    e = np.array([full_energy(prob, s) for s in traj.states])
    resid = energy_identity_residual(traj)
    assert np.all(np.diff(e) <= resid + 1e-13)


# -- perturbed identity ---------------------------------------------------------


def test_perturbed_report_zero_trajectory(basis8):
    prob = quintic_problem(basis8)
    traj = evolve(prob, zero_state(basis8), 1.0, 1e-2)
    rep = perturbed_energy_report(traj, *default_perturbation_params(1.0))
    assert np.all(rep.e_alpha == 0.0)
    assert np.all(rep.residual == 0.0)
    assert rep.integrated_residual == pytest.approx(0.0, abs=1e-300)


def test_perturbed_parameter_constraint_enforced(basis8, rng):
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.2), 0.1, 1e-2)
    with pytest.raises(ValueError):
        perturbed_energy_report(traj, 0.25, 0.25)  # alpha = kappa violates 4k <= a


def test_perturbed_forcing_term_vanishes_without_forcing(basis8, rng):
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.3), 0.5, 1e-2)
    rep = perturbed_energy_report(traj, *default_perturbation_params(1.0))
    assert np.all(rep.forcing_pairing == 0.0)


def test_phi_alpha_nonnegative_for_quintic(basis8, rng):
    # alpha u^6 - kappa u^6/6 >= 0 pointwise when 4 kappa <= alpha
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.5), 0.5, 1e-2)
    rep = perturbed_energy_report(traj, *default_perturbation_params(1.0))
    assert np.all(rep.phi_alpha_mass >= -1e-12)


def test_perturbed_residual_small_and_integrated(basis8, rng):
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.4, max_mode=4), 1.0, 1e-3)
    rep = perturbed_energy_report(traj, *default_perturbation_params(1.0))
    assert np.max(rep.residual) < 1e-5  # centered-difference defect, O(dt^2)
    assert rep.integrated_residual < 1e-5


def test_g_alpha_positivity_against_eigen_oracle(basis8):
    alpha, kappa = default_perturbation_params(1.0)
    k1, k2 = g_alpha_positivity(basis8, 1.0, alpha, kappa, n_samples=1000, seed=3)
    exact_min = g_alpha_min_eigenvalue(basis8.eigenvalues, 1.0, alpha, kappa)
    assert exact_min > 0
    assert k1 >= exact_min - 1e-12
    assert k2 >= k1 > 0


# -- decay fits ------------------------------------------------------------------


def test_decay_fit_exact_exponential():
    t = np.linspace(0, 10, 101)
    fit = decay_fit(t, 3.0 * np.exp(-2.0 * t))
    assert fit.rate == pytest.approx(2.0, abs=1e-8)
    assert fit.amplitude == pytest.approx(3.0, rel=1e-8)


def test_decay_fit_constant_series():
    t = np.linspace(0, 10, 51)
    fit = decay_fit(t, np.full_like(t, 7.0))
    assert fit.rate == pytest.approx(0.0, abs=1e-12)


def test_decay_fit_linear_mode_envelope_rate():
    b = make_basis(1, 1, 4)
    xi = StatePair(basis_vector(b, 0), zero_field(b))
    traj = linear_evolve(b, 1.0, None, xi, 300.0, 0.1)
    vals = np.array([energy_norm(s) for s in traj.states])
    fit = decay_fit(traj.times, vals)
    assert fit.rate == pytest.approx(0.5, abs=1e-3)


def test_decay_fit_rejects_short_or_nonpositive():
    with pytest.raises(ValueError):
        decay_fit(np.arange(5.0), np.ones(5))
    t = np.linspace(0, 10, 20)
    with pytest.raises(ValueError):
        decay_fit(t, np.concatenate([np.ones(10), -np.ones(10)]))


# -- Strichartz ratio probe -------------------------------------------------------


def test_ratio_probe_runs_and_reports(basis8):
    rep = strichartz_ratio_probe(basis8, 1.0, ensemble_size=5, T=1.0, seed=11)
    assert rep.ratios.shape == (5,)
    assert np.all(np.isfinite(rep.ratios))
    assert rep.max >= rep.mean > 0
    assert np.all(np.isfinite(rep.dissipative_ratios))


def test_ratio_probe_deterministic(basis8):
    a = strichartz_ratio_probe(basis8, 1.0, 3, 1.0, seed=7)
    b = strichartz_ratio_probe(basis8, 1.0, 3, 1.0, seed=7)
    assert np.array_equal(a.ratios, b.ratios)


def test_ratio_scale_invariance(basis8, rng):
    # the defining ratio is homogeneous of degree zero in (xi0, G)
    xi = random_state(basis8, rng)
    T, dt = 1.0, 1e-2
    n = int(round(T / dt))
    gf = random_state(basis8, rng).u
    seq = [gf * math.sin(2.0 * i * dt) for i in range(n + 1)]

    def ratio(scale):
        traj = linear_evolve(basis8, 1.0, [s * scale for s in seq], scale * xi, T, dt)
        denom = scale * energy_norm(xi) + scale * np.trapezoid(
            [math.sqrt(np.sum(s.coeffs**2)) for s in seq], dx=dt
        )
        return strichartz_norm(traj, 0.0, T) / denom

    assert ratio(1.0) == pytest.approx(ratio(1000.0), rel=1e-12)


def test_ratio_probe_rejects_empty_ensemble(basis8):
    with pytest.raises(ValueError):
        strichartz_ratio_probe(basis8, 1.0, 0, 1.0, seed=0)


def test_degenerate_zero_state_rejected(basis8):
    from qwlab.spectral import random_state as rs

    class ZeroRng:
        def standard_normal(self, n):
            return np.zeros(n)

    with pytest.raises(ValueError):
        rs(basis8, ZeroRng())


# -- continuous dependence ---------------------------------------------------------


def test_continuous_dependence_identical_data(basis8, rng):
    prob = quintic_problem(basis8)
    xi = random_state(basis8, rng, e_norm=0.3)
    rep = continuous_dependence_probe(prob, xi, xi, 0.5, 1e-2)
    assert np.all(rep.difference == 0.0)
    assert rep.bounded


def test_continuous_dependence_linear_contraction(basis8, rng):
    # f = 0, g = 0: the discrete energy of the difference is nonincreasing
    prob = free_problem(basis8)
    xa = random_state(basis8, rng)
    xb = xa + random_state(basis8, rng, e_norm=1e-3)
    rep = continuous_dependence_probe(prob, xa, xb, 1.0, 1e-2)
    assert np.all(rep.difference <= rep.difference[0] * (1.0 + 1e-12))
    assert rep.bounded


def test_continuous_dependence_small_perturbation_quintic(basis8, rng):
    prob = quintic_problem(basis8)
    xa = random_state(basis8, rng, e_norm=0.5)
    xb = xa + random_state(basis8, rng, e_norm=1e-8)
    rep = continuous_dependence_probe(prob, xa, xb, 1.0, 1e-3)
    assert np.max(rep.difference) <= 1e-4
    assert rep.bounded
    assert np.all(rep.difference <= rep.majorant * (1.0 + 1e-9))


def test_continuous_dependence_rejects_mismatched_problem(basis8, basis2d, rng):
    prob = quintic_problem(basis8)
    xa = random_state(basis8, rng)
    xb = random_state(basis2d, rng)
    with pytest.raises(ValueError):
        continuous_dependence_probe(prob, xa, xb, 0.1, 1e-2)


# -- H2 bound -----------------------------------------------------------------------


def test_h2_bound_zero_state(basis8):
    prob = quintic_problem(basis8)
    traj = evolve(prob, zero_state(basis8), 0.2, 1e-2)
    rep = h2_bound_check(traj, K_cert=0.0)
    assert np.all(rep.lhs == 0.0)
    assert np.all(rep.ok)


def test_h2_bound_stationary_state():
    b = make_basis(1, 4, 4)
    g1 = 0.5
    prob = quintic_problem(b, forcing=field_from_modes(b, {(1,): g1}), galerkin_n=1)
    bstar = single_mode_equilibrium_amplitude(1.0, prob.nonlinearity.coeffs, g1)
    xi = StatePair(bstar * basis_vector(b, 0), zero_field(b))
    traj = evolve(prob, xi, 0.5, 1e-2)
    rep = h2_bound_check(traj, K_cert=0.0)
    assert np.all(rep.ok)
    # lhs is exactly lam_1^2 b*^2 for the one-mode equilibrium
    assert rep.lhs[0] == pytest.approx(bstar**2, rel=1e-10)


def test_h2_bound_linear_discrete_constant():
    # f = 0, g = 0 single mode: lhs <= 2 * base along the closed-form orbit
    b = make_basis(1, 1, 4)
    prob = free_problem(b)
    xi = StatePair(basis_vector(b, 0), zero_field(b))
    traj = evolve(prob, xi, 5.0, 1e-3)
    rep = h2_bound_check(traj, K_cert=0.0)
    base = rep.rhs  # C term is zero since g = 0
    ratio = np.max(rep.lhs / np.maximum(base, 1e-300))
    assert ratio <= 2.0 + 1e-6


def test_dtu_negative_norm_examples():
    b = make_basis(1, 4, 4)
    prob = free_problem(b)
    xi = StatePair(zero_field(b), basis_vector(b, 1))  # ut = e_2, lam = 4
    traj = evolve(prob, xi, 0.01, 0.01)
    series = dtu_negative_norm_series(traj, 1.0)
    assert series[0] == pytest.approx(0.5)
    zero_traj = evolve(prob, zero_state(b), 0.01, 0.01)
    assert np.all(dtu_negative_norm_series(zero_traj, 0.5) == 0.0)
    with pytest.raises(ValueError):
        dtu_negative_norm_series(traj, 1.5)


# -- CSV ------------------------------------------------------------------------------


def test_energy_csv_roundtrip(tmp_path, basis8, rng):
    prob = quintic_problem(basis8)
    traj = evolve(prob, random_state(basis8, rng, e_norm=0.3), 0.2, 1e-2)
    path = tmp_path / "energy.csv"
    rep, pert = write_energy_csv(path, traj)
    cols = read_csv(path)
    assert list(cols.keys()) == ENERGY_CSV_HEADER
    # 17 significant digits round-trip doubles exactly
    assert np.array_equal(cols["e_norm"], rep.e_norm)
    assert np.array_equal(cols["e_alpha"], pert.e_alpha)
    assert np.array_equal(cols["t"], traj.times)
