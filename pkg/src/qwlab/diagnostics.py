"""Norms, energy functionals, identities and estimate probes.

Everything here is a pure function of immutable trajectories.  Quadrature
conventions: space integrals use the oversampled sine grid (exact for the
polynomial densities that appear in the energies), the dissipation integral
uses the midpoint rule matching the integrator, and space-time norms use
composite Simpson over the stored samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .csvio import write_csv
from .nonlinearity import NonlinearitySpec, eval_F, eval_f
from .solver import ProblemSpec, Trajectory, _galerkin_rhs_nl, evolve, linear_evolve
from .spectral import (
    Basis,
    CoeffField,
    StatePair,
    random_field,
    random_state,
    sobolev_norm,
    to_grid,
)

__all__ = [
    "energy_norm",
    "e1_norm",
    "e_delta_norm",
    "modified_energy_norm",
    "lp_norm",
    "full_energy",
    "strichartz_norm",
    "space_time_norm",
    "interpolation_check",
    "energy_identity_residual",
    "residual_per_unit_time",
    "EnergyReport",
    "energy_report",
    "PerturbedEnergyReport",
    "perturbed_energy_report",
    "default_perturbation_params",
    "g_alpha_positivity",
    "FitReport",
    "decay_fit",
    "fit_convergence_order",
    "linear_decay_rate",
    "RatioProbeReport",
    "strichartz_ratio_probe",
    "GrowthReport",
    "continuous_dependence_probe",
    "H2BoundReport",
    "h2_bound_check",
    "dtu_negative_norm_series",
    "write_energy_csv",
    "ENERGY_CSV_HEADER",
]


# -- state norms --------------------------------------------------------------


def energy_norm(xi: StatePair) -> float:
    """|xi|_E = (|grad u|^2 + |ut|^2)^(1/2)."""
    return math.sqrt(sobolev_norm(xi.u, 1.0) ** 2 + sobolev_norm(xi.ut, 0.0) ** 2)


def e1_norm(xi: StatePair) -> float:
    """One derivative smoother: (|u|_{H^2}^2 + |ut|_{H^1}^2)^(1/2)."""
    return math.sqrt(sobolev_norm(xi.u, 2.0) ** 2 + sobolev_norm(xi.ut, 1.0) ** 2)


def e_delta_norm(xi: StatePair, delta: float) -> float:
    """Fractional gain space: (|u|_{H^(1+delta)}^2 + |ut|_{H^delta}^2)^(1/2)."""
    return math.sqrt(
        sobolev_norm(xi.u, 1.0 + delta) ** 2 + sobolev_norm(xi.ut, delta) ** 2
    )


def lp_norm(u: CoeffField, p: float) -> float:
    """L^p norm by grid quadrature on the oversampled grid."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    vals = np.abs(to_grid(u)) ** p
    return float((np.sum(vals) * u.basis.quadrature_weight) ** (1.0 / p))


def modified_energy_norm(xi: StatePair, p: int) -> float:
    """Energy norm augmented by |u|_{L^(p+3)}^(p+3) (finite-energy space for p > 3)."""
    return math.sqrt(energy_norm(xi) ** 2 + lp_norm(xi.u, p + 3) ** (p + 3))


def _potential_mass(problem: ProblemSpec, u: CoeffField) -> float:
    """(F(u), 1) by grid quadrature; exact for polynomial F at grid_factor >= 4."""
    if problem.nonlinearity.is_zero:
        return 0.0
    vals = eval_F(problem.nonlinearity, to_grid(u))
    return float(np.sum(vals) * u.basis.quadrature_weight)


def _fu_mass(problem: ProblemSpec, u: CoeffField) -> float:
    """(f(u) u, 1) by grid quadrature."""
    if problem.nonlinearity.is_zero:
        return 0.0
    g = to_grid(u)
    return float(np.sum(eval_f(problem.nonlinearity, g) * g) * u.basis.quadrature_weight)


def full_energy(problem: ProblemSpec, xi: StatePair) -> float:
    """E(u) = 1/2 |xi|_E^2 + (F(u), 1) - (g, u)."""
    quad = 0.5 * energy_norm(xi) ** 2
    pot = _potential_mass(problem, xi.u)
    pair = float(np.dot(problem.forcing.coeffs, xi.u.coeffs))
    return quad + pot - pair


# -- space-time norms ---------------------------------------------------------


def _window_indices(traj: Trajectory, t0: float, t1: float) -> tuple[int, int]:
    if t1 <= t0:
        raise ValueError(f"empty window [{t0}, {t1}]")
    i0 = traj.index_at(t0)
    i1 = traj.index_at(t1)
    return i0, i1


def space_time_norm(
    traj: Trajectory, t0: float, t1: float, q_time: float, q_space: float
) -> float:
    """|u|_{L^q_time(t0,t1; L^q_space)} over stored samples (Simpson in time)."""
    i0, i1 = _window_indices(traj, t0, t1)
    vals = np.array([lp_norm(s.u, q_space) for s in traj.states[i0 : i1 + 1]])
    if math.isinf(q_time):
        return float(np.max(vals))
    times = traj.times[i0 : i1 + 1]
    integral = float(simpson(vals**q_time, x=times))
    return max(integral, 0.0) ** (1.0 / q_time)


def strichartz_norm(
    traj: Trajectory, t0: float, t1: float, q_time: float = 4, q_space: float = 12
) -> float:
    """The L^4(t0,t1; L^12) mixed norm controlling the critical nonlinearity."""
    return space_time_norm(traj, t0, t1, q_time, q_space)


@dataclass(frozen=True)
class InterpolationReport:
    theta: float
    lhs: float
    strichartz_factor: float
    energy_factor: float
    ratio: float


def interpolation_check(traj: Trajectory, t0: float, t1: float, theta: float) -> InterpolationReport:
    """Empirical ratio |u|_{L^(4/th) L^(12/(2-th))} / (|u|_{L4 L12}^th |u|_{Loo H1}^(1-th))."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    q_time = math.inf if theta == 0.0 else 4.0 / theta
    q_space = 12.0 / (2.0 - theta)
    lhs = space_time_norm(traj, t0, t1, q_time, q_space)
    a = strichartz_norm(traj, t0, t1)
    i0, i1 = _window_indices(traj, t0, t1)
    b = max(sobolev_norm(s.u, 1.0) for s in traj.states[i0 : i1 + 1])
    denom = a**theta * b ** (1.0 - theta)
    ratio = lhs / denom if denom > 0 else 0.0
    return InterpolationReport(theta, lhs, a, b, ratio)


# -- energy identity ----------------------------------------------------------


def _midpoint_velocity_sq(traj: Trajectory) -> np.ndarray:
    """|(v_i + v_{i+1})/2|_{L^2}^2 per sample interval (matches the scheme)."""
    out = np.empty(traj.n_samples - 1)
    for i in range(traj.n_samples - 1):
        vm = 0.5 * (traj.states[i].ut.coeffs + traj.states[i + 1].ut.coeffs)
        out[i] = float(np.dot(vm, vm))
    return out


def energy_identity_residual(traj: Trajectory) -> np.ndarray:
    """Per-interval residual |E(t_{i+1}) - E(t_i) + gamma * dt * |v_mid|^2|.

    With stride 1 this is the exact discrete defect of the midpoint scheme
    (pure O(dt^2) per unit time); coarser sampling adds quadrature error.
    """
    energies = np.array([full_energy(traj.problem, s) for s in traj.states])
    vmid = _midpoint_velocity_sq(traj)
    return np.abs(np.diff(energies) + traj.problem.gamma * traj.dt * vmid)


def residual_per_unit_time(traj: Trajectory) -> float:
    r = energy_identity_residual(traj)
    span = traj.t_final - traj.t0
    return float(np.sum(r) / span)


@dataclass(frozen=True)
class EnergyReport:
    """Per-sample energy bookkeeping (arrays indexed by sample)."""

    t: np.ndarray
    e_norm: np.ndarray
    e_norm_modified: np.ndarray
    full_energy: np.ndarray
    e1_norm: np.ndarray
    dissipation_accum: np.ndarray
    identity_residual: np.ndarray


def energy_report(traj: Trajectory) -> EnergyReport:
    p = traj.problem.nonlinearity.growth_exponent
    t = traj.times
    e = np.array([energy_norm(s) for s in traj.states])
    em = np.array([modified_energy_norm(s, p) for s in traj.states])
    fe = np.array([full_energy(traj.problem, s) for s in traj.states])
    e1 = np.array([e1_norm(s) for s in traj.states])
    vmid = _midpoint_velocity_sq(traj)
    diss = np.concatenate([[0.0], np.cumsum(traj.dt * vmid)])
    res = np.concatenate([[0.0], np.abs(np.diff(fe) + traj.problem.gamma * traj.dt * vmid)])
    return EnergyReport(t, e, em, fe, e1, diss, res)


# -- multiplier-perturbed energy identity -------------------------------------


def default_perturbation_params(gamma: float) -> tuple[float, float]:
    """alpha = gamma/4 and kappa = alpha/4 (satisfies 4*kappa <= alpha)."""
    alpha = gamma / 4.0
    return alpha, alpha / 4.0


@dataclass(frozen=True)
class PerturbedEnergyReport:
    alpha: float
    kappa: float
    t: np.ndarray
    e_alpha: np.ndarray
    g_alpha_form: np.ndarray      # the damping quadratic form G_alpha(u)
    phi_alpha_mass: np.ndarray    # (alpha f(u) u - kappa F(u), 1)
    forcing_pairing: np.ndarray   # ((kappa - alpha) g, u)
    residual: np.ndarray          # centered-difference defect of the rate identity
    integrated_residual: float    # max defect of the exponentially weighted integral form


def _check_perturbation_params(alpha: float, kappa: float) -> None:
    if not (alpha > 0 and kappa > 0):
        raise ValueError(f"alpha and kappa must be positive, got {alpha}, {kappa}")
    if 4.0 * kappa > alpha * (1 + 1e-12):
        raise ValueError(f"parameter constraint 4*kappa <= alpha violated: {kappa}, {alpha}")


def _e_alpha(problem: ProblemSpec, xi: StatePair, alpha: float) -> float:
    cross = float(np.dot(xi.u.coeffs, xi.ut.coeffs))
    usq = sobolev_norm(xi.u, 0.0) ** 2
    return full_energy(problem, xi) + alpha * cross + 0.5 * alpha * problem.gamma * usq


def _g_alpha(problem: ProblemSpec, xi: StatePair, alpha: float, kappa: float) -> float:
    gamma = problem.gamma
    ut_sq = sobolev_norm(xi.ut, 0.0) ** 2
    grad_sq = sobolev_norm(xi.u, 1.0) ** 2
    cross = float(np.dot(xi.u.coeffs, xi.ut.coeffs))
    usq = sobolev_norm(xi.u, 0.0) ** 2
    return (
        (gamma - alpha - 0.5 * kappa) * ut_sq
        + (alpha - 0.5 * kappa) * grad_sq
        - kappa * alpha * cross
        - 0.5 * gamma * alpha * kappa * usq
    )


def perturbed_energy_report(
    traj: Trajectory, alpha: float, kappa: float
) -> PerturbedEnergyReport:
    """Evaluate the multiplier identity d/dt E_a + k E_a + G_a + (Phi_a,1) + (g_a,u) = 0.

    The rate residual uses centered differencing of E_alpha (interior samples;
    endpoints are reported as zero).  The integrated residual checks the
    e^(kappa s)-weighted form of the same identity over the whole window.
    """
    _check_perturbation_params(alpha, kappa)
    problem = traj.problem
    t = traj.times
    n = traj.n_samples
    ea = np.array([_e_alpha(problem, s, alpha) for s in traj.states])
    ga = np.array([_g_alpha(problem, s, alpha, kappa) for s in traj.states])
    phi = np.array(
        [
            alpha * _fu_mass(problem, s.u) - kappa * _potential_mass(problem, s.u)
            for s in traj.states
        ]
    )
    pair = np.array(
        [(kappa - alpha) * float(np.dot(problem.forcing.coeffs, s.u.coeffs)) for s in traj.states]
    )
    residual = np.zeros(n)
    if n >= 3:
        dt = traj.dt
        ddt = (ea[2:] - ea[:-2]) / (2.0 * dt)
        residual[1:-1] = np.abs(ddt + kappa * ea[1:-1] + ga[1:-1] + phi[1:-1] + pair[1:-1])
    # integrated form: e^(k t) E_a(t) - E_a(t0) + int e^(k s) (G_a + Phi_a + pair) ds = 0
    w = np.exp(kappa * (t - t[0]))
    integrand = w * (ga + phi + pair)
    integral = cumulative_simpson(integrand, x=t, initial=0.0) if n > 1 else np.zeros(n)
    defect = w * ea - ea[0] + integral
    return PerturbedEnergyReport(
        alpha, kappa, t, ea, ga, phi, pair, residual, float(np.max(np.abs(defect)))
    )


def g_alpha_positivity(
    basis: Basis,
    gamma: float,
    alpha: float,
    kappa: float,
    n_samples: int = 1000,
    seed: int = 0,
) -> tuple[float, float]:
    """(K1, K2): extreme values of G_alpha over random unit-energy states."""
    _check_perturbation_params(alpha, kappa)
    rng = np.random.default_rng(seed)
    dummy = ProblemSpec(
        basis=basis,
        gamma=gamma,
        forcing=CoeffField(basis, np.zeros(basis.n_modes)),
        nonlinearity=NonlinearitySpec((0.0,)),
        galerkin_n=basis.n_modes,
    )
    lo, hi = math.inf, -math.inf
    for _ in range(n_samples):
        xi = random_state(basis, rng, e_norm=1.0)
        val = _g_alpha(dummy, xi, alpha, kappa)
        lo = min(lo, val)
        hi = max(hi, val)
    return lo, hi


# -- exponential fits ---------------------------------------------------------


@dataclass(frozen=True)
class FitReport:
    """Least-squares fit value(t) ~ amplitude * exp(-rate * t) over a window."""

    amplitude: float
    rate: float
    residual: float
    window: tuple[float, float]
    n_points: int


def decay_fit(times, values) -> FitReport:
    """Fit log(value) linearly in t over the tail half of the series."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValueError("times and values must be 1-D arrays of equal length")
    if len(t) < 10:
        raise ValueError(f"need at least 10 samples to fit, got {len(t)}")
    i0 = len(t) // 2
    t_fit, v_fit = t[i0:], v[i0:]
    if np.any(v_fit <= 0.0):
        raise ValueError("nonpositive values in the fit window; caller must window the series")
    logv = np.log(v_fit)
    slope, intercept = np.polyfit(t_fit, logv, 1)
    resid = float(np.sqrt(np.mean((logv - (slope * t_fit + intercept)) ** 2)))
    return FitReport(
        amplitude=float(np.exp(intercept)),
        rate=float(-slope),
        residual=resid,
        window=(float(t_fit[0]), float(t_fit[-1])),
        n_points=len(t_fit),
    )


def fit_convergence_order(dts, errors) -> float:
    """Slope of log(error) against log(dt): the measured order of accuracy."""
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        raise ValueError("errors must be positive for an order fit")
    slope, _ = np.polyfit(np.log(dts), np.log(errors), 1)
    return float(slope)


def linear_decay_rate(basis: Basis, gamma: float) -> float:
    """Sharp decay rate of the free damped wave semigroup on the basis."""
    lam1 = float(basis.eigenvalues[0])
    return gamma / 2.0 - math.sqrt(max(0.0, gamma * gamma / 4.0 - lam1))


# -- Strichartz ratio probe ---------------------------------------------------


@dataclass(frozen=True)
class RatioProbeReport:
    ratios: np.ndarray
    dissipative_ratios: np.ndarray
    beta: float
    max: float
    mean: float
    seed: int


def strichartz_ratio_probe(
    basis: Basis,
    gamma: float,
    ensemble_size: int,
    T: float,
    seed: int,
    dt: float = 0.01,
    window: float = 1.0,
) -> RatioProbeReport:
    """Distribution of |v|_{L^4 L^12} / (|xi_0|_E + |G|_{L^1 L^2}) over random data.

    Each member draws a unit-energy state and a separately normalized forcing
    G(t) = a(t) * Ghat with |Ghat|_{L^2} = 1 and the trapezoid integral of
    |a| equal to one, then integrates the linear equation exactly per mode.
    The dissipative variant reports the windowed quantity
    (|xi_v(t)|_E + |v|_{L^4(max(0,t-w),t; L^12)}) against the decaying
    majorant with beta = 0.9 * the sharp linear rate.
    """
    if ensemble_size < 1:
        raise ValueError("ensemble_size must be >= 1")
    rng = np.random.default_rng(seed)
    n_steps = int(round(T / dt))
    beta = 0.9 * linear_decay_rate(basis, gamma)
    ratios = np.empty(ensemble_size)
    dis_ratios = np.empty(ensemble_size)
    for j in range(ensemble_size):
        xi0 = random_state(basis, rng, e_norm=1.0)
        ghat = random_field(basis, rng)
        ghat = ghat * (1.0 / sobolev_norm(ghat, 0.0))
        # smooth random time profile, odd number of low frequencies
        amps = rng.standard_normal(3)
        phases = rng.uniform(0, 2 * np.pi, 3)
        ts = dt * np.arange(n_steps + 1)
        a = np.abs(
            sum(amps[k] * np.cos(2 * np.pi * (k + 1) * ts / T + phases[k]) for k in range(3))
        )
        a /= np.trapezoid(a, ts)
        G = [ghat * float(ai) for ai in a]
        traj = linear_evolve(basis, gamma, G, xi0, T, dt)
        denom = 1.0 + 1.0  # both inputs are unit-normalized
        ratios[j] = strichartz_norm(traj, 0.0, T) / denom
        # dissipative variant along the trajectory
        gnorm = a  # |G(t)|_{L^2} = |a(t)|
        worst = 0.0
        for i, t in enumerate(traj.times):
            if t <= 0:
                continue
            lhs = energy_norm(traj.states[i]) + strichartz_norm(
                traj, max(0.0, t - window), t
            )
            conv = float(np.trapezoid(np.exp(-beta * (t - ts[: i + 1])) * gnorm[: i + 1], ts[: i + 1]))
            rhs = math.exp(-beta * t) + conv
            worst = max(worst, lhs / rhs)
        dis_ratios[j] = worst
    return RatioProbeReport(
        ratios=ratios,
        dissipative_ratios=dis_ratios,
        beta=beta,
        max=float(np.max(ratios)),
        mean=float(np.mean(ratios)),
        seed=seed,
    )


# -- continuous dependence ----------------------------------------------------


@dataclass(frozen=True)
class GrowthReport:
    t: np.ndarray
    difference: np.ndarray
    majorant: np.ndarray
    c_fit: float
    bounded: bool


def continuous_dependence_probe(
    problem: ProblemSpec, xi_a: StatePair, xi_b: StatePair, T: float, dt: float
) -> GrowthReport:
    """Track |xi_1 - xi_2|_E against the Gronwall majorant
    |dxi(0)| * exp(c * int (1 + |u_1|_{L^12}^4 + |u_2|_{L^12}^4)) with c fitted."""
    ta = evolve(problem, xi_a, T, dt)
    tb = evolve(problem, xi_b, T, dt)
    t = ta.times
    diff = np.array(
        [energy_norm(sa - sb) for sa, sb in zip(ta.states, tb.states)]
    )
    integrand = np.array(
        [
            1.0 + lp_norm(sa.u, 12.0) ** 4 + lp_norm(sb.u, 12.0) ** 4
            for sa, sb in zip(ta.states, tb.states)
        ]
    )
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(t))])
    d0 = diff[0]
    if d0 == 0.0:
        c_fit = 0.0
        majorant = np.zeros_like(diff)
        bounded = bool(np.all(diff <= 1e-300))
    else:
        with np.errstate(divide="ignore"):
            growth = np.log(np.maximum(diff[1:], 1e-300) / d0)
        c_fit = float(max(0.0, np.max(growth / np.maximum(cum[1:], 1e-300))))
        majorant = d0 * np.exp(c_fit * cum)
        bounded = bool(np.all(diff <= majorant * (1.0 + 1e-9)))
    return GrowthReport(t, diff, majorant, c_fit, bounded)


# -- elliptic regularity check ------------------------------------------------


@dataclass(frozen=True)
class H2BoundReport:
    t: np.ndarray
    lhs: np.ndarray        # |u|_{H^2}^2
    rhs: np.ndarray        # C |g|^2 + |xi_v|_E^2 + K |xi_u|_E^2
    constant: float
    ok: np.ndarray         # boolean series lhs <= rhs


def h2_bound_check(traj: Trajectory, K_cert: float, C: float | None = None) -> H2BoundReport:
    """Elliptic H^2 bound along the flow; d^2_t u is recovered from the
    equation (never by double differencing)."""
    problem = traj.problem
    lam = problem.basis.eigenvalues
    g = problem.forcing.coeffs.copy()
    g[problem.galerkin_n :] = 0.0
    gnorm_sq = float(np.dot(problem.forcing.coeffs, problem.forcing.coeffs))
    lhs = np.empty(traj.n_samples)
    base = np.empty(traj.n_samples)
    for i, s in enumerate(traj.states):
        u, v = s.u, s.ut
        lhs[i] = sobolev_norm(u, 2.0) ** 2
        utt = -lam * u.coeffs - problem.gamma * v.coeffs + g
        if not problem.nonlinearity.is_zero:
            utt = utt - _galerkin_rhs_nl(problem, u.coeffs)
        vt_sq = float(np.dot(utt, utt))
        base[i] = sobolev_norm(v, 1.0) ** 2 + vt_sq + K_cert * energy_norm(s) ** 2
    if C is None:
        if gnorm_sq > 0.0:
            C = float(max(0.0, np.max((lhs - base) / gnorm_sq)))
        else:
            C = 0.0
    rhs = C * gnorm_sq + base
    ok = lhs <= rhs * (1.0 + 1e-12) + 1e-300
    return H2BoundReport(traj.times, lhs, rhs, float(C), ok)


def dtu_negative_norm_series(traj: Trajectory, beta: float) -> np.ndarray:
    """|d_t u(t)|_{H^(-beta)} per sample, beta in (0, 1]."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return np.array([sobolev_norm(s.ut, -beta) for s in traj.states])


# -- CSV emission -------------------------------------------------------------

ENERGY_CSV_HEADER = [
    "t",
    "e_norm",
    "e_norm_modified",
    "full_energy",
    "e1_norm",
    "dissipation_accum",
    "identity_residual",
    "e_alpha",
    "perturbed_residual",
]


def write_energy_csv(path, traj: Trajectory, alpha: float | None = None, kappa: float | None = None):
    """Fixed-header per-sample energy CSV (17 significant digits)."""
    if alpha is None or kappa is None:
        alpha, kappa = default_perturbation_params(traj.problem.gamma)
    rep = energy_report(traj)
    pert = perturbed_energy_report(traj, alpha, kappa)
    write_csv(
        path,
        ENERGY_CSV_HEADER,
        [
            rep.t,
            rep.e_norm,
            rep.e_norm_modified,
            rep.full_energy,
            rep.e1_norm,
            rep.dissipation_accum,
            rep.identity_residual,
            pert.e_alpha,
            pert.residual,
        ],
    )
    return rep, pert
