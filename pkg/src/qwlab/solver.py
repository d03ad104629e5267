"""Time integration of the spectral Galerkin system

    d^2_t u + gamma d_t u - Laplace(u) + P_n f(u) = P_n g

by the implicit midpoint rule, plus the exactly-integrated linear problem
d^2_t v + gamma d_t v - Laplace(v) = G(t).

The midpoint stage equation is solved by fixed-point iteration; the stiff
linear part is inverted exactly per mode inside each sweep, so the iteration
contracts at a rate set by the nonlinearity alone, not by the largest
eigenvalue.  The converged scheme is the plain implicit midpoint rule: it
conserves the discrete energy of the undamped linear flow and keeps the
energy-identity residual a clean O(dt^2) quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .nonlinearity import NonlinearitySpec, eval_f
from .spectral import Basis, CoeffField, StatePair, analyze_raw, synth_raw, zero_field

__all__ = [
    "ProblemSpec",
    "Trajectory",
    "SolverError",
    "NonConvergence",
    "Overflow",
    "step",
    "evolve",
    "linear_evolve",
    "mode_propagator",
    "reverify",
]

STAGE_TOL = 1.0e-12
STAGE_MAX_ITER = 100
OVERFLOW_LIMIT = 1.0e150


class SolverError(Exception):
    """Base for integrator failures; `t` is the failing time when known."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class NonConvergence(SolverError):
    """Stage iteration did not reach tolerance (dt too large for this state)."""


class Overflow(SolverError):
    """A coefficient exceeded 1e150: blow-up of the discrete system."""


@dataclass(frozen=True)
class ProblemSpec:
    basis: Basis
    gamma: float
    forcing: CoeffField
    nonlinearity: NonlinearitySpec
    galerkin_n: int

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be strictly positive, got {self.gamma}")
        if not 1 <= self.galerkin_n <= self.basis.n_modes:
            raise ValueError(
                f"galerkin_n {self.galerkin_n} outside 1..{self.basis.n_modes}"
            )
        if self.forcing.basis is not self.basis:
            # allow structurally equal bases
            if (
                self.forcing.basis.dim,
                self.forcing.basis.modes_per_dim,
                self.forcing.basis.grid_factor,
            ) != (self.basis.dim, self.basis.modes_per_dim, self.basis.grid_factor):
                raise ValueError("forcing lives on a different basis")

    def with_galerkin_n(self, n: int) -> "ProblemSpec":
        return replace(self, galerkin_n=n)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled orbit: states[i] is the state at t0 + i*dt.

    `dt` is the sample spacing; the integrator step is `solver_dt` and
    consecutive samples are `stride` steps apart (dt = stride * solver_dt).
    """

    problem: ProblemSpec
    t0: float
    dt: float
    solver_dt: float
    stride: int
    states: tuple[StatePair, ...]

    @property
    def n_samples(self) -> int:
        return len(self.states)

    @property
    def t_final(self) -> float:
        return self.t0 + (self.n_samples - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_samples)

    def index_at(self, t: float) -> int:
        rel = (t - self.t0) / self.dt
        i = int(round(rel))
        if not 0 <= i < self.n_samples or abs(rel - i) > 1e-9 * max(1.0, abs(rel)):
            raise ValueError(f"time {t} is not a sample of this trajectory")
        return i

    def state_at(self, t: float) -> StatePair:
        return self.states[self.index_at(t)]


# -- nonlinear solver ---------------------------------------------------------


def _galerkin_rhs_nl(problem: ProblemSpec, u_coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of P_n f(u), evaluated pseudo-spectrally.

    Overflow to non-finite values is deliberate: the stage iteration detects
    and reports it as divergence.
    """
    basis = problem.basis
    with np.errstate(over="ignore", invalid="ignore"):
        vals = eval_f(problem.nonlinearity, synth_raw(basis, u_coeffs))
        out = analyze_raw(basis, vals)
    out[problem.galerkin_n :] = 0.0
    return out


def _forcing_coeffs(problem: ProblemSpec) -> np.ndarray:
    g = problem.forcing.coeffs.copy()
    g[problem.galerkin_n :] = 0.0
    return g


def step(problem: ProblemSpec, state: StatePair, dt: float) -> StatePair:
    """One implicit-midpoint step of the Galerkin system.

    Raises NonConvergence if the stage iteration fails to reach the 1e-12
    tolerance (scaled by the state magnitude above unit size) within 100
    sweeps, Overflow if any coefficient of the result exceeds 1e150.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    lam = problem.basis.eigenvalues
    gamma = problem.gamma
    h = 0.5 * dt
    g = _forcing_coeffs(problem)
    f_is_zero = problem.nonlinearity.is_zero

    u0 = state.u.coeffs
    v0 = state.ut.coeffs
    scale = max(1.0, float(np.max(np.abs(u0))), float(np.max(np.abs(v0))))
    tol = STAGE_TOL * scale
    det = (1.0 + h * gamma) + h * h * lam

    def resolvent(ru, rv):
        # (I - h L) m = r with L(u, v) = (v, -gamma v - lam u), solved per mode
        mu = ((1.0 + h * gamma) * ru + h * rv) / det
        mv = (rv - h * lam * ru) / det
        return mu, mv

    def nonlinear_term(mu_coeffs):
        return g if f_is_zero else g - _galerkin_rhs_nl(problem, mu_coeffs)

    # stage equation (I - h L) m = y_n + h (0, g - P f(m_u)); the resolvent is
    # exact, iteration is only over the nonlinearity
    mu, mv = resolvent(u0, v0 + h * nonlinear_term(u0))
    if not f_is_zero:
        for _ in range(STAGE_MAX_ITER):
            if not np.all(np.isfinite(mu)):
                raise NonConvergence("stage iteration diverged to non-finite values")
            nu, nv = resolvent(u0, v0 + h * nonlinear_term(mu))
            delta = max(np.max(np.abs(nu - mu)), np.max(np.abs(nv - mv)))
            mu, mv = nu, nv
            if delta <= tol:
                break
        else:
            raise NonConvergence(
                f"stage iteration stalled above {tol:g} after "
                f"{STAGE_MAX_ITER} sweeps (dt={dt:g} too large for this state?)"
            )
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(mv))):
            raise NonConvergence("stage iteration diverged to non-finite values")

    u1 = 2.0 * mu - u0
    v1 = 2.0 * mv - v0
    if max(np.max(np.abs(u1)), np.max(np.abs(v1))) > OVERFLOW_LIMIT:
        raise Overflow(f"coefficient magnitude exceeded {OVERFLOW_LIMIT:g}")
    return StatePair(CoeffField(problem.basis, u1), CoeffField(problem.basis, v1))


def _step_count(T: float, dt: float) -> int:
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-12 * max(1.0, abs(T)):
        raise ValueError(f"dt={dt} does not divide T={T}")
    return n


def _project_state(state: StatePair, n: int) -> StatePair:
    cu = state.u.coeffs.copy()
    cv = state.ut.coeffs.copy()
    cu[n:] = 0.0
    cv[n:] = 0.0
    return StatePair(CoeffField(state.basis, cu), CoeffField(state.basis, cv))


def evolve(
    problem: ProblemSpec,
    xi0: StatePair,
    T: float,
    dt: float,
    record_stride: int = 1,
) -> Trajectory:
    """Integrate over [0, T] with fixed step dt, recording every stride-th state.

    The initial data is projected onto the first galerkin_n modes (Galerkin
    data convention), after which the flow stays band-limited.  Deterministic:
    identical inputs give bit-identical trajectories.
    """
    n_steps = _step_count(T, dt)
    if record_stride < 1 or n_steps % record_stride != 0:
        raise ValueError(f"record_stride {record_stride} does not divide {n_steps} steps")
    state = _project_state(xi0, problem.galerkin_n)
    states = [state]
    for i in range(n_steps):
        try:
            state = step(problem, state, dt)
        except SolverError as err:
            err.t = (i + 1) * dt
            raise
        if (i + 1) % record_stride == 0:
            states.append(state)
    return Trajectory(
        problem=problem,
        t0=0.0,
        dt=dt * record_stride,
        solver_dt=dt,
        stride=record_stride,
        states=tuple(states),
    )


def reverify(traj: Trajectory) -> float:
    """Re-run every inter-sample segment; max absolute coefficient deviation."""
    worst = 0.0
    for i in range(traj.n_samples - 1):
        state = traj.states[i]
        for _ in range(traj.stride):
            state = step(traj.problem, state, traj.solver_dt)
        ref = traj.states[i + 1]
        worst = max(
            worst,
            float(np.max(np.abs(state.u.coeffs - ref.u.coeffs))),
            float(np.max(np.abs(state.ut.coeffs - ref.ut.coeffs))),
        )
    return worst


# -- linear problem: exact per-mode propagation -------------------------------


def mode_propagator(lam: np.ndarray, gamma: float, t: float):
    """Entries of exp(t*A) for A = [[0, 1], [-lam, -gamma]], vectorized in lam.

    Writes A = mu*I + B with mu = -gamma/2 and B^2 = (gamma^2/4 - lam) I, so
    exp(tA) = e^(mu t) (cosh-like * I + sinch-like * B) with the circular or
    hyperbolic branch chosen per mode.
    """
    lam = np.asarray(lam, dtype=float)
    mu = -0.5 * gamma
    disc = 0.25 * gamma * gamma - lam  # B^2 = disc * I
    c = np.empty_like(lam)
    s = np.empty_like(lam)

    osc = disc < -1e-14
    hyp = disc > 1e-14
    mid = ~(osc | hyp)
    if np.any(osc):
        w = np.sqrt(-disc[osc])
        c[osc] = np.cos(w * t)
        s[osc] = np.sin(w * t) / w
    if np.any(hyp):
        e = np.sqrt(disc[hyp])
        c[hyp] = np.cosh(e * t)
        s[hyp] = np.sinh(e * t) / e
    if np.any(mid):
        d = disc[mid]
        c[mid] = 1.0 + 0.5 * d * t * t
        s[mid] = t * (1.0 + d * t * t / 6.0)

    damp = np.exp(mu * t)
    half = 0.5 * gamma
    e11 = damp * (c + half * s)
    e12 = damp * s
    e21 = damp * (-lam * s)
    e22 = damp * (c - half * s)
    return e11, e12, e21, e22


def _duhamel_constant(lam, gamma, e12, e22):
    """A^{-1} (exp(tA) - I) B for B = (0, 1): exact response to frozen forcing."""
    phi_u = (-gamma * e12 - (e22 - 1.0)) / lam
    phi_v = e12
    return phi_u, phi_v


def linear_evolve(
    basis: Basis,
    gamma: float,
    G: CoeffField | Sequence[CoeffField] | None,
    xi0: StatePair,
    T: float,
    dt: float,
    record_stride: int = 1,
) -> Trajectory:
    """Integrate d^2_t v + gamma d_t v - Laplace(v) = G(t) mode by mode.

    Each step applies the exact matrix exponential of the mode system and the
    exact response to the forcing frozen at its midpoint value.  G may be
    None (free), a single CoeffField (autonomous forcing, equilibria are
    preserved exactly), or a sequence of n_steps+1 samples at the solver grid
    times whose consecutive averages provide the midpoint values.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be strictly positive, got {gamma}")
    n_steps = _step_count(T, dt)
    if record_stride < 1 or n_steps % record_stride != 0:
        raise ValueError(f"record_stride {record_stride} does not divide {n_steps} steps")

    lam = basis.eigenvalues
    e11, e12, e21, e22 = mode_propagator(lam, gamma, dt)
    phi_u, phi_v = _duhamel_constant(lam, gamma, e12, e22)

    constant_forcing: np.ndarray | None = None
    samples: list[np.ndarray] | None = None
    if G is None:
        pass
    elif isinstance(G, CoeffField):
        constant_forcing = G.coeffs
    else:
        samples = [g.coeffs for g in G]
        if len(samples) != n_steps + 1:
            raise ValueError(
                f"forcing sampled at {len(samples)} times, expected {n_steps + 1} "
                "(solver grid including both endpoints)"
            )

    forcing_field = G if isinstance(G, CoeffField) else zero_field(basis)
    problem = ProblemSpec(
        basis=basis,
        gamma=gamma,
        forcing=forcing_field,
        nonlinearity=NonlinearitySpec((0.0,)),
        galerkin_n=basis.n_modes,
    )

    u = xi0.u.coeffs.copy()
    v = xi0.ut.coeffs.copy()
    states = [StatePair(CoeffField(basis, u), CoeffField(basis, v))]
    for i in range(n_steps):
        if samples is not None:
            gmid = 0.5 * (samples[i] + samples[i + 1])
        elif constant_forcing is not None:
            gmid = constant_forcing
        else:
            gmid = None
        u, v = e11 * u + e12 * v, e21 * u + e22 * v
        if gmid is not None:
            u = u + phi_u * gmid
            v = v + phi_v * gmid
        if (i + 1) % record_stride == 0:
            states.append(StatePair(CoeffField(basis, u), CoeffField(basis, v)))
    return Trajectory(
        problem=problem,
        t0=0.0,
        dt=dt * record_stride,
        solver_dt=dt,
        stride=record_stride,
        states=tuple(states),
    )
