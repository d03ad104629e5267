"""Long-time machinery: absorbing-set entry, omega-limit sampling as the
attractor surrogate, the time-shift semigroup on stored trajectories, the
Galerkin-sequence energy surrogate, and dissipation/regularity checks.

Complete bounded trajectories are approximated by post-absorb tails of long
forward runs; backward integration is rejected as ill-conditioned under
damping, so backward-regularity claims are tested through forward-tail
boundedness in the smoother norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .csvio import write_csv
from .diagnostics import (
    e1_norm,
    energy_norm,
    energy_report,
    linear_decay_rate,
    modified_energy_norm,
    strichartz_norm,
)
from .solver import ProblemSpec, Trajectory, evolve
from .spectral import StatePair

__all__ = [
    "TrajectoryStore",
    "StateCloud",
    "absorb_time",
    "omega_limit_sample",
    "hausdorff_semidist",
    "attraction_curve",
    "MEnergyReport",
    "m_energy_surrogate",
    "EnvelopeReport",
    "dissipative_envelope_check",
    "shift",
    "e1_bound",
    "attractor_strichartz_bound",
    "dissipation_saturation",
    "write_cloud_csv",
    "write_curve_csv",
]


@dataclass(frozen=True)
class TrajectoryStore:
    """Trajectories of one problem; tails stand in for complete trajectories."""

    trajectories: tuple[Trajectory, ...]
    tail_window: float

    def __post_init__(self):
        if len(self.trajectories) == 0:
            raise ValueError("empty trajectory store")
        p0 = self.trajectories[0].problem
        for tr in self.trajectories[1:]:
            if tr.problem is not p0 and tr.problem != p0:
                raise ValueError("stored trajectories must share one problem")


@dataclass(frozen=True)
class StateCloud:
    """A finite set of states with (trajectory index, sample time) provenance."""

    states: tuple[StatePair, ...]
    provenance: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if len(self.states) != len(self.provenance):
            raise ValueError("provenance must match states one to one")

    @property
    def size(self) -> int:
        return len(self.states)


def absorb_time(traj: Trajectory, radius: float) -> float | None:
    """First sample time after which the energy norm stays <= radius;
    None when the run never settles inside."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    norms = np.array([energy_norm(s) for s in traj.states])
    outside = np.nonzero(norms > radius)[0]
    if outside.size == 0:
        return float(traj.t0)
    last_out = int(outside[-1])
    if last_out == traj.n_samples - 1:
        return None
    return float(traj.times[last_out + 1])


def omega_limit_sample(store: TrajectoryStore, t_min: float, stride: float) -> StateCloud:
    """States at t_min, t_min+stride, ... from every stored trajectory."""
    if stride <= 0:
        raise ValueError(f"stride must be positive, got {stride}")
    states: list[StatePair] = []
    prov: list[tuple[int, float]] = []
    for j, traj in enumerate(store.trajectories):
        if t_min > traj.t_final + 1e-12:
            raise ValueError(
                f"t_min={t_min} exceeds the span of trajectory {j} (ends {traj.t_final})"
            )
        t = t_min
        while t <= traj.t_final + 1e-9:
            i = traj.index_at(t)
            states.append(traj.states[i])
            prov.append((j, float(traj.times[i])))
            t += stride
    return StateCloud(tuple(states), tuple(prov))


_CLOUD_NORMS = {"E": energy_norm, "E1": e1_norm}


def hausdorff_semidist(a: StateCloud, b: StateCloud, norm: str = "E") -> float:
    """max over a of the distance to b in the chosen norm (not symmetric)."""
    if a.size == 0 or b.size == 0:
        raise ValueError("clouds must be nonempty")
    norm_fn = _CLOUD_NORMS[norm]
    worst = 0.0
    for sa in a.states:
        best = min(norm_fn(sa - sb) for sb in b.states)
        worst = max(worst, best)
    return worst


def attraction_curve(
    store: TrajectoryStore, candidate: StateCloud, times
) -> list[tuple[float, float]]:
    """Semidistance from the time-t snapshot cloud of the store to the candidate."""
    out = []
    for t in times:
        snap_states = []
        snap_prov = []
        for j, traj in enumerate(store.trajectories):
            i = traj.index_at(t)
            snap_states.append(traj.states[i])
            snap_prov.append((j, float(traj.times[i])))
        snap = StateCloud(tuple(snap_states), tuple(snap_prov))
        out.append((float(t), hausdorff_semidist(snap, candidate, "E")))
    return out


# -- Galerkin-sequence energy surrogate ----------------------------------------


@dataclass(frozen=True)
class MEnergyReport:
    n_values: tuple[int, ...]
    energies: np.ndarray          # modified energy norm at time t, per truncation
    liminf_estimate: float        # running minimum over the tail half
    finest_energy: float
    bound_holds: bool             # finest <= liminf estimate + 1e-6


def m_energy_surrogate(
    problem: ProblemSpec, xi0: StatePair, t: float, n_list, dt: float
) -> MEnergyReport:
    """Evolve the Galerkin systems with data P_n xi0 over [0, t] for each n and
    record the modified energy norm at time t.

    The canonical sequence P_n xi0 stands in for the infimum over all weakly
    convergent Galerkin sequences; for strongly convergent data the two agree.
    """
    n_list = tuple(int(n) for n in n_list)
    if len(n_list) == 0:
        raise ValueError("n_list must be nonempty")
    if any(n_list[i] >= n_list[i + 1] for i in range(len(n_list) - 1)):
        raise ValueError("n_list must be strictly ascending")
    if n_list[-1] > problem.basis.n_modes:
        raise ValueError("n_list exceeds the total mode count")
    p = problem.nonlinearity.growth_exponent
    energies = np.empty(len(n_list))
    for i, n in enumerate(n_list):
        traj = evolve(problem.with_galerkin_n(n), xi0, t, dt, record_stride=int(round(t / dt)))
        energies[i] = modified_energy_norm(traj.states[-1], p)
    half = len(n_list) // 2
    liminf = float(np.min(energies[half:]))
    finest = float(energies[-1])
    return MEnergyReport(n_list, energies, liminf, finest, finest <= liminf + 1e-6)


@dataclass(frozen=True)
class EnvelopeReport:
    constant: float
    rate: float
    train_pairs: int
    holdout_pairs: int
    holdout_max_ratio: float
    holds: bool


def dissipative_envelope_check(traj: Trajectory, rtol: float = 0.05) -> EnvelopeReport:
    """Fit (C, alpha) in M(t)^2 + int_t |du/dt|^2 <= C M(s)^2 e^(-alpha(t-s)) + C(1+|g|^2)
    on even-index (s, t) pairs and verify the fit on the odd-index ones."""
    problem = traj.problem
    p = problem.nonlinearity.growth_exponent
    t = traj.times
    m_sq = np.array([modified_energy_norm(s, p) ** 2 for s in traj.states])
    rep = energy_report(traj)
    tail_diss = rep.dissipation_accum[-1] - rep.dissipation_accum
    g_sq = float(np.dot(problem.forcing.coeffs, problem.forcing.coeffs))

    idx = np.arange(traj.n_samples)
    train = idx[idx % 2 == 0]
    hold = idx[idx % 2 == 1]
    # thin out to keep the pair count moderate and deterministic
    train = train[:: max(1, len(train) // 20)]
    hold = hold[:: max(1, len(hold) // 20)]
    base_rate = linear_decay_rate(problem.basis, problem.gamma)

    def max_ratio(indices, alpha):
        worst = 0.0
        for a in indices:
            for b in indices:
                if t[b] < t[a]:
                    continue
                lhs = m_sq[b] + tail_diss[b]
                rhs = m_sq[a] * math.exp(-alpha * (t[b] - t[a])) + 1.0 + g_sq
                worst = max(worst, lhs / rhs)
        return worst

    best = None
    for alpha in (0.25 * base_rate, 0.5 * base_rate, base_rate):
        c = max_ratio(train, alpha)
        if best is None or c < best[0]:
            best = (c, alpha)
    c_fit, alpha_fit = best
    hold_max = max_ratio(hold, alpha_fit)
    return EnvelopeReport(
        constant=float(c_fit),
        rate=float(alpha_fit),
        train_pairs=len(train) * (len(train) + 1) // 2,
        holdout_pairs=len(hold) * (len(hold) + 1) // 2,
        holdout_max_ratio=float(hold_max),
        holds=bool(hold_max <= c_fit * (1.0 + rtol)),
    )


# -- shift semigroup ----------------------------------------------------------


def shift(traj: Trajectory, h: float) -> Trajectory:
    """(T_h u)(t) = u(t + h): drop the first h/dt samples, keep the clock.

    h must be a nonnegative multiple of the sample spacing within the span.
    """
    if h < 0:
        raise ValueError(f"shift must be nonnegative, got {h}")
    steps = int(round(h / traj.dt))
    if abs(steps * traj.dt - h) > 1e-12 * max(1.0, abs(h)):
        raise ValueError(f"shift {h} is not a multiple of the sample spacing {traj.dt}")
    if steps >= traj.n_samples:
        raise ValueError(f"shift {h} exceeds the trajectory span")
    if steps == 0:
        return traj
    return Trajectory(
        problem=traj.problem,
        t0=traj.t0,
        dt=traj.dt,
        solver_dt=traj.solver_dt,
        stride=traj.stride,
        states=traj.states[steps:],
    )


# -- attractor regularity and Strichartz bounds --------------------------------


def e1_bound(cloud: StateCloud) -> tuple[float, np.ndarray]:
    """Supremum of the smoother-space norm over the cloud, plus the series."""
    if cloud.size == 0:
        raise ValueError("empty cloud")
    series = np.array([e1_norm(s) for s in cloud.states])
    return float(np.max(series)), series


def attractor_strichartz_bound(
    store: TrajectoryStore, window: float, t_start: float | None = None
) -> tuple[float, list[float]]:
    """sup over trajectories and window placements of |u|_{L^4(T,T+w; L^12)}."""
    sups = []
    for traj in store.trajectories:
        lo = traj.t0 if t_start is None else t_start
        i0 = traj.index_at(lo)
        w_steps = int(round(window / traj.dt))
        if abs(w_steps * traj.dt - window) > 1e-9 or w_steps < 1:
            raise ValueError(f"window {window} is not a multiple of the sample spacing")
        if i0 > traj.n_samples - 1 - w_steps:
            raise ValueError("window does not fit inside the stored tail")
        best = 0.0
        for i in range(i0, traj.n_samples - w_steps):
            t_lo = float(traj.times[i])
            best = max(best, strichartz_norm(traj, t_lo, t_lo + window))
        sups.append(best)
    return float(max(sups)), sups


def dissipation_saturation(traj: Trajectory) -> tuple[float, float]:
    """(total dissipation integral, tail-half increment / total)."""
    rep = energy_report(traj)
    total = float(rep.dissipation_accum[-1])
    half = traj.n_samples // 2
    tail = total - float(rep.dissipation_accum[half])
    return total, (tail / total if total > 0 else 0.0)


# -- CSV emission -------------------------------------------------------------


def write_cloud_csv(path, cloud: StateCloud) -> None:
    ids = np.array([p[0] for p in cloud.provenance], dtype=float)
    ts = np.array([p[1] for p in cloud.provenance])
    e = np.array([energy_norm(s) for s in cloud.states])
    e1 = np.array([e1_norm(s) for s in cloud.states])
    write_csv(path, ["id", "t", "e_norm", "e1_norm"], [ids, ts, e, e1])


def write_curve_csv(path, curve: list[tuple[float, float]]) -> None:
    ts = np.array([c[0] for c in curve])
    ds = np.array([c[1] for c in curve])
    write_csv(path, ["t", "semidist"], [ts, ds])
