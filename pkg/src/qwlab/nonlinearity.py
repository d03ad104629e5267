"""Polynomial nonlinearities f with exact antiderivative F and numerical
certifiers for the structural assumptions the solver relies on (growth,
dissipativity, coercivity of F, lower bound on f').

Only polynomials are admitted: every assumption then reduces to a sign
condition on a single-variable polynomial, decided by leading-coefficient
analysis plus a root-based minimum, and cross-checked by a dense sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NonlinearitySpec",
    "AssumptionCertificate",
    "ASSUMPTION_IDS",
    "eval_f",
    "eval_F",
    "certify",
]

ASSUMPTION_IDS = (
    "growth_quintic",
    "subcritical",
    "f_u_dissipative",
    "F_coercive",
    "f_u_minus_4F",
    "f_prime_lower",
    "conditions_00_3",
)

SWEEP_BOUND = 1.0e3
SWEEP_POINTS = 100_001


@dataclass(frozen=True)
class NonlinearitySpec:
    """f(u) = sum_j coeffs[j] u^j; F is its antiderivative with F(0) = 0."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(a) for a in self.coeffs)
        if len(c) == 0:
            raise ValueError("empty coefficient list")
        # normalize away trailing zeros so degree is well defined
        while len(c) > 1 and c[-1] == 0.0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def growth_exponent(self) -> int:
        """The p with |f''(u)| <= C(1+|u|^p); for a quintic this is 3."""
        return max(self.degree - 2, 0)

    @property
    def is_zero(self) -> bool:
        return all(a == 0.0 for a in self.coeffs)

    def derivative_coeffs(self) -> tuple[float, ...]:
        if self.degree == 0:
            return (0.0,)
        return tuple(j * a for j, a in enumerate(self.coeffs))[1:]

    def antiderivative_coeffs(self) -> tuple[float, ...]:
        return (0.0,) + tuple(a / (j + 1) for j, a in enumerate(self.coeffs))


@dataclass(frozen=True)
class AssumptionCertificate:
    assumption_id: str
    holds: bool
    constants: dict[str, float] = field(default_factory=dict)
    witness: float | None = None


def quintic() -> NonlinearitySpec:
    """The reference critical nonlinearity f(u) = u^5."""
    return NonlinearitySpec((0.0, 0.0, 0.0, 0.0, 0.0, 1.0))


def eval_f(spec: NonlinearitySpec, u_grid: np.ndarray) -> np.ndarray:
    return _polyval(spec.coeffs, np.asarray(u_grid, dtype=float))


def eval_F(spec: NonlinearitySpec, u_grid: np.ndarray) -> np.ndarray:
    return _polyval(spec.antiderivative_coeffs(), np.asarray(u_grid, dtype=float))


def _polyval(coeffs, u):
    out = np.zeros_like(u)
    for a in reversed(coeffs):
        out = out * u + a
    return out


def _poly_min(coeffs) -> tuple[float, float]:
    """Global minimum of the polynomial over the reals.

    Returns (min_value, argmin); (-inf, large u) when unbounded below.
    Stationary points come from numpy roots of the derivative, cross-checked
    by the sweep the certificates also use.
    """
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    deg = len(c) - 1
    if deg == 0:
        return c[0], 0.0
    lead = c[-1]
    if deg % 2 == 1 or lead < 0:
        descending_side = -1.0 if (deg % 2 == 1 and lead > 0) else 1.0
        return -np.inf, descending_side * SWEEP_BOUND
    dcoeffs = [j * a for j, a in enumerate(c)][1:]
    roots = np.roots(list(reversed(dcoeffs)))
    crit = [r.real for r in roots if abs(r.imag) < 1e-9]
    candidates = np.array([0.0] + crit)
    vals = _polyval(tuple(c), candidates)
    i = int(np.argmin(vals))
    return float(vals[i]), float(candidates[i])


def _sweep() -> np.ndarray:
    return np.linspace(-SWEEP_BOUND, SWEEP_BOUND, SWEEP_POINTS)


def _sup_ratio(num_coeffs, denom) -> tuple[float, float]:
    """sup over the sweep of |p(u)| / denom(u); returns (sup, witness)."""
    u = _sweep()
    r = np.abs(_polyval(tuple(num_coeffs), u)) / denom(u)
    i = int(np.argmax(r))
    return float(r[i]), float(u[i])


def _lower_bound_certificate(assumption_id, coeffs, constant_name="C"):
    """Certify p(u) >= -C: closed-form minimum plus sweep cross-check."""
    mn, arg = _poly_min(coeffs)
    u = _sweep()
    vals = _polyval(tuple(coeffs), u)
    i = int(np.argmin(vals))
    if not np.isfinite(mn):
        return AssumptionCertificate(assumption_id, False, {constant_name: np.inf}, float(u[i]))
    swept = float(vals[i])
    c = max(0.0, -min(mn, swept))
    witness = arg if mn <= swept else float(u[i])
    return AssumptionCertificate(assumption_id, True, {constant_name: c}, witness)


def certify(spec: NonlinearitySpec, assumption_id: str) -> AssumptionCertificate:
    """Check one structural assumption and report its tightest constants.

    Growth assumptions report the fitted C as the sup of the defining ratio
    over the sweep; lower-bound assumptions report the smallest admissible
    constant from the polynomial's global minimum.  Deterministic.
    """
    if assumption_id not in ASSUMPTION_IDS:
        raise ValueError(f"unknown assumption id {assumption_id!r}")
    q = spec.degree
    lead = spec.coeffs[-1]
    fprime = spec.derivative_coeffs()

    if assumption_id == "growth_quintic":
        # |f'(u)| <= C(1 + |u|^4)
        holds = q <= 5
        c, w = _sup_ratio(fprime, lambda u: 1.0 + u**4)
        return AssumptionCertificate(assumption_id, holds, {"C": c if holds else np.inf}, w)

    if assumption_id == "subcritical":
        # |f'(u)| <= C(1 + |u|^(4-kappa)) with the largest integer defect
        kappa = 5 - q
        if not 0 < kappa <= 4:
            worst = float(SWEEP_BOUND)
            return AssumptionCertificate(assumption_id, False, {"kappa": 0.0}, worst)
        c, w = _sup_ratio(fprime, lambda u: 1.0 + np.abs(u) ** (4 - kappa))
        return AssumptionCertificate(assumption_id, True, {"kappa": float(kappa), "C": c}, w)

    if assumption_id == "f_u_dissipative":
        # f(u) u >= -C
        fu = (0.0,) + spec.coeffs
        return _lower_bound_certificate(assumption_id, fu)

    if assumption_id == "F_coercive":
        # F(u) >= -C + kappa u^6 for some kappa > 0
        F = spec.antiderivative_coeffs()
        if q < 5 or lead <= 0:
            u = _sweep()
            margins = _polyval(tuple(F), u) - 1e-12 * u**6
            return AssumptionCertificate(
                assumption_id, False, {}, float(u[int(np.argmin(margins))])
            )
        for kappa in (lead / 6.0, lead / 12.0):
            shifted = list(F) + [0.0] * max(0, 7 - len(F))
            shifted[6] -= kappa
            mn, arg = _poly_min(shifted)
            if np.isfinite(mn):
                return AssumptionCertificate(
                    assumption_id, True, {"kappa": float(kappa), "C": max(0.0, -mn)}, arg
                )
        return AssumptionCertificate(assumption_id, False, {}, 0.0)

    if assumption_id == "f_u_minus_4F":
        # f(u) u - 4 F(u) >= -C
        F = spec.antiderivative_coeffs()
        fu = (0.0,) + spec.coeffs
        n = max(len(fu), len(F))
        g = [(fu[j] if j < len(fu) else 0.0) - 4.0 * (F[j] if j < len(F) else 0.0) for j in range(n)]
        return _lower_bound_certificate(assumption_id, g)

    if assumption_id == "f_prime_lower":
        # f'(u) >= -K
        return _lower_bound_certificate(assumption_id, fprime, constant_name="K")

    # conditions_00_3: f(0)=0, |f''| <= C(1+|u|^p), f' >= -K + delta |u|^(p+1)
    p = spec.growth_exponent
    zero_at_origin = spec.coeffs[0] == 0.0
    if q >= 2:
        fsecond = tuple(j * a for j, a in enumerate(fprime))[1:]
    else:
        fsecond = (0.0,)
    c2, w2 = _sup_ratio(fsecond, lambda u: 1.0 + np.abs(u) ** p)
    # third condition: f'(u) - delta |u|^(p+1) bounded below needs deg f' even
    # with positive leading coefficient and p+1 matching that degree
    ok_shape = q >= 1 and (q - 1) % 2 == 0 and q * lead > 0 and (p + 1) == q - 1
    holds = zero_at_origin and ok_shape
    constants = {"C": c2, "p": float(p)}
    witness = w2
    if ok_shape:
        delta = 0.5 * q * lead
        shifted = list(fprime) + [0.0] * max(0, q - len(fprime))
        shifted[q - 1] -= delta
        mn, arg = _poly_min(shifted)
        if np.isfinite(mn):
            constants.update({"K": max(0.0, -mn), "delta": float(delta)})
            witness = arg
        else:
            holds = False
    if not zero_at_origin:
        witness = 0.0
    return AssumptionCertificate("conditions_00_3", holds, constants, witness)
