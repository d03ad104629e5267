"""Dirichlet Laplacian eigenbasis on the box (0, pi)^d and coefficient algebra.

The eigenfunctions are e_k(x) = (2/pi)^(d/2) * prod_i sin(k_i x_i) with
eigenvalues lambda_k = sum k_i^2, orthonormal in L^2.  Fields are stored as
coefficient vectors in the sorted-eigenvalue enumeration (ties broken
lexicographically on the multi-index).  Grid transforms use the type-I
discrete sine transform on an oversampled grid, which makes the round trip
and all quadratures of low-degree sine products exact to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dstn

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
]

DOMAIN_LENGTH = np.pi


@dataclass(frozen=True)
class Basis:
    """Truncated sine eigensystem on (0, pi)^dim with its grid machinery."""

    dim: int
    modes_per_dim: int
    grid_factor: int
    modes: np.ndarray        # (n_modes, dim) multi-indices, sorted enumeration
    eigenvalues: np.ndarray  # (n_modes,) ascending
    tensor_index: np.ndarray = field(repr=False)  # flat position in the (N,)*dim tensor

    @property
    def n_modes(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def grid_points_per_dim(self) -> int:
        return self.grid_factor * self.modes_per_dim

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return (self.grid_points_per_dim,) * self.dim

    @property
    def quadrature_weight(self) -> float:
        # rectangle weight of the DST-I grid x_j = j*pi/(M+1), j = 1..M
        return float((DOMAIN_LENGTH / (self.grid_points_per_dim + 1)) ** self.dim)

    @property
    def volume(self) -> float:
        return float(DOMAIN_LENGTH**self.dim)

    def grid_axes(self) -> list[np.ndarray]:
        m = self.grid_points_per_dim
        x = DOMAIN_LENGTH * np.arange(1, m + 1) / (m + 1)
        return [x] * self.dim


def make_basis(dim: int, modes_per_dim: int, grid_factor: int = 4) -> Basis:
    """Build the sorted eigenbasis; grid_factor < 2 is rejected (aliasing)."""
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    if modes_per_dim < 1:
        raise ValueError(f"modes_per_dim must be >= 1, got {modes_per_dim}")
    if grid_factor < 2:
        raise ValueError(
            f"grid_factor must be >= 2 (got {grid_factor}): a coarser grid aliases "
            "even quadratic products"
        )
    n = modes_per_dim
    grids = np.meshgrid(*([np.arange(1, n + 1)] * dim), indexing="ij")
    modes = np.stack([g.ravel() for g in grids], axis=1)
    lams = (modes**2).sum(axis=1).astype(float)
    # sort by eigenvalue, ties lexicographic on the multi-index
    order = np.lexsort(tuple(modes[:, d] for d in reversed(range(dim))) + (lams,))
    modes = np.ascontiguousarray(modes[order])
    lams = lams[order]
    tensor_index = np.ravel_multi_index(tuple((modes - 1).T), (n,) * dim)
    for arr in (modes, lams, tensor_index):
        arr.flags.writeable = False
    return Basis(dim, n, grid_factor, modes, lams, tensor_index)


@dataclass(frozen=True)
class CoeffField:
    """A function sum_k c_k e_k as its coefficient vector over a Basis."""

    basis: Basis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.basis.n_modes,):
            raise ValueError(
                f"coefficient vector has shape {c.shape}, expected ({self.basis.n_modes},)"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficient vector contains non-finite entries")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def __add__(self, other: "CoeffField") -> "CoeffField":
        _check_same_basis(self.basis, other.basis)
        return CoeffField(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other: "CoeffField") -> "CoeffField":
        _check_same_basis(self.basis, other.basis)
        return CoeffField(self.basis, self.coeffs - other.coeffs)

    def __mul__(self, a: float) -> "CoeffField":
        return CoeffField(self.basis, self.coeffs * float(a))

    __rmul__ = __mul__

    def __neg__(self) -> "CoeffField":
        return CoeffField(self.basis, -self.coeffs)


@dataclass(frozen=True)
class StatePair:
    """Phase-space point (u, du/dt); both components share one basis."""

    u: CoeffField
    ut: CoeffField

    def __post_init__(self):
        _check_same_basis(self.u.basis, self.ut.basis)

    @property
    def basis(self) -> Basis:
        return self.u.basis

    def __add__(self, other: "StatePair") -> "StatePair":
        return StatePair(self.u + other.u, self.ut + other.ut)

    def __sub__(self, other: "StatePair") -> "StatePair":
        return StatePair(self.u - other.u, self.ut - other.ut)

    def __mul__(self, a: float) -> "StatePair":
        return StatePair(self.u * a, self.ut * a)

    __rmul__ = __mul__


def _check_same_basis(a: Basis, b: Basis) -> None:
    if a is b:
        return
    if (a.dim, a.modes_per_dim, a.grid_factor) != (b.dim, b.modes_per_dim, b.grid_factor):
        raise ValueError("fields live on different bases")


def zero_field(basis: Basis) -> CoeffField:
    return CoeffField(basis, np.zeros(basis.n_modes))


def basis_vector(basis: Basis, sorted_index: int) -> CoeffField:
    """The eigenfunction with the given sorted index (0-based)."""
    c = np.zeros(basis.n_modes)
    c[sorted_index] = 1.0
    return CoeffField(basis, c)


def field_from_modes(basis: Basis, entries: dict[tuple[int, ...], float]) -> CoeffField:
    """Build a field from {multi-index: amplitude}; 1-D keys may be ints."""
    c = np.zeros(basis.n_modes)
    modes = basis.modes
    for key, amp in entries.items():
        k = np.atleast_1d(np.asarray(key, dtype=int))
        if k.shape != (basis.dim,):
            raise ValueError(f"mode index {key} does not match dim {basis.dim}")
        hits = np.nonzero((modes == k).all(axis=1))[0]
        if hits.size == 0:
            raise ValueError(f"mode {tuple(k)} not contained in the basis")
        c[hits[0]] += amp
    return CoeffField(basis, c)


# -- grid transforms ---------------------------------------------------------
#
# scipy's DST-I on m points uses sin(pi (k+1)(j+1)/(m+1)); on the grid
# x_j = j*pi/(m+1) that is exactly sin(k x_j), so synthesis and analysis are
# half a dstn each.  Frequencies fold at m+1, so with grid_factor >= 3 a
# quintic product of retained modes never aliases back into the basis.

_NORM_1D = np.sqrt(2.0 / DOMAIN_LENGTH)


def synth_raw(basis: Basis, coeffs: np.ndarray) -> np.ndarray:
    """Grid values from a raw coefficient vector (no validation)."""
    n = basis.modes_per_dim
    flat = np.zeros(n**basis.dim)
    flat[basis.tensor_index] = coeffs
    padded = np.zeros(basis.grid_shape)
    padded[(slice(0, n),) * basis.dim] = flat.reshape((n,) * basis.dim)
    return (0.5 * _NORM_1D) ** basis.dim * dstn(padded, type=1)


def analyze_raw(basis: Basis, grid: np.ndarray) -> np.ndarray:
    """Raw coefficient vector from grid samples (no validation)."""
    m = basis.grid_points_per_dim
    n = basis.modes_per_dim
    spec = dstn(grid, type=1)
    scale = (0.5 * _NORM_1D * DOMAIN_LENGTH / (m + 1)) ** basis.dim
    dense = scale * spec[(slice(0, n),) * basis.dim]
    return dense.ravel()[basis.tensor_index].copy()


def to_grid(f: CoeffField) -> np.ndarray:
    """Evaluate the field on the oversampled tensor grid."""
    return synth_raw(f.basis, f.coeffs)


def from_grid(g: np.ndarray, basis: Basis) -> CoeffField:
    """Project grid samples onto the basis by exact discrete sine quadrature."""
    g = np.asarray(g, dtype=float)
    if g.shape != basis.grid_shape:
        raise ValueError(f"grid has shape {g.shape}, expected {basis.grid_shape}")
    return CoeffField(basis, analyze_raw(basis, g))


def project(f: CoeffField, n: int) -> CoeffField:
    """Orthoprojector onto the first n modes of the sorted enumeration."""
    total = f.basis.n_modes
    if not 1 <= n <= total:
        raise ValueError(f"projector rank {n} outside 1..{total}")
    if n == total:
        return f
    c = f.coeffs.copy()
    c[n:] = 0.0
    return CoeffField(f.basis, c)


def laplacian_apply(f: CoeffField) -> CoeffField:
    """Apply the Dirichlet Laplacian: c_k -> -lambda_k c_k."""
    return CoeffField(f.basis, -f.basis.eigenvalues * f.coeffs)


def sobolev_norm(f: CoeffField, s: float) -> float:
    """(sum lambda_k^s c_k^2)^(1/2); s=0 is L^2, s=1 the Dirichlet form."""
    if s == 0.0:
        return float(np.sqrt(np.sum(f.coeffs**2)))
    return float(np.sqrt(np.sum(f.basis.eigenvalues**s * f.coeffs**2)))


# -- random band-limited data (seeded; used by probes and config) ------------


def random_field(basis: Basis, rng: np.random.Generator, max_mode: int | None = None) -> CoeffField:
    """Standard-normal coefficients, optionally restricted to the first max_mode modes."""
    c = rng.standard_normal(basis.n_modes)
    if max_mode is not None:
        if not 1 <= max_mode <= basis.n_modes:
            raise ValueError(f"max_mode {max_mode} outside 1..{basis.n_modes}")
        c[max_mode:] = 0.0
    return CoeffField(basis, c)


def random_state(
    basis: Basis,
    rng: np.random.Generator,
    e_norm: float = 1.0,
    max_mode: int | None = None,
) -> StatePair:
    """Random state scaled to the requested energy norm |grad u|^2 + |ut|^2."""
    u = random_field(basis, rng, max_mode)
    ut = random_field(basis, rng, max_mode)
    raw = np.sqrt(sobolev_norm(u, 1.0) ** 2 + sobolev_norm(ut, 0.0) ** 2)
    if raw == 0.0:
        raise ValueError("degenerate draw: zero state cannot be normalized")
    s = e_norm / raw
    return StatePair(u * s, ut * s)
