import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import direct_sine_projection
from qwlab import (
    basis_vector,
    field_from_modes,
    from_grid,
    laplacian_apply,
    make_basis,
    project,
    random_field,
    sobolev_norm,
    to_grid,
    zero_field,
)


def test_make_basis_1d_eigenvalues():
    b = make_basis(1, 4, 4)
    assert np.array_equal(b.eigenvalues, [1.0, 4.0, 9.0, 16.0])


def test_make_basis_2d_eigenvalues_sorted_with_ties():
    b = make_basis(2, 2, 4)
    assert np.array_equal(b.eigenvalues, [2.0, 5.0, 5.0, 8.0])
    # lexicographic tie break between (1,2) and (2,1)
    assert b.modes[1].tolist() == [1, 2]
    assert b.modes[2].tolist() == [2, 1]


def test_make_basis_rejects_small_grid_factor():
    with pytest.raises(ValueError):
        make_basis(1, 4, 1)


@pytest.mark.parametrize("bad", [0, 4, -1])
def test_make_basis_rejects_bad_dim(bad):
    with pytest.raises(ValueError):
        make_basis(bad, 4, 4)


def test_grid_roundtrip_identity(basis8, rng):
    f = random_field(basis8, rng)
    back = from_grid(to_grid(f), basis8)
    assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-10


def test_grid_roundtrip_2d(basis2d, rng):
    f = random_field(basis2d, rng)
    back = from_grid(to_grid(f), basis2d)
    assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-10


def test_e1_grid_values():
    b = make_basis(1, 4, 4)
    x = b.grid_axes()[0]
    expected = math.sqrt(2.0 / math.pi) * np.sin(x)
    assert np.max(np.abs(to_grid(basis_vector(b, 0)) - expected)) < 1e-12


def test_zero_field_roundtrip(basis8):
    z = zero_field(basis8)
    g = to_grid(z)
    assert np.all(g == 0.0)
    assert np.all(from_grid(g, basis8).coeffs == 0.0)


def test_from_grid_matches_direct_summation_oracle():
    b = make_basis(1, 4, 4)
    rng = np.random.default_rng(3)
    f = random_field(b, rng)
    grid = to_grid(f)
    oracle = direct_sine_projection(grid, 4)
    ours = from_grid(grid, b).coeffs
    assert np.max(np.abs(ours - oracle)) < 1e-10


def test_parseval_quadrature_vs_coefficients(basis8, rng):
    f = random_field(basis8, rng)
    g = to_grid(f)
    quad = math.sqrt(np.sum(g**2) * basis8.quadrature_weight)
    assert abs(quad - sobolev_norm(f, 0.0)) < 1e-10


def test_orthonormality_all_modes(basis8):
    for j in range(basis8.n_modes):
        c = from_grid(to_grid(basis_vector(basis8, j)), basis8).coeffs
        assert abs(c[j] - 1.0) < 1e-10
        off = np.delete(c, j)
        assert np.max(np.abs(off)) < 1e-10


def test_grid_shape_mismatch_rejected(basis8):
    with pytest.raises(ValueError):
        from_grid(np.zeros((5,)), basis8)


def test_project_full_is_identity(basis8, rng):
    f = random_field(basis8, rng)
    assert np.array_equal(project(f, basis8.n_modes).coeffs, f.coeffs)


def test_project_idempotent(basis8, rng):
    f = random_field(basis8, rng)
    once = project(f, 3)
    assert np.array_equal(project(once, 3).coeffs, once.coeffs)


def test_project_picks_sorted_modes():
    b = make_basis(1, 8, 4)
    f = field_from_modes(b, {(1,): 1.0, (5,): 1.0})
    p = project(f, 3)
    assert np.array_equal(p.coeffs, basis_vector(b, 0).coeffs)


def test_project_range_check(basis8, rng):
    f = random_field(basis8, rng)
    with pytest.raises(ValueError):
        project(f, 0)
    with pytest.raises(ValueError):
        project(f, basis8.n_modes + 1)


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=8),
    s=st.floats(min_value=-2.0, max_value=2.0),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_projection_is_contraction_in_every_sobolev_norm(n, s, seed):
    b = make_basis(1, 8, 2)
    f = random_field(b, np.random.default_rng(seed))
    assert sobolev_norm(project(f, n), s) <= sobolev_norm(f, s) + 1e-14


def test_laplacian_on_eigenfunctions():
    b1 = make_basis(1, 4, 4)
    out = laplacian_apply(basis_vector(b1, 0))
    assert np.array_equal(out.coeffs, -1.0 * basis_vector(b1, 0).coeffs)
    b2 = make_basis(2, 2, 4)
    out2 = laplacian_apply(basis_vector(b2, 0))  # mode (1,1), lambda = 2
    assert np.array_equal(out2.coeffs, -2.0 * basis_vector(b2, 0).coeffs)


def test_laplacian_zero(basis8):
    assert np.all(laplacian_apply(zero_field(basis8)).coeffs == 0.0)


def test_laplacian_commutes_with_projection(basis8, rng):
    f = random_field(basis8, rng)
    a = laplacian_apply(project(f, 4)).coeffs
    b = project(laplacian_apply(f), 4).coeffs
    assert np.array_equal(a, b)


def test_sobolev_norm_examples():
    b = make_basis(1, 4, 4)
    assert sobolev_norm(basis_vector(b, 0), 1.0) == pytest.approx(1.0, abs=1e-14)
    assert sobolev_norm(basis_vector(b, 1), 2.0) == pytest.approx(4.0, abs=1e-14)
    assert sobolev_norm(basis_vector(b, 1), -1.0) == pytest.approx(0.5, abs=1e-14)


def test_field_arithmetic(basis8, rng):
    f = random_field(basis8, rng)
    g = random_field(basis8, rng)
    assert np.allclose((f + g).coeffs, f.coeffs + g.coeffs)
    assert np.allclose((f - g).coeffs, f.coeffs - g.coeffs)
    assert np.allclose((2.5 * f).coeffs, 2.5 * f.coeffs)


def test_coefficients_are_read_only(basis8, rng):
    f = random_field(basis8, rng)
    with pytest.raises(ValueError):
        f.coeffs[0] = 1.0


def test_nonfinite_coefficients_rejected(basis8):
    with pytest.raises(ValueError):
        from qwlab import CoeffField

        CoeffField(basis8, np.full(basis8.n_modes, np.nan))
