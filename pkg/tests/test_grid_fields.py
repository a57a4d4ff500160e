import numpy as np
import pytest
from hypothesis import given, strategies as st

from core.entities.errors import FieldError, GridError, ZeroNormError
from core.entities.grid import SpacetimeGrid, SpinorField, SpinorSlice
from core.use_cases.dirac_core import build_gamma_set
from core.use_cases.grid_fields import (inner_product_3d, matrix_element, norm_4d,
                                        normalize_slice, slice_norms)

seeds = st.integers(min_value=0, max_value=2 ** 31 - 1)


def _slice(grid, rng):
    return SpinorSlice(grid, rng.normal(size=(grid.n_x, 4)) + 1j * rng.normal(size=(grid.n_x, 4)))


def test_constant_spinor_normalized_over_box():
    grid = SpacetimeGrid(n_t=3, n_x=20, dt=0.1, dx=0.25)
    values = np.zeros((grid.n_x, 4), dtype=complex)
    values[:, 0] = 1.0 / np.sqrt(grid.length)
    slice_ = SpinorSlice(grid, values)
    assert inner_product_3d(slice_, slice_) == pytest.approx(1.0)


@given(seed=seeds)
def test_inner_product_is_conjugate_symmetric(seed):
    grid = SpacetimeGrid(n_t=3, n_x=9, dt=0.1, dx=0.3)
    rng = np.random.default_rng(seed)
    a, b = _slice(grid, rng), _slice(grid, rng)
    assert inner_product_3d(a, b) == pytest.approx(np.conj(inner_product_3d(b, a)))


@given(seed=seeds)
def test_normalized_slice_has_unit_norm(seed):
    grid = SpacetimeGrid(n_t=3, n_x=9, dt=0.1, dx=0.3)
    slice_ = normalize_slice(_slice(grid, np.random.default_rng(seed)))
    assert inner_product_3d(slice_, slice_).real == pytest.approx(1.0, rel=1e-12)


def test_zero_slice_cannot_be_normalized():
    grid = SpacetimeGrid(n_t=3, n_x=9, dt=0.1, dx=0.3)
    with pytest.raises(ZeroNormError):
        normalize_slice(SpinorSlice(grid, np.zeros((grid.n_x, 4))))


def test_norm_4d_is_time_sum_of_slice_norms(free_grid, make_field):
    psi = make_field(free_grid)
    assert norm_4d(psi) == pytest.approx(np.sum(slice_norms(psi)) * free_grid.dt)


def test_norm_4d_of_normalized_slices_is_duration(free_grid, make_field):
    psi = make_field(free_grid)
    values = np.stack([normalize_slice(psi.slice(k)).values for k in range(free_grid.n_t)])
    assert norm_4d(psi.with_values(values)) == pytest.approx(free_grid.duration, rel=1e-12)


def test_norm_4d_is_quadratic_in_amplitude(free_grid, make_field):
    psi = make_field(free_grid)
    assert norm_4d(psi.scaled(2.0)) == pytest.approx(4.0 * norm_4d(psi), rel=1e-12)


def test_zero_field_norm_raises(free_grid):
    with pytest.raises(ZeroNormError):
        norm_4d(SpinorField.zeros(free_grid))


def test_identity_matrix_element_equals_inner_product(rng):
    grid = SpacetimeGrid(n_t=3, n_x=7, dt=0.1, dx=0.5)
    a, b = _slice(grid, rng), _slice(grid, rng)
    assert matrix_element(a, np.eye(4), b) == pytest.approx(inner_product_3d(a, b))


def test_gamma0_matrix_element_of_upper_spinor_is_its_norm(rng):
    grid = SpacetimeGrid(n_t=3, n_x=7, dt=0.1, dx=0.5)
    values = np.zeros((grid.n_x, 4), dtype=complex)
    values[:, :2] = rng.normal(size=(grid.n_x, 2))
    slice_ = normalize_slice(SpinorSlice(grid, values))
    assert matrix_element(slice_, build_gamma_set().gamma0, slice_) == pytest.approx(1.0)


def test_callable_operator_acts_on_whole_slice(rng):
    grid = SpacetimeGrid(n_t=3, n_x=7, dt=0.1, dx=0.5)
    a = _slice(grid, rng)
    assert matrix_element(a, lambda s: s.with_values(3.0 * s.values), a) == pytest.approx(
        3.0 * inner_product_3d(a, a))


def test_mismatched_slices_are_rejected(rng):
    a = _slice(SpacetimeGrid(n_t=3, n_x=7, dt=0.1, dx=0.5), rng)
    b = _slice(SpacetimeGrid(n_t=3, n_x=7, dt=0.1, dx=0.25), rng)
    with pytest.raises(GridError):
        inner_product_3d(a, b)


def test_wrong_operator_shape_is_rejected(rng):
    a = _slice(SpacetimeGrid(n_t=3, n_x=7, dt=0.1, dx=0.5), rng)
    with pytest.raises(GridError):
        matrix_element(a, np.eye(3), a)


def test_non_finite_values_are_rejected(free_grid):
    values = np.zeros(free_grid.shape, dtype=complex)
    values[2, 3, 1] = np.nan
    with pytest.raises(FieldError):
        SpinorField(free_grid, values)


def test_invalid_grid_is_rejected():
    with pytest.raises(GridError):
        SpacetimeGrid(n_t=4, n_x=4, dt=0.0, dx=0.5)
