"""
Grid Fields Use Case
Slice inner products, matrix elements and the four-dimensional norm.

Reductions use numpy's fixed pairwise summation over row-major arrays, so
repeated evaluations are bit-identical.
"""

from typing import Callable, Union

import numpy as np

from ..entities.errors import GridError, ZeroNormError
from ..entities.grid import SpinorField, SpinorSlice

SliceOperator = Union[np.ndarray, Callable[[SpinorSlice], SpinorSlice]]


def _check_same_grid(a: SpinorSlice, b: SpinorSlice):
    if a.grid.n_x != b.grid.n_x or a.grid.dx != b.grid.dx:
        raise GridError("slices live on different spatial grids")


def inner_product_3d(a: SpinorSlice, b: SpinorSlice) -> complex:
    """Σₓ a†(x)b(x)·dx."""
    _check_same_grid(a, b)
    return complex(np.vdot(a.values, b.values) * a.grid.dx)


def apply_slice_operator(operator: SliceOperator, b: SpinorSlice) -> SpinorSlice:
    """A 4×4 matrix acts sitewise; a callable acts on the whole slice."""
    if callable(operator):
        result = operator(b)
        _check_same_grid(result, b)
        return result
    matrix = np.asarray(operator)
    if matrix.shape != (4, 4):
        raise GridError(f"sitewise operator must be 4x4, got {matrix.shape}")
    return b.with_values(b.values @ matrix.T)


def matrix_element(a: SpinorSlice, operator: SliceOperator, b: SpinorSlice) -> complex:
    """⟨a|O|b⟩ on one slice."""
    return inner_product_3d(a, apply_slice_operator(operator, b))


def slice_norms(psi: SpinorField) -> np.ndarray:
    """⟨ψ|ψ⟩ on every slice."""
    return np.array([inner_product_3d(psi.slice(k), psi.slice(k)).real
                     for k in range(psi.grid.n_t)])


def norm_4d(psi: SpinorField) -> float:
    """Σ_t ⟨ψ|ψ⟩_t·dt."""
    total = float(np.sum(slice_norms(psi)) * psi.grid.dt)
    if total <= 0.0:
        raise ZeroNormError("field has zero norm; expectations are undefined")
    return total


def normalize_slice(slice_: SpinorSlice) -> SpinorSlice:
    norm = inner_product_3d(slice_, slice_).real
    if norm <= 0.0:
        raise ZeroNormError(f"slice {slice_.t_index} has zero norm")
    return slice_.with_values(slice_.values / np.sqrt(norm))
