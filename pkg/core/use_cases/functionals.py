"""
Functionals Use Case
A₁, its modal form, the total action A₁ + εA₂ and its gradient over free sites.
"""

from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from ..entities.action import ActionConfig, ActionReport, GradientMode
from ..entities.dirac import MassParameter, Potential
from ..entities.errors import GridError, ZeroNormError
from ..entities.grid import SpinorField
from ..entities.modes import CoefficientTrack
from ..interfaces.kernel_provider import KernelInterface
from .dirac_core import DiracOperator
from .expectations import (QuadrupleSample, UncertaintyFunctional, delta_p2, delta_x2,
                           local_momentum, mirrored_density, sample_quadruples)
from shared.utils.logger import get_logger

action_logger = get_logger("functionals")


def a1(psi: SpinorField, pot: Potential, m: MassParameter) -> float:
    """‖𝒟ψ‖²/‖ψ‖² over the whole grid (the cell volume cancels)."""
    q = psi.flat()
    norm = np.vdot(q, q).real
    if norm == 0.0:
        raise ZeroNormError("A1 of a zero field")
    residual = DiracOperator(pot, m).apply_flat(q)
    return float(np.vdot(residual, residual).real / norm)


def a1_modal(track: CoefficientTrack, m: MassParameter) -> float:
    """Σ_t Σ_j |C_j′|² / (m² Σ_t Σ_j |C_j|²) with centered differences."""
    if track.coefficients.shape[0] < 3:
        raise GridError("modal A1 needs at least 3 slices")
    derivative = np.gradient(track.coefficients, track.dt, axis=0)
    weight = np.sum(track.populations)
    if weight == 0.0:
        raise ZeroNormError("modal A1 of vanishing coefficients")
    return float(np.sum(np.abs(derivative) ** 2) / (m.m ** 2 * weight))


def free_site_mask(shape: Tuple[int, ...], frozen_slices: Sequence[int]) -> np.ndarray:
    """Flat boolean mask of free entries for a (n_t, n_x, 4) field."""
    mask = np.ones(shape, dtype=bool)
    for k in frozen_slices:
        mask[k] = False
    return mask.reshape(-1)


class ActionFunctional:
    """
    Total action as a deterministic function of the flat field.

    The A₂ term is evaluated on one frozen quadruple sample so repeated calls
    (and the gradient) see the same surrogate. An optional reference density
    freezes the quadruple weights as well.
    """

    def __init__(self, potential: Potential, mass: MassParameter, config: ActionConfig,
                 samples: Optional[QuadrupleSample] = None,
                 frozen_slices: Sequence[int] = (0,),
                 reference: Optional[np.ndarray] = None):
        self.potential = potential
        self.mass = mass
        self.config = config
        self.grid = potential.grid
        self.operator = DiracOperator(potential, mass).matrix
        self.samples = samples
        self.uncertainty = (UncertaintyFunctional(samples, potential, config.batches, reference)
                            if samples is not None else None)
        self.free = free_site_mask(self.grid.shape, frozen_slices)
        self.evaluations = 0

    @classmethod
    def for_field(cls, psi: SpinorField, potential: Potential, mass: MassParameter,
                  config: ActionConfig, frozen_slices: Sequence[int] = (0,),
                  table=None, round_index: int = 0,
                  threads: Optional[int] = None) -> 'ActionFunctional':
        """
        Draw the quadruple sample from psi's support when the A₂ term is active.

        Round r draws with seed config.seed + r and weights the quadruples by
        psi's density averaged with its time mirror.
        """
        samples, reference = None, None
        if config.epsilon > 0.0:
            support = local_momentum(psi, potential, config.density_floor).included
            samples = sample_quadruples(psi.grid, config.quadruple_samples,
                                        config.seed + round_index, support, table,
                                        threads=threads)
            reference = mirrored_density(psi)
        return cls(potential, mass, config, samples, frozen_slices, reference)

    def a1_and_gradient(self, q: np.ndarray) -> Tuple[float, np.ndarray]:
        norm = np.vdot(q, q).real
        if norm == 0.0:
            raise ZeroNormError("action of a zero field")
        residual = self.operator @ q
        value = np.vdot(residual, residual).real / norm
        gradient = 2.0 * (self.operator.conj().T @ residual - value * q) / norm
        return float(value), gradient

    def value_and_gradient(self, q: np.ndarray) -> Tuple[float, np.ndarray]:
        """Total action and its complex gradient, zero on frozen entries."""
        self.evaluations += 1
        value, gradient = self.a1_and_gradient(q)
        if self.uncertainty is not None and self.config.epsilon > 0.0:
            a2_value, a2_gradient = self.uncertainty.value_and_gradient(q)
            value += self.config.epsilon * a2_value
            gradient = gradient + self.config.epsilon * a2_gradient
        return value, np.where(self.free, gradient, 0.0)

    def value(self, q: np.ndarray) -> float:
        return self.value_and_gradient(q)[0]

    def report(self, q: np.ndarray, iteration: int = 0,
               kernel: Optional[KernelInterface] = None) -> ActionReport:
        a1_value, gradient = self.a1_and_gradient(q)
        a2_value, a2_stderr = 0.0, 0.0
        breakdown: Dict[str, float] = {"a1": a1_value}
        if self.uncertainty is not None:
            estimate = self.uncertainty.estimate(q)
            a2_value, a2_stderr = estimate.value, estimate.stderr
            gradient = gradient + self.config.epsilon * self.uncertainty.value_and_gradient(q)[1]
            breakdown["epsilon_a2"] = self.config.epsilon * a2_value
        if self.config.include_uncertainties and kernel is not None:
            psi = SpinorField.from_flat(self.grid, q)
            breakdown["delta_x2"] = delta_x2(psi, kernel, seed=self.config.seed).value
            breakdown["delta_p2"] = delta_p2(psi, kernel, self.potential,
                                             density_floor=self.config.density_floor,
                                             seed=self.config.seed).value
        gradient = np.where(self.free, gradient, 0.0)
        return ActionReport(a1_value, a2_value, a2_stderr, self.config.epsilon,
                            float(np.linalg.norm(gradient)), iteration, breakdown)


def action(psi: SpinorField, config: ActionConfig, pot: Potential, m: MassParameter,
           samples: Optional[QuadrupleSample] = None,
           kernel: Optional[KernelInterface] = None) -> ActionReport:
    """
    Evaluate A₁ + εA₂ at psi.

    Args:
        psi: Field
        config: ε, sampling and evaluation options
        pot: Four-potential on psi's grid
        m: Mass
        samples: Frozen quadruples; drawn from config.seed when omitted and ε > 0
        kernel: Two-point kernel for the optional δx², δp² breakdown

    Returns:
        ActionReport with the gradient norm over all entries
    """
    if samples is not None:
        functional = ActionFunctional(pot, m, config, samples, frozen_slices=())
    else:
        functional = ActionFunctional.for_field(psi, pot, m, config, frozen_slices=())
    return functional.report(psi.flat(), kernel=kernel)


def action_gradient(psi: SpinorField, config: ActionConfig, pot: Potential, m: MassParameter,
                    frozen_slices: Sequence[int] = (0,),
                    samples: Optional[QuadrupleSample] = None) -> SpinorField:
    """Field-shaped ∂/∂Re ψ + i∂/∂Im ψ of the total action; frozen slices are zero."""
    if samples is not None:
        functional = ActionFunctional(pot, m, config, samples, frozen_slices)
    else:
        functional = ActionFunctional.for_field(psi, pot, m, config, frozen_slices)
    q = psi.flat()
    if config.gradient_mode is GradientMode.FINITE_DIFFERENCE:
        gradient = finite_difference_gradient(functional, q, np.flatnonzero(functional.free))
    else:
        _, gradient = functional.value_and_gradient(q)
    return SpinorField.from_flat(psi.grid, gradient)


def finite_difference_gradient(functional: ActionFunctional, q: np.ndarray,
                               indices: Sequence[int], step: Optional[float] = None) -> np.ndarray:
    """Central differences along the real and imaginary part of each listed entry."""
    step = 1e-6 * max(float(np.max(np.abs(q))), 1e-12) if step is None else step
    gradient = np.zeros_like(q)
    for index in indices:
        for unit in (1.0, 1j):
            forward, backward = q.copy(), q.copy()
            forward[index] += step * unit
            backward[index] -= step * unit
            slope = (functional.value(forward) - functional.value(backward)) / (2.0 * step)
            gradient[index] += slope * unit
    return gradient


def gradient_check(functional: ActionFunctional, q: np.ndarray, n_coordinates: int = 20,
                   seed: int = 0, step: Optional[float] = None) -> float:
    """
    Largest relative deviation between analytic and central-difference gradients.

    Coordinates are drawn among free entries; each contributes its real and
    imaginary part.
    """
    rng = np.random.default_rng(seed)
    free = np.flatnonzero(functional.free)
    indices = rng.choice(free, size=min(n_coordinates, free.size), replace=False)
    _, analytic = functional.value_and_gradient(q)
    numeric = finite_difference_gradient(functional, q, indices, step)
    scale = 1e-3 * float(np.max(np.abs(analytic)))
    worst = 0.0
    for index in indices:
        for part in (np.real, np.imag):
            a, n = float(part(analytic[index])), float(part(numeric[index]))
            worst = max(worst, abs(a - n) / max(abs(a), abs(n), scale, 1e-300))
    action_logger.info("Gradient check", coordinates=len(indices), max_relative_error=worst)
    return worst
