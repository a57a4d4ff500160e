"""
Two-Particle Extension Use Case
One-point expectations and A₁ for two distinguishable spin-½ particles.
"""

from typing import Callable, Sequence, Tuple, Union

import numpy as np

from ..entities.dirac import MassParameter, Potential
from ..entities.errors import GridError, ZeroNormError
from ..entities.two_particle import PAIR_COMPONENTS, TwoParticleField
from .dirac_core import DiracOperator

PairOperator = Union[np.ndarray, Callable[[TwoParticleField], np.ndarray]]


def on_particle(operator: np.ndarray, particle: int) -> np.ndarray:
    """Lift a 4×4 spinor operator to the 16-component pair space."""
    operator = np.asarray(operator, dtype=complex)
    if operator.shape != (4, 4):
        raise GridError(f"single-particle operator must be 4x4, got {operator.shape}")
    identity = np.eye(4, dtype=complex)
    if particle == 0:
        return np.kron(operator, identity)
    if particle == 1:
        return np.kron(identity, operator)
    raise GridError(f"particle index must be 0 or 1, got {particle}")


def expect_1_nparticle(operator: PairOperator, psi2: TwoParticleField) -> complex:
    """Σψ†Oψ / Σψ†ψ over all configurations (the cell volumes cancel)."""
    denominator = np.vdot(psi2.values, psi2.values).real
    if denominator == 0.0:
        raise ZeroNormError("expectation of a zero two-particle field")
    if callable(operator):
        transformed = np.asarray(operator(psi2))
    else:
        matrix = np.asarray(operator)
        if matrix.shape != (PAIR_COMPONENTS, PAIR_COMPONENTS):
            raise GridError(f"pair operator must be 16x16, got {matrix.shape}")
        transformed = psi2.values @ matrix.T
    return complex(np.vdot(psi2.values, transformed) / denominator)


def a1_nparticle_terms(psi2: TwoParticleField, potentials: Sequence[Potential],
                       masses: Union[MassParameter, Sequence[MassParameter]]) -> Tuple[float, float]:
    """‖𝒟_aψ‖²/‖ψ‖² and ‖𝒟_bψ‖²/‖ψ‖², each operator acting on its own particle's slots."""
    if len(potentials) != 2:
        raise GridError("two potentials are required, one per particle")
    if isinstance(masses, MassParameter):
        masses = (masses, masses)
    pot_a, pot_b = potentials
    if pot_a.grid != psi2.grid_a or pot_b.grid != psi2.grid_b:
        raise GridError("potentials must live on the particles' grids")
    matrix = psi2.as_matrix()
    norm = np.vdot(matrix, matrix).real
    if norm == 0.0:
        raise ZeroNormError("A1 of a zero two-particle field")
    residual_a = DiracOperator(pot_a, masses[0]).matrix @ matrix
    residual_b = (DiracOperator(pot_b, masses[1]).matrix @ matrix.T).T
    return (float(np.vdot(residual_a, residual_a).real / norm),
            float(np.vdot(residual_b, residual_b).real / norm))


def a1_nparticle(psi2: TwoParticleField, potentials: Sequence[Potential],
                 masses: Union[MassParameter, Sequence[MassParameter]]) -> float:
    """Σ_n ⟨⟨𝒟_n†𝒟_n⟩⟩₁ for the two particles."""
    return float(sum(a1_nparticle_terms(psi2, potentials, masses)))
