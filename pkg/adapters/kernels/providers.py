"""
Kernel Provider Adapters
The step, inverse-distance and covariant spacelike kernels.
"""

import numpy as np
from scipy.integrate import quad

from core.interfaces.kernel_provider import KernelInterface
from core.entities.action import KernelVariant


def _spacelike(z0: np.ndarray, r: np.ndarray):
    """Mask of −z² = r² − z0² > 0 together with −z² itself; u(0) = 0."""
    interval = np.asarray(r, dtype=float) ** 2 - np.asarray(z0, dtype=float) ** 2
    return interval > 0.0, interval


class StepKernel(KernelInterface):
    """f(z) = u(−z²). Not normalized: its time integral is 2|z⃗|."""

    def evaluate(self, z0, r):
        mask, _ = _spacelike(z0, r)
        return mask.astype(float)

    def time_integral(self, r: float) -> float:
        value, _ = quad(lambda z0: float(self.evaluate(z0, r)), -r, r)
        return value

    def get_variant(self) -> KernelVariant:
        return KernelVariant.STEP

    def is_normalized(self) -> bool:
        return False


class InverseDistanceKernel(KernelInterface):
    """f(z) = u(−z²)/(2|z⃗|)."""

    def evaluate(self, z0, r):
        mask, _ = _spacelike(z0, r)
        safe_r = np.where(mask, r, 1.0)
        return np.where(mask, 0.5 / safe_r, 0.0)

    def time_integral(self, r: float) -> float:
        value, _ = quad(lambda z0: float(self.evaluate(z0, r)), -r, r,
                        epsabs=1e-13, epsrel=1e-12)
        return value

    def get_variant(self) -> KernelVariant:
        return KernelVariant.INVERSE_DISTANCE

    def is_normalized(self) -> bool:
        return True


class CovariantKernel(KernelInterface):
    """f(z) = u(−z²)/(π√(−z²)); zero on the light cone."""

    def evaluate(self, z0, r):
        mask, interval = _spacelike(z0, r)
        safe = np.where(mask, interval, 1.0)
        return np.where(mask, 1.0 / (np.pi * np.sqrt(safe)), 0.0)

    def time_integral(self, r: float) -> float:
        # 1/√(r²−z0²) = (z0+r)^(−½)(r−z0)^(−½): the algebraic weight absorbs both endpoints
        value, _ = quad(lambda z0: 1.0 / np.pi, -r, r, weight="alg", wvar=(-0.5, -0.5),
                        epsabs=1e-13, epsrel=1e-12)
        return value

    def get_variant(self) -> KernelVariant:
        return KernelVariant.COVARIANT

    def is_normalized(self) -> bool:
        return True
