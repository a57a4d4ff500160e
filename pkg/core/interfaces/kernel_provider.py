"""
Kernel Provider Interface
Defines contract for spacelike two-point kernels f(z).
"""

from abc import ABC, abstractmethod
from typing import Any, Dict

import numpy as np

from ..entities.action import KernelVariant


class KernelInterface(ABC):
    """Interface for kernel implementations."""

    @abstractmethod
    def evaluate(self, z0: np.ndarray, r: np.ndarray) -> np.ndarray:
        """
        Evaluate f at time separation z0 and spatial distance r.

        Args:
            z0: Time components of the separation
            r: Euclidean norm of the spatial components

        Returns:
            Kernel values, zero wherever the separation is not spacelike
        """
        pass

    @abstractmethod
    def time_integral(self, r: float) -> float:
        """Numerical ∫dz⁰ f(z⁰, r) over the spacelike interval (−r, r)."""
        pass

    @abstractmethod
    def get_variant(self) -> KernelVariant:
        """Get the kernel variant."""
        pass

    @abstractmethod
    def is_normalized(self) -> bool:
        """True when the time integral is one for every r > 0."""
        pass

    def get_info(self) -> Dict[str, Any]:
        return {"variant": self.get_variant().value, "normalized": self.is_normalized()}
