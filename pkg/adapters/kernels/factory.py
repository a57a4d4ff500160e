"""
Kernel Factory
Creates kernel provider instances by variant.
"""

from typing import Optional, Union

from core.interfaces.kernel_provider import KernelInterface
from core.entities.action import KernelChoice, KernelVariant
from shared.utils.logger import get_logger

from .providers import CovariantKernel, InverseDistanceKernel, StepKernel

kernel_logger = get_logger("kernels")


class KernelFactory:
    """Factory for creating kernel instances."""

    _providers = {
        KernelVariant.STEP: StepKernel,
        KernelVariant.INVERSE_DISTANCE: InverseDistanceKernel,
        KernelVariant.COVARIANT: CovariantKernel
    }

    @classmethod
    def create_kernel(cls, choice: Optional[Union[KernelChoice, KernelVariant, str]] = None) -> KernelInterface:
        """
        Create kernel instance.

        Args:
            choice: KernelChoice, variant or variant name. None selects the covariant kernel.

        Returns:
            Kernel instance

        Raises:
            ValueError: If the variant is not supported
        """
        if choice is None:
            variant = KernelVariant.COVARIANT
        elif isinstance(choice, KernelChoice):
            variant = choice.variant
        elif isinstance(choice, KernelVariant):
            variant = choice
        else:
            try:
                variant = KernelVariant(str(choice).lower())
            except ValueError:
                available = [v.value for v in cls._providers]
                raise ValueError(
                    f"Kernel '{choice}' not supported. "
                    f"Available kernels: {', '.join(available)}"
                )

        if variant not in cls._providers:
            available = [v.value for v in cls._providers]
            raise ValueError(
                f"Kernel '{variant.value}' not supported. "
                f"Available kernels: {', '.join(available)}"
            )

        kernel = cls._providers[variant]()
        kernel_logger.debug("Kernel created", variant=variant.value)
        return kernel

    @classmethod
    def get_available_kernels(cls) -> list[KernelVariant]:
        """Get list of available kernel variants."""
        return list(cls._providers.keys())

    @classmethod
    def normalization_residuals(cls, r: float) -> dict[KernelVariant, float]:
        """|∫dz⁰ f − 1| for every normalized kernel at separation r."""
        results = {}
        for variant in cls._providers:
            kernel = cls.create_kernel(variant)
            if kernel.is_normalized():
                results[variant] = abs(kernel.time_integral(r) - 1.0)
        return results
