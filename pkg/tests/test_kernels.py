import numpy as np
import pytest
from hypothesis import given, strategies as st

from adapters.kernels.factory import KernelFactory
from adapters.kernels.providers import CovariantKernel, InverseDistanceKernel, StepKernel
from core.entities.action import KernelChoice, KernelVariant


@pytest.mark.parametrize("choice, expected", [
    (None, CovariantKernel),
    (KernelVariant.STEP, StepKernel),
    (KernelChoice(KernelVariant.INVERSE_DISTANCE), InverseDistanceKernel),
    ("COVARIANT", CovariantKernel),
    ("invdist", InverseDistanceKernel),
])
def test_factory_creates_requested_kernel(choice, expected):
    assert isinstance(KernelFactory.create_kernel(choice), expected)


def test_unknown_kernel_lists_options():
    with pytest.raises(ValueError, match="Available kernels: step, invdist, covariant"):
        KernelFactory.create_kernel("gaussian")


def test_available_kernels():
    assert KernelFactory.get_available_kernels() == list(KernelVariant)


@pytest.mark.parametrize("r", [0.1, 1.0, 7.5])
def test_normalized_kernels_integrate_to_one(r):
    residuals = KernelFactory.normalization_residuals(r)
    assert set(residuals) == {KernelVariant.INVERSE_DISTANCE, KernelVariant.COVARIANT}
    assert max(residuals.values()) < 1e-6


def test_step_kernel_integral_grows_with_distance():
    kernel = StepKernel()
    assert not kernel.is_normalized()
    assert kernel.time_integral(1.5) == pytest.approx(3.0)


@given(z0=st.floats(min_value=-10.0, max_value=10.0), r=st.floats(min_value=0.0, max_value=10.0))
def test_kernels_vanish_off_the_spacelike_region(z0, r):
    for variant in KernelFactory.get_available_kernels():
        value = float(KernelFactory.create_kernel(variant).evaluate(np.array(z0), np.array(r)))
        if abs(z0) >= r:
            assert value == 0.0
        else:
            assert value > 0.0


def test_kernel_info_reports_variant():
    assert CovariantKernel().get_info() == {"variant": "covariant", "normalized": True}
