import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from adapters.kernels.factory import KernelFactory
from core.entities.action import EstimateMethod, KernelVariant
from core.entities.errors import EstimatorError, GridError, ZeroNormError
from core.entities.grid import SpacetimeGrid, SpinorField
from core.use_cases.dirac_core import build_gamma_set, time_reverse
from core.use_cases.expectations import (PAIRS, UncertaintyFunctional, a2, canonical_separations,
                                         delta_p2, delta_x2, expect_1, expect_2, four_point_volume,
                                         mirrored_density,
                                         ratio_estimate, sample_quadruples,
                                         separations_from_positions, unit_operator,
                                         weight_W_trivial)

covariant = KernelFactory.create_kernel(KernelVariant.COVARIANT)


def _gaussian_field(grid, center, width, momentum=0.0):
    x = grid.positions
    envelope = np.exp(-0.25 * ((x - center) / width) ** 2 + 1j * momentum * x)
    values = np.zeros(grid.shape, dtype=complex)
    values[:, :, 0] = envelope[None, :]
    return SpinorField(grid, values)


def test_ratio_estimate_exact_path():
    estimate = ratio_estimate(np.array([1.0, 3.0]), np.array([2.0, 4.0]), 20, EstimateMethod.EXACT)
    assert estimate.value == pytest.approx(3.5)
    assert estimate.stderr == 0.0


def test_ratio_estimate_rejects_empty_support():
    with pytest.raises(EstimatorError):
        ratio_estimate(np.zeros(10), np.ones(10), 5, EstimateMethod.MONTE_CARLO)


def test_expect_1_identity_and_gamma0(free_grid, make_field):
    psi = make_field(free_grid)
    assert expect_1(np.eye(4), psi) == pytest.approx(1.0)
    upper = psi.values.copy()
    upper[..., 2:] = 0.0
    assert expect_1(build_gamma_set().gamma0, psi.with_values(upper)) == pytest.approx(1.0)


def test_expect_1_of_zero_field_raises(free_grid):
    with pytest.raises(ZeroNormError):
        expect_1(np.eye(4), SpinorField.zeros(free_grid))


def test_unit_two_point_expectation_is_one(small_grid, make_field):
    estimate = expect_2(unit_operator, make_field(small_grid), covariant)
    assert estimate.method is EstimateMethod.EXACT
    assert estimate.value == pytest.approx(1.0)


@pytest.mark.parametrize("variant", list(KernelVariant))
def test_position_spread_scales_with_packet_width(variant):
    kernel = KernelFactory.create_kernel(variant)
    narrow = SpacetimeGrid(n_t=6, n_x=16, dt=0.2, dx=0.25)
    wide = SpacetimeGrid(n_t=6, n_x=16, dt=0.4, dx=0.5)
    psi = _gaussian_field(narrow, center=2.0, width=0.5)
    ratio = delta_x2(SpinorField(wide, psi.values), kernel).value / delta_x2(psi, kernel).value
    assert ratio == pytest.approx(4.0, rel=1e-9)


def test_plane_wave_has_no_momentum_spread():
    grid = SpacetimeGrid(n_t=8, n_x=16, dt=0.2, dx=0.5)
    momentum = 2.0 * np.pi * 2 / grid.length
    values = np.zeros(grid.shape, dtype=complex)
    values[:, :, 0] = np.exp(-1j * 1.3 * grid.times[:, None] + 1j * momentum * grid.positions[None, :])
    assert abs(delta_p2(SpinorField(grid, values), covariant).value) < 1e-12


def test_opposite_momentum_packets_have_positive_momentum_spread():
    grid = SpacetimeGrid(n_t=4, n_x=32, dt=0.5, dx=0.5)
    left = _gaussian_field(grid, center=4.0, width=1.0, momentum=2.0)
    right = _gaussian_field(grid, center=12.0, width=1.0, momentum=-2.0)
    single = delta_p2(left, covariant).value
    split = delta_p2(left.with_values(left.values + right.values), covariant).value
    assert split > 0.25
    assert split > 5.0 * single


def test_monte_carlo_agrees_with_exact_sum(make_field):
    grid = SpacetimeGrid(n_t=6, n_x=12, dt=0.3, dx=0.5)
    psi = make_field(grid)
    exact = delta_x2(psi, covariant)
    sampled = delta_x2(psi, covariant, pair_threshold=0, n_samples=100_000, seed=3)
    assert sampled.method is EstimateMethod.MONTE_CARLO
    assert abs(sampled.value - exact.value) < 6.0 * sampled.stderr + 1e-3 * abs(exact.value)


def test_four_point_weight_matches_polytope_volume():
    separations = separations_from_positions([0.0, 1.3, 2.9, 5.0])
    assert weight_W_trivial(separations) == pytest.approx(four_point_volume(separations), rel=1e-3)


def test_coincident_points_have_zero_weight():
    separations = separations_from_positions([0.0, 1.0, 1.0, 3.0])
    assert weight_W_trivial(separations) == 0.0
    assert four_point_volume(separations) == 0.0


@given(order=st.permutations(range(4)))
def test_canonical_separations_ignore_labels(order):
    positions = np.array([0.0, 0.7, 2.2, 3.1])
    reference = canonical_separations(separations_from_positions(positions))
    assert canonical_separations(separations_from_positions(positions[list(order)])) == reference


def test_weight_table_is_filled_and_reused():
    table = {}
    separations = separations_from_positions([0.0, 1.0, 2.5, 4.0])
    first = weight_W_trivial(separations, table)
    assert len(table) == 1
    key = next(iter(table))
    table[key] = 42.0
    assert weight_W_trivial(separations, table) == 42.0
    assert first > 0.0


def test_quadruples_are_spacelike_and_mirrored(small_grid):
    samples = sample_quadruples(small_grid, n_samples=200, seed=4)
    t = small_grid.times[samples.t_index]
    x = small_grid.positions[samples.x_index]
    for k, l in PAIRS:
        assert np.all(np.abs(t[:, k] - t[:, l]) < np.abs(x[:, k] - x[:, l]))
    assert np.array_equal(samples.t_index[1::2], small_grid.n_t - 1 - samples.t_index[0::2])
    assert np.array_equal(samples.x_index[1::2], samples.x_index[0::2])
    assert np.all(samples.weights > 0.0)


def test_quadruple_sampling_is_deterministic(small_grid):
    first = sample_quadruples(small_grid, n_samples=100, seed=9)
    second = sample_quadruples(small_grid, n_samples=100, seed=9)
    assert np.array_equal(first.t_index, second.t_index)
    assert np.array_equal(first.x_index, second.x_index)


def test_quadruples_need_four_spatial_sites():
    with pytest.raises(EstimatorError):
        sample_quadruples(SpacetimeGrid(n_t=8, n_x=3, dt=0.5, dx=0.5), n_samples=10)


@given(magnitude=st.floats(min_value=0.1, max_value=10.0), angle=st.floats(min_value=0.0, max_value=6.28))
def test_a2_is_scale_invariant(magnitude, angle):
    grid = SpacetimeGrid(n_t=8, n_x=8, dt=0.5, dx=0.5)
    rng = np.random.default_rng(2)
    psi = SpinorField(grid, 1.0 + 0.3 * (rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)))
    samples = sample_quadruples(grid, n_samples=200, seed=1)
    scaled = psi.scaled(magnitude * np.exp(1j * angle))
    assert a2(scaled, samples=samples).value == pytest.approx(a2(psi, samples=samples).value, rel=1e-9)


def test_a2_is_symmetric_under_time_reversal(small_grid, make_field):
    psi = make_field(small_grid)
    functional = UncertaintyFunctional(sample_quadruples(small_grid, n_samples=400, seed=6))
    forward = functional.estimate(psi.flat()).value
    backward = functional.estimate(time_reverse(psi).flat()).value
    assert backward == pytest.approx(forward, rel=1e-9)


def test_relabeling_the_measured_pair_keeps_a2(small_grid, make_field):
    psi = make_field(small_grid)
    samples = sample_quadruples(small_grid, n_samples=200, seed=8)
    swapped = samples.relabeled([1, 0, 3, 2])
    assert a2(psi, samples=swapped).value == pytest.approx(a2(psi, samples=samples).value, rel=1e-12)


def test_pairs_enumerate_all_point_pairs():
    assert sorted(PAIRS) == list(itertools.combinations(range(4), 2))


UNCERTAINTY_GRID = SpacetimeGrid(n_t=16, n_x=48, dt=0.25, dx=0.5)


def _humps(grid, centers, momenta, width=0.5, energy=1.2):
    """Static packets e^{−iEt}·Σ envelope·e^{ikx} in the first spinor component."""
    x = grid.positions
    profile = sum(np.exp(-0.25 * ((x - c) / width) ** 2 + 1j * k * x)
                  for c, k in zip(centers, momenta))
    values = np.zeros(grid.shape, dtype=complex)
    values[:, :, 0] = np.exp(-1j * energy * grid.times)[:, None] * profile[None, :]
    return SpinorField(grid, values)


def test_plane_wave_has_vanishing_a2():
    grid = UNCERTAINTY_GRID
    momentum = 2.0 * np.pi * 3 / grid.length
    values = np.zeros(grid.shape, dtype=complex)
    values[:, :, 0] = np.exp(-1j * 1.4 * grid.times[:, None] + 1j * momentum * grid.positions[None, :])
    assert abs(a2(SpinorField(grid, values), n_samples=600, seed=4).value) < 1e-12


def test_single_packet_has_lower_a2_than_a_split_superposition():
    grid = UNCERTAINTY_GRID
    middle = 0.5 * grid.length
    single = a2(_humps(grid, [middle], [0.0]), n_samples=1000, seed=5).value
    split = a2(_humps(grid, [middle - 4.0, middle + 4.0], [-1.0, 1.0]), n_samples=1000, seed=5).value
    assert abs(single) < 1e-12
    assert split > 0.1
    assert split > 100.0 * abs(single)


def test_a2_grows_with_the_separation_of_the_packets():
    grid = UNCERTAINTY_GRID
    middle = 0.5 * grid.length
    values = [a2(_humps(grid, [middle - d / 2, middle + d / 2], [-1.0, 1.0]),
                 n_samples=2000, seed=9).value
              for d in (4.0, 8.0, 12.0)]
    assert values[0] < values[1] < values[2]


def test_mirrored_density_is_time_symmetric(small_grid, make_field):
    psi = make_field(small_grid)
    reference = mirrored_density(psi).reshape(small_grid.n_t, small_grid.n_x)
    assert np.allclose(reference, reference[::-1])
    assert np.allclose(mirrored_density(time_reverse(psi)), mirrored_density(psi))


def test_live_reference_reproduces_the_unfrozen_value(small_grid, make_field):
    psi = make_field(small_grid)
    samples = sample_quadruples(small_grid, n_samples=300, seed=2)
    live = UncertaintyFunctional(samples).estimate(psi.flat()).value
    frozen = UncertaintyFunctional(samples, reference=psi.density()).estimate(psi.flat()).value
    assert frozen == pytest.approx(live, rel=1e-12)


def test_frozen_reference_gradient_matches_finite_differences(small_grid, make_field, rng):
    psi = make_field(small_grid)
    samples = sample_quadruples(small_grid, n_samples=300, seed=2)
    functional = UncertaintyFunctional(samples, reference=mirrored_density(psi))
    q = psi.flat()
    direction = rng.normal(size=q.shape) + 1j * rng.normal(size=q.shape)
    step = 1e-6
    forward = functional.value_and_gradient(q + step * direction)[0]
    backward = functional.value_and_gradient(q - step * direction)[0]
    _, gradient = functional.value_and_gradient(q)
    slope = np.vdot(gradient, direction).real
    assert (forward - backward) / (2.0 * step) == pytest.approx(slope, rel=1e-5)


def test_reference_must_cover_the_grid(small_grid):
    samples = sample_quadruples(small_grid, n_samples=50, seed=2)
    with pytest.raises(GridError):
        UncertaintyFunctional(samples, reference=np.ones(small_grid.n_sites - 1))
