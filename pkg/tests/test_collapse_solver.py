from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from core.entities.dirac import (MassParameter, Potential, PotentialSchedule, PotentialTerm,
                                 SpatialShape, TemporalShape)
from core.entities.grid import SpacetimeGrid, SpinorField
from core.entities.scenario import (BoundaryPolicy, FinalSlice, InitialState, InitialStateKind,
                                    OptimizationStatus, Scenario)
from core.use_cases.collapse_solver import (_round_budgets, calibrate_epsilon, collapse_metrics,
                                            initialize_field, minimize_action, prepare_context)
from core.use_cases.dirac_core import apply_dirac, time_reversal_matrix, time_reverse
from core.use_cases.functionals import ActionFunctional, a1
from core.use_cases.grid_fields import inner_product_3d, slice_norms
from infrastructure.config.scenario_loader import load_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

# with a free potential on 8 sites, modes 0..15 have negative and 16..31 positive energy
LOWEST_POSITIVE = 16


def _scenario(amplitudes=((LOWEST_POSITIVE, 1.0),), **overrides):
    options = dict(
        name="unit",
        grid=SpacetimeGrid(n_t=10, n_x=8, dt=0.1, dx=0.5),
        mass=MassParameter(1.0),
        schedule=PotentialSchedule(),
        initial_state=InitialState(InitialStateKind.MODES, amplitudes=amplitudes),
        epsilon=0.0,
        seed=3,
        quadruple_samples=200,
        max_iterations=15)
    options.update(overrides)
    return Scenario(**options)


def test_initial_slice_is_normalized():
    context = prepare_context(_scenario(((16, 1.0), (20, 0.5j))))
    assert inner_product_3d(context.initial, context.initial).real == pytest.approx(1.0)


def test_gaussian_initial_slice_is_normalized():
    state = InitialState(InitialStateKind.GAUSSIAN, center=2.0, width=0.7, momentum=0.4)
    context = prepare_context(_scenario(initial_state=state))
    assert inner_product_3d(context.initial, context.initial).real == pytest.approx(1.0)


def test_propagation_conserves_slice_norms():
    field = initialize_field(_scenario(((16, 1.0), (17, 0.3), (3, 0.2))))
    assert np.allclose(slice_norms(field), 1.0, atol=1e-8)


def test_time_reversed_final_slice():
    scenario = _scenario(boundary=BoundaryPolicy.FIX_BOTH,
                         final_slice=FinalSlice.TIME_REVERSED_INITIAL)
    field = initialize_field(scenario)
    expected = np.conj(field.values[0]) @ time_reversal_matrix().T
    assert np.allclose(field.values[-1], expected)
    assert scenario.frozen_slices() == [0, scenario.grid.n_t - 1]


def test_single_mode_propagation_keeps_its_population():
    scenario = _scenario()
    context = prepare_context(scenario)
    diagnostics = collapse_metrics(initialize_field(scenario, context), context.phased)
    assert diagnostics.winner == LOWEST_POSITIVE
    assert diagnostics.dominance_index == 0
    assert diagnostics.reliable
    assert np.allclose(diagnostics.totals, 1.0, atol=1e-8)


def test_even_superposition_has_no_winner():
    amplitude = 1.0 / np.sqrt(2.0)
    scenario = _scenario(((16, amplitude), (18, amplitude)))
    context = prepare_context(scenario)
    diagnostics = collapse_metrics(initialize_field(scenario, context), context.phased)
    assert diagnostics.winner is None
    assert diagnostics.final_max_population == pytest.approx(0.5, abs=1e-6)


def test_minimization_lowers_action_and_keeps_frozen_slice():
    scenario = _scenario(((16, 0.8), (18, 0.6)), epsilon=0.1)
    context = prepare_context(scenario)
    field0 = initialize_field(scenario, context)
    start = field0.copy()
    start.values[1:] *= 1.05
    result = minimize_action(start, scenario, context, rounds=1)
    assert result.final_report.total <= result.log[0].total
    assert np.array_equal(result.field.values[0], field0.values[0])
    assert result.status in tuple(OptimizationStatus)
    assert [r.iteration for r in result.log] == list(range(len(result.log)))


def test_zero_budget_returns_start_field():
    scenario = _scenario(max_iterations=0)
    field0 = initialize_field(scenario)
    result = minimize_action(field0, scenario)
    assert result.status is OptimizationStatus.BUDGET_EXHAUSTED
    assert result.n_iterations == 0
    assert np.array_equal(result.field.values, field0.values)


def test_callback_sees_every_report():
    scenario = _scenario(max_iterations=5)
    seen = []
    result = minimize_action(initialize_field(scenario), scenario, callback=seen.append)
    assert len(seen) == len(result.log)


def test_minimization_is_deterministic_for_a_seed():
    scenario = _scenario(((16, 0.8), (18, 0.6)), epsilon=0.2, max_iterations=5)
    context = prepare_context(scenario)
    field0 = initialize_field(scenario, context)
    first = minimize_action(field0, scenario, context)
    second = minimize_action(field0, scenario, context)
    assert np.array_equal(first.field.values, second.field.values)


def test_calibration_stops_at_first_dominating_epsilon():
    points = calibrate_epsilon(_scenario(max_iterations=3), [1.0, 0.0])
    assert len(points) == 1
    assert points[0].epsilon == 0.0
    assert points[0].winner == LOWEST_POSITIVE


def test_calibration_scans_every_epsilon_without_a_winner():
    amplitude = 1.0 / np.sqrt(2.0)
    scenario = replace(_scenario(((16, amplitude), (18, amplitude))), max_iterations=0)
    points = calibrate_epsilon(scenario, [0.0, 0.01])
    assert [p.epsilon for p in points] == [0.0, 0.01]
    assert all(p.winner is None for p in points)


def test_time_reversed_minimizer_has_the_same_action():
    scenario = _scenario(((16, 0.8), (18, 0.6)), epsilon=0.1, max_iterations=5,
                         boundary=BoundaryPolicy.FIX_BOTH,
                         final_slice=FinalSlice.TIME_REVERSED_INITIAL)
    context = prepare_context(scenario)
    result = minimize_action(initialize_field(scenario, context), scenario, context)
    functional = ActionFunctional.for_field(result.field, context.potential, scenario.mass,
                                            scenario.action_config(),
                                            frozen_slices=scenario.frozen_slices())
    forward = functional.value(result.field.flat())
    backward = functional.value(time_reverse(result.field).flat())
    assert backward == pytest.approx(forward, rel=1e-9)


def test_round_budgets_split_the_iterations():
    assert _round_budgets(10, 4) == [2, 2, 2, 4]
    assert _round_budgets(2, 4) == [1, 1]
    assert _round_budgets(0, 4) == [0]
    assert sum(_round_budgets(401, 4)) == 401


def test_reports_carry_their_resampling_round():
    scenario = _scenario(((16, 0.8), (18, 0.6)), epsilon=0.2, max_iterations=6)
    context = prepare_context(scenario)
    result = minimize_action(initialize_field(scenario, context), scenario, context, rounds=3)
    rounds = [r.round_index for r in result.log]
    assert rounds[0] == 0
    assert rounds == sorted(rounds)
    assert set(rounds) <= {0, 1, 2}
    assert result.log[-1].to_dict()["round"] == rounds[-1]


def test_zero_epsilon_runs_a_single_round():
    scenario = _scenario(((16, 0.8), (18, 0.6)), max_iterations=6)
    result = minimize_action(initialize_field(scenario), scenario, rounds=3)
    assert all(r.round_index == 0 for r in result.log)


def test_each_round_draws_its_own_quadruples():
    scenario = _scenario(((16, 0.8), (18, 0.6)), epsilon=0.2)
    context = prepare_context(scenario)
    field0 = initialize_field(scenario, context)
    first, second = (ActionFunctional.for_field(field0, context.potential, scenario.mass,
                                                scenario.action_config(), round_index=r)
                     for r in (0, 1))
    assert first.samples.seed == scenario.seed
    assert second.samples.seed == scenario.seed + 1
    assert not np.array_equal(first.samples.x_index, second.samples.x_index)


def _ramped_scenario(**overrides):
    amplitude = 1.0 / np.sqrt(2.0)
    ramp = PotentialTerm(component=0, amplitude=0.05, temporal=TemporalShape.RAMP,
                         spatial=SpatialShape.COSINE)
    return _scenario(((16, amplitude), (18, amplitude)), schedule=PotentialSchedule((ramp,)),
                     max_iterations=50, **overrides)


def test_propagated_field_is_annihilated_by_the_residual():
    scenario = _ramped_scenario()
    context = prepare_context(scenario)
    field = initialize_field(scenario, context)
    residual = apply_dirac(field, context.potential, scenario.mass)
    assert residual.grid == scenario.grid.midpoints()
    assert np.max(np.abs(residual.values)) < 1e-10


def test_vanishing_epsilon_keeps_unitary_propagation():
    scenario = _ramped_scenario()
    context = prepare_context(scenario)
    field0 = initialize_field(scenario, context)
    result = minimize_action(field0, scenario, context)
    assert result.status is OptimizationStatus.CONVERGED
    assert np.max(np.abs(result.field.values - field0.values)) < 1e-6
    before = collapse_metrics(field0, context.phased).populations
    after = collapse_metrics(result.field, context.phased).populations
    assert np.max(np.abs(after - before)) < 1e-3


def _plane_wave_scenario(grid):
    wavenumber = 2.0 * np.pi * 3 / grid.length
    lattice_momentum = np.sin(wavenumber * grid.dx) / grid.dx
    energy = np.hypot(1.0, lattice_momentum)
    spinor = np.array([1.0, 0.0, 0.0, lattice_momentum / (energy + 1.0)])
    spinor /= np.linalg.norm(spinor)
    state = InitialState(InitialStateKind.GAUSSIAN, center=0.5 * grid.length, width=1e6,
                         momentum=wavenumber, spinor=tuple(spinor))
    return _scenario(grid=grid, initial_state=state), energy


def _exact_time_field(initial, grid, energy):
    phases = np.exp(-1j * energy * grid.times)
    return SpinorField(grid, phases[:, None, None] * initial.values[None, :, :])


@pytest.mark.slow
def test_propagation_sits_below_the_discretization_floor():
    grid = SpacetimeGrid(n_t=64, n_x=64, dt=0.05, dx=0.5)
    scenario, energy = _plane_wave_scenario(grid)
    context = prepare_context(scenario)
    potential = Potential.zeros(grid)
    floor = a1(_exact_time_field(context.initial, grid, energy), potential, scenario.mass)
    halved = replace(grid, dt=0.5 * grid.dt)
    finer = a1(_exact_time_field(context.initial, halved, energy), Potential.zeros(halved),
               scenario.mass)
    # the floor is a discretization effect: it shrinks faster than dt²
    assert 0.0 < finer < floor / 8.0

    field = initialize_field(scenario, context)
    propagated = a1(field, potential, scenario.mass)
    assert propagated < 10.0 * floor
    residual = apply_dirac(field, potential, scenario.mass).values
    site_worst = np.max(np.sum(np.abs(residual) ** 2, axis=-1))
    assert site_worst <= (1.0 + 1e-9) * propagated * np.sum(np.abs(field.values) ** 2)


@pytest.mark.slow
def test_calibrated_epsilon_collapses_the_two_mode_scenario():
    scenario = load_scenario(SCENARIOS / "two_mode.json")
    context = prepare_context(scenario)
    field0 = initialize_field(scenario, context)
    outcomes = []
    for epsilon in (1.0, 10.0, 100.0, 1000.0):
        result = minimize_action(field0, replace(scenario, epsilon=epsilon), context)
        diagnostics = collapse_metrics(result.field, context.phased)
        outcomes.append((epsilon, diagnostics))
        if diagnostics.winner is not None:
            break
    epsilon, diagnostics = outcomes[-1]
    assert diagnostics.winner is not None, [(e, d.final_max_population) for e, d in outcomes]
    assert diagnostics.final_max_population > 0.9
    assert np.all(np.abs(diagnostics.totals - 1.0) <= 0.02)
