"""
Collapse Solver Use Case
Propagated starting fields, action minimization over the free slices and
population diagnostics in the instantaneous basis.
"""

from dataclasses import dataclass, replace
from typing import Callable, List, MutableMapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize
from scipy.sparse.linalg import splu

from ..entities.action import ActionReport
from ..entities.dirac import Potential
from ..entities.errors import SolverError
from ..entities.grid import SpinorField, SpinorSlice
from ..entities.modes import PhasedBasis
from ..entities.scenario import (BoundaryPolicy, CollapseDiagnostics, FinalSlice, InitialStateKind,
                                 OptimizationResult, OptimizationStatus, Scenario)
from .dirac_core import slice_hamiltonian_matrix, time_reverse
from .eigenbasis import (build_mode_basis, build_phased_basis, project_coefficients,
                         select_top_modes)
from .expectations import QuadrupleSample
from .functionals import ActionFunctional
from .grid_fields import normalize_slice
from infrastructure.config.settings import settings
from shared.utils.logger import get_logger

solver_logger = get_logger("collapse_solver")


@dataclass
class ScenarioContext:
    """Sampled potential, tracked basis and initial slice of one scenario."""
    scenario: Scenario
    potential: Potential
    phased: PhasedBasis
    initial: SpinorSlice


def prepare_context(scenario: Scenario) -> ScenarioContext:
    """Sample the potential at the scenario's t_i and build its phased basis."""
    potential = scenario.schedule.sample(scenario.grid, scenario.t_i)
    roughness = potential.smoothness()
    if roughness > settings.numerics.smoothness_bound:
        solver_logger.warning("Potential varies abruptly between sites", smoothness=roughness,
                              bound=settings.numerics.smoothness_bound)
    basis = build_mode_basis(potential, scenario.mass, scenario.t_i)
    phased = build_phased_basis(basis, scenario.t_i)
    initial = initial_slice(scenario, phased)
    if scenario.top_k is not None and scenario.top_k < basis.retained_count:
        phased = build_phased_basis(select_top_modes(basis, initial, scenario.top_k), scenario.t_i)
    return ScenarioContext(scenario, potential, phased, initial)


def initial_slice(scenario: Scenario, phased: PhasedBasis) -> SpinorSlice:
    """Normalized first slice from mode amplitudes or a Gaussian packet."""
    grid = scenario.grid
    state = scenario.initial_state
    if state.kind is InitialStateKind.MODES:
        modes = phased.mode_values(0)
        values = np.zeros((grid.n_x, 4), dtype=complex)
        for j, amplitude in state.amplitudes:
            if not 0 <= j < phased.retained_count:
                raise SolverError(f"initial mode {j} outside the basis of {phased.retained_count}")
            values += complex(amplitude) * modes[j]
    else:
        x = grid.positions
        envelope = np.exp(-0.25 * ((x - state.center) / state.width) ** 2 + 1j * state.momentum * x)
        values = envelope[:, None] * np.asarray(state.spinor, dtype=complex)[None, :]
    return normalize_slice(SpinorSlice(grid, values, 0))


def _crank_nicolson_step(h_start, h_end, vector: np.ndarray, dt: float, substeps: int) -> np.ndarray:
    """Advance by dt in substeps with H interpolated linearly across the step."""
    identity = sp.identity(vector.shape[0], format="csc", dtype=complex)
    h = dt / substeps
    for s in range(substeps):
        weight = (s + 0.5) / substeps
        hamiltonian = (1.0 - weight) * h_start + weight * h_end
        implicit = splu(sp.csc_matrix(identity + 0.5j * h * hamiltonian))
        vector = implicit.solve((identity - 0.5j * h * hamiltonian) @ vector)
    return vector


def initialize_field(scenario: Scenario, context: Optional[ScenarioContext] = None) -> SpinorField:
    """
    Fill every slice by Crank–Nicolson propagation of i∂ₜψ = Hψ from the initial slice.

    Steps whose norm drifts by more than the configured bound are retried with
    twice as many substeps; under fix-both with time-reversed data the last
    slice is replaced by the time-reversal image of the first.
    """
    context = prepare_context(scenario) if context is None else context
    grid = scenario.grid
    max_drift = settings.solver.max_norm_drift
    values = np.zeros(grid.shape, dtype=complex)
    values[0] = context.initial.values
    current = context.initial.values.reshape(-1)
    norm0 = np.vdot(current, current).real
    h_previous = slice_hamiltonian_matrix(context.potential, scenario.mass, 0)

    for k in range(1, grid.n_t):
        h_next = slice_hamiltonian_matrix(context.potential, scenario.mass, k)
        substeps = 1
        while True:
            candidate = _crank_nicolson_step(h_previous, h_next, current, grid.dt, substeps)
            drift = abs(np.vdot(candidate, candidate).real / norm0 - 1.0)
            if drift <= max_drift:
                break
            if 2 * substeps > settings.solver.max_substeps:
                raise SolverError(f"norm drift {drift:.3e} at slice {k} persists with "
                                  f"{substeps} substeps")
            substeps *= 2
            solver_logger.warning("Reducing propagation step", slice=k, drift=drift,
                                  substeps=substeps)
        current = candidate
        values[k] = current.reshape(grid.n_x, 4)
        h_previous = h_next

    field = SpinorField(grid, values)
    if (scenario.boundary is BoundaryPolicy.FIX_BOTH
            and scenario.final_slice is FinalSlice.TIME_REVERSED_INITIAL):
        reversed_initial = time_reverse(field).values[-1]
        values[-1] = reversed_initial
        field = SpinorField(grid, values)
    solver_logger.debug("Initial field propagated", slices=grid.n_t,
                        final_norm=float(np.vdot(current, current).real * grid.dx))
    return field


class _FreeVector:
    """Maps the free complex entries of a field to a real optimizer vector and back."""

    def __init__(self, template: np.ndarray, free: np.ndarray):
        self.template = template
        self.index = np.flatnonzero(free)

    def pack(self, q: np.ndarray) -> np.ndarray:
        entries = q[self.index]
        return np.concatenate([entries.real, entries.imag])

    def unpack(self, x: np.ndarray) -> np.ndarray:
        q = self.template.copy()
        half = self.index.size
        q[self.index] = x[:half] + 1j * x[half:]
        return q


def _round_budgets(total: int, rounds: int) -> List[int]:
    """Split the iteration budget over rounds; the last round takes the remainder."""
    rounds = max(1, min(rounds, total)) if total > 0 else 1
    share = total // rounds
    return [share] * (rounds - 1) + [total - share * (rounds - 1)]


def _descend(objective: Callable, x: np.ndarray, budget: int, scenario: Scenario,
             record: Callable[[np.ndarray], None]):
    """One L-BFGS-B run with steepest-descent recovery after a failed line search."""
    trust = 1e-2
    status, message = OptimizationStatus.BUDGET_EXHAUSTED, "iteration budget exhausted"
    retries = 0
    allowed = budget

    while budget > 0:
        result = minimize(objective, x, jac=True, method="L-BFGS-B", callback=record,
                          options={"maxiter": budget,
                                   "gtol": scenario.gradient_tolerance,
                                   "ftol": settings.solver.function_tolerance,
                                   "maxcor": settings.solver.history_size})
        x = result.x
        budget -= max(result.nit, 1)
        if result.success:
            status, message = OptimizationStatus.CONVERGED, str(result.message)
            break
        if result.nit >= allowed or budget <= 0:
            status, message = OptimizationStatus.BUDGET_EXHAUSTED, str(result.message)
            break

        # line search failed: steepest descent with a halving trust step
        value, gradient = objective(x)
        length = np.linalg.norm(gradient)
        if length == 0.0:
            status, message = OptimizationStatus.CONVERGED, "zero gradient"
            break
        improved = False
        while retries < settings.solver.line_search_retries and not improved:
            retries += 1
            trial = x - trust * np.linalg.norm(x) / length * gradient
            trust *= 0.5
            if objective(trial)[0] < value:
                x, improved = trial, True
                record(x)
                budget -= 1
        solver_logger.warning("Line search failed", message=str(result.message),
                              retries=retries, recovered=improved)
        if not improved:
            status, message = OptimizationStatus.LINE_SEARCH_FAILED, str(result.message)
            break
    return x, status, message


def minimize_action(field0: SpinorField, scenario: Scenario,
                    context: Optional[ScenarioContext] = None,
                    samples: Optional[QuadrupleSample] = None,
                    table: Optional[MutableMapping[str, float]] = None,
                    callback: Optional[Callable[[ActionReport], None]] = None,
                    rounds: Optional[int] = None,
                    threads: Optional[int] = None) -> OptimizationResult:
    """
    L-BFGS-B descent of A₁ + εA₂ over the free slices.

    With ε > 0 and no supplied quadruples the iteration budget is split over
    rounds. Each round redraws the quadruples from the current field's
    support and freezes their weights to its time-mirrored density, so the
    optimizer lowers A₂ through the local momenta and not through ∏ρ.

    Args:
        field0: Starting field; frozen slices are taken from it unchanged
        scenario: ε, boundary policy, seed and budget
        context: Prepared potential; built when omitted
        samples: Frozen quadruples for a single round; drawn per round when omitted
        table: Persistent weight table for new quadruples
        callback: Receives every accepted iterate's report
        rounds: Resampling rounds; settings.solver.resample_rounds when omitted
        threads: Worker threads for the quadruple weights

    Returns:
        OptimizationResult with one report per accepted iterate
    """
    context = prepare_context(scenario) if context is None else context
    config = scenario.action_config()
    frozen = scenario.frozen_slices()
    rounds = settings.solver.resample_rounds if rounds is None else rounds
    if samples is not None or config.epsilon == 0.0:
        rounds = 1
    q0 = field0.flat().copy()
    log: List[ActionReport] = []
    status, message = OptimizationStatus.BUDGET_EXHAUSTED, "iteration budget exhausted"

    for round_index, budget in enumerate(_round_budgets(scenario.max_iterations, rounds)):
        start = SpinorField.from_flat(field0.grid, q0)
        if samples is not None:
            functional = ActionFunctional(context.potential, scenario.mass, config, samples, frozen)
        else:
            functional = ActionFunctional.for_field(start, context.potential, scenario.mass,
                                                    config, frozen, table, round_index,
                                                    threads)
        mapping = _FreeVector(q0, functional.free)

        def record(x: np.ndarray, functional=functional, mapping=mapping, round_index=round_index):
            report = replace(functional.report(mapping.unpack(x), iteration=len(log)),
                             round_index=round_index)
            log.append(report)
            solver_logger.iteration(report.iteration, total=report.total, a1=report.a1,
                                    a2=report.a2, gradient_norm=report.gradient_norm,
                                    round=round_index)
            if callback is not None:
                callback(report)

        def objective(x: np.ndarray, functional=functional, mapping=mapping):
            value, gradient = functional.value_and_gradient(mapping.unpack(x))
            return value, mapping.pack(gradient)

        x = mapping.pack(q0)
        if round_index == 0:
            record(x)
        x, status, message = _descend(objective, x, budget, scenario, record)
        q0 = mapping.unpack(x)
        if status is OptimizationStatus.LINE_SEARCH_FAILED:
            break

    field = SpinorField.from_flat(field0.grid, q0)
    solver_logger.info("Minimization finished", status=status.value,
                       iterations=len(log) - 1, total=log[-1].total, rounds=rounds)
    return OptimizationResult(field, log, status, message)


def collapse_metrics(field: SpinorField, phased: PhasedBasis, threshold: Optional[float] = None,
                     reports: Optional[Sequence[ActionReport]] = None) -> CollapseDiagnostics:
    """
    Populations |C_j(t)|² per slice, the winning mode and when it first dominates.

    A mode wins when it holds more than threshold of the population on the last
    slice; its dominance index is the first slice where it crosses threshold.
    """
    threshold = settings.numerics.dominance_threshold if threshold is None else threshold
    track = project_coefficients(field, phased)
    populations = track.populations
    norms = np.sqrt(np.sum(np.abs(field.values) ** 2, axis=(1, 2)) * field.grid.dx)
    relative = np.where(norms > 0, track.residuals / np.where(norms > 0, norms, 1.0), np.inf)
    reliable = bool(np.max(relative) <= settings.numerics.residual_bound)
    if not reliable:
        solver_logger.warning("Diagnostics unreliable: basis does not span the field",
                              max_relative_residual=float(np.max(relative)))

    winner = dominance_index = dominance_time = None
    final = populations[-1]
    if np.max(final) > threshold:
        winner = int(np.argmax(final))
        dominance_index = int(np.argmax(populations[:, winner] > threshold))
        dominance_time = float(track.times[dominance_index])

    final_a1 = reports[-1].a1 if reports else None
    final_a2 = reports[-1].a2 if reports else None
    return CollapseDiagnostics(track.times, populations, track.totals, track.residuals, threshold,
                               winner, dominance_index, dominance_time, reliable, final_a1, final_a2)


@dataclass
class CalibrationPoint:
    """Outcome of one ε in a calibration scan."""
    epsilon: float
    max_population: float
    winner: Optional[int]
    status: OptimizationStatus

    def to_dict(self):
        return {"epsilon": self.epsilon, "max_population": self.max_population,
                "winner": self.winner, "status": self.status.value}


def calibrate_epsilon(scenario: Scenario, epsilons: Sequence[float],
                      threshold: Optional[float] = None,
                      threads: Optional[int] = None) -> List[CalibrationPoint]:
    """
    Minimize at each ε (ascending) from the same propagated start.

    The scan stops at the first ε whose final slice is dominated by one mode.
    """
    threshold = settings.numerics.dominance_threshold if threshold is None else threshold
    context = prepare_context(scenario)
    field0 = initialize_field(scenario, context)
    points: List[CalibrationPoint] = []
    for epsilon in sorted(epsilons):
        trial = replace(scenario, epsilon=float(epsilon))
        result = minimize_action(field0, trial, context, threads=threads)
        diagnostics = collapse_metrics(result.field, context.phased, threshold)
        points.append(CalibrationPoint(float(epsilon), diagnostics.final_max_population,
                                       diagnostics.winner, result.status))
        solver_logger.progress("Calibration point", epsilon=epsilon,
                               max_population=diagnostics.final_max_population)
        if diagnostics.winner is not None:
            break
    return points
