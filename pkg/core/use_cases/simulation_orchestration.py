"""
Simulation Orchestration Use Case
Runs the simulate, born, check and calibrate-epsilon pipelines and persists their outputs.
"""

import time
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, MutableMapping, Optional, Sequence

import numpy as np

from ..entities.ensemble import EnsembleConfig, EnsembleResult, ModalSystem
from ..entities.errors import EstimatorError, SimulationError
from ..entities.execution import RunExecution, RunManifest
from ..entities.scenario import (CollapseDiagnostics, OptimizationResult, OptimizationStatus,
                                 Scenario)
from ..interfaces.check_suite import CheckSuiteRepositoryInterface
from ..interfaces.kernel_provider import KernelInterface
from ..interfaces.result_repository import ResultRepositoryInterface
from .born_ensemble import run_ensemble
from .collapse_solver import (ScenarioContext, calibrate_epsilon, collapse_metrics,
                              initialize_field, minimize_action, prepare_context)
from .dirac_core import discretization_metadata
from .expectations import delta_p2, delta_x2
from infrastructure.config.settings import settings
from shared.utils.logger import get_logger

orchestration_logger = get_logger("orchestration")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def diagnostics_rows(diagnostics: CollapseDiagnostics) -> List[List[Any]]:
    """One row per slice: index, time, Σ|C|², residual, then |C_j|² per mode."""
    rows = []
    for k, time_k in enumerate(diagnostics.times):
        rows.append([k, float(time_k), float(diagnostics.totals[k]), float(diagnostics.residuals[k]),
                     *[float(p) for p in diagnostics.populations[k]]])
    return rows


def ensemble_rows(result: EnsembleResult) -> List[List[Any]]:
    """One row per t_i: index, t_i, winner, tie flag, seeded then final populations."""
    rows = []
    for s, t_i in enumerate(result.t_i):
        rows.append([s, float(t_i), result.winners[s] or "", bool(result.ties[s]),
                     *[float(p) for p in result.seeded[s]], *[float(p) for p in result.populations[s]]])
    return rows


class SimulationOrchestrationUseCase:
    """
    Runs one command end to end.

    Each run writes a manifest first, the command's data files next, and a
    summary last; failures come back as an unsuccessful RunExecution.
    """

    def __init__(
        self,
        repository: ResultRepositoryInterface,
        kernel: KernelInterface,
        check_repository: Optional[CheckSuiteRepositoryInterface] = None,
        weight_table: Optional[MutableMapping[str, float]] = None,
        threads: Optional[int] = None
    ):
        self.repository = repository
        self.kernel = kernel
        self.check_repository = check_repository
        self.weight_table = weight_table
        self.threads = threads

    def _manifest(self, command: str, config_hash: str, seed: int, grid=None,
                  epsilon: Optional[float] = None) -> RunManifest:
        manifest = RunManifest(
            command=command,
            scenario_hash=config_hash,
            seed=seed,
            code_version=settings.version,
            discretization=discretization_metadata(grid) if grid is not None else {},
            kernel=self.kernel.get_variant().value,
            epsilon=epsilon,
            started_at=_timestamp()
        )
        self.repository.write_manifest(manifest)
        return manifest

    def _execute(self, command: str, manifest: RunManifest,
                 body: Callable[[], Dict[str, Any]]) -> RunExecution:
        start_time = time.time()
        try:
            summary = body()
            manifest.finished_at = _timestamp()
            self.repository.write_manifest(manifest)
            self.repository.write_summary("summary", summary)
            execution = RunExecution(
                command=command,
                success=True,
                execution_time=time.time() - start_time,
                outputs=[str(p) for p in self.repository.list_outputs()],
                summary=summary
            )
            orchestration_logger.success("Run finished", command=command,
                                         seconds=round(execution.execution_time, 3))
            return execution
        except SimulationError as e:
            error_msg = f"{command} failed: {e}"
            orchestration_logger.error(error_msg)
            return RunExecution(
                command=command,
                success=False,
                execution_time=time.time() - start_time,
                outputs=[str(p) for p in self.repository.list_outputs()],
                error_message=error_msg
            )

    def run_simulation(self, scenario: Scenario, config_hash: str) -> RunExecution:
        """
        Propagate, minimize and diagnose one scenario.

        Args:
            scenario: Parsed scenario
            config_hash: Hash of the normalized scenario text

        Returns:
            RunExecution whose summary holds the collapse verdict; a minimization
            that ends in a failed line search is unsuccessful
        """
        manifest = self._manifest("simulate", config_hash, scenario.seed, scenario.grid,
                                  scenario.epsilon)

        def body() -> Dict[str, Any]:
            context = prepare_context(scenario)
            field0 = initialize_field(scenario, context)
            result = minimize_action(field0, scenario, context, table=self.weight_table,
                                     threads=self.threads)
            diagnostics = collapse_metrics(result.field, context.phased, reports=result.log)
            self._write_simulation(context, result, diagnostics)
            return self._simulation_summary(scenario, context, result, diagnostics)

        execution = self._execute("simulate", manifest, body)
        failed = OptimizationStatus.LINE_SEARCH_FAILED.value
        if execution.success and execution.summary["status"] == failed:
            execution.success = False
            execution.error_message = f"simulate failed: {execution.summary['message']}"
        return execution

    def _write_simulation(self, context: ScenarioContext, result: OptimizationResult,
                          diagnostics: CollapseDiagnostics):
        n_modes = diagnostics.populations.shape[1]
        self.repository.write_field("trajectory", result.field)
        self.repository.write_table(
            "diagnostics",
            ["slice", "time", "total", "residual", *[f"population_{j}" for j in range(n_modes)]],
            diagnostics_rows(diagnostics))
        self.repository.write_json_lines("iterations", (r.to_dict() for r in result.log))
        rows = context.phased.basis.to_rows()
        self.repository.write_table("modes", ["slice", "tau", "mode", "energy", "overlap", "flagged"],
                                    ([r["slice"], r["tau"], r["mode"], r["energy"], r["overlap"],
                                      r["flagged"]] for r in rows))

    def _simulation_summary(self, scenario: Scenario, context: ScenarioContext,
                            result: OptimizationResult,
                            diagnostics: CollapseDiagnostics) -> Dict[str, Any]:
        try:
            spread_x = delta_x2(result.field, self.kernel, seed=scenario.seed).to_dict()
            spread_p = delta_p2(result.field, self.kernel, context.potential,
                                seed=scenario.seed).to_dict()
        except EstimatorError as e:
            orchestration_logger.warning("Uncertainties unavailable", reason=str(e))
            spread_x = spread_p = None
        return {
            "scenario": scenario.name,
            "status": result.status.value,
            "message": result.message,
            "iterations": result.n_iterations,
            "final_action": result.final_report.to_dict(),
            "collapse": diagnostics.to_dict(),
            "initial_weights": [float(p) for p in diagnostics.populations[0]],
            "delta_x2": spread_x,
            "delta_p2": spread_p
        }

    def run_born(self, system: ModalSystem, config: EnsembleConfig, config_hash: str,
                 threads: Optional[int] = None) -> RunExecution:
        """Run the t_i ensemble and write ensemble.csv plus F_j against Y_j."""
        manifest = self._manifest("born", config_hash, config.seed)

        def body() -> Dict[str, Any]:
            result = run_ensemble(system, config, self.threads if threads is None else threads)
            n = system.n_modes
            self.repository.write_table(
                "ensemble",
                ["sample", "t_i", "winner", "tie", *[f"seeded_{j}" for j in range(n)],
                 *[f"final_{j}" for j in range(n)]],
                ensemble_rows(result))
            return dict(result.to_dict(), method=config.method.value, duration=config.duration)

        return self._execute("born", manifest, body)

    def run_check(self, suite_name: str, seed: int = 0) -> RunExecution:
        """Run one verification suite; success means every row passed."""
        if self.check_repository is None:
            raise SimulationError("no check suite repository configured")
        manifest = self._manifest(f"check:{suite_name}", suite_name, seed)

        def body() -> Dict[str, Any]:
            results = self.check_repository.run_suite(suite_name)
            self.repository.write_table(
                "checks", ["name", "value", "tolerance", "passed", "detail"],
                ([r.name, r.value, r.tolerance, r.passed, r.detail] for r in results))
            return {"suite": suite_name, "passed": all(r.passed for r in results),
                    "results": [vars(r) for r in results]}

        execution = self._execute("check", manifest, body)
        if execution.success and not execution.summary["passed"]:
            execution.success = False
            execution.error_message = f"suite '{suite_name}' has failing checks"
        return execution

    def run_calibration(self, scenario: Scenario, epsilons: Sequence[float],
                        config_hash: str) -> RunExecution:
        """Scan ε upwards until the final slice is dominated by one mode."""
        manifest = self._manifest("calibrate-epsilon", config_hash, scenario.seed, scenario.grid)

        def body() -> Dict[str, Any]:
            points = calibrate_epsilon(scenario, epsilons, threads=self.threads)
            self.repository.write_table(
                "calibration", ["epsilon", "max_population", "winner", "status"],
                ([p.epsilon, p.max_population, "" if p.winner is None else p.winner, p.status.value]
                 for p in points))
            dominant = [p.epsilon for p in points if p.winner is not None]
            return {"scenario": scenario.name, "points": [p.to_dict() for p in points],
                    "smallest_dominating_epsilon": dominant[0] if dominant else None,
                    "scanned": [float(e) for e in np.sort(np.asarray(epsilons, dtype=float))]}

        return self._execute("calibrate-epsilon", manifest, body)
