"""
Simulator command line
Entry point for the simulate, born, check and calibrate-epsilon commands.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from adapters.checks import VerificationSuiteRepository
from adapters.kernels.factory import KernelFactory
from adapters.storage import FileResultRepository, WeightTableCache
from core.entities.action import KernelChoice, KernelVariant
from core.entities.errors import ConfigError, SimulationError
from core.entities.execution import RunExecution
from core.use_cases.simulation_orchestration import SimulationOrchestrationUseCase
from infrastructure.config.scenario_loader import (config_hash, emit_ensemble, emit_scenario,
                                                   load_ensemble, load_scenario)
from infrastructure.config.settings import settings
from shared.utils.logger import get_logger, set_console_level

app_logger = get_logger("app")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

DEFAULT_EPSILONS = "1e-3,3e-3,1e-2,3e-2,1e-1,3e-1,1,3,10"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simulate",
                                     description=f"{settings.app_name} v{settings.version}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Override the configured seed")
    common.add_argument("--threads", type=int, default=None,
                        help="Worker threads for quadruple weights, ensemble draws "
                             "and check suites (default: available cores)")
    common.add_argument("--out-dir", type=Path, default=None, help="Run directory")
    common.add_argument("--kernel", choices=[v.value for v in KernelVariant], default=None,
                        help="Two-point kernel variant")
    common.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Console log level")

    commands = parser.add_subparsers(dest="command", required=True)
    simulate = commands.add_parser("simulate", parents=[common], help="Minimize the action")
    simulate.add_argument("scenario", type=Path)
    born = commands.add_parser("born", parents=[common], help="Run the t_i ensemble")
    born.add_argument("config", type=Path)
    check = commands.add_parser("check", parents=[common], help="Run a verification suite")
    check.add_argument("suite")
    calibrate = commands.add_parser("calibrate-epsilon", parents=[common],
                                    help="Scan epsilon until one mode dominates")
    calibrate.add_argument("scenario", type=Path)
    calibrate.add_argument("--epsilons", default=DEFAULT_EPSILONS,
                           help="Comma-separated epsilon values")
    return parser


def _parse_epsilons(text: str) -> List[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"invalid epsilon list '{text}'", field="epsilons")
    if not values or any(not v >= 0 for v in values):
        raise ConfigError("epsilons must be a non-empty list of non-negative numbers",
                          field="epsilons")
    return values


def create_orchestrator(args: argparse.Namespace, seed: int,
                        kernel_choice: Optional[KernelChoice] = None,
                        weight_table: Optional[WeightTableCache] = None,
                        threads: Optional[int] = None) -> SimulationOrchestrationUseCase:
    """Wire the kernel, run directory, suites and worker threads into one orchestrator."""
    out_dir = args.out_dir if args.out_dir is not None else Path(settings.output_dir) / args.command
    kernel = KernelFactory.create_kernel(kernel_choice if kernel_choice is not None else args.kernel)
    orchestrator = SimulationOrchestrationUseCase(
        repository=FileResultRepository(out_dir),
        kernel=kernel,
        check_repository=VerificationSuiteRepository(seed, threads),
        weight_table=weight_table,
        threads=threads
    )
    app_logger.debug("Orchestrator created", out_dir=str(out_dir), kernel=kernel.get_variant().value)
    return orchestrator


def _report(execution: RunExecution) -> int:
    if execution.success:
        for path in execution.outputs:
            print(path)
        return EXIT_OK
    print(f"error: {execution.error_message}", file=sys.stderr)
    return EXIT_FAILURE


def _print_checks(execution: RunExecution):
    results = execution.summary.get("results", [])
    width = max([len(r["name"]) for r in results] + [4])
    print(f"{'name':<{width}}  {'value':>24}  {'tolerance':>12}  result")
    for r in results:
        verdict = "PASS" if r["passed"] else "FAIL"
        print(f"{r['name']:<{width}}  {r['value']!r:>24}  {r['tolerance']!r:>12}  {verdict}")


def run_command(args: argparse.Namespace) -> int:
    if args.log_level:
        set_console_level(args.log_level)
    threads = args.threads if args.threads is not None else settings.threads
    if threads < 1:
        raise ConfigError("--threads must be positive", field="threads")

    if args.command in ("simulate", "calibrate-epsilon"):
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario = replace(scenario, seed=args.seed)
        if args.kernel is not None:
            scenario = replace(scenario, kernel=KernelChoice(KernelVariant(args.kernel)))
        digest = config_hash(emit_scenario(scenario))
        table = WeightTableCache()
        orchestrator = create_orchestrator(args, scenario.seed, scenario.kernel, table, threads)
        if args.command == "simulate":
            execution = orchestrator.run_simulation(scenario, digest)
        else:
            execution = orchestrator.run_calibration(scenario, _parse_epsilons(args.epsilons), digest)
        table.save()
        return _report(execution)

    if args.command == "born":
        system, config = load_ensemble(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        digest = config_hash(emit_ensemble(system, config))
        orchestrator = create_orchestrator(args, config.seed, threads=threads)
        return _report(orchestrator.run_born(system, config, digest))

    seed = 0 if args.seed is None else args.seed
    orchestrator = create_orchestrator(args, seed, threads=threads)
    suites = orchestrator.check_repository
    if not suites.is_suite_available(args.suite):
        available = ", ".join(s.name for s in suites.get_available_suites())
        raise ConfigError(f"unknown suite '{args.suite}'. Available suites: {available}",
                          field="suite")
    execution = orchestrator.run_check(args.suite, seed)
    if execution.summary:
        _print_checks(execution)
    if not execution.success:
        print(f"error: {execution.error_message}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and map failures to exit codes."""
    args = build_parser().parse_args(argv)
    try:
        return run_command(args)
    except ConfigError as e:
        app_logger.error("Configuration error", reason=str(e))
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as e:
        app_logger.error("Run failed", reason=str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
