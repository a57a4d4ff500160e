"""
Verification Suite Repository
Named numerical self-checks run by the check command.
"""

from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from core.entities.action import ActionConfig
from core.entities.dirac import MassParameter, Potential, PotentialSchedule, PotentialTerm, TemporalShape
from core.entities.ensemble import DriveEnvelope, EnvelopeShape, ModalSystem
from core.entities.errors import ConfigError
from core.entities.grid import SpacetimeGrid, SpinorField
from core.interfaces.check_suite import CheckResult, CheckSuiteRepositoryInterface, SuiteInfo
from core.use_cases.born_ensemble import (dominant_frequency, integrate_direct, integrate_stationary,
                                          zb_rhs, zitterbewegung_period_seconds,
                                          zitterbewegung_scaling)
from core.use_cases.eigenbasis import (build_mode_basis, build_phased_basis, compose_field,
                                       project_coefficients)
from core.use_cases.expectations import (four_point_volume, separations_from_positions,
                                         weight_W_trivial)
from core.use_cases.functionals import ActionFunctional, a1, a1_modal, gradient_check
from adapters.kernels.factory import KernelFactory
from infrastructure.config.settings import settings
from shared.utils.logger import get_logger

check_logger = get_logger("checks")

SuiteRunner = Callable[[np.random.Generator], List[CheckResult]]

ELECTRON_PERIOD_ESTIMATE = 4.05e-21


def _result(name: str, value: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(name, float(value), float(tolerance), bool(value < tolerance), detail)


def kernel_normalization(rng: np.random.Generator) -> List[CheckResult]:
    """|∫dz⁰ f − 1| for every normalized kernel at 10 random separations."""
    rows = []
    for r in np.sort(rng.uniform(0.2, 5.0, size=10)):
        for variant, residual in KernelFactory.normalization_residuals(float(r)).items():
            rows.append(_result(f"{variant.value}@r={r:.4f}", residual, 1e-6))
    return rows


def four_point_normalization(rng: np.random.Generator) -> List[CheckResult]:
    """Quadrature W against the exact polytope volume at 5 random configurations."""
    rows = []
    for n in range(5):
        positions = np.sort(rng.uniform(0.0, 10.0, size=4))
        separations = separations_from_positions(positions)
        weight = weight_W_trivial(separations)
        volume = four_point_volume(separations)
        rows.append(_result(f"configuration-{n}", abs(weight / volume - 1.0), 1e-3,
                            f"W={weight!r} V={volume!r}"))
    return rows


def gradient_agreement(rng: np.random.Generator) -> List[CheckResult]:
    """Analytic action gradient against central differences on an 8×8 grid with ε = 0.5."""
    grid = SpacetimeGrid(n_t=8, n_x=8, dt=0.5, dx=0.5)
    # bounded away from zero density so the local momentum stays smooth
    values = 1.0 + 0.3 * (rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape))
    psi = SpinorField(grid, values)
    config = ActionConfig(epsilon=0.5, quadruple_samples=400, seed=0)
    functional = ActionFunctional.for_field(psi, Potential.zeros(grid), MassParameter(1.0), config)
    error = gradient_check(functional, psi.flat(), n_coordinates=20, seed=int(rng.integers(1 << 31)))
    return [_result("max-relative-error", error, 1e-5, "20 coordinates, frozen quadruples")]


def modal_identity(rng: np.random.Generator) -> List[CheckResult]:
    """A₁ against its modal form for three slowly mixed positive-energy modes."""
    grid = SpacetimeGrid(n_t=81, n_x=16, dt=0.05, dx=0.5)
    mass = MassParameter(1.0)
    schedule = PotentialSchedule((PotentialTerm(component=0, amplitude=0.01,
                                                temporal=TemporalShape.RAMP),))
    potential = schedule.sample(grid)
    phased = build_phased_basis(build_mode_basis(potential, mass), 0.0)
    energies = phased.basis.energies[0]
    positive = np.flatnonzero(energies > 0)
    chosen = positive[np.argsort(energies[positive], kind="stable")[:3]]

    omega = 0.2 * (1.0 + 0.1 * rng.random())
    t = grid.times
    coefficients = np.zeros((grid.n_t, phased.retained_count), dtype=complex)
    coefficients[:, chosen[0]] = np.cos(omega * t) / np.sqrt(2.0)
    coefficients[:, chosen[1]] = np.sin(omega * t) / np.sqrt(2.0)
    coefficients[:, chosen[2]] = 1.0 / np.sqrt(2.0)
    psi = compose_field(coefficients, phased, grid)

    direct = a1(psi, potential, mass)
    modal = a1_modal(project_coefficients(psi, phased), mass)
    return [_result("relative-difference", abs(direct - modal) / modal, 0.05,
                    f"a1={direct!r} a1_modal={modal!r}")]


def _two_mode_system(drive: DriveEnvelope) -> ModalSystem:
    return ModalSystem(energies=[1.0, -1.0], gamma0=[[1.0, 0.1], [0.1, -1.0]],
                       initial=[np.sqrt(0.7), np.sqrt(0.3)], drive_weights=[0.0, 1.0],
                       drive=drive)


def stationary_against_direct(rng: np.random.Generator, threads: int = 1) -> List[CheckResult]:
    """Integration-by-parts populations against direct quadrature at 10 random t_i."""
    drive = DriveEnvelope(EnvelopeShape.GAUSSIAN, amplitude=0.02, center=10.0, width=3.0)
    system = _two_mode_system(drive)
    bound = 10.0 * drive.rate / (2.0 * system.mass)
    start_times = np.sort(rng.uniform(0.0, 100.0 * np.pi, size=10))

    def gap(t_i: float) -> float:
        direct = integrate_direct(system, t_i, 20.0)
        stationary = integrate_stationary(system, t_i, 20.0)
        return float(np.max(np.abs(direct - stationary)))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        gaps = list(pool.map(gap, start_times.tolist()))
    return [_result(f"t_i={t_i:.4f}", value, bound) for t_i, value in zip(start_times, gaps)]


def zitterbewegung(rng: np.random.Generator) -> List[CheckResult]:
    """Beat frequency of the population rate, its period in seconds and the 1/(mΔx) scaling."""
    system = _two_mode_system(DriveEnvelope(EnvelopeShape.CONSTANT, amplitude=0.01))
    duration = 100.0 * np.pi
    times = np.linspace(0.0, duration, 2000, endpoint=False)
    t_i = float(rng.uniform(0.0, np.pi))
    signal = [zb_rhs(t, system, t_i)[0] for t in times]
    omega, width = dominant_frequency(times, signal)
    expected = abs(system.energies[0] - system.energies[1])

    period = zitterbewegung_period_seconds()
    grid = SpacetimeGrid(n_t=1, n_x=192, dt=0.25, dx=0.25)
    fit = zitterbewegung_scaling(grid, MassParameter(1.0), (1.5, 2.0, 3.0, 4.0, 6.0))
    return [
        CheckResult("beat-frequency", abs(omega - expected), width,
                    abs(omega - expected) <= width, f"peak={omega!r} expected={expected!r}"),
        _result("period-seconds", abs(period / ELECTRON_PERIOD_ESTIMATE - 1.0), 0.01,
                f"period={period!r}s"),
        CheckResult("scaling-r-squared", fit["r_squared"], 0.99, fit["r_squared"] > 0.99,
                    f"slope={fit['slope']!r}")
    ]


class VerificationSuiteRepository(CheckSuiteRepositoryInterface):
    """Registry of verification suites keyed by name."""

    def __init__(self, seed: int = 0, threads: Optional[int] = None):
        self.seed = seed
        self.threads = settings.threads if threads is None else threads
        self._suites: Dict[str, Tuple[str, SuiteRunner]] = {}
        self._initialize_suites()

    def _initialize_suites(self):
        self._suites["kernels"] = ("two-point kernel normalization", kernel_normalization)
        self._suites["four-point"] = ("four-point weight against polytope volume",
                                      four_point_normalization)
        self._suites["gradcheck"] = ("analytic against finite-difference action gradient",
                                     gradient_agreement)
        self._suites["a1-modal"] = ("A1 against its modal form", modal_identity)
        self._suites["stationary-vs-direct"] = ("stationary-phase against direct quadrature",
                                                partial(stationary_against_direct,
                                                        threads=self.threads))
        self._suites["zitterbewegung"] = ("beat frequency, period and amplitude scaling",
                                          zitterbewegung)
        check_logger.debug("Suites registered", suites=list(self._suites))

    def get_available_suites(self) -> List[SuiteInfo]:
        return [SuiteInfo(name, description) for name, (description, _) in self._suites.items()]

    def run_suite(self, suite_name: str) -> List[CheckResult]:
        if not self.is_suite_available(suite_name):
            raise ConfigError(f"unknown suite '{suite_name}'. "
                              f"Available suites: {', '.join(self._suites)}", field="suite")
        _, runner = self._suites[suite_name]
        check_logger.progress("Running suite", suite=suite_name, seed=self.seed)
        results = runner(np.random.default_rng(self.seed))
        for row in results:
            check_logger.check_result(suite_name, row.name, row.passed, value=row.value,
                                      tolerance=row.tolerance)
        return results

    def is_suite_available(self, suite_name: str) -> bool:
        return suite_name in self._suites

    def get_suite_info(self, suite_name: str) -> Optional[SuiteInfo]:
        if not self.is_suite_available(suite_name):
            return None
        return SuiteInfo(suite_name, self._suites[suite_name][0])
