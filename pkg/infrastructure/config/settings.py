"""
Centralized Application Settings
Numerical tolerances, sampling budgets and solver limits for the simulator.
"""

import os
from dataclasses import dataclass
from typing import Optional
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == "true"


@dataclass
class NumericsSettings:
    """Tolerances for lattice operators, eigenbasis tracking and diagnostics."""
    orthonormality_tol: float = 1e-10
    completeness_tol: float = 1e-6
    phase_tol: float = 1e-3
    degeneracy_tol: float = 1e-8
    crossing_threshold: float = 0.5
    adiabatic_bound: float = 0.1
    density_floor: float = 1e-8
    smoothness_bound: float = 0.5
    dominance_threshold: float = 0.9
    residual_bound: float = 0.05

    @classmethod
    def from_env(cls) -> 'NumericsSettings':
        """Create settings from environment variables."""
        return cls(
            orthonormality_tol=float(os.getenv("VP_ORTHONORMALITY_TOL", "1e-10")),
            completeness_tol=float(os.getenv("VP_COMPLETENESS_TOL", "1e-6")),
            phase_tol=float(os.getenv("VP_PHASE_TOL", "1e-3")),
            degeneracy_tol=float(os.getenv("VP_DEGENERACY_TOL", "1e-8")),
            crossing_threshold=float(os.getenv("VP_CROSSING_THRESHOLD", "0.5")),
            adiabatic_bound=float(os.getenv("VP_ADIABATIC_BOUND", "0.1")),
            density_floor=float(os.getenv("VP_DENSITY_FLOOR", "1e-8")),
            smoothness_bound=float(os.getenv("VP_SMOOTHNESS_BOUND", "0.5")),
            dominance_threshold=float(os.getenv("VP_DOMINANCE_THRESHOLD", "0.9")),
            residual_bound=float(os.getenv("VP_RESIDUAL_BOUND", "0.05"))
        )


@dataclass
class SamplingSettings:
    """Monte Carlo budgets for two- and four-point expectations."""
    pair_threshold: int = 4_000_000
    pair_samples: int = 200_000
    quadruple_samples: int = 4000
    batches: int = 20
    max_proposals: int = 5_000_000
    weight_cache_path: Optional[str] = "./data/weight_table.json"

    @classmethod
    def from_env(cls) -> 'SamplingSettings':
        """Create settings from environment variables."""
        cache = os.getenv("VP_WEIGHT_CACHE", "./data/weight_table.json")
        return cls(
            pair_threshold=int(float(os.getenv("VP_PAIR_THRESHOLD", "4e6"))),
            pair_samples=int(float(os.getenv("VP_PAIR_SAMPLES", "200000"))),
            quadruple_samples=int(os.getenv("VP_QUADRUPLE_SAMPLES", "4000")),
            batches=int(os.getenv("VP_MC_BATCHES", "20")),
            max_proposals=int(float(os.getenv("VP_MAX_PROPOSALS", "5e6"))),
            weight_cache_path=cache or None
        )


@dataclass
class SolverSettings:
    """Propagation and optimizer limits."""
    max_iterations: int = 200
    gradient_tolerance: float = 1e-9
    function_tolerance: float = 1e-13
    max_norm_drift: float = 0.01
    max_substeps: int = 16
    line_search_retries: int = 3
    history_size: int = 10
    resample_rounds: int = 4

    @classmethod
    def from_env(cls) -> 'SolverSettings':
        """Create settings from environment variables."""
        return cls(
            max_iterations=int(os.getenv("VP_MAX_ITERATIONS", "200")),
            gradient_tolerance=float(os.getenv("VP_GRADIENT_TOL", "1e-9")),
            function_tolerance=float(os.getenv("VP_FUNCTION_TOL", "1e-13")),
            max_norm_drift=float(os.getenv("VP_MAX_NORM_DRIFT", "0.01")),
            max_substeps=int(os.getenv("VP_MAX_SUBSTEPS", "16")),
            line_search_retries=int(os.getenv("VP_LINE_SEARCH_RETRIES", "3")),
            history_size=int(os.getenv("VP_LBFGS_HISTORY", "10")),
            resample_rounds=int(os.getenv("VP_RESAMPLE_ROUNDS", "4"))
        )


@dataclass
class EnsembleSettings:
    """Hidden-variable ensemble defaults."""
    window_periods: float = 100.0
    steps_per_period: int = 20
    decay_strength: float = 40.0
    tie_tolerance: float = 1e-12
    energy_gap_floor: float = 1e-9
    rtol: float = 1e-12
    atol: float = 1e-14

    @classmethod
    def from_env(cls) -> 'EnsembleSettings':
        """Create settings from environment variables."""
        return cls(
            window_periods=float(os.getenv("VP_WINDOW_PERIODS", "100")),
            steps_per_period=int(os.getenv("VP_STEPS_PER_PERIOD", "20")),
            decay_strength=float(os.getenv("VP_DECAY_STRENGTH", "40")),
            tie_tolerance=float(os.getenv("VP_TIE_TOLERANCE", "1e-12")),
            energy_gap_floor=float(os.getenv("VP_ENERGY_GAP_FLOOR", "1e-9")),
            rtol=float(os.getenv("VP_ODE_RTOL", "1e-12")),
            atol=float(os.getenv("VP_ODE_ATOL", "1e-14"))
        )


@dataclass
class LoggingSettings:
    """Logging configuration settings."""
    level: str = "INFO"
    log_dir: str = "./logs"
    enable_console: bool = True
    enable_file: bool = True

    @classmethod
    def from_env(cls) -> 'LoggingSettings':
        """Create settings from environment variables."""
        return cls(
            level=os.getenv("LOG_LEVEL", "INFO"),
            log_dir=os.getenv("LOG_DIR", "./logs"),
            enable_console=_env_bool("LOG_ENABLE_CONSOLE", "true"),
            enable_file=_env_bool("LOG_ENABLE_FILE", "true")
        )


@dataclass
class AppSettings:
    """Main application settings."""
    numerics: NumericsSettings
    sampling: SamplingSettings
    solver: SolverSettings
    ensemble: EnsembleSettings
    logging: LoggingSettings

    app_name: str = "vpcollapse"
    version: str = "0.1.0"
    environment: str = "development"
    debug: bool = False
    threads: int = 1
    output_dir: str = "./results"

    @classmethod
    def from_env(cls) -> 'AppSettings':
        """Create complete settings from environment variables."""
        return cls(
            numerics=NumericsSettings.from_env(),
            sampling=SamplingSettings.from_env(),
            solver=SolverSettings.from_env(),
            ensemble=EnsembleSettings.from_env(),
            logging=LoggingSettings.from_env(),
            app_name=os.getenv("APP_NAME", "vpcollapse"),
            version=os.getenv("APP_VERSION", "0.1.0"),
            environment=os.getenv("ENVIRONMENT", "development"),
            debug=_env_bool("DEBUG", "false"),
            threads=int(os.getenv("VP_THREADS", str(os.cpu_count() or 1))),
            output_dir=os.getenv("VP_OUTPUT_DIR", "./results")
        )

    def validate(self) -> bool:
        """Validate settings."""
        if self.logging.enable_file:
            Path(self.logging.log_dir).mkdir(parents=True, exist_ok=True)

        if self.sampling.batches < 2:
            raise ValueError("VP_MC_BATCHES must be at least 2 for a batch standard error")

        if not 0.0 < self.numerics.dominance_threshold < 1.0:
            raise ValueError("VP_DOMINANCE_THRESHOLD must lie in (0, 1)")

        if self.threads < 1:
            raise ValueError("VP_THREADS must be positive")

        return True


# Global settings instance
settings = AppSettings.from_env()
settings.validate()
