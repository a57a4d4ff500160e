"""
Born Ensemble Use Case
Zitterbewegung coupling of mode populations, its direct and stationary-phase
integrals, and outcome statistics over the hidden start time t_i.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh
from scipy.stats import linregress, norm

from ..entities.dirac import MassParameter
from ..entities.ensemble import EnsembleConfig, EnsembleResult, IntegrationMethod, ModalSystem
from ..entities.errors import SolverError
from ..entities.grid import SpacetimeGrid
from .dirac_core import free_slice_hamiltonian
from infrastructure.config.settings import settings
from shared.utils.logger import get_logger

born_logger = get_logger("born_ensemble")

# ħ/(m_e c²) in seconds
ELECTRON_TIME_UNIT = 1.2880886677e-21


def _coupling(system: ModalSystem) -> np.ndarray:
    """G_jk restricted to opposite-sign pairs whose k is driven."""
    mask = system.opposite_sign_mask() & system.driven[None, :]
    return np.where(mask, system.gamma0, 0.0)


def coefficient_rates(t: float, system: ModalSystem, t_i: float) -> np.ndarray:
    """
    dC_j/dt at lab time t to first order in the drive.

    Driven modes follow d_k·g(t − t_i); every other mode answers through the
    zitterbewegung coupling to the driven modes of opposite energy sign.
    """
    tau = t - t_i
    drive = system.drive_weights * system.drive.value(tau)
    phases = np.exp(1j * system.phase_integrals(t, t_i))
    constrained = -system.signs * np.sum(_coupling(system) * drive[None, :] * phases, axis=1)
    return np.where(system.driven, drive, constrained)


def zb_rhs(t: float, system: ModalSystem, t_i: float,
           coefficients: Optional[np.ndarray] = None) -> np.ndarray:
    """
    −sgn(E_j)·2Re Σ_k C_j*(∂C_k/∂t)⟨χ_j|γ⁰|χ_k⟩e^{iw_jk(t)} over opposite-sign k.

    Args:
        t: Lab time
        system: Modal system
        t_i: Hidden start time
        coefficients: Current C_j; the initial coefficients when omitted

    Returns:
        d|C_j|²/dt per mode
    """
    c = system.initial if coefficients is None else np.asarray(coefficients, dtype=complex)
    tau = t - t_i
    drive = system.drive_weights * system.drive.value(tau)
    phases = np.exp(1j * system.phase_integrals(t, t_i))
    terms = _coupling(system) * drive[None, :] * phases
    return -system.signs * 2.0 * np.real(np.conj(c) * np.sum(terms, axis=1))


def _max_step(system: ModalSystem) -> float:
    gaps = np.abs(system.gaps()[system.opposite_sign_mask()])
    fastest = max(float(np.max(gaps)) if gaps.size else 0.0, 2.0 * system.mass)
    return 2.0 * np.pi / fastest / settings.ensemble.steps_per_period


def integrate_direct(system: ModalSystem, t_i: float, duration: float,
                     max_step: Optional[float] = None) -> np.ndarray:
    """
    |C_j|² at t_i + duration by adaptive high-order quadrature of zb_rhs.

    The coefficients and the populations are integrated together so zb_rhs sees
    the current C_j; driven populations are |C_k(0) + d_k·G|² exactly.
    """
    if duration < 0:
        raise SolverError("duration must be non-negative")
    n = system.n_modes
    if duration == 0 or not np.any(system.driven):
        return system.initial_weights.copy()
    max_step = _max_step(system) if max_step is None else max_step

    def rhs(t, state):
        c = state[:n] + 1j * state[n:2 * n]
        rates = coefficient_rates(t, system, t_i)
        return np.concatenate([rates.real, rates.imag, zb_rhs(t, system, t_i, c)])

    start = np.concatenate([system.initial.real, system.initial.imag, system.initial_weights])
    solution = solve_ivp(rhs, (t_i, t_i + duration), start, method="DOP853",
                         rtol=settings.ensemble.rtol, atol=settings.ensemble.atol,
                         max_step=max_step)
    if not solution.success:
        raise SolverError(f"direct integration failed: {solution.message}")
    populations = solution.y[2 * n:, -1].copy()
    driven = system.driven
    final_driven = system.initial + system.drive_weights * system.drive.integral(duration)
    populations[driven] = np.abs(final_driven[driven]) ** 2
    return populations


def _boundary_term(system: ModalSystem, t: float, t_i: float,
                   floor: float) -> Tuple[np.ndarray, np.ndarray]:
    """C_j*d_k g G_jk e^{iw_jk}/(iΔE_jk) summed over k, with excluded small-gap pairs."""
    tau = t - t_i
    gaps = system.gaps() + system.gap_slopes() * tau
    coupling = _coupling(system)
    excluded = (coupling != 0) & (np.abs(gaps) < floor)
    safe = np.where(excluded | (coupling == 0), 1.0, gaps)
    terms = (coupling * (system.drive_weights * system.drive.value(tau))[None, :]
             * np.exp(1j * system.phase_integrals(t, t_i)) / (1j * safe))
    terms = np.where(excluded, 0.0, terms)
    return np.conj(system.initial) * np.sum(terms, axis=1), excluded


def integrate_stationary(system: ModalSystem, t_i: float, duration: float) -> np.ndarray:
    """
    Y_j plus the two boundary terms of one integration by parts.

    Valid while the drive varies slowly against the beat frequencies; pairs
    with |ΔE| below the configured floor are dropped and reported.
    """
    floor = settings.ensemble.energy_gap_floor
    late, excluded_late = _boundary_term(system, t_i + duration, t_i, floor)
    early, excluded_early = _boundary_term(system, t_i, t_i, floor)
    excluded = excluded_late | excluded_early
    if np.any(excluded):
        born_logger.warning("Near-degenerate pairs excluded", pairs=np.argwhere(excluded).tolist())
    populations = system.initial_weights - system.signs * 2.0 * np.real(late - early)
    driven = system.driven
    final_driven = system.initial + system.drive_weights * system.drive.integral(duration)
    populations[driven] = np.abs(final_driven[driven]) ** 2
    return populations


def born_limit(system: ModalSystem, t_i: float) -> np.ndarray:
    """Long-duration form of integrate_stationary: only the t_i boundary term survives."""
    early, _ = _boundary_term(system, t_i, t_i, settings.ensemble.energy_gap_floor)
    return system.initial_weights + system.signs * 2.0 * np.real(early)


def phase_average(system: ModalSystem, t_i: np.ndarray, j: int, k: int) -> complex:
    """Mean of exp[i w_jk(t_i)] over a set of start times."""
    return complex(np.mean([np.exp(1j * system.phase_integrals(t, t)[j, k]) for t in t_i]))


@dataclass
class SampleOutcome:
    """One t_i of the ensemble."""
    t_i: float
    seeded: np.ndarray
    final: np.ndarray
    winner: Optional[str]
    tie: bool


def decay_to_single_group(weights: np.ndarray, strength: float) -> np.ndarray:
    """
    Completion of the decay: shares y follow dy/ds = y·(y − Σy²) for s up to strength.

    The flow keeps Σy and the order of the shares, and every vertex of the
    simplex is a fixed point, so the largest share absorbs the population.
    """
    weights = np.asarray(weights, dtype=float)
    total = float(np.sum(weights))
    if total <= 0.0 or weights.size < 2:
        return weights.copy()
    shares = np.clip(weights / total, 0.0, None)

    def rhs(_, y):
        return y * (y - np.dot(y, y))

    solution = solve_ivp(rhs, (0.0, strength), shares, method="DOP853",
                         rtol=settings.ensemble.rtol, atol=settings.ensemble.atol)
    if not solution.success:
        raise SolverError(f"decay flow failed: {solution.message}")
    return total * solution.y[:, -1]


def sample_outcome(system: ModalSystem, t_i: float, config: EnsembleConfig) -> SampleOutcome:
    """
    Seed populations at t_i through the zitterbewegung coupling, then let A₂ finish the decay.

    The winner is the outcome group holding the largest final population; the
    decay flow preserves order, so it is the group favoured by the seeded
    populations.
    """
    if config.method is IntegrationMethod.DIRECT:
        seeded = integrate_direct(system, t_i, config.duration)
    else:
        seeded = integrate_stationary(system, t_i, config.duration)
    labels = list(system.outcome_groups)
    members = [list(system.outcome_groups[label]) for label in labels]

    group_seeded = np.array([np.sum(seeded[group]) for group in members])
    group_final = decay_to_single_group(group_seeded, config.decay_strength)
    final = seeded.copy()
    for group, before, after in zip(members, group_seeded, group_final):
        final[group] = seeded[group] * (after / before) if before > 0.0 else 0.0

    order = np.argsort(-group_final, kind="stable")
    tie = (len(order) > 1 and
           group_seeded[order[0]] - group_seeded[order[1]] <= settings.ensemble.tie_tolerance)
    winner = None if tie else labels[order[0]]
    return SampleOutcome(float(t_i), seeded, final, winner, bool(tie))


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    z = norm.ppf(0.5 + confidence / 2.0)
    p = successes / trials
    denominator = 1.0 + z ** 2 / trials
    center = (p + z ** 2 / (2 * trials)) / denominator
    radius = z * np.sqrt(p * (1 - p) / trials + z ** 2 / (4 * trials ** 2)) / denominator
    return float(max(center - radius, 0.0)), float(min(center + radius, 1.0))


def draw_start_times(system: ModalSystem, config: EnsembleConfig) -> np.ndarray:
    """Uniform t_i over window_periods zitterbewegung periods π/m."""
    rng = np.random.default_rng(config.seed)
    window = config.window_periods * MassParameter(system.mass).zitterbewegung_period
    return rng.uniform(0.0, window, size=config.n_samples)


def run_ensemble(system: ModalSystem, config: EnsembleConfig,
                 threads: Optional[int] = None) -> EnsembleResult:
    """
    Outcome frequencies over uniformly drawn t_i.

    Alongside the argmax frequencies the result carries the t_i-average of the
    seeded group populations, the quantity the zero-mean zitterbewegung phases
    tie to the initial weights.

    Args:
        system: Modal system with outcome groups
        config: Sample count, duration, window, seed and seeding method
        threads: Worker threads; results keep the order of the draws

    Returns:
        EnsembleResult with Wilson intervals and tie counts
    """
    threads = settings.threads if threads is None else threads
    start_times = draw_start_times(system, config)
    born_logger.progress("Running ensemble", samples=config.n_samples, threads=threads,
                         method=config.method.value)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        outcomes: List[SampleOutcome] = list(
            pool.map(lambda t: sample_outcome(system, t, config), start_times))

    labels = list(system.outcome_groups)
    winners = [o.winner for o in outcomes]
    ties = np.array([o.tie for o in outcomes])
    counted = int(np.sum(~ties))
    if ties.any():
        born_logger.warning("Tied samples excluded", ties=int(ties.sum()))
    counts = {label: sum(1 for w in winners if w == label) for label in labels}
    frequencies = {label: (counts[label] / counted if counted else 0.0) for label in labels}
    confidence = {label: wilson_interval(counts[label], counted) for label in labels}
    seeded = np.array([o.seeded for o in outcomes])
    mean_populations = {label: float(np.mean(np.sum(seeded[:, list(system.outcome_groups[label])], axis=1)))
                        for label in labels}
    result = EnsembleResult(start_times, winners, np.array([o.final for o in outcomes]),
                            seeded, ties, frequencies, system.group_weights(), confidence,
                            config.seed, mean_populations)
    born_logger.success("Ensemble finished", frequencies=frequencies,
                        initial_weights=result.initial_weights,
                        mean_populations=mean_populations)
    if result.max_frequency_deviation > 3.0 * np.sqrt(0.25 / max(counted, 1)):
        born_logger.warning("Frequencies depart from the initial weights",
                            max_deviation=result.max_frequency_deviation)
    return result


def zitterbewegung_amplitude(grid: SpacetimeGrid, mass: MassParameter, width: float,
                             center: Optional[float] = None) -> float:
    """Norm of the negative-energy part of a Gaussian packet with spinor (1, 0, 0, 0)."""
    x = grid.positions
    center = x[len(x) // 2] if center is None else center
    packet = np.zeros((grid.n_x, 4), dtype=complex)
    packet[:, 0] = np.exp(-0.25 * ((x - center) / width) ** 2)
    vector = packet.reshape(-1)
    vector /= np.linalg.norm(vector)
    energies, modes = eigh(free_slice_hamiltonian(grid, mass).toarray())
    negative = modes[:, energies < 0]
    return float(np.linalg.norm(negative.conj().T @ vector))


def zitterbewegung_scaling(grid: SpacetimeGrid, mass: MassParameter,
                           widths: Sequence[float]) -> Dict[str, float]:
    """Fit the negative-energy amplitude against 1/(mΔx)."""
    inverse = np.array([1.0 / (mass.m * w) for w in widths])
    amplitudes = np.array([zitterbewegung_amplitude(grid, mass, w) for w in widths])
    fit = linregress(inverse, amplitudes)
    return {"slope": float(fit.slope), "intercept": float(fit.intercept),
            "r_squared": float(fit.rvalue ** 2)}


def zitterbewegung_period_seconds(mass_ratio: float = 1.0) -> float:
    """π/m in seconds for a particle of mass_ratio electron masses."""
    return MassParameter(1.0).zitterbewegung_period * ELECTRON_TIME_UNIT / mass_ratio


def dominant_frequency(times: np.ndarray, signal: np.ndarray) -> Tuple[float, float]:
    """
    Angular frequency of the largest non-constant FFT component.

    Args:
        times: Uniformly spaced sample times
        signal: Real samples

    Returns:
        (peak angular frequency, bin width 2π/T)
    """
    times = np.asarray(times, dtype=float)
    if times.size < 4:
        raise SolverError("frequency estimate needs at least 4 samples")
    step = float(times[1] - times[0])
    centered = np.asarray(signal, dtype=float) - np.mean(signal)
    spectrum = np.abs(np.fft.rfft(centered))
    frequencies = 2.0 * np.pi * np.fft.rfftfreq(times.size, step)
    peak = int(np.argmax(spectrum[1:])) + 1
    return float(frequencies[peak]), float(frequencies[1])
