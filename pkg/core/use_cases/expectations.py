"""
Expectations Use Case
One-, two- and four-point spacetime expectations with spacelike kernels,
the position and momentum uncertainties and the collapse functional A₂.
"""

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, MutableMapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.spatial import ConvexHull, HalfspaceIntersection

from ..entities.action import Estimate, EstimateMethod
from ..entities.dirac import Potential
from ..entities.errors import EstimatorError, GridError, ZeroNormError
from ..entities.grid import SpacetimeGrid, SpinorField
from ..interfaces.kernel_provider import KernelInterface
from .dirac_core import momentum_matrices
from infrastructure.config.settings import settings
from shared.utils.logger import get_logger

expect_logger = get_logger("expectations")

PointOperator = Union[np.ndarray, Callable[[SpinorField], np.ndarray]]

# pair order used for spatial separations of four points
PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def minkowski(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """u^μ v_μ over the last axis, signature (+,−,−,−)."""
    return u[..., 0] * v[..., 0] - np.sum(u[..., 1:] * v[..., 1:], axis=-1)


def ratio_estimate(weights: np.ndarray, observables: np.ndarray, batches: int,
                   method: EstimateMethod, excluded_fraction: float = 0.0) -> Estimate:
    """Σwo/Σw with a batch-means standard error; aborts on a vanishing denominator."""
    denominator = float(np.sum(weights))
    numerator = float(np.sum(weights * observables))
    n = weights.shape[0]
    if denominator == 0.0:
        raise EstimatorError("denominator vanished: no weighted support")
    if method is EstimateMethod.EXACT or n < 2:
        return Estimate(numerator / denominator, 0.0, n, method, excluded_fraction)

    n_batches = max(2, min(batches, n))
    starts = np.linspace(0, n, n_batches + 1).astype(int)[:-1]
    num_b = np.add.reduceat(weights * observables, starts)
    den_b = np.add.reduceat(weights, starts)
    den_err = den_b.std(ddof=1) / np.sqrt(n_batches)
    if den_b.mean() <= 2.0 * den_err:
        raise EstimatorError(f"denominator {den_b.mean():.3e} is consistent with zero "
                             f"(batch error {den_err:.3e})")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = num_b / den_b
    ratios = ratios[np.isfinite(ratios)]
    stderr = float(ratios.std(ddof=1) / np.sqrt(ratios.size)) if ratios.size > 1 else 0.0
    return Estimate(numerator / denominator, stderr, n, method, excluded_fraction)


# One-point expectations

def expect_1(operator: PointOperator, psi: SpinorField) -> complex:
    """Σψ†Oψ dV / Σψ†ψ dV."""
    denominator = np.vdot(psi.values, psi.values).real
    if denominator == 0.0:
        raise ZeroNormError("expectation of a zero field")
    if callable(operator):
        transformed = np.asarray(operator(psi))
    else:
        transformed = psi.values @ np.asarray(operator).T
    if transformed.shape != psi.values.shape:
        raise GridError(f"operator output shape {transformed.shape} does not match the field")
    return complex(np.vdot(psi.values, transformed) / denominator)


# Kernels

def kernel_f2(z: np.ndarray, kernel: KernelInterface) -> np.ndarray:
    """f(z) for four-vectors z of shape (..., 4)."""
    z = np.asarray(z, dtype=float)
    return kernel.evaluate(z[..., 0], np.linalg.norm(z[..., 1:], axis=-1))


# Local momentum

@dataclass
class LocalMomentum:
    """Gauge-covariant momentum density p^μ(x) per site."""
    momentum: np.ndarray          # (n_t, n_x, 4)
    density: np.ndarray           # (n_t, n_x)
    included: np.ndarray          # bool (n_t, n_x)

    @property
    def excluded_fraction(self) -> float:
        return float(1.0 - np.mean(self.included))


def potential_offsets(grid: SpacetimeGrid, potential: Optional[Potential]) -> np.ndarray:
    """eA^μ per site, shape (n_sites, 4)."""
    if potential is None:
        return np.zeros((grid.n_sites, 4))
    return (potential.charge * potential.components.reshape(4, grid.n_sites)).T


def local_momentum(psi: SpinorField, potential: Optional[Potential] = None,
                   density_floor: Optional[float] = None) -> LocalMomentum:
    """
    p^μ(x) = Re[ψ†(iD^μ)ψ]/ψ†ψ with iD^μ = i∂^μ − eA^μ.

    Sites whose density falls below density_floor·max(ψ†ψ) are excluded; their
    momentum is set to zero.
    """
    density_floor = settings.numerics.density_floor if density_floor is None else density_floor
    grid = psi.grid
    energy_op, momentum_op = momentum_matrices(grid)
    q = psi.flat()
    values = q.reshape(grid.n_sites, 4)
    rho = np.sum(np.abs(values) ** 2, axis=1)
    if rho.max() == 0.0:
        raise ZeroNormError("local momentum of a zero field")
    currents = np.stack([
        np.real(np.sum(values.conj() * (energy_op @ q).reshape(grid.n_sites, 4), axis=1)),
        np.real(np.sum(values.conj() * (momentum_op @ q).reshape(grid.n_sites, 4), axis=1)),
    ], axis=1)
    included = rho > density_floor * rho.max()
    momentum = -potential_offsets(grid, potential)
    safe = np.where(included, rho, 1.0)
    momentum[:, :2] += currents / safe[:, None]
    momentum[~included] = 0.0
    return LocalMomentum(momentum.reshape(grid.n_t, grid.n_x, 4),
                         rho.reshape(grid.n_t, grid.n_x),
                         included.reshape(grid.n_t, grid.n_x))


# Two-point expectations

@dataclass
class SitePoints:
    """Coordinates and local momenta of a set of sites; arrays broadcast together."""
    t: np.ndarray
    x: np.ndarray
    momentum: Optional[np.ndarray] = None

    @property
    def four_position(self) -> np.ndarray:
        zeros = np.zeros_like(self.t)
        return np.stack(np.broadcast_arrays(self.t, self.x, zeros, zeros), axis=-1)


TwoPointOperator = Callable[[SitePoints, SitePoints], np.ndarray]


def unit_operator(a: SitePoints, b: SitePoints) -> np.ndarray:
    return np.ones(np.broadcast_shapes(a.t.shape, b.t.shape))


def interval_operator(a: SitePoints, b: SitePoints) -> np.ndarray:
    """−(x₁−x₂)^μ(x₁−x₂)_μ."""
    z = a.four_position - b.four_position
    return -minkowski(z, z)


def spatial_distance_operator(a: SitePoints, b: SitePoints) -> np.ndarray:
    """|x⃗₁ − x⃗₂|²."""
    return (a.x - b.x) ** 2


def momentum_spread_operator(a: SitePoints, b: SitePoints) -> np.ndarray:
    """−[p(x₁) − p(x₂)]^μ[p(x₁) − p(x₂)]_μ."""
    dp = a.momentum - b.momentum
    return -minkowski(dp, dp)


def expect_2(operator: TwoPointOperator, psi: SpinorField, kernel: KernelInterface,
             potential: Optional[Potential] = None, needs_momentum: bool = False,
             density_floor: Optional[float] = None, seed: int = 0,
             pair_threshold: Optional[int] = None, n_samples: Optional[int] = None,
             batches: Optional[int] = None, chunk: int = 1024) -> Estimate:
    """
    Kernel-weighted two-point expectation.

    Args:
        operator: Callable on two SitePoints sets returning pair values
        psi: Field
        kernel: Spacelike kernel
        potential: Needed for the gauge-covariant momentum when needs_momentum
        needs_momentum: Attach local momenta and drop low-density sites
        density_floor: Relative density floor for excluded sites
        seed: Monte Carlo seed
        pair_threshold: Exact double sum below this many pairs
        n_samples: Monte Carlo pair samples
        batches: Batches for the standard error
        chunk: Rows per block of the exact double sum

    Returns:
        Estimate (stderr 0 for the exact path)
    """
    pair_threshold = settings.sampling.pair_threshold if pair_threshold is None else pair_threshold
    n_samples = settings.sampling.pair_samples if n_samples is None else n_samples
    batches = settings.sampling.batches if batches is None else batches
    grid = psi.grid

    rho = psi.density().reshape(-1)
    if rho.max() == 0.0:
        raise ZeroNormError("two-point expectation of a zero field")
    included = rho > 0.0
    momentum = None
    if needs_momentum:
        local = local_momentum(psi, potential, density_floor)
        included = local.included.reshape(-1)
        momentum = local.momentum.reshape(-1, 4)
    excluded = float(1.0 - np.mean(included))
    if excluded > 0.0 and needs_momentum:
        expect_logger.debug("Low-density sites excluded", fraction=excluded)

    sites = np.flatnonzero(included)
    t = grid.times[sites // grid.n_x]
    x = grid.positions[sites % grid.n_x]
    weight = rho[sites]
    moment = momentum[sites] if momentum is not None else None
    n = sites.size

    def points(index):
        return SitePoints(t[index], x[index], None if moment is None else moment[index])

    if n * n <= pair_threshold:
        numerators, denominators = [], []
        everything = np.arange(n)
        for start in range(0, n, chunk):
            rows = np.arange(start, min(start + chunk, n))
            a = points(rows[:, None])
            b = points(everything[None, :])
            w = weight[rows, None] * weight[None, :] * kernel.evaluate(
                a.t - b.t, np.abs(a.x - b.x))
            values = operator(a, b)
            numerators.append(np.sum(w * values))
            denominators.append(np.sum(w))
        numerator, denominator = float(np.sum(numerators)), float(np.sum(denominators))
        if denominator == 0.0:
            raise EstimatorError("two-point denominator vanished: no spacelike pairs with support")
        return Estimate(numerator / denominator, 0.0, n * n, EstimateMethod.EXACT, excluded)

    rng = np.random.default_rng(seed)
    first = np.minimum(((np.arange(n_samples) + rng.random(n_samples)) * n / n_samples).astype(int), n - 1)
    second = rng.integers(0, n, size=n_samples)
    a, b = points(first), points(second)
    w = weight[first] * weight[second] * kernel.evaluate(a.t - b.t, np.abs(a.x - b.x))
    return ratio_estimate(w, operator(a, b), batches, EstimateMethod.MONTE_CARLO, excluded)


def delta_x2(psi: SpinorField, kernel: KernelInterface, **options) -> Estimate:
    """⟨⟨−(x₁−x₂)^μ(x₁−x₂)_μ⟩⟩₂."""
    return expect_2(interval_operator, psi, kernel, **options)


def delta_p2(psi: SpinorField, kernel: KernelInterface, potential: Optional[Potential] = None,
             **options) -> Estimate:
    """⟨⟨−[p(x₁) − p(x₂)]^μ[p(x₁) − p(x₂)]_μ⟩⟩₂ with low-density sites excluded."""
    return expect_2(momentum_spread_operator, psi, kernel, potential=potential,
                    needs_momentum=True, **options)


# Four-point weight

def separations_from_positions(positions: Sequence[float]) -> Tuple[float, ...]:
    """Six spatial separations |x_k − x_l| in PAIRS order for 1D positions."""
    p = [float(v) for v in positions]
    return tuple(abs(p[k] - p[l]) for k, l in PAIRS)


def canonical_separations(separations: Sequence[float], digits: int = 12) -> Tuple[float, ...]:
    """Label-independent representative: the smallest sextuple over point permutations."""
    lookup = {pair: separations[i] for i, pair in enumerate(PAIRS)}
    best = None
    for perm in itertools.permutations(range(4)):
        candidate = tuple(round(lookup[tuple(sorted((perm[k], perm[l])))], digits) for k, l in PAIRS)
        if best is None or candidate < best:
            best = candidate
    return best


def _window(t2: float, t3: float, r: Sequence[float]) -> float:
    """Length of the t4 interval spacelike to the other three points."""
    r12, r13, r14, r23, r24, r34 = r
    low = max(-r14, t2 - r24, t3 - r34)
    high = min(r14, t2 + r24, t3 + r34)
    return max(0.0, high - low)


@lru_cache(maxsize=65536)
def _weight_cached(separations: Tuple[float, ...]) -> float:
    r12, r13, r14, r23, r24, r34 = separations

    def inner(t2: float) -> float:
        low, high = max(-r13, t2 - r23), min(r13, t2 + r23)
        if high <= low:
            return 0.0
        kinks = sorted({s * r14 - u * r34 for s in (1, -1) for u in (1, -1)} |
                       {t2 + s * r24 - u * r34 for s in (1, -1) for u in (1, -1)})
        kinks = [k for k in kinks if low < k < high]
        value, _ = quad(lambda t3: _window(t2, t3, separations), low, high,
                        points=kinks or None, limit=200, epsabs=0.0, epsrel=1e-10)
        return value

    outer_kinks = sorted({s * a + u * b for a, b in ((r13, r23), (r14, r24))
                          for s in (1, -1) for u in (1, -1)})
    outer_kinks = [k for k in outer_kinks if -r12 < k < r12]
    value, _ = quad(inner, -r12, r12, points=outer_kinks or None, limit=200,
                    epsabs=0.0, epsrel=1e-9)
    return float(value)


def weight_W_trivial(separations: Sequence[float],
                     table: Optional[MutableMapping[str, float]] = None) -> float:
    """
    Triple time integral of the six spacelike step functions at fixed positions.

    Points sit at times (0, t2, t3, t4); the innermost t4 integral is an
    interval length and the remaining two use adaptive quadrature.

    Args:
        separations: |x_k − x_l| in PAIRS order
        table: Optional persistent cache keyed by the canonical separations

    Returns:
        W, zero when any two points coincide spatially
    """
    if len(separations) != 6:
        raise GridError(f"expected 6 separations, got {len(separations)}")
    if min(separations) <= 0.0:
        return 0.0
    key = canonical_separations(separations)
    label = ",".join(repr(v) for v in key)
    if table is not None and label in table:
        return table[label]
    value = _weight_cached(key)
    if table is not None:
        table[label] = value
    return value


def four_point_volume(separations: Sequence[float]) -> float:
    """Exact volume of the mutually spacelike (t2, t3, t4) polytope (independent of W)."""
    if min(separations) <= 0.0:
        return 0.0
    r12, r13, r14, r23, r24, r34 = separations
    rows = []
    for axis, radius in enumerate((r12, r13, r14)):
        for sign in (1.0, -1.0):
            normal = np.zeros(3)
            normal[axis] = sign
            rows.append([*normal, -radius])
    for (k, l), radius in zip(((0, 1), (0, 2), (1, 2)), (r23, r24, r34)):
        for sign in (1.0, -1.0):
            normal = np.zeros(3)
            normal[k], normal[l] = sign, -sign
            rows.append([*normal, -radius])
    vertices = HalfspaceIntersection(np.array(rows), np.zeros(3)).intersections
    return float(ConvexHull(vertices).volume)


# Four-point expectations

@dataclass
class QuadrupleSample:
    """Frozen mutually spacelike site quadruples with their f = 1/W weights.

    Samples come in adjacent pairs (s, mirror of s in time).
    """
    grid: SpacetimeGrid
    t_index: np.ndarray           # (S, 4)
    x_index: np.ndarray           # (S, 4)
    weights: np.ndarray           # (S,)
    seed: int
    proposals: int

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def sites(self) -> np.ndarray:
        return self.t_index * self.grid.n_x + self.x_index

    @property
    def acceptance(self) -> float:
        return self.size / max(self.proposals, 1)

    def relabeled(self, order: Sequence[int]) -> 'QuadrupleSample':
        order = list(order)
        return QuadrupleSample(self.grid, self.t_index[:, order], self.x_index[:, order],
                               self.weights, self.seed, self.proposals)


def sample_quadruples(grid: SpacetimeGrid, n_samples: Optional[int] = None, seed: int = 0,
                      allowed: Optional[np.ndarray] = None,
                      table: Optional[MutableMapping[str, float]] = None,
                      max_proposals: Optional[int] = None,
                      threads: Optional[int] = None) -> QuadrupleSample:
    """
    Draw mutually spacelike site quadruples uniformly, paired with their time mirrors.

    The first point is stratified over all sites; the other three take a
    uniform spatial site and a uniform time offset within the largest spacelike
    reach, so every supported quadruple has the same proposal density.
    Weights are evaluated on a pool of threads and keep the order of the draws.
    """
    n_samples = settings.sampling.quadruple_samples if n_samples is None else n_samples
    max_proposals = settings.sampling.max_proposals if max_proposals is None else max_proposals
    if grid.n_x < 4:
        raise EstimatorError("four distinct spatial sites are needed for spacelike quadruples")
    allowed = np.ones((grid.n_t, grid.n_x), dtype=bool) if allowed is None else allowed
    reach = int(min(grid.n_t - 1, np.ceil((grid.n_x - 1) * grid.dx / grid.dt)))
    rng = np.random.default_rng(seed)
    wanted = (n_samples + 1) // 2
    batch = max(4 * wanted, 4096)
    kept_t, kept_x, proposals, found = [], [], 0, 0

    while found < wanted and proposals < max_proposals:
        strata = ((np.arange(batch) + rng.random(batch)) * grid.n_sites / batch).astype(int)
        strata = np.minimum(strata, grid.n_sites - 1)
        t1, x1 = np.divmod(strata, grid.n_x)
        t = np.concatenate([t1[:, None], t1[:, None] + rng.integers(-reach, reach + 1, (batch, 3))], axis=1)
        x = np.concatenate([x1[:, None], rng.integers(0, grid.n_x, (batch, 3))], axis=1)
        proposals += batch

        ok = np.all((t >= 0) & (t < grid.n_t), axis=1)
        ok &= np.all(np.diff(np.sort(x, axis=1), axis=1) > 0, axis=1)
        for k, l in PAIRS:
            ok &= np.abs(t[:, k] - t[:, l]) * grid.dt < np.abs(x[:, k] - x[:, l]) * grid.dx
        t, x = t[ok], x[ok]
        mirror = grid.n_t - 1 - t
        ok = np.all(allowed[t, x], axis=1) & np.all(allowed[mirror, x], axis=1)
        t, x = t[ok][: wanted - found], x[ok][: wanted - found]
        kept_t.append(t)
        kept_x.append(x)
        found += t.shape[0]

    if found == 0:
        raise EstimatorError("no mutually spacelike quadruples found")
    if found < wanted:
        expect_logger.warning("Quadruple sampling stopped early", found=found, wanted=wanted,
                              proposals=proposals)
    t = np.concatenate(kept_t)
    x = np.concatenate(kept_x)
    pairs_t = np.empty((2 * found, 4), dtype=int)
    pairs_x = np.empty((2 * found, 4), dtype=int)
    pairs_t[0::2], pairs_t[1::2] = t, grid.n_t - 1 - t
    pairs_x[0::2], pairs_x[1::2] = x, x

    threads = settings.threads if threads is None else threads
    with ThreadPoolExecutor(max_workers=threads) as pool:
        volumes = list(pool.map(
            lambda row: weight_W_trivial(separations_from_positions(row * grid.dx), table), x))
    weights = 1.0 / np.array(volumes)
    expect_logger.debug("Quadruples sampled", samples=2 * found, proposals=proposals,
                        distinct_weights=_weight_cached.cache_info().currsize)
    return QuadrupleSample(grid, pairs_t, pairs_x, np.repeat(weights, 2), seed, proposals)


@dataclass
class FourPointContext:
    """Coordinates and momenta at the four points of every sample."""
    times: np.ndarray             # (S, 4)
    positions: np.ndarray         # (S, 4)
    momentum: np.ndarray          # (S, 4 points, 4 components)


FourPointOperator = Callable[[FourPointContext], np.ndarray]


def unit_four_point(context: FourPointContext) -> np.ndarray:
    return np.ones(context.times.shape[0])


def uncertainty_four_point(context: FourPointContext) -> np.ndarray:
    """{(x₁ − x₂)^μ[p₃(x₃) − p₄(x₄)]_μ}²."""
    dt12 = context.times[:, 0] - context.times[:, 1]
    dx12 = context.positions[:, 0] - context.positions[:, 1]
    dp = context.momentum[:, 2] - context.momentum[:, 3]
    return (dt12 * dp[:, 0] - dx12 * dp[:, 1]) ** 2


def expect_4(operator: FourPointOperator, psi: SpinorField, samples: QuadrupleSample,
             potential: Optional[Potential] = None, batches: Optional[int] = None) -> Estimate:
    """Ratio estimate of ⟨⟨O⟩⟩₄ over frozen quadruples with shared weights."""
    batches = settings.sampling.batches if batches is None else batches
    if samples.size == 0:
        raise EstimatorError("no quadruples to evaluate")
    local = local_momentum(psi, potential, density_floor=0.0)
    rho = local.density.reshape(-1)
    momentum = local.momentum.reshape(-1, 4)
    sites = samples.sites
    weights = samples.weights * np.prod(rho[sites], axis=1)
    context = FourPointContext(psi.grid.times[samples.t_index],
                               psi.grid.positions[samples.x_index], momentum[sites])
    return ratio_estimate(weights, operator(context), batches, EstimateMethod.MONTE_CARLO)


def mirrored_density(psi: SpinorField) -> np.ndarray:
    """Flat ½(ρ(t, x) + ρ(T − t, x)) per site."""
    density = psi.density()
    return (0.5 * (density + density[::-1])).reshape(-1)


class UncertaintyFunctional:
    """
    A₂ on frozen quadruples as a differentiable function of the flat field.

    With a reference density the quadruple weights ∏ρ are frozen to it, so the
    value depends on the field only through the local momenta.
    """

    def __init__(self, samples: QuadrupleSample, potential: Optional[Potential] = None,
                 batches: Optional[int] = None, reference: Optional[np.ndarray] = None):
        self.samples = samples
        self.reference = None
        if reference is not None:
            self.reference = np.asarray(reference, dtype=float).reshape(-1)
            if self.reference.shape[0] != samples.grid.n_sites:
                raise GridError(f"reference density has {self.reference.shape[0]} sites, "
                                f"grid has {samples.grid.n_sites}")
        self.grid = samples.grid
        self.batches = settings.sampling.batches if batches is None else batches
        self.energy_op, self.momentum_op = momentum_matrices(self.grid)
        self.offsets = potential_offsets(self.grid, potential)
        self.sites = samples.sites
        times = self.grid.times[samples.t_index]
        positions = self.grid.positions[samples.x_index]
        self.dt12 = times[:, 0] - times[:, 1]
        self.dx12 = positions[:, 0] - positions[:, 1]

    def _site_terms(self, q: np.ndarray):
        n_sites = self.grid.n_sites
        values = q.reshape(n_sites, 4)
        k0q = self.energy_op @ q
        k1q = self.momentum_op @ q
        rho = np.sum(np.abs(values) ** 2, axis=1)
        j0 = np.real(np.sum(values.conj() * k0q.reshape(n_sites, 4), axis=1))
        j1 = np.real(np.sum(values.conj() * k1q.reshape(n_sites, 4), axis=1))
        safe = np.where(rho > 0.0, rho, 1.0)
        p0 = j0 / safe - self.offsets[:, 0]
        p1 = j1 / safe - self.offsets[:, 1]
        return values, k0q, k1q, rho, safe, j0, j1, p0, p1

    def _sample_terms(self, rho, p0, p1):
        sites = self.sites
        density = rho if self.reference is None else self.reference
        weights = self.samples.weights * np.prod(density[sites], axis=1)
        c, d = sites[:, 2], sites[:, 3]
        spread = self.dt12 * (p0[c] - p0[d]) - self.dx12 * (p1[c] - p1[d])
        return weights, spread

    def estimate(self, q: np.ndarray) -> Estimate:
        _, _, _, rho, _, _, _, p0, p1 = self._site_terms(q)
        weights, spread = self._sample_terms(rho, p0, p1)
        return ratio_estimate(weights, spread ** 2, self.batches, EstimateMethod.MONTE_CARLO)

    def value_and_gradient(self, q: np.ndarray):
        """A₂ and ∂A₂/∂Re q + i∂A₂/∂Im q."""
        values, k0q, k1q, rho, safe, j0, j1, p0, p1 = self._site_terms(q)
        weights, spread = self._sample_terms(rho, p0, p1)
        observable = spread ** 2
        denominator = np.sum(weights)
        if denominator == 0.0:
            raise EstimatorError("A2 denominator vanished on the frozen quadruples")
        value = np.sum(weights * observable) / denominator

        n_sites = self.grid.n_sites
        sites = self.sites
        d_weight = (observable - value) / denominator
        d_spread = 2.0 * spread * weights / denominator
        g_rho = np.zeros(n_sites)
        for k in range(4 if self.reference is None else 0):
            np.add.at(g_rho, sites[:, k], d_weight * weights / safe[sites[:, k]])
        g_p0 = np.zeros(n_sites)
        g_p1 = np.zeros(n_sites)
        np.add.at(g_p0, sites[:, 2], d_spread * self.dt12)
        np.add.at(g_p0, sites[:, 3], -d_spread * self.dt12)
        np.add.at(g_p1, sites[:, 2], -d_spread * self.dx12)
        np.add.at(g_p1, sites[:, 3], d_spread * self.dx12)

        g_j0 = g_p0 / safe
        g_j1 = g_p1 / safe
        g_rho -= (g_p0 * j0 + g_p1 * j1) / safe ** 2

        spin = np.ones(4)
        gradient = 2.0 * (g_rho[:, None] * values).reshape(-1)
        for g_j, kq, operator in ((g_j0, k0q, self.energy_op), (g_j1, k1q, self.momentum_op)):
            g_flat = np.kron(g_j, spin)
            gradient += g_flat * kq + operator.conj().T @ (g_flat * q)
        return float(value), gradient


def a2(psi: SpinorField, potential: Optional[Potential] = None,
       samples: Optional[QuadrupleSample] = None, seed: int = 0,
       n_samples: Optional[int] = None,
       table: Optional[MutableMapping[str, float]] = None) -> Estimate:
    """A₂ = ⟨⟨δx²δp²⟩⟩₄ on frozen (or freshly drawn) quadruples."""
    if samples is None:
        local = local_momentum(psi, potential)
        samples = sample_quadruples(psi.grid, n_samples, seed, local.included, table)
    return UncertaintyFunctional(samples, potential).estimate(psi.flat())
