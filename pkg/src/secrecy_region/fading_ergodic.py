"""Ergodic secrecy capacity regions of fading BCCs.

Each fading state (g1, g2) = (|h1|^2, |h2|^2) is treated as one subchannel
with effective noise variances mu^2 / g1 and nu^2 / g2. With N equally
likely states the parallel-channel sum rates are N times the ergodic
averages, so the allocator gets the budget N * P and traced rates are
divided by N.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from secrecy_region.channel_model import (
    PREFACTOR_COMPLEX,
    ParallelChannel,
    RatePoint,
)
from secrecy_region.config import SolverConfig
from secrecy_region.errors import ValidationError
from secrecy_region.oracle import secrecy_water_filling
from secrecy_region.region_tracer import (
    Boundary,
    BoundaryPoint,
    make_boundary,
    solve_point,
    trace_region,
)

logger = logging.getLogger("secrecy_region.fading_ergodic")

GAIN_FLOOR = 1e-12


@dataclass(frozen=True)
class Rayleigh:
    """Exponentially distributed power gains.

    Attributes:
        sigma1: Mean of |h1|^2
        sigma2: Mean of |h2|^2

    """

    sigma1: float
    sigma2: float

    def __post_init__(self) -> None:
        """Check both means are positive."""
        for name in ("sigma1", "sigma2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be finite and > 0", name, value)


@dataclass(frozen=True)
class Empirical:
    """A fixed list of (|h1|^2, |h2|^2) realizations."""

    gains: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        """Check the list is nonempty with nonnegative gains."""
        gains = tuple((float(g1), float(g2)) for g1, g2 in self.gains)
        if not gains:
            raise ValidationError("Empirical gains must not be empty", "gains")
        for pair in gains:
            if not all(math.isfinite(g) and g >= 0 for g in pair):
                raise ValidationError("Gains must be finite and >= 0", "gains", pair)
        object.__setattr__(self, "gains", gains)


GainModel = Rayleigh | Empirical


@dataclass(frozen=True)
class FadingSpec:
    """Gain distribution and receiver noise of a fading BCC.

    Rates use the proper-complex convention, so the prefactor is 1.
    """

    gain_model: GainModel
    mu_sq: float = 1.0
    nu_sq: float = 1.0
    prefactor: float = field(default=PREFACTOR_COMPLEX, init=False)

    def __post_init__(self) -> None:
        """Check the noise variances."""
        for name in ("mu_sq", "nu_sq"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be finite and > 0", name, value)


@dataclass(frozen=True, eq=False)
class StateSet:
    """Equally likely fading states."""

    g1: np.ndarray
    g2: np.ndarray
    seed: int | None = None

    def __post_init__(self) -> None:
        """Freeze the gain arrays."""
        g1 = np.array(self.g1, dtype=float)
        g2 = np.array(self.g2, dtype=float)
        if g1.shape != g2.shape or g1.ndim != 1 or g1.size == 0:
            raise ValidationError("StateSet needs matching nonempty gain arrays")
        g1.setflags(write=False)
        g2.setflags(write=False)
        object.__setattr__(self, "g1", g1)
        object.__setattr__(self, "g2", g2)

    @property
    def n_states(self) -> int:
        """Number of states N."""
        return int(self.g1.size)

    @property
    def weights(self) -> np.ndarray:
        """Probability of each state, 1/N."""
        return np.full(self.n_states, 1.0 / self.n_states)

    @property
    def states(self) -> list[tuple[float, float]]:
        """(g1, g2) pairs in order."""
        return list(zip(self.g1.tolist(), self.g2.tolist(), strict=True))

    def split(self, n_batches: int) -> list["StateSet"]:
        """Split into contiguous batches of (nearly) equal size."""
        return [
            StateSet(g1=a, g2=b, seed=self.seed)
            for a, b in zip(
                np.array_split(self.g1, n_batches),
                np.array_split(self.g2, n_batches),
                strict=True,
            )
        ]


def sample_states(spec: FadingSpec, n_states: int, seed: int | None = 0) -> StateSet:
    """Draw N i.i.d. fading states.

    Rayleigh gains are drawn g1 first, then g2, from one generator, so
    changing sigma2 under a fixed seed rescales the same g2 draws.
    Empirical gains are returned verbatim and the seed is ignored.

    Raises:
        ValidationError: If n_states < 1

    """
    if n_states < 1:
        raise ValidationError("n_states must be >= 1", "n_states", n_states)
    model = spec.gain_model
    if isinstance(model, Empirical):
        g1, g2 = zip(*model.gains, strict=True)
        return StateSet(g1=np.asarray(g1), g2=np.asarray(g2), seed=None)

    rng = np.random.default_rng(seed)
    g1 = rng.exponential(scale=model.sigma1, size=n_states)
    g2 = rng.exponential(scale=model.sigma2, size=n_states)
    logger.debug(
        f"Sampled {n_states} states (seed {seed}): "
        f"mean g1 {g1.mean():.4f}, mean g2 {g2.mean():.4f}"
    )
    return StateSet(g1=g1, g2=g2, seed=seed)


def to_parallel_channel(
    states: StateSet, mu_sq: float, nu_sq: float
) -> tuple[ParallelChannel, float]:
    """Map each state to an equivalent subchannel.

    Gains below GAIN_FLOOR are floored, which keeps the effective noise
    finite; such states get no power.

    Returns:
        The channel (prefactor 1) and the power scale 1/N

    """
    g1 = np.maximum(states.g1, GAIN_FLOOR)
    g2 = np.maximum(states.g2, GAIN_FLOOR)
    channel = ParallelChannel(
        mu_sq=mu_sq / g1, nu_sq=nu_sq / g2, prefactor=PREFACTOR_COMPLEX
    )
    return channel, 1.0 / states.n_states


def _rescale(point: BoundaryPoint, scale: float) -> BoundaryPoint:
    r = point.rate
    return BoundaryPoint(
        rate=RatePoint(
            r0=r.r0 * scale, r1=r.r1 * scale, r01=r.r01 * scale, r02=r.r02 * scale
        ),
        weights=point.weights,
        case=point.case,
        alloc=point.alloc,
        lam=point.lam,
    )


def prob_a(states: StateSet, mu_sq: float, nu_sq: float) -> float:
    """Empirical probability that receiver 1 sees the better state."""
    channel, _ = to_parallel_channel(states, mu_sq, nu_sq)
    return float(channel.in_a.mean())


def boundary_for_states(
    spec: FadingSpec,
    states: StateSet,
    budget: float,
    ratios: Sequence[float] | None = None,
    config: SolverConfig | None = None,
    threads: int = 1,
) -> Boundary:
    """Trace the ergodic boundary over a given state set.

    Returns:
        Boundary with ergodic (per-state average) rates; allocations stay
        per-state powers, whose mean is the budget

    Raises:
        ValidationError: If the budget is negative or not finite

    """
    if not (math.isfinite(budget) and budget >= 0):
        raise ValidationError("Power budget must be finite and >= 0", "P", budget)
    channel, scale = to_parallel_channel(states, spec.mu_sq, spec.nu_sq)
    logger.info(
        f"Tracing ergodic boundary over {states.n_states} states, "
        f"P(A) = {prob_a(states, spec.mu_sq, spec.nu_sq):.4f}"
    )
    if not np.any(channel.in_a):
        logger.warning("No sampled state favors receiver 1: R1 is zero")
    boundary = trace_region(channel, budget / scale, ratios, config, threads)
    return make_boundary([_rescale(p, scale) for p in boundary.points])


def ergodic_boundary(
    spec: FadingSpec,
    budget: float,
    n_states: int,
    seed: int | None = 0,
    ratios: Sequence[float] | None = None,
    config: SolverConfig | None = None,
    threads: int = 1,
) -> Boundary:
    """Trace the ergodic secrecy capacity region boundary.

    Args:
        spec: Fading distribution and noise variances
        budget: Average power P
        n_states: Monte Carlo states N
        seed: RNG seed
        ratios: gamma1/gamma0 sweep (default grid if None)
        config: Solver tolerances
        threads: Worker threads for the ratio points

    Returns:
        Boundary with ergodic rates

    """
    states = sample_states(spec, n_states, seed)
    return boundary_for_states(spec, states, budget, ratios, config, threads)


def ergodic_rate_point(
    spec: FadingSpec,
    states: StateSet,
    budget: float,
    ratio: float,
    config: SolverConfig | None = None,
) -> BoundaryPoint:
    """Solve a single ergodic boundary point."""
    channel, scale = to_parallel_channel(states, spec.mu_sq, spec.nu_sq)
    return _rescale(solve_point(channel, budget / scale, ratio, config), scale)


def batch_standard_error(
    spec: FadingSpec,
    states: StateSet,
    budget: float,
    ratio: float,
    config: SolverConfig | None = None,
    n_batches: int = 10,
) -> tuple[float, float]:
    """Monte Carlo standard error of (r0, r1) at one ratio.

    The states are split into contiguous batches, each batch is solved as its
    own ergodic problem, and the spread of the batch rates gives the error of
    the full-set estimate.

    Raises:
        ValidationError: If there are fewer states than batches

    """
    if n_batches < 2:
        raise ValidationError("n_batches must be >= 2", "n_batches", n_batches)
    if states.n_states < n_batches:
        raise ValidationError(
            "Need at least one state per batch", "n_states", states.n_states
        )
    rates = np.array(
        [
            [p.rate.r0, p.rate.r1]
            for p in (
                ergodic_rate_point(spec, batch, budget, ratio, config)
                for batch in states.split(n_batches)
            )
        ]
    )
    se = rates.std(axis=0, ddof=1) / math.sqrt(n_batches)
    return float(se[0]), float(se[1])


def ergodic_secrecy_capacity(
    states: StateSet, mu_sq: float, nu_sq: float, budget: float
) -> float:
    """Secrecy capacity of the fading wiretap channel over the states.

    No common message is sent; power goes only to states that favor
    receiver 1.
    """
    channel, scale = to_parallel_channel(states, mu_sq, nu_sq)
    result = secrecy_water_filling(channel, budget / scale)
    return result.objective * scale


def max_rates(boundary: Boundary) -> tuple[float, float]:
    """Largest common rate and largest secrecy rate on a boundary."""
    if len(boundary) == 0:
        return 0.0, 0.0
    return float(boundary.r0().max()), float(boundary.r1().max())
