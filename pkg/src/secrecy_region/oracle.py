"""Brute-force verification of the closed-form allocator.

The grid search enumerates every allocation on a regular grid of the power
simplex (interior points included, so a slack budget is not ruled out) and
scores it through channel_model alone. Nothing here imports the allocator.
"""

import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from secrecy_region.channel_model import (
    Allocation,
    ParallelChannel,
    Weights,
    rate_arrays,
    rate_r1,
)
from secrecy_region.errors import OracleRefusalError, ValidationError

logger = logging.getLogger("secrecy_region.oracle")


@dataclass(frozen=True)
class GridSpec:
    """Resolution and size cap of the brute-force grid.

    Attributes:
        resolution: Power step as a fraction of the budget
        max_dims: Largest number of free power variables accepted

    """

    resolution: float = 1e-3
    max_dims: int = 4

    def __post_init__(self) -> None:
        """Check the grid is usable."""
        if not 0 < self.resolution <= 1:
            raise ValidationError(
                "resolution must lie in (0, 1]", "resolution", self.resolution
            )
        if self.max_dims < 1:
            raise ValidationError("max_dims must be >= 1", "max_dims", self.max_dims)

    @classmethod
    def for_channel(cls, channel: ParallelChannel, max_dims: int = 4) -> "GridSpec":
        """Default grid: 1e-3 of P for one subchannel, 1e-2 otherwise."""
        return cls(resolution=1e-3 if len(channel) == 1 else 1e-2, max_dims=max_dims)

    @property
    def steps(self) -> int:
        """Number of grid steps that make up the whole budget."""
        return max(1, round(1.0 / self.resolution))


class GridResult(NamedTuple):
    """Best allocation found and its score."""

    alloc: Allocation
    objective: float


class Instance(NamedTuple):
    """A verification instance."""

    channel: ParallelChannel
    weights: Weights
    budget: float


def _simplex(dims: int, n: int) -> np.ndarray:
    """Integer points k >= 0 with sum(k) <= n, in lexicographic order."""
    if dims <= 3:
        axes = np.meshgrid(*([np.arange(n + 1)] * dims), indexing="ij")
        points = np.stack([ax.reshape(-1) for ax in axes], axis=1)
        return points[points.sum(axis=1) <= n]
    blocks = []
    for k in range(n + 1):
        rest = _simplex(dims - 1, n - k)
        blocks.append(np.column_stack([np.full(len(rest), k), rest]))
    return np.concatenate(blocks)


def _simplex_chunks(dims: int, n: int) -> Iterator[np.ndarray]:
    # chunk on the first coordinate to bound memory; order stays lexicographic
    if dims <= 3:
        yield _simplex(dims, n)
        return
    for k in range(n + 1):
        rest = _simplex(dims - 1, n - k)
        yield np.column_stack([np.full(len(rest), k), rest])


def _layout(channel: ParallelChannel, confidential_only: bool) -> list[tuple[int, int]]:
    """Map grid coordinates to (subchannel, 0 for p0 / 1 for p1)."""
    layout = []
    for sub, in_a in enumerate(channel.in_a.tolist()):
        if confidential_only:
            if in_a:
                layout.append((sub, 1))
        else:
            layout.append((sub, 0))
            if in_a:
                layout.append((sub, 1))
    return layout


def _to_powers(
    points: np.ndarray, layout: list[tuple[int, int]], n_sub: int, step: float
) -> tuple[np.ndarray, np.ndarray]:
    p = np.zeros((2, len(points), n_sub))
    for col, (sub, which) in enumerate(layout):
        p[which, :, sub] = points[:, col] * step
    return p[0], p[1]


def _search(
    channel: ParallelChannel,
    budget: float,
    gridspec: GridSpec,
    confidential_only: bool,
    score: Callable[[np.ndarray, np.ndarray], np.ndarray],
) -> GridResult:
    if not (math.isfinite(budget) and budget >= 0):
        raise ValidationError("Power budget must be finite and >= 0", "P", budget)
    layout = _layout(channel, confidential_only)
    dims = len(layout)
    if dims > gridspec.max_dims:
        raise OracleRefusalError(dims=dims, max_dims=gridspec.max_dims)
    if budget == 0 or dims == 0:
        return GridResult(Allocation.zeros(len(channel)), 0.0)

    n = gridspec.steps
    step = budget / n
    best_value = -math.inf
    best_point: np.ndarray | None = None
    for chunk in _simplex_chunks(dims, n):
        p0, p1 = _to_powers(chunk, layout, len(channel), step)
        values = score(p0, p1)
        # argmax keeps the first maximum, i.e. the lexicographically smallest
        i = int(np.argmax(values))
        if values[i] > best_value:
            best_value = float(values[i])
            best_point = chunk[i]

    if best_point is None:
        raise ValidationError("Grid search found no finite objective", "P", budget)
    p0, p1 = _to_powers(best_point[None, :], layout, len(channel), step)
    logger.debug(f"grid best {best_value:.9f} over {dims} dims, step {step:.3g}")
    return GridResult(Allocation(p0=p0[0], p1=p1[0]), best_value)


def grid_search(
    channel: ParallelChannel,
    weights: Weights,
    budget: float,
    gridspec: GridSpec | None = None,
) -> GridResult:
    """Exhaustively maximize gamma0 * min(r01, r02) + gamma1 * r1 on a grid.

    Args:
        channel: The parallel channel
        weights: Scalarization weights
        budget: Total power P >= 0
        gridspec: Grid resolution and cap (default per channel size)

    Returns:
        Best allocation (lexicographically smallest among ties) and its objective

    Raises:
        OracleRefusalError: If 2|A| + |A^c| exceeds the cap

    """
    gridspec = gridspec or GridSpec.for_channel(channel)

    def score(p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
        r01, r02, r1 = rate_arrays(channel, p0, p1)
        return weights.gamma0 * np.minimum(r01, r02) + weights.gamma1 * r1

    return _search(channel, budget, gridspec, False, score)


def secrecy_only_search(
    channel: ParallelChannel,
    budget: float,
    gridspec: GridSpec | None = None,
) -> GridResult:
    """Grid-maximize the secrecy rate alone, confidential power on A only."""
    gridspec = gridspec or GridSpec.for_channel(channel)

    def score(p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
        return rate_arrays(channel, p0, p1)[2]

    return _search(channel, budget, gridspec, True, score)


def secrecy_water_filling(
    channel: ParallelChannel, budget: float, xtol: float = 1e-14
) -> GridResult:
    """Maximize the secrecy rate alone for any number of subchannels.

    On each subchannel of A the secrecy rate is concave in the power, so the
    optimum spends power where (mu^2 + p)(nu^2 + p) = d * level, with
    d = nu^2 - mu^2, and the level is fixed by the budget.

    Args:
        channel: The parallel channel
        budget: Total power P >= 0
        xtol: Absolute tolerance of the level search in log scale

    Returns:
        Secrecy-optimal allocation and its secrecy rate

    """
    if not (math.isfinite(budget) and budget >= 0):
        raise ValidationError("Power budget must be finite and >= 0", "P", budget)
    a = channel.in_a
    if budget == 0 or not np.any(a):
        return GridResult(Allocation.zeros(len(channel)), 0.0)

    mu = channel.mu_sq[a]
    nu = channel.nu_sq[a]
    d = nu - mu

    def powers(log_level: float) -> np.ndarray:
        level = math.exp(log_level)
        root = np.sqrt(d * d + 4.0 * d * level)
        return np.maximum(2.0 * (d * level - mu * nu) / (root + mu + nu), 0.0)

    def excess(log_level: float) -> float:
        return float(powers(log_level).sum()) - budget

    # at level mu*nu/d the best subchannel is at its first watt
    lo = math.log(float((mu * nu / d).min()))
    hi = lo + 1.0
    while excess(hi) < 0:
        hi += 1.0 + (hi - lo)
    log_level = brentq(excess, lo, hi, xtol=xtol)

    p1 = np.zeros(len(channel))
    p1[a] = powers(log_level)
    # rescale away the root-finding residual so the budget holds exactly
    total = p1.sum()
    if total > 0:
        p1 *= budget / total
    alloc = Allocation(p0=np.zeros(len(channel)), p1=p1)
    return GridResult(alloc, rate_r1(channel, alloc))


def random_instance(rng: np.random.Generator) -> Instance:
    """Draw a certification instance.

    L in {1, 2}, mu^2 and nu^2 uniform in [0.25, 4], P uniform in [0.5, 8],
    gamma1/gamma0 log-uniform in [1e-2, 1e2].
    """
    n_sub = int(rng.integers(1, 3))
    mu = rng.uniform(0.25, 4.0, size=n_sub)
    nu = rng.uniform(0.25, 4.0, size=n_sub)
    budget = float(rng.uniform(0.5, 8.0))
    ratio = float(10.0 ** rng.uniform(-2.0, 2.0))
    return Instance(
        channel=ParallelChannel(mu_sq=mu, nu_sq=nu),
        weights=Weights.from_ratio(ratio),
        budget=budget,
    )
