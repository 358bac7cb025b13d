"""Boundary tracing for secrecy capacity regions.

The region is convex, so each boundary point maximizes gamma0 * R0 +
gamma1 * R1 for some positive weights. Sweeping gamma1/gamma0 with gamma0
pinned to 1 traces the boundary of a parallel channel; a single Gaussian BCC
can also be traced directly by splitting the power into a common share
(1 - beta) P and a confidential share beta P.
"""

import asyncio
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import anyio
import numpy as np

from secrecy_region.channel_model import (
    PREFACTOR_REAL,
    Allocation,
    ParallelChannel,
    RatePoint,
    Weights,
)
from secrecy_region.config import SolverConfig
from secrecy_region.errors import SecrecyRegionError, SolverError, ValidationError
from secrecy_region.power_allocator import CaseTag, optimal_allocation

logger = logging.getLogger("secrecy_region.region_tracer")


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """One sampled point of a region boundary.

    Points from the gamma sweep carry their weights, case tag, allocation and
    multiplier; points from the beta sweep carry beta instead.
    """

    rate: RatePoint
    weights: Weights | None = None
    case: CaseTag | None = None
    alloc: Allocation | None = None
    lam: float | None = None
    beta: float | None = None

    @property
    def ratio(self) -> float | None:
        """gamma1 / gamma0 of the point, if it came from the gamma sweep."""
        return self.weights.ratio if self.weights is not None else None


@dataclass(frozen=True)
class Boundary:
    """Boundary points sorted by nondecreasing r1."""

    points: tuple[BoundaryPoint, ...]

    def __len__(self) -> int:
        """Return the number of points."""
        return len(self.points)

    def r0(self) -> np.ndarray:
        """Common rates in boundary order."""
        return np.array([p.rate.r0 for p in self.points])

    def r1(self) -> np.ndarray:
        """Secrecy rates in boundary order."""
        return np.array([p.rate.r1 for p in self.points])


def _sort_key(point: BoundaryPoint) -> tuple[float, float, float]:
    tie = point.ratio if point.ratio is not None else (point.beta or 0.0)
    return (point.rate.r1, -point.rate.r0, tie)


def make_boundary(points: Sequence[BoundaryPoint]) -> Boundary:
    """Sort points into a boundary."""
    return Boundary(points=tuple(sorted(points, key=_sort_key)))


def default_ratios(n: int = 41, lo: float = 1e-3, hi: float = 1e3) -> list[float]:
    """Log-spaced gamma1/gamma0 grid."""
    return np.logspace(math.log10(lo), math.log10(hi), n).tolist()


def default_betas(n: int = 101) -> list[float]:
    """Equispaced beta grid on [0, 1]."""
    return np.linspace(0.0, 1.0, n).tolist()


def _check_ratios(ratios: Sequence[float]) -> None:
    if len(ratios) == 0:
        raise ValidationError("ratios must not be empty", "ratios")
    for r in ratios:
        if not (math.isfinite(r) and r > 0):
            raise ValidationError("ratios must be finite and > 0", "ratios", r)
    if any(b < a for a, b in zip(ratios, ratios[1:], strict=False)):
        raise ValidationError("ratios must be sorted ascending", "ratios", ratios)


def solve_point(
    channel: ParallelChannel,
    budget: float,
    ratio: float,
    config: SolverConfig | None = None,
) -> BoundaryPoint:
    """Solve one boundary point with gamma0 = 1.

    Raises:
        SolverError: Any solver failure, annotated with the ratio

    """
    weights = Weights.from_ratio(ratio)
    try:
        solution = optimal_allocation(channel, weights, budget, config)
    except SecrecyRegionError as e:
        raise SolverError(e, ratio) from e
    return BoundaryPoint(
        rate=solution.rate,
        weights=weights,
        case=solution.case,
        alloc=solution.alloc,
        lam=solution.lam,
    )


async def trace_region_async(
    channel: ParallelChannel,
    budget: float,
    ratios: Sequence[float] | None = None,
    config: SolverConfig | None = None,
    threads: int = 1,
) -> Boundary:
    """Trace a boundary with ratio points solved in worker threads.

    Args:
        channel: The parallel channel
        budget: Total power P
        ratios: Ascending gamma1/gamma0 values (default grid if None)
        config: Solver tolerances
        threads: Maximum concurrent worker threads

    Returns:
        The traced boundary

    Raises:
        SolverError: The failure of the smallest failing ratio

    """
    ratios = default_ratios() if ratios is None else list(ratios)
    _check_ratios(ratios)
    limiter = anyio.CapacityLimiter(max(1, threads))
    results: list[BoundaryPoint | SolverError | None] = [None] * len(ratios)

    async def solve(i: int, ratio: float) -> None:
        try:
            results[i] = await anyio.to_thread.run_sync(
                solve_point, channel, budget, ratio, config, limiter=limiter
            )
        except SolverError as e:
            results[i] = e

    async with anyio.create_task_group() as tg:
        for i, ratio in enumerate(ratios):
            tg.start_soon(solve, i, ratio)

    return _assemble(results)


def _assemble(results: Sequence[BoundaryPoint | SolverError | None]) -> Boundary:
    points = []
    for result in results:
        if isinstance(result, SolverError):
            logger.error(f"Boundary point failed: {result.message}")
            raise result
        if isinstance(result, BoundaryPoint):
            points.append(result)
    return make_boundary(points)


def _in_event_loop() -> bool:
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return False
    return True


def trace_region(
    channel: ParallelChannel,
    budget: float,
    ratios: Sequence[float] | None = None,
    config: SolverConfig | None = None,
    threads: int = 1,
) -> Boundary:
    """Trace the boundary of a parallel channel's secrecy capacity region.

    Args:
        channel: The parallel channel
        budget: Total power P
        ratios: Ascending gamma1/gamma0 values (default grid if None)
        config: Solver tolerances
        threads: Worker threads; 1 solves the points in order in this thread.
            More than 1 starts its own event loop, so async callers must
            await trace_region_async instead

    Returns:
        One boundary point per ratio, sorted by nondecreasing r1

    Raises:
        ValidationError: For empty, nonpositive or unsorted ratios, or for
            threads > 1 inside a running event loop
        SolverError: A solver failure annotated with its ratio

    """
    ratios = default_ratios() if ratios is None else list(ratios)
    _check_ratios(ratios)
    if threads > 1 and _in_event_loop():
        raise ValidationError(
            "trace_region cannot start worker threads inside a running event "
            "loop; await trace_region_async instead",
            "threads",
            threads,
        )
    if not np.any(channel.in_a):
        logger.warning("Set A is empty: the region has no secrecy rate")
    if threads > 1:
        return anyio.run(trace_region_async, channel, budget, ratios, config, threads)
    results: list[BoundaryPoint | SolverError | None] = []
    for ratio in ratios:
        try:
            results.append(solve_point(channel, budget, ratio, config))
        except SolverError as e:
            results.append(e)
            break
    return _assemble(results)


def _weakly_dominated(r0: np.ndarray, r1: np.ndarray) -> np.ndarray:
    ge = (r0[None, :] >= r0[:, None]) & (r1[None, :] >= r1[:, None])
    gt = (r0[None, :] > r0[:, None]) | (r1[None, :] > r1[:, None])
    return np.any(ge & gt, axis=1)


def gaussian_beta_sweep(
    power: float,
    mu_sq: float,
    nu_sq: float,
    betas: Sequence[float] | None = None,
    prefactor: float = PREFACTOR_REAL,
) -> Boundary:
    """Trace the region of a single Gaussian BCC by its power split beta.

    Args:
        power: Total power P >= 0
        mu_sq: Receiver-1 noise variance
        nu_sq: Receiver-2 noise variance
        betas: Confidential power fractions in [0, 1] (default 101 points)
        prefactor: Rate scale

    Returns:
        The nondominated points of the sweep

    Raises:
        ValidationError: If a beta lies outside [0, 1], or if receiver 2 fails
            to limit the common rate of a channel with mu^2 < nu^2

    """
    betas = default_betas() if betas is None else list(betas)
    for b in betas:
        if not 0.0 <= b <= 1.0:
            raise ValidationError("beta must lie in [0, 1]", "beta", b)
    # validates mu_sq, nu_sq and prefactor
    ParallelChannel.from_pairs([(mu_sq, nu_sq)], prefactor=prefactor)
    if not (math.isfinite(power) and power >= 0):
        raise ValidationError("Power must be finite and >= 0", "P", power)

    beta = np.asarray(betas, dtype=float)
    common = (1.0 - beta) * power
    secret = beta * power
    r01 = prefactor * np.log2(1.0 + common / (mu_sq + secret))
    r02 = prefactor * np.log2(1.0 + common / (nu_sq + secret))
    r1 = prefactor * np.maximum(
        np.log2(1.0 + secret / mu_sq) - np.log2(1.0 + secret / nu_sq), 0.0
    )
    if mu_sq < nu_sq and np.any(r02 > r01):
        raise ValidationError(
            "Receiver 2 must limit the common rate when mu^2 < nu^2", "nu_sq", nu_sq
        )
    r0 = np.minimum(r01, r02)

    keep = ~_weakly_dominated(r0, r1)
    # equal points survive the filter together; keep the first
    seen: set[tuple[float, float]] = set()
    points = []
    for i in np.flatnonzero(keep).tolist():
        key = (float(r0[i]), float(r1[i]))
        if key in seen:
            continue
        seen.add(key)
        points.append(
            BoundaryPoint(
                rate=RatePoint(
                    r0=float(r0[i]),
                    r1=float(r1[i]),
                    r01=float(r01[i]),
                    r02=float(r02[i]),
                ),
                beta=float(beta[i]),
            )
        )
    return make_boundary(points)


def validate_boundary(boundary: Boundary, tol: float = 1e-9) -> list[str]:
    """Check that a boundary is a concave, nondominated frontier.

    Args:
        boundary: The boundary to check
        tol: Slack in bits; weighted sums are compared per unit of the
            larger weight

    Returns:
        Human-readable violations (empty if the boundary is consistent)

    """
    violations: list[str] = []
    points = boundary.points
    r0 = boundary.r0()
    r1 = boundary.r1()

    for i in range(len(points)):
        better = np.flatnonzero((r0 > r0[i] + tol) & (r1 > r1[i] + tol))
        if better.size:
            j = int(better[0])
            violations.append(
                f"point {i} (r0={r0[i]:.9g}, r1={r1[i]:.9g}) is dominated by "
                f"point {j} (r0={r0[j]:.9g}, r1={r1[j]:.9g})"
            )

    for i, point in enumerate(points):
        if point.weights is None:
            continue
        g0, g1 = point.weights.gamma0, point.weights.gamma1
        scale = max(g0, g1)
        scores = (g0 * r0 + g1 * r1) / scale
        j = int(np.argmax(scores))
        if scores[j] > scores[i] + tol:
            violations.append(
                f"point {i} (ratio {point.weights.ratio:.6g}) is beaten on its own "
                f"weights by point {j} by {scores[j] - scores[i]:.3e} bits"
            )
    return violations


def _point_to_polyline(points: np.ndarray, line: np.ndarray) -> np.ndarray:
    if len(line) == 1:
        return np.linalg.norm(points - line[0], axis=1)
    start = line[:-1]
    seg = line[1:] - start
    length_sq = np.maximum((seg**2).sum(axis=1), np.finfo(float).tiny)
    rel = points[:, None, :] - start[None, :, :]
    t = np.clip((rel * seg[None, :, :]).sum(axis=2) / length_sq[None, :], 0.0, 1.0)
    nearest = start[None, :, :] + t[:, :, None] * seg[None, :, :]
    return np.linalg.norm(points[:, None, :] - nearest, axis=2).min(axis=1)


def _as_xy(boundary: Boundary) -> np.ndarray:
    return np.column_stack([boundary.r1(), boundary.r0()])


def frontier_distance(a: Boundary, b: Boundary) -> float:
    """Largest distance from a point of ``a`` to the polyline through ``b``."""
    return float(_point_to_polyline(_as_xy(a), _as_xy(b)).max())


def hausdorff_distance(a: Boundary, b: Boundary) -> float:
    """Sampled Hausdorff distance between two frontiers, in bits.

    Each sampled point is measured against the other frontier's
    piecewise-linear interpolation. Sparse sampling of a curved frontier
    adds the chord sag between neighbouring points.
    """
    return max(frontier_distance(a, b), frontier_distance(b, a))


def case_segments(boundary: Boundary) -> list[tuple[str, int]]:
    """Run-length encoding of case labels in ascending ratio order."""
    tagged = sorted(
        (p for p in boundary.points if p.case is not None and p.ratio is not None),
        key=lambda p: p.ratio,  # type: ignore[arg-type, return-value]
    )
    runs: list[tuple[str, int]] = []
    for point in tagged:
        label = point.case.label  # type: ignore[union-attr]
        if runs and runs[-1][0] == label:
            runs[-1] = (label, runs[-1][1] + 1)
        else:
            runs.append((label, 1))
    return runs
