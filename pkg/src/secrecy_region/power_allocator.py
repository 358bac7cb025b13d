"""Boundary-achieving power allocations for the parallel Gaussian BCC.

Every boundary point maximizes gamma0 * min(R01, R02) + gamma1 * R1 under the
total power budget. The optimum has one of three closed forms:

- Case 1: the receiver-1 branch R01 is active (R01 < R02),
- Case 2: the receiver-2 branch R02 is active (R01 > R02),
- Case 3: both are balanced (R01 = R02) by an interpolation weight alpha on
  the R01 branch; alpha = 1 coincides with Case 1 and alpha = 0 with Case 2.

Each closed form is parameterized by the budget multiplier lambda through the
water level w = gamma0 / (2 lambda ln 2). Total power is nonincreasing in
lambda, so lambda is found by bracketing and geometric bisection, and alpha
by scanning for a sign change of R01 - R02 and refining with Brent's method.
"""

import enum
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from secrecy_region.channel_model import (
    Allocation,
    ParallelChannel,
    RatePoint,
    Weights,
    rate_point,
)
from secrecy_region.config import SolverConfig
from secrecy_region.errors import ConvergenceError, NoRootError, ValidationError

logger = logging.getLogger("secrecy_region.power_allocator")

_LN2 = math.log(2.0)

# equispaced alpha values scanned before refining a root
ALPHA_SCAN_POINTS = 33


@dataclass(frozen=True)
class CaseTag:
    """Which closed-form family an allocation comes from."""

    case: int
    alpha: float | None = None

    def __post_init__(self) -> None:
        """Check the tag is well formed."""
        if self.case not in (1, 2, 3):
            raise ValidationError("case must be 1, 2 or 3", "case", self.case)
        if self.case == 3:
            if self.alpha is None or not 0.0 <= self.alpha <= 1.0:
                raise ValidationError("alpha must lie in [0, 1]", "alpha", self.alpha)
        elif self.alpha is not None:
            raise ValidationError("only Case 3 carries alpha", "alpha", self.alpha)

    @classmethod
    def case3(cls, alpha: float) -> "CaseTag":
        """Case 3 with interpolation weight alpha on the R01 branch."""
        return cls(3, alpha)

    @property
    def label(self) -> str:
        """Short name, e.g. ``Case3``."""
        return f"Case{self.case}"

    def __str__(self) -> str:
        """Return the label, with alpha for Case 3."""
        if self.case == 3:
            return f"Case3(alpha={self.alpha:.6g})"
        return self.label


CASE1 = CaseTag(1)
CASE2 = CaseTag(2)


class Ordering(enum.Enum):
    """Relative order of the two common-rate branches."""

    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"


class CaseCheck(NamedTuple):
    """Branch ordering of an allocation and whether it fits its case."""

    ordering: Ordering
    holds: bool


class LambdaSolution(NamedTuple):
    """Allocation meeting the budget for one case."""

    lam: float
    alloc: Allocation
    bracket: tuple[float, float]
    iterations: int


@dataclass(frozen=True)
class Solution:
    """Accepted allocation of the three-step search."""

    alloc: Allocation
    case: CaseTag
    lam: float
    rate: RatePoint


def _case_powers(
    case: CaseTag, channel: ParallelChannel, weights: Weights, lam: float
) -> tuple[np.ndarray, np.ndarray]:
    mu = channel.mu_sq
    nu = channel.nu_sq
    in_a = channel.in_a
    ratio = weights.ratio
    w = weights.gamma0 / (2.0 * lam * _LN2)
    d = nu - mu

    p0 = np.zeros(mu.shape)
    p1 = np.zeros(mu.shape)

    if case.case == 1:
        shift = nu
    elif case.case == 2:
        shift = mu
    else:
        alpha = float(case.alpha)  # type: ignore[arg-type]
        shift = alpha * nu + (1.0 - alpha) * mu
        # (d - w)^2 + 4 alpha w d is a convex combination of two squares
        root = np.sqrt(np.maximum((d - w) ** 2 + 4.0 * alpha * w * d, 0.0))

    # on A the threshold test gamma1/gamma0 > shift / d selects the two-power branch
    two_power = in_a & (ratio * np.where(in_a, d, 1.0) > shift)
    common_only = ~two_power

    if np.any(two_power):
        da = d[two_power]
        mua = mu[two_power]
        nua = nu[two_power]
        # secrecy-only stationary point, (mu^2 + p)(nu^2 + p) = gamma1 d / (2 lam ln 2)
        # written without cancellation for nu^2 >> mu^2 (floored fading gains)
        sqrt_branch = (2.0 * (ratio * w * da - mua * nua)) / (
            np.sqrt(da * (da + 4.0 * ratio * w)) + mua + nua
        )
        threshold_branch = ratio * da - shift[two_power]
        p1[two_power] = np.maximum(np.minimum(sqrt_branch, threshold_branch), 0.0)
        if case.case == 1:
            p0[two_power] = np.maximum(w - (ratio - 1.0) * da, 0.0)
        elif case.case == 2:
            p0[two_power] = np.maximum(w - (ratio + 1.0) * da, 0.0)
        else:
            p0[two_power] = np.maximum(
                0.5 * root[two_power] + 0.5 * w - (ratio - alpha + 0.5) * da, 0.0
            )

    # A below the threshold and all of A^c carry common power only
    if case.case == 1:
        p0[common_only] = np.maximum(w - mu[common_only], 0.0)
    elif case.case == 2:
        p0[common_only] = np.maximum(w - nu[common_only], 0.0)
    else:
        p0[common_only] = np.maximum(
            0.5 * root[common_only]
            - 0.5 * (mu[common_only] + nu[common_only] - w),
            0.0,
        )
    return p0, p1


def _check_lambda(lam: float) -> None:
    if not (math.isfinite(lam) and lam > 0):
        raise ValidationError("lambda must be finite and > 0", "lambda", lam)


def case_allocation(
    case: CaseTag, channel: ParallelChannel, weights: Weights, lam: float
) -> Allocation:
    """Closed-form allocation of one case at a given multiplier.

    Args:
        case: Case 1, 2, or 3 with its alpha
        channel: The parallel channel
        weights: Scalarization weights
        lam: Budget multiplier, > 0

    Returns:
        Allocation with every power clamped at zero and no confidential
        power outside A

    Raises:
        ValidationError: If lam is not positive

    """
    _check_lambda(lam)
    p0, p1 = _case_powers(case, channel, weights, lam)
    return Allocation(p0=p0, p1=p1)


def initial_lambda(channel: ParallelChannel, weights: Weights, budget: float) -> float:
    """Multiplier whose water level is P / L above the largest mu_sq."""
    level = budget / len(channel) + float(channel.mu_sq.max())
    return weights.gamma0 / (2.0 * _LN2 * level)


def solve_lambda(
    case: CaseTag,
    channel: ParallelChannel,
    weights: Weights,
    budget: float,
    config: SolverConfig | None = None,
) -> LambdaSolution:
    """Find the multiplier at which a case's allocation spends the budget.

    Args:
        case: Allocation family
        channel: The parallel channel
        weights: Scalarization weights
        budget: Total power P >= 0
        config: Solver tolerances

    Returns:
        The multiplier, its allocation, the final bracket and the iteration count

    Raises:
        ValidationError: If the budget is negative
        ConvergenceError: If bracketing or bisection exceeds max_iters

    """
    config = config or SolverConfig()
    if not (math.isfinite(budget) and budget >= 0):
        raise ValidationError("Power budget must be finite and >= 0", "P", budget)

    growth = config.lambda_bracket_growth
    tol = config.lambda_tol * max(budget, 1.0)

    def total(lam: float) -> float:
        p0, p1 = _case_powers(case, channel, weights, lam)
        return float(p0.sum() + p1.sum())

    lam0 = initial_lambda(channel, weights, budget)
    lo = hi = lam0
    iterations = 0

    if budget == 0:
        # any multiplier with an empty water level will do
        while total(hi) > 0:
            iterations += 1
            if iterations > config.max_iters:
                raise ConvergenceError(
                    "Could not empty the allocation for a zero budget",
                    bracket=(lo, hi),
                    iterations=iterations,
                    case=str(case),
                )
            lo, hi = hi, hi * growth
        return LambdaSolution(
            hi, Allocation.zeros(len(channel)), (lo, hi), iterations
        )

    t_lo = total(lo)
    if abs(t_lo - budget) <= tol:
        return LambdaSolution(
            lo, case_allocation(case, channel, weights, lo), (lo, lo), 0
        )

    # widen until total(lo) >= P >= total(hi)
    while t_lo < budget:
        iterations += 1
        if iterations > config.max_iters:
            raise ConvergenceError(
                "Lower lambda bracket not found",
                bracket=(lo, hi),
                iterations=iterations,
                case=str(case),
            )
        hi = lo
        lo = lo / growth
        t_lo = total(lo)
    t_hi = total(hi)
    while t_hi > budget:
        iterations += 1
        if iterations > config.max_iters:
            raise ConvergenceError(
                "Upper lambda bracket not found",
                bracket=(lo, hi),
                iterations=iterations,
                case=str(case),
            )
        lo = hi
        hi = hi * growth
        t_hi = total(hi)
    logger.debug(f"{case}: lambda bracket [{lo:.6g}, {hi:.6g}] after {iterations}")

    for step in range(config.max_iters):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            # bracket collapsed to adjacent doubles
            break
        t_mid = total(mid)
        if abs(t_mid - budget) <= tol:
            return LambdaSolution(
                mid,
                case_allocation(case, channel, weights, mid),
                (lo, hi),
                iterations + step + 1,
            )
        if t_mid > budget:
            lo = mid
        else:
            hi = mid

    raise ConvergenceError(
        f"Power budget not met within {config.lambda_tol:g} relative tolerance",
        bracket=(lo, hi),
        iterations=iterations + config.max_iters,
        case=str(case),
    )


def check_case_condition(
    case: CaseTag,
    channel: ParallelChannel,
    alloc: Allocation,
    alpha_tol: float = 1e-6,
) -> CaseCheck:
    """Compare the two common-rate branches of an allocation.

    Args:
        case: The case the allocation claims to be
        channel: The parallel channel
        alloc: The allocation
        alpha_tol: Branches within this many bits count as equal

    Returns:
        The ordering of (R01, R02) and whether it is the one the case needs:
        less for Case 1, greater for Case 2, equal for Case 3

    """
    point = rate_point(channel, alloc)
    gap = point.r01 - point.r02
    if abs(gap) <= alpha_tol:
        ordering = Ordering.EQUAL
    elif gap < 0:
        ordering = Ordering.LESS
    else:
        ordering = Ordering.GREATER
    expected = {1: Ordering.LESS, 2: Ordering.GREATER, 3: Ordering.EQUAL}[case.case]
    return CaseCheck(ordering, ordering is expected)


def candidate_allocations(
    channel: ParallelChannel,
    weights: Weights,
    budget: float,
    config: SolverConfig | None = None,
) -> dict[CaseTag, LambdaSolution]:
    """Budget-meeting Case 1 and Case 2 allocations, accepted or not."""
    return {
        CASE1: solve_lambda(CASE1, channel, weights, budget, config),
        CASE2: solve_lambda(CASE2, channel, weights, budget, config),
    }


def _branch_gap(channel: ParallelChannel, alloc: Allocation) -> float:
    point = rate_point(channel, alloc)
    return point.r01 - point.r02


def _solution(
    channel: ParallelChannel, case: CaseTag, solved: LambdaSolution
) -> Solution:
    return Solution(
        alloc=solved.alloc,
        case=case,
        lam=solved.lam,
        rate=rate_point(channel, solved.alloc),
    )


def _search_alpha(
    channel: ParallelChannel,
    weights: Weights,
    budget: float,
    config: SolverConfig,
) -> Solution:
    solved: dict[float, LambdaSolution] = {}

    def gap(alpha: float) -> float:
        if alpha not in solved:
            solved[alpha] = solve_lambda(
                CaseTag.case3(alpha), channel, weights, budget, config
            )
        return _branch_gap(channel, solved[alpha].alloc)

    # g(alpha) need not be monotone, so look for any sign change
    alphas = np.linspace(0.0, 1.0, ALPHA_SCAN_POINTS).tolist()
    scanned = [(a, gap(a)) for a in alphas]

    for a, g in scanned:
        if abs(g) <= config.alpha_tol:
            return _solution(channel, CaseTag.case3(a), solved[a])

    for (a_left, g_left), (a_right, g_right) in zip(
        scanned, scanned[1:], strict=False
    ):
        if g_left * g_right < 0:
            try:
                root = brentq(
                    gap,
                    a_left,
                    a_right,
                    xtol=1e-15,
                    maxiter=config.max_iters,
                )
            except RuntimeError as e:
                logger.debug(f"Brent search on [{a_left:.4f}, {a_right:.4f}]: {e}")
                continue
            root = min(max(float(root), 0.0), 1.0)
            if abs(gap(root)) <= config.alpha_tol:
                logger.debug(f"Case 3 root alpha={root:.9f}")
                return _solution(channel, CaseTag.case3(root), solved[root])
            logger.debug(
                f"Brent step on [{a_left:.4f}, {a_right:.4f}] left gap "
                f"{gap(root):.3e} above alpha_tol"
            )

    raise NoRootError(
        "No alpha in [0, 1] balances R01 and R02",
        scanned=scanned,
    )


def optimal_allocation(
    channel: ParallelChannel,
    weights: Weights,
    budget: float,
    config: SolverConfig | None = None,
) -> Solution:
    """Three-step search for the boundary-achieving allocation.

    Step 1 accepts the Case 1 allocation if R01 < R02, Step 2 accepts the
    Case 2 allocation if R01 > R02, Step 3 searches alpha with R01 = R02.
    A tie at Step 1 (Step 2) is accepted as Case 3 with alpha = 1 (alpha = 0),
    which is the same allocation.

    Args:
        channel: The parallel channel
        weights: Scalarization weights, both > 0
        budget: Total power P >= 0
        config: Solver tolerances

    Returns:
        The accepted allocation with its case tag, multiplier and rates

    Raises:
        ValidationError: For a negative budget
        ConvergenceError: If a multiplier search fails
        NoRootError: If Steps 1 and 2 fail and no alpha balances the branches

    """
    config = config or SolverConfig()

    step1 = solve_lambda(CASE1, channel, weights, budget, config)
    check = check_case_condition(CASE1, channel, step1.alloc, config.alpha_tol)
    if check.holds:
        logger.debug(f"ratio {weights.ratio:.6g}: Case 1 accepted")
        return _solution(channel, CASE1, step1)
    if check.ordering is Ordering.EQUAL:
        logger.debug(f"ratio {weights.ratio:.6g}: Case 1 tie, tagged Case 3")
        return _solution(channel, CaseTag.case3(1.0), step1)

    step2 = solve_lambda(CASE2, channel, weights, budget, config)
    check = check_case_condition(CASE2, channel, step2.alloc, config.alpha_tol)
    if check.holds:
        logger.debug(f"ratio {weights.ratio:.6g}: Case 2 accepted")
        return _solution(channel, CASE2, step2)
    if check.ordering is Ordering.EQUAL:
        logger.debug(f"ratio {weights.ratio:.6g}: Case 2 tie, tagged Case 3")
        return _solution(channel, CaseTag.case3(0.0), step2)

    solution = _search_alpha(channel, weights, budget, config)
    logger.debug(f"ratio {weights.ratio:.6g}: {solution.case} accepted")
    return solution
