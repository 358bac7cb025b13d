"""Channel and allocation types with the rate expressions of the parallel BCC.

A parallel Gaussian BCC is a list of subchannels, each described by the noise
variance at the legitimate receiver (``mu_sq``) and at the eavesdropping
receiver (``nu_sq``). Subchannels where receiver 1 is strictly less noisy form
the set A; only there can confidential power buy secrecy rate.

All rates are in bits per channel use. The ``prefactor`` is 1/2 for real
channels and 1 for proper-complex channels.
"""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from secrecy_region.errors import ShapeError, ValidationError

_LN2 = math.log(2.0)

PREFACTOR_REAL = 0.5
PREFACTOR_COMPLEX = 1.0


def _frozen(values: Iterable[float] | np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


def _log2_1p(x: np.ndarray) -> np.ndarray:
    return np.log1p(x) / _LN2


@dataclass(frozen=True, eq=False)
class ParallelChannel:
    """Parallel Gaussian BCC: per-subchannel noise variances and a rate scale.

    Attributes:
        mu_sq: Noise variance at receiver 1, one entry per subchannel
        nu_sq: Noise variance at receiver 2, one entry per subchannel
        prefactor: Rate scale, 1/2 (real) or 1 (proper complex)

    """

    mu_sq: np.ndarray
    nu_sq: np.ndarray
    prefactor: float = PREFACTOR_REAL
    # strict mu_sq < nu_sq; equality belongs to A^c
    in_a: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Freeze the arrays and check the channel invariants."""
        mu = _frozen(self.mu_sq)
        nu = _frozen(self.nu_sq)
        if mu.size == 0:
            raise ValidationError("Channel needs a subchannel", "subchannels")
        if mu.shape != nu.shape:
            raise ShapeError(expected=mu.size, got=nu.size)
        if not (np.all(np.isfinite(mu)) and np.all(mu > 0)):
            raise ValidationError("mu_sq must be finite and > 0", "mu_sq", mu.tolist())
        if not (np.all(np.isfinite(nu)) and np.all(nu > 0)):
            raise ValidationError("nu_sq must be finite and > 0", "nu_sq", nu.tolist())
        if self.prefactor not in (PREFACTOR_REAL, PREFACTOR_COMPLEX):
            raise ValidationError(
                "prefactor must be 0.5 or 1", "prefactor", self.prefactor
            )
        in_a = mu < nu
        in_a.setflags(write=False)
        object.__setattr__(self, "mu_sq", mu)
        object.__setattr__(self, "nu_sq", nu)
        object.__setattr__(self, "in_a", in_a)

    @classmethod
    def from_pairs(
        cls,
        subchannels: Sequence[tuple[float, float]],
        prefactor: float = PREFACTOR_REAL,
    ) -> "ParallelChannel":
        """Build a channel from (mu_sq, nu_sq) pairs."""
        if len(subchannels) == 0:
            raise ValidationError("Channel needs a subchannel", "subchannels")
        mu, nu = zip(*subchannels, strict=True)
        return cls(mu_sq=np.asarray(mu), nu_sq=np.asarray(nu), prefactor=prefactor)

    @property
    def subchannels(self) -> list[tuple[float, float]]:
        """(mu_sq, nu_sq) pairs in order."""
        return list(zip(self.mu_sq.tolist(), self.nu_sq.tolist(), strict=True))

    def __len__(self) -> int:
        """Return the number of subchannels."""
        return int(self.mu_sq.size)

    def __repr__(self) -> str:
        """Return a compact representation."""
        return (
            f"ParallelChannel(L={len(self)}, |A|={int(self.in_a.sum())}, "
            f"prefactor={self.prefactor})"
        )


@dataclass(frozen=True, eq=False)
class Allocation:
    """Per-subchannel common (p0) and confidential (p1) powers."""

    p0: np.ndarray
    p1: np.ndarray

    def __post_init__(self) -> None:
        """Freeze the arrays and check nonnegativity."""
        p0 = _frozen(self.p0)
        p1 = _frozen(self.p1)
        if p0.shape != p1.shape:
            raise ShapeError(expected=p0.size, got=p1.size)
        for name, arr in (("p0", p0), ("p1", p1)):
            if not (np.all(np.isfinite(arr)) and np.all(arr >= 0)):
                raise ValidationError(f"{name} must be finite and >= 0", name)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)

    @classmethod
    def zeros(cls, n: int) -> "Allocation":
        """All-zero allocation over n subchannels."""
        return cls(p0=np.zeros(n), p1=np.zeros(n))

    @classmethod
    def from_entries(cls, entries: Sequence[tuple[float, float]]) -> "Allocation":
        """Build an allocation from (p0, p1) pairs."""
        if len(entries) == 0:
            return cls.zeros(0)
        p0, p1 = zip(*entries, strict=True)
        return cls(p0=np.asarray(p0), p1=np.asarray(p1))

    @property
    def entries(self) -> list[tuple[float, float]]:
        """(p0, p1) pairs in subchannel order."""
        return list(zip(self.p0.tolist(), self.p1.tolist(), strict=True))

    def __len__(self) -> int:
        """Return the number of subchannels."""
        return int(self.p0.size)

    def is_zero(self) -> bool:
        """Whether no power is allocated anywhere."""
        return not (np.any(self.p0 > 0) or np.any(self.p1 > 0))

    def __eq__(self, other: object) -> bool:
        """Compare entry by entry."""
        if not isinstance(other, Allocation):
            return NotImplemented
        return bool(
            np.array_equal(self.p0, other.p0) and np.array_equal(self.p1, other.p1)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Weights:
    """Scalarization weights (gamma0 on the common rate, gamma1 on the secret rate)."""

    gamma0: float
    gamma1: float

    def __post_init__(self) -> None:
        """Reject nonpositive or non-finite weights."""
        for name in ("gamma0", "gamma1"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be finite and > 0", name, value)

    @classmethod
    def from_ratio(cls, ratio: float) -> "Weights":
        """Weights with gamma0 pinned to 1."""
        return cls(gamma0=1.0, gamma1=ratio)

    @property
    def ratio(self) -> float:
        """gamma1 / gamma0."""
        return self.gamma1 / self.gamma0

    def scaled(self, c: float) -> "Weights":
        """Both weights multiplied by c > 0."""
        return Weights(self.gamma0 * c, self.gamma1 * c)


@dataclass(frozen=True)
class RatePoint:
    """Rate pair with both common-rate branches kept."""

    r0: float
    r1: float
    r01: float
    r02: float

    @classmethod
    def from_branches(cls, r01: float, r02: float, r1: float) -> "RatePoint":
        """Build a point with r0 = min(r01, r02)."""
        return cls(r0=min(r01, r02), r1=r1, r01=r01, r02=r02)


class Partition(NamedTuple):
    """Index sets of A (receiver 1 strictly better) and its complement."""

    a: tuple[int, ...]
    a_c: tuple[int, ...]


def classify(channel: ParallelChannel) -> Partition:
    """Split subchannel indices into A and A^c.

    Args:
        channel: The parallel channel

    Returns:
        Partition with l in A iff mu_sq[l] < nu_sq[l]

    """
    idx = np.arange(len(channel))
    return Partition(
        a=tuple(int(i) for i in idx[channel.in_a]),
        a_c=tuple(int(i) for i in idx[~channel.in_a]),
    )


def validate_allocation(channel: ParallelChannel, alloc: Allocation) -> None:
    """Check that an allocation fits a channel.

    Raises:
        ShapeError: If the lengths differ
        ValidationError: If confidential power is placed on A^c

    """
    if len(alloc) != len(channel):
        raise ShapeError(expected=len(channel), got=len(alloc))
    if np.any(alloc.p1[~channel.in_a] > 0):
        raise ValidationError(
            "Confidential power must be zero outside A", "p1", alloc.p1.tolist()
        )


def total_power(alloc: Allocation) -> float:
    """Total transmit power; p1 vanishes on A^c so both powers are summed."""
    return float(alloc.p0.sum() + alloc.p1.sum())


def rate_arrays(
    channel: ParallelChannel, p0: np.ndarray, p1: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate (r01, r02, r1) for a batch of allocations.

    Args:
        channel: The parallel channel
        p0: Common powers, shape (m, L)
        p1: Confidential powers, shape (m, L), zero outside A

    Returns:
        Three arrays of shape (m,)

    """
    p0 = np.atleast_2d(p0)
    p1 = np.atleast_2d(p1)
    if p0.shape[-1] != len(channel) or p1.shape != p0.shape:
        raise ShapeError(expected=len(channel), got=p0.shape[-1])
    mu = channel.mu_sq
    nu = channel.nu_sq
    c = channel.prefactor
    r01 = c * _log2_1p(p0 / (mu + p1)).sum(axis=-1)
    r02 = c * _log2_1p(p0 / (nu + p1)).sum(axis=-1)
    a = channel.in_a
    secrecy = _log2_1p(p1[:, a] / mu[a]) - _log2_1p(p1[:, a] / nu[a])
    r1 = c * secrecy.sum(axis=-1)
    return r01, r02, r1


def rate_r01(channel: ParallelChannel, alloc: Allocation) -> float:
    """Common-rate bound at receiver 1 (mu_sq denominators)."""
    validate_allocation(channel, alloc)
    terms = _log2_1p(alloc.p0 / (channel.mu_sq + alloc.p1))
    return channel.prefactor * float(terms.sum())


def rate_r02(channel: ParallelChannel, alloc: Allocation) -> float:
    """Common-rate bound at receiver 2 (nu_sq denominators)."""
    validate_allocation(channel, alloc)
    terms = _log2_1p(alloc.p0 / (channel.nu_sq + alloc.p1))
    return channel.prefactor * float(terms.sum())


def rate_r1(channel: ParallelChannel, alloc: Allocation) -> float:
    """Secrecy rate of the confidential message, summed over A."""
    validate_allocation(channel, alloc)
    a = channel.in_a
    p1 = alloc.p1[a]
    terms = _log2_1p(p1 / channel.mu_sq[a]) - _log2_1p(p1 / channel.nu_sq[a])
    return channel.prefactor * float(terms.sum())


def rate_point(channel: ParallelChannel, alloc: Allocation) -> RatePoint:
    """Evaluate both common-rate branches and the secrecy rate."""
    return RatePoint.from_branches(
        r01=rate_r01(channel, alloc),
        r02=rate_r02(channel, alloc),
        r1=rate_r1(channel, alloc),
    )


def weighted_objective(
    channel: ParallelChannel, weights: Weights, alloc: Allocation
) -> float:
    """Scalarized objective gamma0 * min(r01, r02) + gamma1 * r1."""
    point = rate_point(channel, alloc)
    return weights.gamma0 * point.r0 + weights.gamma1 * point.r1


def lagrangian(
    channel: ParallelChannel, weights: Weights, alloc: Allocation, lam: float
) -> float:
    """Weighted objective minus the priced budget.

    ``lam`` is in the real-channel normalization (water level
    gamma0 / (2 lam ln 2)), so the price per unit power is
    2 * prefactor * lam.
    """
    price = 2.0 * channel.prefactor * lam
    return weighted_objective(channel, weights, alloc) - price * total_power(alloc)


def gaussian_secrecy_capacity(
    power: float, mu_sq: float, nu_sq: float, prefactor: float = PREFACTOR_REAL
) -> float:
    """Secrecy capacity of a single Gaussian wiretap channel."""
    if power < 0:
        raise ValidationError("Power must be >= 0", "P", power)
    gap = math.log2(1.0 + power / mu_sq) - math.log2(1.0 + power / nu_sq)
    return prefactor * max(gap, 0.0)


def db_to_linear(p_db: float) -> float:
    """Convert a power in dB to linear scale."""
    return float(10.0 ** (p_db / 10.0))
