"""Tests for channel types and rate expressions."""

import math

import numpy as np
import pytest

from secrecy_region.channel_model import (
    PREFACTOR_COMPLEX,
    Allocation,
    ParallelChannel,
    RatePoint,
    Weights,
    classify,
    db_to_linear,
    gaussian_secrecy_capacity,
    lagrangian,
    rate_arrays,
    rate_point,
    rate_r01,
    rate_r02,
    rate_r1,
    total_power,
    weighted_objective,
)
from secrecy_region.errors import ShapeError, ValidationError


@pytest.fixture
def example_channel():
    """L=1 channel with mu^2 = 1 and nu^2 = 3."""
    return ParallelChannel.from_pairs([(1.0, 3.0)])


@pytest.fixture
def example_alloc():
    """p0 = 2, p1 = 1."""
    return Allocation.from_entries([(2.0, 1.0)])


class TestParallelChannel:
    """Tests for ParallelChannel."""

    def test_arrays_are_read_only(self, mixed_channel):
        """Channel arrays should not be writable."""
        with pytest.raises(ValueError):
            mixed_channel.mu_sq[0] = 5.0

    def test_rejects_nonpositive_noise(self):
        """Noise variances must be positive."""
        with pytest.raises(ValidationError, match="mu_sq"):
            ParallelChannel.from_pairs([(0.0, 1.0)])
        with pytest.raises(ValidationError, match="nu_sq"):
            ParallelChannel.from_pairs([(1.0, -2.0)])

    def test_rejects_empty_channel(self):
        """A channel needs a subchannel."""
        with pytest.raises(ValidationError):
            ParallelChannel.from_pairs([])

    def test_rejects_bad_prefactor(self):
        """Only the real and complex prefactors are allowed."""
        with pytest.raises(ValidationError, match="prefactor"):
            ParallelChannel.from_pairs([(1.0, 2.0)], prefactor=0.7)

    def test_subchannels_round_trip(self):
        """Subchannel pairs should come back in order."""
        pairs = [(1.0, 4.0), (2.0, 1.0)]
        assert ParallelChannel.from_pairs(pairs).subchannels == pairs


class TestClassify:
    """Tests for the A / A^c partition."""

    def test_strict_inequality(self):
        """Receiver 1 strictly better puts the subchannel in A."""
        channel = ParallelChannel.from_pairs([(1.0, 4.0), (2.0, 1.0)])
        assert classify(channel) == ((0,), (1,))

    def test_equality_goes_to_complement(self):
        """Equal noise variances belong to A^c."""
        channel = ParallelChannel.from_pairs([(1.0, 1.0)])
        assert classify(channel) == ((), (0,))

    def test_three_subchannels(self):
        """Partition covers all indices."""
        channel = ParallelChannel.from_pairs([(0.5, 2.0), (0.5, 0.6), (3.0, 2.0)])
        part = classify(channel)
        assert part.a == (0, 1)
        assert part.a_c == (2,)


class TestRates:
    """Tests for the rate expressions."""

    def test_example_branches(self, example_channel, example_alloc):
        """Hand-evaluated common-rate branches."""
        assert rate_r01(example_channel, example_alloc) == pytest.approx(0.5)
        assert rate_r02(example_channel, example_alloc) == pytest.approx(
            0.5 * math.log2(1.5)
        )
        assert rate_r02(example_channel, example_alloc) == pytest.approx(
            0.29248, abs=1e-5
        )

    def test_example_secrecy_rate(self, example_channel, example_alloc):
        """Hand-evaluated secrecy rate."""
        assert rate_r1(example_channel, example_alloc) == pytest.approx(
            0.5 * (1.0 - math.log2(4.0 / 3.0))
        )

    def test_example_rate_point(self, example_channel, example_alloc):
        """rate_point composes the three rates with r0 = min."""
        point = rate_point(example_channel, example_alloc)
        assert point.r01 == pytest.approx(0.5)
        assert point.r0 == point.r02
        assert point.r0 == pytest.approx(0.29248, abs=1e-5)
        assert point.r1 == pytest.approx(0.29248, abs=1e-5)

    def test_example_weighted_objective(self, example_channel, example_alloc):
        """Objective with unit weights is r0 + r1."""
        value = weighted_objective(example_channel, Weights(1.0, 1.0), example_alloc)
        assert value == pytest.approx(0.58496, abs=1e-5)

    def test_two_subchannels_term_by_term(self):
        """L=2 rates match a scalar re-evaluation."""
        channel = ParallelChannel.from_pairs([(1.0, 4.0), (2.0, 1.0)])
        alloc = Allocation.from_entries([(1.0, 1.0), (2.0, 0.0)])
        r01 = 0.5 * (math.log2(1 + 1 / (1 + 1)) + math.log2(1 + 2 / 2))
        r02 = 0.5 * (math.log2(1 + 1 / (4 + 1)) + math.log2(1 + 2 / 1))
        r1 = 0.5 * (math.log2(1 + 1 / 1) - math.log2(1 + 1 / 4))
        point = rate_point(channel, alloc)
        assert point.r01 == pytest.approx(r01, rel=1e-14)
        assert point.r02 == pytest.approx(r02, rel=1e-14)
        assert point.r1 == pytest.approx(r1, rel=1e-14)

    def test_zero_allocation(self, mixed_channel):
        """Zero power gives the origin."""
        point = rate_point(mixed_channel, Allocation.zeros(3))
        assert point == RatePoint(0.0, 0.0, 0.0, 0.0)
        zero = weighted_objective(mixed_channel, Weights(2.0, 5.0), Allocation.zeros(3))
        assert zero == 0

    def test_a_empty_secrecy_rate_is_zero(self, a_empty_channel):
        """No subchannel in A means no secrecy rate."""
        alloc = Allocation.from_entries([(3.0, 0.0)])
        assert rate_r1(a_empty_channel, alloc) == 0.0

    def test_shape_mismatch(self, single_channel):
        """Allocation length must match the channel."""
        with pytest.raises(ShapeError):
            rate_r01(single_channel, Allocation.zeros(2))

    def test_confidential_power_outside_a(self, a_empty_channel):
        """p1 > 0 on A^c is rejected."""
        with pytest.raises(ValidationError, match="outside A"):
            rate_point(a_empty_channel, Allocation.from_entries([(1.0, 1.0)]))

    def test_negative_power_rejected(self):
        """Powers must be nonnegative."""
        with pytest.raises(ValidationError):
            Allocation.from_entries([(-1.0, 0.0)])

    def test_prefactor_linearity(self):
        """Complex-channel rates are twice the real-channel rates."""
        pairs = [(0.5, 2.0), (1.5, 0.8)]
        real = ParallelChannel.from_pairs(pairs)
        cplx = ParallelChannel.from_pairs(pairs, prefactor=PREFACTOR_COMPLEX)
        alloc = Allocation.from_entries([(1.0, 0.7), (0.4, 0.0)])
        a = rate_point(real, alloc)
        b = rate_point(cplx, alloc)
        assert b.r01 == 2 * a.r01
        assert b.r02 == 2 * a.r02
        assert b.r1 == 2 * a.r1

    def test_secrecy_rate_monotone_in_confidential_power(self, mixed_channel):
        """More p1 on A does not lower r1."""
        previous = -1.0
        for p1 in np.linspace(0.0, 5.0, 21):
            alloc = Allocation(p0=np.ones(3), p1=np.array([p1, 0.3, 0.0]))
            r1 = rate_r1(mixed_channel, alloc)
            assert r1 >= previous
            previous = r1

    def test_complement_common_power_does_not_touch_secrecy(self, mixed_channel):
        """p0 on A^c leaves r1 unchanged."""
        a = Allocation(p0=np.array([1.0, 1.0, 0.0]), p1=np.array([0.5, 0.5, 0.0]))
        b = Allocation(p0=np.array([1.0, 1.0, 7.0]), p1=np.array([0.5, 0.5, 0.0]))
        assert rate_r1(mixed_channel, a) == rate_r1(mixed_channel, b)

    def test_branch_dominance_without_confidential_power(self):
        """On channels with mu^2 <= nu^2 everywhere, p1 = 0 gives r01 >= r02."""
        channel = ParallelChannel.from_pairs([(0.5, 2.0), (1.0, 1.0), (0.9, 3.0)])
        rng = np.random.default_rng(3)
        for _ in range(20):
            alloc = Allocation(p0=rng.uniform(0, 4, 3), p1=np.zeros(3))
            point = rate_point(channel, alloc)
            assert point.r01 >= point.r02

    def test_rate_arrays_match_scalar_rates(self, mixed_channel):
        """Batch evaluation agrees with rate_point."""
        rng = np.random.default_rng(11)
        p0 = rng.uniform(0, 2, (5, 3))
        p1 = rng.uniform(0, 2, (5, 3))
        p1[:, 2] = 0.0
        r01, r02, r1 = rate_arrays(mixed_channel, p0, p1)
        for i in range(5):
            point = rate_point(mixed_channel, Allocation(p0=p0[i], p1=p1[i]))
            assert r01[i] == pytest.approx(point.r01, rel=1e-13)
            assert r02[i] == pytest.approx(point.r02, rel=1e-13)
            assert r1[i] == pytest.approx(point.r1, rel=1e-13, abs=1e-15)


class TestWeights:
    """Tests for scalarization weights."""

    @pytest.mark.parametrize("gamma0, gamma1", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
    def test_rejects_nonpositive(self, gamma0, gamma1):
        """Both weights must be strictly positive."""
        with pytest.raises(ValidationError):
            Weights(gamma0, gamma1)

    def test_from_ratio(self):
        """gamma0 is pinned to 1."""
        weights = Weights.from_ratio(4.0)
        assert weights.gamma0 == 1.0
        assert weights.ratio == 4.0

    def test_objective_homogeneity(self, example_channel, example_alloc):
        """Scaling both weights scales the objective."""
        weights = Weights(0.7, 1.3)
        base = weighted_objective(example_channel, weights, example_alloc)
        scaled = weighted_objective(example_channel, weights.scaled(3.0), example_alloc)
        assert scaled == pytest.approx(3.0 * base, rel=1e-14)


class TestHelpers:
    """Tests for power and conversion helpers."""

    def test_total_power(self):
        """Total power sums both messages."""
        alloc = Allocation.from_entries([(1.0, 0.5), (2.0, 0.0)])
        assert total_power(alloc) == 3.5

    def test_lagrangian_prices_the_budget(self, example_channel, example_alloc):
        """The Lagrangian subtracts 2 * prefactor * lambda * power."""
        weights = Weights(1.0, 1.0)
        objective = weighted_objective(example_channel, weights, example_alloc)
        value = lagrangian(example_channel, weights, example_alloc, lam=0.25)
        assert value == pytest.approx(objective - 2 * 0.5 * 0.25 * 3.0)

    def test_gaussian_secrecy_capacity(self):
        """Wiretap secrecy capacity with the positive-part clamp."""
        assert gaussian_secrecy_capacity(2.0, 1.0, 2.0) == pytest.approx(
            0.5 * (math.log2(3.0) - 1.0)
        )
        assert gaussian_secrecy_capacity(2.0, 2.0, 1.0) == 0.0

    def test_db_to_linear(self):
        """5 dB is 10^0.5."""
        assert db_to_linear(5.0) == pytest.approx(10**0.5)
        assert db_to_linear(0.0) == 1.0
