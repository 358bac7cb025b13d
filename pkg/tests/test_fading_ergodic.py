"""Tests for ergodic fading regions."""

import math

import numpy as np
import pytest

from secrecy_region.channel_model import (
    PREFACTOR_COMPLEX,
    ParallelChannel,
    total_power,
)
from secrecy_region.errors import ValidationError
from secrecy_region.fading_ergodic import (
    GAIN_FLOOR,
    Empirical,
    FadingSpec,
    Rayleigh,
    StateSet,
    batch_standard_error,
    boundary_for_states,
    ergodic_boundary,
    ergodic_rate_point,
    ergodic_secrecy_capacity,
    max_rates,
    prob_a,
    sample_states,
    to_parallel_channel,
)
from secrecy_region.power_allocator import CASE1, CASE2, CaseTag
from secrecy_region.region_tracer import (
    Boundary,
    default_ratios,
    trace_region,
    validate_boundary,
)

P_5DB = 10**0.5
SEED = 2024


def case_rank(tag: CaseTag) -> int:
    """Order Case 2 < Case 3 < Case 1, with boundary alphas on their side."""
    if tag == CASE2 or (tag.case == 3 and tag.alpha == 0.0):
        return 0
    if tag == CASE1 or (tag.case == 3 and tag.alpha == 1.0):
        return 2
    return 1


class TestGainModels:
    """Tests for fading distributions."""

    @pytest.mark.parametrize("sigmas", [(0.0, 1.0), (1.0, -0.5), (math.inf, 1.0)])
    def test_rayleigh_needs_positive_means(self, sigmas):
        """Both sigmas must be positive and finite."""
        with pytest.raises(ValidationError):
            Rayleigh(*sigmas)

    def test_empirical_rejects_empty(self):
        """An empirical model needs at least one state."""
        with pytest.raises(ValidationError):
            Empirical(())

    def test_empirical_rejects_negative_gain(self):
        """Gains are powers, so nonnegative."""
        with pytest.raises(ValidationError):
            Empirical(((1.0, -0.1),))

    def test_empirical_normalizes_gains(self):
        """Gains are stored as float tuples."""
        model = Empirical([(1, 2), (3, 0)])
        assert model.gains == ((1.0, 2.0), (3.0, 0.0))

    def test_spec_prefactor_is_complex(self):
        """Fading rates use the proper-complex prefactor."""
        spec = FadingSpec(Rayleigh(1.0, 1.0))
        assert spec.prefactor == PREFACTOR_COMPLEX

    def test_spec_rejects_bad_noise(self):
        """Noise variances must be positive."""
        with pytest.raises(ValidationError):
            FadingSpec(Rayleigh(1.0, 1.0), mu_sq=0.0)


class TestSampleStates:
    """Tests for state sampling."""

    def test_empirical_verbatim(self):
        """Empirical gains come back unchanged and unseeded."""
        gains = ((2.0, 0.5), (0.1, 3.0), (1.0, 1.0))
        states = sample_states(FadingSpec(Empirical(gains)), 1, seed=7)
        assert states.states == list(gains)
        assert states.seed is None
        assert states.n_states == 3

    def test_rayleigh_means(self):
        """Sample means of unit-mean gains are within 2% of 1."""
        states = sample_states(FadingSpec(Rayleigh(1.0, 1.0)), 100_000, seed=SEED)
        assert states.g1.mean() == pytest.approx(1.0, rel=0.02)
        assert states.g2.mean() == pytest.approx(1.0, rel=0.02)

    def test_rayleigh_mean_follows_sigma(self):
        """sigma is the mean of the exponential gain."""
        states = sample_states(FadingSpec(Rayleigh(1.0, 0.4)), 100_000, seed=SEED)
        assert states.g2.mean() == pytest.approx(0.4, rel=0.02)

    def test_deterministic(self):
        """The same seed gives the same states."""
        spec = FadingSpec(Rayleigh(1.0, 0.7))
        a = sample_states(spec, 1000, seed=3)
        b = sample_states(spec, 1000, seed=3)
        np.testing.assert_array_equal(a.g1, b.g1)
        np.testing.assert_array_equal(a.g2, b.g2)

    def test_sigma2_rescales_the_same_draws(self):
        """Changing sigma2 under a fixed seed keeps g1 and rescales g2."""
        a = sample_states(FadingSpec(Rayleigh(1.0, 1.0)), 500, seed=11)
        b = sample_states(FadingSpec(Rayleigh(1.0, 0.4)), 500, seed=11)
        np.testing.assert_array_equal(a.g1, b.g1)
        np.testing.assert_allclose(b.g2, 0.4 * a.g2, rtol=1e-12)

    def test_rejects_zero_states(self):
        """n_states must be at least 1."""
        with pytest.raises(ValidationError):
            sample_states(FadingSpec(Rayleigh(1.0, 1.0)), 0)


class TestStateSet:
    """Tests for the state container."""

    def test_weights_sum_to_one(self):
        """Every state has probability 1/N."""
        states = StateSet(g1=np.ones(8), g2=np.ones(8))
        assert states.weights.sum() == pytest.approx(1.0)
        assert states.weights[0] == 0.125

    def test_read_only(self):
        """Gain arrays cannot be modified."""
        states = StateSet(g1=[1.0, 2.0], g2=[0.5, 0.5])
        with pytest.raises(ValueError):
            states.g1[0] = 3.0

    def test_mismatched_arrays(self):
        """g1 and g2 must have the same length."""
        with pytest.raises(ValidationError):
            StateSet(g1=[1.0, 2.0], g2=[1.0])

    def test_split(self):
        """Batches are contiguous and cover every state."""
        states = StateSet(g1=np.arange(1.0, 11.0), g2=np.ones(10), seed=5)
        batches = states.split(3)
        assert [b.n_states for b in batches] == [4, 3, 3]
        np.testing.assert_array_equal(
            np.concatenate([b.g1 for b in batches]), states.g1
        )
        assert all(b.seed == 5 for b in batches)


class TestToParallelChannel:
    """Tests for the state-to-subchannel mapping."""

    def test_effective_noise(self):
        """(g1, g2) = (2, 0.5) with unit noise maps to (0.5, 2) in A."""
        states = StateSet(g1=[2.0], g2=[0.5])
        channel, scale = to_parallel_channel(states, 1.0, 1.0)
        assert channel.subchannels == [(0.5, 2.0)]
        assert channel.in_a.tolist() == [True]
        assert channel.prefactor == PREFACTOR_COMPLEX
        assert scale == 1.0

    def test_equal_gains_are_in_complement(self):
        """Equal effective noise belongs to A^c."""
        channel, _ = to_parallel_channel(StateSet(g1=[1.0], g2=[1.0]), 1.0, 1.0)
        assert channel.in_a.tolist() == [False]

    def test_eavesdropper_outage_is_floored(self):
        """g2 = 0 maps to nu^2 / GAIN_FLOOR."""
        channel, _ = to_parallel_channel(StateSet(g1=[1.0], g2=[0.0]), 1.0, 2.0)
        assert channel.nu_sq[0] == pytest.approx(2.0 / GAIN_FLOOR)
        assert channel.in_a.tolist() == [True]

    def test_power_scale(self):
        """The power scale is 1/N."""
        _, scale = to_parallel_channel(StateSet(g1=np.ones(4), g2=np.ones(4)), 1, 1)
        assert scale == 0.25

    def test_outage_state_leaks_nothing(self):
        """A state the eavesdropper cannot hear gives nearly its full rate."""
        spec = FadingSpec(Empirical(((1.0, 0.0),)))
        states = sample_states(spec, 1)
        point = ergodic_rate_point(spec, states, 3.0, 1e3)
        assert point.rate.r1 == pytest.approx(math.log2(1.0 + 3.0), abs=1e-6)

    def test_prob_a(self):
        """P(A) counts states where receiver 1 is strictly better."""
        states = StateSet(g1=[2.0, 1.0, 0.5, 3.0], g2=[1.0, 1.0, 1.0, 0.1])
        assert prob_a(states, 1.0, 1.0) == 0.5


class TestErgodicBoundary:
    """Tests for ergodic boundary tracing."""

    def test_complement_state_has_no_secrecy(self):
        """A single state in A^c gives r1 = 0 everywhere."""
        spec = FadingSpec(Empirical(((0.5, 2.0),)))
        boundary = ergodic_boundary(spec, 2.0, 1, ratios=default_ratios(11))
        assert np.all(boundary.r1() == 0.0)

    def test_single_state_matches_parallel_channel(self):
        """One empirical state is the static channel with prefactor 1."""
        spec = FadingSpec(Empirical(((2.0, 0.5),)))
        ratios = default_ratios(15)
        ergodic = ergodic_boundary(spec, 2.0, 1, ratios=ratios)
        channel = ParallelChannel.from_pairs(
            [(0.5, 2.0)], prefactor=PREFACTOR_COMPLEX
        )
        static = trace_region(channel, 2.0, ratios)
        np.testing.assert_allclose(ergodic.r0(), static.r0(), atol=1e-12)
        np.testing.assert_allclose(ergodic.r1(), static.r1(), atol=1e-12)

    def test_symmetric_rayleigh(self):
        """Symmetric gains give P(A) near 1/2 and positive secrecy rate."""
        spec = FadingSpec(Rayleigh(1.0, 1.0))
        states = sample_states(spec, 4000, seed=SEED)
        assert prob_a(states, 1.0, 1.0) == pytest.approx(0.5, abs=0.05)
        boundary = boundary_for_states(spec, states, P_5DB, [1.0, 1e3])
        assert max_rates(boundary)[1] > 0

    def test_mean_power_is_budget(self):
        """Per-state powers average to P."""
        spec = FadingSpec(Rayleigh(1.0, 0.4))
        boundary = ergodic_boundary(
            spec, P_5DB, 500, seed=SEED, ratios=default_ratios(11)
        )
        for point in boundary.points:
            mean = total_power(point.alloc) / len(point.alloc)
            assert mean == pytest.approx(P_5DB, rel=1e-6)

    def test_valid_frontier(self):
        """An ergodic boundary is a concave nondominated frontier."""
        spec = FadingSpec(Rayleigh(1.0, 0.7))
        boundary = ergodic_boundary(
            spec, P_5DB, 500, seed=SEED, ratios=default_ratios(21)
        )
        assert validate_boundary(boundary, tol=1e-5) == []
        assert np.all(np.diff(boundary.r0()) <= 1e-9)

    def test_deterministic(self):
        """Same spec, states count and seed give bit-identical rates."""
        spec = FadingSpec(Rayleigh(1.0, 0.7))
        a = ergodic_boundary(spec, P_5DB, 300, seed=9, ratios=default_ratios(7))
        b = ergodic_boundary(spec, P_5DB, 300, seed=9, ratios=default_ratios(7))
        assert [p.rate for p in a.points] == [p.rate for p in b.points]

    def test_threads_give_same_boundary(self):
        """Worker threads do not change the ergodic boundary."""
        spec = FadingSpec(Rayleigh(1.0, 0.7))
        ratios = default_ratios(9)
        a = ergodic_boundary(spec, P_5DB, 300, seed=9, ratios=ratios)
        b = ergodic_boundary(spec, P_5DB, 300, seed=9, ratios=ratios, threads=3)
        assert [p.rate for p in a.points] == [p.rate for p in b.points]

    def test_rejects_negative_budget(self):
        """P must be nonnegative."""
        with pytest.raises(ValidationError):
            ergodic_boundary(FadingSpec(Rayleigh(1.0, 1.0)), -1.0, 10)

    def test_wiretap_specialization(self):
        """At ratio 1e3 the ergodic point is the fading wiretap capacity."""
        spec = FadingSpec(Rayleigh(1.0, 0.4))
        states = sample_states(spec, 400, seed=SEED)
        point = ergodic_rate_point(spec, states, P_5DB, 1e3)
        capacity = ergodic_secrecy_capacity(states, 1.0, 1.0, P_5DB)
        assert point.alloc.p0.sum() / states.n_states < 1e-3 * P_5DB
        assert point.rate.r1 == pytest.approx(capacity, abs=1e-3)

    def test_max_rates_of_empty_boundary(self):
        """An empty boundary has zero maxima."""
        assert max_rates(Boundary(points=())) == (0.0, 0.0)


class TestBatchStandardError:
    """Tests for Monte Carlo error estimates."""

    def test_positive_and_finite(self):
        """Batched errors are finite and nonnegative."""
        spec = FadingSpec(Rayleigh(1.0, 0.7))
        states = sample_states(spec, 400, seed=SEED)
        se_r0, se_r1 = batch_standard_error(spec, states, P_5DB, 1.0)
        assert 0 <= se_r0 < 1
        assert 0 <= se_r1 < 1

    def test_needs_two_batches(self):
        """One batch has no spread."""
        spec = FadingSpec(Rayleigh(1.0, 1.0))
        states = sample_states(spec, 20)
        with pytest.raises(ValidationError):
            batch_standard_error(spec, states, 1.0, 1.0, n_batches=1)

    def test_needs_a_state_per_batch(self):
        """There must be at least as many states as batches."""
        spec = FadingSpec(Rayleigh(1.0, 1.0))
        states = sample_states(spec, 5)
        with pytest.raises(ValidationError):
            batch_standard_error(spec, states, 1.0, 1.0, n_batches=10)


@pytest.mark.slow
class TestRayleighExperiments:
    """Full-size Monte Carlo runs at P = 5 dB with sigma1 = 1."""

    N_STATES = 20_000

    def test_sigma2_ordering(self):
        """Weaker receiver 2 raises max R1 and lowers max R0."""
        ratios = [1e-3, 1e3]
        r0, r1, se0, se1 = [], [], [], []
        for sigma2 in (0.4, 0.7, 1.0):
            spec = FadingSpec(Rayleigh(1.0, sigma2))
            states = sample_states(spec, self.N_STATES, seed=SEED)
            boundary = boundary_for_states(spec, states, P_5DB, ratios)
            best_r0, best_r1 = max_rates(boundary)
            r0.append(best_r0)
            r1.append(best_r1)
            se0.append(batch_standard_error(spec, states, P_5DB, ratios[0])[0])
            se1.append(batch_standard_error(spec, states, P_5DB, ratios[1])[1])

        for i in range(2):
            assert r1[i] - r1[i + 1] > 3 * math.hypot(se1[i], se1[i + 1])
            assert r0[i + 1] - r0[i] > 3 * math.hypot(se0[i], se0[i + 1])

    def test_case_segmentation(self):
        """Small ratios use Case 2, large ones Case 1, Case 3 in between."""
        spec = FadingSpec(Rayleigh(1.0, 0.4))
        boundary = ergodic_boundary(spec, P_5DB, self.N_STATES, seed=SEED)
        by_ratio = sorted(boundary.points, key=lambda p: p.ratio)
        ranks = [case_rank(p.case) for p in by_ratio]
        assert ranks[0] == 0
        assert ranks[-1] == 2
        assert 1 in ranks
        assert ranks == sorted(ranks)

    def test_wiretap_specialization(self):
        """At ratio 1e3 common power vanishes and R1 is the wiretap capacity."""
        spec = FadingSpec(Rayleigh(1.0, 0.4))
        states = sample_states(spec, self.N_STATES, seed=SEED)
        point = ergodic_rate_point(spec, states, P_5DB, 1e3)
        assert point.alloc.p0.sum() / states.n_states < 1e-3 * P_5DB
        capacity = ergodic_secrecy_capacity(states, 1.0, 1.0, P_5DB)
        assert point.rate.r1 == pytest.approx(capacity, abs=1e-3)

    def test_monte_carlo_consistency(self):
        """N and 4N states agree within three standard errors."""
        spec = FadingSpec(Rayleigh(1.0, 0.4))
        small = sample_states(spec, self.N_STATES // 4, seed=SEED)
        large = sample_states(spec, self.N_STATES, seed=SEED + 1)
        a = ergodic_rate_point(spec, small, P_5DB, 1.0)
        b = ergodic_rate_point(spec, large, P_5DB, 1.0)
        se_a = batch_standard_error(spec, small, P_5DB, 1.0)
        se_b = batch_standard_error(spec, large, P_5DB, 1.0)
        assert abs(a.rate.r0 - b.rate.r0) <= 3 * math.hypot(se_a[0], se_b[0])
        assert abs(a.rate.r1 - b.rate.r1) <= 3 * math.hypot(se_a[1], se_b[1])
