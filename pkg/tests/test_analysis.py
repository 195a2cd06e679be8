from math import exp, fsum

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from partsketch import (
    BoundReport,
    DenseMatrix,
    DistributionError,
    EnumerationError,
    PairingStrategy,
    Partition,
    SamplingDistribution,
    SketchConfig,
    ThresholdRule,
    aggregate_distribution,
    bernstein_tail_bound,
    binomial_cdf,
    bound_report,
    brute_force_expectation,
    expected_frobenius_error_sq,
    finest,
    frobenius_norm,
    min_draw_threshold,
    optimal_distribution,
    optimal_expected_error,
    pair_partition,
    pairing_comparators,
    sketch,
    spectral_norm,
    uniform_distribution,
    uniform_spectral_bound,
)
from partsketch.analysis import bernstein_bound, comparator_tail_bounds, relative_errors
from partsketch.distributions import element_weights, finest_distribution
from partsketch.streams import standard_uniform_matrix
from .helpers import all_pairings, random_instance, random_partition, random_perturbation

STRATEGIES = [
    PairingStrategy.enhanced(),
    PairingStrategy.random(17),
    PairingStrategy.balanced(),
    PairingStrategy.simple(),
]


def slack(value: float) -> float:
    return 1e-12 * max(1.0, abs(value))


class TestExpectedError:
    def test_single_group_is_exact(self, small):
        partition = Partition(4, [[0, 1, 2, 3]])
        dist = optimal_distribution(small.a, small.b, partition)
        assert expected_frobenius_error_sq(small.a, small.b, partition, dist, 3) == 0.0

    def test_scales_with_one_over_c(self, small):
        dist = finest_distribution(small.a, small.b)
        one = expected_frobenius_error_sq(small.a, small.b, finest(4), dist, 1)
        assert expected_frobenius_error_sq(small.a, small.b, finest(4), dist, 2) == one / 2

    def test_matches_enumeration(self, small):
        dist = finest_distribution(small.a, small.b)
        oracle = brute_force_expectation(small.a, small.b, finest(4), dist, 1)
        value = expected_frobenius_error_sq(small.a, small.b, finest(4), dist, 1)
        assert value == pytest.approx(oracle.expected_error_sq, rel=1e-12, abs=1e-12)

    def test_two_outcome_hand_computation(self, small):
        partition = Partition(4, [[0, 1], [2, 3]])
        q = 0.3
        dist = SamplingDistribution([q, 1 - q], partition)
        w = element_weights(small.a, small.b, partition)
        expected = w[0] ** 2 / q + w[1] ** 2 / (1 - q) - frobenius_norm(small.product) ** 2
        oracle = brute_force_expectation(small.a, small.b, partition, dist, 1)
        assert oracle.expected_error_sq == pytest.approx(expected, rel=1e-12)
        assert expected_frobenius_error_sq(small.a, small.b, partition, dist, 1) == pytest.approx(expected, rel=1e-12)

    def test_zero_probability_with_weight(self, small):
        dist = SamplingDistribution([1.0, 0.0, 0.0, 0.0], finest(4))
        with pytest.raises(DistributionError):
            expected_frobenius_error_sq(small.a, small.b, finest(4), dist, 1)

    def test_zero_weight_groups_contribute_nothing(self):
        a = DenseMatrix([[1.0, 0.0, 2.0], [0.5, 0.0, 1.0]])
        dist = finest_distribution(a, a.T)
        value = expected_frobenius_error_sq(a, a.T, finest(3), dist, 2)
        oracle = brute_force_expectation(a, a.T, finest(3), dist, 2)
        assert value == pytest.approx(oracle.expected_error_sq, rel=1e-12, abs=1e-12)

    def test_oracle_equivalence(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 5))
            instance = random_instance(rng, 2, n, 3)
            partition = random_partition(rng, n)
            while partition.k > 3:
                partition = random_partition(rng, n)
            dist = random_perturbation(rng, optimal_distribution(instance.a, instance.b, partition))
            c = int(rng.integers(1, 4))
            oracle = brute_force_expectation(instance.a, instance.b, partition, dist, c)
            np.testing.assert_allclose(
                oracle.mean_estimate.values, instance.product.values, rtol=1e-12, atol=1e-12
            )
            value = expected_frobenius_error_sq(instance.a, instance.b, partition, dist, c)
            assert value == pytest.approx(oracle.expected_error_sq, rel=1e-12, abs=1e-12)

    def test_optimal_distribution_is_optimal(self, rng):
        for _ in range(10):
            instance = random_instance(rng, 3, 8, 3)
            partition = random_partition(rng, 8)
            best = optimal_distribution(instance.a, instance.b, partition)
            optimum = expected_frobenius_error_sq(instance.a, instance.b, partition, best, 4)
            for _ in range(100):
                other = random_perturbation(rng, best)
                value = expected_frobenius_error_sq(instance.a, instance.b, partition, other, 4)
                assert value >= optimum - slack(optimum)


class TestOptimalExpectedError:
    def test_single_group(self, small):
        assert optimal_expected_error(small.a, small.b, Partition(4, [[0, 1, 2, 3]]), 5) == 0.0

    def test_matches_expected_error_at_the_optimum(self, rng):
        for _ in range(10):
            instance = random_instance(rng, 3, 9, 2)
            partition = random_partition(rng, 9)
            dist = optimal_distribution(instance.a, instance.b, partition)
            value = expected_frobenius_error_sq(instance.a, instance.b, partition, dist, 3)
            assert optimal_expected_error(instance.a, instance.b, partition, 3) == pytest.approx(
                value, rel=1e-12, abs=1e-12
            )

    def test_finest_partition_is_the_worst(self, rng):
        for _ in range(100):
            instance = random_instance(rng, 3, 10, 3)
            finest_value = optimal_expected_error(instance.a, instance.b, finest(10), 2)
            coarse_value = optimal_expected_error(instance.a, instance.b, random_partition(rng, 10), 2)
            assert coarse_value <= finest_value + slack(finest_value)

    def test_orthonormal_columns(self):
        a = DenseMatrix.identity(5)
        assert optimal_expected_error(a, a.T, finest(5), 4) == pytest.approx((25 - 5) / 4, rel=1e-14)

    def test_zero_weights(self):
        zero = DenseMatrix.zeros(2, 3)
        assert optimal_expected_error(zero, zero.T, finest(3), 1) == 0.0

    @pytest.mark.parametrize("strategy", STRATEGIES, ids=["enhanced", "random", "balanced", "simple"])
    def test_aggregated_distributions_beat_the_finest_optimum(self, rng, strategy):
        for _ in range(20):
            instance = random_instance(rng, 4, 12, 3)
            p_finest = finest_distribution(instance.a, instance.b)
            finest_value = optimal_expected_error(instance.a, instance.b, finest(12), 3)
            pairs = pair_partition(p_finest, strategy)
            partitions = [pairs] + [random_partition(rng, 12) for _ in range(20)]
            for partition in partitions:
                dist = aggregate_distribution(p_finest, partition)
                value = expected_frobenius_error_sq(instance.a, instance.b, partition, dist, 3)
                assert value <= finest_value + slack(finest_value)


class TestBernstein:
    def test_vanishes_for_large_epsilon(self, small):
        dist = finest_distribution(small.a, small.b)
        report = bound_report(small.a, small.b, finest(4), dist)
        epsilon = 1e9 * (report.ab_spectral ** 2 + report.u2 + report.u1 + 1)
        assert bernstein_tail_bound(report, 1, epsilon) < 1e-300

    def test_monotone_in_c(self, small):
        report = bound_report(small.a, small.b, finest(4), finest_distribution(small.a, small.b))
        for c in (1, 3, 10, 50):
            assert bernstein_tail_bound(report, 2 * c, 2.0) <= bernstein_tail_bound(report, c, 2.0)

    def test_optimal_distribution_closed_form(self, small):
        partition = Partition(4, [[0, 3], [1, 2]])
        dist = optimal_distribution(small.a, small.b, partition)
        report = bound_report(small.a, small.b, partition, dist)
        blocks = [small.a.values[:, g] @ small.b.values[g, :] for g in ([0, 3], [1, 2])]
        total = float(sum(np.linalg.norm(block) for block in blocks))
        ab = float(np.linalg.norm(small.product.values, 2))
        assert report.weight_sum == pytest.approx(total, rel=1e-12)
        assert report.u1 == pytest.approx(total, rel=1e-12)
        assert report.u2 == pytest.approx(total ** 2, rel=1e-12)
        c, epsilon = 7, 3.0
        expected = 4 * exp(-c * epsilon ** 2 / (2 * (ab + total) ** 2 + epsilon * (ab + total)))
        assert bernstein_tail_bound(report, c, epsilon) == pytest.approx(expected, rel=1e-6)

    def test_report_fields(self, small):
        dist = uniform_distribution(finest(4))
        report = bound_report(small.a, small.b, finest(4), dist)
        weights = element_weights(small.a, small.b, finest(4))
        assert report.u1 == pytest.approx(4 * weights.max(), rel=1e-14)
        assert report.u1 >= weights.max()
        assert report.ab_frobenius == pytest.approx(frobenius_norm(small.product))
        assert (report.m_rows, report.rho_cols) == (2, 2)
        assert set(report.to_json()) == {"M", "U1", "U2", "ab_frobenius", "ab_spectral", "m_rows", "rho_cols"}

    def test_rejects_nonpositive_epsilon(self, small):
        report = bound_report(small.a, small.b, finest(4), finest_distribution(small.a, small.b))
        with pytest.raises(ValueError):
            bernstein_tail_bound(report, 1, 0.0)

    def test_report_rejects_negative_fields(self):
        with pytest.raises(ValueError):
            BoundReport(-1.0, 0.0, 0.0, 0.0, 0.0, 1, 1)

    def test_zero_everything(self):
        assert bernstein_bound(2, 2, 1, 1.0, 0.0, 0.0) == 0.0


class TestBinomialCdf:
    @pytest.mark.parametrize("trials, xi", [(5, 0.3), (40, 0.01), (1000, 0.5)], ids=["small", "rare", "large"])
    def test_boundaries(self, trials, xi):
        assert binomial_cdf(trials, trials, xi) == 1.0
        assert binomial_cdf(trials + 3, trials, xi) == 1.0
        assert binomial_cdf(-1, trials, xi) == 0.0
        assert binomial_cdf(0, trials, xi) == pytest.approx((1 - xi) ** trials, rel=1e-12)

    def test_hand_value(self):
        assert binomial_cdf(1, 3, 0.5) == pytest.approx(0.5, rel=1e-14)

    def test_matches_scipy(self):
        for trials, xi in ((30, 0.2), (499, 1 / 2000), (2500, 0.4)):
            for s in (0, 1, 2, trials // 3, trials - 1):
                assert binomial_cdf(s, trials, xi) == pytest.approx(binom.cdf(s, trials, xi), rel=1e-9, abs=1e-300)

    def test_complement_identity(self):
        c, k = 5, 3
        assert 1 - binomial_cdf(c - 2, c - 1, 1 / k) == pytest.approx(
            binomial_cdf(0, c - 1, (k - 1) / k), abs=1e-12
        )
        assert binomial_cdf(0, c - 1, (k - 1) / k) == pytest.approx((1 / k) ** (c - 1), rel=1e-12)

    @pytest.mark.parametrize("xi", [0.0, 1.0], ids=["never", "always"])
    def test_degenerate_probabilities(self, xi):
        assert binomial_cdf(2, 5, xi) == (1.0 if xi == 0.0 else 0.0)

    @settings(max_examples=60, deadline=None)
    @given(trials=st.integers(1, 300), xi=st.floats(0.0, 1.0), s=st.integers(-2, 300))
    def test_monotone_in_s(self, trials, xi, s):
        lower, upper = binomial_cdf(s, trials, xi), binomial_cdf(s + 1, trials, xi)
        assert 0.0 <= lower <= upper + 1e-12 <= 1.0 + 1e-12

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            binomial_cdf(1, 3, 1.5)


class TestDrawThreshold:
    def test_default_gives_three(self):
        result = min_draw_threshold(500, 2000)
        assert result.rule is ThresholdRule.PER_GROUP
        assert result.feasible
        assert result.s_c == 3

    def test_union_rule(self):
        assert min_draw_threshold(500, 2000, ThresholdRule.UNION).s_c == 6

    @pytest.mark.parametrize(
        "c, k, rule, expected",
        [
            (2, 10 ** 6, ThresholdRule.UNION, 2),
            (2, 10 ** 6, ThresholdRule.PER_GROUP, 2),
            (100, 200, ThresholdRule.UNION, 6),
            (100, 200, ThresholdRule.PER_GROUP, 4),
            (2, 100, ThresholdRule.UNION, 2),
            (3, 10, ThresholdRule.UNION, 3),
            (2, 100, ThresholdRule.PER_GROUP, 2),
            (3, 10, ThresholdRule.PER_GROUP, 3),
        ],
        ids=[
            "two draws union",
            "two draws per group",
            "hundred union",
            "hundred per group",
            "boundary two draws union",
            "boundary three draws union",
            "boundary two draws per group",
            "boundary three draws per group",
        ],
    )
    def test_values(self, c, k, rule, expected):
        assert min_draw_threshold(c, k, rule).s_c == expected

    @pytest.mark.parametrize("rule", list(ThresholdRule), ids=["union", "per group"])
    def test_threshold_is_the_smallest_solution(self, rule):
        for c, k in ((500, 2000), (100, 200), (40, 7), (12, 3)):
            result = min_draw_threshold(c, k, rule)
            scale = 100 * (c if rule is ThresholdRule.UNION else c / k)

            def holds(s: int) -> bool:
                return s >= scale * (1 - binomial_cdf(s - 2, c - 1, 1 / k)) - 1e-9

            assert result.feasible and 2 <= result.s_c <= c
            assert holds(result.s_c)
            assert result.s_c == 2 or not holds(result.s_c - 1)

    def test_infeasible(self):
        result = min_draw_threshold(5, 1)
        assert not result.feasible
        assert result.s_c is None
        assert result.to_json()["s_c"] is None

    def test_feasibility_boundary(self):
        assert min_draw_threshold(4, 10).feasible
        assert not min_draw_threshold(2, 99).feasible

    def test_rejects_single_draw(self):
        with pytest.raises(ValueError):
            min_draw_threshold(1, 5)


class TestUniformSpectralBound:
    def test_unit_factor(self, small):
        expected = spectral_norm(small.a) * spectral_norm(small.b)
        assert uniform_spectral_bound(small.a, small.b, 7, 7, 2) == pytest.approx(expected, rel=1e-14)

    def test_halves_when_c_doubles(self, small):
        first = uniform_spectral_bound(small.a, small.b, 10, 4, 3)
        assert uniform_spectral_bound(small.a, small.b, 20, 4, 3) == pytest.approx(first / 2, rel=1e-14)

    def test_identity(self):
        eye = DenseMatrix.identity(3)
        assert uniform_spectral_bound(eye, eye, 50, 200, 6) == pytest.approx(200 * 5 / 50, rel=1e-12)

    @pytest.mark.slow
    def test_coverage_under_uniform_sampling(self):
        c, k = 100, 200
        a = standard_uniform_matrix(10, k, 5)
        b = a.T
        threshold = min_draw_threshold(c, k)
        bound = uniform_spectral_bound(a, b, c, k, threshold.s_c)
        dist = uniform_distribution(finest(k))
        covered = sum(
            spectral_norm(sketch(a, b, finest(k), dist, SketchConfig(c, seed)).estimate) <= bound
            for seed in range(10000)
        )
        assert covered >= 0.985 * 10000


class TestPairingComparators:
    def test_equal_weights(self):
        eye = DenseMatrix.identity(6)
        pairs = Partition(6, [[0, 1], [2, 3], [4, 5]])
        comparators = pairing_comparators(eye, eye, pairs)
        assert comparators.m1 == pytest.approx(2 * 5)
        assert comparators.m2 == pytest.approx(2 * 4)

    def test_single_pair(self, rng):
        a = DenseMatrix(rng.standard_normal((3, 2)))
        comparators = pairing_comparators(a, a.T, Partition(2, [[1, 0]]))
        assert comparators.m2 == 0.0
        assert comparators.u2 == 0.0

    def test_hand_values(self):
        a = DenseMatrix.diagonal([1, 2, 3, 4])
        eye = DenseMatrix.identity(4)
        enhanced = pairing_comparators(a, eye, Partition(4, [[0, 1], [2, 3]]))
        balanced = pairing_comparators(a, eye, Partition(4, [[3, 0], [2, 1]]))
        assert enhanced.m1 == balanced.m1 == 18.0
        assert enhanced.m2 == 14.0
        assert balanced.m2 == 10.0
        assert enhanced.u2 == pytest.approx(4 / 10 * (3 * 7 ** 2 + 7 * 3 ** 2))
        assert balanced.u2 == pytest.approx(4 / 10 * (2 * 5 * 5 ** 2))
        assert enhanced.u2 < balanced.u2

    def test_zero_operands(self):
        zero = DenseMatrix.zeros(2, 4)
        assert tuple(pairing_comparators(zero, zero.T, Partition(4, [[0, 1], [2, 3]]))) == (0.0, 0.0, 0.0, 0.0)

    def test_pairing_never_hurts(self, rng):
        for _ in range(100):
            instance = random_instance(rng, 3, 10, 2)
            p_finest = finest_distribution(instance.a, instance.b)
            strategy = STRATEGIES[int(rng.integers(len(STRATEGIES)))]
            comparators = pairing_comparators(instance.a, instance.b, pair_partition(p_finest, strategy))
            assert comparators.m2 <= comparators.m1 + slack(comparators.m1)
            assert comparators.u2 <= comparators.u1 + slack(comparators.u1)
            finest_bound, paired_bound = comparator_tail_bounds(comparators, 3, 2, 20, 1.0)
            assert paired_bound <= finest_bound * (1 + 1e-12)

    @pytest.mark.parametrize("n", [4, 6, 8], ids=["four", "six", "eight"])
    def test_exhaustive_pairings(self, rng, n):
        for _ in range(5):
            instance = random_instance(rng, 3, n, 3)
            p_finest = finest_distribution(instance.a, instance.b)
            every = [pairing_comparators(instance.a, instance.b, pairs) for pairs in all_pairings(n)]
            enhanced = pairing_comparators(
                instance.a, instance.b, pair_partition(p_finest, PairingStrategy.enhanced())
            )
            balanced = pairing_comparators(
                instance.a, instance.b, pair_partition(p_finest, PairingStrategy.balanced())
            )
            smallest_u2 = min(comp.u2 for comp in every)
            smallest_m2 = min(comp.m2 for comp in every)
            assert enhanced.u2 <= smallest_u2 + slack(smallest_u2)
            assert balanced.m2 <= smallest_m2 + slack(smallest_m2)
            # small epsilon with c large enough to keep the exponent near one half
            epsilon = 1e-6 * enhanced.u2 ** 0.5
            c = round(enhanced.u2 / epsilon ** 2)
            paired = [comparator_tail_bounds(comp, 3, 3, c, epsilon)[1] for comp in every]
            enhanced_bound = comparator_tail_bounds(enhanced, 3, 3, c, epsilon)[1]
            assert enhanced_bound < 6
            assert enhanced_bound <= min(paired) * (1 + 1e-5)


class TestBruteForce:
    def test_single_group(self, small):
        partition = Partition(4, [[0, 1, 2, 3]])
        result = brute_force_expectation(
            small.a, small.b, partition, optimal_distribution(small.a, small.b, partition), 3
        )
        np.testing.assert_allclose(result.mean_estimate.values, small.product.values, rtol=1e-15)
        assert result.expected_error_sq == 0.0

    def test_guard(self, small):
        dist = finest_distribution(small.a, small.b)
        with pytest.raises(EnumerationError):
            brute_force_expectation(small.a, small.b, finest(4), dist, 11)
        with pytest.raises(EnumerationError):
            brute_force_expectation(small.a, small.b, finest(4), dist, 3, limit=63)


class TestRelativeErrors:
    def test_exact_estimate(self, small):
        assert relative_errors(small.product, small.product) == (0.0, 0.0)

    def test_scaled_estimate(self, small):
        half = DenseMatrix(0.5 * small.product.values)
        frobenius, spectral = relative_errors(small.product, half)
        assert frobenius == pytest.approx(0.5, rel=1e-12)
        assert spectral == pytest.approx(0.5, rel=1e-8)


@pytest.mark.slow
class TestMonteCarloConsistency:
    def test_mean_squared_error_matches_the_closed_form(self):
        rng = np.random.default_rng(99)
        instance = random_instance(rng, 10, 20, 10)
        dist = finest_distribution(instance.a, instance.b)
        product = instance.product.values
        errors = []
        for seed in range(100000):
            estimate = sketch(instance.a, instance.b, finest(20), dist, SketchConfig(5, seed)).estimate
            errors.append(float(np.sum((product - estimate.values) ** 2)))
        expected = expected_frobenius_error_sq(instance.a, instance.b, finest(20), dist, 5)
        assert fsum(errors) / len(errors) == pytest.approx(expected, rel=0.03)
