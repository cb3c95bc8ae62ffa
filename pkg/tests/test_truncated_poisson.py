"""Tests for truncated Poisson distributions and sum-conditioned sampling.

High-precision reference values come from an in-file mpmath oracle (40
significant digits) that sums the exponential series directly; conditional
laws are checked against exact rational computations with Fraction.
"""

import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from scipy import stats

from scdigraph.errors import DomainError, ResourceLimitError
from scdigraph.truncated_poisson import (
    DegreeSequence,
    TruncatedPoisson,
    _draw_indices,
    _sample_conditioned_dp,
    _sampler_tables,
    _support_table,
    exact_sum_probability,
    exp_series_tail,
    mean_from_rate,
    sample_conditioned_sum,
    solve_rate,
)

mp.mp.dps = 40

# Reference values, frozen from the mpmath oracle below.
RATE_FOR_MEAN_2 = 1.5936242600400400923
RATE_FOR_MEAN_4_3 = 0.60585997791900034018
RATE_FOR_MEAN_1_1 = 0.19374755799499050638
RATE_FOR_MEAN_31_30 = 0.065941994738760491261
RATE_K2_MEAN_3 = 2.1491257999070625421
RATIO_K2_MEAN_3 = 2.4327505332713750281
TAIL_2_AT_1 = 0.71828182845904523536  # e - 2
PMF_1_K1_RATE_1 = 0.58197670686932642439  # 1 / (e - 1)
UPPER_TAIL_8_K1_RATE_1 = 1.6213990403405719421e-05
SUM_PROB_2_2_RATE_1 = 0.33869688733846589456  # (e - 1) ** -2
SUM_PROB_4_7_RATE_1_2 = 0.2060999966717184369


def oracle_tail(k: int, rate) -> mp.mpf:
    rate = mp.mpf(rate)
    if k <= 0:
        return mp.e**rate
    return mp.e**rate - mp.fsum(rate**i / mp.factorial(i) for i in range(k))


def oracle_mean(k: int, rate) -> mp.mpf:
    rate = mp.mpf(rate)
    return rate * oracle_tail(k - 1, rate) / oracle_tail(k, rate)


@pytest.mark.parametrize("k", [-1, 0, 1, 2, 3, 5])
@pytest.mark.parametrize("rate", [1e-8, 0.1, 1.0, 2.5, 10.0, 29.9, 35.0, 100.0])
def test_exp_series_tail_matches_oracle(k, rate):
    got = exp_series_tail(k, rate)
    want = float(oracle_tail(k, rate))
    assert got == pytest.approx(want, rel=1e-13)


def test_exp_series_tail_nonpositive_cutoff_is_exp():
    assert exp_series_tail(0, 2.5) == math.exp(2.5)
    assert exp_series_tail(-3, 2.5) == math.exp(2.5)


def test_exp_series_tail_zero_rate():
    assert exp_series_tail(2, 0.0) == 0.0
    assert exp_series_tail(0, 0.0) == 1.0


def test_exp_series_tail_rejects_negative_rate():
    with pytest.raises(DomainError):
        exp_series_tail(1, -0.5)


def test_tail_value_frozen():
    assert exp_series_tail(2, 1.0) == pytest.approx(TAIL_2_AT_1, rel=1e-14)


@pytest.mark.parametrize("k", [0, 1, 2, 3])
@pytest.mark.parametrize("delta", [0.01, 0.5, 1.0, 3.0, 10.0])
def test_solve_rate_roundtrip(k, delta):
    mean = max(k, 0) + delta
    rate = solve_rate(mean, k)
    assert mean_from_rate(k, rate) == pytest.approx(mean, rel=1e-12)
    # the oracle mean agrees too, so the roundtrip is not a shared bug
    assert float(oracle_mean(k, rate)) == pytest.approx(mean, rel=1e-11)


def test_solve_rate_frozen_values():
    assert solve_rate(2.0, 1) == pytest.approx(RATE_FOR_MEAN_2, rel=1e-13)
    assert solve_rate(4.0 / 3.0, 1) == pytest.approx(RATE_FOR_MEAN_4_3, rel=1e-13)
    assert solve_rate(1.1, 1) == pytest.approx(RATE_FOR_MEAN_1_1, rel=1e-13)
    assert solve_rate(31.0 / 30.0, 1) == pytest.approx(RATE_FOR_MEAN_31_30, rel=1e-13)
    assert solve_rate(3.0, 2) == pytest.approx(RATE_K2_MEAN_3, rel=1e-13)


def test_solve_rate_monotone_in_mean():
    means = [1.05, 1.2, 1.5, 2.0, 3.0, 5.0, 9.0]
    rates = [solve_rate(c, 1) for c in means]
    assert all(a < b for a, b in zip(rates, rates[1:]))


def test_rate_stays_below_mean_for_positive_cutoff():
    for c in [1.01, 1.5, 2.0, 4.0, 20.0]:
        assert 0.0 < solve_rate(c, 1) < c


def test_rate_equals_mean_without_truncation():
    assert solve_rate(3.7, 0) == 3.7
    assert solve_rate(0.2, -2) == 0.2
    assert mean_from_rate(0, 3.7) == pytest.approx(3.7, rel=1e-15)


def test_solve_rate_near_cutoff():
    mean = 1.0 + 1e-8
    rate = solve_rate(mean, 1)
    # mean ~ 1 + rate/2 as rate -> 0
    assert rate == pytest.approx(2e-8, rel=1e-4)
    assert mean_from_rate(1, rate) == pytest.approx(mean, rel=1e-13)


def test_solve_rate_domain_errors():
    with pytest.raises(DomainError):
        solve_rate(1.0, 1)
    with pytest.raises(DomainError):
        solve_rate(0.7, 1)
    with pytest.raises(DomainError):
        solve_rate(0.0, 0)
    with pytest.raises(DomainError):
        mean_from_rate(1, 0.0)


def test_factorial_ratio_equals_rate_at_cutoff_one():
    for c in [1.2, 2.0, 5.0]:
        dist = TruncatedPoisson.from_mean(c, k=1)
        assert dist.factorial_ratio == pytest.approx(dist.rate, rel=1e-14)


def test_factorial_ratio_frozen_cutoff_two():
    dist = TruncatedPoisson.from_mean(3.0, k=2)
    assert dist.factorial_ratio == pytest.approx(RATIO_K2_MEAN_3, rel=1e-13)


@pytest.mark.parametrize("k,rate", [(1, 0.6), (1, 2.5), (2, 1.7), (0, 1.2), (3, 4.0)])
def test_variance_matches_second_moment(k, rate):
    dist = TruncatedPoisson.from_rate(k, rate)
    first, probs = dist.support_table()
    values = first + np.arange(probs.size)
    mean = float(values @ probs)
    second = float((values.astype(np.float64) ** 2) @ probs)
    assert dist.mean == pytest.approx(mean, rel=1e-12)
    assert dist.variance == pytest.approx(second - mean * mean, rel=1e-9)


def test_pmf_frozen_value_and_normalisation():
    dist = TruncatedPoisson.from_rate(1, 1.0)
    assert dist.pmf(1) == pytest.approx(PMF_1_K1_RATE_1, rel=1e-13)
    total = sum(dist.pmf(i) for i in range(1, 60))
    assert total == pytest.approx(1.0, rel=1e-13)


def test_pmf_zero_below_cutoff():
    dist = TruncatedPoisson.from_rate(2, 1.5)
    assert dist.pmf(0) == 0.0
    assert dist.pmf(1) == 0.0
    assert dist.pmf(-3) == 0.0
    assert dist.pmf(2) > 0.0


def test_upper_tail_frozen():
    dist = TruncatedPoisson.from_rate(1, 1.0)
    upper = 1.0 - sum(dist.pmf(i) for i in range(1, 8))
    assert upper == pytest.approx(UPPER_TAIL_8_K1_RATE_1, rel=1e-8)


def test_support_table_matches_pmf():
    dist = TruncatedPoisson.from_rate(1, 1.3)
    first, probs = dist.support_table()
    assert first == 1
    assert probs.sum() == pytest.approx(1.0, abs=1e-15)
    for i in range(probs.size):
        assert probs[i] == pytest.approx(dist.pmf(first + i), rel=1e-12)


def test_support_table_tail_is_negligible():
    dist = TruncatedPoisson.from_rate(1, 2.0)
    first, probs = dist.support_table()
    dropped = 1.0 - float(oracle_tail(1, 2.0) and sum(
        float(mp.mpf(2.0) ** i / mp.factorial(i) / oracle_tail(1, 2.0))
        for i in range(first, first + probs.size)
    ))
    assert abs(dropped) < 1e-15


def test_lookup_table_cells_are_exact():
    """Structural exactness of the inverse-CDF table: every non-sentinel cell
    maps uniformly to one pmf index, and cdf boundaries only occur in
    sentinel cells."""
    for k, rate in [(1, 1.3), (1, 0.05), (2, 2.1491257999070625), (0, 4.0)]:
        first, cdf, lut, lut_size = _sampler_tables(k, rate)
        cells = np.arange(lut_size)
        lo = np.searchsorted(cdf, cells / lut_size, side="right")
        hi = np.searchsorted(cdf, np.nextafter((cells + 1) / lut_size, -np.inf), side="right")
        plain = lut != 255
        assert np.array_equal(lut[plain], lo[plain].astype(np.uint8))
        assert np.array_equal(lo[plain], hi[plain])
        boundary_cells = np.minimum((cdf * lut_size).astype(np.int64), lut_size - 1)
        assert np.all(lut[boundary_cells] == 255)


def test_sample_shapes_and_reproducibility():
    dist = TruncatedPoisson.from_mean(2.0, k=1)
    one = dist.sample(np.random.default_rng(7))
    assert isinstance(one, int) and one >= 1
    a = dist.sample(np.random.default_rng(123), size=1000)
    b = dist.sample(np.random.default_rng(123), size=1000)
    assert a.shape == (1000,) and a.dtype == np.int64
    assert np.array_equal(a, b)
    assert a.min() >= 1


def test_sampler_distribution_chi_squared():
    rng = np.random.default_rng(20260818)
    dist = TruncatedPoisson.from_rate(1, 1.3)
    first, probs = dist.support_table()
    n = 200_000
    draws = dist.sample(rng, size=n)
    counts = np.bincount(draws - first, minlength=probs.size).astype(np.float64)
    expected = probs * n
    # lump the sparse tail so every expected count is at least 5
    cut = int(np.argmax(np.cumsum(expected[::-1]) >= 5.0))
    cut = probs.size - cut
    obs = np.append(counts[: cut - 1], counts[cut - 1 :].sum())
    exp = np.append(expected[: cut - 1], expected[cut - 1 :].sum())
    stat, p = stats.chisquare(obs, exp * (obs.sum() / exp.sum()))
    assert p > 1e-3


def test_conditioned_sum_at_minimum_is_constant():
    out = sample_conditioned_sum(3, 3, k=1, rng=np.random.default_rng(0))
    assert np.array_equal(out, np.ones(3, dtype=np.int64))
    batch = sample_conditioned_sum(4, 8, k=2, rng=np.random.default_rng(0), size=5)
    assert batch.shape == (5, 4)
    assert np.all(batch == 2)


def test_conditioned_sum_domain_errors():
    with pytest.raises(DomainError):
        sample_conditioned_sum(3, 2, k=1, rng=np.random.default_rng(0))
    with pytest.raises(DomainError):
        sample_conditioned_sum(0, 0, k=1, rng=np.random.default_rng(0))
    with pytest.raises(DomainError):
        sample_conditioned_sum(3, 5, k=1)


def test_conditioned_sums_hit_target_exactly():
    rng = np.random.default_rng(42)
    out = sample_conditioned_sum(7, 19, k=1, rng=rng, size=300)
    assert out.shape == (300, 7)
    assert np.all(out.sum(axis=1) == 19)
    assert np.all(out >= 1)


def exact_conditional_first_coordinate(n: int, total: int) -> list:
    """P(Y_1 = y | Y_1 + ... + Y_n = total) for cutoff 1, as Fractions.

    The conditional law is rate-free: weight(y) = 1/y! times the sum of
    prod(1/yi!) over positive (y_2..y_n) summing to total - y.
    """

    def comp_weight(nvars: int, s: int) -> Fraction:
        if nvars == 0:
            return Fraction(1) if s == 0 else Fraction(0)
        return sum(
            (Fraction(1, math.factorial(y)) * comp_weight(nvars - 1, s - y)
             for y in range(1, s - nvars + 2)),
            Fraction(0),
        )

    weights = [
        Fraction(1, math.factorial(y)) * comp_weight(n - 1, total - y)
        for y in range(1, total - n + 2)
    ]
    norm = sum(weights)
    return [w / norm for w in weights]


def test_conditional_law_is_rate_free():
    """The conditioned sampler must produce the same law for any rate; the
    target law for n=2, total=4 is (2/7, 3/7, 2/7) on first values 1, 2, 3."""
    law = exact_conditional_first_coordinate(2, 4)
    assert law == [Fraction(2, 7), Fraction(3, 7), Fraction(2, 7)]
    n_draws = 60_000
    for seed, rate in [(11, 0.7), (12, 2.3)]:
        rng = np.random.default_rng(seed)
        out = sample_conditioned_sum(2, 4, k=1, rng=rng, rate=rate, size=n_draws)
        counts = np.bincount(out[:, 0], minlength=4)[1:4].astype(np.float64)
        expected = np.array([2 / 7, 3 / 7, 2 / 7]) * n_draws
        stat, p = stats.chisquare(counts, expected)
        assert p > 1e-3, f"rate={rate}: counts {counts} vs {expected}"


def test_dp_sampler_agrees_with_rejection():
    """Dual-route check: the sequential DP sampler and the rejection sampler
    target the same conditional law (n=3, total=7)."""
    law = [float(f) for f in exact_conditional_first_coordinate(3, 7)]
    rate = solve_rate(7 / 3, 1)
    n_draws = 40_000
    rej = sample_conditioned_sum(3, 7, k=1, rng=np.random.default_rng(5), size=n_draws)
    dp = _sample_conditioned_dp(3, 7, 1, rate, np.random.default_rng(6), n_draws)
    assert np.all(dp.sum(axis=1) == 7)
    width = len(law)
    for sample in (rej, dp):
        counts = np.bincount(sample[:, 0] - 1, minlength=width)[:width].astype(np.float64)
        keep = np.array(law) * n_draws >= 5
        obs = np.append(counts[keep[: width]], counts[~keep].sum()) if (~keep).any() else counts
        exp = np.array(law) * n_draws
        exp = np.append(exp[keep], exp[~keep].sum()) if (~keep).any() else exp
        stat, p = stats.chisquare(obs, exp * (obs.sum() / exp.sum()))
        assert p > 1e-3


def test_far_off_rate_falls_back_to_dp():
    """With a rate override far from total/n the rejection sampler cannot hit
    the target; for n <= 500 it must fall back to exact DP sampling."""
    rng = np.random.default_rng(8)
    out = sample_conditioned_sum(100, 400, k=1, rng=rng, rate=1.0, size=3)
    assert out.shape == (3, 100)
    assert np.all(out.sum(axis=1) == 400)
    assert np.all(out >= 1)


def test_resource_limit_for_large_infeasible_runs():
    with pytest.raises(ResourceLimitError):
        sample_conditioned_sum(
            600, 700, k=1, rng=np.random.default_rng(9), rate=0.01, max_attempts=2000
        )


def test_exact_sum_probability_frozen_values():
    dist = TruncatedPoisson.from_rate(1, 1.0)
    assert exact_sum_probability(2, 2, dist) == pytest.approx(SUM_PROB_2_2_RATE_1, rel=1e-13)
    dist12 = TruncatedPoisson.from_rate(1, 1.2)
    assert exact_sum_probability(4, 7, dist12) == pytest.approx(SUM_PROB_4_7_RATE_1_2, rel=1e-12)


def test_exact_sum_probability_out_of_range():
    dist = TruncatedPoisson.from_rate(1, 1.0)
    assert exact_sum_probability(3, 2, dist) == 0.0
    assert exact_sum_probability(3, 10_000, dist) == 0.0


def test_exact_sum_probability_normalises():
    dist = TruncatedPoisson.from_rate(1, 0.9)
    total = sum(exact_sum_probability(3, t, dist) for t in range(3, 40))
    assert total == pytest.approx(1.0, rel=1e-12)


def test_exact_sum_probability_matches_monte_carlo():
    dist = TruncatedPoisson.from_rate(1, 1.2)
    p = exact_sum_probability(4, 7, dist)
    rng = np.random.default_rng(314)
    rows = dist.sample(rng, size=4 * 200_000).reshape(200_000, 4)
    freq = float(np.mean(rows.sum(axis=1) == 7))
    sigma = math.sqrt(p * (1 - p) / 200_000)
    assert abs(freq - p) < 4 * sigma


def test_sum_probability_underflow_warns_and_flushes():
    dist = TruncatedPoisson.from_rate(1, 0.01)
    with pytest.warns(RuntimeWarning, match="underflow"):
        p = exact_sum_probability(170, 340, dist)
    assert p == 0.0


def test_degree_sequence_validation():
    seq = DegreeSequence(np.array([2, 1, 3]))
    assert len(seq) == 3
    assert seq.total == 6
    assert seq.minimum == 1
    with pytest.raises(DomainError):
        DegreeSequence(np.array([1, -2]))
    with pytest.raises(DomainError):
        DegreeSequence(np.array([[1, 2]]))
    with pytest.raises(DomainError):
        DegreeSequence(np.array([], dtype=np.int64))


def test_draw_indices_cover_support():
    rng = np.random.default_rng(77)
    idx = _draw_indices(1, 1.3, 50_000, rng)
    first, probs = _support_table(1, 1.3)
    assert idx.min() == 0
    assert idx.max() < probs.size
