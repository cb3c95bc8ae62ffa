"""Left-truncated Poisson distributions and sum-conditioned degree sampling.

A left-truncated Poisson with cutoff ``k`` and rate ``lam`` puts mass
proportional to ``lam**i / i!`` on integers ``i >= k``.  The normalising
constant is the exponential series tail ``sum_{i >= max(k, 0)} lam**i / i!``
(the whole of ``exp(lam)`` when ``k <= 0``).  These distributions are the
degree laws of uniform random digraphs with minimum-degree constraints: a
vector of n i.i.d. truncated Poisson variables conditioned on its sum equals
the degree vector of a uniformly random allocation of that many arc endpoints,
for every choice of rate.  That rate-independence is what makes the rate a
free tuning parameter for the rejection sampler below.

Numerical contracts
-------------------
* ``exp_series_tail`` is accurate to 1e-13 relative error on the desk scale.
* ``solve_rate`` returns the unique positive root of mean(rate) = mean with
  relative residual below 1e-13.
* Sampling is exact inverse-CDF sampling with respect to the float64 pmf
  table, whose support is truncated where the remaining tail mass drops
  below 1e-16 of the total.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, ResourceLimitError

# Direct ascending series below this rate; exp minus partial sum above it.
_SERIES_SWITCH = 30.0
_SERIES_RELTOL = 1e-18
# Per-variable support truncation for sampling tables and the sum DP.
_TAIL_EPS = 1e-16
# Probabilities below this are flushed to zero in the sum DP.
_UNDERFLOW = 1e-300
# Inverse-CDF lookup table resolution (cells = 2**_LUT_BITS).
_LUT_BITS = 16
_LUT_SENTINEL = 255

__all__ = [
    "TruncatedPoisson",
    "DegreeSequence",
    "exp_series_tail",
    "solve_rate",
    "mean_from_rate",
    "sample_conditioned_sum",
    "exact_sum_probability",
]


def exp_series_tail(k: int, rate: float) -> float:
    """Tail of the exponential series: sum of rate**i / i! over i >= max(k, 0).

    Returns exp(rate) for k <= 0.  For rate <= 30 the ascending series from
    i = k is summed directly (all terms positive, no cancellation); beyond
    that, exp(rate) minus the explicit head is used, with head terms
    evaluated in log space.
    """
    if rate < 0:
        raise DomainError(f"rate must be positive, got {rate}")
    if k <= 0:
        return math.exp(rate)
    if rate == 0.0:
        return 0.0
    if rate <= _SERIES_SWITCH:
        # term_0 = rate**k / k!, term_{j+1} = term_j * rate / (k + j + 1)
        term = math.exp(k * math.log(rate) - math.lgamma(k + 1))
        total = term
        i = k
        while term > total * _SERIES_RELTOL:
            i += 1
            term *= rate / i
            total += term
        return total
    head = 0.0
    for i in range(k):
        head += math.exp(i * math.log(rate) - math.lgamma(i + 1))
    return math.exp(rate) - head


def mean_from_rate(k: int, rate: float) -> float:
    """Mean of the k-truncated Poisson with the given rate."""
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    return rate * exp_series_tail(k - 1, rate) / exp_series_tail(k, rate)


def _factorial_ratio(k: int, rate: float) -> float:
    """E[Y(Y-1)] / E[Y]: equals rate * tail(k-2) / tail(k-1)."""
    return rate * exp_series_tail(k - 2, rate) / exp_series_tail(k - 1, rate)


@lru_cache(maxsize=1024)
def solve_rate(mean: float, k: int = 1) -> float:
    """Invert the mean map: the unique rate > 0 whose k-truncated Poisson
    has the given mean.

    The map rate -> mean is strictly increasing with range (max(k, 0), inf),
    so a mean <= k is out of domain.  Bracketed bisection followed by a few
    Newton steps; relative residual is verified to be <= 1e-13.  Cached:
    samplers re-solve the same mean for every draw.
    """
    if not mean > k or not mean > 0:
        raise DomainError(f"mean must exceed max(k, 0) = {max(k, 0)}, got {mean}")
    if k <= 0:
        # Truncation at or below zero leaves a plain Poisson: mean == rate.
        return float(mean)

    lo, hi = 1e-12, max(2.0 * mean, 50.0)
    while mean_from_rate(k, lo) >= mean:
        lo *= 1e-6
        if lo < 1e-290:
            raise DomainError(f"mean {mean} too close to the cutoff {k} to bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if mean_from_rate(k, mid) < mean:
            lo = mid
        else:
            hi = mid
    rate = 0.5 * (lo + hi)
    # Newton polish; d mean / d rate = (mean/rate) * (1 + eta - mean) with
    # eta the factorial ratio, which is the variance over the rate.
    for _ in range(5):
        c = mean_from_rate(k, rate)
        slope = (c / rate) * (1.0 + _factorial_ratio(k, rate) - c)
        if slope <= 0:
            break
        step = (c - mean) / slope
        if rate - step <= 0:
            break
        rate -= step
    residual = abs(mean_from_rate(k, rate) - mean)
    if residual > 1e-13 * max(1.0, mean):
        raise ArithmeticError(
            f"rate solve did not converge: residual {residual:.3e} at mean={mean}, k={k}"
        )
    return rate


@dataclass(frozen=True)
class TruncatedPoisson:
    """A k-truncated Poisson distribution with its derived statistics.

    Attributes
    ----------
    k:
        Truncation cutoff; support is the integers >= max(k, 0) (all of
        0, 1, 2, ... when k <= 0).
    rate:
        The Poisson rate parameter.
    mean:
        E[Y], always >= rate.
    factorial_ratio:
        E[Y(Y-1)] / E[Y].  The variance is mean * (1 + factorial_ratio - mean);
        for k = 1 the ratio equals the rate.
    """

    k: int
    rate: float
    mean: float
    factorial_ratio: float

    @classmethod
    def from_rate(cls, k: int, rate: float) -> "TruncatedPoisson":
        if rate <= 0:
            raise DomainError(f"rate must be positive, got {rate}")
        return cls(k, float(rate), mean_from_rate(k, rate), _factorial_ratio(k, rate))

    @classmethod
    def from_mean(cls, mean: float, k: int = 1) -> "TruncatedPoisson":
        return cls.from_rate(k, solve_rate(mean, k))

    @property
    def variance(self) -> float:
        return self.mean * (1.0 + self.factorial_ratio - self.mean)

    def pmf(self, i: int) -> float:
        """P(Y = i); zero below the cutoff.  Accurate to ~1e-12 relative."""
        if i < max(self.k, 0):
            return 0.0
        log_norm = math.log(exp_series_tail(self.k, self.rate))
        return math.exp(i * math.log(self.rate) - math.lgamma(i + 1) - log_norm)

    def support_table(self) -> tuple[int, np.ndarray]:
        """(first value, pmf array) with the tail truncated below 1e-16."""
        return _support_table(self.k, self.rate)

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Draw from the distribution; scalar int for size=None."""
        n = 1 if size is None else int(size)
        first, _, _, _ = _sampler_tables(self.k, self.rate)
        idx = _draw_indices(self.k, self.rate, n, rng)
        values = idx.astype(np.int64) + first
        if size is None:
            return int(values[0])
        return values


@dataclass(frozen=True)
class DegreeSequence:
    """A positive integer degree vector with its sum and minimum tracked."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("degree sequence must be a nonempty 1-D vector")
        if (arr < 0).any():
            raise DomainError("degrees must be nonnegative")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def total(self) -> int:
        return int(self.values.sum())

    @property
    def minimum(self) -> int:
        return int(self.values.min())


@lru_cache(maxsize=64)
def _support_table(k: int, rate: float) -> tuple[int, np.ndarray]:
    """Truncated pmf table starting at max(k, 0).

    The support is cut at the first K where the remaining tail mass is below
    1e-16 of the total; the table is renormalised so it sums to one.
    """
    first = max(k, 0)
    norm = exp_series_tail(k, rate)
    probs = []
    term = math.exp(first * math.log(rate) - math.lgamma(first + 1)) if rate > 0 else 0.0
    i = first
    while True:
        probs.append(term / norm)
        i += 1
        term *= rate / i
        # Once i >= 2*rate the term ratio is at most 1/2, so the dropped tail
        # is at most the current term, itself below the threshold.
        if len(probs) >= 2 and term <= _TAIL_EPS * norm and i >= 2.0 * rate:
            break
        if len(probs) > 100000:
            raise ArithmeticError("support table did not converge")
    arr = np.asarray(probs, dtype=np.float64)
    return first, arr / arr.sum()


@lru_cache(maxsize=64)
def _sampler_tables(k: int, rate: float) -> tuple[int, np.ndarray, np.ndarray, int]:
    """(first value, cdf, cell lookup table, lut size) for inverse-CDF sampling.

    The lookup table maps the top _LUT_BITS bits of a uniform to a pmf index;
    cells containing a cdf boundary hold a sentinel and are resolved exactly
    with a refined uniform.  Sampling through the table is therefore exact
    inverse-CDF sampling for the float64 cdf.
    """
    first, probs = _support_table(k, rate)
    if probs.size >= _LUT_SENTINEL:
        raise ArithmeticError("support too wide for the 8-bit lookup table")
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    lut_size = 1 << _LUT_BITS
    edges = np.arange(lut_size, dtype=np.float64) / lut_size
    lut = np.searchsorted(cdf, edges, side="right").astype(np.uint8)
    boundary = np.minimum((cdf * lut_size).astype(np.int64), lut_size - 1)
    lut[boundary] = _LUT_SENTINEL
    return first, cdf, lut, lut_size


def _draw_indices(k: int, rate: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n pmf-table indices (uint8), exact inverse-CDF draws."""
    first, cdf, lut, lut_size = _sampler_tables(k, rate)
    cells = rng.integers(0, lut_size, size=n, dtype=np.uint16)
    idx = lut[cells]
    miss = np.flatnonzero(idx == _LUT_SENTINEL)
    if miss.size:
        # Refine only boundary cells: (cell + U) / lut_size is uniform on the
        # cell, so the composite uniform keeps the draw exact.
        u = (cells[miss].astype(np.float64) + rng.random(miss.size)) / lut_size
        idx[miss] = np.searchsorted(cdf, u, side="right").astype(np.uint8)
    return idx


def sample_conditioned_sum(
    n: int,
    total: int,
    k: int = 1,
    rng: np.random.Generator | None = None,
    rate: float | None = None,
    size: int | None = None,
    max_attempts: int = 10**7,
) -> np.ndarray:
    """i.i.d. k-truncated Poisson vector(s) of length n conditioned on the sum.

    The conditional law does not depend on the rate, so ``rate`` defaults to
    the value that maximises the acceptance probability (the one whose mean
    is total/n).  Rejection needs Theta(sqrt(total - k*n)) attempts there.
    After 1e6 rejected attempts the sampler falls back to exact sequential
    DP sampling when n <= 500; for larger n it raises ResourceLimitError at
    ``max_attempts`` (only reachable with a far-off rate override).

    Returns shape (n,) for size=None, else (size, n).
    """
    if rng is None:
        raise DomainError("an explicit seeded generator is required")
    if n < 1:
        raise DomainError(f"need at least one variable, got n={n}")
    if total < k * n:
        raise DomainError(f"total {total} infeasible: below the minimum {k * n}")
    want = 1 if size is None else int(size)

    if total == k * n:
        # Only one vector is feasible: every variable at the cutoff.
        out = np.full((want, n), k, dtype=np.int64)
        return out[0] if size is None else out

    if rate is None:
        rate = solve_rate(total / n, k)
    first, _, _, _ = _sampler_tables(k, rate)
    target = total - first * n
    # Size the draw chunks so a chunk is expected to contain ~2x the rows
    # still needed; the local-CLT acceptance estimate only has to be rough.
    variance = TruncatedPoisson.from_rate(k, rate).variance
    p_accept = 1.0 / math.sqrt(2.0 * math.pi * n * max(variance, 1e-12))
    row_cap = max(4, min(4_000_000 // n, 65536))

    hits: list[np.ndarray] = []
    got = 0
    attempts = 0
    while got < want:
        need = math.ceil(2.0 * (want - got) / p_accept)
        rows_per_chunk = max(4, min(row_cap, need))
        chunk = _draw_indices(k, rate, rows_per_chunk * n, rng).reshape(rows_per_chunk, n)
        sums = chunk.sum(axis=1, dtype=np.int64)
        rows = np.flatnonzero(sums == target)
        if rows.size:
            take = rows[: want - got]
            hits.append(chunk[take].astype(np.int64) + first)
            got += take.size
        attempts += rows_per_chunk
        if got == 0 and attempts > 10**6 and n <= 500:
            dp = _sample_conditioned_dp(n, total, k, rate, rng, want)
            return dp[0] if size is None else dp
        if attempts > max_attempts and got < want:
            raise ResourceLimitError(
                f"conditioned sampling exceeded {max_attempts} attempted rows "
                f"(n={n}, total={total}, k={k}, rate={rate:.4g})"
            )
    out = np.concatenate(hits, axis=0)
    return out[0] if size is None else out


def _sum_pmf_powers(probs: np.ndarray, n: int, cap: int) -> np.ndarray:
    """Distribution of the sum of n i.i.d. table indices, truncated at cap.

    Binary exponentiation of the pmf vector under convolution.  Entries
    beyond index ``cap`` can never contribute to sums <= cap and are sliced
    away after every convolution.  Tiny positive values below 1e-300 are
    flushed to zero and reported by the caller via a warning flag.
    """
    def conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.size + b.size < 4096:
            out = np.convolve(a, b)
        else:
            out = fftconvolve(a, b)
            np.clip(out, 0.0, None, out=out)
        return out[: cap + 1]

    result: np.ndarray | None = None
    base = probs[: cap + 1].copy()
    e = n
    while e:
        if e & 1:
            result = base.copy() if result is None else conv(result, base)
        e >>= 1
        if e:
            base = conv(base, base)
    assert result is not None
    return result


def exact_sum_probability(n: int, total: int, dist: TruncatedPoisson) -> float:
    """P(Y_1 + ... + Y_n = total) for i.i.d. copies of ``dist``, by exact DP.

    Deterministic convolution with per-variable support truncated below
    1e-16 tail mass.  Probabilities under 1e-300 are flushed to zero; when
    that happens a RuntimeWarning records the underflow.
    """
    if n < 1:
        raise DomainError(f"need at least one variable, got n={n}")
    first, probs = _support_table(dist.k, dist.rate)
    target = total - first * n
    if target < 0 or target > (probs.size - 1) * n:
        return 0.0
    result = _sum_pmf_powers(probs, n, target)
    if target >= result.size:
        return 0.0
    positive = result[result > 0]
    if positive.size and positive.min() < _UNDERFLOW:
        warnings.warn(
            "sum DP underflow: probabilities below 1e-300 flushed to zero",
            RuntimeWarning,
            stacklevel=2,
        )
        result[result < _UNDERFLOW] = 0.0
    return float(result[target])


def _sample_conditioned_dp(
    n: int,
    total: int,
    k: int,
    rate: float,
    rng: np.random.Generator,
    want: int,
) -> np.ndarray:
    """Exact sequential sampler: draw each variable from its conditional law
    given the remaining sum, using partial-sum DP tables.  Fallback path for
    small n when rejection is hopeless (far-off rate override)."""
    first, probs = _support_table(k, rate)
    target = total - first * n
    width = probs.size
    # tables[j][s] = P(sum of j i.i.d. indices == s), s <= target
    tables = [np.zeros(target + 1) for _ in range(n + 1)]
    tables[0][0] = 1.0
    for j in range(1, n + 1):
        tables[j] = np.convolve(tables[j - 1], probs)[: target + 1]
    if tables[n][target] <= 0:
        raise DomainError(f"total {total} unreachable within the truncated support")
    out = np.empty((want, n), dtype=np.int64)
    for row in range(want):
        remaining = target
        for j in range(n):
            vars_left = n - j - 1
            hi = min(width - 1, remaining)
            y = np.arange(hi + 1)
            w = probs[: hi + 1] * tables[vars_left][remaining - y]
            tot = w.sum()
            u = rng.random() * tot
            val = int(np.searchsorted(np.cumsum(w), u, side="right"))
            val = min(val, hi)
            out[row, j] = first + val
            remaining -= val
    return out
