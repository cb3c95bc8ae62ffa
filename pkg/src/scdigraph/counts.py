"""Log-space asymptotic counting formulas for strongly connected digraphs,
dicores, and minimum-degree digraphs, with their limiting constants.

Every count is returned as a natural logarithm (the raw counts overflow any
fixed-width float once m reaches the hundreds).  Shared sub-expressions are
factored so that the algebraic identities between the formulas hold to
machine precision:

* strong-count log minus dicore-count log equals the log of the limiting
  strong-connectivity probability,
* the loop-free variants differ from the loopy ones by exactly
  c*(1-e^-rate)^2 (strong) and c (minimum-degree),
* the expected-s-cycle limit is exactly minus the log of the limiting
  strong-connectivity probability.

Validity: the formulas are asymptotic in n for m/n bounded away from 1 and
m = O(n log n); a RuntimeWarning (not an error) is raised outside that
regime.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError
from .truncated_poisson import (
    _factorial_ratio,
    exp_series_tail,
    mean_from_rate,
    solve_rate,
)

__all__ = [
    "LogCount",
    "FORMS",
    "log_count_strong",
    "log_count_dicore",
    "log_count_min_degree",
    "limiting_strong_probability",
    "limiting_simple_probability",
    "expected_scycles",
    "expected_scycles_limit",
    "asymptotic_sum_probability",
    "sci_notation",
]

# Switch between direct expm1 evaluation and asymptotic log1p evaluation of
# the limiting strong-connectivity probability.  Below the switch the expm1
# differences are cancellation-free; above it the log1p form avoids the
# rate*epsilon absolute error that the log of huge exponentials accumulates.
_PHI_LOG_SWITCH = 30.0
# Beyond m = _REGIME_FACTOR * n * log n the asymptotic guarantee lapses.
_REGIME_FACTOR = 3.0

FORMS = (
    "strong",
    "strong_sparse_limit",
    "strong_dense_limit",
    "strong_loop_free",
    "dicore",
    "min_degree",
    "min_degree_loop_free",
)


@dataclass(frozen=True)
class LogCount:
    """A count in natural-log space with the formula used and its parameters.

    ``form`` is one of FORMS; ``params`` records n, m, the degree cutoffs,
    the solved rates and factorial ratios, and the mean c = m/n.
    """

    log_value: float
    form: str
    params: dict

    def __post_init__(self) -> None:
        if self.form not in FORMS:
            raise DomainError(f"unknown form {self.form!r}")
        if not math.isfinite(self.log_value):
            raise DomainError(f"non-finite log count for form {self.form!r}")

    @property
    def log10(self) -> float:
        return self.log_value / math.log(10.0)

    @property
    def sci(self) -> str:
        return sci_notation(self.log_value)


def sci_notation(log_value: float) -> str:
    """Render exp(log_value) as ``d.ddd×10^e`` without overflow."""
    if not math.isfinite(log_value):
        raise DomainError(f"log value must be finite, got {log_value}")
    log10 = log_value / math.log(10.0)
    exponent = math.floor(log10)
    mantissa = 10.0 ** (log10 - exponent)
    if mantissa >= 9.9995:  # rounding pushed the mantissa to 10
        mantissa /= 10.0
        exponent += 1
    return f"{mantissa:.3f}×10^{exponent}"


def _log_expm1(rate: float) -> float:
    """log(e^rate - 1), stable at both ends."""
    if rate > 40.0:
        return rate + math.log1p(-math.exp(-rate))
    return math.log(math.expm1(rate))


def _log_tail(k: int, rate: float) -> float:
    """log of the exponential series tail; safe for large rates."""
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    if k <= 0:
        return rate
    if rate <= 30.0:
        return math.log(exp_series_tail(k, rate))
    # tail = e^rate * (1 - head * e^-rate) with head < e^rate strictly
    log_terms = [i * math.log(rate) - math.lgamma(i + 1) for i in range(k)]
    peak = max(log_terms)
    log_head = peak + math.log(sum(math.exp(t - peak) for t in log_terms))
    return rate + math.log1p(-math.exp(log_head - rate))


def _log_phi(rate: float) -> float:
    """Natural log of the limiting strong-connectivity probability
    e^r (e^r - 1 - r)^2 / ((e^2r - e^r - r)(e^r - 1)), evaluated without
    cancellation at small rates (expm1 differences) and without overflow at
    large rates (log1p of exponentially small corrections)."""
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    if rate <= _PHI_LOG_SWITCH:
        a = math.expm1(rate) - rate
        b = math.expm1(2.0 * rate) - math.expm1(rate) - rate
        c = math.expm1(rate)
        return rate + 2.0 * math.log(a) - math.log(b) - math.log(c)
    return (
        2.0 * math.log1p(-(1.0 + rate) * math.exp(-rate))
        - math.log1p(-math.exp(-rate) - rate * math.exp(-2.0 * rate))
        - math.log1p(-math.exp(-rate))
    )


def _loop_series_term(rate: float, mean: float) -> float:
    """c*(2 e^-rate - e^-2rate): the order-1 term of the s-cycle series and
    the log-ratio between the loop-free and loopy limiting probabilities."""
    e1 = math.exp(-rate)
    return mean * (2.0 * e1 - e1 * e1)


def _regime_warning(n: int, m: int) -> None:
    if n >= 2 and m > _REGIME_FACTOR * n * math.log(n):
        warnings.warn(
            f"m={m} exceeds {_REGIME_FACTOR:g}*n*log(n); the asymptotic "
            "guarantee holds for m = O(n log n) only",
            RuntimeWarning,
            stacklevel=3,
        )


def _check_window(n: int, m: int, kplus: int, kminus: int) -> float:
    if n < 1:
        raise DomainError(f"need at least one vertex, got n={n}")
    if kplus < 1 or kminus < 1:
        raise DomainError("degree cutoffs must be at least 1")
    need = max(kplus, kminus) * n
    if m <= need:
        raise DomainError(f"need m > {need} for n={n}, cutoffs ({kplus}, {kminus})")
    _regime_warning(n, m)
    return m / n


def log_count_strong(
    n: int, m: int, loop_free: bool = False, form: str = "main"
) -> LogCount:
    """Log of the asymptotic number of strongly connected digraphs with n
    vertices and m arcs (loops allowed unless loop_free).

    ``form`` selects the evaluation: "main" (full formula), "sparse" (the
    c -> 1 limit shape), or "dense" (the c -> infinity limit shape).  The
    loop-free correction subtracts c*(1-e^-rate)^2 in every form.
    """
    if form not in ("main", "sparse", "dense"):
        raise DomainError(f"form must be main, sparse, or dense, got {form!r}")
    mean = _check_window(n, m, 1, 1)
    rate = solve_rate(mean, 1)
    base = math.lgamma(m) + 2.0 * n * _log_expm1(rate) - 2.0 * m * math.log(rate)
    if form == "sparse":
        log_value = base - math.log(6.0 * math.pi)
        name = "strong_sparse_limit"
    elif form == "dense":
        log_value = base - math.log(2.0 * math.pi) - rate * rate / 2.0
        name = "strong_dense_limit"
    else:
        log_value = (
            base
            - math.log(2.0 * math.pi * (1.0 + rate - mean))
            - rate * rate / 2.0
            + _log_phi(rate)
        )
        name = "strong"
    if loop_free:
        log_value -= mean * (-math.expm1(-rate)) ** 2
        if form == "main":
            name = "strong_loop_free"
    params = _params(n, m, 1, 1, rate, rate, mean, loop_free)
    return LogCount(log_value, name, params)


def log_count_dicore(n: int, m: int, loop_free: bool = False) -> LogCount:
    """Log of the asymptotic number of digraphs with all in- and outdegrees
    at least 1 (minimum-degree (1,1), the dicores)."""
    mean = _check_window(n, m, 1, 1)
    rate = solve_rate(mean, 1)
    log_value = (
        math.lgamma(m + 1)
        + 2.0 * n * _log_expm1(rate)
        - math.log(2.0 * math.pi * n * mean * (1.0 + rate - mean))
        - 2.0 * m * math.log(rate)
        - rate * rate / 2.0
    )
    name = "dicore"
    if loop_free:
        log_value -= mean
        name = "min_degree_loop_free"
    params = _params(n, m, 1, 1, rate, rate, mean, loop_free)
    return LogCount(log_value, name, params)


def log_count_min_degree(
    n: int, m: int, kplus: int, kminus: int, loop_free: bool = False
) -> LogCount:
    """Log of the asymptotic number of digraphs with outdegrees >= kplus and
    indegrees >= kminus (loop-free subtracts exactly c)."""
    mean = _check_window(n, m, kplus, kminus)
    rate_out = solve_rate(mean, kplus)
    rate_in = solve_rate(mean, kminus)
    ratio_out = _factorial_ratio(kplus, rate_out)
    ratio_in = _factorial_ratio(kminus, rate_in)
    log_value = (
        math.lgamma(m)
        + n * _log_tail(kplus, rate_out)
        + n * _log_tail(kminus, rate_in)
        - math.log(2.0 * math.pi)
        - 0.5 * math.log((1.0 + ratio_out - mean) * (1.0 + ratio_in - mean))
        - m * math.log(rate_out)
        - m * math.log(rate_in)
        - rate_out * rate_in / 2.0
    )
    name = "min_degree"
    if loop_free:
        log_value -= mean
        name = "min_degree_loop_free"
    params = _params(n, m, kplus, kminus, rate_out, rate_in, mean, loop_free)
    return LogCount(log_value, name, params)


def _params(n, m, kplus, kminus, rate_out, rate_in, mean, loop_free) -> dict:
    return {
        "n": n,
        "m": m,
        "kplus": kplus,
        "kminus": kminus,
        "rate_out": rate_out,
        "rate_in": rate_in,
        "ratio_out": _factorial_ratio(kplus, rate_out),
        "ratio_in": _factorial_ratio(kminus, rate_in),
        "mean": mean,
        "loop_free": loop_free,
    }


def limiting_strong_probability(rate: float, loop_free: bool = False) -> float:
    """Limiting probability that a uniform random dicore with rate parameter
    ``rate`` is strongly connected; the loop-free mode multiplies by
    e^(c*(2 e^-rate - e^-2rate)) with c the matching mean."""
    log_p = _log_phi(rate)
    if loop_free:
        log_p += _loop_series_term(rate, mean_from_rate(1, rate))
    return math.exp(log_p)


def limiting_simple_probability(
    rate_out: float, rate_in: float, mean: float | None = None, loop_free: bool = False
) -> float:
    """Limiting probability that a random pairing induces a simple digraph:
    e^(-rate_out*rate_in/2), times e^-c without loops (c = ``mean``)."""
    if rate_out <= 0 or rate_in <= 0:
        raise DomainError("rates must be positive")
    log_p = -rate_out * rate_in / 2.0
    if loop_free:
        if mean is None:
            raise DomainError("loop-free simple probability needs the mean")
        log_p -= mean
    return math.exp(log_p)


def expected_scycles(mean: float, max_len: int, loop_free: bool = False) -> float:
    """Expected number of s-cycles of order <= max_len in a uniform random
    dicore with the given mean degree, in the large-n limit.

    The series is sum over j of (2 x^j - y^j)/j with x = c e^-rate and
    y = c e^-2rate; loops (j = 1) are excluded in loop-free mode.  Every
    summand is positive since y < x < 1.
    """
    if mean <= 1.0:
        raise DomainError(f"mean must exceed 1, got {mean}")
    rate = solve_rate(mean, 1)
    x = mean * math.exp(-rate)
    y = mean * math.exp(-2.0 * rate)
    start = 2 if loop_free else 1
    total = 0.0
    for j in range(start, max_len + 1):
        total += (2.0 * x**j - y**j) / j
    return total


def expected_scycles_limit(mean: float, loop_free: bool = False) -> float:
    """Limit of expected_scycles as max_len grows; equals minus the log of
    the limiting strong-connectivity probability by construction."""
    if mean <= 1.0:
        raise DomainError(f"mean must exceed 1, got {mean}")
    rate = solve_rate(mean, 1)
    total = -_log_phi(rate)
    if loop_free:
        total -= _loop_series_term(rate, mean)
    return total


def asymptotic_sum_probability(n: int, total: int, k: int = 1) -> float:
    """Local central-limit value of P(Y_1 + ... + Y_n = total) for i.i.d.
    k-truncated Poisson variables conditioned to mean total/n:
    1/sqrt(2 pi n c (1 + eta - c))."""
    if n < 1:
        raise DomainError(f"need at least one variable, got n={n}")
    mean = total / n
    if mean <= max(k, 0):
        raise DomainError(f"total {total} infeasible for cutoff {k}")
    rate = solve_rate(mean, k)
    ratio = _factorial_ratio(k, rate)
    return 1.0 / math.sqrt(2.0 * math.pi * n * mean * (1.0 + ratio - mean))
