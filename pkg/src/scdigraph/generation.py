"""Uniform random dicores and seeded Monte Carlo experiments.

The sampling backbone is the directed pairing model: draw out- and in-degree
sequences from the conditioned truncated-Poisson law, match the m out-points
to the m in-points by a uniform bijection, and read off the induced
multidigraph.  Conditioning a fresh pairing draw on the induced digraph being
simple yields an exactly uniform simple digraph with the requested minimum
degrees, which is how ``sample_dicore`` works.

For the sparse regime (m close to n) the module also samples heart
configurations: the vertices of total degree >= 3 keep their degrees and are
matched directly, and the remaining (1, 1)-vertices are spread over the heart
arcs as ordered chains, giving a uniform preheart.

Monte Carlo estimators consume trials in fixed-size chunks, each chunk with
its own generator seeded by (seed, chunk index), so estimates do not depend
on how chunks would be scheduled over workers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .counts import (
    expected_scycles,
    limiting_simple_probability,
    limiting_strong_probability,
)
from .digraph import Digraph, MultiDigraph, enumerate_s_cycles, is_strongly_connected
from .errors import DomainError, ResourceLimitError
from .truncated_poisson import DegreeSequence, sample_conditioned_sum, solve_rate

__all__ = [
    "HeartConfiguration",
    "McReport",
    "Pairing",
    "mc_heart_strong",
    "mc_scycle_census",
    "mc_simple_fraction",
    "mc_strong_probability",
    "random_pairing",
    "sample_dicore",
    "sample_heart_configuration",
]

# Trials per rng stream; fixed so results are independent of worker layout.
_CHUNK_TRIALS = 256
# Pairing attempts served by one degree-sequence draw (mc_simple_fraction)
# or drawn as one conditioned batch (sample_dicore).
_DEGREE_BATCH = 64


def _check_jobs(jobs: int) -> None:
    if jobs < 1:
        raise DomainError(f"jobs must be positive, got {jobs}")


def _chunk_streams(seed: int, total: int, chunk: int = _CHUNK_TRIALS):
    """Yield (generator, trial count) per fixed-size chunk of ``total``."""
    if not (0 <= seed < 2**64):
        raise DomainError("seed must be a 64-bit unsigned integer")
    if total < 1:
        raise DomainError(f"need at least one trial, got {total}")
    for index, start in enumerate(range(0, total, chunk)):
        yield np.random.default_rng([seed, index]), min(chunk, total - start)


def _degree_rate(n: int, m: int, k: int):
    """Rate of the conditioned degree law, or None when m == k*n forces the
    constant all-k sequence (rate plays no role there)."""
    if k < 1:
        raise DomainError(f"degree cutoff must be >= 1, got {k}")
    if n < 1:
        raise DomainError(f"need at least one vertex, got n={n}")
    if m < k * n:
        raise DomainError(f"m={m} infeasible: minimum degree {k} needs m >= {k * n}")
    if m == k * n:
        return None
    return solve_rate(m / n, k)


def _degree_rows(n, m, k, rate, rng, size):
    if rate is None:
        return np.full((size, n), k, dtype=np.int64)
    return sample_conditioned_sum(n, m, k=k, rng=rng, rate=rate, size=size)


@dataclass(frozen=True, eq=False)
class Pairing:
    """A pairing-model configuration.

    Vertex i owns ``out_degrees.values[i]`` out-points and
    ``in_degrees.values[i]`` in-points, numbered consecutively by vertex;
    ``matching[p]`` is the in-point matched to out-point p.  Reading each
    matched pair back to its owners induces a multidigraph with exactly the
    declared degrees.
    """

    out_degrees: DegreeSequence
    in_degrees: DegreeSequence
    matching: tuple

    def __post_init__(self) -> None:
        if len(self.out_degrees) != len(self.in_degrees):
            raise DomainError("degree sequences must cover the same vertices")
        if self.out_degrees.total != self.in_degrees.total:
            raise DomainError("out- and in-degree totals must match")
        matching = tuple(int(p) for p in self.matching)
        object.__setattr__(self, "matching", matching)
        if sorted(matching) != list(range(self.out_degrees.total)):
            raise DomainError("matching must be a bijection of the m points")

    @property
    def n(self) -> int:
        return len(self.out_degrees)

    @property
    def m(self) -> int:
        return self.out_degrees.total

    def arcs(self) -> tuple:
        """Induced arcs, one per out-point in point order."""
        owner_out = np.repeat(np.arange(self.n), self.out_degrees.values)
        owner_in = np.repeat(np.arange(self.n), self.in_degrees.values)
        heads = owner_in[np.asarray(self.matching, dtype=np.int64)]
        return tuple(zip(owner_out.tolist(), heads.tolist()))

    def to_multidigraph(self) -> MultiDigraph:
        return MultiDigraph(self.n, self.arcs())

    def is_simple(self, loop_free: bool = False) -> bool:
        arcs = self.arcs()
        if loop_free and any(u == v for u, v in arcs):
            return False
        return len(set(arcs)) == len(arcs)


def random_pairing(out_degrees, in_degrees, rng) -> Pairing:
    """Uniform random pairing of the given out- and in-degree sequences.

    Accepts ``DegreeSequence`` objects or plain integer vectors.
    """
    if rng is None:
        raise DomainError("an explicit seeded generator is required")
    if not isinstance(out_degrees, DegreeSequence):
        out_degrees = DegreeSequence(np.asarray(out_degrees, dtype=np.int64))
    if not isinstance(in_degrees, DegreeSequence):
        in_degrees = DegreeSequence(np.asarray(in_degrees, dtype=np.int64))
    matching = tuple(int(p) for p in rng.permutation(out_degrees.total))
    return Pairing(out_degrees, in_degrees, matching)


def sample_dicore(
    n: int,
    m: int,
    kplus: int = 1,
    kminus: int = 1,
    loop_free: bool = False,
    rng: np.random.Generator | None = None,
    max_pairings: int = 10**7,
) -> Digraph:
    """Exactly uniform simple digraph with min out/in degrees >= (kplus, kminus).

    Every attempt draws fresh degree sequences and a fresh uniform matching,
    and is accepted only if the induced multidigraph has no repeated arcs
    (and no loops when ``loop_free``); acceptance therefore restricts the
    uniform pairing measure, which makes the accepted digraph exactly uniform.
    Degree rows are drawn in growing batches purely as an optimisation: each
    attempt still consumes one fresh i.i.d. row per side.

    Raises ResourceLimitError after ``max_pairings`` rejected attempts with
    the expected-acceptance estimate e^(-rate_out*rate_in/2) (times e^-c
    loop-free); means above ~4 make uniform rejection sampling impractical.
    """
    if rng is None:
        raise DomainError("an explicit seeded generator is required")
    capacity = n * (n - 1) if loop_free else n * n
    if m > capacity:
        raise DomainError(f"no simple digraph: m={m} exceeds {capacity} distinct arcs")
    rate_out = _degree_rate(n, m, kplus)
    rate_in = _degree_rate(n, m, kminus)

    vertex_ids = np.arange(n)
    remaining = max_pairings
    # Start near the expected number of rejections so low-acceptance regimes
    # do not crawl through the doubling ramp; batching only groups the degree
    # draws, each attempt still consumes a fresh row.
    guess = math.exp(
        -(rate_out or 0.0) * (rate_in or 0.0) / 2.0 - (m / n if loop_free else 0.0)
    )
    batch = int(min(_DEGREE_BATCH, max(4, round(1.0 / max(guess, 1e-9)))))
    while remaining > 0:
        size = min(batch, remaining)
        outs = _degree_rows(n, m, kplus, rate_out, rng, size)
        ins = _degree_rows(n, m, kminus, rate_in, rng, size)
        for i in range(size):
            tails = np.repeat(vertex_ids, outs[i])
            heads = np.repeat(vertex_ids, ins[i])[rng.permutation(m)]
            if loop_free and (tails == heads).any():
                continue
            codes = np.sort(tails * n + heads)
            if (codes[1:] == codes[:-1]).any():
                continue
            return Digraph(
                n, frozenset(zip(tails.tolist(), heads.tolist())),
                allow_loops=not loop_free,
            )
        remaining -= size
        batch = min(batch * 2, _DEGREE_BATCH)

    acceptance = math.exp(
        -(rate_out or 0.0) * (rate_in or 0.0) / 2.0 - (m / n if loop_free else 0.0)
    )
    raise ResourceLimitError(
        f"no simple pairing accepted in {max_pairings} draws at n={n}, m={m} "
        f"(expected acceptance about {acceptance:.3e}); this regime is "
        "impractical for exact uniform rejection sampling"
    )


def _fmt12(x: float) -> str:
    return "%.12g" % x


@dataclass(frozen=True, eq=False)
class McReport:
    """Result of a seeded Monte Carlo experiment.

    ``to_json`` emits exactly the eight stable keys in a fixed order with
    floats at 12 significant digits; ``diagnostics`` stays out of the JSON
    so machine output keeps a stable schema.
    """

    experiment: str
    n: int
    m: int
    trials: int
    estimate: float
    stderr: float
    theory: float
    seed: int
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return (
            '{"experiment": "%s", "n": %d, "m": %d, "trials": %d, '
            '"estimate": %s, "stderr": %s, "theory": %s, "seed": %d}'
            % (
                self.experiment,
                self.n,
                self.m,
                self.trials,
                _fmt12(self.estimate),
                _fmt12(self.stderr),
                _fmt12(self.theory),
                self.seed,
            )
        )


def _binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


def mc_simple_fraction(
    n: int, m: int, trials: int, seed: int, loop_free: bool = False, jobs: int = 1
) -> McReport:
    """Fraction of ``trials`` random pairings whose induced digraph is simple.

    The theory value is the limiting simple probability
    e^(-rate^2/2) (times e^-c when loops are forbidden).  Pairings are drawn
    in batches that share one degree-sequence draw; every pairing is still an
    unbiased draw of the joint law, and with batches this small the
    clustering contribution to the standard error is far below the binomial
    term, so the reported stderr remains accurate.
    """
    _check_jobs(jobs)
    rate = _degree_rate(n, m, 1)
    mean = m / n
    vertex_ids = np.arange(n)
    simple = 0
    for rng, count in _chunk_streams(seed, trials):
        done = 0
        while done < count:
            size = min(_DEGREE_BATCH, count - done)
            tails = np.repeat(vertex_ids, _degree_rows(n, m, 1, rate, rng, 1)[0])
            heads = np.repeat(vertex_ids, _degree_rows(n, m, 1, rate, rng, 1)[0])
            matched = rng.permuted(np.tile(heads, (size, 1)), axis=1)
            ok = np.ones(size, dtype=bool)
            if loop_free:
                ok &= ~(matched == tails).any(axis=1)
            codes = np.sort(tails * n + matched, axis=1)
            ok &= ~(codes[:, 1:] == codes[:, :-1]).any(axis=1)
            simple += int(ok.sum())
            done += size
    estimate = simple / trials
    if rate is None:
        theory = math.exp(-mean) if loop_free else 1.0
    else:
        theory = limiting_simple_probability(
            rate, rate, mean=mean if loop_free else None, loop_free=loop_free
        )
    return McReport(
        "simple", n, m, trials, estimate, _binomial_stderr(estimate, trials),
        theory, seed, {"batch_size": _DEGREE_BATCH},
    )


def mc_strong_probability(
    n: int, m: int, trials: int, seed: int, loop_free: bool = False, jobs: int = 1
) -> McReport:
    """Fraction of ``trials`` uniform dicores that are strongly connected.

    The theory value is the limiting strong-connectivity probability for the
    rate matching the mean degree m/n (zero at the degenerate m == n
    boundary, where the limit vanishes).
    """
    _check_jobs(jobs)
    mean = m / n
    if not 1.1 < mean < 4.0:
        warnings.warn(
            f"mean degree {mean:.4g} outside the recommended window (1.1, 4); "
            "rejection may be slow and the finite-size error large",
            RuntimeWarning,
            stacklevel=2,
        )
    rate = _degree_rate(n, m, 1)
    strong = 0
    for rng, count in _chunk_streams(seed, trials):
        for _ in range(count):
            graph = sample_dicore(n, m, loop_free=loop_free, rng=rng)
            strong += is_strongly_connected(graph)
    estimate = strong / trials
    theory = 0.0 if rate is None else limiting_strong_probability(rate, loop_free)
    return McReport(
        "strong", n, m, trials, estimate, _binomial_stderr(estimate, trials),
        theory, seed, {"strong_count": strong},
    )


def mc_scycle_census(
    n: int,
    m: int,
    max_len: int,
    trials: int,
    seed: int,
    loop_free: bool = False,
    jobs: int = 1,
) -> McReport:
    """Mean count of s-cycles of order <= max_len over uniform dicores.

    The theory value is the limiting expectation (the truncated series); the
    limiting law is Poisson, so the empirical variance-to-mean ratio is
    reported in diagnostics as a dispersion check.
    """
    _check_jobs(jobs)
    if max_len < 1:
        raise DomainError(f"max_len must be positive, got {max_len}")
    total = 0
    total_sq = 0
    for rng, count in _chunk_streams(seed, trials):
        for _ in range(count):
            graph = sample_dicore(n, m, loop_free=loop_free, rng=rng)
            found = len(enumerate_s_cycles(graph, max_len=max_len))
            total += found
            total_sq += found * found
    estimate = total / trials
    variance = 0.0
    if trials > 1:
        variance = max(total_sq - trials * estimate * estimate, 0.0) / (trials - 1)
    theory = expected_scycles(m / n, max_len, loop_free=loop_free)
    return McReport(
        "scycles", n, m, trials, estimate, math.sqrt(variance / trials), theory,
        seed,
        {
            "variance": variance,
            "dispersion": variance / estimate if estimate else float("nan"),
            "max_len": max_len,
        },
    )


@dataclass(frozen=True, eq=False)
class HeartConfiguration:
    """A sampled heart configuration plus its preheart assignment.

    Heart vertex i is the original vertex ``vertex_labels[i]`` and owns
    ``out_degrees[i]`` out-points and ``in_degrees[i]`` in-points, numbered
    consecutively; heart arc p joins the owner of out-point p to the owner
    of in-point ``matching[p]``.  ``assignment[p]`` lists, in path order,
    the suppressed (1, 1)-vertices inserted along arc p to form the
    preheart.  ``resamples`` counts degree draws rejected because no vertex
    reached total degree 3.
    """

    n: int
    m: int
    out_degrees: tuple
    in_degrees: tuple
    vertex_labels: tuple
    matching: tuple
    assignment: tuple
    resamples: int = 0

    def __post_init__(self) -> None:
        order = len(self.out_degrees)
        if order < 1:
            raise DomainError("a heart needs at least one vertex")
        if len(self.in_degrees) != order or len(self.vertex_labels) != order:
            raise DomainError("degree and label tuples must cover the heart")
        for dout, din in zip(self.out_degrees, self.in_degrees):
            if dout < 1 or din < 1:
                raise DomainError("heart degrees must be >= 1 on both sides")
            if dout + din < 3:
                raise DomainError("heart vertices need total degree >= 3")
        size = sum(self.out_degrees)
        if sum(self.in_degrees) != size:
            raise DomainError("heart out- and in-degree totals must match")
        if size != self.m - (self.n - order):
            raise DomainError("heart size must equal m minus suppressed count")
        if sorted(self.matching) != list(range(size)):
            raise DomainError("matching must be a bijection of the heart points")
        if len(self.assignment) != size:
            raise DomainError("assignment must cover every heart arc")
        placed = [v for chain in self.assignment for v in chain]
        if sorted(placed + list(self.vertex_labels)) != list(range(self.n)):
            raise DomainError(
                "assignment plus heart labels must partition the vertices"
            )

    @property
    def heart_order(self) -> int:
        return len(self.out_degrees)

    @property
    def heart_size(self) -> int:
        return sum(self.out_degrees)

    def arcs(self) -> tuple:
        """Heart arcs on relabelled vertices, one per out-point in order."""
        ids = np.arange(self.heart_order)
        owner_out = np.repeat(ids, self.out_degrees)
        owner_in = np.repeat(ids, self.in_degrees)
        heads = owner_in[np.asarray(self.matching, dtype=np.int64)]
        return tuple(zip(owner_out.tolist(), heads.tolist()))

    def heart_multidigraph(self) -> MultiDigraph:
        return MultiDigraph(
            self.heart_order, tuple(sorted(self.arcs())), labels=self.vertex_labels
        )

    def to_preheart(self) -> MultiDigraph:
        """Expand every heart arc into the chain through its assigned
        (1, 1)-vertices, back on the original n vertices."""
        arcs = []
        for (tail, head), chain in zip(self.arcs(), self.assignment):
            prev = self.vertex_labels[tail]
            for vertex in chain:
                arcs.append((prev, vertex))
                prev = vertex
            arcs.append((prev, self.vertex_labels[head]))
        return MultiDigraph(self.n, tuple(arcs))


def _random_arc_assignment(arc_count: int, items: list, rng) -> tuple:
    """Spread ``items`` over ``arc_count`` arcs with per-arc linear orders,
    uniformly over all arrangements: the composition of counts comes from a
    uniform stars-and-bars draw and the orders from one global permutation.
    """
    count = len(items)
    if count == 0:
        return ((),) * arc_count
    shuffled = [items[i] for i in rng.permutation(count)]
    if arc_count == 1:
        return (tuple(shuffled),)
    bars = np.sort(rng.choice(count + arc_count - 1, size=arc_count - 1, replace=False))
    edges = np.concatenate(([-1], bars, [count + arc_count - 1]))
    lengths = np.diff(edges) - 1
    out = []
    position = 0
    for length in lengths.tolist():
        out.append(tuple(shuffled[position : position + length]))
        position += length
    return tuple(out)


def sample_heart_configuration(
    n: int, m: int, rng: np.random.Generator | None = None
) -> tuple:
    """Uniform heart configuration and its expanded preheart at (n, m).

    Degree sequences come from the conditioned truncated-Poisson law; the
    heart keeps the vertices of total degree >= 3 with their degrees and a
    uniform matching, and the remaining (1, 1)-vertices are assigned to
    heart arcs with uniform per-arc orderings.  Draws where no vertex
    reaches total degree 3 are resampled and counted; with m > n the
    out-degree sum forces such a vertex, so the loop cannot actually repeat.

    Returns (HeartConfiguration, preheart MultiDigraph).
    """
    if rng is None:
        raise DomainError("an explicit seeded generator is required")
    if m <= n:
        raise DomainError(f"heart sampling needs positive excess, got m-n={m - n}")
    rate = solve_rate(m / n, 1)
    resamples = 0
    while True:
        outs = sample_conditioned_sum(n, m, rng=rng, rate=rate)
        ins = sample_conditioned_sum(n, m, rng=rng, rate=rate)
        totals = outs + ins
        heart_vertices = np.flatnonzero(totals >= 3)
        if heart_vertices.size:
            break
        resamples += 1
    heart_size = int(outs[heart_vertices].sum())
    suppressed = np.flatnonzero(totals == 2)
    config = HeartConfiguration(
        n=n,
        m=m,
        out_degrees=tuple(int(d) for d in outs[heart_vertices]),
        in_degrees=tuple(int(d) for d in ins[heart_vertices]),
        vertex_labels=tuple(int(v) for v in heart_vertices),
        matching=tuple(int(p) for p in rng.permutation(heart_size)),
        assignment=_random_arc_assignment(
            heart_size, [int(v) for v in suppressed], rng
        ),
        resamples=resamples,
    )
    return config, config.to_preheart()


def mc_heart_strong(n: int, m: int, trials: int, seed: int, jobs: int = 1) -> McReport:
    """Fraction of sampled preheart configurations that are simple and
    strongly connected, against the sparse-regime limit 1/9.

    A preheart is strongly connected exactly when its heart is (chains of
    (1, 1)-vertices cannot break or create strong connectivity), so the
    check runs on the much smaller heart.  Diagnostics attribute the
    connectivity failures: the fraction containing an s-cycle should
    dominate, complex obstructions being asymptotically negligible.
    """
    _check_jobs(jobs)
    excess = m - n
    if excess > n / 10:
        warnings.warn(
            f"excess {excess} above n/10; the sparse-regime theory value 1/9 "
            "may be far off",
            RuntimeWarning,
            stacklevel=2,
        )
    good = 0
    nonsimple = 0
    sc_failures = 0
    failures_with_scycle = 0
    resamples = 0
    for rng, count in _chunk_streams(seed, trials):
        for _ in range(count):
            config, preheart = sample_heart_configuration(n, m, rng)
            resamples += config.resamples
            if len(set(preheart.arcs)) != preheart.m:
                nonsimple += 1
                continue
            heart_md = config.heart_multidigraph()
            if is_strongly_connected(heart_md):
                good += 1
            elif enumerate_s_cycles(heart_md):
                sc_failures += 1
                failures_with_scycle += 1
            else:
                sc_failures += 1
    estimate = good / trials
    ratio = failures_with_scycle / sc_failures if sc_failures else float("nan")
    return McReport(
        "heart", n, m, trials, estimate, _binomial_stderr(estimate, trials),
        1.0 / 9.0, seed,
        {
            "nonsimple": nonsimple,
            "sc_failures": sc_failures,
            "sc_failures_with_scycle": failures_with_scycle,
            "scycle_failure_ratio": ratio,
            "resamples": resamples,
        },
    )
