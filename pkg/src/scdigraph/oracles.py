"""Exact ground-truth counting: exhaustive census at tiny scale and exact
big-integer inclusion-exclusion at moderate scale.

The census iterates every m-subset of the arc universe (n*n slots with
loops, n*(n-1) without) and counts predicates directly; it is the reference
every faster route is tested against.  The inclusion-exclusion counts cover
digraphs with minimum in- and outdegree 1 (dicores): the loopy sum runs over
the sets of outdegree-0 and indegree-0 vertices, the loop-free sum
additionally tracks their overlap.  Everything uses exact integer
arithmetic; the alternating sums lose all floating-point significance long
before n reaches 30.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, factorial

from .errors import DomainError

__all__ = [
    "CensusResult",
    "brute_force_census",
    "enumerate_min_degree_digraphs",
    "ie_dicore_count",
    "ie_dicore_count_loopfree",
]

# The worst case under this cap is comb(25, 12) ~ 5.2e6 subsets, which stays
# within interactive reach; anything larger belongs to the inclusion-exclusion
# and asymptotic routes.
_MAX_CENSUS_VERTICES = 5


@dataclass(frozen=True)
class CensusResult:
    """Exact counts over all digraphs with n vertices and m arcs.

    ``min_degree_counts`` maps (kplus, kminus) to the number of digraphs with
    every outdegree >= kplus and indegree >= kminus; the (1, 1) entry is
    duplicated in ``dicore``.  For n > 1, strongly_connected <= dicore <=
    total (a single vertex is strongly connected without being a dicore).
    """

    n: int
    m: int
    loop_free: bool
    total: int
    strongly_connected: int
    dicore: int
    min_degree_counts: dict

    def min_degree(self, kplus: int, kminus: int) -> int:
        try:
            return self.min_degree_counts[(kplus, kminus)]
        except KeyError:
            raise DomainError(
                f"census did not tally cutoffs ({kplus}, {kminus})"
            ) from None


def _arc_universe(n: int, loop_free: bool) -> list:
    return [(u, v) for u in range(n) for v in range(n) if not (loop_free and u == v)]


def _mask_reachable(adj: list, start: int) -> int:
    seen = 1 << start
    frontier = seen
    while frontier:
        grown = 0
        f = frontier
        while f:
            low = f & -f
            grown |= adj[low.bit_length() - 1]
            f ^= low
        frontier = grown & ~seen
        seen |= grown
    return seen


def brute_force_census(
    n: int,
    m: int,
    loop_free: bool = False,
    kplus: int = 1,
    kminus: int = 1,
    jobs: int = 1,
) -> CensusResult:
    """Count digraph predicates by enumerating every m-subset of arcs.

    Guarded to n <= 5.  ``jobs`` shards the enumeration by subset index;
    shard tallies are merged by exact addition, so the result is identical
    for every job count.
    """
    if n < 1:
        raise DomainError(f"need at least one vertex, got n={n}")
    if n > _MAX_CENSUS_VERTICES:
        raise DomainError(f"brute force supports n <= {_MAX_CENSUS_VERTICES}, got {n}")
    if m < 0:
        raise DomainError(f"arc count must be nonnegative, got {m}")
    if kplus < 0 or kminus < 0:
        raise DomainError("degree cutoffs must be nonnegative")
    if jobs < 1:
        raise DomainError(f"jobs must be positive, got {jobs}")
    universe = _arc_universe(n, loop_free)
    full = (1 << n) - 1
    # tallies[shard] = [total, strongly_connected, dicore, requested cutoff]
    tallies = [[0, 0, 0, 0] for _ in range(jobs)]
    for index, combo in enumerate(combinations(universe, m)):
        odeg = [0] * n
        ideg = [0] * n
        adj = [0] * n
        radj = [0] * n
        for u, v in combo:
            odeg[u] += 1
            ideg[v] += 1
            adj[u] |= 1 << v
            radj[v] |= 1 << u
        row = tallies[index % jobs]
        row[0] += 1
        if _mask_reachable(adj, 0) == full and _mask_reachable(radj, 0) == full:
            row[1] += 1
        if min(odeg) >= 1 and min(ideg) >= 1:
            row[2] += 1
        if min(odeg) >= kplus and min(ideg) >= kminus:
            row[3] += 1
    total, strong, dicore, kd = (sum(col) for col in zip(*tallies))
    counts = {(kplus, kminus): kd, (1, 1): dicore}
    return CensusResult(
        n=n,
        m=m,
        loop_free=loop_free,
        total=total,
        strongly_connected=strong,
        dicore=dicore,
        min_degree_counts=counts,
    )


def enumerate_min_degree_digraphs(
    n: int, m: int, loop_free: bool = False, kplus: int = 1, kminus: int = 1
):
    """Yield every digraph (as a sorted arc tuple) with the given size and
    minimum degrees.  Same guards as the census."""
    if n < 1 or n > _MAX_CENSUS_VERTICES:
        raise DomainError(f"enumeration supports 1 <= n <= {_MAX_CENSUS_VERTICES}")
    if m < 0:
        raise DomainError(f"arc count must be nonnegative, got {m}")
    universe = _arc_universe(n, loop_free)
    for combo in combinations(universe, m):
        odeg = [0] * n
        ideg = [0] * n
        for u, v in combo:
            odeg[u] += 1
            ideg[v] += 1
        if min(odeg) >= kplus and min(ideg) >= kminus:
            yield combo


def ie_dicore_count(n: int, m: int) -> int:
    """Exact number of digraphs (loops allowed) with n vertices, m arcs, and
    all in- and outdegrees >= 1, by inclusion-exclusion over the sets of
    outdegree-0 and indegree-0 vertices."""
    if n < 1:
        raise DomainError(f"need at least one vertex, got n={n}")
    if m < 0:
        raise DomainError(f"arc count must be nonnegative, got {m}")
    total = 0
    for a in range(n + 1):
        row = comb(n, a)
        for b in range(n + 1):
            slots = (n - a) * (n - b)
            if slots < m:
                break  # shrinks as b grows; the rest of the row is zero
            term = row * comb(n, b) * comb(slots, m)
            total += -term if (a + b) & 1 else term
    return total


def ie_dicore_count_loopfree(n: int, m: int) -> int:
    """Exact number of loop-free digraphs with all in- and outdegrees >= 1.

    Triple inclusion-exclusion: a = #outdegree-0 vertices, b = #indegree-0
    vertices, j = their overlap.  The arc slots for a term exclude the rows
    of A, the columns of B, and the diagonal cells of the n-a-b+j vertices
    outside both.  Within one (a, b) group the slot count falls by exactly 1
    per j step, so the binomial follows the exact integer down-walk
    C(N-1, m) = C(N, m) * (N - m) // N instead of being recomputed.
    """
    if n < 1:
        raise DomainError(f"need at least one vertex, got n={n}")
    if m < 0:
        raise DomainError(f"arc count must be nonnegative, got {m}")
    fact = [factorial(i) for i in range(n + 1)]
    total = 0
    for a in range(n + 1):
        for b in range(n + 1):
            j_min = max(0, a + b - n)
            j_max = min(a, b)
            slots = (n - a) * (n - b) - (n - a - b + j_min)
            if slots < m:
                break  # nonincreasing in b; the rest of the row is zero
            binom = comb(slots, m)
            group = 0
            for j in range(j_min, j_max + 1):
                outside = n - a - b + j
                multi = fact[n] // (fact[j] * fact[a - j] * fact[b - j] * fact[outside])
                group += multi * binom
                if j < j_max:
                    binom = binom * (slots - m) // slots
                    slots -= 1
                    if binom == 0:
                        break
            total += -group if (a + b) & 1 else group
    return total
