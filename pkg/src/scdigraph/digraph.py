"""Digraph structures: strong connectivity, sink/source sets, s-cycles, hearts.

Vocabulary used across the package:

* **dicore** - a digraph whose in- and outdegrees are all >= 1 (more generally
  >= (k-, k+) for a (k-, k+)-dicore).  Loops are allowed unless a graph is
  built with ``allow_loops=False``; a loop adds one to both degrees of its
  vertex.
* **sink-set** - a nonempty proper vertex subset with no arc leaving it;
  a **source-set** is a subset whose complement is a sink-set (no arc enters
  it).  A digraph is strongly connected iff it has neither.
* **s-cycle** - a sink-set or source-set whose vertices induce a bare
  directed cycle; equivalently a directed cycle all of whose vertices have
  outdegree exactly 1 (sink-cycle) or indegree exactly 1 (source-cycle).
  A loop on a vertex of outdegree 1 is a sink-cycle of order 1.
* **cycle component** - a connected component that is exactly a directed
  cycle (every vertex with in- and outdegree 1); a lone loop counts.
* **preheart** - a digraph with minimum in- and outdegree >= 1 and no cycle
  components.
* **heart** - the multidigraph left after suppressing every vertex with
  in- and outdegree exactly 1 (replace u->v->w by u->w); all remaining
  vertices have total degree >= 3.  A preheart is strongly connected iff
  its heart is.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "Digraph",
    "MultiDigraph",
    "SCycle",
    "HeartStats",
    "out_degrees",
    "in_degrees",
    "is_strongly_connected",
    "reachable_set",
    "classify_s_set",
    "enumerate_s_cycles",
    "cycle_components",
    "heart",
    "degree_stats",
    "write_edge_list",
    "read_edge_list",
]


@dataclass(frozen=True)
class Digraph:
    """A labelled digraph without duplicate arcs; loops optional."""

    n: int
    arcs: frozenset
    allow_loops: bool = True

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"need at least one vertex, got n={self.n}")
        object.__setattr__(self, "arcs", frozenset((int(u), int(v)) for u, v in self.arcs))
        for u, v in self.arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise DomainError(f"arc ({u}, {v}) out of range for n={self.n}")
            if u == v and not self.allow_loops:
                raise DomainError(f"loop at {u} in a loop-free digraph")

    @classmethod
    def from_arcs(cls, n: int, arcs, allow_loops: bool = True) -> "Digraph":
        """Build from an arc list, rejecting duplicates explicitly."""
        arc_list = [(int(u), int(v)) for u, v in arcs]
        if len(arc_list) != len(set(arc_list)):
            raise DomainError("duplicate arcs in digraph input")
        return cls(n, frozenset(arc_list), allow_loops)

    @property
    def m(self) -> int:
        return len(self.arcs)


@dataclass(frozen=True)
class MultiDigraph:
    """A labelled multidigraph: arcs form a multiset, loops allowed.

    ``labels`` optionally records original vertex names after a contraction
    (labels[i] = name of vertex i); it does not take part in equality.
    """

    n: int
    arcs: tuple
    labels: tuple | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"need at least one vertex, got n={self.n}")
        object.__setattr__(self, "arcs", tuple((int(u), int(v)) for u, v in self.arcs))
        for u, v in self.arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise DomainError(f"arc ({u}, {v}) out of range for n={self.n}")
        if self.labels is not None and len(self.labels) != self.n:
            raise DomainError("labels must name every vertex")

    @property
    def m(self) -> int:
        return len(self.arcs)


def out_degrees(g) -> list:
    deg = [0] * g.n
    for u, _ in g.arcs:
        deg[u] += 1
    return deg


def in_degrees(g) -> list:
    deg = [0] * g.n
    for _, v in g.arcs:
        deg[v] += 1
    return deg


def _adjacency(g, reverse: bool = False) -> list:
    adj = [[] for _ in range(g.n)]
    if reverse:
        for u, v in g.arcs:
            adj[v].append(u)
    else:
        for u, v in g.arcs:
            adj[u].append(v)
    return adj


def _bfs_count(adj: list, start: int, seen: bytearray) -> int:
    seen[start] = 1
    stack = [start]
    count = 1
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not seen[w]:
                seen[w] = 1
                count += 1
                stack.append(w)
    return count


def is_strongly_connected(g) -> bool:
    """Every vertex reaches every other (single vertices count as strongly
    connected).  Two reachability sweeps, O(n + m)."""
    if g.n == 1:
        return True
    if _bfs_count(_adjacency(g), 0, bytearray(g.n)) < g.n:
        return False
    return _bfs_count(_adjacency(g, reverse=True), 0, bytearray(g.n)) == g.n


def reachable_set(g, start: int) -> frozenset:
    """All vertices reachable from ``start`` (including it).  The closure is
    out-closed, so it is a sink-set whenever it is a proper subset."""
    if not 0 <= start < g.n:
        raise DomainError(f"vertex {start} out of range for n={g.n}")
    adj = _adjacency(g)
    seen = bytearray(g.n)
    _bfs_count(adj, start, seen)
    return frozenset(i for i in range(g.n) if seen[i])


def classify_s_set(g, subset) -> str:
    """Classify a vertex subset: sink-set and/or source-set, plain or complex.

    Plain means every relevant degree is exactly 1 (outdegrees for a
    sink-set, indegrees for a source-set, in the whole digraph).  Returns
    e.g. ``"plain_sink"``, ``"complex_source"``, joined with ``+`` when the
    subset is both, or ``"not_s_set"``.
    """
    s = frozenset(int(v) for v in subset)
    if not s or len(s) >= g.n:
        raise DomainError("subset must be nonempty and proper")
    for v in s:
        if not 0 <= v < g.n:
            raise DomainError(f"vertex {v} out of range for n={g.n}")
    leaves = any(u in s and v not in s for u, v in g.arcs)
    enters = any(u not in s and v in s for u, v in g.arcs)
    odeg = out_degrees(g)
    ideg = in_degrees(g)
    parts = []
    if not leaves:
        plain = all(odeg[v] == 1 for v in s)
        parts.append("plain_sink" if plain else "complex_sink")
    if not enters:
        plain = all(ideg[v] == 1 for v in s)
        parts.append("plain_source" if plain else "complex_source")
    return "+".join(parts) if parts else "not_s_set"


@dataclass(frozen=True)
class SCycle:
    """An s-cycle: vertex tuple in cycle order (rotated to start at the
    smallest label) and its kind: 'sink', 'source', or 'both'."""

    vertices: tuple
    kind: str

    @property
    def order(self) -> int:
        return len(self.vertices)


def _functional_cycles(n: int, succ: dict) -> list:
    """All cycles of the partial map ``succ`` (vertices outside the domain
    break a walk).  Each cycle is returned rotated to its smallest label."""
    color = bytearray(n)  # 0 unvisited, 1 on current walk, 2 done
    cycles = []
    for v0 in succ:
        if color[v0]:
            continue
        path = []
        pos = {}
        v = v0
        while v in succ and not color[v]:
            color[v] = 1
            pos[v] = len(path)
            path.append(v)
            v = succ[v]
        if v in pos:
            cyc = path[pos[v]:]
            r = cyc.index(min(cyc))
            cycles.append(tuple(cyc[r:] + cyc[:r]))
        for w in path:
            color[w] = 2
    return cycles


def enumerate_s_cycles(g, max_len: int | None = None, include_loops: bool = True) -> list:
    """All s-cycles of order <= max_len, merged across kinds.

    Requires a dicore (minimum in- and outdegree >= 1).  Sink-cycles are the
    cycles of the successor map restricted to outdegree-1 vertices, source-
    cycles the cycles of the predecessor map on indegree-1 vertices; a cycle
    found on both sides is reported once with kind 'both'.  Order-1 s-cycles
    (loops) are included unless ``include_loops`` is false.
    """
    odeg = out_degrees(g)
    ideg = in_degrees(g)
    if g.n and (min(odeg) < 1 or min(ideg) < 1):
        raise DomainError("s-cycle enumeration requires minimum in/out degree >= 1")
    succ = {}
    pred = {}
    for u, v in g.arcs:
        if odeg[u] == 1:
            succ[u] = v
        if ideg[v] == 1:
            pred[v] = u
    found: dict = {}
    for cyc in _functional_cycles(g.n, succ):
        found[cyc] = "sink"
    for cyc in _functional_cycles(g.n, pred):
        # predecessor walks traverse the cycle backwards; canonicalise to
        # forward (arc) order before merging
        fwd = (cyc[0],) + tuple(reversed(cyc[1:]))
        found[fwd] = "both" if fwd in found else "source"
    out = [SCycle(vs, kind) for vs, kind in found.items()]
    if not include_loops:
        out = [c for c in out if c.order > 1]
    if max_len is not None:
        out = [c for c in out if c.order <= max_len]
    out.sort(key=lambda c: (c.order, c.vertices))
    return out


def cycle_components(g) -> list:
    """Connected components that are bare directed cycles, as vertex tuples
    in cycle order.  A lone loop is an order-1 cycle component."""
    odeg = out_degrees(g)
    ideg = in_degrees(g)
    # Undirected component sweep; a component is a bare cycle iff every
    # vertex in it has in- and outdegree exactly 1.
    nbr = [[] for _ in range(g.n)]
    for u, v in g.arcs:
        nbr[u].append(v)
        nbr[v].append(u)
    succ = {}
    for u, v in g.arcs:
        if odeg[u] == 1:
            succ[u] = v
    seen = bytearray(g.n)
    out = []
    for v0 in range(g.n):
        if seen[v0]:
            continue
        comp = []
        seen[v0] = 1
        stack = [v0]
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in nbr[v]:
                if not seen[w]:
                    seen[w] = 1
                    stack.append(w)
        if all(odeg[v] == 1 and ideg[v] == 1 for v in comp):
            start = min(comp)
            cyc = [start]
            v = succ[start]
            while v != start:
                cyc.append(v)
                v = succ[v]
            out.append(tuple(cyc))
    out.sort()
    return out


def heart(g, rng: np.random.Generator | None = None) -> MultiDigraph:
    """Suppress every (1,1)-degree vertex of a preheart.

    Input must have minimum in- and outdegree >= 1 and no cycle components.
    Suppression never changes any other vertex's degrees, so the processing
    order does not affect the result; ``rng`` optionally shuffles the order
    (used by tests to assert exactly that).  The result is a multidigraph on
    the surviving vertices (total degree >= 3), relabelled to 0..n'-1 with
    ``labels`` recording the original names, arcs sorted canonically.
    """
    odeg = out_degrees(g)
    ideg = in_degrees(g)
    if min(odeg) < 1 or min(ideg) < 1:
        raise DomainError("heart requires minimum in/out degree >= 1")
    if cycle_components(g):
        raise DomainError("heart undefined: input has cycle components")

    arcs = [(int(u), int(v)) for u, v in g.arcs]
    alive = [True] * len(arcs)
    out_ids = [set() for _ in range(g.n)]
    in_ids = [set() for _ in range(g.n)]
    for a, (u, v) in enumerate(arcs):
        out_ids[u].add(a)
        in_ids[v].add(a)

    queue = [v for v in range(g.n) if odeg[v] == 1 and ideg[v] == 1]
    if rng is not None:
        rng.shuffle(queue)
    for v in queue:
        (ain,) = in_ids[v]
        (aout,) = out_ids[v]
        # ain == aout would mean a lone loop, i.e. a cycle component
        assert ain != aout
        u = arcs[ain][0]
        w = arcs[aout][1]
        alive[ain] = alive[aout] = False
        out_ids[u].discard(ain)
        in_ids[w].discard(aout)
        new_id = len(arcs)
        arcs.append((u, w))
        alive.append(True)
        out_ids[u].add(new_id)
        in_ids[w].add(new_id)

    survivors = sorted(v for v in range(g.n) if not (odeg[v] == 1 and ideg[v] == 1))
    assert survivors, "preheart precondition rules out an empty heart"
    relabel = {v: i for i, v in enumerate(survivors)}
    new_arcs = sorted((relabel[u], relabel[w]) for a, (u, w) in enumerate(arcs) if alive[a])
    return MultiDigraph(len(survivors), tuple(new_arcs), labels=tuple(survivors))


@dataclass(frozen=True)
class HeartStats:
    """Degree-class statistics of a dicore.

    ``counts`` holds (both degrees 1, indegree 1/outdegree >= 2,
    indegree >= 2/outdegree 1, both >= 2).  ``heart_order``/``heart_size``
    are the vertex and arc counts the heart will have; the arc excess
    m - n is preserved by suppression, so heart_size - heart_order ==
    excess always.  ``gamma_ok`` flags the concentration event used in the
    sparse heart regime: |counts[1] - r| and |counts[2] - r| within
    sqrt(r)*log(r) and counts[3] <= max(2 r^2 / n, sqrt(r)), vacuous at r=0.
    """

    counts: tuple
    n: int
    m: int
    excess: int
    heart_order: int
    heart_size: int
    gamma_ok: bool


def degree_stats(g) -> HeartStats:
    odeg = out_degrees(g)
    ideg = in_degrees(g)
    if min(odeg) < 1 or min(ideg) < 1:
        raise DomainError("degree stats require a dicore (min in/out degree >= 1)")
    n = g.n
    m = len(g.arcs)
    a11 = a12 = a21 = a22 = 0
    for v in range(n):
        din_one = ideg[v] == 1
        dout_one = odeg[v] == 1
        if din_one and dout_one:
            a11 += 1
        elif din_one:
            a12 += 1
        elif dout_one:
            a21 += 1
        else:
            a22 += 1
    r = m - n
    order = a12 + a21 + a22
    if r == 0:
        gamma = True
    else:
        spread = np.sqrt(r) * np.log(r) if r > 1 else 0.0
        gamma = (
            abs(a12 - r) <= spread
            and abs(a21 - r) <= spread
            and a22 <= max(2.0 * r * r / n, np.sqrt(r))
        )
    return HeartStats(
        counts=(a11, a12, a21, a22),
        n=n,
        m=m,
        excess=r,
        heart_order=order,
        heart_size=r + order,
        gamma_ok=bool(gamma),
    )


def write_edge_list(g, path) -> None:
    """Write ``# n m loops|noloops`` then one ``u v`` line per arc."""
    loops = getattr(g, "allow_loops", True)
    arcs = sorted(g.arcs) if isinstance(g.arcs, frozenset) else list(g.arcs)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# {g.n} {len(arcs)} {'loops' if loops else 'noloops'}\n")
        for u, v in arcs:
            fh.write(f"{u} {v}\n")


def read_edge_list(path, multi: bool = False):
    """Parse an edge-list file; Digraph by default, MultiDigraph with multi=True.

    Rejects malformed headers, arc-count mismatches, out-of-range endpoints,
    and (in Digraph mode) duplicate arcs.
    """
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise DomainError("edge list must start with a '# n m loops|noloops' header")
    head = lines[0][1:].split()
    if len(head) != 3 or head[2] not in ("loops", "noloops"):
        raise DomainError(f"malformed header: {lines[0]!r}")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise DomainError(f"malformed header: {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != m:
        raise DomainError(f"header declares {m} arcs but file has {len(body)}")
    arcs = []
    for ln in body:
        parts = ln.split()
        if len(parts) != 2:
            raise DomainError(f"malformed arc line: {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        if not (0 <= u < n and 0 <= v < n):
            raise DomainError(f"arc ({u}, {v}) out of range for n={n}")
        arcs.append((u, v))
    allow_loops = head[2] == "loops"
    if multi:
        if not allow_loops and any(u == v for u, v in arcs):
            raise DomainError("loop arc in a noloops file")
        return MultiDigraph(n, tuple(arcs))
    return Digraph.from_arcs(n, arcs, allow_loops=allow_loops)
