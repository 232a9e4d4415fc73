"""Fixed-pattern machinery: automorphisms, balancedness, copy counting.

Patterns are small graphs (up to 8 vertices) given by edge lists.  Copy
counts in a host are unlabelled subgraph counts: injective embeddings
that map pattern edges onto host edges (host may have extra edges),
divided by the pattern's automorphism count.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import comb

import numpy as np

from .graphcore import EvolvingGraph, bit_indices, iter_bits

MAX_PATTERN_VERTICES = 8


def _normalize_edges(edges) -> tuple[tuple[int, int], ...]:
    verts = sorted({w for e in edges for w in e})
    relabel = {w: i for i, w in enumerate(verts)}
    out = set()
    for u, v in edges:
        if u == v:
            raise ValueError(f"pattern self-loop ({u}, {v})")
        a, b = relabel[u], relabel[v]
        if a > b:
            a, b = b, a
        if (a, b) in out:
            raise ValueError(f"duplicate pattern edge ({u}, {v})")
        out.add((a, b))
    return tuple(sorted(out))


def _adjacency_masks(v: int, edges) -> list[int]:
    adj = [0] * v
    for a, b in edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    return adj


def _brute_automorphisms(v: int, edges) -> int:
    eset = set(edges)
    count = 0
    for perm in permutations(range(v)):
        for a, b in eset:
            pa, pb = perm[a], perm[b]
            if pa > pb:
                pa, pb = pb, pa
            if (pa, pb) not in eset:
                break
        else:
            count += 1
    return count


def _has_triangle(v: int, adj: list[int]) -> bool:
    for a in range(v):
        for b in iter_bits(adj[a] >> (a + 1)):
            if adj[a] & adj[a + 1 + b]:
                return True
    return False


@dataclass(frozen=True)
class PatternGraph:
    """A fixed pattern with its canonical edge list and derived metadata."""

    name: str
    v: int
    e: int
    edges: tuple[tuple[int, int], ...]
    aut: int
    density: float
    balanced: bool
    triangle_free: bool

    @classmethod
    def from_edges(cls, edges, name: str | None = None) -> "PatternGraph":
        canon = _normalize_edges(edges)
        if not canon:
            raise ValueError("pattern must have at least one edge")
        v = max(b for _, b in canon) + 1
        if v > MAX_PATTERN_VERTICES:
            raise ValueError(f"pattern too large: {v} vertices, supported up to {MAX_PATTERN_VERTICES}")
        e = len(canon)
        adj = _adjacency_masks(v, canon)
        aut = _brute_automorphisms(v, canon)
        dens = Fraction(e, v)
        balanced = True
        for smask in range(1, 1 << v):
            vh = smask.bit_count()
            eh = sum(1 for a, b in canon if (smask >> a) & 1 and (smask >> b) & 1)
            if eh and Fraction(eh, vh) > dens:
                balanced = False
                break
        return cls(name=name or f"v{v}e{e}", v=v, e=e, edges=canon, aut=aut,
                   density=float(dens), balanced=balanced,
                   triangle_free=not _has_triangle(v, adj))

    def adjacency(self) -> list[int]:
        return _adjacency_masks(self.v, self.edges)


def automorphism_count(pattern: PatternGraph) -> int:
    """|Aut| by brute force over vertex permutations (v <= 8)."""
    if pattern.v > MAX_PATTERN_VERTICES:
        raise ValueError(f"automorphism brute force limited to {MAX_PATTERN_VERTICES} vertices")
    return _brute_automorphisms(pattern.v, pattern.edges)


def is_isomorphic(p: PatternGraph, q: PatternGraph) -> bool:
    if (p.v, p.e) != (q.v, q.e):
        return False
    degs = lambda pat: sorted(_adjacency_masks(pat.v, pat.edges), key=int.bit_count)
    if [m.bit_count() for m in degs(p)] != [m.bit_count() for m in degs(q)]:
        return False
    eset = set(q.edges)
    for perm in permutations(range(p.v)):
        for a, b in p.edges:
            pa, pb = perm[a], perm[b]
            if pa > pb:
                pa, pb = pb, pa
            if (pa, pb) not in eset:
                break
        else:
            return True
    return False


def canonical_form(n: int, edges) -> tuple[tuple[int, int], ...]:
    """Lexicographically minimal relabelling of an edge set (tiny n only)."""
    if n > 8:
        raise ValueError("canonical_form is brute force, n <= 8 only")
    best = None
    edges = list(edges)
    for perm in permutations(range(n)):
        relabeled = tuple(sorted((perm[u], perm[v]) if perm[u] < perm[v] else (perm[v], perm[u])
                                 for u, v in edges))
        if best is None or relabeled < best:
            best = relabeled
    return best if best is not None else ()


# ---------------------------------------------------------------------------
# copy counting


def _search_order(pattern: PatternGraph) -> list[int]:
    """Connectivity-first, high-degree-first placement order."""
    adj = pattern.adjacency()
    deg = [m.bit_count() for m in adj]
    remaining = set(range(pattern.v))
    order: list[int] = []
    placed_mask = 0
    while remaining:
        anchored = [w for w in remaining if adj[w] & placed_mask]
        pool = anchored if anchored else list(remaining)
        nxt = max(pool, key=lambda w: (deg[w], -w))
        order.append(nxt)
        remaining.remove(nxt)
        placed_mask |= 1 << nxt
    return order


def count_embeddings(host: EvolvingGraph, pattern: PatternGraph) -> int:
    """Injective homomorphisms pattern -> host (labelled embeddings)."""
    order = _search_order(pattern)
    padj = pattern.adjacency()
    hadj = host.adj
    n = host.n
    all_mask = (1 << n) - 1
    pos = {pv: i for i, pv in enumerate(order)}
    # for each placement step, the pattern neighbours already placed
    back = [[q for q in iter_bits(padj[pv]) if pos[q] < i] for i, pv in enumerate(order)]
    placed = [0] * pattern.v

    def rec(i: int, used: int) -> int:
        if i == len(order):
            return 1
        anchors = back[i]
        if anchors:
            cand = hadj[placed[anchors[0]]]
            for q in anchors[1:]:
                cand &= hadj[placed[q]]
            cand &= ~used
        else:
            cand = all_mask & ~used
        total = 0
        pv = order[i]
        for hv in iter_bits(cand):
            placed[pv] = hv
            total += rec(i + 1, used | (1 << hv))
        return total

    return rec(0, 0)


def _count_p3(host: EvolvingGraph) -> int:
    # one 2-edge path per centre vertex
    return sum(comb(host.adj[v].bit_count(), 2) for v in range(host.n))


def _count_c4(host: EvolvingGraph) -> int:
    # each 4-cycle is seen once per diagonal pair, via C(codegree, 2)
    n = host.n
    codeg = np.zeros(n * (n - 1) // 2, dtype=np.int64)
    row = np.asarray([u * (2 * n - u - 1) // 2 - u - 1 for u in range(n)], dtype=np.int64)
    for w in range(n):
        nb = bit_indices(host.adj[w], n)
        if len(nb) < 2:
            continue
        a, b = np.triu_indices(len(nb), 1)
        np.add.at(codeg, row[nb[a]] + nb[b], 1)
    c = codeg[codeg >= 2]
    return int((c * (c - 1) // 2).sum() // 2)


_P3_KEY = (3, 2, (1, 1, 2))
_C4_KEY = (4, 4, (2, 2, 2, 2))


def _shape_key(pattern: PatternGraph):
    degs = tuple(sorted(m.bit_count() for m in pattern.adjacency()))
    return (pattern.v, pattern.e, degs)


def count_copies(host: EvolvingGraph, pattern: PatternGraph) -> int:
    """Unlabelled copies of the pattern in the host (exact).

    Specialized degree-based counters for the 2-edge path and the 4-cycle;
    generic pruned backtracking otherwise.  Refuses patterns above 6
    vertices on hosts with more than 64 vertices.
    """
    if pattern.v > 6 and host.n > 64:
        raise ValueError(f"complexity guard: pattern with {pattern.v} > 6 vertices "
                         f"on host with n={host.n} > 64")
    key = _shape_key(pattern)
    if key == _P3_KEY:
        return _count_p3(host)
    if key == _C4_KEY:
        return _count_c4(host)
    emb = count_embeddings(host, pattern)
    if emb % pattern.aut:
        raise AssertionError(f"embedding count {emb} not divisible by aut={pattern.aut}")
    return emb // pattern.aut


def count_triangles(host: EvolvingGraph) -> int:
    total = 0
    adj = host.adj
    for u in range(host.n):
        au = adj[u]
        for off in iter_bits(au >> (u + 1)):
            total += (au & adj[u + 1 + off]).bit_count()
    return total // 3


# ---------------------------------------------------------------------------
# second-moment exponent certificate


@dataclass(frozen=True)
class MarginReport:
    """min over subgraphs H (>= 1 edge) of v_H - (1/2 - eps) e_H, and the
    densest subgraph ratio max e_H / v_H.  A positive margin certifies that
    every covariance class is negligible against the squared mean at
    exponent level."""

    margin: float
    max_density: float


def variance_margin(pattern: PatternGraph, eps: float) -> MarginReport:
    """Exponent margin over all subgraphs of the pattern.

    Enumerates vertex subsets; for a fixed vertex set the extreme of both
    statistics is attained at the full induced edge set (the coefficient
    1/2 - eps is positive), so proper edge subsets need no separate pass.
    """
    if not pattern.triangle_free:
        raise ValueError("margin certificate applies to triangle-free patterns")
    c = 0.5 - eps
    edges = pattern.edges
    best = float("inf")
    dens = 0.0
    for smask in range(1, 1 << pattern.v):
        vh = smask.bit_count()
        eh = sum(1 for a, b in edges if (smask >> a) & 1 and (smask >> b) & 1)
        if eh == 0:
            continue
        best = min(best, vh - c * eh)
        dens = max(dens, eh / vh)
    return MarginReport(margin=best, max_density=dens)


# ---------------------------------------------------------------------------
# catalog and parsing


def path_graph(v: int) -> PatternGraph:
    return PatternGraph.from_edges([(i, i + 1) for i in range(v - 1)], name=f"P{v}")


def cycle_graph(v: int) -> PatternGraph:
    return PatternGraph.from_edges([(i, (i + 1) % v) for i in range(v)], name=f"C{v}")


def star_graph(k: int) -> PatternGraph:
    """K_{1,k}: one centre with k leaves."""
    return PatternGraph.from_edges([(0, i) for i in range(1, k + 1)], name=f"S{k}")


def complete_bipartite(a: int, b: int) -> PatternGraph:
    return PatternGraph.from_edges([(i, a + j) for i in range(a) for j in range(b)],
                                   name=f"K{a}{b}")


CATALOG: dict[str, PatternGraph] = {
    "K2": PatternGraph.from_edges([(0, 1)], name="K2"),
    "P3": path_graph(3),
    "P4": path_graph(4),
    "C4": cycle_graph(4),
    "C5": cycle_graph(5),
    "C6": cycle_graph(6),
    "K13": star_graph(3),
    "K22": complete_bipartite(2, 2),
}


def parse_pattern_text(text: str, name: str | None = None) -> PatternGraph:
    """Edge-list text, one 'u v' pair per line; blank lines and # comments ok."""
    edges = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"bad pattern line: {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return PatternGraph.from_edges(edges, name=name)


def load_pattern(ref: str) -> PatternGraph:
    """Catalog name ('C4'), star shorthand ('S5'), or an edge-list file path."""
    key = ref.strip()
    up = key.upper()
    if up in CATALOG:
        return CATALOG[up]
    if up.startswith("S") and up[1:].isdigit():
        return star_graph(int(up[1:]))
    try:
        with open(key, "r", encoding="utf-8") as fh:
            return parse_pattern_text(fh.read(), name=key)
    except OSError as exc:
        raise ValueError(f"unknown pattern {ref!r}: not a catalog name, "
                         f"star shorthand, or readable file") from exc
