"""Weighted undirected graphs plus the few classic algorithms the rest of the
package is built on: components, Kruskal, and set-source Dijkstra.

All distances and reduced costs are ``Fraction`` values so that equality
with zero is exact.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import InvalidInputError


class Edge(NamedTuple):
    id: int
    u: int
    v: int
    cost: int

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u


class WeightedGraph:
    """Simple undirected graph on nodes ``0..n-1`` with integer edge costs.

    Edge ids are positions in ``edges``.  Nodes listed in ``virtual`` take
    part in every computation but carry no messages in the simulator.
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int, int]],
        virtual: Iterable[int] = (),
        allow_zero: bool = False,
    ):
        if n < 0:
            raise InvalidInputError("node count must be non-negative")
        self.n = n
        self.virtual = frozenset(virtual)
        for s in self.virtual:
            if not 0 <= s < n:
                raise InvalidInputError(f"virtual node {s} out of range")
        built = []
        seen = {}
        self.adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for eid, (u, v, c) in enumerate(edges):
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInputError(f"edge {eid} has endpoint out of range")
            if u == v:
                raise InvalidInputError(f"edge {eid} is a self-loop")
            if c != int(c):
                raise InvalidInputError(f"edge {eid} cost must be an integer")
            c = int(c)
            if c < 0 or (c == 0 and not allow_zero):
                raise InvalidInputError(f"edge {eid} has cost {c}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidInputError(f"edges {seen[key]} and {eid} are parallel")
            seen[key] = eid
            built.append(Edge(eid, u, v, c))
            self.adj[u].append((v, eid))
            self.adj[v].append((u, eid))
        for row in self.adj:
            row.sort()
        self.edges: tuple[Edge, ...] = tuple(built)
        self._pairs = seen

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_between(self, u: int, v: int) -> int | None:
        return self._pairs.get((min(u, v), max(u, v)))

    def cost_of(self, edge_ids: Iterable[int]) -> int:
        return sum(self.edges[e].cost for e in edge_ids)

    @property
    def max_cost(self) -> int:
        return max((e.cost for e in self.edges), default=0)

    def physical_nodes(self) -> list[int]:
        return [v for v in range(self.n) if v not in self.virtual]

    def edge_list(self) -> list[tuple[int, int, int]]:
        return [(e.u, e.v, e.cost) for e in self.edges]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (self.n, self.edges, self.virtual) == (other.n, other.edges, other.virtual)

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m}, virtual={sorted(self.virtual)})"


def scale_zero_weights(graph: WeightedGraph, epsilon: Fraction) -> WeightedGraph:
    """Make every cost positive: multiply non-zero costs by ceil(n/eps), set zeros to 1."""
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    mult = math.ceil(Fraction(graph.n) / epsilon)
    edges = []
    for e in graph.edges:
        if e.cost < 0:
            raise InvalidInputError(f"edge {e.id} has negative cost")
        edges.append((e.u, e.v, e.cost * mult if e.cost else 1))
    return WeightedGraph(graph.n, edges, graph.virtual)


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra > rb:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


@dataclass(frozen=True)
class Partition:
    """Component label per node; a label is the smallest node in its component."""

    labels: tuple[int, ...]

    def members(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for v, c in enumerate(self.labels):
            out.setdefault(c, []).append(v)
        return out

    def ids(self) -> list[int]:
        return sorted(set(self.labels))

    def __getitem__(self, v: int) -> int:
        return self.labels[v]

    def __len__(self) -> int:
        return len(self.labels)


def connected_components(n: int, edges: Iterable[tuple[int, int]]) -> Partition:
    uf = UnionFind(n)
    for u, v in edges:
        uf.union(u, v)
    # union keeps the smaller root, so roots are component minima
    return Partition(tuple(uf.find(v) for v in range(n)))


def edge_components(graph: WeightedGraph, edge_ids: Iterable[int]) -> Partition:
    return connected_components(graph.n, ((graph.edges[e].u, graph.edges[e].v) for e in edge_ids))


def minimum_spanning_forest(graph: WeightedGraph, weights: Mapping[int, Fraction] | None = None) -> frozenset[int]:
    """Kruskal by (weight, edge id).  Edges missing from ``weights`` are ignored."""
    if weights is None:
        weights = {e.id: e.cost for e in graph.edges}
    uf = UnionFind(graph.n)
    chosen = []
    for eid in sorted(weights, key=lambda e: (weights[e], e)):
        e = graph.edges[eid]
        if uf.union(e.u, e.v):
            chosen.append(eid)
    return frozenset(chosen)


@dataclass
class SsspForest:
    radius: Fraction
    dist: dict[int, Fraction] = field(default_factory=dict)
    hops: dict[int, int] = field(default_factory=dict)
    root: dict[int, int] = field(default_factory=dict)
    parent: dict[int, int | None] = field(default_factory=dict)
    parent_edge: dict[int, int | None] = field(default_factory=dict)

    @property
    def kept(self) -> set[int]:
        return set(self.dist)

    @property
    def edges(self) -> frozenset[int]:
        return frozenset(e for e in self.parent_edge.values() if e is not None)

    def path_to_root(self, v: int) -> list[int]:
        path = []
        while self.parent_edge.get(v) is not None:
            path.append(self.parent_edge[v])
            v = self.parent[v]
        return path


def round_up_power(c: Fraction, alpha: Fraction) -> Fraction:
    """Smallest integer power of alpha that is >= c (0 stays 0)."""
    if c == 0:
        return Fraction(0)
    p = Fraction(1)
    if c <= 1:
        while p / alpha >= c:
            p /= alpha
    else:
        while p < c:
            p *= alpha
    return p


def sssp_forest(
    graph: WeightedGraph,
    reduced_costs: Mapping[int, Fraction],
    sources: Iterable[int],
    radius: Fraction,
    alpha: Fraction = Fraction(1),
) -> SsspForest:
    """Set-source shortest path forest over the edges in ``reduced_costs``,
    truncated to nodes at distance at most ``radius``.

    Labels are compared as (distance, hops, source); a node's parent is the
    smallest tight neighbour carrying the same source.  The rule is local, so
    a synchronous Bellman-Ford arrives at exactly the same forest.

    With ``alpha > 1`` costs are first rounded up to powers of alpha; the
    reported distances are still true forest distances under the given costs.
    """
    sources = sorted(set(sources))
    if not sources:
        raise InvalidInputError("empty source set")
    radius = Fraction(radius)
    alpha = Fraction(alpha)
    if alpha < 1:
        raise InvalidInputError("alpha must be at least 1")
    exact = alpha == 1
    work = {e: (Fraction(c) if exact else round_up_power(Fraction(c), alpha)) for e, c in reduced_costs.items()}
    for e, c in work.items():
        if c < 0:
            raise InvalidInputError(f"edge {e} has negative reduced cost")

    best: dict[int, tuple[Fraction, int]] = {s: (Fraction(0), 0) for s in sources}
    heap = [(Fraction(0), 0, s) for s in sources]
    heapq.heapify(heap)
    done: set[int] = set()
    order: list[int] = []
    while heap:
        d, h, v = heapq.heappop(heap)
        if v in done or (d, h) != best[v]:
            continue
        done.add(v)
        order.append(v)
        for w, eid in graph.adj[v]:
            if eid not in work or w in done:
                continue
            cand = (d + work[eid], h + 1)
            if exact and cand[0] > radius:
                continue
            if w not in best or cand < best[w]:
                best[w] = cand
                heapq.heappush(heap, (cand[0], cand[1], w))

    out = SsspForest(radius=radius)
    src: dict[int, int] = {}
    par: dict[int, tuple[int | None, int | None]] = {}
    # settle order is by (d, h), so every tight predecessor is resolved first
    source_set = set(sources)
    for v in order:
        if v in source_set:
            src[v] = v
            par[v] = (None, None)
            continue
        pick = None
        for u, eid in graph.adj[v]:
            if eid not in work or u not in src:
                continue
            if (best[u][0] + work[eid], best[u][1] + 1) == best[v]:
                key = (src[u], u)
                if pick is None or key < pick[0]:
                    pick = (key, eid)
        assert pick is not None
        src[v] = pick[0][0]
        par[v] = (pick[0][1], pick[1])

    true_dist: dict[int, Fraction] = {}
    for v in order:
        p, eid = par[v]
        true_dist[v] = Fraction(0) if p is None else true_dist[p] + Fraction(reduced_costs[eid])
    for v in order:
        if true_dist[v] > radius:
            continue
        out.dist[v] = true_dist[v]
        out.hops[v] = best[v][1]
        out.root[v] = src[v]
        out.parent[v], out.parent_edge[v] = par[v]
    return out


def dijkstra(graph: WeightedGraph, sources: Iterable[int], costs: Mapping[int, Fraction] | None = None) -> dict[int, Fraction]:
    """Plain multi-source distances, used by checks and demos."""
    if costs is None:
        costs = {e.id: Fraction(e.cost) for e in graph.edges}
    dist: dict[int, Fraction] = {}
    heap = [(Fraction(0), s) for s in sources]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for w, eid in graph.adj[v]:
            if eid in costs and w not in dist:
                heapq.heappush(heap, (d + costs[eid], w))
    return dist


def is_forest(graph: WeightedGraph, edge_ids: Sequence[int]) -> bool:
    """True when the edges form a forest."""
    uf = UnionFind(graph.n)
    return all(uf.union(graph.edges[e].u, graph.edges[e].v) for e in edge_ids)
