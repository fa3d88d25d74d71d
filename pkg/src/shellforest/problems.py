"""Problem descriptions and their forest functions.

Every problem type answers the same question: given a node set S, does
some requirement cross the boundary of S?  ``f_subset`` is the slow,
literal answer; ``evaluate_components`` answers it for all parts of a
partition at once by counting.
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .errors import InvalidInputError, SizeError, SpecError
from .graph import Partition, WeightedGraph


@dataclass(frozen=True)
class SfIc:
    """Steiner forest, input components given as one label per node (None = no label)."""

    labels: tuple[int | None, ...]
    tag = "IC"


@dataclass(frozen=True)
class SfCr:
    """Steiner forest from per-node connection requests; need not be symmetric."""

    requests: tuple[frozenset[int], ...]
    tag = "CR"


@dataclass(frozen=True)
class SfScr:
    """Steiner forest from symmetric connection requests."""

    requests: tuple[frozenset[int], ...]
    tag = "SCR"


@dataclass(frozen=True)
class SfCic:
    """Labels plus the size of every label class, known to each node."""

    labels: tuple[int | None, ...]
    cardinality: tuple[tuple[int, int], ...]
    tag = "CIC"

    def card(self) -> dict[int, int]:
        return dict(self.cardinality)


@dataclass(frozen=True)
class Ppc:
    sources: frozenset[int]
    targets: frozenset[int]
    tag = "PPC"


@dataclass(frozen=True)
class Fpc:
    """Facility placement rephrased as Steiner tree on clients plus the facility node ``s``.

    ``opening`` holds o_v for the physical nodes 0..s-1.
    """

    opening: tuple[int, ...]
    clients: frozenset[int]
    s: int
    tag = "FPC"

    def facilities(self, graph: WeightedGraph, forest: Iterable[int]) -> list[int]:
        out = []
        for eid in forest:
            e = graph.edges[eid]
            if self.s in (e.u, e.v):
                out.append(e.other(self.s))
        return sorted(out)


ProblemSpec = Union[SfIc, SfCr, SfScr, SfCic, Ppc, Fpc]
VARIANTS = ("IC", "CR", "SCR", "CIC", "PPC", "FPC")


def make_cic(labels: Iterable[int | None]) -> SfCic:
    labels = tuple(labels)
    counts = Counter(x for x in labels if x is not None)
    return SfCic(labels, tuple(sorted(counts.items())))


def make_requests(n: int, pairs: Iterable[tuple[int, int]], symmetric: bool = True) -> tuple[frozenset[int], ...]:
    sets: list[set[int]] = [set() for _ in range(n)]
    for u, v in pairs:
        sets[u].add(v)
        if symmetric:
            sets[v].add(u)
    return tuple(frozenset(x) for x in sets)


def label_groups(spec: ProblemSpec) -> dict[int, set[int]]:
    """Label classes for the label-based variants."""
    if isinstance(spec, (SfIc, SfCic)):
        groups: dict[int, set[int]] = defaultdict(set)
        for v, lab in enumerate(spec.labels):
            if lab is not None:
                groups[lab].add(v)
        return dict(groups)
    if isinstance(spec, Fpc):
        return {0: set(spec.clients) | {spec.s}}
    raise TypeError(f"{type(spec).__name__} has no labels")


def request_pairs(spec: ProblemSpec) -> list[tuple[int, int]]:
    """Directed (requester, target) pairs for the request variants."""
    return [(u, v) for u, rs in enumerate(spec.requests) for v in sorted(rs)]


def spec_size(spec: ProblemSpec) -> int | None:
    if isinstance(spec, (SfIc, SfCic)):
        return len(spec.labels)
    if isinstance(spec, (SfCr, SfScr)):
        return len(spec.requests)
    if isinstance(spec, Fpc):
        return spec.s + 1
    return None


def validate_spec(spec: ProblemSpec, n: int, graph: WeightedGraph | None = None) -> None:
    """Raise SpecError unless the spec is a well-formed instance on nodes 0..n-1."""
    size = spec_size(spec)
    if size is not None and size != n:
        raise SpecError(f"{spec.tag} data covers {size} nodes, graph has {n}")
    if isinstance(spec, SfCic):
        actual = Counter(x for x in spec.labels if x is not None)
        if dict(actual) != spec.card():
            raise SpecError("label cardinalities do not match label counts")
    if isinstance(spec, (SfCr, SfScr)):
        for u, rs in enumerate(spec.requests):
            for v in rs:
                if not 0 <= v < n or v == u:
                    raise SpecError(f"node {u} has invalid request {v}")
        if isinstance(spec, SfScr):
            for u, v in request_pairs(spec):
                if u not in spec.requests[v]:
                    raise SpecError(f"request {u}->{v} is not symmetric")
    if isinstance(spec, Ppc):
        if spec.sources & spec.targets:
            raise SpecError("source and target sets overlap")
        if len(spec.sources) != len(spec.targets):
            raise SpecError("source and target sets differ in size")
        if any(not 0 <= v < n for v in spec.sources | spec.targets):
            raise SpecError("source or target out of range")
    if isinstance(spec, Fpc):
        if spec.s in spec.clients or any(not 0 <= c < spec.s for c in spec.clients):
            raise SpecError("clients must be physical nodes")
        if any(o < 1 for o in spec.opening):
            raise SpecError("opening costs must be positive")
        if graph is not None and spec.s not in graph.virtual:
            raise SpecError("facility node must be flagged virtual")
    if len(terminals(spec, n)) == 1:
        raise SpecError("exactly one terminal")


def f_subset(spec: ProblemSpec, S: Iterable[int], V: Iterable[int]) -> int:
    """Literal forest function value of S inside the ground set V."""
    S, V = set(S), set(V)
    if not S <= V:
        raise InvalidInputError("S is not a subset of V")
    if isinstance(spec, (SfIc, SfCic, Fpc)):
        for group in label_groups(spec).values():
            inside = group & V
            hit = inside & S
            if hit and hit != inside:
                return 1
        return 0
    if isinstance(spec, SfCr):
        return int(any((u in S) != (v in S) for u, v in request_pairs(spec) if u in V and v in V))
    if isinstance(spec, SfScr):
        # only requests leaving S are looked at; a broken asymmetric input shows up as asymmetry of f
        return int(any(v not in S for u, v in request_pairs(spec) if u in S and v in V))
    if isinstance(spec, Ppc):
        return int(len(S & spec.sources) != len(S & spec.targets))
    raise TypeError(spec)


def evaluate_components(spec: ProblemSpec, partition: Partition) -> dict[int, int]:
    comp = partition.labels
    active = dict.fromkeys(partition.ids(), 0)
    if isinstance(spec, (SfIc, SfCic, Fpc)):
        for group in label_groups(spec).values():
            per = Counter(comp[v] for v in group)
            if len(per) > 1:
                for c in per:
                    active[c] = 1
    elif isinstance(spec, (SfCr, SfScr)):
        for u, v in request_pairs(spec):
            if comp[u] != comp[v]:
                active[comp[u]] = active[comp[v]] = 1
    elif isinstance(spec, Ppc):
        bal: Counter[int] = Counter()
        for x in spec.sources:
            bal[comp[x]] += 1
        for y in spec.targets:
            bal[comp[y]] -= 1
        for c, b in bal.items():
            if b:
                active[c] = 1
    else:
        raise TypeError(spec)
    return active


def terminals(spec: ProblemSpec, n: int) -> list[int]:
    act = evaluate_components(spec, Partition(tuple(range(n))))
    return [v for v in range(n) if act[v]]


def augment_fpc(graph: WeightedGraph, opening: Iterable[int], clients: Iterable[int]) -> tuple[WeightedGraph, Fpc]:
    """Add the facility node s = n with an edge {v, s} of cost o_v for every v."""
    opening = tuple(int(o) for o in opening)
    if len(opening) != graph.n:
        raise InvalidInputError("one opening cost per node required")
    s = graph.n
    edges = graph.edge_list() + [(v, s, o) for v, o in enumerate(opening)]
    aug = WeightedGraph(graph.n + 1, edges, graph.virtual | {s})
    return aug, Fpc(opening, frozenset(clients), s)


def f_mask_table(spec: ProblemSpec, n: int) -> np.ndarray:
    """f over all 2**n bitmasks (bit v set = node v in S), computed with bit tricks."""
    masks = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=bool)

    def bit(v: int) -> np.ndarray:
        return (masks >> v) & 1

    if isinstance(spec, (SfIc, SfCic, Fpc)):
        for group in label_groups(spec).values():
            g = sum(1 << v for v in group if v < n)
            hit = masks & g
            out |= (hit != 0) & (hit != g)
    elif isinstance(spec, SfCr):
        for u, v in request_pairs(spec):
            out |= bit(u) != bit(v)
    elif isinstance(spec, SfScr):
        for u, v in request_pairs(spec):
            out |= (bit(u) == 1) & (bit(v) == 0)
    elif isinstance(spec, Ppc):
        cx = sum(bit(x) for x in spec.sources) if spec.sources else np.zeros_like(masks)
        cy = sum(bit(y) for y in spec.targets) if spec.targets else np.zeros_like(masks)
        out = cx != cy
    return out


@dataclass
class AxiomReport:
    n: int
    zero: bool = True
    nontrivial: bool = False
    symmetry: list[tuple[frozenset[int], frozenset[int]]] = field(default_factory=list)
    disjointness: list[tuple[frozenset[int], frozenset[int]]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.zero and not self.symmetry and not self.disjointness

    def summary(self) -> str:
        return (f"zero={'ok' if self.zero else 'VIOLATED'} symmetry={len(self.symmetry)} "
                f"disjointness={len(self.disjointness)} nontrivial={self.nontrivial}")


def _as_set(mask: int) -> frozenset[int]:
    return frozenset(v for v in range(mask.bit_length()) if mask >> v & 1)


MAX_AXIOM_NODES = 16


def check_proper(spec: ProblemSpec, V: int | Iterable[int]) -> AxiomReport:
    """Sweep every subset of V and report violations of the three axioms."""
    nodes = list(range(V)) if isinstance(V, int) else sorted(V)
    n = len(nodes)
    if n > MAX_AXIOM_NODES:
        raise SizeError(f"axiom sweep needs |V| <= {MAX_AXIOM_NODES}, got {n}")
    if nodes != list(range(n)):
        raise InvalidInputError("V must be 0..n-1")
    f = f_mask_table(spec, n)
    full = (1 << n) - 1
    rep = AxiomReport(n=n, zero=not f[full], nontrivial=bool(f.any()))
    masks = np.arange(1 << n, dtype=np.int64)
    asym = np.nonzero(f != f[full ^ masks])[0]
    for m in asym:
        m = int(m)
        if m < full ^ m:
            rep.symmetry.append((_as_set(m), _as_set(full ^ m)))

    zero = ~f
    for a in np.nonzero(zero)[0]:
        a = int(a)
        if a == 0:
            continue
        rest = full ^ a
        bits = [v for v in range(n) if rest >> v & 1]
        idx = np.arange(1 << len(bits), dtype=np.int64)
        sub = np.zeros_like(idx)
        for j, v in enumerate(bits):
            sub |= ((idx >> j) & 1) << v
        sel = sub[(sub > a) & zero[sub]]
        bad = sel[f[sel | a]]
        for b in bad:
            rep.disjointness.append((_as_set(a), _as_set(int(b))))
    return rep
