"""Instance files and instance generators.

The text format, one directive per line, ``#`` starts a comment::

    cfp-instance 1
    n 4
    meta seed 7
    edge 0 1 3
    edge 1 2 1
    problem IC
    label 0 1
    label 2 1

Problem data by tag: ``label v lab`` (IC, CIC), ``card lab size`` (CIC),
``request u v`` (CR, SCR; one line per direction), ``source v`` and
``target v`` (PPC), ``open v cost`` and ``client v`` (FPC).  An FPC file
stores the physical graph; the facility node is added on load.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import GenerationError, InstanceParseError, InvalidInputError
from .graph import WeightedGraph
from .problems import (
    VARIANTS,
    Fpc,
    Ppc,
    ProblemSpec,
    SfCic,
    SfCr,
    SfIc,
    SfScr,
    augment_fpc,
    make_cic,
    make_requests,
    request_pairs,
    validate_spec,
)

FORMAT_VERSION = 1
HEADER = "cfp-instance"


@dataclass
class InstanceFile:
    n: int
    edges: list[tuple[int, int, int]]
    spec: ProblemSpec
    virtual: frozenset[int] = frozenset()
    meta: dict[str, str] = field(default_factory=dict)
    version: int = FORMAT_VERSION

    def materialize(self) -> tuple[WeightedGraph, ProblemSpec]:
        """The (graph, spec) pair the solvers work on; validates both."""
        g = WeightedGraph(self.n, self.edges, self.virtual)
        spec = self.spec
        if isinstance(spec, Fpc):
            g, spec = augment_fpc(g, spec.opening, spec.clients)
        validate_spec(spec, g.n, g)
        return g, spec

    @property
    def tag(self) -> str:
        return self.spec.tag

    def dumps(self) -> str:
        out = [f"{HEADER} {self.version}", f"n {self.n}"]
        if self.virtual:
            out.append("virtual " + " ".join(map(str, sorted(self.virtual))))
        for k, v in sorted(self.meta.items()):
            out.append(f"meta {k} {v}")
        for u, v, c in self.edges:
            out.append(f"edge {u} {v} {c}")
        spec = self.spec
        out.append(f"problem {spec.tag}")
        if isinstance(spec, (SfIc, SfCic)):
            for v, lab in enumerate(spec.labels):
                if lab is not None:
                    out.append(f"label {v} {lab}")
            if isinstance(spec, SfCic):
                for lab, size in spec.cardinality:
                    out.append(f"card {lab} {size}")
        elif isinstance(spec, (SfCr, SfScr)):
            for u, v in request_pairs(spec):
                out.append(f"request {u} {v}")
        elif isinstance(spec, Ppc):
            out += [f"source {v}" for v in sorted(spec.sources)]
            out += [f"target {v}" for v in sorted(spec.targets)]
        elif isinstance(spec, Fpc):
            out += [f"open {v} {o}" for v, o in enumerate(spec.opening)]
            out += [f"client {v}" for v in sorted(spec.clients)]
        return "\n".join(out) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path: str | Path) -> "InstanceFile":
        return cls.loads(Path(path).read_text())

    @classmethod
    def loads(cls, text: str) -> "InstanceFile":
        return _parse(text)


def _ints(lineno: int, words: list[str], count: int) -> list[int]:
    if len(words) != count:
        raise InstanceParseError(lineno, f"expected {count} values after '{words and words[0]}'")
    try:
        return [int(w) for w in words]
    except ValueError:
        raise InstanceParseError(lineno, f"expected integers, got {' '.join(words)}") from None


def _parse(text: str) -> InstanceFile:
    lines = []
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((i, line.split()))
    if not lines:
        raise InstanceParseError(1, "empty instance")
    lineno, words = lines[0]
    if words[0] != HEADER or len(words) != 2:
        raise InstanceParseError(lineno, f"expected '{HEADER} <version>'")
    version = _ints(lineno, words[1:], 1)[0]
    if version != FORMAT_VERSION:
        raise InstanceParseError(lineno, f"unsupported format version {version}")

    n = None
    edges: list[tuple[int, int, int]] = []
    virtual: set[int] = set()
    meta: dict[str, str] = {}
    tag = None
    labels: dict[int, int] = {}
    cards: dict[int, int] = {}
    pairs: list[tuple[int, int]] = []
    sources: list[int] = []
    targets: list[int] = []
    opening: dict[int, int] = {}
    clients: list[int] = []
    last = lineno

    def node(lineno: int, v: int) -> int:
        if n is None:
            raise InstanceParseError(lineno, "'n' must come first")
        if not 0 <= v < n:
            raise InstanceParseError(lineno, f"node {v} out of range 0..{n - 1}")
        return v

    problem_words = {
        "IC": {"label"}, "CIC": {"label", "card"}, "CR": {"request"}, "SCR": {"request"},
        "PPC": {"source", "target"}, "FPC": {"open", "client"},
    }
    for lineno, words in lines[1:]:
        last = lineno
        key, rest = words[0], words[1:]
        if key == "n":
            if n is not None:
                raise InstanceParseError(lineno, "duplicate 'n'")
            n = _ints(lineno, rest, 1)[0]
            if n < 1:
                raise InstanceParseError(lineno, "n must be positive")
        elif key == "virtual":
            virtual |= {node(lineno, int(w)) for w in _ints(lineno, rest, len(rest))}
        elif key == "meta":
            if len(rest) < 2:
                raise InstanceParseError(lineno, "expected 'meta <key> <value>'")
            meta[rest[0]] = " ".join(rest[1:])
        elif key == "edge":
            if tag is not None:
                raise InstanceParseError(lineno, "edges must precede the problem section")
            u, v, c = _ints(lineno, rest, 3)
            node(lineno, u), node(lineno, v)
            if u == v:
                raise InstanceParseError(lineno, "self-loop")
            if c < 1:
                raise InstanceParseError(lineno, "edge costs must be positive integers")
            edges.append((u, v, c))
        elif key == "problem":
            if tag is not None:
                raise InstanceParseError(lineno, "duplicate problem section")
            if len(rest) != 1 or rest[0] not in VARIANTS:
                raise InstanceParseError(lineno, f"problem must be one of {', '.join(VARIANTS)}")
            tag = rest[0]
        elif tag is None:
            raise InstanceParseError(lineno, f"unknown directive '{key}'")
        elif key not in problem_words[tag]:
            raise InstanceParseError(lineno, f"'{key}' is not valid for problem {tag}")
        elif key == "label":
            v, lab = _ints(lineno, rest, 2)
            if node(lineno, v) in labels:
                raise InstanceParseError(lineno, f"node {v} labelled twice")
            labels[v] = lab
        elif key == "card":
            lab, size = _ints(lineno, rest, 2)
            cards[lab] = size
        elif key == "request":
            u, v = _ints(lineno, rest, 2)
            pairs.append((node(lineno, u), node(lineno, v)))
        elif key == "source":
            sources.append(node(lineno, _ints(lineno, rest, 1)[0]))
        elif key == "target":
            targets.append(node(lineno, _ints(lineno, rest, 1)[0]))
        elif key == "open":
            v, o = _ints(lineno, rest, 2)
            opening[node(lineno, v)] = o
        elif key == "client":
            clients.append(node(lineno, _ints(lineno, rest, 1)[0]))

    if n is None:
        raise InstanceParseError(last, "missing 'n'")
    if tag is None:
        raise InstanceParseError(last, "missing problem section")
    seen = {}
    for u, v, c in edges:
        k = (min(u, v), max(u, v))
        if k in seen:
            raise InstanceParseError(last, f"parallel edge {k}")
        seen[k] = c

    if tag in ("IC", "CIC"):
        labs = tuple(labels.get(v) for v in range(n))
        spec: ProblemSpec = SfIc(labs)
        if tag == "CIC":
            spec = SfCic(labs, tuple(sorted(cards.items())))
    elif tag in ("CR", "SCR"):
        for u, v in pairs:
            if u == v:
                raise InstanceParseError(last, f"node {u} requests itself")
        req = make_requests(n, pairs, symmetric=False)
        spec = SfCr(req) if tag == "CR" else SfScr(req)
    elif tag == "PPC":
        spec = Ppc(frozenset(sources), frozenset(targets))
    else:
        missing = [v for v in range(n) if v not in opening]
        if missing:
            raise InstanceParseError(last, f"no opening cost for node {missing[0]}")
        spec = Fpc(tuple(opening[v] for v in range(n)), frozenset(clients), n)
    inst = InstanceFile(n, edges, spec, frozenset(virtual), meta, version)
    try:
        inst.materialize()
    except InvalidInputError as exc:
        raise InstanceParseError(last, str(exc)) from None
    return inst


# -- generators -------------------------------------------------------------

FAMILIES = ("connected", "path", "cycle", "star", "complete")


def _topology(family: str, n: int, m: int | None, rng: random.Random) -> list[tuple[int, int]]:
    if family == "path":
        return [(i, i + 1) for i in range(n - 1)]
    if family == "cycle":
        if n < 3:
            raise GenerationError("a cycle needs at least 3 nodes")
        return [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    if family == "star":
        return [(0, i) for i in range(1, n)]
    if family == "complete":
        return [(u, v) for u in range(n) for v in range(u + 1, n)]
    if family != "connected":
        raise GenerationError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    full = n * (n - 1) // 2
    m = n - 1 if m is None else m
    if m < n - 1:
        raise GenerationError(f"a connected graph on {n} nodes needs m >= {n - 1}")
    if m > full:
        raise GenerationError(f"a simple graph on {n} nodes has at most {full} edges")
    order = list(range(n))
    rng.shuffle(order)
    pairs = set()
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        pairs.add((min(u, v), max(u, v)))
    rest = [(u, v) for u in range(n) for v in range(u + 1, n) if (u, v) not in pairs]
    pairs |= set(rng.sample(rest, m - len(pairs)))
    return sorted(pairs)


def _groups(rng: random.Random, nodes: list[int], k: int) -> list[list[int]]:
    """k disjoint groups of at least two nodes each."""
    if 2 * k > len(nodes):
        raise GenerationError(f"cannot place {k} groups of two on {len(nodes)} nodes")
    picked = rng.sample(nodes, rng.randint(2 * k, len(nodes)))
    groups = [picked[2 * i: 2 * i + 2] for i in range(k)]
    for v in picked[2 * k:]:
        groups[rng.randrange(k)].append(v)
    return groups


def gen_random(
    family: str,
    n: int,
    m: int | None,
    max_cost: int,
    variant: str,
    seed: int,
    k: int | None = None,
    requests: int | None = None,
    pairs: int | None = None,
    clients: int | None = None,
) -> InstanceFile:
    """Random instance.  ``k`` label classes (IC, CIC), ``requests`` request
    pairs (CR, SCR), ``pairs`` = |X| = |Y| (PPC), ``clients`` (FPC)."""
    if n < 2:
        raise GenerationError("need at least 2 nodes")
    if max_cost < 1:
        raise GenerationError("max_cost must be at least 1")
    if variant not in VARIANTS:
        raise GenerationError(f"unknown variant {variant!r}")
    rng = random.Random(seed)
    edges = [(u, v, rng.randint(1, max_cost)) for u, v in _topology(family, n, m, rng)]
    nodes = list(range(n))
    if variant in ("IC", "CIC"):
        k = max(1, n // 4) if k is None else k
        labels: list[int | None] = [None] * n
        for i, grp in enumerate(_groups(rng, nodes, k)):
            for v in grp:
                labels[v] = i
        spec: ProblemSpec = SfIc(tuple(labels)) if variant == "IC" else make_cic(labels)
    elif variant in ("CR", "SCR"):
        count = max(1, n // 3) if requests is None else requests
        every = [(u, v) for u in nodes for v in nodes if u < v]
        if count < 1 or count > len(every):
            raise GenerationError(f"cannot draw {count} distinct request pairs")
        chosen = rng.sample(every, count)
        chosen = [(v, u) if rng.random() < 0.5 else (u, v) for u, v in chosen]
        reqs = make_requests(n, chosen, symmetric=(variant == "SCR"))
        spec = SfCr(reqs) if variant == "CR" else SfScr(reqs)
    elif variant == "PPC":
        size = max(1, n // 4) if pairs is None else pairs
        if size < 1 or 2 * size > n:
            raise GenerationError(f"cannot draw disjoint X, Y of size {size} from {n} nodes")
        both = rng.sample(nodes, 2 * size)
        spec = Ppc(frozenset(both[:size]), frozenset(both[size:]))
    else:
        count = max(1, n // 3) if clients is None else clients
        if not 1 <= count <= n:
            raise GenerationError(f"cannot draw {count} clients from {n} nodes")
        opening = tuple(rng.randint(1, max_cost) for _ in nodes)
        spec = Fpc(opening, frozenset(rng.sample(nodes, count)), n)
    meta = {"family": family, "seed": str(seed), "generator": "random"}
    inst = InstanceFile(n, edges, spec, frozenset(), meta)
    inst.materialize()
    return inst


def _bitset(x: int | Iterable[int], n: int) -> frozenset[int]:
    if isinstance(x, int):
        if x < 0 or x >> n:
            raise GenerationError(f"bitmask {x} does not fit {n} bits")
        return frozenset(i for i in range(n) if x >> i & 1)
    out = frozenset(x)
    if any(not 0 <= i < n for i in out):
        raise GenerationError(f"set elements must lie in 0..{n - 1}")
    return out


def lower_bound_ids(n: int) -> dict[str, int]:
    """a_i = i, a+ = n, a- = n+1, b_i = n+2+i, b+ = 2n+2, b- = 2n+3."""
    return {"a+": n, "a-": n + 1, "b+": 2 * n + 2, "b-": 2 * n + 3}


def heavy_cost(n: int, rho: int) -> int:
    return rho * (2 * n + 2) + 1


def gen_lower_bound(n: int, rho: int, A: int | Iterable[int], B: int | Iterable[int], variant: str = "SCR") -> InstanceFile:
    """Two double stars joined by four cross edges, two of them heavy.

    a_i hangs off a+ when i is in A and off a- otherwise, likewise b_i for
    B.  Node pairs (a_i, b_i) must be connected: symmetric requests (SCR),
    one-way requests a_i -> b_i (CR), or shared labels of size two (CIC, IC).
    """
    if n < 1 or rho < 1:
        raise GenerationError("n and rho must be positive")
    A, B = _bitset(A, n), _bitset(B, n)
    ids = lower_bound_ids(n)
    ap, am, bp, bm = ids["a+"], ids["a-"], ids["b+"], ids["b-"]
    W = heavy_cost(n, rho)
    edges = [(i, ap if i in A else am, 1) for i in range(n)]
    edges += [(n + 2 + i, bp if i in B else bm, 1) for i in range(n)]
    edges += [(ap, bp, 1), (ap, bm, W), (am, bp, W), (am, bm, 1)]
    size = 2 * n + 4
    pairs = [(i, n + 2 + i) for i in range(n)]
    if variant == "SCR":
        spec: ProblemSpec = SfScr(make_requests(size, pairs))
    elif variant == "CR":
        spec = SfCr(make_requests(size, pairs, symmetric=False))
    elif variant in ("CIC", "IC"):
        labels: list[int | None] = [None] * size
        for i, (a, b) in enumerate(pairs):
            labels[a] = labels[b] = i
        spec = make_cic(labels) if variant == "CIC" else SfIc(tuple(labels))
    else:
        raise GenerationError(f"lower-bound family supports SCR, CR, CIC and IC, not {variant!r}")
    meta = {
        "generator": "lower-bound",
        "rho": str(rho),
        "A": ",".join(map(str, sorted(A))) or "-",
        "B": ",".join(map(str, sorted(B))) or "-",
    }
    return InstanceFile(size, edges, spec, frozenset(), meta)


def heavy_edges(inst: InstanceFile) -> set[int]:
    """Edge ids of cost greater than one in a lower-bound instance."""
    return {i for i, (_, _, c) in enumerate(inst.edges) if c > 1}
