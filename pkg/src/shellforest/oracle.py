"""Exact brute-force optimum, cut feasibility and run certificates."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .engine import ratio_constant
from .errors import CertificationError, SizeError
from .graph import WeightedGraph, edge_components
from .problems import ProblemSpec, f_mask_table, f_subset

MAX_ENUM_EDGES = 20
MAX_FOREST_NODES = 12
MAX_CUT_NODES = 10


class _MaskF:
    """f on bitmasks, tabulated when small and memoised otherwise."""

    def __init__(self, spec: ProblemSpec, n: int):
        self.spec, self.n = spec, n
        self.table = f_mask_table(spec, n) if n <= 16 else None
        self.memo: dict[int, bool] = {}

    def __call__(self, mask: int) -> bool:
        if self.table is not None:
            return bool(self.table[mask])
        if mask not in self.memo:
            S = [v for v in range(self.n) if mask >> v & 1]
            self.memo[mask] = bool(f_subset(self.spec, S, range(self.n)))
        return self.memo[mask]


def brute_force_opt(
    graph: WeightedGraph,
    spec: ProblemSpec,
    max_edges: int = MAX_ENUM_EDGES,
    exhaustive: bool = False,
) -> tuple[int, frozenset[int]]:
    """Minimum-cost feasible edge set; ties go to the lexicographically smallest
    sorted edge-id tuple.

    The default search only builds forests (adding a cycle edge never helps)
    and stops extending once feasible.  ``exhaustive=True`` walks all 2**m
    subsets instead and is kept as the anchor for the pruned search.
    """
    n, m = graph.n, graph.m
    if m > max_edges and n > MAX_FOREST_NODES:
        raise SizeError(f"instance too large for enumeration (n={n}, m={m})")
    f = _MaskF(spec, n)
    if exhaustive:
        if m > max_edges:
            raise SizeError(f"exhaustive enumeration needs m <= {max_edges}")
        return _exhaustive(graph, f)

    order = sorted(graph.edges, key=lambda e: (e.cost, e.id))
    costs = [e.cost for e in order]
    parent = list(range(n))
    mask = [1 << v for v in range(n)]
    active = {v for v in range(n) if f(1 << v)}
    best: list = [None, None]
    picked: list[int] = []

    def find(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    def better(cost: int, ids: tuple[int, ...]) -> bool:
        return best[0] is None or (cost, ids) < (best[0], best[1])

    def dfs(i: int, cost: int) -> None:
        if not active:
            ids = tuple(sorted(picked))
            if better(cost, ids):
                best[0], best[1] = cost, ids
            return
        if i == m:
            return
        need = (len(active) + 1) // 2
        if best[0] is not None and cost + need * costs[i] > best[0]:
            return
        e = order[i]
        ra, rb = find(e.u), find(e.v)
        if ra != rb:
            # attach rb under ra, remember what to undo
            was_a, was_b = ra in active, rb in active
            old = mask[ra]
            parent[rb] = ra
            mask[ra] = old | mask[rb]
            active.discard(rb)
            now = f(mask[ra])
            if now:
                active.add(ra)
            else:
                active.discard(ra)
            picked.append(e.id)
            dfs(i + 1, cost + e.cost)
            picked.pop()
            parent[rb] = rb
            mask[ra] = old
            if was_a:
                active.add(ra)
            else:
                active.discard(ra)
            if was_b:
                active.add(rb)
        dfs(i + 1, cost)

    dfs(0, 0)
    if best[0] is None:
        raise SizeError("no feasible solution exists")
    return best[0], frozenset(best[1])


def _exhaustive(graph: WeightedGraph, f: _MaskF) -> tuple[int, frozenset[int]]:
    m = graph.m
    best = None
    for bits in range(1 << m):
        ids = [i for i in range(m) if bits >> i & 1]
        cost = graph.cost_of(ids)
        if best is not None and cost > best[0]:
            continue
        part = edge_components(graph, ids)
        feasible = True
        for members in part.members().values():
            if f(sum(1 << v for v in members)):
                feasible = False
                break
        if feasible:
            key = (cost, tuple(ids))
            if best is None or key < best:
                best = key
    assert best is not None
    return best[0], frozenset(best[1])


@dataclass
class Feasibility:
    ok: bool
    witness: frozenset[int] | None = None
    exhaustive: bool = False

    def __bool__(self) -> bool:
        return self.ok


def check_primal_feasible(
    graph: WeightedGraph, spec: ProblemSpec, forest: Iterable[int], exhaustive: bool | None = None
) -> Feasibility:
    """Every component must have f = 0; on small graphs also every cut."""
    forest = list(forest)
    n = graph.n
    part = edge_components(graph, forest)
    for c, members in sorted(part.members().items()):
        if f_subset(spec, members, range(n)):
            return Feasibility(False, frozenset(members))
    if exhaustive is None:
        exhaustive = n <= MAX_CUT_NODES
    if not exhaustive:
        return Feasibility(True)
    f = f_mask_table(spec, n)
    ends = [(1 << graph.edges[e].u, 1 << graph.edges[e].v) for e in forest]
    for S in range(1, (1 << n) - 1):
        if f[S] and not any(bool(S & a) != bool(S & b) for a, b in ends):
            return Feasibility(False, frozenset(v for v in range(n) if S >> v & 1), True)
    return Feasibility(True, None, True)


def instance_digest(graph: WeightedGraph, spec: ProblemSpec) -> str:
    h = hashlib.sha256()
    h.update(repr((graph.n, graph.edge_list(), sorted(graph.virtual))).encode())
    h.update(repr(spec).encode())
    return h.hexdigest()[:16]


@dataclass
class Certificate:
    digest: str
    cost: int
    lb: Fraction
    ratio: Fraction
    terminals: int
    feasible: Feasibility
    opt: int | None = None
    opt_edges: frozenset[int] | None = None
    links: dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.feasible) and all(self.links.values())

    def failed(self) -> list[str]:
        out = [k for k, v in self.links.items() if not v]
        if not self.feasible:
            out.insert(0, "feasible")
        return out

    def to_dict(self) -> dict:
        return {
            "digest": self.digest,
            "cost": self.cost,
            "lb": str(self.lb),
            "ratio": str(self.ratio),
            "terminals": self.terminals,
            "opt": self.opt,
            "feasible": self.feasible.ok,
            "links": self.links,
            "ok": self.ok,
        }


def certify_run(
    graph: WeightedGraph,
    spec: ProblemSpec,
    forest: Iterable[int],
    lb: Fraction,
    eps_prime: Fraction,
    eps_dprime: Fraction,
    opt: tuple[int, frozenset[int]] | None = None,
    strict: bool = True,
) -> Certificate:
    """Recompute cost, terminal count and ratio from raw inputs and check
    LB <= OPT <= c(F) <= ratio * LB.  ``strict`` raises on the first broken link."""
    forest = frozenset(forest)
    lb = Fraction(lb)
    cost = graph.cost_of(forest)
    t = sum(f_subset(spec, {v}, range(graph.n)) for v in range(graph.n))
    ratio = ratio_constant(t, Fraction(eps_prime), Fraction(eps_dprime))
    cert = Certificate(
        digest=instance_digest(graph, spec),
        cost=cost,
        lb=lb,
        ratio=ratio,
        terminals=t,
        feasible=check_primal_feasible(graph, spec, forest),
    )
    if opt is not None:
        cert.opt, cert.opt_edges = opt
        cert.links["LB<=OPT"] = lb <= cert.opt
        cert.links["OPT<=c(F)"] = cert.opt <= cost
    cert.links["c(F)<=ratio*LB"] = cost <= ratio * lb
    if strict and not cert.ok:
        link = cert.failed()[0]
        raise CertificationError(link, f"certification failed on {link} (digest {cert.digest})")
    return cert
