"""Centralized shell decomposition and the classic moat-growing baseline."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

from .errors import InvalidInputError, InvariantError
from .graph import (
    Partition,
    SsspForest,
    UnionFind,
    WeightedGraph,
    edge_components,
    is_forest,
    sssp_forest,
)
from .problems import ProblemSpec, evaluate_components, terminals, validate_spec

QUARTER = Fraction(1, 4)


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def ratio_constant(t: int, eps_prime: Fraction, eps_dprime: Fraction) -> Fraction:
    """(2 - 2/t)(1+eps')(1+eps'')^2, with the leading factor pinned to 2 for t < 2."""
    lead = Fraction(2) - Fraction(2, t) if t >= 2 else Fraction(2)
    return lead * (1 + Fraction(eps_prime)) * (1 + Fraction(eps_dprime)) ** 2


def phase_bound(n: int, max_cost: int, eps_prime: Fraction, eps_dprime: Fraction) -> int:
    """ceil(log_{1+eps''}(4(1+eps') n maxcost / eps'')) + 1, computed exactly."""
    target = 4 * (1 + Fraction(eps_prime)) * n * max(max_cost, 1) / Fraction(eps_dprime)
    k, p = 0, Fraction(1)
    while p < target:
        p *= 1 + Fraction(eps_dprime)
        k += 1
    return k + 1


def check_eps(eps_prime: Fraction, eps_dprime: Fraction) -> tuple[Fraction, Fraction]:
    a, b = Fraction(eps_prime), Fraction(eps_dprime)
    if not (0 < a <= QUARTER and 0 < b <= QUARTER):
        raise InvalidInputError("eps' and eps'' must lie in (0, 1/4]")
    return a, b


@dataclass
class PhaseTrace:
    phase: int
    r: Fraction
    active_before: list[int]
    active_after: list[int]
    ball: list[int]
    sssp_edges: list[int]
    merges: list[int]
    chosen: list[int]
    added: list[int]
    pruned: list[int]
    reduced: dict[int, Fraction]
    lb_increment: Fraction

    def to_json(self) -> str:
        d: dict[str, Any] = {
            "phase": self.phase,
            "r": frac_str(self.r),
            "active_before": self.active_before,
            "active_after": self.active_after,
            "ball": self.ball,
            "sssp_edges": self.sssp_edges,
            "merges": self.merges,
            "chosen": self.chosen,
            "added": self.added,
            "pruned": self.pruned,
            "reduced": {str(e): frac_str(c) for e, c in sorted(self.reduced.items())},
            "lb_increment": frac_str(self.lb_increment),
        }
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "PhaseTrace":
        d = json.loads(line)
        return cls(
            phase=d["phase"],
            r=Fraction(d["r"]),
            active_before=d["active_before"],
            active_after=d["active_after"],
            ball=d["ball"],
            sssp_edges=d["sssp_edges"],
            merges=d["merges"],
            chosen=d["chosen"],
            added=d["added"],
            pruned=d["pruned"],
            reduced={int(e): Fraction(c) for e, c in d["reduced"].items()},
            lb_increment=Fraction(d["lb_increment"]),
        )


@dataclass
class EngineState:
    graph: WeightedGraph
    spec: ProblemSpec
    eps_prime: Fraction
    eps_dprime: Fraction
    terminal_set: frozenset[int]
    forest: set[int]
    live: set[int]
    reduced: dict[int, Fraction]
    components: Partition
    active_terminals: list[int]
    r: Fraction
    lb: Fraction = Fraction(0)
    phase: int = 0

    def live_costs(self) -> dict[int, Fraction]:
        return {e: self.reduced[e] for e in sorted(self.live)}

    def snapshot(self) -> tuple:
        return (
            frozenset(self.forest), frozenset(self.live), tuple(sorted(self.reduced.items())),
            self.components, tuple(self.active_terminals), self.r, self.lb, self.phase,
        )


def initial_state(graph: WeightedGraph, spec: ProblemSpec, eps_prime: Fraction, eps_dprime: Fraction) -> EngineState:
    eps_prime, eps_dprime = check_eps(eps_prime, eps_dprime)
    validate_spec(spec, graph.n, graph)
    terms = terminals(spec, graph.n)
    return EngineState(
        graph=graph,
        spec=spec,
        eps_prime=eps_prime,
        eps_dprime=eps_dprime,
        terminal_set=frozenset(terms),
        forest=set(),
        live={e.id for e in graph.edges},
        reduced={e.id: Fraction(e.cost) for e in graph.edges},
        components=Partition(tuple(range(graph.n))),
        active_terminals=terms,
        r=eps_dprime / 4,
    )


def edge_cost_reduction(state: EngineState, sssp: SsspForest, r: Fraction) -> dict[int, Fraction]:
    out = {}
    for eid in state.live:
        e = state.graph.edges[eid]
        cut = sum((max(r - sssp.dist[x], Fraction(0)) for x in (e.u, e.v) if x in sssp.dist), Fraction(0))
        out[eid] = max(Fraction(0), state.reduced[eid] - cut)
    return out


def candidate_merges(state: EngineState, sssp: SsspForest) -> set[int]:
    out = set()
    for eid in state.live:
        e = state.graph.edges[eid]
        if state.reduced[eid] == 0 and e.u in sssp.root and e.v in sssp.root and sssp.root[e.u] != sssp.root[e.v]:
            out.add(eid)
    return out


def select_merge_forest(state: EngineState, sssp: SsspForest, merges: Iterable[int]) -> set[int]:
    """Kruskal with the SSSP forest edges first and then merge candidates by id."""
    uf = UnionFind(state.graph.n)
    for eid in sssp.edges:
        e = state.graph.edges[eid]
        uf.union(e.u, e.v)
    chosen = set()
    for eid in sorted(merges):
        e = state.graph.edges[eid]
        if uf.union(e.u, e.v):
            chosen.add(eid)
    return chosen


def root_path_selection(state: EngineState, sssp: SsspForest, chosen: Iterable[int]) -> set[int]:
    added = set()
    for eid in chosen:
        added.add(eid)
        e = state.graph.edges[eid]
        for x in (e.u, e.v):
            if x not in sssp.root:
                raise InvariantError(f"endpoint {x} of merge edge {eid} is outside the ball")
            added.update(sssp.path_to_root(x))
    return added


def prune_and_advance(
    state: EngineState,
    sssp: SsspForest,
    chosen: Iterable[int],
    spec: ProblemSpec | None = None,
    prune: str = "ball",
) -> tuple[set[int], Fraction]:
    """Drop zero-cost live edges, recompute components and active terminals,
    and advance LB and r.  Returns (pruned edges, LB increment).

    ``prune="ball"`` only drops zero-cost edges with both endpoints in the
    current ball that are neither forest, SSSP-forest nor chosen edges.
    ``prune="literal"`` drops every zero-cost edge outside the SSSP forest
    and the chosen set; it can cut the live graph apart once some component
    has stopped growing.
    """
    spec = spec or state.spec
    keep = set(sssp.edges) | set(chosen)
    pruned = set()
    for eid in state.live:
        if state.reduced[eid] != 0 or eid in keep:
            continue
        if prune == "literal":
            pruned.add(eid)
            continue
        e = state.graph.edges[eid]
        if eid not in state.forest and e.u in sssp.dist and e.v in sssp.dist:
            pruned.add(eid)
    state.live -= pruned
    state.components = edge_components(state.graph, state.forest)
    act = evaluate_components(spec, state.components)
    first: dict[int, int] = {}
    for v in sorted(state.terminal_set):
        first.setdefault(state.components[v], v)
    state.active_terminals = sorted(first[c] for c, a in act.items() if a)
    inc = state.r * len(state.active_terminals) / (1 + state.eps_prime)
    state.lb += inc
    state.r *= 1 + state.eps_dprime
    state.phase += 1
    return pruned, inc


def run_phase(state: EngineState, alpha: Fraction = Fraction(1), prune: str = "ball") -> PhaseTrace:
    before = list(state.active_terminals)
    r = state.r
    sssp = sssp_forest(state.graph, state.live_costs(), state.active_terminals, r, alpha)
    new_costs = edge_cost_reduction(state, sssp, r)
    changed = {e: c for e, c in new_costs.items() if c != state.reduced[e]}
    state.reduced.update(new_costs)
    merges = candidate_merges(state, sssp)
    chosen = select_merge_forest(state, sssp, merges)
    added = root_path_selection(state, sssp, chosen) - state.forest
    state.forest |= added
    if not is_forest(state.graph, sorted(state.forest)):
        raise InvariantError("selected edges contain a cycle")
    phase = state.phase
    pruned, inc = prune_and_advance(state, sssp, chosen, prune=prune)
    return PhaseTrace(
        phase=phase,
        r=r,
        active_before=before,
        active_after=list(state.active_terminals),
        ball=sorted(sssp.dist),
        sssp_edges=sorted(sssp.edges),
        merges=sorted(merges),
        chosen=sorted(chosen),
        added=sorted(added),
        pruned=sorted(pruned),
        reduced=changed,
        lb_increment=inc,
    )


def replay(state: EngineState, traces: Iterable[PhaseTrace]) -> EngineState:
    """Rebuild the state sequence from traces alone; spec is used only for terminal lookup."""
    for tr in traces:
        if tr.phase != state.phase or tr.r != state.r or tr.active_before != state.active_terminals:
            raise InvariantError(f"trace for phase {tr.phase} does not match state")
        state.reduced.update(tr.reduced)
        state.forest |= set(tr.added)
        state.live -= set(tr.pruned)
        state.components = edge_components(state.graph, state.forest)
        state.active_terminals = list(tr.active_after)
        state.lb += tr.lb_increment
        state.r *= 1 + state.eps_dprime
        state.phase += 1
    return state


@dataclass
class RunReport:
    forest: frozenset[int]
    cost: int
    lb: Fraction
    ratio: Fraction
    phases: int
    terminals: int
    phase_bound: int
    traces: list[PhaseTrace] = field(default_factory=list)
    rounds: list[dict[str, int]] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.cost <= self.ratio * self.lb

    def total_rounds(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for row in self.rounds:
            for k, v in row.items():
                out[k] = out.get(k, 0) + v
        return out


def run_shell_decomposition(
    graph: WeightedGraph,
    spec: ProblemSpec,
    eps_prime: Fraction = QUARTER,
    eps_dprime: Fraction = QUARTER,
    alpha: Fraction | None = None,
    prune: str = "ball",
) -> tuple[frozenset[int], Fraction, RunReport]:
    """Grow balls around active components in geometric radius steps.

    ``alpha`` switches on the rounded SSSP mode (pass ``1 + eps_prime`` to
    exercise it); the default is exact.
    """
    state = initial_state(graph, spec, eps_prime, eps_dprime)
    alpha = Fraction(1) if alpha is None else Fraction(alpha)
    bound = phase_bound(graph.n, graph.max_cost, state.eps_prime, state.eps_dprime)
    t = len(state.terminal_set)
    traces = []
    while state.active_terminals:
        if state.phase > bound:
            raise InvariantError(f"no termination after {state.phase} phases (bound {bound})")
        traces.append(run_phase(state, alpha, prune))
    forest = frozenset(state.forest)
    report = RunReport(
        forest=forest,
        cost=graph.cost_of(forest),
        lb=state.lb,
        ratio=ratio_constant(t, state.eps_prime, state.eps_dprime),
        phases=state.phase,
        terminals=t,
        phase_bound=bound,
        traces=traces,
    )
    return forest, state.lb, report


def run_gw_reference(graph: WeightedGraph, spec: ProblemSpec) -> tuple[frozenset[int], Fraction]:
    """Event-driven moat growing with exact rationals, then the reverse filter."""
    validate_spec(spec, graph.n, graph)
    n = graph.n
    comp = list(range(n))
    members = {v: [v] for v in range(n)}
    act = evaluate_components(spec, Partition(tuple(comp)))
    radius = [Fraction(0)] * n
    lb = Fraction(0)
    grown: list[int] = []
    while any(act[c] for c in members):
        best = None
        for e in graph.edges:
            ci, cj = comp[e.u], comp[e.v]
            if ci == cj:
                continue
            speed = act[ci] + act[cj]
            if speed == 0:
                continue
            eta = (e.cost - radius[e.u] - radius[e.v]) / speed
            if best is None or (eta, e.id) < best:
                best = (eta, e.id)
        if best is None:
            raise InvariantError("active component with no way out")
        eta, eid = best
        for v in range(n):
            if act[comp[v]]:
                radius[v] += eta
        lb += eta * sum(act[c] for c in members)
        grown.append(eid)
        part = edge_components(graph, grown)
        comp = list(part.labels)
        members = part.members()
        act = evaluate_components(spec, part)
    kept = set()
    for eid in grown:
        rest = [x for x in grown if x != eid]
        part = edge_components(graph, rest)
        if any(evaluate_components(spec, part).values()):
            kept.add(eid)
    return frozenset(kept), lb
