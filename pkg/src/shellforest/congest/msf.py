"""Deterministic minimum spanning forest by partwise aggregation.

Borůvka phases: every component finds its lightest outgoing edge, the
component graph (a forest of in-trees) is 3-coloured with Cole-Vishkin, a
matching is grown colour class by colour class, and unmatched components
hook onto their lightest edge.  Every component that has an outgoing edge
merges with another, so the number of live components at least halves.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping

from .network import SimNetwork
from .trees import across, build_part_forest, global_gather, global_or, partwise_aggregate


def _first(a: Any, b: Any) -> Any:
    return a


def _min(a: Any, b: Any) -> Any:
    return a if a <= b else b


def msf_partwise(
    net: SimNetwork,
    weights: Mapping[int, Any],
    initial: Iterable[int] = (),
    tag: str = "MSF",
) -> tuple[frozenset[int], int, dict[str, int]]:
    """Minimum spanning forest of the edges in ``weights`` under the order
    (weight, edge id).  Edges in ``initial`` are taken as already chosen and
    must be acyclic and lighter than everything else.

    Returns (edges, rounds, info) with info["phases"] = Borůvka phases.
    """
    g = net.graph
    start = net.rounds
    net.ensure_bfs()
    # weights are numbers of polynomial size and travel as one word each
    weights = {e: Fraction(w) for e, w in weights.items()}
    slot = {s: i for i, s in enumerate(net.virtual)}
    everyone = list(net.nodes) + list(net.virtual)
    chosen: dict[int, set[int]] = {x: set() for x in everyone}
    for eid in initial:
        e = g.edges[eid]
        chosen[e.u].add(eid)
        chosen[e.v].add(eid)
    parts = build_part_forest(net, {v: chosen[v] for v in net.nodes}, tag)
    phases = 0
    cv_iterations = 0

    def pa(values: Mapping[int, Any], op: Callable) -> dict[int, Any]:
        return partwise_aggregate(net, None, values, op, tag)[0]

    while True:
        comp = {x: parts.part[x] for x in everyone}
        # neighbours' component ids
        boxes = {
            v: {w: comp[v] for w, eid in node.nbrs.items() if eid in weights}
            for v, node in net.nodes.items()
        }
        got = net.exchange(boxes, tag)
        nb: dict[int, dict[int, int]] = {v: {} for v in net.nodes}
        for v, msgs in got.items():
            for u, c in msgs.items():
                nb[v][g.edge_between(u, v)] = c
        for v, node in net.nodes.items():
            for s, eid in node.vnbrs.items():
                if eid in weights:
                    nb[v][eid] = comp[s]

        cand: dict[int, tuple] = {}
        for v in net.nodes:
            opts = [(weights[eid], eid, c) for eid, c in nb[v].items() if c != comp[v]]
            if opts:
                cand[v] = min(opts)
        if net.virtual:
            items: dict[int, dict[int, tuple]] = {}
            for v, node in net.nodes.items():
                for s, eid in node.vnbrs.items():
                    if eid in weights and comp[v] != comp[s]:
                        prev = items.setdefault(v, {}).get(slot[s])
                        mine = (weights[eid], eid, comp[v])
                        items[v][slot[s]] = mine if prev is None else min(prev, mine)
            for i, best in global_gather(net, items, _min, tag).items():
                cand[net.virtual[i]] = best
        moe = pa(cand, _min)
        if not global_or(net, {x: moe[x] is not None for x in everyone}, tag):
            break
        phases += 1

        # the endpoint of a component's lightest edge inside the component owns it
        owns = {x: moe[x][1] for x in everyone if moe[x] is not None and x in (g.edges[moe[x][1]].u, g.edges[moe[x][1]].v)}
        heard = across(net, {(x, eid): comp[x] for x, eid in owns.items()}, tag)
        child: dict[int, dict[int, int]] = {x: {} for x in everyone}
        mutual_at: dict[int, bool] = {}
        for (y, eid), c in heard.items():
            child[y][eid] = c
            if owns.get(y) == eid:
                mutual_at[y] = True
        mutual = pa(mutual_at, _first)
        root = {}
        for x in everyone:
            if moe[x] is None:
                root[x] = True
            else:
                root[x] = bool(mutual[x]) and comp[x] < moe[x][2]
        # a mutual pair's smaller side is the root; drop it from the other side's children
        for y in everyone:
            for eid, c in list(child[y].items()):
                if owns.get(y) == eid and c < comp[y]:
                    del child[y][eid]

        def pull(value: Callable[[int], Any]) -> dict[int, Any]:
            sends = {(y, eid): value(y) for y in everyone for eid in child[y]}
            recv = across(net, sends, tag)
            return pa({x: p for (x, _), p in recv.items()}, _first)

        color = dict(comp)
        bound = g.n - 1
        while bound > 5:
            pc = pull(lambda y: color[y])
            for x in everyone:
                if root[x]:
                    color[x] = color[x] & 1
                else:
                    diff = color[x] ^ pc[x]
                    i = (diff & -diff).bit_length() - 1
                    color[x] = 2 * i + (color[x] >> i & 1)
            bound = 2 * bound.bit_length() - 1
            cv_iterations += 1
        for c in (5, 4, 3):
            pc = pull(lambda y: color[y])
            old = dict(color)
            for x in everyone:
                color[x] = min({0, 1, 2} - {old[x]}) if root[x] else pc[x]
            pc = pull(lambda y: color[y])
            for x in everyone:
                if color[x] == c:
                    color[x] = min({0, 1, 2} - {pc[x], old[x]})

        matched = {x: False for x in everyone}
        as_child = {x: False for x in everyone}
        for c in (0, 1, 2):
            sends = {(x, eid): comp[x] for x, eid in owns.items() if not root[x] and not matched[x]}
            recv = across(net, sends, tag)
            offer = {}
            for (y, eid), cc in recv.items():
                if eid in child[y] and color[y] == c and not matched[y]:
                    offer[y] = cc if y not in offer else min(offer[y], cc)
            pick = pa(offer, _min)
            sends = {}
            for y in everyone:
                if pick[y] is None:
                    continue
                matched[y] = True
                for eid, cc in child[y].items():
                    if cc == pick[y]:
                        sends[(y, eid)] = 1
            recv = across(net, sends, tag)
            hit = pa({x: 1 for (x, _) in recv}, _first)
            for x in everyone:
                if hit[x]:
                    matched[x] = as_child[x] = True

        sends = {}
        for x, eid in owns.items():
            if as_child[x] or not matched[x]:
                chosen[x].add(eid)
                sends[(x, eid)] = 1
        for (y, eid) in across(net, sends, tag):
            chosen[y].add(eid)
        parts = build_part_forest(net, {v: chosen[v] for v in net.nodes}, tag)

    edges = frozenset(e for x in net.nodes for e in chosen[x])
    return edges, net.rounds - start, {"phases": phases, "cv_iterations": cv_iterations}
