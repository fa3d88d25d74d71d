"""The shell decomposition executed on the simulated network.

Each phase is a chain of building blocks separated by barriers:

  SSSP  Bellman-Ford from the active terminals, truncated at radius r
  ECR   neighbours swap (distance, root, parent flag) and lower c'
  CMI   merge candidates are local; a global OR decides whether MSF runs
  MSF   forest over F' plus merge candidates, F' first
  RPS   marks climb the SSSP forest; every edge they cross joins F
  FFE   new components, their activity, active terminals, |T1|

Distances and reduced costs are exact fractions charged one word per value.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any

from ..engine import RunReport, check_eps, phase_bound, ratio_constant
from ..errors import InvariantError
from ..graph import WeightedGraph
from ..problems import ProblemSpec, validate_spec
from .ffe import ffe_distributed, prepare_ffe
from .msf import msf_partwise
from .network import Message, Node, Outbox, SimNetwork
from .trees import build_part_forest, global_gather, global_or, global_sum, partwise_aggregate

BLOCKS = ("SSSP", "ECR", "CMI", "MSF", "RPS", "FFE")
INF = None


def _better(a: tuple | None, b: tuple | None) -> bool:
    return a is not None and (b is None or a < b)


class DistributedRun:
    """Per-run driver.  Physical state lives on the nodes, virtual state in
    ``net.replica``; the driver only sequences the blocks."""

    def __init__(self, net: SimNetwork, spec: ProblemSpec, eps_prime: Fraction, eps_dprime: Fraction, seed: int | None):
        self.net = net
        self.g = net.graph
        self.spec = spec
        self.eps_prime = eps_prime
        self.eps_dprime = eps_dprime
        self.seed = seed
        self.r = eps_dprime / 4
        self.lb = Fraction(0)
        self.phase = 0
        for v, node in net.nodes.items():
            node.live = {eid: Fraction(node.costs[eid]) for _, eid in node.incident()}
            node.in_f = set()
        for s in net.virtual:
            net.replica[s]["in_f"] = set()

    # -- helpers ----------------------------------------------------------
    def _everyone(self) -> list[int]:
        return list(self.net.nodes) + list(self.net.virtual)

    def _state(self, x: int) -> Any:
        return self.net.nodes[x] if x in self.net.nodes else self.net.replica[x]

    def _read(self, x: int, key: str) -> Any:
        st = self._state(x)
        return getattr(st, key) if x in self.net.nodes else st.get(key)

    def _write(self, x: int, key: str, val: Any) -> None:
        if x in self.net.nodes:
            setattr(self.net.nodes[x], key, val)
        else:
            self.net.replica[x][key] = val

    def _live_cost(self, v: int, eid: int) -> Fraction | None:
        """Reduced cost of a live edge as kept at physical endpoint v."""
        return self.net.nodes[v].live.get(eid)

    # -- SSSP ---------------------------------------------------------------
    def sssp(self) -> None:
        """Labels (dist, hops, root) relaxed synchronously; virtual nodes are
        relaxed between physical runs through a global minimum."""
        net, r = self.net, self.r
        for x in self._everyone():
            mine = (Fraction(0), 0, x) if self._read(x, "in_t1") else None
            self._write(x, "lab", mine)
            self._write(x, "nlab", {})
        for node in net.nodes.values():
            node._dirty = node.lab is not None

        def relax(node: Node, via: int, eid: int, lab: tuple) -> None:
            c = node.live.get(eid)
            if c is None or lab is None:
                return
            cand = (lab[0] + c, lab[1] + 1, lab[2])
            if cand[0] > r:
                return
            if _better(cand, node.lab):
                node.lab = cand
                node._dirty = True

        def step(node: Node, inbox: dict[int, Message], rnd: int) -> Outbox:
            for u, lab in inbox.items():
                node.nlab[u] = lab
                relax(node, u, node.nbrs[u], lab)
            if not node._dirty:
                return {}
            node._dirty = False
            return {w: node.lab for w, eid in node.nbrs.items() if eid in node.live}

        while True:
            # virtual labels are replicated, so every neighbour relaxes over them locally
            for node in net.nodes.values():
                for s, eid in node.vnbrs.items():
                    lab = net.replica[s]["lab"]
                    node.nlab[s] = lab
                    relax(node, s, eid, lab)
            net.run(step, "SSSP")
            if not net.virtual:
                break
            items = {}
            for v, node in net.nodes.items():
                for s, eid in node.vnbrs.items():
                    c = node.live.get(eid)
                    if c is None or node.lab is None or node.lab[0] + c > r:
                        continue
                    cand = (node.lab[0] + c, node.lab[1] + 1, node.lab[2])
                    slot = net.virtual.index(s)
                    prev = items.setdefault(v, {}).get(slot)
                    if prev is None or cand < prev:
                        items[v][slot] = cand
            got = global_gather(net, items, min, "SSSP")
            changed = False
            for i, cand in got.items():
                s = net.virtual[i]
                if _better(cand, net.replica[s]["lab"]):
                    net.replica[s]["lab"] = cand
                    changed = True
            if not changed:
                break

        # parent: smallest tight neighbour carrying the same root
        for v, node in net.nodes.items():
            node.par = None
            node.par_edge = None
            if node.lab is None or node.lab[1] == 0:
                continue
            for u, eid in node.incident():
                lab = node.nlab.get(u)
                c = node.live.get(eid)
                if lab is None or c is None:
                    continue
                if (lab[0] + c, lab[1] + 1, lab[2]) == node.lab:
                    node.par, node.par_edge = u, eid
                    break
            assert node.par is not None
        for s in net.virtual:
            rep = net.replica[s]
            rep["par"] = rep["par_edge"] = None
            lab = rep["lab"]
            if lab is None or lab[1] == 0:
                continue
            # neighbours' labels and costs are their own knowledge: one more gather
            items = {}
            for v, node in net.nodes.items():
                eid = node.vnbrs.get(s)
                c = node.live.get(eid) if eid is not None else None
                if c is not None and node.lab is not None and (node.lab[0] + c, node.lab[1] + 1, node.lab[2]) == lab:
                    items[v] = {0: v}
            got = global_gather(net, items, min, "SSSP")
            u = got[0]
            rep["par"], rep["par_edge"] = u, self.g.edge_between(u, s)

    # -- ECR and CMI --------------------------------------------------------
    def ecr(self) -> None:
        """Swap (dist, root, parent flag) over live edges and lower c'."""
        net, r = self.net, self.r
        boxes = {}
        for v, node in net.nodes.items():
            out = {}
            for w, eid in node.nbrs.items():
                if eid in node.live:
                    d, root = (node.lab[0], node.lab[2]) if node.lab is not None else (None, None)
                    out[w] = (d, root, node.par_edge == eid)
            boxes[v] = out
        got = net.exchange(boxes, "ECR")
        for v, node in net.nodes.items():
            node.other = {}
            for u, msg in got.get(v, {}).items():
                node.other[node.nbrs[u]] = msg
            for s, eid in node.vnbrs.items():
                if eid in node.live:
                    rep = net.replica[s]
                    lab = rep["lab"]
                    node.other[eid] = (lab[0], lab[2]) if lab is not None else (None, None)
                    node.other[eid] += (rep["par_edge"] == eid,)
        for v, node in net.nodes.items():
            mine = node.lab[0] if node.lab is not None else None
            node.fprime = set()
            if node.par_edge is not None:
                node.fprime.add(node.par_edge)
            for eid, (d, root, is_par) in node.other.items():
                if is_par:
                    node.fprime.add(eid)
                cut = Fraction(0)
                for x in (mine, d):
                    if x is not None and x < r:
                        cut += r - x
                node.live[eid] = max(Fraction(0), node.live[eid] - cut)

    def cmi(self) -> bool:
        net = self.net
        for v, node in net.nodes.items():
            node.merge = set()
            if node.lab is None:
                continue
            for eid, (d, root, _) in node.other.items():
                if node.live[eid] == 0 and root is not None and root != node.lab[2]:
                    node.merge.add(eid)
        return global_or(net, {v: bool(node.merge) for v, node in net.nodes.items()}, "CMI")

    # -- MSF and RPS --------------------------------------------------------
    def msf(self) -> set[int]:
        net = self.net
        fprime = set()
        weights = {}
        for node in net.nodes.values():
            fprime |= node.fprime
            for eid in node.merge:
                weights[eid] = 1
        forest, _, _ = msf_partwise(net, weights, sorted(fprime), "MSF")
        chosen = set(forest) - fprime
        for node in net.nodes.values():
            node.chosen = {eid for eid in node.merge if eid in chosen}
        for s in net.virtual:
            net.replica[s]["chosen"] = {eid for eid in chosen if s in (self.g.edges[eid].u, self.g.edges[eid].v)}
        return chosen

    def rps(self) -> None:
        """A node takes its parent edge iff its SSSP subtree holds a marked endpoint."""
        net = self.net
        for v, node in net.nodes.items():
            node.marked = bool(node.chosen)
            node._sent_up = False
            node.in_f |= node.chosen
        for s in net.virtual:
            rep = net.replica[s]
            rep["marked"] = bool(rep["chosen"])
            rep["in_f"] |= rep["chosen"]
            rep["_sent_up"] = False

        def step(node: Node, inbox: dict[int, Message], rnd: int) -> Outbox:
            for u in inbox:
                node.marked = True
                node.in_f.add(node.nbrs[u])
            if node.marked and not node._sent_up and node.par_edge is not None:
                node._sent_up = True
                node.in_f.add(node.par_edge)
                if node.par in node.nbrs:
                    return {node.par: True}
            return {}

        while True:
            net.run(step, "RPS")
            if not net.virtual:
                break
            # marks reaching a virtual node go through a global OR, and the virtual
            # node's own upward step is replicated knowledge of its parent
            changed = False
            for s in net.virtual:
                rep = net.replica[s]
                items = {}
                for v, node in net.nodes.items():
                    if node.par == s and node.marked:
                        items[v] = {node.par_edge: 1}
                got = global_gather(net, items, max, "RPS")
                rep["in_f"] |= set(got)
                if got:
                    rep["marked"] = True
                if rep["marked"] and not rep["_sent_up"] and rep["par_edge"] is not None:
                    rep["_sent_up"] = True
                    rep["in_f"].add(rep["par_edge"])
                    p = net.nodes[rep["par"]]
                    p.in_f.add(rep["par_edge"])
                    if not p.marked:
                        p.marked = True
                        changed = True
            if not changed:
                break

    # -- prune, components, activity ---------------------------------------
    def prune(self) -> None:
        """Drop zero-cost live edges inside the ball that nothing selected."""
        for node in self.net.nodes.values():
            for eid in list(node.live):
                if node.live[eid] != 0 or eid in node.in_f or eid in node.fprime or eid in node.chosen:
                    continue
                d = node.other.get(eid, (None,))[0]
                if node.lab is not None and d is not None:
                    del node.live[eid]

    def components(self) -> int:
        """Rebuild parts, evaluate activity, elect active terminals; returns |T1|."""
        net = self.net
        build_part_forest(net, {v: node.in_f for v, node in net.nodes.items()}, "FFE")
        ffe_distributed(net, self.spec, None, self.seed, tag="FFE")
        cand = {}
        for x in self._everyone():
            if self._read(x, "terminal") and self._read(x, "active"):
                cand[x] = x
        lead, _ = partwise_aggregate(net, None, cand, min, "FFE")
        count = {}
        for x in self._everyone():
            mine = lead[x] == x
            self._write(x, "in_t1", mine)
            count[x] = int(mine)
        return global_sum(net, count, "FFE")

    def forest(self) -> frozenset[int]:
        out = set()
        for node in self.net.nodes.values():
            out |= node.in_f
        for s in self.net.virtual:
            out |= self.net.replica[s]["in_f"]
        return frozenset(out)


def run_distributed_cfp(
    graph: WeightedGraph,
    spec: ProblemSpec,
    eps_prime: Fraction = Fraction(1, 4),
    eps_dprime: Fraction = Fraction(1, 4),
    seed: int | None = None,
    c_B: int = 4,
    trace: bool = False,
    kappa: int | None = None,
) -> tuple[frozenset[int], Fraction, RunReport]:
    """Run the shell decomposition in the simulator.

    The report's ``rounds`` holds one {block: rounds} row per phase; setup
    rounds (BFS tree, seed, terminal flags) are in ``extra["setup_rounds"]``.
    """
    eps_prime, eps_dprime = check_eps(eps_prime, eps_dprime)
    validate_spec(spec, graph.n, graph)
    net = SimNetwork(graph, c_B=c_B, seed=seed, trace=trace)
    net.ensure_bfs()
    ctx = prepare_ffe(net, spec, seed, kappa)
    run = DistributedRun(net, spec, eps_prime, eps_dprime, seed)
    for x in run._everyone():
        run._write(x, "in_t1", ctx.terminal[x])
    t = sum(ctx.terminal.values())
    active = t
    setup = net.rounds
    bound = phase_bound(graph.n, graph.max_cost, eps_prime, eps_dprime)
    rows = []
    while active:
        if run.phase > bound:
            raise InvariantError(f"no termination after {run.phase} phases (bound {bound})")
        before = dict(net.by_tag)
        run.sssp()
        run.ecr()
        if run.cmi():
            run.msf()
        else:
            for node in net.nodes.values():
                node.chosen = set()
            for s in net.virtual:
                net.replica[s]["chosen"] = set()
        run.rps()
        run.prune()
        active = run.components()
        run.lb += run.r * active / (1 + eps_prime)
        run.r *= 1 + eps_dprime
        run.phase += 1
        rows.append({b: net.by_tag.get(b, 0) - before.get(b, 0) for b in BLOCKS})
    forest = run.forest()
    report = RunReport(
        forest=forest,
        cost=graph.cost_of(forest),
        lb=run.lb,
        ratio=ratio_constant(t, eps_prime, eps_dprime),
        phases=run.phase,
        terminals=t,
        phase_bound=bound,
        rounds=rows,
        extra={
            "setup_rounds": setup,
            "D": net.bfs_depth,
            "T_PA": net.pa_max,
            "kappa": ctx.kappa,
            "messages": net.messages,
            "bits": net.bits,
            "B": net.B,
            "total_rounds": net.rounds,
            "trace": net.trace,
        },
    )
    return forest, run.lb, report
