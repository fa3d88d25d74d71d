"""Synchronous message passing over the physical topology.

A program is a function ``step(node, inbox, rnd) -> outbox`` called once per
node per round.  It receives the node's own memory and the messages that
arrived this round, and returns at most one message per neighbour.  Rounds
run until a round in which nobody sends; that silent round is the barrier
that ends a building block and is not counted.
"""
from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from typing import Any, Callable, Iterable

from ..errors import CongestionError, TopologyError
from ..graph import WeightedGraph

Message = Any
Outbox = dict[int, Message]
Step = Callable[["Node", dict[int, Message], int], Outbox]


class Node:
    """Memory of one physical node.  Programs add attributes freely."""

    def __init__(self, vid: int, nbrs: dict[int, int], vnbrs: dict[int, int], costs: dict[int, int]):
        self.id = vid
        self.nbrs = nbrs
        self.vnbrs = vnbrs
        self.costs = costs

    def incident(self) -> list[tuple[int, int]]:
        """All (other endpoint, edge id) pairs, virtual ones included."""
        return sorted(list(self.nbrs.items()) + list(self.vnbrs.items()))


class SimNetwork:
    def __init__(
        self,
        graph: WeightedGraph,
        c_B: int = 4,
        seed: int | None = None,
        audit: bool = True,
        trace: bool = False,
    ):
        if c_B < 1:
            raise ValueError("c_B must be at least 1")
        self.graph = graph
        self.n = graph.n
        self.word = max(1, math.ceil(math.log2(max(graph.n, 2))))
        self.B = c_B * self.word
        self.seed = seed
        self.audit = audit
        self.virtual = sorted(graph.virtual)
        self.physical = graph.physical_nodes()
        self.nodes: dict[int, Node] = {}
        for v in self.physical:
            nbrs, vnbrs, costs = {}, {}, {}
            for w, eid in graph.adj[v]:
                (vnbrs if w in graph.virtual else nbrs)[w] = eid
                costs[eid] = graph.edges[eid].cost
            self.nodes[v] = Node(v, nbrs, vnbrs, costs)
        # replicated memory of virtual nodes; written only by global broadcasts
        self.replica: dict[int, dict[str, Any]] = {s: {} for s in self.virtual}
        self.rounds = 0
        self.messages = 0
        self.bits = 0
        self.tag = "setup"
        self.by_tag: Counter[str] = Counter()
        self.trace: list[tuple[int, int, int, str]] | None = [] if trace else None
        self.bfs_root: int | None = None
        self.bfs_depth: int | None = None
        self.pa_max = 0

    # -- accounting ---------------------------------------------------------
    def size(self, msg: Message) -> int:
        if msg is None or isinstance(msg, bool):
            return 1
        if isinstance(msg, int):
            return max(1, msg.bit_length()) + (msg < 0)
        if isinstance(msg, Fraction):
            # costs and distances are polynomially bounded: one word each
            return self.word
        if isinstance(msg, tuple):
            return max(1, sum(self.size(x) for x in msg))
        raise TypeError(f"cannot send {type(msg).__name__}")

    def run(self, step: Step, tag: str, nodes: Iterable[int] | None = None, limit: int = 10**6) -> int:
        """Execute a program until a silent round.  Returns rounds used."""
        prev = self.tag
        self.tag = tag
        active = list(self.nodes) if nodes is None else list(nodes)
        inbox: dict[int, dict[int, Message]] = {}
        rnd = 0
        try:
            while True:
                outs = {}
                for v in active:
                    out = step(self.nodes[v], inbox.get(v, {}), rnd)
                    if out:
                        outs[v] = out
                if not outs:
                    return rnd
                if rnd >= limit:
                    raise TopologyError(f"{tag}: no quiescence after {limit} rounds")
                inbox = self._deliver(outs)
                rnd += 1
        finally:
            self.tag = prev

    def _deliver(self, outs: dict[int, Outbox]) -> dict[int, dict[int, Message]]:
        inbox: dict[int, dict[int, Message]] = {}
        for u, out in outs.items():
            node = self.nodes[u]
            sent = 0
            for v, msg in out.items():
                if v not in node.nbrs:
                    raise TopologyError(f"node {u} sent to non-neighbour {v}")
                if self.audit:
                    b = self.size(msg)
                    if b > self.B:
                        raise CongestionError(f"{self.tag}: {b}-bit message {u}->{v} exceeds B={self.B}")
                    sent += b
                inbox.setdefault(v, {})[u] = msg
                self.messages += 1
            self.bits += sent
            if self.trace is not None:
                self.trace.append((self.rounds, u, (sent + 7) // 8, self.tag))
        self.rounds += 1
        self.by_tag[self.tag] += 1
        return inbox

    def exchange(self, outboxes: dict[int, Outbox], tag: str) -> dict[int, dict[int, Message]]:
        """One round with precomputed outboxes (no round is used if all are empty)."""
        outs = {v: o for v, o in outboxes.items() if o}
        if not outs:
            return {}
        prev, self.tag = self.tag, tag
        try:
            return self._deliver(outs)
        finally:
            self.tag = prev

    # -- global tree --------------------------------------------------------
    def ensure_bfs(self) -> None:
        if self.bfs_root is None:
            build_bfs_tree(self)


def build_bfs_tree(net: SimNetwork, root: int | None = None) -> tuple[dict[int, int | None], int]:
    """Flood from ``root`` (default: smallest physical id).  Every node keeps
    ``bfs_parent``, ``bfs_children`` and ``bfs_depth``.  A node joins under the
    smallest-id neighbour among those that reached it first."""
    if not net.physical:
        raise TopologyError("no physical nodes")
    root = min(net.physical) if root is None else root
    for node in net.nodes.values():
        node.bfs_parent = None
        node.bfs_children = []
        node.bfs_depth = None
        node._bfs_sent = False

    def step(node: Node, inbox: dict[int, Message], rnd: int) -> Outbox:
        out: Outbox = {}
        if rnd == 0 and node.id == root:
            node.bfs_depth = 0
        for u, msg in sorted(inbox.items()):
            if msg == ():
                node.bfs_children.append(u)
            elif node.bfs_depth is None:
                node.bfs_depth = msg[0] + 1
                node.bfs_parent = u
        if node.bfs_depth is not None and not node._bfs_sent:
            node._bfs_sent = True
            for w in node.nbrs:
                out[w] = () if w == node.bfs_parent else (node.bfs_depth,)
        return out

    net.run(step, "BFS")
    missing = [v for v, nd in net.nodes.items() if nd.bfs_depth is None]
    if missing:
        raise TopologyError(f"physical graph is disconnected; unreached: {missing[:5]}")
    depth = max(nd.bfs_depth for nd in net.nodes.values())
    net.bfs_root, net.bfs_depth = root, depth
    for nd in net.nodes.values():
        nd.bfs_children.sort()
    return {v: nd.bfs_parent for v, nd in net.nodes.items()}, depth
