"""Pipelined tree communication, part forests and partwise aggregation."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping

from ..errors import ConfigurationError, InvalidInputError
from ..graph import WeightedGraph, edge_components
from .network import Message, Node, Outbox, SimNetwork

Merge = Callable[[Any, Any], Any]


def convergecast(
    net: SimNetwork,
    up: str,
    down: str,
    items: Mapping[int, Mapping[Any, Any]],
    merge: Merge,
    tag: str,
) -> dict[int, dict[Any, Any]]:
    """Send keyed items towards the roots of a forest, one item per round per
    edge, in increasing key order, merging equal keys on the way.

    A node forwards key k once every child still talking has already sent a
    key >= k, so nothing smaller can arrive later.  Children finish with an
    empty message.  Returns the merged items held at every root.
    """
    for v, node in net.nodes.items():
        node._cc = dict(items.get(v, {}))
        node._cc_front = {c: None for c in getattr(node, down)}
        node._cc_done = set()
        node._cc_last = None
        node._cc_fin = False

    def step(node: Node, inbox: dict[int, Message], rnd: int) -> Outbox:
        for c, msg in inbox.items():
            if msg == ():
                node._cc_done.add(c)
                continue
            k, val = msg
            node._cc_front[c] = k
            node._cc[k] = merge(node._cc[k], val) if k in node._cc else val
        parent = getattr(node, up)
        if parent is None or node._cc_fin:
            return {}
        limit = None
        for c, f in node._cc_front.items():
            if c in node._cc_done:
                continue
            if f is None:
                return {}
            limit = f if limit is None else min(limit, f)
        last = node._cc_last
        pending = [k for k in node._cc if last is None or k > last]
        if pending:
            k = min(pending)
            if limit is None or k <= limit:
                node._cc_last = k
                return {parent: (k, node._cc[k])}
            return {}
        if len(node._cc_done) == len(node._cc_front):
            node._cc_fin = True
            return {parent: ()}
        return {}

    net.run(step, tag)
    return {v: node._cc for v, node in net.nodes.items() if getattr(node, up) is None}


def broadcast(
    net: SimNetwork,
    down: str,
    root_items: Mapping[int, Iterable[tuple[Any, Any]]],
    tag: str,
) -> dict[int, dict[Any, Any]]:
    """Pipeline items from each root to its whole subtree; every node ends up
    with the items of its root."""
    for v, node in net.nodes.items():
        node._bc = {}
        node._bc_q = deque()
    for v, its in root_items.items():
        node = net.nodes[v]
        for k, val in sorted(its):
            node._bc[k] = val
            node._bc_q.append((k, val))

    def step(node: Node, inbox: dict[int, Message], rnd: int) -> Outbox:
        for _, (k, val) in inbox.items():
            node._bc[k] = val
            node._bc_q.append((k, val))
        kids = getattr(node, down)
        if node._bc_q and kids:
            msg = node._bc_q.popleft()
            return {c: msg for c in kids}
        node._bc_q.clear()
        return {}

    net.run(step, tag)
    return {v: node._bc for v, node in net.nodes.items()}


def global_gather(
    net: SimNetwork, items: Mapping[int, Mapping[Any, Any]], merge: Merge, tag: str
) -> dict[Any, Any]:
    """Merge keyed items from all nodes and hand the result to everyone."""
    net.ensure_bfs()
    at_root = convergecast(net, "bfs_parent", "bfs_children", items, merge, tag)
    result = at_root[net.bfs_root]
    got = broadcast(net, "bfs_children", {net.bfs_root: result.items()}, tag)
    assert all(g == result for g in got.values())
    return dict(result)


@dataclass(frozen=True)
class PartForest:
    """Parts of a vertex partition, each with a rooted spanning tree.

    ``part`` is the smallest node id of the part.  A part that contains a
    virtual node is rooted there; its physical pieces hang off the virtual
    node and talk to it only through global aggregation.
    """

    part: tuple[int, ...]
    parent: tuple[int | None, ...]

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for v, p in enumerate(self.parent):
            if p is not None:
                out.setdefault(p, []).append(v)
        return out

    def depth(self, graph: WeightedGraph | None = None) -> int:
        """Longest physical root-to-node path."""
        virtual = graph.virtual if graph is not None else frozenset()
        best = 0
        for v in range(len(self.parent)):
            d, x = 0, v
            while self.parent[x] is not None and self.parent[x] not in virtual:
                x = self.parent[x]
                d += 1
            best = max(best, d)
        return best

    def members(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for v, p in enumerate(self.part):
            out.setdefault(p, []).append(v)
        return out

    @classmethod
    def from_labels(cls, graph: WeightedGraph, labels: Iterable[int]) -> "PartForest":
        labels = list(labels)
        if len(labels) != graph.n:
            raise InvalidInputError("one label per node required")
        groups: dict[int, list[int]] = {}
        for v, lab in enumerate(labels):
            groups.setdefault(lab, []).append(v)
        part = [0] * graph.n
        parent: list[int | None] = [None] * graph.n
        for nodes in groups.values():
            pid = min(nodes)
            inside = set(nodes)
            virt = [v for v in nodes if v in graph.virtual]
            if len(virt) > 1:
                raise ConfigurationError("a part may hold at most one virtual node")
            start = virt[0] if virt else pid
            seen = {start}
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for w, _ in graph.adj[x]:
                    if w in inside and w not in seen and w not in graph.virtual:
                        seen.add(w)
                        parent[w] = x
                        queue.append(w)
            if seen != inside:
                raise InvalidInputError(f"part {pid} does not induce a connected subgraph")
            for v in nodes:
                part[v] = pid
        return cls(tuple(part), tuple(parent))

    @classmethod
    def from_edges(cls, graph: WeightedGraph, edge_ids: Iterable[int]) -> "PartForest":
        """Parts are the components of a forest; trees follow the forest edges."""
        edge_ids = list(edge_ids)
        comp = edge_components(graph, edge_ids)
        adj: dict[int, list[int]] = {}
        for eid in edge_ids:
            e = graph.edges[eid]
            adj.setdefault(e.u, []).append(e.v)
            adj.setdefault(e.v, []).append(e.u)
        parent: list[int | None] = [None] * graph.n
        for pid, nodes in comp.members().items():
            virt = [v for v in nodes if v in graph.virtual]
            if len(virt) > 1:
                raise ConfigurationError("a part may hold at most one virtual node")
            start = virt[0] if virt else pid
            seen = {start}
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for w in sorted(adj.get(x, [])):
                    if w not in seen:
                        seen.add(w)
                        parent[w] = x
                        queue.append(w)
        return cls(comp.labels, tuple(parent))


def install_parts(net: SimNetwork, parts: PartForest) -> None:
    """Give every node its own slice of the part forest."""
    kids = parts.children()
    for v, node in net.nodes.items():
        p = parts.parent[v]
        node.part_id = parts.part[v]
        node.part_up = p if p is not None and p not in net.graph.virtual else None
        node.part_vparent = p if p in net.graph.virtual else None
        node.part_children = sorted(c for c in kids.get(v, []) if c not in net.graph.virtual)
    for s in net.virtual:
        if parts.parent[s] is not None:
            raise ConfigurationError("virtual nodes must root their part")
        net.replica[s]["part_id"] = parts.part[s]
        net.replica[s]["attached"] = bool(kids.get(s))


def partwise_aggregate(
    net: SimNetwork,
    parts: PartForest | None,
    values: Mapping[int, Any],
    op: Merge,
    tag: str = "PA",
    vector: bool = False,
) -> tuple[dict[int, Any], int]:
    """Every node learns op folded over its part.

    With ``vector=True`` values are tuples of equal length; op is applied
    entry by entry and entries travel pipelined, one per message.  ``parts=None`` reuses the forest
    already installed on the nodes.  Returns (result per node, rounds).
    """
    if parts is not None:
        install_parts(net, parts)
    start = net.rounds
    vec = {v: (tuple(x) if vector else (x,)) for v, x in values.items()}
    items = {v: dict(enumerate(vec[v])) for v in net.nodes if v in vec}
    at_roots = convergecast(net, "part_up", "part_children", items, op, tag)

    virt_result: dict[int, dict[int, Any]] = {}
    attached = [s for s in net.virtual if net.replica[s].get("attached")]
    if attached:
        slot = {s: i for i, s in enumerate(net.virtual)}
        width = max((len(x) for x in vec.values()), default=1)
        contrib: dict[int, dict[int, Any]] = {}
        for v, store in at_roots.items():
            s = net.nodes[v].part_vparent
            if s is not None:
                contrib[v] = {slot[s] * width + i: x for i, x in store.items()}
        gathered = global_gather(net, contrib, op, tag)
        for s in attached:
            res = dict(enumerate(vec.get(s, ())))
            for key, x in gathered.items():
                if key // width == slot[s]:
                    i = key % width
                    res[i] = op(res[i], x) if i in res else x
            virt_result[s] = res
    for s in net.virtual:
        if s not in virt_result:
            virt_result[s] = dict(enumerate(vec.get(s, ())))
        net.replica[s]["pa"] = virt_result[s]

    roots = {}
    for v, store in at_roots.items():
        s = net.nodes[v].part_vparent
        roots[v] = virt_result[s].items() if s is not None else store.items()
    got = broadcast(net, "part_children", roots, tag)

    def unpack(d: dict[int, Any]) -> Any:
        t = tuple(d[i] for i in sorted(d))
        return t if vector else (t[0] if t else None)

    out = {v: unpack(d) for v, d in got.items()}
    for s in net.virtual:
        out[s] = unpack(virt_result[s])
    used = net.rounds - start
    net.pa_max = max(net.pa_max, used)
    return out, used


def build_part_forest(net: SimNetwork, forest_of: Mapping[int, set[int]], tag: str) -> PartForest:
    """Find the components of the selected edges and root a tree in each.

    ``forest_of[v]`` is the set of selected edges incident to physical node v
    (edges to virtual nodes included); this is node-local knowledge.
    """
    g = net.graph
    for v, node in net.nodes.items():
        mine = forest_of.get(v, set())
        node._pf_nb = sorted(w for w, eid in node.nbrs.items() if eid in mine)
        node._pf_att = min((s for s, eid in node.vnbrs.items() if eid in mine), default=-1)
        node._pf_val = (v, node._pf_att)
        node._pf_dirty = True

    def flood(node: Node, inbox: dict[int, Message], rnd: int) -> Outbox:
        lo, att = node._pf_val
        for _, (a, b) in inbox.items():
            if a < lo:
                lo = a
                node._pf_dirty = True
            if b != -1:
                if att == -1:
                    att = b
                    node._pf_dirty = True
                elif b != att:
                    raise ConfigurationError("two virtual nodes share a part")
        node._pf_val = (lo, att)
        if node._pf_dirty:
            node._pf_dirty = False
            return {w: node._pf_val for w in node._pf_nb}
        return {}

    net.run(flood, tag)
    part = list(range(g.n))
    if net.virtual:
        items = {}
        for v, node in net.nodes.items():
            lo, att = node._pf_val
            if att != -1:
                items[v] = {att: lo}
        gathered = global_gather(net, items, min, tag)
        for s in net.virtual:
            part[s] = min(s, gathered.get(s, s))
            net.replica[s]["part_id"] = part[s]
            net.replica[s]["attached"] = s in gathered
    for v, node in net.nodes.items():
        lo, att = node._pf_val
        part[v] = part[att] if att != -1 else lo

    # root every piece: at the minimum id, or at the node touching the virtual node
    for v, node in net.nodes.items():
        node.part_id = part[v]
        node.part_up = None
        node.part_vparent = None
        node.part_children = []
        node._pf_depth = None
        if node._pf_att != -1:
            node.part_vparent = node._pf_att
            node._pf_depth = 0
        elif node._pf_val[1] == -1 and v == part[v]:
            node._pf_depth = 0
        node._pf_sent = False

    def root(node: Node, inbox: dict[int, Message], rnd: int) -> Outbox:
        for u, msg in sorted(inbox.items()):
            if msg == ():
                node.part_children.append(u)
            elif node._pf_depth is None:
                node._pf_depth = msg[0] + 1
                node.part_up = u
        if node._pf_depth is not None and not node._pf_sent:
            node._pf_sent = True
            return {w: (() if w == node.part_up else (node._pf_depth,)) for w in node._pf_nb}
        return {}

    net.run(root, tag)
    parent: list[int | None] = [None] * g.n
    for v, node in net.nodes.items():
        node.part_children.sort()
        parent[v] = node.part_up if node.part_up is not None else node.part_vparent
    return PartForest(tuple(part), tuple(parent))


def across(
    net: SimNetwork, sends: Mapping[tuple[int, int], Any], tag: str
) -> dict[tuple[int, int], Any]:
    """Deliver one payload over each given edge.

    ``sends`` maps (sender, edge id) to a payload.  Physical pairs use one
    round.  A payload for a virtual node is gathered globally; a payload from
    a virtual node was computed from replicated state, so the receiver
    already has it.  Returns (receiver, edge id) -> payload.
    """
    g = net.graph
    out: dict[tuple[int, int], Any] = {}
    boxes: dict[int, dict[int, Any]] = {}
    to_virtual: dict[int, dict[int, Any]] = {}
    for (x, eid), payload in sends.items():
        y = g.edges[eid].other(x)
        if x in g.virtual:
            out[(y, eid)] = payload
        elif y in g.virtual:
            to_virtual.setdefault(x, {})[eid] = payload
        else:
            boxes.setdefault(x, {})[y] = payload
    got = net.exchange(boxes, tag)
    for y, msgs in got.items():
        for x, payload in msgs.items():
            out[(y, g.edge_between(x, y))] = payload
    if to_virtual:
        gathered = global_gather(net, to_virtual, lambda a, b: a, tag)
        for eid, payload in gathered.items():
            e = g.edges[eid]
            s = e.u if e.u in g.virtual else e.v
            out[(s, eid)] = payload
    return out


def global_or(net: SimNetwork, flags: Mapping[int, bool], tag: str) -> bool:
    items = {v: {0: 1} for v, f in flags.items() if f and v in net.nodes}
    got = global_gather(net, items, max, tag)
    return bool(got) or any(f for v, f in flags.items() if v not in net.nodes)


def global_sum(net: SimNetwork, values: Mapping[int, int], tag: str) -> int:
    items = {v: {0: x} for v, x in values.items() if x and v in net.nodes}
    got = global_gather(net, items, lambda a, b: a + b, tag)
    return got.get(0, 0) + sum(x for v, x in values.items() if v not in net.nodes)
