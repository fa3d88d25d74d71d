"""Forest-function evaluation on the simulated network.

Every node knows only its own slice of the problem: its label, its request
set, whether it is a source or target.  The data of virtual nodes is known
to everybody.  The routines below decide, for each part of the current
partition, whether it is active, and every node ends up knowing the answer
for its own part.
"""
from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass
from typing import Any, Mapping

from ..errors import ConfigurationError
from ..problems import Fpc, Ppc, ProblemSpec, SfCic, SfCr, SfIc, SfScr, label_groups
from .network import Message, Node, Outbox, SimNetwork
from .trees import PartForest, convergecast, global_gather, install_parts, partwise_aggregate

SEED_BITS = 64
RANDOMIZED = ("SCR", "CIC")


def default_kappa(n: int, c: int = 3) -> int:
    return c * max(1, math.ceil(math.log2(max(n, 2))))


def _coins(seed: int, person: bytes, data: bytes, kappa: int) -> int:
    h = hashlib.blake2b(data, key=seed.to_bytes(8, "little"), person=person,
                        digest_size=max(1, min(64, (kappa + 7) // 8)))
    return int.from_bytes(h.digest(), "little") & ((1 << kappa) - 1)


def pair_coins(seed: int, u: int, v: int, kappa: int) -> int:
    """kappa fair coins for the request {u, v}, bit j belongs to test j."""
    a, b = min(u, v), max(u, v)
    return _coins(seed, b"scr-pair", f"{a},{b}".encode(), kappa)


def label_coins(seed: int, label: int, kappa: int) -> int:
    return _coins(seed, b"cic-label", str(label).encode(), kappa)


def scr_node_parity(seed: int, u: int, requests: frozenset[int], kappa: int) -> int:
    """XOR of the coins of all requests held by u; a part's XOR is its test outcome."""
    x = 0
    for v in requests:
        x ^= pair_coins(seed, u, v, kappa)
    return x


def scr_part_parity(seed: int, spec: SfScr, part: set[int], kappa: int) -> int:
    """Centralized reference for the XOR a part computes; bit j = 1 means test j failed."""
    x = 0
    for u in part:
        x ^= scr_node_parity(seed, u, spec.requests[u], kappa)
    return x


def cube_ceil(x: int) -> int:
    """Smallest integer c with c**3 >= x."""
    c = max(0, round(x ** (1 / 3)) - 1)
    while c ** 3 < x:
        c += 1
    return c


@dataclass
class FfeContext:
    spec: ProblemSpec
    seed: int | None
    kappa: int
    terminal: dict[int, bool]


def share_seed(net: SimNetwork, seed: int, tag: str) -> int:
    """The BFS root cuts the seed into B-bit pieces and floods them down the tree."""
    net.ensure_bfs()
    width = net.B
    pieces = [(seed >> i) & ((1 << width) - 1) for i in range(0, SEED_BITS, width)]
    for node in net.nodes.values():
        node.seed_parts = list(pieces) if node.id == net.bfs_root else []
        node._sq = deque(node.seed_parts)

    def step(node: Node, inbox: dict[int, Message], rnd: int) -> Outbox:
        for _, piece in inbox.items():
            node.seed_parts.append(piece)
            node._sq.append(piece)
        if node._sq and node.bfs_children:
            piece = node._sq.popleft()
            return {c: piece for c in node.bfs_children}
        node._sq.clear()
        return {}

    net.run(step, tag)
    for node in net.nodes.values():
        node.seed = sum(p << (i * width) for i, p in enumerate(node.seed_parts))
        assert node.seed == seed
    return seed


def _install_inputs(net: SimNetwork, spec: ProblemSpec) -> None:
    """Hand every node its local input; virtual nodes' input goes to the replica."""
    def put(v: int, key: str, val: Any) -> None:
        if v in net.nodes:
            setattr(net.nodes[v], key, val)
        else:
            net.replica[v][key] = val

    everyone = list(net.nodes) + list(net.virtual)
    if isinstance(spec, (SfIc, SfCic, Fpc)):
        lab = [None] * net.n
        for key, group in label_groups(spec).items():
            for v in group:
                lab[v] = key
        card = spec.card() if isinstance(spec, SfCic) else {}
        for v in everyone:
            put(v, "label", lab[v])
            put(v, "card", card.get(lab[v], 0))
    elif isinstance(spec, (SfCr, SfScr)):
        for v in everyone:
            put(v, "requests", spec.requests[v])
    elif isinstance(spec, Ppc):
        for v in everyone:
            put(v, "balance", (v in spec.sources) - (v in spec.targets))


def _get(net: SimNetwork, v: int, key: str) -> Any:
    return getattr(net.nodes[v], key) if v in net.nodes else net.replica[v][key]


def prepare_ffe(net: SimNetwork, spec: ProblemSpec, seed: int | None = None, kappa: int | None = None) -> FfeContext:
    """One-off setup: local inputs, shared seed, and the terminal flag of every node.

    Terminal flags come from evaluating f on singletons.  For connection
    requests that are not symmetric a node may not know it is requested, so
    the requested ids are gathered first.
    """
    if spec.tag in RANDOMIZED and seed is None:
        raise ConfigurationError(f"{spec.tag} evaluation is randomized and needs a seed")
    if isinstance(spec, SfCic) and net.virtual:
        raise ConfigurationError("cardinality labels with virtual nodes are not supported")
    net.ensure_bfs()
    _install_inputs(net, spec)
    kappa = default_kappa(net.n) if kappa is None else kappa
    if seed is not None:
        seed &= (1 << SEED_BITS) - 1
        if spec.tag in RANDOMIZED:
            share_seed(net, seed, "FFE")
    ctx = FfeContext(spec, seed, kappa, {})
    net.ffe = ctx
    if isinstance(spec, SfCr):
        items = {v: {w: 1 for w in node.requests} for v, node in net.nodes.items() if node.requests}
        wanted = global_gather(net, items, max, "FFE")
        for v, node in net.nodes.items():
            node.requested = v in wanted
    singles = PartForest(tuple(range(net.n)), (None,) * net.n)
    amap, _ = ffe_distributed(net, spec, singles, seed, kappa)
    for v in net.nodes:
        net.nodes[v].terminal = bool(amap[v])
    for s in net.virtual:
        net.replica[s]["terminal"] = bool(amap[s])
    ctx.terminal = {v: bool(a) for v, a in amap.items()}
    return ctx


def ffe_distributed(
    net: SimNetwork,
    spec: ProblemSpec,
    parts: PartForest | None,
    seed: int | None = None,
    kappa: int | None = None,
    tag: str = "FFE",
) -> tuple[dict[int, int], int]:
    """Activity of every part.  ``parts=None`` uses the forest installed on the nodes.

    Returns (part id -> 0/1, rounds).
    """
    if spec.tag in RANDOMIZED and seed is None:
        raise ConfigurationError(f"{spec.tag} evaluation is randomized and needs a seed")
    ctx = getattr(net, "ffe", None)
    if ctx is None or ctx.spec is not spec:
        prepare_ffe(net, spec, seed, kappa)
        ctx = net.ffe
    if kappa is None:
        kappa = ctx.kappa
    if parts is not None:
        install_parts(net, parts)
    net.ensure_bfs()
    start = net.rounds
    if isinstance(spec, (SfIc, Fpc)):
        flags = _ffe_labels(net, tag)
    elif isinstance(spec, SfCr):
        flags = _ffe_cr(net, tag)
    elif isinstance(spec, SfScr):
        flags = _ffe_scr(net, seed, kappa, tag)
    elif isinstance(spec, SfCic):
        flags = _ffe_cic(net, seed, kappa, tag)
    elif isinstance(spec, Ppc):
        flags = _ffe_ppc(net, tag)
    else:
        raise TypeError(spec)
    amap: dict[int, int] = {}
    for v, a in flags.items():
        pid = _part(net, v)
        if amap.setdefault(pid, int(bool(a))) != int(bool(a)):
            raise AssertionError(f"part {pid} disagrees on its activity")
    for v in net.nodes:
        net.nodes[v].active = bool(flags[v])
    for s in net.virtual:
        net.replica[s]["active"] = bool(flags[s])
    return amap, net.rounds - start


def _part(net: SimNetwork, v: int) -> int:
    return net.nodes[v].part_id if v in net.nodes else net.replica[v]["part_id"]


def _or(a: Any, b: Any) -> Any:
    return a | b


def _same(a: int, b: int) -> int:
    return a if a == b else -1


def _everyone(net: SimNetwork) -> list[int]:
    return list(net.nodes) + list(net.virtual)


def _spread(net: SimNetwork, values: Mapping[int, int], tag: str) -> dict[int, Any]:
    """OR of the given flags over every part."""
    return partwise_aggregate(net, None, values, _or, tag)[0]


def _ffe_labels(net: SimNetwork, tag: str) -> dict[int, int]:
    """Per label, the single part holding it or -1, pipelined over the BFS tree."""
    items = {}
    for v, node in net.nodes.items():
        if node.label is not None:
            items[v] = {node.label: node.part_id}
    seen = global_gather(net, items, _same, tag)
    # virtual nodes are folded in by everybody locally
    for s in net.virtual:
        lab = net.replica[s]["label"]
        if lab is not None:
            pid = net.replica[s]["part_id"]
            seen[lab] = _same(seen[lab], pid) if lab in seen else pid
    mine = {}
    for v in _everyone(net):
        lab = _get(net, v, "label")
        if lab is not None and seen[lab] == -1:
            mine[v] = 1
    out = _spread(net, mine, tag)
    return {v: out[v] or 0 for v in _everyone(net)}


def _ffe_cr(net: SimNetwork, tag: str) -> dict[int, int]:
    """Terminals publish their part ids; unsatisfied requests mark both parts."""
    items = {}
    for v, node in net.nodes.items():
        if node.requests or node.requested:
            items[v] = {v: node.part_id}
    where = global_gather(net, items, _same, tag)
    marks: dict[int, dict[int, int]] = {}
    for v, node in net.nodes.items():
        for w in node.requests:
            if where[w] != node.part_id:
                marks.setdefault(v, {})[node.part_id] = 1
                marks[v][where[w]] = 1
    active = global_gather(net, marks, max, tag)
    return {v: int(_part(net, v) in active) for v in _everyone(net)}


def _chunks(net: SimNetwork, x: int, bits: int, width: int) -> tuple[int, ...]:
    mask = (1 << width) - 1
    return tuple((x >> i) & mask for i in range(0, bits, width))


def _ffe_scr(net: SimNetwork, seed: int, kappa: int, tag: str) -> dict[int, int]:
    """kappa parity tests at once: XOR of per-request coins over each part."""
    # each chunk travels with its index, so leave room for that
    width = net.B - 1
    while width > 1 and width + max(1, (-(-kappa // width) - 1).bit_length()) > net.B:
        width -= 1
    vals = {}
    for v in _everyone(net):
        reqs = _get(net, v, "requests")
        vals[v] = _chunks(net, scr_node_parity(seed, v, reqs, kappa), kappa, width)
    got = partwise_aggregate(net, None, vals, lambda a, b: a ^ b, tag, vector=True)[0]
    return {v: int(any(got[v])) for v in _everyone(net)}


def _ffe_ppc(net: SimNetwork, tag: str) -> dict[int, int]:
    vals = {v: _get(net, v, "balance") for v in _everyone(net)}
    got = partwise_aggregate(net, None, vals, lambda a, b: a + b, tag)[0]
    return {v: int(got[v] != 0) for v in _everyone(net)}


def _ffe_cic(net: SimNetwork, seed: int, kappa: int, tag: str) -> dict[int, int]:
    """Small parts count exactly; large parts test small labels by coin sums
    and large labels the way plain labels are tested."""
    n = net.n
    size = partwise_aggregate(net, None, {v: 1 for v in net.nodes}, lambda a, b: a + b, tag)[0]
    big_part = cube_ceil(n * n)        # parts above this size are large
    small_label = cube_ceil(n)         # labels below this size are small
    nodes = net.nodes
    large = {v: size[v] > big_part for v in nodes}

    # small parts: per-label counts at the part root
    items = {}
    for v, node in nodes.items():
        if not large[v] and node.label is not None:
            items[v] = {node.label: 1}
    at_root = convergecast(net, "part_up", "part_children", items, lambda a, b: a + b, tag)
    flags: dict[int, int] = {}
    card_of = {}
    for node in nodes.values():
        if node.label is not None:
            card_of[node.label] = node.card
    for v, counts in at_root.items():
        if not large[v] and any(c != card_of[lab] for lab, c in counts.items()):
            flags[v] = 1

    # large parts, small labels: sum of coins mod label size, kappa tests per size
    sizes = list(range(2, small_label))
    if sizes:
        width = len(sizes) * kappa
        vals = {}
        for v, node in nodes.items():
            if not large[v]:
                continue
            vec = [0] * width
            if node.label is not None and 2 <= node.card < small_label:
                coins = label_coins(seed, node.label, kappa)
                base = sizes.index(node.card) * kappa
                for j in range(kappa):
                    vec[base + j] = coins >> j & 1
            vals[v] = tuple(vec)
        if vals:
            sums = partwise_aggregate(net, None, vals, lambda a, b: a + b, tag, vector=True)[0]
            for v in vals:
                if any(x % sizes[i // kappa] for i, x in enumerate(sums[v])):
                    flags[v] = 1

    # large labels: which labels sit in more than one part
    items = {}
    for v, node in nodes.items():
        if node.label is not None and node.card >= small_label:
            items[v] = {node.label: node.part_id}
    seen = global_gather(net, items, _same, tag)
    for v, node in nodes.items():
        if large[v] and node.label is not None and seen.get(node.label) == -1:
            flags[v] = 1
    out = _spread(net, flags, tag)
    return {v: out[v] or 0 for v in _everyone(net)}
