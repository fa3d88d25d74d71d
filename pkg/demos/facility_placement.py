"""Facility placement as a Steiner tree problem.

Every node may open a facility at its own cost; clients must reach an open
facility.  Adding one extra node s joined to every v at cost o_v turns this
into connecting the clients to s.  Here the shell decomposition, the
classic moat-growing baseline and the exact optimum are compared on a few
random cities.
"""
import random
from fractions import Fraction

from shellforest import brute_force_opt, run_distributed_cfp, run_gw_reference, run_shell_decomposition
from shellforest.instances import gen_random

eps = Fraction(1, 4)
rng = random.Random(3)

print(f"{'seed':>10}  {'n':>2} {'clients':<12} {'engine':>6} {'moat':>5} {'OPT':>4}  opened (engine)")
for _ in range(8):
    seed = rng.getrandbits(24)
    inst = gen_random("connected", 7, 9, 6, "FPC", seed, clients=3)
    graph, spec = inst.materialize()
    forest, lb, _ = run_shell_decomposition(graph, spec, eps, eps)
    gw, _ = run_gw_reference(graph, spec)
    opt, _ = brute_force_opt(graph, spec)
    clients = sorted(spec.clients)
    print(f"{seed:>10}  {inst.n:>2} {str(clients):<12} {graph.cost_of(forest):>6} "
          f"{graph.cost_of(gw):>5} {opt:>4}  {spec.facilities(graph, forest)}")

# the facility node never talks: in the simulator it is a replicated virtual node
inst = gen_random("connected", 7, 9, 6, "FPC", 11, clients=3)
graph, spec = inst.materialize()
forest, _, rep = run_distributed_cfp(graph, spec, eps, eps, trace=True)
senders = {u for _, u, _, _ in rep.extra["trace"]}
print(f"\nsimulated run: {rep.extra['total_rounds']} rounds, facility node {spec.s} " + ("sent messages" if spec.s in senders else "sent nothing"))
