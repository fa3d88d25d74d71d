"""Follow the shell decomposition phase by phase on a small Steiner forest
instance, then check the result against the exact optimum.

    python3 demos/steiner_walkthrough.py
"""
from fractions import Fraction

from shellforest import SfIc, WeightedGraph, brute_force_opt, certify_run, run_shell_decomposition

# two groups that must be connected: {0, 5} and {2, 7}
edges = [
    (0, 1, 2), (1, 2, 3), (2, 3, 1), (3, 4, 4), (4, 5, 2),
    (0, 6, 5), (6, 7, 1), (7, 5, 6), (1, 6, 2), (3, 7, 3),
]
labels = [0, None, 1, None, None, 0, None, 1]
graph = WeightedGraph(8, edges)
spec = SfIc(tuple(labels))
eps = Fraction(1, 4)

forest, lb, rep = run_shell_decomposition(graph, spec, eps, eps)

print(f"{rep.terminals} terminals, phase bound {rep.phase_bound}\n")
print(f"{'phase':>5} {'r':>7} {'active':<14} {'ball':>4}  added")
for tr in rep.traces:
    added = [(graph.edges[e].u, graph.edges[e].v) for e in tr.added]
    print(f"{tr.phase:>5} {float(tr.r):>7.3f} {str(tr.active_before):<14} {len(tr.ball):>4}  {added or ''}")

opt = brute_force_opt(graph, spec)
cert = certify_run(graph, spec, forest, lb, eps, eps, opt=opt)
print()
print("forest edges:", sorted((graph.edges[e].u, graph.edges[e].v) for e in forest))
print(f"LB = {lb} ({float(lb):.3f})")
print(f"OPT = {cert.opt}, c(F) = {cert.cost}, ratio*LB = {float(cert.ratio * lb):.3f}")
for link, ok in cert.links.items():
    print(f"  {link}: {'ok' if ok else 'FAILED'}")
