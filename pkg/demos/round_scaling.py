"""Where do the rounds go?

Runs the simulator on the double-star family with growing numbers of
terminal pairs and prints rounds per building block.  With one-way
requests a node does not know it is requested, so every phase gathers
marks over the BFS tree and pays for each of them.  Symmetric requests are
checked with random parity tests that fold inside each component.
"""
from fractions import Fraction

from shellforest.congest.runner import BLOCKS, run_distributed_cfp
from shellforest.instances import gen_lower_bound

eps = Fraction(1, 4)
print(f"{'variant':<7} {'t':>3} {'D':>2} {'kappa':>5} {'phases':>6}  " + " ".join(f"{b:>6}" for b in BLOCKS) + "  FFE/phase")
for variant in ("CR", "SCR"):
    for t in (8, 16, 32, 64):
        n = t // 2
        A = [i for i in range(n) if i % 2 == 0]
        graph, spec = gen_lower_bound(n, 3, A, A, variant).materialize()
        _, _, rep = run_distributed_cfp(graph, spec, eps, eps, seed=12345)
        tot = rep.total_rounds()
        per = max(r["FFE"] for r in rep.rounds)
        print(f"{variant:<7} {t:>3} {rep.extra['D']:>2} {rep.extra['kappa']:>5} {rep.phases:>6}  "
              + " ".join(f"{tot.get(b, 0):>6}" for b in BLOCKS) + f"  {per:>9}")
