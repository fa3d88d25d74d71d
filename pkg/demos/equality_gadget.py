"""Two players hold bit strings A and B.  Build the double-star graph, solve
it, and read off whether A == B from the answer alone: a good enough
solution uses a heavy cross edge exactly when the strings differ.
"""
import random
from fractions import Fraction

from shellforest import run_shell_decomposition
from shellforest.instances import gen_lower_bound, heavy_cost, heavy_edges

eps = Fraction(1, 4)
rng = random.Random(8)
n, rho = 8, 3
print(f"n={n}, rho={rho}, heavy edge cost W={heavy_cost(n, rho)}, budget rho*(2n+2)={rho * (2 * n + 2)}\n")
for _ in range(6):
    a = rng.getrandbits(n)
    b = a if rng.random() < 0.5 else rng.getrandbits(n)
    inst = gen_lower_bound(n, rho, a, b)
    graph, spec = inst.materialize()
    forest, _, _ = run_shell_decomposition(graph, spec, eps, eps)
    heavy = bool(forest & heavy_edges(inst))
    print(f"A={a:0{n}b} B={b:0{n}b}  cost {graph.cost_of(forest):>3}  heavy edge {'yes' if heavy else 'no ':<3}"
          f"  -> says {'A != B' if heavy else 'A == B'}  ({'right' if heavy == (a != b) else 'WRONG'})")
