import random
from fractions import Fraction

import pytest

from shellforest.engine import run_shell_decomposition
from shellforest.errors import CertificationError, SizeError
from shellforest.graph import WeightedGraph, dijkstra, minimum_spanning_forest
from shellforest.instances import gen_lower_bound, gen_random
from shellforest.oracle import brute_force_opt, certify_run, check_primal_feasible
from shellforest.problems import VARIANTS, Ppc, SfIc

Q = Fraction(1, 4)


def path_instance():
    return WeightedGraph(3, [(0, 1, 1), (1, 2, 2)]), SfIc((0, None, 0))


class TestBruteForce:
    def test_path(self):
        g, spec = path_instance()
        assert brute_force_opt(g, spec) == (3, frozenset({0, 1}))

    def test_ppc_two_routes(self):
        g = WeightedGraph(4, [(0, 1, 2), (1, 3, 2), (0, 2, 3), (2, 3, 4)])
        assert brute_force_opt(g, Ppc(frozenset({0}), frozenset({3})))[0] == 4

    def test_lower_bound_frozen(self):
        # n=4, rho=3, A={0,1}, B={0,2}: OPT 41, found by separate enumeration
        g, spec = gen_lower_bound(4, 3, [0, 1], [0, 2]).materialize()
        opt, _ = brute_force_opt(g, spec)
        assert opt == 41 > 3 * (2 * 4 + 2)

    def test_lower_bound_equal_sets(self):
        g, spec = gen_lower_bound(8, 3, [1, 2, 5], [1, 2, 5]).materialize()
        assert brute_force_opt(g, spec)[0] == 18

    def test_forest_search_matches_exhaustive(self):
        rng = random.Random(13)
        for i in range(60):
            n = rng.randint(3, 8)
            m = rng.randint(n - 1, min(12, n * (n - 1) // 2))
            variant = VARIANTS[i % 5]
            g, spec = gen_random("connected", n, m, 6, variant, rng.getrandbits(32)).materialize()
            assert brute_force_opt(g, spec) == brute_force_opt(g, spec, exhaustive=True)

    def test_mst_special_case(self):
        rng = random.Random(14)
        for _ in range(30):
            n = rng.randint(2, 8)
            g, _ = gen_random("connected", n, min(14, n * (n - 1) // 2), 8, "IC", rng.getrandbits(32)).materialize()
            opt, _ = brute_force_opt(g, SfIc((0,) * n))
            assert opt == g.cost_of(minimum_spanning_forest(g))

    def test_shortest_path_special_case(self):
        rng = random.Random(15)
        for _ in range(30):
            n = rng.randint(3, 10)
            g, _ = gen_random("connected", n, min(15, 2 * n, n * (n - 1) // 2), 8, "IC", rng.getrandbits(32)).materialize()
            s, t = rng.sample(range(n), 2)
            opt, _ = brute_force_opt(g, Ppc(frozenset({s}), frozenset({t})))
            assert opt == dijkstra(g, [s])[t]

    def test_size_error(self):
        g, spec = gen_random("connected", 14, 30, 5, "IC", 1).materialize()
        with pytest.raises(SizeError):
            brute_force_opt(g, spec)


class TestFeasibility:
    def test_empty_forest(self):
        g, spec = path_instance()
        res = check_primal_feasible(g, spec, [])
        assert not res
        assert res.witness == {0}

    def test_spanning_tree_always_feasible(self):
        rng = random.Random(16)
        for i in range(30):
            g, spec = gen_random("connected", rng.randint(4, 10), None, 5, VARIANTS[i % 6], rng.getrandbits(32)).materialize()
            res = check_primal_feasible(g, spec, minimum_spanning_forest(g))
            assert res and res.exhaustive == (g.n <= 10)

    def test_cut_witness(self):
        g = WeightedGraph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
        res = check_primal_feasible(g, SfIc((0, 1, 1, 0)), [1])
        assert not res


class TestCertificate:
    def test_chain_on_path(self):
        g, spec = path_instance()
        forest, lb, _ = run_shell_decomposition(g, spec)
        cert = certify_run(g, spec, forest, lb, Q, Q, opt=brute_force_opt(g, spec))
        assert cert.ok and cert.cost == cert.opt == 3
        assert cert.terminals == 2
        assert cert.ratio == Fraction(5, 4) * Fraction(25, 16)

    def test_corrupted_lb(self):
        g, spec = path_instance()
        forest, _, _ = run_shell_decomposition(g, spec)
        with pytest.raises(CertificationError) as exc:
            certify_run(g, spec, forest, Fraction(4), Q, Q, opt=brute_force_opt(g, spec))
        assert exc.value.link == "LB<=OPT"
        cert = certify_run(g, spec, forest, Fraction(4), Q, Q, opt=brute_force_opt(g, spec), strict=False)
        assert cert.failed() == ["LB<=OPT"]

    def test_infeasible_reported_first(self):
        g, spec = path_instance()
        cert = certify_run(g, spec, [0], Fraction(0), Q, Q, strict=False)
        assert cert.failed()[0] == "feasible"

    def test_to_dict(self):
        g, spec = path_instance()
        forest, lb, _ = run_shell_decomposition(g, spec)
        d = certify_run(g, spec, forest, lb, Q, Q).to_dict()
        assert d["ok"] and d["cost"] == 3 and len(d["digest"]) == 16
