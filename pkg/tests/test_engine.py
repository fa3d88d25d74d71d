import random
from fractions import Fraction

import pytest

from conftest import random_graph
from shellforest.engine import (
    PhaseTrace,
    candidate_merges,
    edge_cost_reduction,
    initial_state,
    phase_bound,
    prune_and_advance,
    ratio_constant,
    replay,
    root_path_selection,
    run_gw_reference,
    run_shell_decomposition,
    select_merge_forest,
)
from shellforest.errors import InvalidInputError
from shellforest.graph import SsspForest, WeightedGraph
from shellforest.instances import gen_lower_bound, gen_random, heavy_edges
from shellforest.oracle import brute_force_opt, certify_run, check_primal_feasible
from shellforest.problems import VARIANTS, SfIc

Q = Fraction(1, 4)


def path_instance():
    return WeightedGraph(3, [(0, 1, 1), (1, 2, 2)]), SfIc((0, None, 0))


def manual_forest(radius, nodes):
    """nodes: v -> (dist, root, parent, parent_edge)"""
    f = SsspForest(radius=Fraction(radius))
    for v, (d, root, par, pe) in nodes.items():
        f.dist[v], f.root[v], f.parent[v], f.parent_edge[v] = Fraction(d), root, par, pe
        f.hops[v] = 0
    return f


class TestConstants:
    def test_ratio(self):
        assert ratio_constant(5, Q, Q) == Fraction(8, 5) * Fraction(5, 4) * Fraction(25, 16)
        assert ratio_constant(2, Q, Q) == Fraction(5, 4) * Fraction(25, 16)
        assert ratio_constant(1, Q, Q) == 2 * Fraction(5, 4) * Fraction(25, 16)

    def test_phase_bound_is_ceil_log_plus_one(self):
        for n, c in [(3, 2), (10, 8), (200, 8)]:
            x = 4 * Fraction(5, 4) * n * c / Q
            k = phase_bound(n, c, Q, Q) - 1
            assert Fraction(5, 4) ** k >= x > Fraction(5, 4) ** (k - 1)

    def test_eps_range(self):
        g, spec = path_instance()
        with pytest.raises(InvalidInputError):
            run_shell_decomposition(g, spec, Fraction(1, 2), Q)
        with pytest.raises(InvalidInputError):
            run_shell_decomposition(g, spec, Q, Fraction(0))


class TestSteps:
    def test_ecr_one_side(self):
        g = WeightedGraph(2, [(0, 1, 10)])
        st = initial_state(g, SfIc((0, 0)), Q, Q)
        assert edge_cost_reduction(st, manual_forest(3, {0: (1, 0, None, None)}), Fraction(3)) == {0: 8}

    def test_ecr_floor(self):
        g = WeightedGraph(2, [(0, 1, 5)])
        st = initial_state(g, SfIc((0, 0)), Q, Q)
        sp = manual_forest(3, {0: (0, 0, None, None), 1: (0, 1, None, None)})
        assert edge_cost_reduction(st, sp, Fraction(3)) == {0: 0}

    def test_ecr_unreached(self):
        g = WeightedGraph(3, [(0, 1, 1), (1, 2, 7)])
        st = initial_state(g, SfIc((0, None, 0)), Q, Q)
        out = edge_cost_reduction(st, manual_forest(1, {0: (0, 0, None, None)}), Fraction(1))
        assert out[1] == 7

    def triangle_state(self):
        g = WeightedGraph(3, [(0, 1, 1), (1, 2, 1), (0, 2, 1)])
        st = initial_state(g, SfIc((0, 0, 0)), Q, Q)
        st.reduced = {0: Fraction(0), 1: Fraction(0), 2: Fraction(0)}
        sp = manual_forest(1, {v: (0, v, None, None) for v in range(3)})
        return st, sp

    def test_merges_triangle(self):
        st, sp = self.triangle_state()
        m = candidate_merges(st, sp)
        assert m == {0, 1, 2}
        assert select_merge_forest(st, sp, m) == {0, 1}
        assert select_merge_forest(st, sp, set()) == set()

    def test_merge_needs_two_trees_and_ball(self):
        g = WeightedGraph(3, [(0, 1, 1), (1, 2, 1)])
        st = initial_state(g, SfIc((0, 0, 0)), Q, Q)
        st.reduced = {0: Fraction(0), 1: Fraction(0)}
        sp = manual_forest(1, {0: (0, 0, None, None), 1: (0, 0, 0, 0)})
        assert candidate_merges(st, sp) == set()

    def test_rps_paths(self):
        # 0 - 1 - 2 rooted at 0, and 3 a root; merge edge 3 joins 2 and 3
        g = WeightedGraph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 9)])
        st = initial_state(g, SfIc((0, None, None, 0)), Q, Q)
        sp = manual_forest(5, {0: (0, 0, None, None), 1: (1, 0, 0, 0), 2: (2, 0, 1, 1), 3: (0, 3, None, None)})
        assert root_path_selection(st, sp, {2}) == {0, 1, 2}
        assert root_path_selection(st, sp, {3}) == {3}

    def test_rps_shared_prefix(self):
        g = WeightedGraph(5, [(0, 1, 1), (1, 2, 1), (1, 3, 1), (2, 4, 1), (3, 4, 1)])
        st = initial_state(g, SfIc((0, None, None, None, 0)), Q, Q)
        sp = manual_forest(9, {0: (0, 0, None, None), 1: (1, 0, 0, 0), 2: (2, 0, 1, 1),
                               3: (2, 0, 1, 2), 4: (0, 4, None, None)})
        added = root_path_selection(st, sp, {3, 4})
        assert added == {0, 1, 2, 3, 4}
        assert len(added) == len(set(sp.path_to_root(2)) | set(sp.path_to_root(3)) | {3, 4})

    def test_lb_increment(self):
        g = WeightedGraph(3, [(0, 1, 5), (1, 2, 5)])
        st = initial_state(g, SfIc((0, None, 0)), Q, Q)
        st.r = Fraction(1, 2)
        _, inc = prune_and_advance(st, manual_forest(0, {}), set())
        assert st.active_terminals == [0, 2]
        assert inc == Fraction(4, 5)

    def test_pruned_edges_leave_live_set(self):
        rng = random.Random(5)
        for _ in range(20):
            inst = gen_random("connected", 9, 14, 6, "IC", rng.getrandbits(32))
            g, spec = inst.materialize()
            _, _, rep = run_shell_decomposition(g, spec)
            gone = set()
            for tr in rep.traces:
                assert not gone & set(tr.added)
                gone |= set(tr.pruned)


class TestRun:
    def test_path(self):
        g, spec = path_instance()
        forest, lb, rep = run_shell_decomposition(g, spec)
        assert forest == {0, 1} and rep.cost == 3
        assert lb >= Fraction(3) / (2 * Fraction(5, 4) * Fraction(25, 16))
        assert rep.certified
        certify_run(g, spec, forest, lb, Q, Q, opt=brute_force_opt(g, spec))

    def test_no_terminals(self):
        g = WeightedGraph(3, [(0, 1, 1), (1, 2, 2)])
        forest, lb, rep = run_shell_decomposition(g, SfIc((None, None, None)))
        assert forest == frozenset() and lb == 0 and rep.phases == 0

    def test_lower_bound_equal(self):
        inst = gen_lower_bound(8, 3, [0, 2, 4, 6], [0, 2, 4, 6])
        g, spec = inst.materialize()
        forest, _, rep = run_shell_decomposition(g, spec)
        assert rep.cost == 18
        assert not forest & heavy_edges(inst)

    def test_deterministic(self):
        inst = gen_random("connected", 10, 16, 8, "SCR", 77)
        g, spec = inst.materialize()
        a = run_shell_decomposition(g, spec)
        b = run_shell_decomposition(g, spec)
        assert a[0] == b[0] and a[1] == b[1]
        assert [t.to_json() for t in a[2].traces] == [t.to_json() for t in b[2].traces]

    def test_trace_round_trip_and_replay(self):
        rng = random.Random(6)
        for variant in VARIANTS:
            inst = gen_random("connected", 10, 15, 8, variant, rng.getrandbits(32))
            g, spec = inst.materialize()
            _, lb, rep = run_shell_decomposition(g, spec)
            traces = [PhaseTrace.from_json(t.to_json()) for t in rep.traces]
            assert traces == rep.traces
            st = replay(initial_state(g, spec, Q, Q), traces)
            assert st.forest == set(rep.forest) and st.lb == lb and not st.active_terminals

    def test_rounded_sssp_mode(self):
        rng = random.Random(7)
        for i in range(30):
            inst = gen_random("connected", 9, 14, 8, VARIANTS[i % 6], rng.getrandbits(32))
            g, spec = inst.materialize()
            forest, lb, rep = run_shell_decomposition(g, spec, alpha=1 + Q)
            assert check_primal_feasible(g, spec, forest)
            assert rep.phases <= rep.phase_bound

    def test_random_certified(self):
        rng = random.Random(8)
        for i in range(60):
            n = rng.randint(4, 20)
            inst = gen_random("connected", n, rng.randint(n - 1, min(2 * n, n * (n - 1) // 2)), 8, VARIANTS[i % 6], rng.getrandbits(32))
            g, spec = inst.materialize()
            forest, lb, rep = run_shell_decomposition(g, spec)
            assert rep.certified
            assert check_primal_feasible(g, spec, forest)


class TestGwReference:
    def test_star(self):
        g = WeightedGraph(4, [(0, 1, 1), (0, 2, 1), (0, 3, 5)])
        forest, lb = run_gw_reference(g, SfIc((None, 0, 0, None)))
        assert forest == {0, 1}
        assert lb <= 2

    def test_two_approx_on_random(self):
        rng = random.Random(9)
        for i in range(40):
            n = rng.randint(4, 9)
            inst = gen_random("connected", n, min(14, rng.randint(n - 1, min(2 * n, n * (n - 1) // 2))), 8, VARIANTS[i % 5], rng.getrandbits(32))
            g, spec = inst.materialize()
            forest, lb = run_gw_reference(g, spec)
            opt, _ = brute_force_opt(g, spec)
            assert check_primal_feasible(g, spec, forest)
            assert lb <= opt <= g.cost_of(forest) <= 2 * lb

    def test_random_graph_helper(self):
        g = random_graph(random.Random(2), 6, 9)
        forest, lb = run_gw_reference(g, SfIc((0, None, None, None, None, 0)))
        assert g.cost_of(forest) <= 2 * lb
