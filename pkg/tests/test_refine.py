from random import Random

import pytest

from evopart.graph import Graph, Partition, cut_value, is_feasible
from evopart.refine import (FlowProblem, flow_pair_refine, fm_refine,
                            max_flow_min_cut, multitry_fm, refine_all_pairs)
from oracles import (brute_force_best_partition, brute_force_min_st_cut,
                     grid_graph, path_graph, random_feasible_partition,
                     random_graph)


class TestFmRefine:
    def test_p4_reaches_optimum(self):
        g = path_graph(4)
        p = Partition(g, 2, 0.0, [0, 1, 0, 1])
        assert p.cut == 3
        fm_refine(g, p, 0.0, Random(1))
        assert p.cut == 1

    def test_optimal_input_unchanged_cut(self):
        g = path_graph(4)
        p = Partition(g, 2, 0.0, [0, 0, 1, 1])
        fm_refine(g, p, 0.0, Random(2))
        assert p.cut == 1

    def test_two_nodes_cannot_empty_a_block(self):
        g = Graph.from_edges(2, [(0, 1, 1)])
        p = Partition(g, 2, 0.0, [0, 1])
        fm_refine(g, p, 0.0, Random(3))
        assert sorted(p.assignment) == [0, 1]
        assert p.cut == 1

    def test_never_worsens_feasible_inputs(self):
        rng = Random(11)
        for trial in range(120):
            g = random_graph(rng.randint(6, 28), 0.25, rng,
                             max_edge_weight=4)
            k = rng.choice([2, 3, 4])
            p = random_feasible_partition(g, k, 0.1, rng)
            before = p.cut
            assert p.is_feasible()
            fm_refine(g, p, 0.1, rng)
            assert p.cut <= before
            assert p.is_feasible()
            cut, weights = p.recompute(g)
            assert (cut, weights) == (p.cut, p.block_weights)

    def test_does_not_worsen_infeasible_inputs(self):
        rng = Random(13)
        g = random_graph(16, 0.3, rng)
        p = Partition(g, 4, 0.0, [0] * 13 + [1, 2, 3])
        over_before = p.overweight()
        fm_refine(g, p, 0.0, rng)
        assert p.overweight() <= over_before


class TestMultitry:
    def test_p4_case(self):
        g = path_graph(4)
        p = Partition(g, 2, 0.0, [0, 1, 0, 1])
        multitry_fm(g, p, 0.0, Random(5))
        assert p.cut == 1

    def test_single_block_untouched(self):
        g = grid_graph(3, 3)
        p = Partition(g, 1, 0.0, [0] * 9)
        multitry_fm(g, p, 0.0, Random(5))
        assert p.cut == 0 and p.assignment == [0] * 9

    def test_never_worsens(self):
        rng = Random(17)
        for trial in range(120):
            g = random_graph(rng.randint(6, 24), 0.3, rng)
            k = rng.choice([2, 3])
            p = random_feasible_partition(g, k, 0.15, rng)
            before = p.cut
            multitry_fm(g, p, 0.15, rng)
            assert p.cut <= before and p.is_feasible()


class TestMaxFlow:
    def test_single_edge(self):
        fp = FlowProblem(2, 0, 1)
        fp.add_arc(0, 1, 5)
        value, side = max_flow_min_cut(fp)
        assert value == 5 and side == {0}

    def test_two_disjoint_paths(self):
        fp = FlowProblem(4, 0, 3)
        fp.add_arc(0, 1, 3)
        fp.add_arc(1, 3, 3)
        fp.add_arc(0, 2, 4)
        fp.add_arc(2, 3, 4)
        value, _ = max_flow_min_cut(fp)
        assert value == 7

    def test_source_equals_sink_rejected(self):
        with pytest.raises(ValueError):
            FlowProblem(2, 1, 1)

    def test_random_networks_match_enumeration(self):
        rng = Random(23)
        for trial in range(150):
            n = rng.randint(3, 8)
            arcs = []
            for u in range(n):
                for v in range(n):
                    if u != v and rng.random() < 0.35:
                        arcs.append((u, v, rng.randint(1, 9)))
            fp = FlowProblem(n, 0, n - 1)
            for u, v, w in arcs:
                fp.add_arc(u, v, w)
            value, side = max_flow_min_cut(fp)
            assert value == brute_force_min_st_cut(n, arcs, 0, n - 1)
            assert 0 in side and n - 1 not in side

    def test_undirected_arcs(self):
        fp = FlowProblem(3, 0, 2)
        fp.add_undirected(0, 1, 2)
        fp.add_undirected(1, 2, 3)
        value, side = max_flow_min_cut(fp)
        assert value == 2 and side == {0}


class TestFlowPairRefine:
    def test_jagged_grid_cut_straightens(self):
        g = grid_graph(2, 4)
        # staircase cut of 3: {0, 1, 4} against the rest
        p = Partition(g, 2, 0.0, [0, 0, 1, 1, 0, 1, 1, 1])
        assert p.cut == 3
        improved = flow_pair_refine(g, p, 0, 1, 0.0, Random(1))
        assert improved
        assert p.cut == 2
        assert p.is_feasible()
        best, _ = brute_force_best_partition(g, 2, 0.0)
        assert p.cut == best

    def test_optimal_input_unchanged(self):
        g = grid_graph(2, 4)
        p = Partition(g, 2, 0.0, [0, 0, 1, 1, 0, 0, 1, 1])
        assert not flow_pair_refine(g, p, 0, 1, 0.0, Random(2))
        assert p.cut == 2

    def test_tight_balance_never_breaks_feasibility(self):
        rng = Random(29)
        for trial in range(60):
            g = random_graph(rng.randint(6, 20), 0.3, rng)
            p = random_feasible_partition(g, 2, 0.0, rng)
            before = p.cut
            flow_pair_refine(g, p, 0, 1, 0.0, rng)
            assert p.cut <= before and p.is_feasible()

    def test_nonadjacent_pair_is_a_noop(self):
        g = path_graph(6)
        p = Partition(g, 3, 0.0, [0, 0, 1, 1, 2, 2])
        assert not flow_pair_refine(g, p, 0, 2, 0.0, Random(3))


class TestRefineAllPairs:
    def test_k2_equals_single_pair(self):
        g = grid_graph(2, 4)
        p = Partition(g, 2, 0.0, [0, 0, 1, 1, 0, 1, 1, 1])
        q = Partition(g, 2, 0.0, list(p.assignment))
        refine_all_pairs(g, p, 0.0, Random(4))
        flow_pair_refine(g, q, 0, 1, 0.0, Random(4))
        assert p.cut == q.cut == 2

    def test_second_sweep_is_a_fixpoint(self):
        rng = Random(31)
        g = random_graph(24, 0.2, rng)
        p = random_feasible_partition(g, 3, 0.1, rng)
        refine_all_pairs(g, p, 0.1, rng)
        mid = p.cut
        refine_all_pairs(g, p, 0.1, rng)
        assert p.cut == mid

    def test_never_worsens(self):
        rng = Random(37)
        for trial in range(60):
            g = random_graph(rng.randint(8, 24), 0.25, rng,
                             max_edge_weight=3)
            k = rng.choice([2, 3, 4])
            p = random_feasible_partition(g, k, 0.2, rng)
            before = p.cut
            refine_all_pairs(g, p, 0.2, rng)
            assert p.cut <= before and p.is_feasible()
            cut, weights = p.recompute(g)
            assert (cut, weights) == (p.cut, p.block_weights)


def test_bisection_optimum_hit_rate_on_small_graphs():
    """fm from random feasible starts reaches the brute-force optimum in
    at least half of the restarts on tiny instances."""
    rng = Random(41)
    hits = trials = 0
    for _ in range(10):
        g = random_graph(rng.randint(6, 10), 0.35, rng)
        best, _ = brute_force_best_partition(g, 2, 0.0)
        for restart in range(10):
            p = random_feasible_partition(g, 2, 0.0, rng)
            fm_refine(g, p, 0.0, rng)
            trials += 1
            if p.cut == best:
                hits += 1
    assert hits >= trials // 2
