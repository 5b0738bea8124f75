import io

import pytest
from hypothesis import given, settings, strategies as st
from random import Random

from evopart.graph import (Graph, Clustering, GraphFormatError, Partition,
                           connected_components, compute_l_max, cut_edge_set,
                           cut_value, is_feasible, load_metis,
                           overlay_clustering, partition_distance,
                           quotient_graph, save_metis, write_partition)
from oracles import cycle_graph, path_graph, random_graph


class TestLoadMetis:
    def test_minimal_path(self):
        g = load_metis("4 3\n2\n1 3\n2 4\n3\n")
        g.validate()
        assert (g.n, g.m) == (4, 3)
        assert sorted(g.edges()) == [(0, 1, 1), (1, 2, 1), (2, 3, 1)]

    def test_edge_weight_format(self):
        g = load_metis("3 3 1\n2 5 3 1\n1 5 3 2\n1 1 2 2\n")
        assert sorted(g.edges()) == [(0, 1, 5), (0, 2, 1), (1, 2, 2)]

    def test_asymmetry_is_an_error(self):
        with pytest.raises(GraphFormatError, match="node 2"):
            load_metis("2 1\n2\n")

    def test_asymmetric_weight(self):
        with pytest.raises(GraphFormatError, match="weight"):
            load_metis("2 1 1\n2 5\n1 3\n")

    def test_self_loop(self):
        with pytest.raises(GraphFormatError, match="self-loop"):
            load_metis("2 2\n1 2\n1\n")

    def test_out_of_range(self):
        with pytest.raises(GraphFormatError, match="out of range"):
            load_metis("2 1\n3\n2\n")

    def test_non_positive_edge_weight(self):
        with pytest.raises(GraphFormatError, match="non-positive"):
            load_metis("2 1 1\n2 0\n1 0\n")

    def test_node_weights_and_zero_bump(self):
        g = load_metis("2 1 11\n0 2 7\n4 1 7\n")
        assert g.nwgt == [1, 4]      # zero weight normalized to one
        assert list(g.edges()) == [(0, 1, 7)]

    def test_comments_and_blank_lines(self):
        g = load_metis("% header comment\n4 3\n2\n\n% mid\n1 3\n2 4\n3\n")
        assert g.m == 3

    def test_edge_count_mismatch(self):
        with pytest.raises(GraphFormatError, match="declares"):
            load_metis("3 3\n2\n1 3\n2\n")

    def test_parallel_entries_merge(self):
        g = load_metis("2 1 1\n2 3 2 4\n1 3 1 4\n")
        assert list(g.edges()) == [(0, 1, 7)]

    def test_roundtrip_through_save(self):
        rng = Random(5)
        g = random_graph(12, 0.3, rng, max_edge_weight=4, max_node_weight=3)
        buf = io.StringIO()
        save_metis(g, buf)
        g2 = load_metis(buf.getvalue())
        assert list(g.edges()) == list(g2.edges())
        assert g.nwgt == g2.nwgt


class TestGraphInvariants:
    def test_degree_sum(self):
        g = random_graph(30, 0.2, Random(1))
        g.validate()
        assert sum(g.degree(v) for v in range(g.n)) == 2 * g.m

    def test_from_edges_merges_parallel(self):
        g = Graph.from_edges(3, [(0, 1, 2), (1, 0, 3), (1, 2, 1)])
        assert g.edge_weight(0, 1) == 5

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph.from_edges(2, [(1, 1, 1)])

    def test_subgraph(self):
        g = cycle_graph(6)
        sub, mapping = g.subgraph([0, 1, 2])
        assert sub.n == 3 and sub.m == 2
        assert mapping == [0, 1, 2]


class TestCutAndBalance:
    def test_c4_straight_split(self):
        g = cycle_graph(4)
        assert cut_value(g, Partition(g, 2, 0.0, [0, 0, 1, 1])) == 2

    def test_c4_alternating(self):
        g = cycle_graph(4)
        assert cut_value(g, Partition(g, 2, 0.0, [0, 1, 0, 1])) == 4

    def test_weighted_triangle_by_enumeration(self):
        # weights placed so that splitting off node 0 cuts 5 + 2 = 7
        g = Graph.from_edges(3, [(0, 1, 5), (0, 2, 2), (1, 2, 1)])
        p = Partition(g, 2, 1.0, [0, 1, 1])
        by_hand = sum(w for u, v, w in g.edges() if (u == 0) != (v == 0))
        assert cut_value(g, p) == by_hand == 7

    def test_incremental_matches_recompute(self):
        rng = Random(7)
        g = random_graph(40, 0.15, rng, max_edge_weight=5)
        p = Partition(g, 3, 0.1, [rng.randrange(3) for _ in range(g.n)])
        for _ in range(200):
            p.move(g, rng.randrange(g.n), rng.randrange(3))
        cut, weights = p.recompute(g)
        assert cut == p.cut
        assert weights == p.block_weights

    def test_feasibility_examples(self):
        g = path_graph(4)
        assert is_feasible(g, Partition(g, 2, 0.0, [0, 0, 1, 1]))
        assert not is_feasible(g, Partition(g, 2, 0.0, [0, 0, 0, 0]))
        g5 = path_graph(5)
        # L_max = 1.03 * 2.5 + 1 = 3.575, so a 3/2 split passes
        assert compute_l_max(g5, 2, 0.03) == pytest.approx(3.575)
        assert is_feasible(g5, Partition(g5, 2, 0.03, [0, 0, 0, 1, 1]))

    def test_tie_at_bound_is_feasible(self):
        g = path_graph(4)
        # L_max = 3.0 exactly; a 3/1 split sits right at the bound
        assert is_feasible(g, Partition(g, 2, 0.0, [0, 0, 0, 1]))


class TestCutEdgeSets:
    def test_path_middle_edge(self):
        g = path_graph(4)
        assert cut_edge_set(g, Partition(g, 2, 0.0, [0, 0, 1, 1])) == {(1, 2)}

    def test_single_block_empty(self):
        g = cycle_graph(5)
        assert cut_edge_set(g, Partition(g, 1, 0.0, [0] * 5)) == set()

    def test_alternating_cycle_cuts_everything(self):
        g = cycle_graph(4)
        cuts = cut_edge_set(g, Partition(g, 2, 0.0, [0, 1, 0, 1]))
        assert cuts == {(0, 1), (1, 2), (2, 3), (0, 3)}


class TestOverlayAndQuotient:
    def test_overlay_path_example(self):
        g = path_graph(4)
        a = Partition(g, 2, 0.0, [0, 0, 1, 1])
        b = Partition(g, 2, 0.5, [0, 1, 1, 1])
        ov = overlay_clustering(g, a, b)
        assert ov.k == 3
        assert ov.assignment[2] == ov.assignment[3]
        assert len({ov.assignment[0], ov.assignment[1], ov.assignment[2]}) == 3

    def test_overlay_with_itself(self):
        g = cycle_graph(6)
        a = Partition(g, 2, 0.1, [0, 0, 0, 1, 1, 1])
        ov = overlay_clustering(g, a, a)
        # blocks of a are connected here, so clusters equal blocks
        assert ov.k == 2

    def test_overlay_refines_both_inputs(self):
        rng = Random(3)
        for trial in range(25):
            g = random_graph(20, 0.2, rng)
            a = Partition(g, 3, 0.5, [rng.randrange(3) for _ in range(g.n)])
            b = Partition(g, 4, 0.5, [rng.randrange(4) for _ in range(g.n)])
            ov = overlay_clustering(g, a, b)
            seen = {}
            for v in range(g.n):
                key = ov.assignment[v]
                pair = (a.assignment[v], b.assignment[v])
                assert seen.setdefault(key, pair) == pair

    def test_quotient_on_path(self):
        g = path_graph(4)
        q = quotient_graph(g, Clustering([0, 0, 1, 1]))
        assert q.n == 2 and q.m == 1
        assert q.nwgt == [2, 2]
        assert list(q.edges()) == [(0, 1, 1)]

    def test_quotient_of_singletons_is_isomorphic_copy(self):
        g = random_graph(15, 0.3, Random(11), max_edge_weight=3)
        q = quotient_graph(g, Clustering(list(range(g.n))))
        assert list(q.edges()) == list(g.edges())

    def test_quotient_on_c4(self):
        g = cycle_graph(4)
        q = quotient_graph(g, Clustering([0, 0, 1, 1]))
        assert list(q.edges()) == [(0, 1, 2)]

    def test_quotient_conserves_totals(self):
        rng = Random(13)
        g = random_graph(25, 0.2, rng, max_edge_weight=4, max_node_weight=3)
        c = Clustering([rng.randrange(5) for _ in range(g.n)])
        q = quotient_graph(g, c)
        assert sum(q.nwgt) == g.total_node_weight
        crossing = sum(w for u, v, w in g.edges()
                       if c.assignment[u] != c.assignment[v])
        assert sum(w for _, _, w in q.edges()) == crossing


class TestComponentsAndDistance:
    def test_path_split(self):
        g = path_graph(4)
        cc = connected_components(g, {(1, 2)})
        assert cc.k == 2
        assert cc.assignment[0] == cc.assignment[1]

    def test_connected_whole(self):
        g = cycle_graph(7)
        assert connected_components(g, set()).k == 1

    def test_everything_excluded(self):
        g = cycle_graph(4)
        excluded = {e[:2] for e in g.edges()}
        assert connected_components(g, excluded).k == 4

    def test_distance_examples(self):
        assert partition_distance({(0, 1)}, {(0, 1)}) == 0
        assert partition_distance({(0, 1)}, {(1, 2)}) == 2
        assert partition_distance({(0, 1), (1, 2)}, {(1, 2), (2, 3)}) == 2

    @given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), max_size=12),
           st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), max_size=12),
           st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), max_size=12))
    @settings(max_examples=80, deadline=None)
    def test_distance_is_a_pseudometric(self, xs, ys, zs):
        a = {tuple(sorted(e)) for e in xs if e[0] != e[1]}
        b = {tuple(sorted(e)) for e in ys if e[0] != e[1]}
        c = {tuple(sorted(e)) for e in zs if e[0] != e[1]}
        assert partition_distance(a, a) == 0
        assert partition_distance(a, b) == partition_distance(b, a)
        assert (partition_distance(a, c)
                <= partition_distance(a, b) + partition_distance(b, c))


def test_write_partition_format(tmp_path):
    g = path_graph(3)
    p = Partition(g, 2, 0.5, [0, 1, 1])
    out = tmp_path / "p.part"
    with open(out, "w") as f:
        write_partition(p, f)
    assert out.read_text() == "0\n1\n1\n"
