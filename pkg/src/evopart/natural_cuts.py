"""Natural-cut discovery and the clusterings built from it.

A discovery round grows a BFS tree around a random center, contracts the
tree's core against the surrounding ring and records the minimum cut
between them as an elementary natural cut (ENC).  Rounds repeat until
every node has been inside some core.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from random import Random

from .graph import Graph, Clustering, canon_edge, connected_components, quotient_graph
from .refine import FlowProblem, max_flow_min_cut

log = logging.getLogger(__name__)

STAGE_ONE_CALL_LIMIT = 10


@dataclass(frozen=True)
class ENC:
    """An elementary natural cut: the cut edges and the core they enclose."""
    cut_edges: frozenset[tuple[int, int]]
    core: frozenset[int]


class EncIndex:
    """Per-node lists of the ENCs whose core contains the node."""

    def __init__(self, n: int):
        self.by_node: list[list[ENC]] = [[] for _ in range(n)]
        self.count = 0

    def add(self, enc: ENC) -> None:
        for v in enc.core:
            self.by_node[v].append(enc)
        self.count += 1

    def extend(self, encs) -> None:
        for enc in encs:
            self.add(enc)

    def __len__(self) -> int:
        return self.count


@dataclass
class NaturalCutState:
    """Per-worker bookkeeping for the natural-cut combine operator."""
    index: EncIndex
    calls: int = 0

    @classmethod
    def for_graph(cls, graph: Graph) -> "NaturalCutState":
        return cls(index=EncIndex(graph.n))


def _one_round(graph: Graph, center: int, tree_budget: float,
               core_budget: float) -> tuple[list[int], list[int], set[int]]:
    """BFS tree, core prefix and ring of one discovery round."""
    order: list[int] = []
    in_tree = set()
    seen = {center}
    q = deque([center])
    weight = 0
    while q and weight < tree_budget:
        v = q.popleft()
        order.append(v)
        in_tree.add(v)
        weight += graph.nwgt[v]
        if weight >= tree_budget:
            break
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            u = graph.adj[i]
            if u not in seen:
                seen.add(u)
                q.append(u)
    core: list[int] = []
    prefix = 0
    for v in order:
        if prefix >= core_budget:
            break
        core.append(v)          # added while the tree was still small
        prefix += graph.nwgt[v]
    ring = set()
    for v in in_tree:
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            u = graph.adj[i]
            if u not in in_tree:
                ring.add(u)
    return order, core, ring


def discover_natural_cuts(graph: Graph, U: float, alpha: float, f_nc: float,
                          rng: Random) -> tuple[list[ENC], set[tuple[int, int]]]:
    """Run discovery rounds until every node has been in some core.

    Returns the recorded ENCs and the union of all their cut edges.
    Rounds whose ring is empty (the tree swallowed its component) record
    nothing but still mark their core as covered.
    """
    if U <= 0 or alpha <= 0:
        raise ValueError("U and alpha must be positive")
    if f_nc <= 1:
        raise ValueError("f must be > 1")
    n = graph.n
    covered = [False] * n
    candidates = list(range(n))
    encs: list[ENC] = []
    union: set[tuple[int, int]] = set()
    while candidates:
        i = rng.randrange(len(candidates))
        center = candidates[i]
        candidates[i] = candidates[-1]
        candidates.pop()
        if covered[center]:
            continue
        order, core, ring = _one_round(graph, center, alpha * U,
                                       alpha * U / f_nc)
        for v in core:
            covered[v] = True
        if not ring:
            continue
        enc = _min_cut_enc(graph, set(order), set(core), ring)
        encs.append(enc)
        union |= enc.cut_edges
    return encs, union


def _min_cut_enc(graph: Graph, tree: set[int], core: set[int],
                 ring: set[int]) -> ENC:
    """Min cut between the contracted core and the contracted ring."""
    middle = sorted(tree - core)
    ids = {v: i + 2 for i, v in enumerate(middle)}
    s, t = 0, 1
    fp = FlowProblem(len(middle) + 2, s, t, [None, None] + middle)
    to_s: dict[int, int] = {}
    to_t: dict[int, int] = {}
    direct = 0
    for v in middle:
        pv = ids[v]
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            u = graph.adj[i]
            w = graph.ewgt[i]
            if u in core:
                to_s[pv] = to_s.get(pv, 0) + w
            elif u in ring:
                to_t[pv] = to_t.get(pv, 0) + w
            elif u in ids:
                if v < u:
                    fp.add_undirected(pv, ids[u], w)
    for v in core:
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            if graph.adj[i] in ring:
                direct += graph.ewgt[i]
    for pv, w in to_s.items():
        fp.add_undirected(s, pv, w)
    for pv, w in to_t.items():
        fp.add_undirected(pv, t, w)
    if direct:
        fp.add_undirected(s, t, direct)
    value, source_side = max_flow_min_cut(fp)

    def side(v: int) -> bool:
        # True when v ends up on the core's side of the cut.
        if v in core:
            return True
        pv = ids.get(v)
        if pv is not None:
            return pv in source_side
        return False

    cut_edges = set()
    cut_weight = 0
    for v in tree:
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            u = graph.adj[i]
            if u not in tree and u not in ring:
                continue
            if side(v) and not side(u):
                cut_edges.add(canon_edge(v, u))
                cut_weight += graph.ewgt[i]
    assert cut_weight == value, "ENC cut weight differs from its max-flow value"
    return ENC(frozenset(cut_edges), frozenset(core))


def stage1_clustering(graph: Graph, k: int, rng: Random,
                      index: EncIndex | None = None) -> Clustering:
    """Sampled-parameter discovery pass; clusters are the components
    left after removing all discovered cut edges.

    Newly found ENCs are appended to `index` when one is given.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    f_nc = rng.uniform(5.0, 20.0)
    alpha = rng.uniform(0.75, 1.25)
    U = graph.n / (3.0 * k)
    encs, union = discover_natural_cuts(graph, U, alpha, f_nc, rng)
    if index is not None:
        index.extend(encs)
    return connected_components(graph, union)


def stage2_clustering(index: EncIndex, graph: Graph, rng: Random) -> Clustering:
    """Recombine stored ENCs into a fresh clustering.

    Nodes are visited in random order; each unmarked node emits one
    random ENC from its list and marks that core.  Nodes with an empty
    list (cannot happen after a full discovery pass) become singleton
    cores with no cut edges.
    """
    n = graph.n
    marked = [False] * n
    union: set[tuple[int, int]] = set()
    order = list(range(n))
    rng.shuffle(order)
    for v in order:
        if marked[v]:
            continue
        options = index.by_node[v]
        if not options:
            marked[v] = True
            continue
        enc = options[rng.randrange(len(options))]
        union |= enc.cut_edges
        for u in enc.core:
            marked[u] = True
    return connected_components(graph, union)


def preprocess_contract(graph: Graph,
                        cut_union: set[tuple[int, int]]) -> tuple[Graph, list[int]]:
    """Contract every component of the graph minus the cut edges.

    Returns the contracted graph and the node-to-component map; a
    partition of the contracted graph lifts to one of `graph` with the
    same cut.
    """
    clustering = connected_components(graph, cut_union)
    if clustering.k == 1:
        log.warning("natural-cut preprocessing found no separating cuts; "
                    "contraction yields a single node")
    coarse = quotient_graph(graph, clustering)
    return coarse, clustering.assignment
