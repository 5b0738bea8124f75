"""Edge rating, GPA matching, contraction and multilevel hierarchies."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from random import Random
from typing import Sequence

from .graph import Graph, Partition, canon_edge

# Shift width for the exact integer embedding of edge ratings. Two distinct
# ratings p1/q1 != p2/q2 satisfy |p1/q1 - p2/q2| >= 1/(q1*q2); with
# q <= 2**64 (node weights below 2**32) a shift of 128 bits guarantees
# distinct ratings get distinct keys, so comparisons never round.
_RATING_SHIFT = 128


def rate_edge(graph: Graph, u: int, v: int, weight: int | None = None) -> Fraction:
    """Contraction rating of an edge: weight(e)^2 / (c(u) * c(v))."""
    cu, cv = graph.nwgt[u], graph.nwgt[v]
    if cu == 0 or cv == 0:
        raise ValueError(f"rating undefined for zero-weight node on edge ({u},{v})")
    if weight is None:
        weight = graph.edge_weight(u, v)
        if weight is None:
            raise ValueError(f"({u},{v}) is not an edge")
    return Fraction(weight * weight, cu * cv)


def _rating_key(weight: int, cu: int, cv: int) -> int:
    if cu == 0 or cv == 0:
        raise ValueError("rating undefined for zero-weight node")
    return (weight * weight << _RATING_SHIFT) // (cu * cv)


class Matching:
    """A set of node-disjoint edges with a partner lookup."""

    __slots__ = ("pairs", "partner")

    def __init__(self, n: int, pairs: Sequence[tuple[int, int]]):
        self.pairs = [canon_edge(u, v) for u, v in pairs]
        self.partner = [-1] * n
        for u, v in self.pairs:
            if self.partner[u] != -1 or self.partner[v] != -1:
                raise ValueError("edges share a node")
            self.partner[u] = v
            self.partner[v] = u

    def __len__(self) -> int:
        return len(self.pairs)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self.pairs)


def _path_dp(keys: list[int]) -> tuple[int, list[int]]:
    """Max-weight matching on a path; single forward DP with back-pointers."""
    length = len(keys)
    best = [0] * (length + 1)
    took = [False] * (length + 1)
    for i in range(1, length + 1):
        take = best[i - 2] + keys[i - 1] if i >= 2 else keys[i - 1]
        skip = best[i - 1]
        if take > skip:
            best[i] = take
            took[i] = True
        else:
            best[i] = skip
    picks = []
    i = length
    while i > 0:
        if took[i]:
            picks.append(i - 1)
            i -= 2
        else:
            i -= 1
    picks.reverse()
    return best[length], picks


def _cycle_matching(keys: list[int]) -> tuple[int, list[int]]:
    """Max-weight matching on an even cycle of edges keys[0..L-1].

    Either edge 0 is unused (path DP over edges 1..L-1) or edge 0 is used
    (drop its neighbors 1 and L-1, path DP over the middle).
    """
    length = len(keys)
    without, picks_without = _path_dp(keys[1:])
    picks_without = [i + 1 for i in picks_without]
    middle, picks_middle = _path_dp(keys[2:length - 1])
    with0 = keys[0] + middle
    picks_with = [0] + [i + 2 for i in picks_middle]
    if with0 > without:
        return with0, picks_with
    return without, picks_without


def gpa_matching(graph: Graph, blocked: set[tuple[int, int]],
                 rng: Random) -> Matching:
    """Global Path Algorithm matching that avoids blocked edges.

    Non-blocked edges are scanned in order of decreasing rating (ties in
    random order); an edge joins the growing collection of paths and even
    cycles only if both endpoints have degree <= 1 there and it does not
    close an odd cycle.  Each path and cycle is then solved optimally by
    dynamic programming over the exact integer rating keys.
    """
    n = graph.n
    candidates = []
    nwgt = graph.nwgt
    for u, v, w in graph.edges():
        if (u, v) in blocked:
            continue
        candidates.append((_rating_key(w, nwgt[u], nwgt[v]), u, v))
    rng.shuffle(candidates)
    candidates.sort(key=lambda item: item[0], reverse=True)

    deg = [0] * n
    coll_adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]  # (nbr, key)
    parent = list(range(n))
    comp_nodes = [1] * n

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    is_cycle = [False] * n  # indexed by component root
    for key, u, v in candidates:
        if deg[u] > 1 or deg[v] > 1:
            continue
        ru, rv = find(u), find(v)
        if ru == rv:
            if is_cycle[ru] or comp_nodes[ru] % 2 != 0:
                continue  # odd cycle, rejected
            is_cycle[ru] = True
        else:
            if comp_nodes[ru] < comp_nodes[rv]:
                ru, rv = rv, ru
            parent[rv] = ru
            comp_nodes[ru] += comp_nodes[rv]
        deg[u] += 1
        deg[v] += 1
        coll_adj[u].append((v, key))
        coll_adj[v].append((u, key))

    visited = [False] * n
    pairs: list[tuple[int, int]] = []

    def walk(start: int) -> list[tuple[int, int, int]]:
        chain = []
        prev, cur = -1, start
        visited[cur] = True
        while True:
            nxt = None
            for nbr, key in coll_adj[cur]:
                if nbr == prev or (visited[nbr] and nbr != start):
                    continue
                nxt = (nbr, key)
                break
            if nxt is None:
                break
            nbr, key = nxt
            chain.append((cur, nbr, key))
            if nbr == start:
                break  # closed the cycle
            visited[nbr] = True
            prev, cur = cur, nbr
        return chain

    # Paths first: start from endpoints (degree one in the collection).
    for s in range(n):
        if deg[s] == 1 and not visited[s]:
            chain = walk(s)
            _, picks = _path_dp([key for _, _, key in chain])
            for i in picks:
                pairs.append((chain[i][0], chain[i][1]))
    # Remaining unvisited degree-2 nodes lie on cycles.
    for s in range(n):
        if deg[s] == 2 and not visited[s]:
            chain = walk(s)
            _, picks = _cycle_matching([key for _, _, key in chain])
            for i in picks:
                pairs.append((chain[i][0], chain[i][1]))
    return Matching(n, pairs)


def contract(graph: Graph, matching: Matching) -> tuple[Graph, list[int]]:
    """Contract matched pairs; returns (coarse graph, fine-to-coarse map)."""
    n = graph.n
    cmap = [-1] * n
    next_id = 0
    for v in range(n):
        if cmap[v] != -1:
            continue
        p = matching.partner[v]
        cmap[v] = next_id
        if p != -1:
            cmap[p] = next_id
        next_id += 1
    weights = [0] * next_id
    for v in range(n):
        weights[cmap[v]] += graph.nwgt[v]
    edges: dict[tuple[int, int], int] = {}
    for u, v, w in graph.edges():
        cu, cv = cmap[u], cmap[v]
        if cu == cv:
            continue
        key = canon_edge(cu, cv)
        edges[key] = edges.get(key, 0) + w
    return Graph(next_id, weights, edges), cmap


class StopRule(enum.Enum):
    """When to stop coarsening."""
    SIZE_THRESHOLD = "size"          # standard multilevel stop
    NO_CONTRACTABLE_EDGE = "exhaust"  # combine mode: collapse fully


@dataclass
class Level:
    graph: Graph            # the finer graph of this level
    matching: Matching
    cmap: list[int]         # fine node -> coarse node


class Hierarchy:
    """Stack of contraction levels supporting partition projection."""

    def __init__(self, graph: Graph, blocked: set[tuple[int, int]]):
        self.levels: list[Level] = []
        self.graphs: list[Graph] = [graph]
        self.blocked = blocked

    @property
    def coarsest(self) -> Graph:
        return self.graphs[-1]

    def __len__(self) -> int:
        return len(self.levels)

    def map_to_coarsest(self) -> list[int]:
        """Composed map taking finest nodes to coarsest nodes."""
        mapping = list(range(self.graphs[0].n))
        for level in self.levels:
            mapping = [level.cmap[c] for c in mapping]
        return mapping

    def project_partition(self, level: int, part: Partition) -> Partition:
        """Project a partition of graphs[level + 1] onto graphs[level].

        Cut and block weights carry over exactly.
        """
        if not (0 <= level < len(self.levels)):
            raise IndexError(f"level {level} out of range")
        cmap = self.levels[level].cmap
        fine = Partition.__new__(Partition)
        fine.k = part.k
        fine.eps = part.eps
        fine.assignment = [part.assignment[c] for c in cmap]
        fine.cut = part.cut
        fine.block_weights = list(part.block_weights)
        fine.l_max = part.l_max
        return fine


def size_threshold(n: int, k: int) -> float:
    """Coarsening floor: max(60k, n / (60k))."""
    return max(60.0 * k, n / (60.0 * k))


def build_hierarchy(graph: Graph, k: int, blocked: set[tuple[int, int]],
                    stop: StopRule, rng: Random,
                    min_match_fraction: float = 0.01) -> Hierarchy:
    """Repeated GPA matching + contraction until the stop rule fires.

    Blocked edges are never matched and survive (merged conservatively
    with parallel edges) on every level.  Under NO_CONTRACTABLE_EDGE the
    coarsest graph is the quotient over the components left by the
    blocked edges, so the stagnation guard only applies to the standard
    size-threshold mode.
    """
    h = Hierarchy(graph, set(blocked))
    threshold = size_threshold(graph.n, k)
    current = graph
    cur_blocked = set(blocked)
    while True:
        if stop is StopRule.SIZE_THRESHOLD and current.n < threshold:
            break
        matching = gpa_matching(current, cur_blocked, rng)
        if len(matching) == 0:
            break
        if (stop is StopRule.SIZE_THRESHOLD
                and 2 * len(matching) < min_match_fraction * current.n):
            break
        coarse, cmap = contract(current, matching)
        h.levels.append(Level(current, matching, cmap))
        h.graphs.append(coarse)
        nxt = set()
        for u, v in cur_blocked:
            cu, cv = cmap[u], cmap[v]
            if cu != cv:
                nxt.add(canon_edge(cu, cv))
        cur_blocked = nxt
        current = coarse
    return h
