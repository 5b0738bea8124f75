"""Initial partitioning of the coarsest graph: BFS region growing plus
recursive bisection with repeated tries."""

from __future__ import annotations

import math
from collections import deque
from random import Random

from .graph import Graph, Partition, compute_l_max
from .refine import fm_refine


def _grow_assignment(graph: Graph, target: int, rng: Random) -> list[int]:
    """Grow block 0 by BFS from random seeds until its weight reaches
    `target`; handles disconnected graphs by reseeding."""
    assignment = [1] * graph.n
    if graph.n == 0:
        return assignment
    weight = 0
    unvisited = set(range(graph.n))
    queue: deque[int] = deque()
    while weight < target and (unvisited or queue):
        if not queue:
            seed = rng.choice(tuple(unvisited))
            unvisited.discard(seed)
            queue.append(seed)
        v = queue.popleft()
        assignment[v] = 0
        weight += graph.nwgt[v]
        if weight >= target:
            break
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            u = graph.adj[i]
            if u in unvisited:
                unvisited.discard(u)
                queue.append(u)
    return assignment


def greedy_bisect(graph: Graph, eps: float, rng: Random,
                  l_max: float | None = None) -> Partition:
    """Bipartition by BFS region growing to half the total weight,
    polished with one FM pass.  Best effort: the result is feasible
    whenever region growing plus FM can reach it."""
    target = (graph.total_node_weight + 1) // 2
    assignment = _grow_assignment(graph, target, rng)
    p = Partition(graph, 2, eps, assignment, l_max=l_max)
    fm_refine(graph, p, eps, rng, l_max=l_max)
    return p


def _bisect_split(graph: Graph, k1: int, k2: int, eps_level: float,
                  rng: Random) -> list[int]:
    """Split `graph` into two sides weighted k1:k2; returns side ids."""
    total = graph.total_node_weight
    target1 = total * k1 / (k1 + k2)
    assignment = _grow_assignment(graph, int(math.ceil(target1)), rng)
    bounds = [target1 * (1.0 + eps_level) + graph.max_node_weight,
              (total - target1) * (1.0 + eps_level) + graph.max_node_weight]
    p = Partition(graph, 2, eps_level, assignment, l_max=max(bounds))
    fm_refine(graph, p, eps_level, rng, l_max=bounds, max_rounds=4)
    return p.assignment


def initial_partition(graph: Graph, k: int, eps: float, tries: int,
                      rng: Random, l_max: float | None = None) -> Partition:
    """Recursive bisection, `tries` times; best feasible cut wins.

    For non-power-of-two k the split targets follow the block counts.
    The per-level imbalance allowance is inflated so the composed k-way
    result can still meet the global bound.  If no try is feasible the
    least-infeasible partition is returned and left flagged as such
    (callers inspect `is_feasible`); refinement may repair it later.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if tries < 1:
        raise ValueError("tries must be >= 1")
    if l_max is None:
        l_max = compute_l_max(graph, k, eps)
    if k == 1:
        return Partition(graph, 1, eps, [0] * graph.n, l_max=l_max)

    levels = max(1, math.ceil(math.log2(k)))
    eps_level = (1.0 + eps) ** (1.0 / levels) - 1.0

    def recurse(sub: Graph, orig_ids: list[int], sub_k: int,
                first_block: int, out: list[int]) -> None:
        if sub_k == 1:
            for v in orig_ids:
                out[v] = first_block
            return
        k1 = (sub_k + 1) // 2
        k2 = sub_k - k1
        sides = _bisect_split(sub, k1, k2, eps_level, rng)
        left = [i for i in range(sub.n) if sides[i] == 0]
        right = [i for i in range(sub.n) if sides[i] == 1]
        if not left or not right:
            # Degenerate bisection (tiny or disconnected piece): round-robin.
            order = list(range(sub.n))
            rng.shuffle(order)
            half = (sub.n * k1) // sub_k
            left, right = order[:half], order[half:]
        sub_left, map_left = sub.subgraph(left)
        recurse(sub_left, [orig_ids[map_left[i]] for i in range(len(left))],
                k1, first_block, out)
        sub_right, map_right = sub.subgraph(right)
        recurse(sub_right, [orig_ids[map_right[i]] for i in range(len(right))],
                k2, first_block + k1, out)

    best: Partition | None = None
    for _ in range(tries):
        out = [0] * graph.n
        recurse(graph, list(range(graph.n)), k, 0, out)
        p = Partition(graph, k, eps, out, l_max=l_max)
        if best is None:
            best = p
            continue
        cand = (p.overweight(), p.cut)
        cur = (best.overweight(), best.cut)
        if cand < cur:
            best = p
    assert best is not None
    return best
