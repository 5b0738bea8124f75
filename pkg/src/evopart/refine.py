"""Local search refinement: k-way FM, localized multi-try FM and
flow-based pair improvement.

Every routine here guarantees that a feasible input partition never gets
worse: moves are rolled back to the best state seen, where states are
compared by (overweight, cut) so an infeasible input also never loses
ground.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from random import Random
from typing import Sequence

from .graph import Graph, Partition, canon_edge, compute_l_max


def _bound_for(p: Partition, block: int, l_max) -> float:
    if l_max is None:
        return p.l_max
    if isinstance(l_max, (int, float)):
        return l_max
    return l_max[block]


def _state_key(p: Partition, l_max) -> tuple[float, int]:
    over = 0.0
    for b, w in enumerate(p.block_weights):
        bound = _bound_for(p, b, l_max)
        if w > bound:
            over += w - bound
    return (over, p.cut)


def _block_counts(p: Partition) -> list[int]:
    counts = [0] * p.k
    for b in p.assignment:
        counts[b] += 1
    return counts


def _boundary_nodes(graph: Graph, p: Partition) -> list[int]:
    assignment = p.assignment
    out = []
    for v in range(graph.n):
        bv = assignment[v]
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            if assignment[graph.adj[i]] != bv:
                out.append(v)
                break
    return out


def _connectivity(graph: Graph, p: Partition, v: int) -> dict[int, int]:
    """Weight of v's edges into each adjacent block."""
    conn: dict[int, int] = {}
    assignment = p.assignment
    for i in range(graph.xadj[v], graph.xadj[v + 1]):
        b = assignment[graph.adj[i]]
        conn[b] = conn.get(b, 0) + graph.ewgt[i]
    return conn


def _max_gain(graph: Graph, p: Partition, v: int) -> int | None:
    """g(v) = max over target blocks of (external - internal) weight."""
    conn = _connectivity(graph, p, v)
    own = p.assignment[v]
    internal = conn.pop(own, 0)
    if not conn:
        return None
    return max(conn.values()) - internal


class GainQueue:
    """Lazy max-heap over nodes keyed by gain.

    Entries are invalidated by re-pushing with a newer stamp; a node is
    handed out at most once per round via the `moved` marking done by
    the caller.
    """

    def __init__(self, rng: Random):
        self._heap: list[tuple[int, float, int, int]] = []
        self._stamp: dict[int, int] = {}
        self._rng = rng
        self.moved: set[int] = set()

    def push(self, v: int, gain: int) -> None:
        if v in self.moved:
            return
        stamp = self._stamp.get(v, 0) + 1
        self._stamp[v] = stamp
        heapq.heappush(self._heap, (-gain, self._rng.random(), v, stamp))

    def pop(self) -> tuple[int, int] | None:
        """Return (node, gain at push time) or None when drained."""
        while self._heap:
            neg, _, v, stamp = heapq.heappop(self._heap)
            if v in self.moved or self._stamp.get(v) != stamp:
                continue
            return v, -neg
        return None


def _fm_pass(graph: Graph, p: Partition, rng: Random, seeds: Sequence[int],
             l_max, limit: int, counts: list[int],
             touched: list[bool] | None = None) -> bool:
    """One FM round over `seeds`; rolls back to the best visited state.

    Returns True when the kept state improves on the starting one.  When
    `touched` is given, nodes are flagged as they enter the queue and
    already-flagged nodes are not activated (multi-try semantics).
    """
    queue = GainQueue(rng)
    assignment = p.assignment
    for v in seeds:
        gain = _max_gain(graph, p, v)
        if gain is not None:
            queue.push(v, gain)
            if touched is not None:
                touched[v] = True

    start_key = _state_key(p, l_max)
    best_key = start_key
    log: list[tuple[int, int, int]] = []   # (node, from, to)
    best_len = 0
    non_improving = 0

    while non_improving <= limit:
        item = queue.pop()
        if item is None:
            break
        v, stale_gain = item
        conn = _connectivity(graph, p, v)
        own = assignment[v]
        internal = conn.pop(own, 0)
        if not conn:
            continue
        gain = max(conn.values()) - internal
        if gain != stale_gain:
            queue.push(v, gain)   # lazy key re-validation
            continue
        if counts[own] <= 1:
            continue   # never empty the source block
        weight = graph.nwgt[v]
        candidates = []
        best_conn = None
        for b, c in conn.items():
            if p.block_weights[b] + weight > _bound_for(p, b, l_max):
                continue
            if best_conn is None or c > best_conn:
                best_conn = c
                candidates = [b]
            elif c == best_conn:
                candidates.append(b)
        if not candidates:
            continue
        target = candidates[0] if len(candidates) == 1 else rng.choice(candidates)
        queue.moved.add(v)
        p.move(graph, v, target)
        counts[own] -= 1
        counts[target] += 1
        log.append((v, own, target))
        key = _state_key(p, l_max)
        if key < best_key:
            best_key = key
            best_len = len(log)
            non_improving = 0
        else:
            non_improving += 1
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            u = graph.adj[i]
            if u in queue.moved:
                continue
            g = _max_gain(graph, p, u)
            if g is not None:
                queue.push(u, g)
                if touched is not None:
                    touched[u] = True

    # Undo everything after the best prefix.
    for v, frm, to in reversed(log[best_len:]):
        p.move(graph, v, frm)
        counts[to] -= 1
        counts[frm] += 1
    return best_key < start_key


def fm_refine(graph: Graph, p: Partition, eps: float, rng: Random,
              l_max=None, max_rounds: int = 10,
              nonimprove_factor: float = 3.0) -> Partition:
    """K-way FM: rounds seeded with all boundary nodes until one round
    stops improving.  A round aborts after 3*sqrt(n) consecutive
    non-improving moves and rolls back to its best feasible prefix.
    """
    del eps  # balance is carried by the partition's stored bound
    limit = max(10, int(nonimprove_factor * math.sqrt(graph.n)))
    counts = _block_counts(p)
    for _ in range(max_rounds):
        boundary = _boundary_nodes(graph, p)
        if not boundary:
            break
        rng.shuffle(boundary)
        if not _fm_pass(graph, p, rng, boundary, l_max, limit, counts):
            break
    return p


def multitry_fm(graph: Graph, p: Partition, eps: float, rng: Random,
                l_max=None) -> Partition:
    """Localized FM searches, each seeded with a single boundary node.

    A search only keeps its moves when it found a strictly better state;
    nodes touched by earlier searches are not used as seeds again.
    """
    del eps
    limit = max(10, int(math.sqrt(graph.n)))
    counts = _block_counts(p)
    touched = [False] * graph.n
    boundary = _boundary_nodes(graph, p)
    rng.shuffle(boundary)
    for v in boundary:
        if touched[v]:
            continue
        _fm_pass(graph, p, rng, [v], l_max, limit, counts, touched=touched)
    return p


# ---------------------------------------------------------------------------
# Max flow / min cut


class FlowProblem:
    """Directed capacity network with a source, a sink and a node map
    back to the host graph (None for synthetic terminals)."""

    def __init__(self, num_nodes: int, s: int, t: int,
                 mapping: Sequence[int | None] | None = None):
        if s == t:
            raise ValueError("source equals sink")
        self.n = num_nodes
        self.s = s
        self.t = t
        self.mapping = list(mapping) if mapping is not None else [None] * num_nodes
        self.head: list[int] = []
        self.cap: list[int] = []
        self.orig: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(num_nodes)]

    def add_arc(self, u: int, v: int, cap: int, back_cap: int = 0) -> None:
        if cap < 0 or back_cap < 0:
            raise ValueError("negative capacity")
        self.adj[u].append(len(self.head))
        self.head.append(v)
        self.cap.append(cap)
        self.orig.append(cap)
        self.adj[v].append(len(self.head))
        self.head.append(u)
        self.cap.append(back_cap)
        self.orig.append(back_cap)

    def add_undirected(self, u: int, v: int, cap: int) -> None:
        self.add_arc(u, v, cap, back_cap=cap)


def max_flow_min_cut(fp: FlowProblem) -> tuple[int, set[int]]:
    """Dinic's algorithm; returns (flow value, source-side node set).

    The source side is what remains reachable from s in the residual
    network; the flow value is asserted to equal that cut's capacity.
    """
    n, s, t = fp.n, fp.s, fp.t
    head, cap, adj = fp.head, fp.cap, fp.adj
    total = 0
    while True:
        level = [-1] * n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for i in adj[u]:
                v = head[i]
                if cap[i] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    q.append(v)
        if level[t] < 0:
            break
        it = [0] * n

        def dfs(u: int, pushed: int) -> int:
            if u == t:
                return pushed
            while it[u] < len(adj[u]):
                i = adj[u][it[u]]
                v = head[i]
                if cap[i] > 0 and level[v] == level[u] + 1:
                    got = dfs(v, min(pushed, cap[i]))
                    if got > 0:
                        cap[i] -= got
                        cap[i ^ 1] += got
                        return got
                it[u] += 1
            return 0

        while True:
            pushed = dfs(s, 1 << 62)
            if pushed == 0:
                break
            total += pushed

    source_side = {s}
    q = deque([s])
    while q:
        u = q.popleft()
        for i in adj[u]:
            v = head[i]
            if cap[i] > 0 and v not in source_side:
                source_side.add(v)
                q.append(v)
    cut_capacity = 0
    for u in source_side:
        for i in adj[u]:
            if head[i] not in source_side:
                cut_capacity += fp.orig[i]
    assert cut_capacity == total, "max-flow value does not match cut capacity"
    return total, source_side


# ---------------------------------------------------------------------------
# Flow-based pair refinement


def _grow_corridor(graph: Graph, p: Partition, block: int,
                   seeds: list[int], budget: float, depth_cap: int) -> set[int]:
    """BFS corridor inside `block` starting at the boundary seeds.

    Total corridor weight stays within `budget` and at least one node of
    the block is left outside so the contracted terminal is never empty.
    """
    corridor: set[int] = set()
    block_nodes = sum(1 for b in p.assignment if b == block)
    weight = 0
    depth = {v: 0 for v in seeds}
    q = deque(seeds)
    seen = set(seeds)
    while q:
        v = q.popleft()
        if depth[v] > depth_cap:
            continue
        if weight + graph.nwgt[v] > budget:
            continue
        if len(corridor) + 1 >= block_nodes:
            break
        corridor.add(v)
        weight += graph.nwgt[v]
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            u = graph.adj[i]
            if u in seen or p.assignment[u] != block:
                continue
            seen.add(u)
            depth[u] = depth[v] + 1
            q.append(u)
    return corridor


def flow_pair_refine(graph: Graph, p: Partition, a: int, b: int, eps: float,
                     rng: Random, l_max: float | None = None,
                     depth_cap: int = 10) -> bool:
    """Improve the bipartition induced by blocks a and b via a min cut.

    A corridor is grown around the a-b boundary, sized so any
    reassignment of corridor nodes keeps both blocks within the balance
    bound; everything outside is contracted into the terminals.  The
    reassignment is applied only when the pair cut strictly drops and
    the result stays feasible.
    """
    del rng
    if a == b:
        return False
    assignment = p.assignment
    bound = p.l_max if l_max is None else l_max
    seeds_a, seeds_b = [], []
    old_pair_cut = 0
    for v in range(graph.n):
        if assignment[v] == a:
            hit = False
            for i in range(graph.xadj[v], graph.xadj[v + 1]):
                if assignment[graph.adj[i]] == b:
                    hit = True
                    old_pair_cut += graph.ewgt[i]
            if hit:
                seeds_a.append(v)
        elif assignment[v] == b:
            for i in range(graph.xadj[v], graph.xadj[v + 1]):
                if assignment[graph.adj[i]] == a:
                    seeds_b.append(v)
                    break
    if not seeds_a or old_pair_cut == 0:
        return False

    # Corridor inside a is bounded by b's slack and vice versa, so even
    # the extreme reassignment keeps both blocks within the balance bound.
    del eps  # the bound already encodes the allowed imbalance
    budget_a = bound - p.block_weights[b]
    budget_b = bound - p.block_weights[a]
    corridor_a = _grow_corridor(graph, p, a, seeds_a, budget_a, depth_cap)
    corridor_b = _grow_corridor(graph, p, b, seeds_b, budget_b, depth_cap)

    corridor = corridor_a | corridor_b
    ids = {v: i + 2 for i, v in enumerate(sorted(corridor))}
    s, t = 0, 1
    mapping: list[int | None] = [None, None] + sorted(corridor)
    fp = FlowProblem(len(corridor) + 2, s, t, mapping)
    to_s: dict[int, int] = {}
    to_t: dict[int, int] = {}
    direct = 0
    for v in corridor:
        pv = ids[v]
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            u = graph.adj[i]
            bu = assignment[u]
            if bu not in (a, b):
                continue
            w = graph.ewgt[i]
            if u in corridor:
                if v < u:
                    fp.add_undirected(pv, ids[u], w)
            elif bu == a:
                to_s[pv] = to_s.get(pv, 0) + w
            else:
                to_t[pv] = to_t.get(pv, 0) + w
    for v in range(graph.n):
        if assignment[v] == a and v not in corridor:
            for i in range(graph.xadj[v], graph.xadj[v + 1]):
                u = graph.adj[i]
                if assignment[u] == b and u not in corridor:
                    direct += graph.ewgt[i]
    for pv, w in to_s.items():
        fp.add_undirected(s, pv, w)
    for pv, w in to_t.items():
        fp.add_undirected(pv, t, w)
    if direct:
        fp.add_undirected(s, t, direct)

    value, source_side = max_flow_min_cut(fp)
    if value >= old_pair_cut:
        return False

    moves = []
    for v in corridor:
        want = a if ids[v] in source_side else b
        if assignment[v] != want:
            moves.append((v, assignment[v], want))
            p.move(graph, v, want)
    # Defensive: never hand back an infeasible or block-emptying result.
    ok = (p.block_weights[a] <= bound and p.block_weights[b] <= bound
          and any(x == a for x in assignment) and any(x == b for x in assignment))
    if not ok or not moves:
        for v, frm, _ in reversed(moves):
            p.move(graph, v, frm)
        return False
    return True


def refine_all_pairs(graph: Graph, p: Partition, eps: float, rng: Random,
                     l_max: float | None = None, depth_cap: int = 10) -> Partition:
    """Sweep flow refinement over all adjacent block pairs until a full
    sweep makes no improvement."""
    while True:
        pairs = set()
        assignment = p.assignment
        for u in range(graph.n):
            bu = assignment[u]
            for i in range(graph.xadj[u], graph.xadj[u + 1]):
                bv = assignment[graph.adj[i]]
                if bu < bv:
                    pairs.add((bu, bv))
        pair_list = sorted(pairs)
        rng.shuffle(pair_list)
        improved = False
        for a, b in pair_list:
            improved |= flow_pair_refine(graph, p, a, b, eps, rng,
                                         l_max=l_max, depth_cap=depth_cap)
        if not improved:
            break
    return p
