"""Core graph container plus partition/clustering arithmetic.

The graph is a static, undirected, weighted graph held in adjacency-array
(CSR) form: every undirected edge is stored once per direction and each
direction knows the index of its reverse.  Node weights are non-negative
integers, edge weights strictly positive integers.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence


class GraphFormatError(ValueError):
    """Raised for malformed METIS input."""


def canon_edge(u: int, v: int) -> tuple[int, int]:
    """Canonical (min, max) form of an undirected edge."""
    return (u, v) if u < v else (v, u)


class Graph:
    """Undirected weighted graph in CSR form.

    Attributes:
        n: node count.
        m: undirected edge count.
        xadj: arc offsets, length n + 1.
        adj: arc targets, length 2m, sorted per node.
        ewgt: arc weights, parallel to adj.
        nwgt: node weights, length n.
        reverse_arc: for arc i = (u, v), the index of arc (v, u).
    """

    __slots__ = ("n", "m", "xadj", "adj", "ewgt", "nwgt", "reverse_arc",
                 "total_node_weight", "max_node_weight")

    def __init__(self, n: int, node_weights: Sequence[int],
                 edge_dict: dict[tuple[int, int], int]):
        # edge_dict maps canonical (u, v) with u < v to a positive weight.
        if n < 0:
            raise ValueError("negative node count")
        if len(node_weights) != n:
            raise ValueError("node weight list does not match node count")
        for v, w in enumerate(node_weights):
            if w < 0:
                raise ValueError(f"negative weight on node {v}")
        degree = [0] * n
        for (u, v), w in edge_dict.items():
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range")
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if w <= 0:
                raise ValueError(f"non-positive weight on edge ({u},{v})")
            degree[u] += 1
            degree[v] += 1

        self.n = n
        self.m = len(edge_dict)
        self.nwgt = list(node_weights)
        self.xadj = [0] * (n + 1)
        for v in range(n):
            self.xadj[v + 1] = self.xadj[v] + degree[v]
        total_arcs = 2 * self.m
        self.adj = [0] * total_arcs
        self.ewgt = [0] * total_arcs
        self.reverse_arc = [0] * total_arcs

        fill = list(self.xadj[:n])
        # Neighbor lists come out sorted because we scan targets in order.
        per_node: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for (u, v), w in edge_dict.items():
            per_node[u].append((v, w))
            per_node[v].append((u, w))
        arc_index: dict[tuple[int, int], int] = {}
        for u in range(n):
            per_node[u].sort()
            for v, w in per_node[u]:
                i = fill[u]
                self.adj[i] = v
                self.ewgt[i] = w
                arc_index[(u, v)] = i
                fill[u] = i + 1
        for (u, v), i in arc_index.items():
            self.reverse_arc[i] = arc_index[(v, u)]

        self.total_node_weight = sum(self.nwgt)
        self.max_node_weight = max(self.nwgt) if n else 0

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]],
                   node_weights: Sequence[int] | None = None) -> "Graph":
        """Build a graph from (u, v, weight) triples.

        Parallel edges are merged by weight summation.
        """
        merged: dict[tuple[int, int], int] = {}
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            key = canon_edge(u, v)
            merged[key] = merged.get(key, 0) + w
        if node_weights is None:
            node_weights = [1] * n
        return cls(n, node_weights, merged)

    def neighbors(self, v: int) -> Iterator[tuple[int, int]]:
        """Yield (neighbor, edge weight) pairs of v."""
        for i in range(self.xadj[v], self.xadj[v + 1]):
            yield self.adj[i], self.ewgt[i]

    def degree(self, v: int) -> int:
        return self.xadj[v + 1] - self.xadj[v]

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """Yield every undirected edge once, as (u, v, weight) with u < v."""
        for u in range(self.n):
            for i in range(self.xadj[u], self.xadj[u + 1]):
                v = self.adj[i]
                if u < v:
                    yield u, v, self.ewgt[i]

    def edge_weight(self, u: int, v: int) -> int | None:
        """Weight of edge (u, v), or None if absent."""
        lo, hi = self.xadj[u], self.xadj[u + 1]
        adj = self.adj
        while lo < hi:
            mid = (lo + hi) // 2
            if adj[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        if lo < self.xadj[u + 1] and adj[lo] == v:
            return self.ewgt[lo]
        return None

    def subgraph(self, nodes: Sequence[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph on `nodes`; returns (graph, sub-to-original map)."""
        index = {v: i for i, v in enumerate(nodes)}
        sub_edges: dict[tuple[int, int], int] = {}
        for v in nodes:
            sv = index[v]
            for i in range(self.xadj[v], self.xadj[v + 1]):
                u = self.adj[i]
                su = index.get(u)
                if su is not None and sv < su:
                    sub_edges[(sv, su)] = self.ewgt[i]
        weights = [self.nwgt[v] for v in nodes]
        return Graph(len(nodes), weights, sub_edges), list(nodes)

    def validate(self) -> None:
        """Check structural invariants; raises AssertionError on violation."""
        assert len(self.adj) == 2 * self.m
        assert sum(self.degree(v) for v in range(self.n)) == 2 * self.m
        for u in range(self.n):
            row = self.adj[self.xadj[u]:self.xadj[u + 1]]
            assert row == sorted(row), f"adjacency of {u} not sorted"
            assert u not in row, f"self-loop at {u}"
        for i, j in enumerate(self.reverse_arc):
            assert self.reverse_arc[j] == i
            assert self.ewgt[i] == self.ewgt[j]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def compute_l_max(graph: Graph, k: int, eps: float) -> float:
    """Block weight bound: (1 + eps) * c(V) / k + max node weight."""
    return (1.0 + eps) * graph.total_node_weight / k + graph.max_node_weight


class Partition:
    """Block assignment of all nodes for fixed k and eps.

    Caches the cut value and per-block weights; `l_max` is the balance
    bound the partition is held against (defaults to the bound derived
    from the construction graph, but multilevel code pins the bound of
    the finest graph when working on coarse levels).
    """

    __slots__ = ("k", "eps", "assignment", "cut", "block_weights", "l_max")

    def __init__(self, graph: Graph, k: int, eps: float,
                 assignment: Sequence[int], l_max: float | None = None):
        if k < 1:
            raise ValueError("k must be >= 1")
        if len(assignment) != graph.n:
            raise ValueError("assignment does not cover all nodes")
        self.k = k
        self.eps = eps
        self.assignment = list(assignment)
        for v, b in enumerate(self.assignment):
            if not (0 <= b < k):
                raise ValueError(f"node {v} assigned to invalid block {b}")
        self.l_max = compute_l_max(graph, k, eps) if l_max is None else l_max
        self.block_weights = [0] * k
        for v in range(graph.n):
            self.block_weights[self.assignment[v]] += graph.nwgt[v]
        self.cut = self._compute_cut(graph)

    def _compute_cut(self, graph: Graph) -> int:
        total = 0
        assignment = self.assignment
        for u in range(graph.n):
            bu = assignment[u]
            for i in range(graph.xadj[u], graph.xadj[u + 1]):
                v = graph.adj[i]
                if u < v and assignment[v] != bu:
                    total += graph.ewgt[i]
        return total

    def copy(self) -> "Partition":
        clone = Partition.__new__(Partition)
        clone.k = self.k
        clone.eps = self.eps
        clone.assignment = list(self.assignment)
        clone.cut = self.cut
        clone.block_weights = list(self.block_weights)
        clone.l_max = self.l_max
        return clone

    def move(self, graph: Graph, v: int, to_block: int) -> None:
        """Reassign v, maintaining cut and block weights incrementally."""
        frm = self.assignment[v]
        if frm == to_block:
            return
        adj, ewgt, assignment = graph.adj, graph.ewgt, self.assignment
        delta = 0
        for i in range(graph.xadj[v], graph.xadj[v + 1]):
            b = assignment[adj[i]]
            if b == frm:
                delta += ewgt[i]
            elif b == to_block:
                delta -= ewgt[i]
        self.cut += delta
        self.block_weights[frm] -= graph.nwgt[v]
        self.block_weights[to_block] += graph.nwgt[v]
        assignment[v] = to_block

    def is_feasible(self) -> bool:
        """True iff every block weight is within the stored bound."""
        return all(w <= self.l_max for w in self.block_weights)

    def overweight(self) -> float:
        """Total weight above the bound, 0.0 when feasible."""
        return sum(w - self.l_max for w in self.block_weights if w > self.l_max)

    def recompute(self, graph: Graph) -> tuple[int, list[int]]:
        """Recompute (cut, block weights) from scratch, for validation."""
        weights = [0] * self.k
        for v in range(graph.n):
            weights[self.assignment[v]] += graph.nwgt[v]
        return self._compute_cut(graph), weights

    def __repr__(self) -> str:
        return f"Partition(k={self.k}, cut={self.cut})"


class Clustering:
    """Block assignment with a free block count and no balance constraint."""

    __slots__ = ("k", "assignment")

    def __init__(self, assignment: Sequence[int]):
        ids: dict[int, int] = {}
        dense = []
        for label in assignment:
            dense.append(ids.setdefault(label, len(ids)))
        self.assignment = dense
        self.k = len(ids)

    def __repr__(self) -> str:
        return f"Clustering(k={self.k}, n={len(self.assignment)})"


def cut_value(graph: Graph, part) -> int:
    """Total weight of edges whose endpoints lie in distinct blocks."""
    assignment = part.assignment
    if len(assignment) != graph.n:
        raise ValueError("assignment does not cover all nodes")
    total = 0
    for u in range(graph.n):
        bu = assignment[u]
        for i in range(graph.xadj[u], graph.xadj[u + 1]):
            v = graph.adj[i]
            if u < v and assignment[v] != bu:
                total += graph.ewgt[i]
    return total


def is_feasible(graph: Graph, part: Partition) -> bool:
    """Check the balance constraint against the bound derived from `graph`.

    Ties at exactly the bound count as feasible.
    """
    bound = compute_l_max(graph, part.k, part.eps)
    return all(w <= bound for w in part.block_weights)


def cut_edge_set(graph: Graph, part) -> set[tuple[int, int]]:
    """Canonical set of edges running between distinct blocks."""
    assignment = part.assignment
    out = set()
    for u in range(graph.n):
        bu = assignment[u]
        for i in range(graph.xadj[u], graph.xadj[u + 1]):
            v = graph.adj[i]
            if u < v and assignment[v] != bu:
                out.add((u, v))
    return out


def partition_distance(a: set[tuple[int, int]], b: set[tuple[int, int]]) -> int:
    """Size of the symmetric difference of two cut-edge sets."""
    return len(a ^ b)


def connected_components(graph: Graph, excluded: set[tuple[int, int]]) -> Clustering:
    """Components of the graph after removing `excluded` edges."""
    label = [-1] * graph.n
    current = 0
    xadj, adj = graph.xadj, graph.adj
    for start in range(graph.n):
        if label[start] >= 0:
            continue
        label[start] = current
        stack = [start]
        while stack:
            u = stack.pop()
            for i in range(xadj[u], xadj[u + 1]):
                v = adj[i]
                if label[v] >= 0:
                    continue
                e = (u, v) if u < v else (v, u)
                if e in excluded:
                    continue
                label[v] = current
                stack.append(v)
        current += 1
    return Clustering(label)


def overlay_clustering(graph: Graph, a, b) -> Clustering:
    """Components after removing the union of both assignments' cut edges.

    Every resulting cluster is monochromatic under both inputs.
    """
    removed = cut_edge_set(graph, a) | cut_edge_set(graph, b)
    return connected_components(graph, removed)


def quotient_graph(graph: Graph, clustering: Clustering) -> Graph:
    """One node per cluster; crossing edges aggregated by weight sum."""
    k = clustering.k
    assignment = clustering.assignment
    weights = [0] * k
    for v in range(graph.n):
        weights[assignment[v]] += graph.nwgt[v]
    edges: dict[tuple[int, int], int] = {}
    for u, v, w in graph.edges():
        cu, cv = assignment[u], assignment[v]
        if cu != cv:
            key = canon_edge(cu, cv)
            edges[key] = edges.get(key, 0) + w
    return Graph(k, weights, edges)


# ---------------------------------------------------------------------------
# METIS file format


def load_metis(source) -> Graph:
    """Parse a METIS graph file.

    `source` may be a string, an iterable of lines, or a file object.
    Header: "n m [fmt]" with fmt in {0, 1, 10, 11}; node lines list
    1-indexed neighbors, with node/edge weights as dictated by fmt.
    Missing weights default to 1; zero node weights are bumped to 1 so
    that coarsening ratings stay defined.  Parallel entries within one
    line are merged by weight summation.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    elif hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = [line.rstrip("\n") for line in source]

    def fail(lineno: int, message: str):
        raise GraphFormatError(f"line {lineno}: {message}")

    # Line numbers are 1-based over the physical file, comments included.
    rows: list[tuple[int, list[str]]] = []
    for i, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("%"):
            continue
        rows.append((i, text.split()))

    if not rows:
        raise GraphFormatError("empty graph file")
    header_line, header = rows[0]
    if len(header) not in (2, 3):
        fail(header_line, "header must be 'n m [fmt]'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        fail(header_line, "non-integer header fields")
    fmt = header[2] if len(header) == 3 else "0"
    if fmt not in ("0", "1", "10", "11", "00", "01"):
        fail(header_line, f"unsupported format code {fmt!r}")
    has_nwgt = len(fmt) == 2 and fmt[0] == "1"
    has_ewgt = fmt[-1] == "1"

    body = rows[1:]
    if len(body) < n:
        missing = len(body) + 1
        raise GraphFormatError(
            f"expected {n} node lines, found {len(body)} "
            f"(node {missing} has no line)")
    if len(body) > n:
        fail(body[n][0], f"unexpected extra line after {n} node lines")

    node_weights = [1] * n
    directed: dict[tuple[int, int], int] = {}
    first_seen: dict[tuple[int, int], int] = {}
    for u0, (lineno, tokens) in enumerate(body):
        u = u0  # 0-based internal id
        pos = 0
        try:
            values = [int(t) for t in tokens]
        except ValueError:
            fail(lineno, "non-integer token")
        if has_nwgt:
            if not values:
                fail(lineno, "missing node weight")
            w = values[0]
            if w < 0:
                fail(lineno, f"negative node weight {w}")
            node_weights[u] = max(w, 1)
            pos = 1
        rest = values[pos:]
        if has_ewgt:
            if len(rest) % 2 != 0:
                fail(lineno, "dangling neighbor without edge weight")
            pairs = [(rest[i], rest[i + 1]) for i in range(0, len(rest), 2)]
        else:
            pairs = [(v, 1) for v in rest]
        for v1, w in pairs:
            if not (1 <= v1 <= n):
                fail(lineno, f"neighbor index {v1} out of range 1..{n}")
            v = v1 - 1
            if v == u:
                fail(lineno, f"self-loop on node {u + 1}")
            if w <= 0:
                fail(lineno, f"non-positive edge weight {w}")
            key = (u, v)
            directed[key] = directed.get(key, 0) + w
            first_seen.setdefault(key, lineno)

    edges: dict[tuple[int, int], int] = {}
    for (u, v), w in directed.items():
        back = directed.get((v, u))
        if back is None:
            raise GraphFormatError(
                f"line {first_seen[(u, v)]}: neighbor list of node {v + 1} "
                f"missing edge back to {u + 1}")
        if back != w:
            raise GraphFormatError(
                f"line {first_seen[(u, v)]}: edge ({u + 1},{v + 1}) has "
                f"weight {w} one way and {back} the other")
        if u < v:
            edges[(u, v)] = w
    if len(edges) != m:
        raise GraphFormatError(
            f"line {header_line}: header declares {m} edges, file has {len(edges)}")
    return Graph(n, node_weights, edges)


def save_metis(graph: Graph, fileobj) -> None:
    """Write the graph in METIS format with node and edge weights (fmt 11)."""
    fileobj.write(f"{graph.n} {graph.m} 11\n")
    for u in range(graph.n):
        parts = [str(graph.nwgt[u])]
        for i in range(graph.xadj[u], graph.xadj[u + 1]):
            parts.append(str(graph.adj[i] + 1))
            parts.append(str(graph.ewgt[i]))
        fileobj.write(" ".join(parts) + "\n")


def write_partition(part: Partition, fileobj) -> None:
    """Write one 0-based block id per line, node order."""
    for b in part.assignment:
        fileobj.write(f"{b}\n")
