"""Multilevel driver: plain partitioning, F-cycles and the blocked-edge
combine core shared by all evolutionary operators."""

from __future__ import annotations

from dataclasses import dataclass, replace
from random import Random

from .coarsen import StopRule, build_hierarchy, contract, gpa_matching
from .graph import Graph, Partition, compute_l_max, cut_edge_set
from .initial import initial_partition
from .refine import fm_refine, multitry_fm, refine_all_pairs


@dataclass
class PartitionerConfig:
    """Knobs of a single multilevel partitioner invocation.

    `strong` runs FM, multi-try FM and flow refinement on every level;
    `eco` drops the flow pass.
    """
    k: int
    eps: float = 0.03
    strength: str = "strong"
    seed: int = 0
    initial_tries: int = 4
    max_fm_rounds: int = 10
    flow_depth: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.strength not in ("strong", "eco"):
            raise ValueError(f"unknown strength {self.strength!r}")

    @property
    def use_flow(self) -> bool:
        return self.strength == "strong"

    def reseeded(self, seed: int) -> "PartitionerConfig":
        return replace(self, seed=seed)


def refine_level(graph: Graph, p: Partition, cfg: PartitionerConfig,
                 rng: Random, l_max: float | None = None) -> Partition:
    """The per-level refinement stack for the configured strength."""
    fm_refine(graph, p, cfg.eps, rng, l_max=l_max, max_rounds=cfg.max_fm_rounds)
    multitry_fm(graph, p, cfg.eps, rng, l_max=l_max)
    if cfg.use_flow:
        refine_all_pairs(graph, p, cfg.eps, rng, l_max=l_max,
                         depth_cap=cfg.flow_depth)
    return p


def partition(graph: Graph, cfg: PartitionerConfig) -> Partition:
    """Full multilevel run: coarsen, partition the coarsest graph,
    project and refine per level.  Deterministic per seed."""
    rng = Random(cfg.seed)
    l_max = compute_l_max(graph, cfg.k, cfg.eps)
    hierarchy = build_hierarchy(graph, cfg.k, set(), StopRule.SIZE_THRESHOLD, rng)
    p = initial_partition(hierarchy.coarsest, cfg.k, cfg.eps,
                          cfg.initial_tries, rng, l_max=l_max)
    refine_level(hierarchy.coarsest, p, cfg, rng)
    for level in range(len(hierarchy) - 1, -1, -1):
        p = hierarchy.project_partition(level, p)
        refine_level(hierarchy.graphs[level], p, cfg, rng)
    return p


def _induce_on_coarse(coarse: Graph, cmap: list[int], p: Partition) -> Partition:
    """Partition of the coarse graph induced by a fine partition whose
    cut edges were all blocked (so the induction is well defined)."""
    coarse_assignment = [0] * coarse.n
    for v, c in enumerate(cmap):
        coarse_assignment[c] = p.assignment[v]
    induced = Partition.__new__(Partition)
    induced.k = p.k
    induced.eps = p.eps
    induced.assignment = coarse_assignment
    induced.cut = p.cut
    induced.block_weights = list(p.block_weights)
    induced.l_max = p.l_max
    return induced


def fcycle(graph: Graph, p: Partition, cfg: PartitionerConfig,
           use_input_as_initial: bool, rng: Random) -> Partition:
    """Iterated multilevel cycle over a partitioned graph.

    Coarsening and refinement are iterated (two top-level passes); cut
    edges of the evolving partition are blocked from contraction.  On
    each level at most two recursive descents happen, the second one
    only on the second visit to that level, which yields the F-shaped
    visit pattern instead of a full W-cycle.  With
    `use_input_as_initial` the evolving partition seeds the coarsest
    graph, which guarantees the cut never worsens; without it a fresh
    initial partition is computed there and no guarantee holds.
    """
    visits: dict[int, int] = {}

    def project(cmap: list[int], coarse_part: Partition) -> Partition:
        projected = Partition.__new__(Partition)
        projected.k = coarse_part.k
        projected.eps = coarse_part.eps
        projected.assignment = [coarse_part.assignment[c] for c in cmap]
        projected.cut = coarse_part.cut
        projected.block_weights = list(coarse_part.block_weights)
        projected.l_max = coarse_part.l_max
        return projected

    def descend(g: Graph, part: Partition, depth: int) -> Partition:
        visits[depth] = visits.get(depth, 0) + 1
        calls = 2 if visits[depth] == 2 else 1
        for _ in range(calls):
            blocked = cut_edge_set(g, part)
            matching = gpa_matching(g, blocked, rng)
            if len(matching) == 0:
                if not use_input_as_initial:
                    part = initial_partition(g, cfg.k, cfg.eps,
                                             cfg.initial_tries, rng,
                                             l_max=part.l_max)
                refine_level(g, part, cfg, rng)
                return part
            coarse, cmap = contract(g, matching)
            coarse_part = _induce_on_coarse(coarse, cmap, part)
            coarse_part = descend(coarse, coarse_part, depth + 1)
            part = project(cmap, coarse_part)
            refine_level(g, part, cfg, rng)
        return part

    part = p.copy()
    for _ in range(2):
        part = descend(graph, part, 0)
    return part


def combine_core(graph: Graph, p: Partition, clustering,
                 cfg: PartitionerConfig, rng: Random) -> Partition:
    """Blocked-edge combine of a feasible partition with any assignment.

    The union of both cut-edge sets is blocked, coarsening runs until no
    contractable edge remains (the coarsest graph is then the quotient
    of the overlay clustering), the partition is applied to the coarsest
    graph as the initial solution, and refinement walks back up.  The
    result never cuts more than `p`.
    """
    blocked = cut_edge_set(graph, p) | cut_edge_set(graph, clustering)
    hierarchy = build_hierarchy(graph, cfg.k, blocked,
                                StopRule.NO_CONTRACTABLE_EDGE, rng)
    mapping = hierarchy.map_to_coarsest()
    current = _induce_on_coarse(hierarchy.coarsest, mapping, p)
    refine_level(hierarchy.coarsest, current, cfg, rng)
    for level in range(len(hierarchy) - 1, -1, -1):
        current = hierarchy.project_partition(level, current)
        refine_level(hierarchy.graphs[level], current, cfg, rng)
    return current
