"""Steady-state population management and the evolutionary operators.

Fitness is the edge cut.  Offspring are produced one at a time by three
combine operators (classic two-parent, cross-combine against a freshly
partitioned different search space, and natural-cut clusterings) and two
F-cycle mutations; insertion evicts the most similar not-better member.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from random import Random

from .graph import Graph, Partition, cut_edge_set, partition_distance
from .multilevel import PartitionerConfig, combine_core, fcycle, partition
from .natural_cuts import (NaturalCutState, STAGE_ONE_CALL_LIMIT,
                           stage1_clustering, stage2_clustering)


@dataclass(frozen=True)
class Individual:
    """A partition plus its cut and cut-edge fingerprint.

    Treated as immutable: operators copy the partition before touching it.
    """
    partition: Partition
    cut: int
    cut_edges: frozenset[tuple[int, int]]

    @classmethod
    def from_partition(cls, graph: Graph, part: Partition) -> "Individual":
        return cls(part, part.cut, frozenset(cut_edge_set(graph, part)))


class Population:
    """Fixed-capacity pool of individuals with a best-ever tracker."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.members: list[Individual] = []
        self.best_ever: Individual | None = None

    def __len__(self) -> int:
        return len(self.members)

    def observe(self, ind: Individual) -> None:
        if self.best_ever is None or ind.cut < self.best_ever.cut:
            self.best_ever = ind

    def best(self) -> Individual:
        return min(self.members, key=lambda ind: ind.cut)


def evict_insert(pop: Population, offspring: Individual, rng: Random) -> bool:
    """Insert `offspring`, evicting the most similar member among those
    with a cut no better than the offspring's.

    Below capacity the offspring is simply appended.  When every member
    is strictly better the offspring is rejected.  The best-ever tracker
    is updated in all cases.
    """
    pop.observe(offspring)
    if len(pop.members) < pop.capacity:
        pop.members.append(offspring)
        return True
    worse_or_equal = [i for i, ind in enumerate(pop.members)
                      if ind.cut >= offspring.cut]
    if not worse_or_equal:
        return False
    best_dist = None
    ties: list[int] = []
    for i in worse_or_equal:
        d = partition_distance(pop.members[i].cut_edges, offspring.cut_edges)
        if best_dist is None or d < best_dist:
            best_dist = d
            ties = [i]
        elif d == best_dist:
            ties.append(i)
    victim = ties[0] if len(ties) == 1 else rng.choice(ties)
    pop.members[victim] = offspring
    return True


def tournament_select(pop: Population, rng: Random) -> Individual:
    """Fitter of two uniform draws (with replacement), ties random."""
    if not pop.members:
        raise ValueError("empty population")
    a = rng.choice(pop.members)
    b = rng.choice(pop.members)
    if a.cut < b.cut:
        return a
    if b.cut < a.cut:
        return b
    return a if rng.random() < 0.5 else b


@dataclass
class OperatorRatios:
    """Mutation-vs-combine coin and the fixed operator splits."""
    coin: int = 1            # mutation probability is coin/10
    m1: int = 4
    m2: int = 1
    c1: int = 3
    c2: int = 1
    c3: int = 1

    def __post_init__(self):
        if not 0 <= self.coin <= 10:
            raise ValueError("coin must lie in [0, 10]")
        if min(self.m1, self.m2, self.c1, self.c2, self.c3) <= 0:
            raise ValueError("operator split weights must be positive")


def pick_operator(ratios: OperatorRatios, rng: Random) -> str:
    """Draw an operator tag according to the configured ratios."""
    if rng.random() < ratios.coin / 10.0:
        total = ratios.m1 + ratios.m2
        return "M1" if rng.random() < ratios.m1 / total else "M2"
    total = ratios.c1 + ratios.c2 + ratios.c3
    r = rng.random() * total
    if r < ratios.c1:
        return "C1"
    if r < ratios.c1 + ratios.c2:
        return "C2"
    return "C3"


def combine_c1(graph: Graph, pop: Population, cfg: PartitionerConfig,
               rng: Random) -> Individual:
    """Classic combine: the better of two tournament winners is the
    partition, the other contributes its cut edges."""
    p1 = tournament_select(pop, rng)
    p2 = tournament_select(pop, rng)
    if p1.cut > p2.cut or (p1.cut == p2.cut and rng.random() < 0.5):
        p1, p2 = p2, p1
    child = combine_core(graph, p1.partition, p2.partition, cfg, rng)
    return Individual.from_partition(graph, child)


def combine_c2(graph: Graph, pop: Population, cfg: PartitionerConfig,
               rng: Random) -> Individual:
    """Cross-combine: pair the tournament winner with a fresh partition
    from a different search space (k' in [k/4, 4k], eps' in [eps, 4eps])."""
    parent = tournament_select(pop, rng)
    k = cfg.k
    lo = max(2, math.ceil(k / 4))
    k_prime = rng.randint(lo, 4 * k)
    eps_prime = rng.uniform(cfg.eps, 4 * cfg.eps)
    other_cfg = PartitionerConfig(k=k_prime, eps=eps_prime,
                                  strength=cfg.strength,
                                  seed=rng.getrandbits(62),
                                  initial_tries=cfg.initial_tries,
                                  max_fm_rounds=cfg.max_fm_rounds,
                                  flow_depth=cfg.flow_depth)
    clustering = partition(graph, other_cfg)
    child = combine_core(graph, parent.partition, clustering, cfg, rng)
    return Individual.from_partition(graph, child)


def combine_c3(graph: Graph, pop: Population, state: NaturalCutState,
               cfg: PartitionerConfig, rng: Random) -> Individual:
    """Natural-cut combine: stage one discovers cuts and feeds the ENC
    index; after ten calls stage two recombines stored ENCs."""
    parent = tournament_select(pop, rng)
    if state.calls < STAGE_ONE_CALL_LIMIT or len(state.index) == 0:
        clustering = stage1_clustering(graph, cfg.k, rng, index=state.index)
    else:
        clustering = stage2_clustering(state.index, graph, rng)
    state.calls += 1
    child = combine_core(graph, parent.partition, clustering, cfg, rng)
    return Individual.from_partition(graph, child)


def mutate_m1(graph: Graph, pop: Population, cfg: PartitionerConfig,
              rng: Random) -> Individual:
    """F-cycle seeded with the input partition; never worsens it."""
    member = rng.choice(pop.members)
    child = fcycle(graph, member.partition, cfg, True, rng)
    return Individual.from_partition(graph, child)


def mutate_m2(graph: Graph, pop: Population, cfg: PartitionerConfig,
              rng: Random) -> Individual:
    """F-cycle with fresh coarsest-level partitions; may come back worse,
    in which case eviction simply rejects it."""
    member = rng.choice(pop.members)
    child = fcycle(graph, member.partition, cfg, False, rng)
    return Individual.from_partition(graph, child)


def apply_operator(tag: str, graph: Graph, pop: Population,
                   state: NaturalCutState, cfg: PartitionerConfig,
                   rng: Random) -> Individual:
    if tag == "M1":
        return mutate_m1(graph, pop, cfg, rng)
    if tag == "M2":
        return mutate_m2(graph, pop, cfg, rng)
    if tag == "C1":
        return combine_c1(graph, pop, cfg, rng)
    if tag == "C2":
        return combine_c2(graph, pop, cfg, rng)
    if tag == "C3":
        return combine_c3(graph, pop, state, cfg, rng)
    raise ValueError(f"unknown operator tag {tag!r}")
