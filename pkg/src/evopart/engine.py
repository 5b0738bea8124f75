"""In-process island engine: p workers evolve private populations over a
shared immutable graph and exchange their best individuals through an
asynchronous rumor-spreading protocol.

Workers are threads; all communication goes through bounded per-worker
mailboxes (drop-oldest on overflow), so no worker ever blocks on another
once the quick-start phase is over.
"""

from __future__ import annotations

import math
import threading
import time
import traceback
from collections import deque
from dataclasses import dataclass, field
from random import Random

from .evolution import (Individual, OperatorRatios, Population,
                        apply_operator, evict_insert, pick_operator)
from .graph import Graph, compute_l_max
from .multilevel import PartitionerConfig, partition
from .natural_cuts import NaturalCutState


class EngineError(RuntimeError):
    """A worker failed; partial convergence logs are attached."""

    def __init__(self, message: str, events: list["ConvergenceEvent"]):
        super().__init__(message)
        self.events = events


@dataclass(frozen=True)
class ConvergenceEvent:
    """One created or received partition: worker id, elapsed seconds, cut."""
    worker: int
    t: float
    cut: int


@dataclass
class EngineConfig:
    partitioner: PartitionerConfig
    workers: int = 4
    t_total: float = 60.0
    fraction: float = 10.0
    ratios: OperatorRatios = field(default_factory=OperatorRatios)
    comm_period: int = 1
    mailbox_capacity: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.t_total <= 0:
            raise ValueError("t_total must be positive")
        if self.fraction < 1:
            raise ValueError("fraction must be >= 1")
        if self.comm_period < 1:
            raise ValueError("comm_period must be >= 1")


def estimate_population_size(t_bar: float, t_total: float, f: float) -> int:
    """Population size so that building it costs about t_total / f."""
    if t_bar <= 0:
        return 3
    return max(3, round((t_total / f) / t_bar))


class Mailbox:
    """Bounded inbox; posting past the high watermark drops the oldest."""

    def __init__(self, capacity: int):
        self._items: deque[Individual] = deque(maxlen=capacity)
        self._lock = threading.Lock()

    def post(self, item: Individual) -> None:
        with self._lock:
            self._items.append(item)

    def drain(self) -> list[Individual]:
        with self._lock:
            items = list(self._items)
            self._items.clear()
        return items


class WorkerState:
    """One worker's population plus rumor-spreading bookkeeping."""

    def __init__(self, wid: int, num_workers: int, capacity: int, seed: int):
        self.id = wid
        self.num_workers = num_workers
        self.rng = Random(seed)
        self.population = Population(capacity)
        self.send_budget = max(0, math.ceil(math.log2(num_workers))) if num_workers > 1 else 0
        self.eligible: set[int] = set(range(num_workers)) - {wid}
        self.send_count = 0
        self.epoch = 0
        self.epoch_best: float = math.inf
        self.send_log: list[tuple[int, int]] = []   # (epoch, partner)
        self.events: list[ConvergenceEvent] = []

    def note_best(self) -> None:
        """Reset eligibility whenever the local best strictly improved."""
        if not self.population.members:
            return
        best = self.population.best().cut
        if best < self.epoch_best:
            self.epoch_best = best
            self.eligible = set(range(self.num_workers)) - {self.id}
            self.send_count = 0
            self.epoch += 1


def _copy_individual(ind: Individual) -> Individual:
    return Individual(ind.partition.copy(), ind.cut, ind.cut_edges)


def rumor_spread_step(ws: WorkerState, mailboxes: dict[int, Mailbox],
                      graph: Graph, cfg: PartitionerConfig,
                      now: float = 0.0) -> None:
    """Drain arrivals, then send the local best to one not-yet-contacted
    random peer while the per-epoch budget (ceil(log2 p)) lasts.

    Arrivals are re-validated before insertion; a strictly improved
    local best makes every peer eligible again.
    """
    arrivals = mailboxes[ws.id].drain()
    for ind in arrivals:
        cut, weights = ind.partition.recompute(graph)
        if cut != ind.cut or weights != ind.partition.block_weights:
            raise EngineError(
                f"worker {ws.id} received an individual whose cached cut "
                f"or weights are stale", ws.events)
        bound = compute_l_max(graph, cfg.k, cfg.eps)
        if any(w > bound for w in weights):
            raise EngineError(
                f"worker {ws.id} received an infeasible individual", ws.events)
        ws.events.append(ConvergenceEvent(ws.id, now, ind.cut))
        evict_insert(ws.population, ind, ws.rng)
    ws.note_best()
    if (ws.population.members and ws.send_count < ws.send_budget
            and ws.eligible):
        partner = ws.rng.choice(sorted(ws.eligible))
        best = ws.population.best()
        mailboxes[partner].post(_copy_individual(best))
        ws.eligible.discard(partner)
        ws.send_count += 1
        ws.send_log.append((ws.epoch, partner))


def quick_start_exchange(states: list[WorkerState], target_size: int,
                         rng: Random, log_time=None) -> None:
    """Random cyclic-permutation exchange rounds of the quick start.

    Run S - s' rounds; in each, every worker passes one uniformly random
    member to its successor on a fresh random cycle.
    """
    p = len(states)
    if p <= 1:
        return
    s_prime = math.ceil(target_size / p)
    for _ in range(max(0, target_size - s_prime)):
        order = list(range(p))
        rng.shuffle(order)
        picks = {}
        for ws in states:
            picks[ws.id] = _copy_individual(ws.rng.choice(ws.population.members))
        for pos, wid in enumerate(order):
            successor = order[(pos + 1) % p]
            received = picks[wid]
            if log_time is not None:
                states[successor].events.append(
                    ConvergenceEvent(successor, log_time(), received.cut))
            evict_insert(states[successor].population, received,
                         states[successor].rng)


def run(graph: Graph, engine: EngineConfig) -> tuple[Individual, list[ConvergenceEvent]]:
    """Algorithm: calibrate, quick-start the populations, then evolve
    asynchronously until the wall-clock budget runs out.

    Returns the best individual found anywhere and the merged
    convergence log (one event per created or received partition).
    """
    p = engine.workers
    seed_rng = Random(engine.seed)
    worker_seeds = [seed_rng.getrandbits(62) for _ in range(p)]
    coordinator_rng = Random(seed_rng.getrandbits(62))

    # Capacity is fixed after calibration; start with a generous shell.
    states = [WorkerState(i, p, capacity=1, seed=worker_seeds[i])
              for i in range(p)]
    mailboxes = {i: Mailbox(engine.mailbox_capacity) for i in range(p)}
    t_bars = [0.0] * p
    pop_size = [0]          # box written by worker 0 between barriers
    errors: list[tuple[int, str]] = []
    abort = threading.Event()
    barrier = threading.Barrier(p)
    start = time.perf_counter()

    def elapsed() -> float:
        return time.perf_counter() - start

    def make_individual(ws: WorkerState) -> Individual:
        cfg = engine.partitioner.reseeded(ws.rng.getrandbits(62))
        part = partition(graph, cfg)
        ind = Individual.from_partition(graph, part)
        ws.events.append(ConvergenceEvent(ws.id, elapsed(), ind.cut))
        return ind

    def sync(action=None):
        barrier.wait()
        result = action() if action is not None else None
        barrier.wait()
        return result

    def worker_body(ws: WorkerState) -> None:
        cfg = engine.partitioner
        state = NaturalCutState.for_graph(graph)
        t0 = time.perf_counter()
        first = make_individual(ws)
        t_bars[ws.id] = time.perf_counter() - t0

        def set_size():
            mean_t = sum(t_bars) / p
            pop_size[0] = estimate_population_size(mean_t, engine.t_total,
                                                   engine.fraction)
        sync(set_size if ws.id == 0 else None)
        size = pop_size[0]
        ws.population.capacity = size
        evict_insert(ws.population, first, ws.rng)
        s_prime = math.ceil(size / p)
        while len(ws.population) < s_prime and not abort.is_set():
            evict_insert(ws.population, make_individual(ws), ws.rng)
        sync((lambda: quick_start_exchange(states, size, coordinator_rng,
                                           log_time=elapsed))
             if ws.id == 0 else None)
        ws.note_best()

        iteration = 0
        creation_deadline = engine.t_total / engine.fraction
        while not abort.is_set():
            now = elapsed()
            if now >= engine.t_total:
                break
            if now < creation_deadline:
                offspring = make_individual(ws)
                evict_insert(ws.population, offspring, ws.rng)
            else:
                tag = pick_operator(engine.ratios, ws.rng)
                offspring = apply_operator(tag, graph, ws.population, state,
                                           cfg, ws.rng)
                ws.events.append(ConvergenceEvent(ws.id, elapsed(), offspring.cut))
                if offspring.partition.is_feasible():
                    evict_insert(ws.population, offspring, ws.rng)
            iteration += 1
            if iteration % engine.comm_period == 0:
                rumor_spread_step(ws, mailboxes, graph, cfg, now=elapsed())

    def worker_main(ws: WorkerState) -> None:
        try:
            worker_body(ws)
        except Exception:
            errors.append((ws.id, traceback.format_exc()))
            abort.set()
            # Unblock anyone waiting at a barrier.
            barrier.abort()

    threads = [threading.Thread(target=worker_main, args=(ws,), daemon=True)
               for ws in states]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    events = sorted((e for ws in states for e in ws.events),
                    key=lambda e: (e.t, e.worker))
    if errors:
        wid, tb = errors[0]
        raise EngineError(f"worker {wid} failed:\n{tb}", events)
    best = None
    for ws in states:
        cand = ws.population.best_ever
        if cand is not None and (best is None or cand.cut < best.cut):
            best = cand
    assert best is not None
    return best, events
