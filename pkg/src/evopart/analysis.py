"""Convergence analysis: running-minimum sequences, normalized time,
event-based geometric means over instances and pseudo speedups."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

log = logging.getLogger(__name__)

Point = tuple[float, float]      # (time, cut)


@dataclass
class NormalizedSequence:
    """A min-prefix curve over normalized time, tagged with its instance."""
    label: str
    points: list[Point]


def min_prefix(events) -> list[Point]:
    """Running minimum of (t, cut) events merged and sorted by time.

    Accepts (t, cut) pairs or objects with .t and .cut attributes.
    """
    pairs = []
    for e in events:
        if hasattr(e, "t"):
            pairs.append((float(e.t), float(e.cut)))
        else:
            t, cut = e[0], e[1]
            pairs.append((float(t), float(cut)))
    pairs.sort(key=lambda p: p[0])
    out: list[Point] = []
    running = math.inf
    for t, cut in pairs:
        running = min(running, cut)
        out.append((t, running))
    return out


def normalize(points: list[Point], t_ref: float) -> list[Point]:
    """Divide every timestamp by the reference partitioner time."""
    if t_ref <= 0:
        raise ValueError("reference time must be positive")
    return [(t / t_ref, cut) for t, cut in points]


def event_geomean(seqs: list[NormalizedSequence]) -> list[Point]:
    """Event-based geometric mean over instances.

    The mean starts from each instance's first cut; every later event
    replaces that instance's current value and re-emits the mean.  Cuts
    of zero enter as one (with a warning) so the mean stays defined.
    """
    live = [s for s in seqs if s.points]
    if not live:
        return []
    if len(live) < len(seqs):
        raise ValueError("every instance must contribute at least one event")

    def guarded(cut: float) -> float:
        if cut < 1.0:
            log.warning("cut value %s clamped to 1 for the geometric mean", cut)
            return 1.0
        return cut

    current: dict[str, float] = {}
    tagged: list[tuple[float, float, str]] = []
    for s in live:
        pts = min_prefix(s.points)
        current[s.label] = guarded(pts[0][1])
        for t, cut in pts:
            tagged.append((t, cut, s.label))
    tagged.sort(key=lambda item: item[0])

    def mean() -> float:
        return math.exp(sum(math.log(v) for v in current.values()) / len(current))

    out: list[Point] = []
    for t, cut, label in tagged:
        current[label] = min(current[label], guarded(cut))
        out.append((t, mean()))
    return out


def _earliest_time_reaching(curve: list[Point], quality: float) -> float | None:
    """First time the non-increasing curve gets down to `quality`."""
    for t, cut in curve:
        if cut <= quality:
            return t
    return None


def pseudo_speedup(base: list[Point], par: list[Point]) -> list[Point]:
    """Speedup of `par` over `base` at each base event's quality level.

    For a base event (t_n, c) the speedup is the ratio of the earliest
    times each curve reached quality c; when the parallel curve never
    gets there the speedup is reported as 0.
    """
    base_curve = min_prefix(base)
    par_curve = min_prefix(par)
    out: list[Point] = []
    for t_n, c in base_curve:
        t_base = _earliest_time_reaching(base_curve, c)
        t_par = _earliest_time_reaching(par_curve, c)
        if t_par is None:
            out.append((t_n, 0.0))
        elif t_par == 0.0:
            out.append((t_n, 1.0 if t_base == 0.0 else math.inf))
        else:
            out.append((t_n, t_base / t_par))
    return out
