"""Event-driven growth-and-merge construction for planar disks.

Disks grow exponentially, ``r(t) = r(s) * e^(t-s)``, and merge on contact
into a disk of summed radii centered at the radius-weighted average.
Because every radius carries the same growth factor, a disk is fully
described by its center and its *normalized* radius ``r0 = r(t) * e^(-t)``;
merging adds normalized radii, and the contact time of a disjoint pair is
the closed form ``ln(|x_i - x_j| / (r0_i + r0_j))`` independent of the
current time.  The event loop below exploits this: it is exact up to
floating point, with no time stepping.
"""

from __future__ import annotations

import csv
import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, PreconditionError, ValidationError
from .grids import GridField2D, circle_points

# Two closures count as intersecting when |x-x'| <= (r+r')(1 + TANGENCY_TOL);
# prevents infinite event loops at exact tangency.
TANGENCY_TOL = 1e-12


@dataclass(frozen=True)
class Ball:
    center: tuple[float, float]
    radius: float
    id: int = 0

    def contains_point(self, p, slack=0.0) -> bool:
        return math.hypot(p[0] - self.center[0], p[1] - self.center[1]) <= self.radius + slack


def merge_pair(b: Ball, b2: Ball, new_id: int | None = None) -> Ball:
    """Merged ball: summed radii, radius-weighted center.

    Contains the union of the inputs whenever their closures intersect.
    """
    r, r2 = b.radius, b2.radius
    if r + r2 <= 0:
        raise DegenerateInputError("merge_pair requires positive total radius")
    w = r / (r + r2)
    cx = w * b.center[0] + (1 - w) * b2.center[0]
    cy = w * b.center[1] + (1 - w) * b2.center[1]
    return Ball(center=(cx, cy), radius=r + r2,
                id=new_id if new_id is not None else max(b.id, b2.id))


def next_collision_time(active_family: list[Ball], t_now: float = 0.0):
    """First contact time of any pair, or None if fewer than two balls.

    The family must be pairwise disjoint (closures) at ``t_now``.
    """
    n = len(active_family)
    if n <= 1:
        return None
    best = math.inf
    for a in range(n):
        for b in range(a + 1, n):
            ba, bb = active_family[a], active_family[b]
            d = math.hypot(ba.center[0] - bb.center[0], ba.center[1] - bb.center[1])
            rsum = ba.radius + bb.radius
            if d < rsum * (1 - 1e-9):
                raise PreconditionError(
                    f"balls {ba.id} and {bb.id} overlap at t={t_now}")
            t = t_now + math.log(max(d / rsum, 1.0))
            best = min(best, t)
    return best


@dataclass
class _Record:
    """Lifetime of one ball in normalized-radius form."""
    id: int
    center: tuple[float, float]
    r0: float  # radius at t=0 scale: r(t) = r0 * e^t
    birth: float
    death: float = math.inf
    parents: tuple[int, ...] = ()


@dataclass(frozen=True)
class MergeEvent:
    time: float
    consumed: tuple[int, int]
    produced: Ball  # radius as of the event time


@dataclass
class ConstructionTrace:
    """Full history of one growth-and-merge run.

    Immutable after construction; query with :meth:`active_at`.
    """
    initial_balls: list[Ball]
    events: list[MergeEvent]
    collapse_times: dict[int, float]
    t_end: float
    dropped_ids: list[int] = field(default_factory=list)
    _records: list[_Record] = field(default_factory=list)

    def active_records(self, t: float) -> list[_Record]:
        if t < 0:
            raise PreconditionError("query time must be nonnegative")
        if t > self.t_end:
            raise PreconditionError(f"trace only valid on [0, {self.t_end}]")
        return [r for r in self._records if r.birth <= t < r.death]

    def active_at(self, t: float) -> list[Ball]:
        """Active family {B_i^t}; radii are r0 * e^t."""
        g = math.exp(t)
        return [Ball(center=r.center, radius=r.r0 * g, id=r.id)
                for r in self.active_records(t)]

    def radii_sum(self, t: float) -> float:
        g = math.exp(t)
        return g * sum(r.r0 for r in self.active_records(t))

    def event_times(self) -> list[float]:
        return [e.time for e in self.events]

    def union_contains(self, pts: np.ndarray, t: float, slack: float = 1e-9) -> np.ndarray:
        """Boolean mask: which points lie in the union of active balls at t."""
        pts = np.atleast_2d(pts)
        out = np.zeros(len(pts), dtype=bool)
        for b in self.active_at(t):
            d2 = (pts[:, 0] - b.center[0]) ** 2 + (pts[:, 1] - b.center[1]) ** 2
            out |= d2 <= (b.radius + slack) ** 2
        return out

    def to_event_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "consumed_ids", "new_id", "cx", "cy", "r"])
            for e in self.events:
                w.writerow([repr(e.time), " ".join(str(i) for i in e.consumed),
                            e.produced.id, repr(e.produced.center[0]),
                            repr(e.produced.center[1]), repr(e.produced.radius)])


def balls_to_json(balls: list[Ball]) -> str:
    return json.dumps([{"id": b.id, "cx": b.center[0], "cy": b.center[1],
                        "r": b.radius} for b in balls], sort_keys=True)


def balls_from_json(text: str) -> list[Ball]:
    out = []
    for rec in json.loads(text):
        out.append(Ball(center=(float(rec["cx"]), float(rec["cy"])),
                        radius=float(rec["r"]), id=int(rec["id"])))
    return out


def _pair_time(ra: _Record, rb: _Record) -> float:
    d = math.hypot(ra.center[0] - rb.center[0], ra.center[1] - rb.center[1])
    rsum = ra.r0 + rb.r0
    if rsum <= 0:
        return math.inf
    if d <= rsum * (1 + TANGENCY_TOL):
        return 0.0
    return math.log(d / rsum)


def run_construction(initial: list[Ball], t_end: float = math.inf) -> ConstructionTrace:
    """Grow the family to ``t_end``, merging on contact.

    Overlapping input closures are merged at t=0 (consumed ids get collapse
    time 0).  Simultaneous contacts at one event time are resolved by
    repeated merging in ascending id order until closures are disjoint.
    """
    if t_end < 0:
        raise PreconditionError("t_end must be nonnegative")
    dropped = [b.id for b in initial if b.radius == 0]
    live: dict[int, _Record] = {}
    collapse: dict[int, float] = {}
    for b in initial:
        if b.radius < 0:
            raise PreconditionError(f"negative radius on ball {b.id}")
        if b.radius == 0:
            continue
        if b.id in live:
            raise PreconditionError(f"duplicate ball id {b.id}")
        live[b.id] = _Record(id=b.id, center=tuple(map(float, b.center)),
                             r0=float(b.radius), birth=0.0)
    records: list[_Record] = list(live.values())
    events: list[MergeEvent] = []
    next_id = max((b.id for b in initial), default=-1) + 1

    # Event queue keyed on closed-form pairwise contact times; ties resolve
    # in ascending id order through the heap key.
    heap: list[tuple[float, int, int]] = []
    ids = sorted(live)
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            t = _pair_time(live[ids[a]], live[ids[b]])
            if t < math.inf:
                heapq.heappush(heap, (t, ids[a], ids[b]))

    t_now = 0.0
    while heap:
        t, ia, ib = heapq.heappop(heap)
        if ia not in live or ib not in live:
            continue
        t = max(t, t_now)  # merged ball may already touch a neighbor
        if t > t_end:
            break
        t_now = t
        ra, rb = live.pop(ia), live.pop(ib)
        ra.death = rb.death = t
        collapse[ia] = collapse[ib] = t
        g = math.exp(t)
        w = ra.r0 / (ra.r0 + rb.r0)
        center = (w * ra.center[0] + (1 - w) * rb.center[0],
                  w * ra.center[1] + (1 - w) * rb.center[1])
        rec = _Record(id=next_id, center=center, r0=ra.r0 + rb.r0, birth=t,
                      parents=(ia, ib))
        next_id += 1
        events.append(MergeEvent(time=t, consumed=(ia, ib),
                                 produced=Ball(center=center, radius=rec.r0 * g,
                                               id=rec.id)))
        for other in live.values():
            tt = _pair_time(rec, other)
            if tt < math.inf:
                heapq.heappush(heap, (max(tt, t), min(rec.id, other.id),
                                      max(rec.id, other.id)))
        live[rec.id] = rec
        records.append(rec)

    for rec in live.values():
        collapse.setdefault(rec.id, math.inf)
    return ConstructionTrace(initial_balls=list(initial), events=events,
                             collapse_times=collapse, t_end=t_end,
                             dropped_ids=dropped, _records=records)


def truncated_countable_construction(balls, n_max: int,
                                     t_end: float = math.inf) -> list[ConstructionTrace]:
    """Traces of the prefix families N=1..n_max.

    The N = n_max trace stands in for the countable construction; by the
    monotonicity property the unions only grow and the collapse times only
    shrink with N.  ``balls`` may be any iterable (a generator is truncated
    at n_max).
    """
    pool: list[Ball] = []
    for b in balls:
        pool.append(b)
        if len(pool) >= n_max:
            break
    total = sum(b.radius for b in pool)
    if not math.isfinite(total):
        raise PreconditionError("total radius of the truncation must be finite")
    return [run_construction(pool[:n], t_end) for n in range(1, len(pool) + 1)]


def boundary_energy_profile(trace: ConstructionTrace, f: GridField2D,
                            times, n_angles: int = 256,
                            event_tol: float = 1e-9):
    """Profile t -> sum_i r_i^t * (integral of f over the circle dB_i^t).

    Circle integrals use uniform-angle quadrature with ``n_angles`` samples;
    ``f`` is sampled bilinearly and vanishes outside its grid.  Query times
    landing on an event are nudged forward by ``event_tol``.
    """
    if np.any(f.values < 0):
        raise ValidationError("boundary_energy_profile requires nonnegative f")
    ev = np.array(trace.event_times())
    out = []
    for t in times:
        if ev.size and np.any(np.abs(ev - t) < event_tol):
            t = t + event_tol
        total = 0.0
        for b in trace.active_at(t):
            pts = circle_points(b.center, b.radius, n_angles)
            ring = 2 * np.pi * b.radius * float(np.mean(f.sample(pts)))
            total += b.radius * ring
        out.append((t, total))
    return out


def time_integrated_profile(trace: ConstructionTrace, f: GridField2D,
                            t_max: float | None = None, n_times: int = 400,
                            n_angles: int = 256) -> float:
    """Trapezoid integral over time of the boundary energy profile.

    Bounded by the integral of f (Fubini-type estimate).  ``t_max`` defaults
    to the time at which every ball has outgrown the support of f.
    """
    if t_max is None:
        xs, ys = f.node_coords()
        far = math.hypot(xs[-1] - xs[0], ys[-1] - ys[0]) + max(
            abs(xs[0]) + abs(ys[0]), 1.0)
        rmin = min((b.radius for b in trace.active_at(0.0)), default=1.0)
        t_max = max(math.log(max(2 * far / rmin, 2.0)), 1.0)
        t_max = min(t_max, trace.t_end)
    ts = np.linspace(0.0, t_max, n_times)
    vals = np.array([v for _, v in boundary_energy_profile(
        trace, f, ts, n_angles=n_angles)])
    return float(np.trapezoid(vals, ts))
