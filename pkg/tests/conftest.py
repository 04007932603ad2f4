"""Shared fixtures and independent oracles for the test suite."""

import math

import numpy as np
import pytest

from jumpfree.balls import Ball
from jumpfree.mumford_shah import Function1D


def report_values(report):
    return {e.name: e.value for e in report.entries}


def two_ball_step_oracle(b1: Ball, b2: Ball, t_final: float,
                         dt: float = 1e-3):
    """Time-stepping simulation of two growing disks merging on contact.

    Each step multiplies radii by e^dt; on overshoot the contact time is
    refined by bisection inside the step before merging at the
    radius-weighted center.  Independent of the event engine's closed-form
    contact times.  Returns the list of balls at ``t_final``.
    """
    balls = [(np.array(b1.center, dtype=float), b1.radius),
             (np.array(b2.center, dtype=float), b2.radius)]
    t = 0.0

    def touching(f, scale):
        if len(f) < 2:
            return False
        (c1, r1), (c2, r2) = f
        return np.hypot(*(c1 - c2)) <= (r1 + r2) * scale

    while t < t_final:
        step = min(dt, t_final - t)
        grown = [(c, r * math.exp(step)) for c, r in balls]
        if touching(grown, 1.0) and not touching(balls, 1.0 + 1e-12):
            lo, hi = 0.0, step
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if touching([(c, r * math.exp(mid)) for c, r in balls], 1.0):
                    hi = mid
                else:
                    lo = mid
            tc = 0.5 * (lo + hi)
            at = [(c, r * math.exp(tc)) for c, r in balls]
            (c1, r1), (c2, r2) = at
            w = r1 / (r1 + r2)
            balls = [(w * c1 + (1 - w) * c2, r1 + r2)]
            t += tc
            continue
        balls = grown
        t += step
    return [Ball(center=tuple(c), radius=r, id=i)
            for i, (c, r) in enumerate(balls)]


def make_jump_triple(seed: int, N: int, M: int, n: int = 400):
    """Seeded (u, v, A) with #J_u = N, #J_v = M on a shared grid.

    The family is deliberately homogeneous -- fixed unit jump sizes, fixed
    spike spacing, seeded positions/phases -- so that the measured
    jump-removal constants concentrate.
    """
    rng = np.random.default_rng(np.uint64(seed * 1000003 + 17 * N + M))
    xs = (np.arange(n) + 0.5) / n
    smooth = 0.5 * np.sin(2 * np.pi * xs + rng.uniform(0, 2 * np.pi))

    u_locs = sorted(rng.uniform(0.6, 0.8, size=N))
    u_vals = smooth.copy()
    for x in u_locs:
        u_vals[xs > x] += 1.0
    u_jumps = []
    for x in u_locs:
        k = int(np.searchsorted(xs, x))
        u_jumps.append((float(x), float(u_vals[k - 1]), float(u_vals[k])))
    u = Function1D((0.0, 1.0), u_vals, u_jumps, p=2.0)

    v_vals = smooth.copy()
    v_locs = list(u_locs)
    base_x = rng.uniform(0.25, 0.4)
    k = 0
    while len(v_locs) < M:
        v_locs.append(base_x + k * 0.015)
        k += 1
    v_locs = sorted(float(x) for x in v_locs)
    for x in v_locs:
        v_vals[xs > x] += 1.0
    v_jumps = []
    for x in v_locs:
        kk = int(np.searchsorted(xs, x))
        v_jumps.append((float(x), float(v_vals[kk - 1]), float(v_vals[kk])))
    v = Function1D((0.0, 1.0), v_vals, v_jumps, p=2.0)
    return u, v, []


@pytest.fixture
def bump_field():
    """Nonnegative compactly supported field on [0, 1]^2."""
    from jumpfree.grids import GridField2D
    xs = np.linspace(0, 1, 65)
    X, Y = np.meshgrid(xs, xs)
    return GridField2D(origin=(0.0, 0.0), spacing=1 / 64,
                       values=np.sin(np.pi * X) ** 2 * np.sin(np.pi * Y) ** 2)
