"""2D approximation of a function with a small jump set by a jump-free one.

Pipeline: extend to the collar S', cover the jump set with balls, grow the
balls to a horizon T, pick a good stopping time t0 by minimizing the
boundary energy profile, fill each surviving ball radially from its
boundary trace, and stitch.  The output agrees with the input node-exactly
outside the union of the filled balls and carries no jump-cut cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .balls import Ball, ConstructionTrace, run_construction
from .errors import BudgetViolation, JumpSetTooLarge, PreconditionError
from .gsbv import (JumpCurve, PiecewiseFunction2D, covering_constant,
                   dirichlet_energy, extend, jump_mass, segments_cross,
                   vitali_cover)
from .report import EnergyReport

# Energy constant of the radial fill: patch energy <= (1 + pi^(p+1)) * r *
# boundary energy of the trace it interpolates.
def radial_fill_constant(p: float) -> float:
    return 1.0 + math.pi ** (p + 1)


@dataclass
class ExceptionalSet:
    """Union of disjoint disks; perimeter is the exact sum of circumferences."""
    disks: list[Ball]

    def perimeter(self) -> float:
        return 2 * math.pi * sum(b.radius for b in self.disks)

    def radii_sum(self) -> float:
        return sum(b.radius for b in self.disks)

    def area(self) -> float:
        return math.pi * sum(b.radius ** 2 for b in self.disks)

    def contains(self, pts: np.ndarray, slack: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(pts)
        out = np.zeros(len(pts), dtype=bool)
        for b in self.disks:
            d2 = (pts[:, 0] - b.center[0]) ** 2 + (pts[:, 1] - b.center[1]) ** 2
            out |= d2 <= (b.radius + slack) ** 2
        return out


@dataclass
class ApproxResult2D:
    w: PiecewiseFunction2D
    omega: ExceptionalSet
    t0: float
    T: float
    trace: ConstructionTrace
    report: EnergyReport
    residual_jump_points: int = 0


def select_t0(trace: ConstructionTrace, U: PiecewiseFunction2D, T: float,
              n_times: int = 64, n_angles: int = 128):
    """Stopping time in (0, T) minimizing sum_i r_i * (circle integral of
    |grad U|^p over dB_i intersected with S').

    Returns (t0, profile_value).  The sampled times are subinterval
    midpoints, nudged off event times.
    """
    if T <= 0:
        raise PreconditionError("horizon T must be positive")
    if not trace.active_at(0.0):
        return T / 2, 0.0
    gradp = U.gradient_p_field()
    outer_mask_fn = lambda pts: U.domain.contains(pts, "outer")
    ev = np.array(trace.event_times())
    best_t, best_val = None, math.inf
    for k in range(n_times):
        t = T * (k + 0.5) / n_times
        if ev.size and np.any(np.abs(ev - t) < 1e-9):
            t += 1e-9
        val = _profile_value(trace, t, gradp, outer_mask_fn, n_angles)
        if val < best_val:
            best_t, best_val = t, val
    return best_t, best_val


def _profile_value(trace, t, gradp, outer_mask_fn, n_angles):
    total = 0.0
    for b in trace.active_at(t):
        ang = 2 * np.pi * np.arange(n_angles) / n_angles
        pts = np.stack([b.center[0] + b.radius * np.cos(ang),
                        b.center[1] + b.radius * np.sin(ang)], axis=1)
        vals = gradp.sample(pts) * outer_mask_fn(pts)
        ring = 2 * np.pi * b.radius * float(np.mean(vals))
        total += b.radius * ring
    return total


def boundary_trace(U: PiecewiseFunction2D, ball: Ball, n_samples: int | None = None):
    """Sampled trace of U on the circle, with jump crossings per arc.

    Returns (angles, values, crossed) where ``crossed[k]`` flags a jump
    crossing on the chord between samples k and k+1 (periodic).
    """
    h = U.domain.spacing
    if n_samples is None:
        n_samples = max(16, 4 * int(math.ceil(2 * math.pi * ball.radius / h)))
    ang = 2 * np.pi * np.arange(n_samples) / n_samples
    pts = np.stack([ball.center[0] + ball.radius * np.cos(ang),
                    ball.center[1] + ball.radius * np.sin(ang)], axis=1)
    from .grids import GridField2D
    fld = GridField2D(origin=U.domain.origin, spacing=h, values=U.values)
    vals = fld.sample(pts)
    crossed = np.zeros(n_samples, dtype=bool)
    nxt = np.roll(pts, -1, axis=0)
    for curve in U.jump_curves:
        for a, b in zip(*curve.segments()):
            crossed |= segments_cross(pts, nxt, a, b)
    return ang, vals, crossed


def radial_fill(U: PiecewiseFunction2D, ball: Ball, n_samples: int | None = None):
    """Values of the radial interpolation at grid nodes strictly inside the ball.

    value((1-theta) c + theta z) = (1-theta) * (boundary mean) + theta * U(z).
    Jumps of the boundary trace are preserved radially: across a crossed
    arc the trace is not interpolated (nearest sample wins).

    Returns (mask, values, info): ``mask`` selects the patched nodes on the
    full grid, ``values`` are their new values, ``info`` carries the
    boundary mean and crossing count.
    """
    d = U.domain
    pts_check = _circle_pts(ball, 64)
    if not np.all(d.contains(pts_check, "outer")):
        raise BudgetViolation(
            f"ball {ball.id} at radius {ball.radius:.4g} escapes S'")
    ang, g, crossed = boundary_trace(U, ball, n_samples)
    mean = float(np.mean(g))
    X, Y = d.node_points()
    dx = X - ball.center[0]
    dy = Y - ball.center[1]
    rho = np.hypot(dx, dy)
    mask = rho < ball.radius * (1 - 1e-12)
    theta = rho[mask] / ball.radius
    phi = np.mod(np.arctan2(dy[mask], dx[mask]), 2 * np.pi)
    n = len(ang)
    fidx = phi / (2 * np.pi) * n
    k0 = fidx.astype(int) % n
    frac = fidx - np.floor(fidx)
    k1 = (k0 + 1) % n
    lin = (1 - frac) * g[k0] + frac * g[k1]
    near = np.where(frac < 0.5, g[k0], g[k1])
    bvals = np.where(crossed[k0], near, lin)
    vals = (1 - theta) * mean + theta * bvals
    info = {"mean": mean, "n_samples": n, "crossings": int(crossed.sum())}
    return mask, vals, info


def _circle_pts(ball, n):
    ang = 2 * np.pi * np.arange(n) / n
    return np.stack([ball.center[0] + ball.radius * np.cos(ang),
                     ball.center[1] + ball.radius * np.sin(ang)], axis=1)


def radial_patch_energy(trace_values: np.ndarray, p: float, radius: float) -> float:
    """Exact polar-quadrature energy of the radial fill of a boundary trace.

    For w((1-t)c + t z(phi)) = (1-t) m + t g(phi) the gradient magnitude is
    independent of the radial coordinate, so the disk integral collapses to
    a circle quadrature:  E = r^(2-p)/2 * integral ((g-m)^2 + g'^2)^(p/2).
    """
    g = np.asarray(trace_values, dtype=float)
    n = len(g)
    m = float(np.mean(g))
    dphi = 2 * np.pi / n
    gp = (np.roll(g, -1) - np.roll(g, 1)) / (2 * dphi)
    integrand = ((g - m) ** 2 + gp ** 2) ** (p / 2.0)
    return float(radius ** (2 - p) / 2.0 * integrand.sum() * dphi)


def boundary_trace_energy(trace_values: np.ndarray, p: float, radius: float) -> float:
    """r * circle integral of |tangential derivative|^p for a sampled trace."""
    g = np.asarray(trace_values, dtype=float)
    n = len(g)
    dphi = 2 * np.pi / n
    gp = (np.roll(g, -1) - np.roll(g, 1)) / (2 * dphi * radius)
    return float(radius * (np.abs(gp) ** p).sum() * radius * dphi)


def eta_budget(domain, cover_const: float) -> float:
    """Measured smallness budget: margin / (2 * covering constant)."""
    return domain.margin / (2.0 * max(cover_const, 1e-12))


def approximate_2d(u: PiecewiseFunction2D, T: float = 1.0,
                   cover_radius: float | None = None,
                   n_times: int = 64) -> ApproxResult2D:
    """Full 2D pipeline; refuses (JumpSetTooLarge) if the jump set exceeds
    the measured budget e^(-T) * eta(S)."""
    d = u.domain
    if cover_radius is None:
        cover_radius = 2 * d.spacing
    h1 = jump_mass(u.jump_curves) if u.jump_curves else 0.0
    report = EnergyReport()
    energy_u = dirichlet_energy(u)

    if h1 == 0.0:
        w = PiecewiseFunction2D(domain=d, values=u.values.copy(),
                                jump_curves=[], p=u.p, region="inner")
        report.add("jump_mass_H1", 0.0)
        report.add("energy_u", energy_u)
        report.add("energy_w", energy_u, bound=energy_u, tag="energy factor 1+C/T")
        report.add("perimeter_omega", 0.0, bound=0.0, tag="perimeter bound")
        empty = ExceptionalSet(disks=[])
        return ApproxResult2D(w=w, omega=empty, t0=T / 2, T=T,
                              trace=run_construction([], T), report=report)

    U = extend(u)
    cover = vitali_cover(U.jump_curves, cover_radius)
    c_cov = covering_constant(cover, U.jump_curves)
    eta = eta_budget(d, c_cov)
    budget = math.exp(-T) * eta
    if h1 > budget:
        max_T = math.log(eta / h1) if h1 < eta else 0.0
        raise JumpSetTooLarge(
            f"H1(J_u) = {h1:.4g} exceeds the budget e^-T * eta(S) = "
            f"{budget:.4g} (measured eta = {eta:.4g}); maximal admissible "
            f"T = {max_T:.4g}", max_T=max_T)

    trace = run_construction(cover, t_end=T)
    t0, profile = select_t0(trace, U, T, n_times=n_times)
    mean_bound = energy_u / T
    report.add("profile_at_t0", profile, bound=mean_bound, slack=0.05,
               tag="mean value selection", warn_only=True)

    active = trace.active_at(t0)
    keep = [b for b in active
            if np.any(d.contains(_circle_pts(b, 32), "inner"))
            or d.contains(np.array([b.center]), "inner")[0]]
    w_values = U.values.copy()
    for b in keep:
        mask, vals, info = radial_fill(U, b)
        w_values[mask] = vals

    omega = ExceptionalSet(disks=list(active))
    residual = _uncovered_jump_points(u.jump_curves, omega, d.spacing)
    w_curves = [] if residual == 0 else list(u.jump_curves)
    w = PiecewiseFunction2D(domain=d, values=w_values, jump_curves=w_curves,
                            p=u.p, region="inner")
    energy_w = dirichlet_energy(w)

    report.add("jump_mass_H1", h1)
    report.add("cover_radii_sum", sum(b.radius for b in cover))
    report.add("covering_constant", c_cov)
    report.add("eta_budget", eta)
    report.add("extension_energy_ratio", U.meta["energy_ratio"])
    report.add("extension_jump_ratio", U.meta["jump_ratio"])
    report.add("t0", t0)
    report.add("energy_u", energy_u)
    report.add("energy_w", energy_w)
    c_energy = (energy_w / energy_u - 1.0) * T if energy_u > 0 else 0.0
    report.add("energy_excess_constant", max(c_energy, 0.0),
               tag="energy factor 1+C/T")
    per = omega.perimeter()
    report.add("perimeter_omega", per,
               bound=2 * math.pi * c_cov * U.meta["jump_ratio"] * math.exp(T) * h1,
               slack=1e-9, tag="perimeter bound")
    report.add("radii_sum_t0", omega.radii_sum(),
               bound=math.exp(T) * sum(b.radius for b in cover), slack=1e-9,
               tag="radii growth bound")
    report.add("residual_jump_points", residual, bound=0.0,
               tag="jump coverage at t0")
    return ApproxResult2D(w=w, omega=omega, t0=t0, T=T, trace=trace,
                          report=report, residual_jump_points=residual)


def _uncovered_jump_points(curves: list[JumpCurve], omega: ExceptionalSet,
                           spacing: float) -> int:
    bad = 0
    for c in curves:
        pts = c.sample(spacing / 4)
        bad += int(np.count_nonzero(~omega.contains(pts, slack=1e-9)))
    return bad
