"""Discrete model of functions with explicit jump sets, in 2D and 3D.

A 2D function is a node grid over an extended domain S' plus a list of
polygonal jump curves carrying one-sided traces.  A 3D function is a stack
of 2D slices over an interval I plus explicit jump surfaces (triangles,
x1-axis cylinders, or x1=const planes) with unit normals nu = (nu1, nu').
The jump geometry is exact; Hausdorff masses are computed from it directly
rather than recovered from grid data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .balls import Ball
from .errors import PreconditionError, UsageError, ValidationError
from .grids import GridField2D

_EPS = 1e-12


# ---------------------------------------------------------------------------
# domains

@dataclass
class Domain2D:
    """Rectangle or disk S with an extension collar S' of width ``margin``.

    The node grid covers S'.  For rectangles the bounds and the margin are
    snapped to the grid so that extension by reflection is index mirroring.
    """
    shape: str  # "rectangle" | "disk"
    margin: float
    spacing: float
    bounds: tuple[float, float, float, float] | None = None  # rectangle
    center: tuple[float, float] | None = None  # disk
    radius: float | None = None  # disk

    def __post_init__(self):
        if self.margin <= 0:
            raise ValidationError([("domain.margin", "must be > 0")])
        if self.spacing <= 0:
            raise ValidationError([("domain.spacing", "must be > 0")])
        h = self.spacing
        self._k = max(1, int(round(self.margin / h)))
        self.margin = self._k * h
        if self.shape == "rectangle":
            if self.bounds is None:
                raise ValidationError([("domain.bounds", "required for rectangle")])
            xmin, xmax, ymin, ymax = self.bounds
            nxi = max(1, int(round((xmax - xmin) / h)))
            nyi = max(1, int(round((ymax - ymin) / h)))
            self.bounds = (xmin, xmin + nxi * h, ymin, ymin + nyi * h)
            self._inner_nodes = (nxi + 1, nyi + 1)
            self.origin = (xmin - self.margin, ymin - self.margin)
            self.nx = nxi + 2 * self._k + 1
            self.ny = nyi + 2 * self._k + 1
        elif self.shape == "disk":
            if self.center is None or self.radius is None:
                raise ValidationError([("domain.center", "center/radius required for disk")])
            half = self.radius + self.margin
            n = int(math.ceil(2 * half / h))
            self.origin = (self.center[0] - half, self.center[1] - half)
            self.nx = n + 1
            self.ny = n + 1
        else:
            raise ValidationError([("domain.shape", f"unknown shape {self.shape!r}")])

    # -- node coordinates ---------------------------------------------------
    def xs(self):
        return self.origin[0] + self.spacing * np.arange(self.nx)

    def ys(self):
        return self.origin[1] + self.spacing * np.arange(self.ny)

    def node_points(self):
        X, Y = np.meshgrid(self.xs(), self.ys())
        return X, Y

    def contains(self, pts: np.ndarray, which: str = "inner") -> np.ndarray:
        pts = np.atleast_2d(pts)
        if self.shape == "rectangle":
            xmin, xmax, ymin, ymax = self.bounds
            if which == "outer":
                xmin, xmax = xmin - self.margin, xmax + self.margin
                ymin, ymax = ymin - self.margin, ymax + self.margin
            return ((pts[:, 0] >= xmin - _EPS) & (pts[:, 0] <= xmax + _EPS)
                    & (pts[:, 1] >= ymin - _EPS) & (pts[:, 1] <= ymax + _EPS))
        r = self.radius + (self.margin if which == "outer" else 0.0)
        d = np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])
        return d <= r + _EPS

    def node_mask(self, which: str = "inner") -> np.ndarray:
        X, Y = self.node_points()
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        return self.contains(pts, which).reshape(self.ny, self.nx)

    def cell_mask(self, which: str = "inner") -> np.ndarray:
        m = self.node_mask(which)
        return m[:-1, :-1] & m[:-1, 1:] & m[1:, :-1] & m[1:, 1:]

    def cell_centers(self):
        xs, ys = self.xs(), self.ys()
        cx = 0.5 * (xs[:-1] + xs[1:])
        cy = 0.5 * (ys[:-1] + ys[1:])
        X, Y = np.meshgrid(cx, cy)
        return X, Y

    def area(self, which: str = "inner") -> float:
        """Analytic area of S (or S')."""
        if self.shape == "rectangle":
            xmin, xmax, ymin, ymax = self.bounds
            w, hgt = xmax - xmin, ymax - ymin
            if which == "outer":
                w, hgt = w + 2 * self.margin, hgt + 2 * self.margin
            return w * hgt
        r = self.radius + (self.margin if which == "outer" else 0.0)
        return math.pi * r * r

    def inner_window(self):
        """Node index window (j0, j1, i0, i1) of S, inclusive (rectangle only)."""
        if self.shape != "rectangle":
            raise UsageError("inner_window is defined for rectangles")
        k = self._k
        return k, self.ny - 1 - k, k, self.nx - 1 - k


# ---------------------------------------------------------------------------
# 2D jump curves

@dataclass
class JumpCurve:
    """Polyline jump with one-sided traces (functions of arclength)."""
    points: np.ndarray
    left: object = None  # callable s -> value, or None
    right: object = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 2:
            raise ValidationError([("jump_curve.points", "need at least 2 points")])
        seg = np.diff(self.points, axis=0)
        self._seg_len = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(self._seg_len <= 0):
            raise ValidationError([("jump_curve.points", "zero-length segment")])

    def length(self) -> float:
        return float(self._seg_len.sum())

    def segments(self):
        return self.points[:-1], self.points[1:]

    def normals(self) -> np.ndarray:
        """Unit normal per segment (left of the direction of travel)."""
        seg = np.diff(self.points, axis=0)
        n = np.stack([-seg[:, 1], seg[:, 0]], axis=1)
        return n / self._seg_len[:, None]

    def sample(self, spacing: float) -> np.ndarray:
        """Points along the curve at arclength spacing <= ``spacing``."""
        out = []
        for a, b, ln in zip(self.points[:-1], self.points[1:], self._seg_len):
            n = max(2, int(math.ceil(ln / spacing)) + 1)
            t = np.linspace(0.0, 1.0, n)
            out.append(a[None, :] * (1 - t)[:, None] + b[None, :] * t[:, None])
        return np.vstack(out)


def _cross2(ax, ay, bx, by):
    return ax * by - ay * bx

def segments_cross(P0, P1, q0, q1, tol=_EPS):
    """Which of the segments (P0[i], P1[i]) intersect segment (q0, q1)."""
    P0 = np.atleast_2d(P0)
    P1 = np.atleast_2d(P1)
    d = P1 - P0
    e = np.asarray(q1, float) - np.asarray(q0, float)
    denom = _cross2(d[:, 0], d[:, 1], e[0], e[1])
    w0 = np.asarray(q0, float) - P0
    s = np.where(np.abs(denom) > tol,
                 _cross2(w0[:, 0], w0[:, 1], e[0], e[1]) / np.where(denom == 0, 1.0, denom),
                 np.nan)
    u = np.where(np.abs(denom) > tol,
                 _cross2(w0[:, 0], w0[:, 1], d[:, 0], d[:, 1]) / np.where(denom == 0, 1.0, denom),
                 np.nan)
    ok = (~np.isnan(s)) & (s >= -tol) & (s <= 1 + tol) & (u >= -tol) & (u <= 1 + tol)
    return ok


def clip_polyline_to_box(points: np.ndarray, box) -> list[np.ndarray]:
    """Clip a polyline to an axis box, returning the surviving pieces."""
    xmin, xmax, ymin, ymax = box
    pieces, cur = [], []
    for a, b in zip(points[:-1], points[1:]):
        seg = _clip_segment(a, b, xmin, xmax, ymin, ymax)
        if seg is None:
            if len(cur) >= 2:
                pieces.append(np.array(cur))
            cur = []
            continue
        p, q = seg
        if cur and np.allclose(cur[-1], p, atol=1e-12):
            cur.append(q)
        else:
            if len(cur) >= 2:
                pieces.append(np.array(cur))
            cur = [p, q]
    if len(cur) >= 2:
        pieces.append(np.array(cur))
    return pieces


def _clip_segment(a, b, xmin, xmax, ymin, ymax):
    # Liang-Barsky
    t0, t1 = 0.0, 1.0
    dx, dy = b[0] - a[0], b[1] - a[1]
    for p, q in ((-dx, a[0] - xmin), (dx, xmax - a[0]),
                 (-dy, a[1] - ymin), (dy, ymax - a[1])):
        if abs(p) < _EPS:
            if q < 0:
                return None
            continue
        r = q / p
        if p < 0:
            t0 = max(t0, r)
        else:
            t1 = min(t1, r)
        if t0 > t1:
            return None
    p0 = np.array([a[0] + t0 * dx, a[1] + t0 * dy])
    p1 = np.array([a[0] + t1 * dx, a[1] + t1 * dy])
    if np.hypot(*(p1 - p0)) < _EPS:
        return None
    return p0, p1


# ---------------------------------------------------------------------------
# 2D functions

@dataclass
class PiecewiseFunction2D:
    domain: Domain2D
    values: np.ndarray  # (ny, nx) over the outer grid
    jump_curves: list[JumpCurve]
    p: float
    region: str = "inner"  # which part of the grid the function lives on
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.domain.ny, self.domain.nx):
            raise ValidationError([("values", "shape does not match the domain grid")])
        self._cut = None

    def cut_edges(self):
        """(cut_x, cut_y): grid edges crossed by some jump segment."""
        if self._cut is not None:
            return self._cut
        d = self.domain
        xs, ys = d.xs(), d.ys()
        h = d.spacing
        cut_x = np.zeros((d.ny, d.nx - 1), dtype=bool)
        cut_y = np.zeros((d.ny - 1, d.nx), dtype=bool)
        for curve in self.jump_curves:
            for a, b in zip(*curve.segments()):
                i_lo = max(0, int((min(a[0], b[0]) - xs[0]) / h) - 1)
                i_hi = min(d.nx - 1, int((max(a[0], b[0]) - xs[0]) / h) + 2)
                j_lo = max(0, int((min(a[1], b[1]) - ys[0]) / h) - 1)
                j_hi = min(d.ny - 1, int((max(a[1], b[1]) - ys[0]) / h) + 2)
                if i_hi <= i_lo or j_hi <= j_lo:
                    continue
                # horizontal edges in the window
                jj, ii = np.meshgrid(np.arange(j_lo, j_hi + 1),
                                     np.arange(i_lo, min(i_hi, d.nx - 2) + 1),
                                     indexing="ij")
                P0 = np.stack([xs[ii.ravel()], ys[jj.ravel()]], axis=1)
                P1 = P0 + np.array([h, 0.0])
                hit = segments_cross(P0, P1, a, b).reshape(jj.shape)
                cut_x[j_lo:j_hi + 1, i_lo:min(i_hi, d.nx - 2) + 1] |= hit
                # vertical edges
                jj, ii = np.meshgrid(np.arange(j_lo, min(j_hi, d.ny - 2) + 1),
                                     np.arange(i_lo, i_hi + 1), indexing="ij")
                P0 = np.stack([xs[ii.ravel()], ys[jj.ravel()]], axis=1)
                P1 = P0 + np.array([0.0, h])
                hit = segments_cross(P0, P1, a, b).reshape(jj.shape)
                cut_y[j_lo:min(j_hi, d.ny - 2) + 1, i_lo:i_hi + 1] |= hit
        self._cut = (cut_x, cut_y)
        return self._cut

    def cut_cell_count(self, region=None) -> int:
        cut_x, cut_y = self.cut_edges()
        cells = self.domain.cell_mask(region or self.region)
        cut_cells = cut_x[:-1, :] | cut_y[:, :-1]
        return int(np.count_nonzero(cut_cells & cells))

    def gradient_p_field(self) -> GridField2D:
        """Cell-centered |grad u|^p as a samplable field (jump-cut aware).

        The field lives on cell centers of the grid; cut directions are
        dropped exactly as in :func:`dirichlet_energy`.
        """
        gx, gy, vx, vy = self._cell_gradients()
        mag = (gx * gx * vx + gy * gy * vy) ** (self.p / 2.0)
        h = self.domain.spacing
        return GridField2D(origin=(self.domain.origin[0] + h / 2,
                                   self.domain.origin[1] + h / 2),
                           spacing=h, values=mag)

    def _cell_gradients(self):
        h = self.domain.spacing
        v = self.values
        cut_x, cut_y = self.cut_edges()
        gx = (v[:-1, 1:] - v[:-1, :-1]) / h     # bottom edge of each cell
        gy = (v[1:, :-1] - v[:-1, :-1]) / h     # left edge of each cell
        vx = ~cut_x[:-1, :]
        vy = ~cut_y[:, :-1]
        return gx, gy, vx.astype(float), vy.astype(float)


# ---------------------------------------------------------------------------
# 3D jump patches

class TrianglePatch:
    """Triangulated jump surface; ``tris`` has shape (m, 3, 3) in (x1,x2,x3)."""

    kind = "tri"

    def __init__(self, tris):
        self.tris = np.asarray(tris, dtype=float).reshape(-1, 3, 3)
        e1 = self.tris[:, 1] - self.tris[:, 0]
        e2 = self.tris[:, 2] - self.tris[:, 0]
        cr = np.cross(e1, e2)
        self._areas = 0.5 * np.linalg.norm(cr, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            self._normals = cr / np.linalg.norm(cr, axis=1)[:, None]
        self._normals = np.nan_to_num(self._normals)

    def area(self):
        return float(self._areas.sum())

    def transverse(self):
        nu_p = np.hypot(self._normals[:, 1], self._normals[:, 2])
        return float((self._areas * nu_p).sum())

    def temporal(self):
        return float((self._areas * np.abs(self._normals[:, 0])).sum())

    def rescaled(self, delta):
        t = self.tris.copy()
        t[:, :, 1:] *= delta
        return TrianglePatch(t)

    def slice_curves(self, x1):
        curves = []
        for tri in self.tris:
            pts = []
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                da, db = a[0] - x1, b[0] - x1
                if da == db:
                    continue
                t = da / (da - db)
                if -_EPS <= t <= 1 + _EPS and (da > 0) != (db > 0):
                    q = a + t * (b - a)
                    pts.append(q[1:])
            if len(pts) == 2 and np.hypot(*(pts[1] - pts[0])) > 1e-10:
                curves.append(JumpCurve(points=np.array(pts)))
        return curves

    def temporal_crossing_counts(self, xp, x1a, x1b):
        """# intersections of the segments {xp_k} x (x1a, x1b] with the patch."""
        xp = np.atleast_2d(xp)
        out = np.zeros(len(xp), dtype=int)
        for tri, n in zip(self.tris, self._normals):
            if abs(n[0]) < 1e-12:
                continue
            v0 = tri[0]
            x1s = v0[0] - (n[1] * (xp[:, 0] - v0[1]) + n[2] * (xp[:, 1] - v0[2])) / n[0]
            inside = _point_in_tri_2d(xp, tri[:, 1:])
            out += (inside & (x1s > x1a) & (x1s <= x1b)).astype(int)
        return out

    def cover_points(self, r):
        pts = []
        for tri in self.tris:
            e1 = tri[1] - tri[0]
            e2 = tri[2] - tri[0]
            n1 = max(1, int(math.ceil(np.linalg.norm(e1) / r)))
            n2 = max(1, int(math.ceil(np.linalg.norm(e2) / r)))
            for a in range(n1 + 1):
                for b in range(n2 + 1):
                    s, t = a / n1, b / n2
                    if s + t <= 1 + _EPS:
                        pts.append(tri[0] + s * e1 + t * e2)
        return np.array(pts)


def _point_in_tri_2d(pts, tri2, tol=1e-10):
    a, b, c = tri2
    d0 = _cross2(b[0] - a[0], b[1] - a[1], pts[:, 0] - a[0], pts[:, 1] - a[1])
    d1 = _cross2(c[0] - b[0], c[1] - b[1], pts[:, 0] - b[0], pts[:, 1] - b[1])
    d2 = _cross2(a[0] - c[0], a[1] - c[1], pts[:, 0] - c[0], pts[:, 1] - c[1])
    pos = (d0 >= -tol) & (d1 >= -tol) & (d2 >= -tol)
    neg = (d0 <= tol) & (d1 <= tol) & (d2 <= tol)
    return pos | neg


class CylinderPatch:
    """Lateral surface of an x1-axis cylinder: nu = (0, radial), |nu'| = 1."""

    kind = "cylinder"

    def __init__(self, center, radius, x1_range, n_section=64):
        self.center = (float(center[0]), float(center[1]))
        self.radius = float(radius)
        self.x1_range = (float(x1_range[0]), float(x1_range[1]))
        self.n_section = n_section

    def area(self):
        a, b = self.x1_range
        return 2 * math.pi * self.radius * (b - a)

    def transverse(self):
        return self.area()

    def temporal(self):
        return 0.0

    def rescaled(self, delta):
        return CylinderPatch((self.center[0] * delta, self.center[1] * delta),
                             self.radius * delta, self.x1_range, self.n_section)

    def slice_curves(self, x1):
        a, b = self.x1_range
        if not (a < x1 < b):
            return []
        ang = np.linspace(0, 2 * math.pi, self.n_section + 1)
        pts = np.stack([self.center[0] + self.radius * np.cos(ang),
                        self.center[1] + self.radius * np.sin(ang)], axis=1)
        return [JumpCurve(points=pts)]

    def temporal_crossing_counts(self, xp, x1a, x1b):
        xp = np.atleast_2d(xp)
        return np.zeros(len(xp), dtype=int)  # lateral surface: measure-zero hits

    def cover_points(self, r):
        a, b = self.x1_range
        n_ang = max(8, int(math.ceil(2 * math.pi * self.radius / r)))
        n_x = max(1, int(math.ceil((b - a) / r)))
        ang = 2 * math.pi * np.arange(n_ang) / n_ang
        x1s = a + (b - a) * (np.arange(n_x) + 0.5) / n_x
        A, X = np.meshgrid(ang, x1s)
        return np.stack([X.ravel(),
                         self.center[0] + self.radius * np.cos(A.ravel()),
                         self.center[1] + self.radius * np.sin(A.ravel())], axis=1)


class PlanePatch:
    """Flat x1 = const jump patch: nu = (+-1, 0, 0), exact area.

    ``region`` is ("rect", (xmin, xmax, ymin, ymax)) or ("disk", (cx, cy, R))
    in the x' = (x2, x3) plane.
    """

    kind = "plane"

    def __init__(self, x1, region):
        self.x1 = float(x1)
        self.region = region

    def area(self):
        k, par = self.region
        if k == "rect":
            xmin, xmax, ymin, ymax = par
            return (xmax - xmin) * (ymax - ymin)
        cx, cy, R = par
        return math.pi * R * R

    def transverse(self):
        return 0.0

    def temporal(self):
        return self.area()

    def rescaled(self, delta):
        k, par = self.region
        if k == "rect":
            xmin, xmax, ymin, ymax = par
            return PlanePatch(self.x1, ("rect", (xmin * delta, xmax * delta,
                                                 ymin * delta, ymax * delta)))
        cx, cy, R = par
        return PlanePatch(self.x1, ("disk", (cx * delta, cy * delta, R * delta)))

    def slice_curves(self, x1):
        return []  # x1-sections of an x1=const plane are degenerate

    def _contains_xp(self, xp):
        k, par = self.region
        if k == "rect":
            xmin, xmax, ymin, ymax = par
            return ((xp[:, 0] >= xmin - _EPS) & (xp[:, 0] <= xmax + _EPS)
                    & (xp[:, 1] >= ymin - _EPS) & (xp[:, 1] <= ymax + _EPS))
        cx, cy, R = par
        return np.hypot(xp[:, 0] - cx, xp[:, 1] - cy) <= R + _EPS

    def temporal_crossing_counts(self, xp, x1a, x1b):
        xp = np.atleast_2d(xp)
        if x1a < self.x1 <= x1b:
            return self._contains_xp(xp).astype(int)
        return np.zeros(len(xp), dtype=int)

    def cover_points(self, r):
        k, par = self.region
        if k == "rect":
            xmin, xmax, ymin, ymax = par
            n1 = max(1, int(math.ceil((xmax - xmin) / r)))
            n2 = max(1, int(math.ceil((ymax - ymin) / r)))
            g1 = xmin + (xmax - xmin) * (np.arange(n1) + 0.5) / n1
            g2 = ymin + (ymax - ymin) * (np.arange(n2) + 0.5) / n2
            A, B = np.meshgrid(g1, g2)
            return np.stack([np.full(A.size, self.x1), A.ravel(), B.ravel()], axis=1)
        cx, cy, R = par
        pts = [(cx, cy)]
        n_rad = max(1, int(math.ceil(R / r)))
        for kk in range(1, n_rad + 1):
            rho = R * kk / n_rad
            n_ang = max(6, int(math.ceil(2 * math.pi * rho / r)))
            ang = 2 * math.pi * np.arange(n_ang) / n_ang
            pts.extend(zip(cx + rho * np.cos(ang), cy + rho * np.sin(ang)))
        pts = np.array(pts)
        return np.column_stack([np.full(len(pts), self.x1), pts])


# ---------------------------------------------------------------------------
# 3D functions

@dataclass
class Function3D:
    x1_range: tuple[float, float]
    n_slices: int
    base: Domain2D
    values: np.ndarray  # (n_slices, ny, nx)
    patches: list
    p: float
    region: str = "inner"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.n_slices, self.base.ny, self.base.nx):
            raise ValidationError([("values", "shape does not match slices x grid")])
        self._slices = {}

    @property
    def dx1(self) -> float:
        a, b = self.x1_range
        return (b - a) / self.n_slices

    def x1_centers(self) -> np.ndarray:
        a, b = self.x1_range
        return a + self.dx1 * (np.arange(self.n_slices) + 0.5)

    def slice_function(self, k: int) -> PiecewiseFunction2D:
        if k not in self._slices:
            x1 = float(self.x1_centers()[k])
            curves = []
            for patch in self.patches:
                curves.extend(patch.slice_curves(x1))
            self._slices[k] = PiecewiseFunction2D(
                domain=self.base, values=self.values[k], jump_curves=curves,
                p=self.p, region=self.region)
        return self._slices[k]

    def temporal_crossing_counts(self, xp, x1a, x1b):
        xp = np.atleast_2d(xp)
        out = np.zeros(len(xp), dtype=int)
        for patch in self.patches:
            out += patch.temporal_crossing_counts(xp, x1a, x1b)
        return out


# ---------------------------------------------------------------------------
# masses and energies

def jump_mass(jumps, weight: str = "full") -> float:
    """Hausdorff mass of jump geometry.

    2D curves: ``full`` = H^1.  3D patches: ``full`` = H^2, ``transverse``
    = integral of |nu'|, ``temporal`` = integral of |nu_1|.
    """
    items = list(jumps)
    if not items:
        return 0.0
    if isinstance(items[0], JumpCurve):
        if weight != "full":
            raise UsageError(f"{weight!r} weight is only defined for 3D jump surfaces")
        return float(sum(c.length() for c in items))
    if weight == "full":
        return float(sum(p.area() for p in items))
    if weight == "transverse":
        return float(sum(p.transverse() for p in items))
    if weight == "temporal":
        return float(sum(p.temporal() for p in items))
    raise UsageError(f"unknown weight {weight!r}")


def dirichlet_energy(u, which: str = "full") -> float:
    """p-Dirichlet energy from finite differences, skipping jump-cut edges.

    2D: only ``full``.  3D: ``full`` (all three directions), ``spatial``
    (nabla' = (d2, d3)), or ``temporal`` (d1).
    """
    if isinstance(u, PiecewiseFunction2D):
        if which != "full":
            raise UsageError("2D functions only support the full gradient")
        return _energy_2d(u)
    if isinstance(u, Function3D):
        if which == "spatial":
            return float(sum(_energy_2d(u.slice_function(k)) * u.dx1
                             for k in range(u.n_slices)))
        if which == "temporal":
            return _energy_temporal(u)
        if which == "full":
            return _energy_full_3d(u)
        raise UsageError(f"unknown energy kind {which!r}")
    raise UsageError("dirichlet_energy expects a 2D or 3D function")


def _energy_2d(u: PiecewiseFunction2D) -> float:
    gx, gy, vx, vy = u._cell_gradients()
    cells = u.domain.cell_mask(u.region)
    mag = (gx * gx * vx + gy * gy * vy) ** (u.p / 2.0)
    return float((mag * cells).sum() * u.domain.spacing ** 2)


def _cell_avg(v):
    return 0.25 * (v[:-1, :-1] + v[:-1, 1:] + v[1:, :-1] + v[1:, 1:])


def _energy_temporal(u: Function3D) -> float:
    cells = u.base.cell_mask(u.region)
    CX, CY = u.base.cell_centers()
    xp = np.stack([CX.ravel(), CY.ravel()], axis=1)
    x1c = u.x1_centers()
    h2 = u.base.spacing ** 2
    total = 0.0
    for k in range(u.n_slices - 1):
        crossing = u.temporal_crossing_counts(xp, x1c[k], x1c[k + 1]).reshape(CX.shape)
        g = (_cell_avg(u.values[k + 1]) - _cell_avg(u.values[k])) / u.dx1
        ok = cells & (crossing == 0)
        total += float((np.abs(g) ** u.p * ok).sum() * h2 * u.dx1)
    return total


def _energy_full_3d(u: Function3D) -> float:
    """Combined |(d1, d2, d3)|^p with per-direction cut exclusion."""
    cells = u.base.cell_mask(u.region)
    CX, CY = u.base.cell_centers()
    xp = np.stack([CX.ravel(), CY.ravel()], axis=1)
    x1c = u.x1_centers()
    h2 = u.base.spacing ** 2
    total = 0.0
    for k in range(u.n_slices):
        sl = u.slice_function(k)
        gx, gy, vx, vy = sl._cell_gradients()
        if k < u.n_slices - 1:
            crossing = u.temporal_crossing_counts(xp, x1c[k], x1c[k + 1]).reshape(CX.shape)
            g1 = (_cell_avg(u.values[k + 1]) - _cell_avg(u.values[k])) / u.dx1
            v1 = (crossing == 0).astype(float)
        else:
            g1 = np.zeros_like(gx)
            v1 = np.zeros_like(gx)
        mag = (g1 * g1 * v1 + gx * gx * vx + gy * gy * vy) ** (u.p / 2.0)
        total += float((mag * cells).sum() * h2 * u.dx1)
    return total


# ---------------------------------------------------------------------------
# extension

def _fill_outside(values: np.ndarray, inside: np.ndarray, iters: int) -> np.ndarray:
    """Propagate values outward by neighbor averaging (nearest-fill)."""
    v = values.copy()
    known = inside.copy()
    for _ in range(iters):
        if known.all():
            break
        acc = np.zeros_like(v)
        cnt = np.zeros(v.shape)
        for dj, di in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            src = np.roll(known, (dj, di), axis=(0, 1))
            val = np.roll(np.where(known, v, 0.0), (dj, di), axis=(0, 1))
            if dj == 1:
                src[0, :] = False
            if dj == -1:
                src[-1, :] = False
            if di == 1:
                src[:, 0] = False
            if di == -1:
                src[:, -1] = False
            acc += val
            cnt += src
        new = (~known) & (cnt > 0)
        v[new] = acc[new] / cnt[new]
        known |= new
    return v


def extend(u: PiecewiseFunction2D) -> PiecewiseFunction2D:
    """Extend u from S to S' by reflection; identity on S, node-exact.

    Rectangles reflect coordinate-wise (index mirroring); disks reflect
    radially (rho -> 2R - rho).  The measured energy and jump-mass ratios
    are stored in ``meta`` as the empirical extension constants.
    """
    d = u.domain
    if u.region != "inner":
        raise PreconditionError("extend expects a function on S")
    warnings = []
    if d.shape == "rectangle":
        j0, j1, i0, i1 = d.inner_window()
        v = u.values.copy()
        k = d._k
        for s in range(1, k + 1):
            v[:, i0 - s] = v[:, i0 + s]
            v[:, i1 + s] = v[:, i1 - s]
        for s in range(1, k + 1):
            v[j0 - s, :] = v[j0 + s, :]
            v[j1 + s, :] = v[j1 - s, :]
        curves = list(u.jump_curves)
        xmin, xmax, ymin, ymax = d.bounds
        m = d.margin
        outer_box = (xmin - m, xmax + m, ymin - m, ymax + m)
        reflections = []
        for c in u.jump_curves:
            pts = c.points
            images = [
                np.stack([2 * xmin - pts[:, 0], pts[:, 1]], axis=1),
                np.stack([2 * xmax - pts[:, 0], pts[:, 1]], axis=1),
                np.stack([pts[:, 0], 2 * ymin - pts[:, 1]], axis=1),
                np.stack([pts[:, 0], 2 * ymax - pts[:, 1]], axis=1),
                np.stack([2 * xmin - pts[:, 0], 2 * ymin - pts[:, 1]], axis=1),
                np.stack([2 * xmin - pts[:, 0], 2 * ymax - pts[:, 1]], axis=1),
                np.stack([2 * xmax - pts[:, 0], 2 * ymin - pts[:, 1]], axis=1),
                np.stack([2 * xmax - pts[:, 0], 2 * ymax - pts[:, 1]], axis=1),
            ]
            ends = np.vstack([pts[0], pts[-1]])
            if np.any(~d.contains(ends, "inner")):
                warnings.append("jump curve leaves S; reflected image clipped")
            for img in images:
                inside_margin = ~d.contains(img, "inner")
                if not inside_margin.any():
                    continue
                for piece in clip_polyline_to_box(img, outer_box):
                    keep = ~d.contains(piece, "inner")
                    if keep.any():
                        reflections.append(JumpCurve(points=piece))
        curves.extend(reflections)
    else:  # disk
        cx, cy = d.center
        R, m = d.radius, d.margin
        inner = d.node_mask("inner")
        base = _fill_outside(u.values, inner, iters=d._k + 2)
        field0 = GridField2D(origin=d.origin, spacing=d.spacing, values=base)
        X, Y = d.node_points()
        rho = np.hypot(X - cx, Y - cy)
        outside = (rho > R) & (rho <= R + m + _EPS)
        with np.errstate(invalid="ignore", divide="ignore"):
            ux = np.where(rho > 0, (X - cx) / rho, 0.0)
            uy = np.where(rho > 0, (Y - cy) / rho, 0.0)
        mx = cx + (2 * R - rho) * ux
        my = cy + (2 * R - rho) * uy
        v = u.values.copy()
        pts = np.stack([mx[outside], my[outside]], axis=1)
        v[outside] = field0.sample(pts)
        curves = list(u.jump_curves)
        for c in u.jump_curves:
            pc = c.sample(d.spacing / 2)
            r_pc = np.hypot(pc[:, 0] - cx, pc[:, 1] - cy)
            keep = r_pc >= R - m
            runs = _mask_runs(keep)
            for a, b in runs:
                seg = pc[a:b]
                r_seg = r_pc[a:b]
                if len(seg) < 2:
                    continue
                with np.errstate(invalid="ignore", divide="ignore"):
                    dirs = (seg - np.array([cx, cy])) / r_seg[:, None]
                img = np.array([cx, cy]) + (2 * R - r_seg)[:, None] * dirs
                curves.append(JumpCurve(points=img))
    out = PiecewiseFunction2D(domain=d, values=v, jump_curves=curves,
                              p=u.p, region="outer")
    e_in = _energy_2d(u)
    e_out = _energy_2d(out)
    j_in = jump_mass(u.jump_curves) if u.jump_curves else 0.0
    j_out = jump_mass(curves) if curves else 0.0
    out.meta["energy_ratio"] = e_out / e_in if e_in > 0 else 1.0
    out.meta["jump_ratio"] = j_out / j_in if j_in > 0 else 1.0
    out.meta["warnings"] = warnings
    return out


def _mask_runs(mask):
    """Index ranges [a, b) of consecutive True entries."""
    runs = []
    a = None
    for i, v in enumerate(mask):
        if v and a is None:
            a = i
        elif not v and a is not None:
            runs.append((a, i))
            a = None
    if a is not None:
        runs.append((a, len(mask)))
    return runs


# ---------------------------------------------------------------------------
# coverings

def vitali_cover(jumps: list[JumpCurve], cover_radius: float) -> list[Ball]:
    """Cover the jump curves with open balls centered along the segments.

    Per segment of length L: n = ceil(L / cover_radius) balls of radius
    ``cover_radius``, equally spaced and centered, so consecutive centers
    are at most ``cover_radius`` apart and every curve point is covered.
    """
    if cover_radius <= 0:
        raise PreconditionError("cover_radius must be > 0")
    balls = []
    next_id = 0
    for curve in jumps:
        for a, b in zip(*curve.segments()):
            L = math.hypot(b[0] - a[0], b[1] - a[1])
            n = max(1, int(math.ceil(L / cover_radius)))
            offset = (L - (n - 1) * cover_radius) / 2.0
            t_vals = (offset + cover_radius * np.arange(n)) / L
            for t in t_vals:
                c = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
                balls.append(Ball(center=c, radius=cover_radius, id=next_id))
                next_id += 1
    return balls


def covering_constant(balls: list[Ball], jumps: list[JumpCurve]) -> float:
    """Empirical covering constant: sum of radii over H^1 of the jump set."""
    h1 = jump_mass(jumps)
    if h1 == 0:
        return 1.0
    return sum(b.radius for b in balls) / h1
