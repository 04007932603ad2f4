"""Scenario files: validated descriptions of every runnable experiment.

A scenario is a JSON object with a ``kind`` selecting the generator, a
``domain`` block, and a ``params`` block.  Validation is strict: unknown
fields are hard errors with full field paths, so a typo never silently
changes an experiment.  All randomness flows through one 64-bit seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .balls import Ball
from .errors import ValidationError
from .gsbv import (CylinderPatch, Domain2D, Function3D, JumpCurve,
                   PiecewiseFunction2D, PlanePatch, TrianglePatch)

KINDS = ("balls", "crack2d", "smooth2d", "ribbon3d", "profile3d",
         "counterexample-a", "counterexample-b", "ms-step", "ms-ripple")

_DOMAIN_FIELDS = {"shape", "margin", "spacing", "bounds", "center", "radius"}
_PARAM_DEFAULTS = {
    "p": 2.0, "T": 1.0, "eps": [0.1, 0.05, 0.025, 0.0125], "delta": 0.25,
    "lambda": 2.0, "cover_radius": None, "n_times": 64, "seed": 0,
    "n_slices": 16, "n_balls": 8, "n_cracks": 1, "crack_length": 0.05,
    "h": 0.1, "x1_range": [0.0, 1.0], "amplitude": 1.0, "slack": 0.0,
    "eta": None,
}
_TOP_FIELDS = {"name", "kind", "domain", "params", "balls"}


@dataclass
class Scenario:
    name: str
    kind: str
    domain: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    balls: list | None = None

    def to_dict(self):
        d = {"name": self.name, "kind": self.kind, "domain": self.domain,
             "params": self.params}
        if self.balls is not None:
            d["balls"] = self.balls
        return d


def validate_scenario(raw: dict) -> Scenario:
    issues = []
    if not isinstance(raw, dict):
        raise ValidationError([("", "scenario must be a JSON object")])
    for key in raw:
        if key not in _TOP_FIELDS:
            issues.append((key, "unknown field"))
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        issues.append(("name", "required nonempty string"))
    kind = raw.get("kind")
    if kind not in KINDS:
        issues.append(("kind", f"must be one of {KINDS}"))
    domain = raw.get("domain", {})
    if not isinstance(domain, dict):
        issues.append(("domain", "must be an object"))
        domain = {}
    for key in domain:
        if key not in _DOMAIN_FIELDS:
            issues.append((f"domain.{key}", "unknown field"))
    if "margin" in domain and (not isinstance(domain["margin"], (int, float))
                               or domain["margin"] <= 0):
        issues.append(("domain.margin", "must be a positive number"))
    if "spacing" in domain and (not isinstance(domain["spacing"], (int, float))
                                or domain["spacing"] <= 0):
        issues.append(("domain.spacing", "must be a positive number"))
    params = dict(_PARAM_DEFAULTS)
    raw_params = raw.get("params", {})
    if not isinstance(raw_params, dict):
        issues.append(("params", "must be an object"))
        raw_params = {}
    for key, val in raw_params.items():
        if key not in _PARAM_DEFAULTS:
            issues.append((f"params.{key}", "unknown parameter"))
            continue
        params[key] = val
    if params["p"] is not None and params["p"] < 1:
        issues.append(("params.p", "exponent must be >= 1"))
    if params["T"] is not None and params["T"] <= 0:
        issues.append(("params.T", "horizon must be positive"))
    if not isinstance(params["seed"], int):
        issues.append(("params.seed", "must be an integer"))
    balls = raw.get("balls")
    if balls is not None:
        if not isinstance(balls, list):
            issues.append(("balls", "must be a list"))
        else:
            for i, rec in enumerate(balls):
                for key in ("cx", "cy", "r"):
                    if key not in rec:
                        issues.append((f"balls[{i}].{key}", "missing"))
    if issues:
        raise ValidationError(issues)
    return Scenario(name=name, kind=kind, domain=domain, params=params,
                    balls=balls)


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return validate_scenario(json.load(fh))


_KIND_DEFAULTS = {
    # the scaling sweep needs a short horizon and fine slicing to resolve
    # the thinnest member of the family
    "counterexample-a": {"T": 0.5, "n_slices": 64},
    "counterexample-b": {"T": 0.5, "n_slices": 64},
}


def preset(kind: str, **params) -> Scenario:
    """Built-in scenario for a generator kind with parameter overrides."""
    merged = dict(_KIND_DEFAULTS.get(kind, {}))
    merged.update(params)
    raw = {"name": kind, "kind": kind, "params": merged}
    return validate_scenario(raw)


# ---------------------------------------------------------------------------
# builders

def build_domain(s: Scenario) -> Domain2D:
    d = dict(s.domain)
    shape = d.pop("shape", "rectangle")
    margin = d.pop("margin", 0.5)
    spacing = d.pop("spacing", 1 / 32)
    if shape == "rectangle":
        bounds = tuple(d.pop("bounds", (0.0, 1.0, 0.0, 1.0)))
        return Domain2D(shape="rectangle", margin=margin, spacing=spacing,
                        bounds=bounds)
    center = tuple(d.pop("center", (0.0, 0.0)))
    radius = d.pop("radius", 1.0)
    return Domain2D(shape="disk", margin=margin, spacing=spacing,
                    center=center, radius=radius)


def build_balls(s: Scenario) -> list[Ball]:
    if s.balls is not None:
        return [Ball(center=(float(r["cx"]), float(r["cy"])),
                     radius=float(r["r"]), id=int(r.get("id", i)))
                for i, r in enumerate(s.balls)]
    return random_ball_family(s.params["seed"], s.params["n_balls"])


def random_ball_family(seed: int, n: int, box: float = 1.0,
                       r_max: float = 0.04) -> list[Ball]:
    """Seeded disjoint-by-construction random family in [0, box]^2."""
    rng = np.random.default_rng(np.uint64(seed))
    balls: list[Ball] = []
    tries = 0
    while len(balls) < n and tries < 100 * n:
        tries += 1
        c = rng.uniform(0.1 * box, 0.9 * box, size=2)
        r = rng.uniform(0.2 * r_max, r_max)
        if all(math.hypot(c[0] - b.center[0], c[1] - b.center[1])
               > (r + b.radius) * 1.05 for b in balls):
            balls.append(Ball(center=(float(c[0]), float(c[1])), radius=float(r),
                              id=len(balls)))
    return balls


def _bump(t, lo, hi):
    s = np.clip((t - lo) / (hi - lo), 0.0, 1.0)
    return np.sin(np.pi * s) ** 2


def random_crack_function(seed: int, spacing: float = 1 / 64,
                          margin: float = 0.5, n_cracks: int = 1,
                          crack_length: float = 0.05,
                          p: float = 2.0, amplitude: float = 1.0
                          ) -> PiecewiseFunction2D:
    """Seeded short-crack field on the unit square.

    Each crack is a short, gently tilted segment across which the value
    jumps by a windowed amplitude (the window vanishes at the endpoints so
    the discontinuity set is exactly the open segment); a smooth background
    keeps the gradient energy nonzero.
    """
    rng = np.random.default_rng(np.uint64(seed))
    d = Domain2D(shape="rectangle", margin=margin, spacing=spacing,
                 bounds=(0, 1, 0, 1))
    X, Y = d.node_points()
    vals = 0.3 * np.sin(2 * np.pi * X + rng.uniform(0, 2 * np.pi)) \
        * np.cos(np.pi * Y)
    curves = []
    for _ in range(n_cracks):
        cx = rng.uniform(0.3, 0.7)
        cy = rng.uniform(0.3, 0.7) + 0.0013  # keep off grid lines
        ang = rng.uniform(-0.3, 0.3)
        tvec = np.array([math.cos(ang), math.sin(ang)])
        nvec = np.array([-tvec[1], tvec[0]])
        P0 = np.array([cx, cy]) - 0.5 * crack_length * tvec
        P1 = np.array([cx, cy]) + 0.5 * crack_length * tvec
        curves.append(JumpCurve(points=np.stack([P0, P1])))
        s = (X - P0[0]) * tvec[0] + (Y - P0[1]) * tvec[1]
        side = (X - P0[0]) * nvec[0] + (Y - P0[1]) * nvec[1]
        vals = vals + amplitude * _bump(s, 0.0, crack_length) * (side > 0)
    return PiecewiseFunction2D(domain=d, values=vals, jump_curves=curves, p=p)


def build_function2d(s: Scenario) -> PiecewiseFunction2D:
    p = float(s.params["p"])
    if s.kind == "crack2d":
        return random_crack_function(
            seed=s.params["seed"],
            spacing=s.domain.get("spacing", 1 / 64),
            margin=s.domain.get("margin", 0.5),
            n_cracks=s.params["n_cracks"],
            crack_length=s.params["crack_length"], p=p,
            amplitude=s.params["amplitude"])
    if s.kind == "smooth2d":
        d = build_domain(s)
        X, Y = d.node_points()
        vals = np.sin(2 * np.pi * X) * np.cos(np.pi * Y)
        return PiecewiseFunction2D(domain=d, values=vals, jump_curves=[], p=p)
    raise ValidationError([("kind", f"{s.kind!r} is not a 2D function kind")])


def random_ribbon_function(seed: int, spacing: float = 1 / 24,
                           margin: float = 1.0, n_slices: int = 16,
                           p: float = 2.0) -> Function3D:
    """Seeded 3D field with one thin flat transverse jump ribbon.

    The ribbon is long in x1 and short in x3 so that per-slice covering
    radii stay below the admissibility budget.
    """
    rng = np.random.default_rng(np.uint64(seed))
    base = Domain2D(shape="rectangle", margin=margin, spacing=spacing,
                    bounds=(0, 1, 0, 1))
    X, Y = base.node_points()
    x2j = rng.uniform(0.4, 0.6) + 0.0013
    lo = rng.uniform(0.35, 0.55)
    hi = lo + 0.1
    zc = rng.uniform(0.45, 0.55)
    zlo, zhi = zc - 0.02, zc + 0.02
    tri = TrianglePatch([
        [[lo, x2j, zlo], [hi, x2j, zlo], [hi, x2j, zhi]],
        [[lo, x2j, zlo], [hi, x2j, zhi], [lo, x2j, zhi]],
    ])
    phase = rng.uniform(0, 2 * np.pi)
    vals = np.zeros((n_slices, base.ny, base.nx))
    x1c = (np.arange(n_slices) + 0.5) / n_slices
    for k, x1 in enumerate(x1c):
        amp = float(_bump(np.array([x1]), lo, hi)[0]) if lo < x1 < hi else 0.0
        vals[k] = (amp * _bump(Y, zlo, zhi) * (X > x2j)
                   + 0.2 * np.sin(2 * np.pi * X + phase)
                   * np.cos(np.pi * Y) * x1)
    return Function3D(x1_range=(0.0, 1.0), n_slices=n_slices, base=base,
                      values=vals, patches=[tri], p=p,
                      meta={"seed": seed, "cover_radius": 0.0125})


def build_function3d(s: Scenario) -> Function3D:
    p = float(s.params["p"])
    if s.kind == "ribbon3d":
        return random_ribbon_function(
            seed=s.params["seed"],
            spacing=s.domain.get("spacing", 1 / 24),
            margin=s.domain.get("margin", 1.0),
            n_slices=s.params["n_slices"], p=p)
    if s.kind in ("counterexample-a", "counterexample-b"):
        from .approx3d import counterexample_family
        return counterexample_family(
            s.kind[-1], s.params["h"], n_slices=s.params["n_slices"],
            spacing=s.domain.get("spacing", 1 / 24),
            margin=s.domain.get("margin", 0.25), p=p)
    if s.kind == "profile3d":
        base = build_domain(s)
        n = s.params["n_slices"]
        x1a, x1b = s.params["x1_range"]
        x1c = x1a + (x1b - x1a) * (np.arange(n) + 0.5) / n
        prof = np.where(x1c > 0.5 * (x1a + x1b), 1.0, 0.0)
        return function3d_from_profile(prof, base, (x1a, x1b), p=p)
    raise ValidationError([("kind", f"{s.kind!r} is not a 3D function kind")])


def function3d_from_profile(profile: np.ndarray, base: Domain2D,
                            x1_range=(0.0, 1.0), p: float = 2.0,
                            jump_locations=None) -> Function3D:
    """Constant-in-x' lift of a 1D profile, with plane jump patches.

    Jump locations default to the midpoints of slice pairs with unequal
    profile values.
    """
    profile = np.asarray(profile, dtype=float)
    n = len(profile)
    a, b = x1_range
    x1c = a + (b - a) * (np.arange(n) + 0.5) / n
    vals = np.broadcast_to(profile[:, None, None],
                           (n, base.ny, base.nx)).copy()
    if jump_locations is None:
        jump_locations = [0.5 * (x1c[k] + x1c[k + 1]) for k in range(n - 1)
                          if profile[k] != profile[k + 1]]
    if base.shape == "rectangle":
        region = ("rect", base.bounds)
    else:
        region = ("disk", (base.center[0], base.center[1], base.radius))
    patches = [PlanePatch(x, region) for x in jump_locations]
    return Function3D(x1_range=(float(a), float(b)), n_slices=n, base=base,
                      values=vals, patches=patches, p=p)


def ms_family(s: Scenario) -> tuple[list[Function3D], list[float]]:
    """Family u_eps for the dimension-reduction pipeline.

    "ms-step": a pure x1-step, identical for every eps.
    "ms-ripple": the step plus a spatial ripple of amplitude eps^(1/p)
    (so the 1/eps-weighted spatial energy stays bounded).
    """
    p = float(s.params["p"])
    eps_values = [float(e) for e in s.params["eps"]]
    base = build_domain(s) if s.domain else Domain2D(
        shape="rectangle", margin=0.25, spacing=1 / 16, bounds=(0, 1, 0, 1))
    n = s.params["n_slices"]
    x1c = (np.arange(n) + 0.5) / n
    prof = np.where(x1c > 0.5, 1.0, 0.0)
    X, Y = base.node_points()
    if base.shape == "rectangle":
        region = ("rect", base.bounds)
    else:
        region = ("disk", (base.center[0], base.center[1], base.radius))
    out = []
    for eps in eps_values:
        vals = np.empty((n, base.ny, base.nx))
        for k in range(n):
            vals[k] = prof[k]
            if s.kind == "ms-ripple":
                vals[k] += (eps ** (1.0 / p) * np.sin(2 * np.pi * X)
                            * np.sin(2 * np.pi * x1c[k]))
        out.append(Function3D(x1_range=(0.0, 1.0), n_slices=n, base=base,
                              values=vals,
                              patches=[PlanePatch(0.5, region)], p=p))
    return out, eps_values
