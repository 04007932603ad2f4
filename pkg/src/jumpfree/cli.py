"""Command-line harness: scenario loading, experiment runs, artifacts.

Subcommands mirror the pipeline stages::

    jumpfree balls --scenario fam.json --out dir/
    jumpfree approx2d --scenario crack.json --T 1 --out dir/
    jumpfree approx3d --scenario ribbon.json --slices 16 --out dir/
    jumpfree ms-gamma --scenario family.json --eps 0.1,0.05 --out dir/
    jumpfree counterexample-sweep --scenario ce.json --out dir/

Every flag can be preset through an environment variable with the
``JUMPFREE_`` prefix (e.g. ``JUMPFREE_T=2`` for ``--T``); explicit flags
win.  Exit codes: 0 all bound checks pass, 1 bound violation, 2 scenario
validation error, 3 internal error.  Reports are byte-identical across
repeated runs and thread counts; wall-clock timing goes to a separate
``timing.json`` sidecar so ``report.json`` stays deterministic.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np

from . import scenarios as sc
from .balls import run_construction
from .errors import (BudgetViolation, JumpfreeError, JumpSetTooLarge,
                     PreconditionError, UsageError, ValidationError)
from .gsbv import dirichlet_energy, jump_mass
from .report import EnergyReport, scenario_hash

ENV_PREFIX = "JUMPFREE_"


def _env_default(name, fallback=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"),
                          fallback)


def _add_common(sp):
    sp.add_argument("--scenario", default=_env_default("scenario"),
                    help="scenario JSON file (default: built-in preset)")
    sp.add_argument("--out", default=_env_default("out"),
                    help="output directory (default: out/<command>)")
    sp.add_argument("--p", type=float, default=_env_default("p"))
    sp.add_argument("--T", type=float, default=_env_default("T"))
    sp.add_argument("--eps", default=_env_default("eps"),
                    help="comma-separated eps values")
    sp.add_argument("--delta", type=float, default=_env_default("delta"))
    sp.add_argument("--grid", type=float, default=_env_default("grid"),
                    help="grid spacing")
    sp.add_argument("--slices", type=int, default=_env_default("slices"))
    sp.add_argument("--seed", type=int, default=_env_default("seed"))
    sp.add_argument("--threads", type=int,
                    default=_env_default("threads", "1"),
                    help="worker hint; results are identical for any value")
    sp.add_argument("--slack", type=float, default=_env_default("slack"))


def build_parser():
    ap = argparse.ArgumentParser(prog="jumpfree",
                                 description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("balls", "approx2d", "approx3d", "ms-gamma",
                 "counterexample-sweep"):
        _add_common(sub.add_parser(name))
    return ap


def _default_scenario(command: str, args) -> sc.Scenario:
    kind = {"balls": "balls", "approx2d": "crack2d", "approx3d": "ribbon3d",
            "ms-gamma": "ms-ripple",
            "counterexample-sweep": "counterexample-a"}[command]
    return sc.preset(kind)


def _apply_overrides(s: sc.Scenario, args) -> sc.Scenario:
    if args.p is not None:
        s.params["p"] = float(args.p)
    if args.T is not None:
        s.params["T"] = float(args.T)
    if args.eps is not None:
        s.params["eps"] = [float(x) for x in str(args.eps).split(",")]
    if args.delta is not None:
        s.params["delta"] = float(args.delta)
    if args.grid is not None:
        s.domain["spacing"] = float(args.grid)
    if args.slices is not None:
        s.params["n_slices"] = int(args.slices)
    if args.seed is not None:
        s.params["seed"] = int(args.seed)
    if args.slack is not None:
        s.params["slack"] = float(args.slack)
    return s


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def _finish(outdir, report: EnergyReport, scenario: sc.Scenario,
            command: str, started: float, extra=None) -> int:
    report.provenance.update({
        "command": command,
        "scenario": scenario.to_dict(),
        "scenario_hash": scenario_hash(scenario.to_dict()),
        "seed": scenario.params.get("seed"),
    })
    payload = report.to_dict()
    if extra:
        payload.update(extra)
    _write_json(os.path.join(outdir, "report.json"), payload)
    _write_json(os.path.join(outdir, "timing.json"),
                {"wall_seconds": time.time() - started})
    ok = report.all_passed()
    for e in report.entries:
        status = "pass" if e.passed else "FAIL"
        print(f"[{status}] {e.name} = {e.value:.6g}"
              + (f"  (bound {e.bound:.6g})" if e.bound is not None else ""))
    if not ok:
        open(os.path.join(outdir, "FAILED"), "w").write("bound violation\n")
        return 1
    return 0


# ---------------------------------------------------------------------------
# SVG helpers (plain text, no plotting dependency)

def _svg_header(w, h):
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" '
            f'height="{h}" viewBox="0 0 {w} {h}">'
            f'<rect width="{w}" height="{h}" fill="white"/>')


def _svg_scene(path, box, segments=(), circle_groups=()):
    """Overlay of jump segments and disk families inside a world box."""
    xmin, xmax, ymin, ymax = box
    size = 480
    sc_ = size / max(xmax - xmin, ymax - ymin)

    def tx(x):
        return (x - xmin) * sc_

    def ty(y):
        return size - (y - ymin) * sc_

    parts = [_svg_header(size, size)]
    colors = ("#2060c0", "#c03020", "#209040")
    for pts in segments:
        d = " ".join(f"{tx(x):.2f},{ty(y):.2f}" for x, y in pts)
        parts.append(f'<polyline points="{d}" fill="none" stroke="black" '
                     f'stroke-width="2"/>')
    for gi, disks in enumerate(circle_groups):
        col = colors[gi % len(colors)]
        for b in disks:
            parts.append(
                f'<circle cx="{tx(b.center[0]):.2f}" cy="{ty(b.center[1]):.2f}"'
                f' r="{b.radius * sc_:.2f}" fill="none" stroke="{col}"'
                f' stroke-width="1.5"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("".join(parts))


def _svg_decay(path, xs, ys, label):
    """Log-log scatter with a least-squares fit line."""
    size = 480
    lx, ly = np.log(xs), np.log(ys)
    a, b = np.polyfit(lx, ly, 1)
    x0, x1 = lx.min(), lx.max()
    y0, y1 = ly.min(), ly.max()
    pad = 0.1 * max(x1 - x0, 1e-9), 0.1 * max(y1 - y0, 1e-9)

    def tx(v):
        return 40 + (v - x0 + pad[0]) / (x1 - x0 + 2 * pad[0]) * (size - 80)

    def ty(v):
        return size - 40 - (v - y0 + pad[1]) / (y1 - y0 + 2 * pad[1]) * (size - 80)

    parts = [_svg_header(size, size)]
    for vx, vy in zip(lx, ly):
        parts.append(f'<circle cx="{tx(vx):.1f}" cy="{ty(vy):.1f}" r="4" '
                     f'fill="#2060c0"/>')
    parts.append(f'<line x1="{tx(x0):.1f}" y1="{ty(a * x0 + b):.1f}" '
                 f'x2="{tx(x1):.1f}" y2="{ty(a * x1 + b):.1f}" '
                 f'stroke="#c03020" stroke-width="2"/>')
    parts.append(f'<text x="40" y="24" font-size="14">{label}: slope '
                 f'{a:.3f}</text></svg>')
    with open(path, "w") as fh:
        fh.write("".join(parts))


# ---------------------------------------------------------------------------
# commands

def cmd_balls(scenario, outdir, args) -> int:
    started = time.time()
    balls = sc.build_balls(scenario)
    T = float(scenario.params["T"])
    trace = run_construction(balls, t_end=T)
    trace.to_event_csv(os.path.join(outdir, "events.csv"))
    report = EnergyReport()
    report.add("n_balls", len(balls))
    report.add("n_merges", len(trace.events))
    r0 = sum(b.radius for b in balls)
    report.add("radii_sum_T", trace.radii_sum(T),
               bound=math.exp(T) * r0, slack=1e-12, tag="radii growth")
    # pairwise disjointness of closures at T
    fam = trace.active_at(T)
    worst = 0.0
    for i in range(len(fam)):
        for j in range(i + 1, len(fam)):
            d = math.hypot(fam[i].center[0] - fam[j].center[0],
                           fam[i].center[1] - fam[j].center[1])
            worst = max(worst, fam[i].radius + fam[j].radius - d)
    report.add("max_overlap_at_T", worst, bound=0.0, slack=1e-9,
               tag="pairwise disjoint closures")
    _svg_scene(os.path.join(outdir, "balls.svg"), (0, 1, 0, 1),
               circle_groups=[balls, fam])
    return _finish(outdir, report, scenario, "balls", started)


def cmd_approx2d(scenario, outdir, args) -> int:
    from .approx2d import approximate_2d
    started = time.time()
    u = sc.build_function2d(scenario)
    res = approximate_2d(u, T=float(scenario.params["T"]),
                         cover_radius=scenario.params["cover_radius"],
                         n_times=int(scenario.params["n_times"]))
    np.savetxt(os.path.join(outdir, "w_values.csv"), res.w.values,
               delimiter=",")
    _write_json(os.path.join(outdir, "omega.json"),
                [{"cx": b.center[0], "cy": b.center[1], "r": b.radius,
                  "id": b.id} for b in res.omega.disks])
    d = u.domain
    _svg_scene(os.path.join(outdir, "overlay.svg"),
               (d.origin[0], d.origin[0] + (d.nx - 1) * d.spacing,
                d.origin[1], d.origin[1] + (d.ny - 1) * d.spacing),
               segments=[c.points for c in u.jump_curves],
               circle_groups=[res.trace.active_at(0.0), res.omega.disks])
    return _finish(outdir, res.report, scenario, "approx2d", started,
                   extra={"t0": res.t0, "T": res.T})


def cmd_approx3d(scenario, outdir, args) -> int:
    from .approx3d import approximate_3d, poincare_profile
    started = time.time()
    u = sc.build_function3d(scenario)
    cover = scenario.params["cover_radius"] or u.meta.get("cover_radius")
    res = approximate_3d(u, T=float(scenario.params["T"]),
                         cover_radius=cover, eta=scenario.params["eta"])
    _write_json(os.path.join(outdir, "omega_voxels.json"),
                res.omega.run_length_encode())
    _write_json(os.path.join(outdir, "slice_disks.json"),
                [[{"cx": b.center[0], "cy": b.center[1], "r": b.radius}
                  for b in disks] for disks in res.omega.slice_disks])
    a, err = poincare_profile(u, res.w, res.omega)
    np.savetxt(os.path.join(outdir, "profile_a.csv"), a, delimiter=",")
    eu = dirichlet_energy(u, "spatial")
    res.report.add("poincare_error", err)
    res.report.add("poincare_ratio", err / eu if eu > 0 else 0.0,
                   tag="slice-average distance vs spatial energy")
    base = u.base
    box = (base.origin[0], base.origin[0] + (base.nx - 1) * base.spacing,
           base.origin[1], base.origin[1] + (base.ny - 1) * base.spacing)
    for k in range(u.n_slices):
        if res.omega.slice_disks[k]:
            _svg_scene(os.path.join(outdir, f"slice_{k:03d}.svg"), box,
                       segments=[c.points
                                 for c in u.slice_function(k).jump_curves],
                       circle_groups=[res.omega.slice_disks[k]])
            break
    return _finish(outdir, res.report, scenario, "approx3d", started,
                   extra={"t0": res.t0, "T": res.T})


def cmd_ms_gamma(scenario, outdir, args) -> int:
    from .mumford_shah import compactness_pipeline
    started = time.time()
    family, eps_values = sc.ms_family(scenario)
    rep = compactness_pipeline(family, eps_values,
                               delta=float(scenario.params["delta"]))
    _write_json(os.path.join(outdir, "gamma_report.json"), rep.to_dict())
    for e, rec in zip(rep.epsilons, rep.per_eps):
        with open(os.path.join(outdir, f"trace_eps_{e:g}.csv"), "w",
                  newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["w", "c"])
            for a, b in zip(rec["w_values"], rec["c_values"]):
                w.writerow([repr(float(a)), repr(float(b))])
    if all(d > 0 for d in rep.diagnostics):
        _svg_decay(os.path.join(outdir, "decay.svg"),
                   np.array(rep.epsilons), np.array(rep.diagnostics),
                   "convergence-in-measure diagnostic")
    return _finish(outdir, rep.report, scenario, "ms-gamma", started,
                   extra={"diagnostics": rep.diagnostics,
                          "branches": rep.branches})


def cmd_counterexample_sweep(scenario, outdir, args) -> int:
    from .approx3d import counterexample_sweep
    started = time.time()
    kind = scenario.kind[-1] if scenario.kind.startswith("counterexample") \
        else "a"
    hs = [0.05, 0.1, 0.2, 0.4]
    rows, fits = counterexample_sweep(kind, hs, T=float(scenario.params["T"]),
                                      n_slices=int(scenario.params["n_slices"]))
    with open(os.path.join(outdir, "sweep.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(sorted(rows[0]))
        for r in rows:
            w.writerow([repr(r[k]) for k in sorted(r)])
    report = EnergyReport()
    key = "volume" if kind == "a" else "perimeter_2"
    report.add(f"exponent_{key}", fits[key])
    report.add(f"exponent_{key}_error", abs(fits[key] - 1.0), bound=0.15,
               slack=0.0, tag="linear scaling of thin-jump excision")
    _svg_decay(os.path.join(outdir, "scaling.svg"), np.array(hs),
               np.array([r[key] for r in rows]), key)
    return _finish(outdir, report, scenario, "counterexample-sweep", started,
                   extra={"rows": rows, "fits": fits})


COMMANDS = {"balls": cmd_balls, "approx2d": cmd_approx2d,
            "approx3d": cmd_approx3d, "ms-gamma": cmd_ms_gamma,
            "counterexample-sweep": cmd_counterexample_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    outdir = args.out or os.path.join("out", args.command)
    os.makedirs(outdir, exist_ok=True)
    try:
        if args.scenario:
            scenario = sc.load_scenario(args.scenario)
        else:
            scenario = _default_scenario(args.command, args)
        scenario = _apply_overrides(scenario, args)
        return COMMANDS[args.command](scenario, outdir, args)
    except ValidationError as exc:
        for path, msg in exc.issues:
            print(f"validation error: {path}: {msg}", file=sys.stderr)
        open(os.path.join(outdir, "FAILED"), "w").write(str(exc) + "\n")
        return 2
    except (JumpSetTooLarge, BudgetViolation) as exc:
        print(f"bound violation ({type(exc).__name__}): {exc}",
              file=sys.stderr)
        open(os.path.join(outdir, "FAILED"), "w").write(str(exc) + "\n")
        return 1
    except (PreconditionError, UsageError) as exc:
        print(f"validation error ({type(exc).__name__}): {exc}",
              file=sys.stderr)
        open(os.path.join(outdir, "FAILED"), "w").write(str(exc) + "\n")
        return 2
    except JumpfreeError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        open(os.path.join(outdir, "FAILED"), "w").write(str(exc) + "\n")
        return 3
    except Exception as exc:  # noqa: BLE001 - surfaced as internal error
        print(f"internal error: {exc}", file=sys.stderr)
        open(os.path.join(outdir, "FAILED"), "w").write(str(exc) + "\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
