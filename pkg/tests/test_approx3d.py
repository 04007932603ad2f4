"""Tests for the sliced 3D pipeline and the scaling counterexamples."""

import math

import numpy as np
import pytest

from jumpfree.approx3d import (ExceptionalSet3D, admissible_slices,
                               anisotropic_rescale, approximate_3d,
                               build_cylinders, counterexample_family,
                               _greedy_ball_cover, poincare_profile,
                               sliced_construction, strip_exceptional)
from jumpfree.balls import Ball
from jumpfree.errors import JumpSetTooLarge, PreconditionError
from jumpfree.gsbv import (Domain2D, JumpCurve, PiecewiseFunction2D,
                           dirichlet_energy, jump_mass)
from jumpfree.scenarios import (function3d_from_profile,
                                random_ribbon_function)
from tests.conftest import report_values


def test_anisotropic_rescale_is_pure_relabeling():
    u = random_ribbon_function(0)
    U, delta = anisotropic_rescale(u)
    assert 0 < delta <= 1
    assert np.array_equal(U.values, u.values)
    assert (U.base.nx, U.base.ny) == (u.base.nx, u.base.ny)
    assert U.base.spacing == pytest.approx(u.base.spacing * delta)
    trans = jump_mass(u.patches, "transverse")
    assert U.meta["rescaled_jump_area"] <= 2 * delta * trans + 1e-9


def test_greedy_cover_separation():
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 1, size=(200, 3))
    kept = _greedy_ball_cover(pts, r=0.2)
    for i in range(len(kept)):
        for j in range(i + 1, len(kept)):
            assert np.linalg.norm(kept[i] - kept[j]) > 0.2 - 1e-12


def test_admissible_slices_markov_bound_exact():
    u = random_ribbon_function(0)
    U, delta = anisotropic_rescale(u)
    fam = build_cylinders(U, delta, cover_radius=0.0125 * delta)
    eta = 0.05
    ad = admissible_slices(fam, eta)
    traces, ad2, report = sliced_construction(fam, T=1.0, eta=eta)
    assert np.array_equal(ad, ad2)
    vals = report_values(report)
    # exact Markov: measure of excluded slices <= radii integral / eta
    assert vals["inadmissible_measure"] <= fam.radii_integral() / eta + 1e-12
    with pytest.raises(PreconditionError):
        admissible_slices(fam, 0.0)


def test_exceptional_set_exact_measures():
    base = Domain2D(shape="rectangle", margin=0.25, spacing=1 / 16,
                    bounds=(0, 1, 0, 1))
    n = 4
    disk = Ball(center=(0.5, 0.5), radius=0.1, id=0)
    om = ExceptionalSet3D(admissible=np.array([True] * n),
                          slice_disks=[[disk]] * n, base=base,
                          x1_range=(0.0, 1.0), n_slices=n)
    assert om.volume() == pytest.approx(math.pi * 0.01, rel=1e-12)
    assert om.directional_perimeter(2) == pytest.approx(4 * 0.1, rel=1e-12)
    assert om.directional_perimeter(3) == pytest.approx(4 * 0.1, rel=1e-12)
    # one fully excised slice contributes the whole base area
    om2 = ExceptionalSet3D(admissible=np.array([True, False, True, True]),
                           slice_disks=[[], [], [], []], base=base,
                           x1_range=(0.0, 1.0), n_slices=n)
    assert om2.volume() == pytest.approx(base.area("inner") / n, rel=1e-12)


def test_approximate_3d_ribbon_scenario():
    u = random_ribbon_function(0)
    res = approximate_3d(u, T=1.0, cover_radius=u.meta["cover_radius"])
    assert res.report.all_passed()
    assert res.residual_jump_points == 0
    # node-exact outside omega, slice-wise; no cut cells in w
    om = res.omega.node_mask()
    j0, j1, i0, i1 = u.base.inner_window()
    win = (slice(j0, j1 + 1), slice(i0, i1 + 1))
    changed_any = False
    for k in range(u.n_slices):
        diff = res.w.values[k][win] != u.values[k][win]
        assert not np.any(diff & ~om[k][win])
        changed_any = changed_any or bool(np.any(diff))
        assert res.w.slice_function(k).cut_cell_count() == 0
    assert changed_any


def test_approximate_3d_refuses_oversized_transverse_mass():
    u = random_ribbon_function(0)
    with pytest.raises(JumpSetTooLarge):
        approximate_3d(u, T=1.0, cover_radius=u.meta["cover_radius"],
                       eta=1e-6)


def test_poincare_exact_zero_for_x1_only_function():
    base = Domain2D(shape="rectangle", margin=0.25, spacing=1 / 16,
                    bounds=(0, 1, 0, 1))
    n = 16
    x1c = (np.arange(n) + 0.5) / n
    prof = np.where(x1c > 0.5, 1.0, 0.0)
    u = function3d_from_profile(prof, base)
    res = approximate_3d(u, T=1.0)
    a, err = poincare_profile(u, res.w, res.omega)
    assert err == 0.0
    assert np.array_equal(a, prof)


def test_counterexample_family_guards():
    with pytest.raises(PreconditionError):
        counterexample_family("a", h=0.0)
    with pytest.raises(PreconditionError):
        counterexample_family("b", h=0.6)
    ua = counterexample_family("a", h=0.1)
    ub = counterexample_family("b", h=0.1)
    # kind a: fixed disk area, thin in x1; kind b: thin tube, long in x1
    assert jump_mass(ua.patches, "temporal") > 0
    assert jump_mass(ub.patches, "temporal") == 0.0
    assert jump_mass(ub.patches, "transverse") == pytest.approx(
        2 * math.pi * 0.1 * 2.0, rel=1e-12)


def test_strip_exceptional_bound():
    d = Domain2D(shape="rectangle", margin=0.5, spacing=1 / 32,
                 bounds=(0, 1, 0, 1))
    X, Y = d.node_points()
    curves = [JumpCurve(points=np.array([[0.3, 0.4], [0.5, 0.45]]))]
    u = PiecewiseFunction2D(domain=d, values=X * Y, jump_curves=curves, p=2.0)
    strip = strip_exceptional(u)
    nu2 = sum(abs(c.points[-1, 0] - c.points[0, 0]) for c in curves)
    assert strip.measure() <= strip.height * nu2 + 1e-12
    assert strip.contains_x1(0.4)
    assert not strip.contains_x1(0.9)


def test_energy_never_increases_under_fill():
    u = random_ribbon_function(1)
    res = approximate_3d(u, T=1.0, cover_radius=u.meta["cover_radius"])
    vals = report_values(res.report)
    assert vals["energy_spatial_w"] <= vals["energy_spatial_u"] * (1 + 1e-9)
    assert dirichlet_energy(res.w, "spatial") == pytest.approx(
        vals["energy_spatial_w"], rel=1e-12)
