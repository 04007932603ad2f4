"""Tests for domains, jump geometry, energies and covering."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumpfree.errors import PreconditionError, UsageError, ValidationError
from jumpfree.gsbv import (CylinderPatch, Domain2D, Function3D, JumpCurve,
                           PiecewiseFunction2D, PlanePatch, TrianglePatch,
                           covering_constant, dirichlet_energy, extend,
                           jump_mass, vitali_cover)


def square_domain(margin=0.5, spacing=1 / 32):
    return Domain2D(shape="rectangle", margin=margin, spacing=spacing,
                    bounds=(0, 1, 0, 1))


def test_domain_validation():
    with pytest.raises(ValidationError):
        Domain2D(shape="rectangle", margin=0.0, spacing=0.1, bounds=(0, 1, 0, 1))
    with pytest.raises(ValidationError):
        Domain2D(shape="rectangle", margin=0.5, spacing=-1, bounds=(0, 1, 0, 1))
    with pytest.raises(ValidationError):
        Domain2D(shape="triangle", margin=0.5, spacing=0.1)
    with pytest.raises(ValidationError):
        Domain2D(shape="rectangle", margin=0.5, spacing=0.1)


def test_domain_margin_snapped_to_grid():
    d = Domain2D(shape="rectangle", margin=0.43, spacing=0.1,
                 bounds=(0, 1, 0, 1))
    assert d.margin == pytest.approx(0.4)
    j0, j1, i0, i1 = d.inner_window()
    xs, ys = d.xs(), d.ys()
    assert xs[i0] == pytest.approx(0.0)
    assert xs[i1] == pytest.approx(1.0)
    assert ys[j0] == pytest.approx(0.0)


def test_disk_domain_has_no_inner_window():
    d = Domain2D(shape="disk", margin=0.5, spacing=0.1, center=(0, 0),
                 radius=1.0)
    with pytest.raises(UsageError):
        d.inner_window()
    assert d.area("inner") == pytest.approx(math.pi)
    assert d.area("outer") == pytest.approx(math.pi * 1.5 ** 2)


def test_jump_curve_validation_and_length():
    with pytest.raises(ValidationError):
        JumpCurve(points=np.array([[0.0, 0.0]]))
    with pytest.raises(ValidationError):
        JumpCurve(points=np.array([[0.0, 0.0], [0.0, 0.0]]))
    c = JumpCurve(points=np.array([[0, 0], [3, 4]], dtype=float))
    assert c.length() == pytest.approx(5.0)


@settings(deadline=None, max_examples=30)
@given(ang=st.floats(0, 2 * math.pi), tx=st.floats(-3, 3),
       ty=st.floats(-3, 3))
def test_jump_mass_rigid_motion_invariance(ang, tx, ty):
    pts = np.array([[0.0, 0.0], [0.3, 0.1], [0.5, 0.4]])
    R = np.array([[math.cos(ang), -math.sin(ang)],
                  [math.sin(ang), math.cos(ang)]])
    moved = pts @ R.T + np.array([tx, ty])
    a = jump_mass([JumpCurve(points=pts)])
    b = jump_mass([JumpCurve(points=moved)])
    assert b == pytest.approx(a, rel=1e-12)


def test_jump_mass_additive_over_disjoint_curves():
    c1 = JumpCurve(points=np.array([[0.0, 0.0], [1.0, 0.0]]))
    c2 = JumpCurve(points=np.array([[0.0, 1.0], [1.0, 1.0]]))
    assert jump_mass([c1, c2]) == pytest.approx(
        jump_mass([c1]) + jump_mass([c2]), rel=1e-12)


def test_patch_masses_exact():
    disk = PlanePatch(0.5, ("disk", (0.0, 0.0, 0.25)))
    assert disk.area() == pytest.approx(math.pi * 0.0625, rel=1e-15)
    assert disk.transverse() == 0.0
    assert disk.temporal() == disk.area()

    cyl = CylinderPatch((0, 0), 0.3, (0.0, 2.0))
    assert cyl.area() == pytest.approx(2 * math.pi * 0.3 * 2.0, rel=1e-15)
    assert cyl.transverse() == cyl.area()
    assert cyl.temporal() == 0.0

    # flat triangle in an x1 = const plane: purely temporal
    tri = TrianglePatch([[[0.5, 0, 0], [0.5, 1, 0], [0.5, 0, 1]]])
    assert tri.area() == pytest.approx(0.5, rel=1e-15)
    assert tri.temporal() == pytest.approx(0.5, rel=1e-15)
    assert tri.transverse() == pytest.approx(0.0, abs=1e-15)

    # triangle parallel to the x1 axis: purely transverse
    tri2 = TrianglePatch([[[0, 0.5, 0], [1, 0.5, 0], [0, 0.5, 1]]])
    assert tri2.transverse() == pytest.approx(0.5, rel=1e-15)
    assert tri2.temporal() == pytest.approx(0.0, abs=1e-15)


def test_dirichlet_energy_linear_function():
    d = square_domain()
    X, Y = d.node_points()
    u = PiecewiseFunction2D(domain=d, values=2.0 * X + 1.0 * Y,
                            jump_curves=[], p=2.0)
    # |grad u|^2 = 5 over the inner unit square
    assert dirichlet_energy(u) == pytest.approx(5.0, rel=1e-12)


def test_cut_cells_zero_without_jumps_positive_with():
    d = square_domain()
    X, Y = d.node_points()
    smooth = PiecewiseFunction2D(domain=d, values=X * Y, jump_curves=[], p=2.0)
    assert smooth.cut_cell_count() == 0
    crack = PiecewiseFunction2D(
        domain=d, values=X * Y,
        jump_curves=[JumpCurve(points=np.array([[0.4, 0.501], [0.6, 0.501]]))],
        p=2.0)
    assert crack.cut_cell_count() > 0


def test_extend_is_identity_on_inner_nodes():
    d = square_domain()
    X, Y = d.node_points()
    vals = np.sin(2 * np.pi * X) * Y
    u = PiecewiseFunction2D(domain=d, values=vals, jump_curves=[], p=2.0)
    U = extend(u)
    j0, j1, i0, i1 = d.inner_window()
    win = (slice(j0, j1 + 1), slice(i0, i1 + 1))
    assert np.array_equal(U.values[win], u.values[win])
    assert U.meta["energy_ratio"] >= 1.0
    with pytest.raises(PreconditionError):
        extend(U)  # already on S'


def test_vitali_cover_covers_curve():
    c = JumpCurve(points=np.array([[0.2, 0.2], [0.7, 0.55]]))
    cover = vitali_cover([c], cover_radius=0.05)
    pts = c.sample(0.01)
    for pt in pts:
        assert any(b.contains_point(pt, slack=1e-9) for b in cover)
    assert covering_constant(cover, [c]) >= 1.0
    with pytest.raises(PreconditionError):
        vitali_cover([c], cover_radius=0.0)


def test_function3d_slice_curves_and_crossings():
    d = square_domain(spacing=1 / 16, margin=0.25)
    n = 8
    vals = np.zeros((n, d.ny, d.nx))
    cyl = CylinderPatch((0.5, 0.5), 0.2, (0.0, 1.0))
    u = Function3D(x1_range=(0.0, 1.0), n_slices=n, base=d, values=vals,
                   patches=[cyl], p=2.0)
    # every slice section of the cylinder is its circle
    assert all(len(u.slice_function(k).jump_curves) == 1 for k in range(n))
    # plane patch crossed exactly once per column inside its region
    plane = PlanePatch(0.5, ("rect", (0, 1, 0, 1)))
    u2 = Function3D(x1_range=(0.0, 1.0), n_slices=n, base=d, values=vals,
                    patches=[plane], p=2.0)
    counts = u2.temporal_crossing_counts(np.array([[0.5, 0.5], [2.0, 2.0]]),
                                         0.0, 1.0)
    assert counts.tolist() == [1, 0]


def test_function3d_shape_validation():
    d = square_domain(spacing=1 / 16, margin=0.25)
    with pytest.raises(ValidationError):
        Function3D(x1_range=(0.0, 1.0), n_slices=4, base=d,
                   values=np.zeros((3, d.ny, d.nx)), patches=[], p=2.0)


def test_temporal_energy_of_x1_linear_lift():
    d = square_domain(spacing=1 / 16, margin=0.25)
    n = 32
    x1c = (np.arange(n) + 0.5) / n
    vals = np.broadcast_to((3.0 * x1c)[:, None, None],
                           (n, d.ny, d.nx)).copy()
    u = Function3D(x1_range=(0.0, 1.0), n_slices=n, base=d, values=vals,
                   patches=[], p=2.0)
    # d/dx1 = 3 exactly on the uniform slice grid; energy = 9 * area * length
    expected = 9.0 * 1.0 * (x1c[-1] - x1c[0])
    assert dirichlet_energy(u, "temporal") == pytest.approx(expected,
                                                            rel=1e-9)
    assert dirichlet_energy(u, "spatial") == pytest.approx(0.0, abs=1e-15)
