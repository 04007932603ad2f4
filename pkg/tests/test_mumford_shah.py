"""Tests for the anisotropic energies, jump removal and the pipeline."""

import math

import numpy as np
import pytest

from jumpfree import scenarios as sc
from jumpfree.errors import (BudgetViolation, PreconditionError, UsageError,
                             ValidationError)
from jumpfree.gsbv import Domain2D
from jumpfree.mumford_shah import (Function1D, compactness_pipeline,
                                   energy_F_0, energy_F_eps, jump_removal,
                                   lambda_slice_sets,
                                   piecewise_constant_projection,
                                   select_columns)
from jumpfree.approx3d import approximate_3d, poincare_profile
from jumpfree.scenarios import function3d_from_profile
from tests.conftest import make_jump_triple


def base_domain():
    return Domain2D(shape="rectangle", margin=0.25, spacing=1 / 16,
                    bounds=(0, 1, 0, 1))


def step_function1d(n=32):
    xs = (np.arange(n) + 0.5) / n
    vals = np.where(xs > 0.5, 1.0, 0.0)
    k = int(np.searchsorted(xs, 0.5))
    return Function1D((0.0, 1.0), vals,
                      [(0.5 * (xs[k - 1] + xs[k]), 0.0, 1.0)], p=2.0)


def test_function1d_validation():
    with pytest.raises(ValidationError):
        Function1D((1.0, 0.0), np.zeros(4))
    with pytest.raises(ValidationError):
        Function1D((0.0, 1.0), np.zeros(4), [(0.0, 0.0, 1.0)])
    with pytest.raises(ValidationError):
        Function1D((0.0, 1.0), np.zeros(4),
                   [(0.6, 0.0, 1.0), (0.4, 0.0, 1.0)])


def test_declared_jump_excluded_from_derivative():
    u = step_function1d()
    assert u.grad_energy() == pytest.approx(0.0, abs=1e-15)
    assert u.jump_count == 1
    assert energy_F_0(u, cross_section_area=2.0) == pytest.approx(2.0)


def test_F_eps_equals_F_0_for_lifted_profiles():
    base = base_domain()
    u1 = step_function1d()
    u3 = function3d_from_profile(u1.values, base)
    area = base.area("inner")
    for eps in (1.0, 0.1, 0.01):
        assert energy_F_eps(u3, eps) == pytest.approx(
            energy_F_0(u1, area), abs=1e-6)
    with pytest.raises(ValidationError):
        energy_F_eps(u3, 0.0)


def test_F_eps_monotone_as_eps_shrinks():
    fam, eps = sc.ms_family(sc.preset("ms-ripple"))
    vals = [energy_F_eps(u, e) for u, e in zip(fam, eps)]
    # eps list is descending; the ripple's temporal energy scales like eps,
    # so F_eps decreases monotonically toward the limit
    for a, b in zip(vals, vals[1:]):
        assert b <= a


def test_jump_removal_identity_when_u_equals_v():
    u, v, A = make_jump_triple(0, 1, 1)
    r = jump_removal(u, u, A=A)
    assert r.A_tilde == []
    assert np.allclose(r.w.values, u.values, atol=1e-12)
    assert r.w.jump_count == u.jump_count
    assert r.report.all_passed()


def test_jump_removal_degenerate_piecewise_constant():
    n = 100
    xs = (np.arange(n) + 0.5) / n
    u = Function1D((0.0, 1.0), np.zeros(n), [], p=2.0)
    vals = np.where(xs > 0.3, 1.0, 0.0)
    k = int(np.searchsorted(xs, 0.3))
    v = Function1D((0.0, 1.0), vals,
                   [(0.5 * (xs[k - 1] + xs[k]), 0.0, 1.0)], p=2.0)
    r = jump_removal(u, v)
    assert r.degenerate
    # everything is discarded: the single gap structure collapses
    assert sum(b - a for a, b in r.A_tilde) == pytest.approx(1.0, rel=1e-9)


def test_jump_removal_reduces_jump_count():
    u, v, A = make_jump_triple(0, 1, 2)
    r = jump_removal(u, v, A=A)
    assert r.w.jump_count <= 1
    assert r.w.grad_energy() <= v.grad_energy() + 1e-12
    assert r.report.all_passed()


def test_jump_removal_preconditions():
    u, v, _ = make_jump_triple(0, 1, 2)
    with pytest.raises(PreconditionError):
        jump_removal(v, u)  # #J_u > #J_v
    u1 = Function1D((0.0, 1.0), np.zeros(10), [], p=1.0)
    with pytest.raises(UsageError):
        jump_removal(u1, u1)
    short = Function1D((0.0, 1.0), np.zeros(5), [], p=2.0)
    tall = Function1D((0.0, 1.0), np.zeros(6), [], p=2.0)
    with pytest.raises(PreconditionError):
        jump_removal(short, tall)


def _ribbon_with_omega():
    u = sc.random_ribbon_function(0)
    res = approximate_3d(u, T=1.0, cover_radius=u.meta["cover_radius"])
    a, _ = poincare_profile(u, res.w, res.omega)
    return u, res.omega, a


def test_lambda_masks_markov_exact():
    u, omega, a = _ribbon_with_omega()
    inner = u.base.node_mask("inner")
    n_inner = int(np.count_nonzero(inner))
    for lam in (2.0, 16.0):
        masks = lambda_slice_sets(u, omega, a, lam)
        for name, mask in masks.items():
            viol = int(np.count_nonzero(inner & ~mask))
            assert viol * lam <= n_inner, (name, lam)
    with pytest.raises(PreconditionError):
        lambda_slice_sets(u, omega, a, 1.0)


def test_select_columns_lexicographic():
    u, omega, a = _ribbon_with_omega()
    xq, yq = select_columns(u, omega, a, delta=0.25)
    for node in (xq, yq):
        j, i = node
        assert 0 <= j < u.base.ny and 0 <= i < u.base.nx


def test_piecewise_constant_projection():
    w = step_function1d()
    c = piecewise_constant_projection(w)
    assert np.array_equal(np.unique(c), np.array([0.0, 1.0]))


def test_pipeline_step_family_diagnostics_zero():
    fam, eps = sc.ms_family(sc.preset("ms-step"))
    rep = compactness_pipeline(fam, eps)
    assert rep.diagnostics == [0.0] * len(eps)
    assert rep.report.all_passed()
    assert all(j == 1 for j in rep.jump_counts)


def test_pipeline_refuses_energy_blowup():
    fam, eps = sc.ms_family(sc.preset("ms-ripple"))
    # undo the eps^(1/p) damping: constant-amplitude ripple has 1/eps blowup
    base = fam[0].base
    X, _ = base.node_points()
    blowup = []
    for u, e in zip(fam, eps):
        vals = u.values + (1.0 - e ** 0.5) * 0.5 * np.sin(2 * np.pi * X)
        blowup.append(type(u)(x1_range=u.x1_range, n_slices=u.n_slices,
                              base=u.base, values=vals, patches=u.patches,
                              p=u.p))
    with pytest.raises(BudgetViolation):
        compactness_pipeline(blowup, eps)


def test_pipeline_requires_matching_lengths():
    fam, eps = sc.ms_family(sc.preset("ms-step"))
    with pytest.raises(PreconditionError):
        compactness_pipeline(fam, eps[:-1])
