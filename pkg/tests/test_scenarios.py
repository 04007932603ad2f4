"""Tests for scenario validation and the seeded generators."""

import json
import math

import numpy as np
import pytest

from jumpfree import scenarios as sc
from jumpfree.errors import ValidationError


def test_unknown_fields_rejected_with_paths():
    bad = {"name": "x", "kind": "crack2d", "domain": {"wiggle": 1},
           "params": {"bogus": 2}, "extra": 3}
    with pytest.raises(ValidationError) as err:
        sc.validate_scenario(bad)
    paths = {p for p, _ in err.value.issues}
    assert {"domain.wiggle", "params.bogus", "extra"} <= paths


def test_invalid_values_rejected():
    with pytest.raises(ValidationError):
        sc.validate_scenario({"name": "x", "kind": "nope"})
    with pytest.raises(ValidationError):
        sc.validate_scenario({"name": "x", "kind": "crack2d",
                              "params": {"T": -1.0}})
    with pytest.raises(ValidationError):
        sc.validate_scenario({"name": "x", "kind": "crack2d",
                              "params": {"seed": "zero"}})
    with pytest.raises(ValidationError):
        sc.validate_scenario({"name": "x", "kind": "balls",
                              "balls": [{"cx": 0.0, "cy": 0.0}]})


def test_load_scenario_roundtrip(tmp_path):
    s = sc.preset("crack2d", seed=7)
    path = tmp_path / "s.json"
    path.write_text(json.dumps(s.to_dict()))
    again = sc.load_scenario(path)
    assert again.to_dict() == s.to_dict()


def test_presets_validate_for_all_kinds():
    for kind in sc.KINDS:
        s = sc.preset(kind)
        assert s.kind == kind


def test_random_ball_family_disjoint_and_deterministic():
    fam = sc.random_ball_family(9, 20)
    fam2 = sc.random_ball_family(9, 20)
    assert fam == fam2
    for i in range(len(fam)):
        for j in range(i + 1, len(fam)):
            d = math.hypot(fam[i].center[0] - fam[j].center[0],
                           fam[i].center[1] - fam[j].center[1])
            assert d > fam[i].radius + fam[j].radius


def test_crack_function_jump_inside_domain():
    u = sc.random_crack_function(4)
    for c in u.jump_curves:
        assert np.all(c.points >= 0.0) and np.all(c.points <= 1.0)
    u2 = sc.random_crack_function(4)
    assert np.array_equal(u.values, u2.values)


def test_ribbon_function_deterministic_with_cover_radius():
    u = sc.random_ribbon_function(2)
    u2 = sc.random_ribbon_function(2)
    assert np.array_equal(u.values, u2.values)
    assert u.meta["cover_radius"] > 0


def test_ms_family_shapes_and_eps():
    fam, eps = sc.ms_family(sc.preset("ms-ripple"))
    assert len(fam) == len(eps) == 4
    assert eps == [0.1, 0.05, 0.025, 0.0125]
    # ripple amplitude shrinks with eps
    spans = [float(u.values[0].max() - u.values[0].min()) for u in fam]
    assert spans == sorted(spans, reverse=True)


def test_counterexample_presets_carry_sweep_defaults():
    s = sc.preset("counterexample-a")
    assert s.params["T"] == 0.5
    assert s.params["n_slices"] == 64
    # explicit overrides still win
    s2 = sc.preset("counterexample-a", n_slices=16)
    assert s2.params["n_slices"] == 16
