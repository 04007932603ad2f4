"""Unit and property tests for the growth-and-merge disk construction."""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumpfree.balls import (Ball, balls_from_json, balls_to_json, merge_pair,
                            next_collision_time, run_construction,
                            boundary_energy_profile,
                            truncated_countable_construction,
                            time_integrated_profile)
from jumpfree.errors import (DegenerateInputError, PreconditionError,
                             ValidationError)
from jumpfree.scenarios import random_ball_family

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
radius = st.floats(0.01, 2.0, allow_nan=False)


@given(cx=finite, cy=finite, r=radius, cx2=finite, cy2=finite, r2=radius)
def test_merge_pair_conserves_radius_and_center(cx, cy, r, cx2, cy2, r2):
    b = merge_pair(Ball((cx, cy), r, 0), Ball((cx2, cy2), r2, 1))
    assert b.radius == pytest.approx(r + r2, rel=1e-12)
    # center on the segment between the inputs, weighted toward the larger
    w = r / (r + r2)
    assert b.center[0] == pytest.approx(w * cx + (1 - w) * cx2, abs=1e-9)
    assert b.center[1] == pytest.approx(w * cy + (1 - w) * cy2, abs=1e-9)


@given(d=st.floats(0.1, 3.0), r=radius, r2=radius)
def test_merged_ball_contains_touching_inputs(d, r, r2):
    # place the pair exactly at contact distance
    b1 = Ball((0.0, 0.0), r, 0)
    b2 = Ball((r + r2, 0.0), r2, 1)
    m = merge_pair(b1, b2)
    for b in (b1, b2):
        for sgn in (-1, 1):
            edge = (b.center[0] + sgn * b.radius, b.center[1])
            assert m.contains_point(edge, slack=1e-9)


def test_merge_pair_zero_total_radius():
    with pytest.raises(DegenerateInputError):
        merge_pair(Ball((0, 0), 0.0, 0), Ball((1, 0), 0.0, 1))


def test_two_ball_event_time_closed_form():
    b1 = Ball((0.0, 0.0), 0.1, 0)
    b2 = Ball((1.0, 0.0), 0.15, 1)
    trace = run_construction([b1, b2], t_end=5.0)
    assert len(trace.events) == 1
    assert trace.events[0].time == pytest.approx(math.log(1.0 / 0.25),
                                                 rel=1e-12)
    assert next_collision_time([b1, b2]) == pytest.approx(
        math.log(1.0 / 0.25), rel=1e-12)


def test_overlapping_inputs_merge_at_time_zero():
    trace = run_construction([Ball((0, 0), 0.5, 0), Ball((0.1, 0), 0.5, 1)])
    assert trace.events and trace.events[0].time == 0.0
    assert trace.collapse_times[0] == 0.0
    assert trace.collapse_times[1] == 0.0


def test_duplicate_and_negative_inputs_rejected():
    with pytest.raises(PreconditionError):
        run_construction([Ball((0, 0), 0.1, 0), Ball((1, 0), 0.1, 0)])
    with pytest.raises(PreconditionError):
        run_construction([Ball((0, 0), -0.1, 0)])
    with pytest.raises(PreconditionError):
        run_construction([], t_end=-1.0)


def test_zero_radius_balls_dropped():
    trace = run_construction([Ball((0, 0), 0.0, 0), Ball((1, 0), 0.1, 1)],
                             t_end=1.0)
    assert trace.dropped_ids == [0]
    assert [b.id for b in trace.active_at(0.0)] == [1]


@settings(deadline=None, max_examples=25)
@given(seed=st.integers(0, 10 ** 6), t=st.floats(0.0, 3.0))
def test_radii_sum_exact_growth(seed, t):
    fam = random_ball_family(seed, 12)
    trace = run_construction(fam, t_end=4.0)
    total0 = sum(b.radius for b in fam)
    assert trace.radii_sum(t) == pytest.approx(math.exp(t) * total0,
                                               rel=1e-9)


@settings(deadline=None, max_examples=15)
@given(seed=st.integers(0, 10 ** 6), s=st.floats(0.0, 2.0),
       dt=st.floats(0.0, 2.0))
def test_nesting_of_active_unions(seed, s, dt):
    fam = random_ball_family(seed, 10)
    trace = run_construction(fam, t_end=5.0)
    t = s + dt
    pts = []
    for b in trace.active_at(s):
        pts.append(b.center)
        for ang in np.linspace(0, 2 * np.pi, 16, endpoint=False):
            pts.append((b.center[0] + b.radius * math.cos(ang),
                        b.center[1] + b.radius * math.sin(ang)))
    assert trace.union_contains(np.array(pts), t).all()


def test_active_at_outside_trace_window():
    trace = run_construction([Ball((0, 0), 0.1, 0)], t_end=1.0)
    with pytest.raises(PreconditionError):
        trace.active_at(-0.5)
    with pytest.raises(PreconditionError):
        trace.active_at(2.0)


def test_json_roundtrip():
    fam = random_ball_family(3, 7)
    again = balls_from_json(balls_to_json(fam))
    assert fam == again


def test_event_csv_columns(tmp_path):
    fam = random_ball_family(0, 8)
    trace = run_construction(fam, t_end=5.0)
    path = tmp_path / "events.csv"
    trace.to_event_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "time,consumed_ids,new_id,cx,cy,r"
    assert len(lines) == 1 + len(trace.events)


def test_truncated_prefix_collapse_times_monotone():
    fam = random_ball_family(5, 12)
    traces = truncated_countable_construction(iter(fam), n_max=12, t_end=6.0)
    assert len(traces) == 12
    for small, big in zip(traces, traces[1:]):
        # compare only initial-ball ids: merged balls reuse the id range
        # above the (smaller) prefix length, so they differ between runs
        initial = {b.id for b in small.initial_balls}
        for bid, t in small.collapse_times.items():
            if bid in big.collapse_times and bid in initial:
                assert big.collapse_times[bid] <= t + 1e-9


def test_boundary_profile_rejects_negative_field(bump_field):
    bump_field.values[0, 0] = -1.0
    trace = run_construction(random_ball_family(0, 4), t_end=2.0)
    with pytest.raises(ValidationError):
        boundary_energy_profile(trace, bump_field, [0.5])


def test_fubini_estimate_single_instance(bump_field):
    trace = run_construction(random_ball_family(1, 6), t_end=10.0)
    lhs = time_integrated_profile(trace, bump_field)
    assert lhs <= 1.01 * bump_field.integral()
