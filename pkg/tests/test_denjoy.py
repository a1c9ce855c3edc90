from fractions import Fraction

import pytest

from genexp.analysis import FORWARD, TWO_SIDED, companion_set
from genexp.denjoy import (
    ArcPoint,
    CantorPoint,
    arc_diameter_profile,
    arc_length,
    build_denjoy,
    cantor_samples,
    tail_length,
    theta,
    total_arc_length,
)
from genexp.exactnum import ALPHA
from genexp.spacemodel import SpaceError, truncate

F = Fraction


def test_arc_lengths():
    assert arc_length(0) == F(1, 3)
    assert arc_length(-2) == F(1, 12)
    assert arc_length(4) == F(1, 48)
    assert sum(arc_length(k) for k in range(-20, 21)) == 1 - F(1, 3) * F(1, 2**19)
    assert total_arc_length() == 1
    assert tail_length(20) == 1 - sum(arc_length(k) for k in range(-20, 21))


def test_fibers():
    D2 = build_denjoy(2)
    assert [D2.offset(("a", 0, i)) for i in range(2)] == [0, F(1, 3)]
    D3 = build_denjoy(3)
    assert [D3.offset(("a", 0, i)) for i in range(3)] == [0, F(1, 6), F(1, 3)]
    with pytest.raises(SpaceError):
        build_denjoy(1)


def test_apply_and_inverse():
    D = build_denjoy(3)
    assert D.apply(("a", 0, 0)) == ("a", 1, 0)
    c = ("cantor", 5, 1, 7)
    assert D.angle(D.apply(c)) == (D.angle(c) + ALPHA).frac()
    pts = truncate(D, {"k": 16, "cantor": 16}, 0).points
    assert len(pts) >= 100
    for p in pts:
        assert D.apply(D.apply(p), -1) == p


def test_point_records():
    assert ArcPoint(2, 1).pid == ("a", 2, 1)
    assert CantorPoint(3, F(1, 5)).pid == ("cantor", 3, 1, 5)
    with pytest.raises(SpaceError):
        CantorPoint(0, F(2))


def test_positions():
    D = build_denjoy(3)
    assert D.position(("a", 0, 0)).contains(0)
    assert D.position(("a", 0, 0), 8).width <= F(1, 2**5)
    d = D.dist(("a", 0, 0), ("a", 0, 2))
    assert d == F(1, 3)
    # refinement narrows the enclosure and keeps overlapping earlier ones
    pts = [("a", k, 1) for k in range(-10, 10)]
    for p in pts:
        widths = [D.position(p, b).width for b in range(8, 20)]
        assert all(w2 <= w1 for w1, w2 in zip(widths, widths[1:]))
        a, b = D.position(p, 8), D.position(p, 19)
        assert a.lo <= b.hi and b.lo <= a.hi


def test_positions_separate_in_a_truncation():
    D = build_denjoy(3)
    pts = truncate(D, {"k": 6, "cantor": 6}, 0).points
    ivs = sorted((D.position(p) for p in pts), key=lambda iv: iv.lo)
    for a, b in zip(ivs, ivs[1:]):
        assert a.hi < b.lo


def test_fiber_diameter_identity():
    D = build_denjoy(4)
    for k in range(-20, 21):
        assert D.dist(("a", k, 0), ("a", k, 3)) == arc_length(k)


def test_arc_diameter_profile():
    assert arc_diameter_profile(0, (0, 0)) == [F(1, 3)]
    assert arc_diameter_profile(3, (-3, -3)) == [F(1, 3)]
    assert arc_diameter_profile(0, (10, 10)) == [F(1, 3072)]
    prof = arc_diameter_profile(0, (-5, 10))
    assert len(prof) == 16 and max(prof) == F(1, 3)


def test_forward_fiber_stays_together():
    D = build_denjoy(3)
    tr = truncate(D, {"k": 8, "cantor": 4}, 24)
    for k in range(2, 9):
        members = companion_set(tr, ("a", k, 0), F(1, 8), mode=FORWARD).members
        assert {("a", k, i) for i in range(3)} <= set(members)


def test_fiber_separates_two_sided():
    D = build_denjoy(3)
    tr = truncate(D, {"k": 8, "cantor": 4}, 24)
    for k in range(-8, 9):
        members = companion_set(tr, ("a", k, 0), F(1, 8), mode=TWO_SIDED).members
        assert ("a", k, 2) not in members


def test_cantor_samples_avoid_the_truncated_arcs():
    K = 8
    samples = cantor_samples(10, K)
    assert len(samples) == 10
    D = build_denjoy(3)
    angles = sorted((theta(k), k) for k in range(-4 * K, 4 * K + 1))
    for s in samples:
        a = D.angle(s)
        below = [k for t, k in angles if t < a]
        above = [k for t, k in angles if t > a]
        # both neighbours in the finer orbit list lie outside the truncation
        assert abs(below[-1]) > K and abs(above[0]) > K


def test_separation_horizon_bounds_measured_separation():
    D = build_denjoy(3)
    bounds = {"k": 6, "cantor": 4}
    H = D.separation_horizon(bounds)
    tr = truncate(D, bounds, H)
    for x in tr.points:
        members = companion_set(tr, x, F(1, 8), mode=TWO_SIDED).members
        assert all(y[:2] == x[:2] for y in members)  # only its own fiber (or itself)
