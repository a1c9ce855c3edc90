import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genexp.denjoy import build_denjoy
from genexp.exactnum import CertifiedInterval
from genexp.spacemodel import (
    CIRCLE,
    PLANE,
    Family,
    Point,
    SpaceError,
    TruncationError,
    brute_force_derived_chain,
    distance,
    hausdorff_distance,
    orbit,
    power_system,
    truncate,
    validate_space,
)
from genexp.winding import INF, SSystem, build_harmonic, build_tower, build_winding_x2, s_coord, standard_S

F = Fraction


def plane(x, y, name="p"):
    return Point((name,), (F(x), F(y)))


def test_distance_examples():
    a = plane(0, 0)
    assert distance(a, a) == 0
    assert distance(a, plane(1, 1)) == 1
    D = build_denjoy(3)
    d = distance(D.point(("a", 0, 0)), D.point(("a", 0, 2)), CIRCLE)
    assert isinstance(d, CertifiedInterval) and d.contains(F(1, 3))
    assert D.dist(("a", 0, 0), ("a", 0, 2)) == F(1, 3)


def test_distance_rejects_mixed_coordinates():
    D = build_denjoy(2)
    with pytest.raises(SpaceError):
        distance(plane(0, 0), D.point(("a", 0, 0)))
    with pytest.raises(SpaceError):
        distance(plane(0, 0), plane(1, 0), CIRCLE)


def test_truncate_examples():
    tr = truncate(standard_S(), {"index": 5}, 2)
    assert len(tr) == 12 and INF in tr.points
    assert tr.at(("s", 5), 2) == ("s", 7)
    h = truncate(build_harmonic(), {"N": 64}, 10)
    assert len(h) == 64
    assert len(truncate(standard_S(), {"index": -1}, 3)) == 1  # only the fixed point


def test_truncate_names_the_escaping_point():
    class Leaky(SSystem):
        def apply(self, pid, k=1):
            if pid != INF and pid[1] + k > 3:
                raise SpaceError("off the end")
            return super().apply(pid, k)

    with pytest.raises(TruncationError, match=r"s\[3\]"):
        truncate(Leaky(), {"index": 3}, 1)


def test_orbit_examples():
    S = standard_S()
    assert orbit(S, INF, (-3, 3)) == [INF] * 7
    assert orbit(S, ("s", 0), (0, 3)) == [("s", j) for j in range(4)]
    H = build_harmonic()
    assert [H.coord(p)[0] for p in orbit(H, ("h", 4), (0, 2))] == [F(1, 4), F(1, 5), F(1, 6)]


def test_power_system_examples():
    S = standard_S()
    assert power_system(S, 1) is S
    inv = power_system(S, -1)
    for p in truncate(S, {"index": 6}, 0).points:
        assert S.apply(inv.apply(p)) == p
    H2 = power_system(build_harmonic(), 2)
    assert H2.apply(("h", 4)) == ("h", 6)
    with pytest.raises(ValueError):
        power_system(S, 0)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_power_orbit_is_every_kth_entry(k):
    for sys, bounds in [(build_harmonic(), {"N": 64}), (build_winding_x2(2), {"levels": 1, "index": 2})]:
        P = power_system(sys, k)
        pts = truncate(sys, bounds, 0).points
        assert len(pts) <= 200
        m = 5
        for x in pts:
            assert orbit(P, x, (-m, m)) == orbit(sys, x, (-m * k, m * k))[::k]


def test_hausdorff_examples():
    A = [(F(0), F(0))]
    assert hausdorff_distance(A, A) == 0
    assert hausdorff_distance(A, [(F(1), F(0))]) == 1
    with pytest.raises(SpaceError):
        hausdorff_distance([], A)


def test_hausdorff_of_levels_to_S_decreases():
    X = build_winding_x2(2)
    S = [s_coord(j) for j in range(-6, 7)]
    vals = []
    for i in (1, 2, 3):
        wind = range(0, X.extent(i) + 1)
        vals.append(hausdorff_distance([X.coord(("x", i, 1, j)) for j in wind], S))
    assert vals[0] > vals[1] > vals[2]


def test_metric_axioms_on_small_truncations():
    for sys, bounds in [(standard_S(), {"index": 6}), (build_harmonic(), {"N": 24}),
                        (build_winding_x2(2), {"levels": 1, "index": 1})]:
        pts = truncate(sys, bounds, 0).points
        assert len(pts) <= 64
        d = {(p, q): sys.dist(p, q) for p in pts for q in pts}
        for p, q in itertools.product(pts, pts):
            assert d[p, q] == d[q, p]
            assert (d[p, q] == 0) == (p == q)
        for p, q, r in itertools.product(pts, pts, pts):
            assert d[p, r] <= d[p, q] + d[q, r]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10), st.integers(0, 6))
def test_truncate_is_monotone(j, extra):
    S = standard_S()
    small = set(truncate(S, {"index": j}, 1).points)
    big = set(truncate(S, {"index": j + extra}, 1).points)
    assert small <= big


def test_validate_space_examples():
    assert validate_space(standard_S(), 20, F(1, 8)).ok
    assert validate_space(build_winding_x2(2), 50, F(1, 8)).ok


def test_validate_space_negative_control():
    class Redirected(SSystem):
        def families(self, length):
            js = list(range(-length, length + 1))
            return [Family(("S",), ("s", 0), [("s", j) for j in js], js, [F(1, abs(j) + 1) for j in js])]

    rep = validate_space(Redirected(), 20, F(1, 8))
    assert not rep.ok
    assert any(p["check"] == "tail-bound" for p in rep.problems)
    assert any("index" in p for p in rep.problems)


def test_validate_space_requires_positive_prefix():
    with pytest.raises(ValueError):
        validate_space(standard_S(), 0, F(1, 8))


def test_brute_force_chain_of_S():
    chain = brute_force_derived_chain(standard_S(), 10)
    assert chain[1] == {INF} and chain[-1] == set()


def test_tower_brute_force_reaches_the_fixed_point():
    chain = brute_force_derived_chain(build_tower(3), 20)
    assert chain[-2] == {INF}
