from fractions import Fraction

import pytest

from genexp.analysis import derived_levels
from genexp.exactnum import Ordinal, parse_ordinal
from genexp.spacemodel import SpaceError, orbit, validate_space
from genexp.winding import (
    INF,
    WindingError,
    build_harmonic,
    build_limit_glue,
    build_tower,
    build_winding_x2,
    cb_rank_of,
    make_neighborhood_system,
    nth_prime,
    s_coord,
    standard_S,
    winding_number,
)

F = Fraction
W = Ordinal.omega()


def test_standard_S_examples():
    S = standard_S()
    assert S.apply(INF) == INF
    assert S.apply(("s", -1), 3) == ("s", 2)
    assert cb_rank_of(S) == Ordinal.of(1)
    assert s_coord(0) == (1, 1) and s_coord(-1) == (F(1, 2), F(-1, 2))


@pytest.mark.parametrize("r", [1, 2, 3, 7])
def test_neighborhood_systems_are_disjoint_and_cover_S(r):
    V = make_neighborhood_system(r)
    V.check()
    assert set(V.radii.values()) == {F(1, 4 * (r + 2) ** 2)}
    assert V.rho == F(1, r + 2)


def test_neighborhood_examples():
    V2 = make_neighborhood_system(2)
    assert V2.locate(s_coord(3)) == "inf"  # norm 1/4 == rho
    V1 = make_neighborhood_system(1)
    assert V1.locate(s_coord(0)) == 0
    assert V1.locate((F(9, 10), F(0))) is None
    with pytest.raises(WindingError):
        make_neighborhood_system(0)


def test_winding_of_S_orbits():
    V = make_neighborhood_system(1)
    seq = [s_coord(j) for j in range(-6, 7)]
    cert = winding_number(seq, -6, V)
    assert cert.d == 1
    assert winding_number([(F(0), F(0))] * 9, 0, V).d == 0


def test_point_in_no_cell_is_an_error():
    V = make_neighborhood_system(1)
    seq = [(F(0), F(0)), (F(9, 10), F(0)), (F(0), F(0))]
    with pytest.raises(WindingError):
        winding_number(seq, 0, V)


def test_incomplete_pass_has_no_winding_number():
    V = make_neighborhood_system(1)
    seq = [(F(0), F(0)), s_coord(-1), s_coord(0), (F(0), F(0))]
    assert winding_number(seq, 0, V) is None


@pytest.mark.parametrize("n", [2, 3])
def test_x2_certificates_match_the_level_primes(n):
    X = build_winding_x2(n)
    for i in (1, 2, 3):
        for m in range(1, n + 1):
            cert = X.level_certificate(i, m)
            assert cert.d == X.p(i) == nth_prime(i)
            assert cert.k == X.k(i) > 2 * X.r(i)
    assert X.p(1) != X.p(2)


def test_x2_copies_share_a_cell_along_the_orbit():
    X = build_winding_x2(3)
    V = X.neighborhood(2)
    for j in range(0, X.extent(2) + 1):
        labs = {V.locate(X.coord(("x", 2, m, j))) for m in (1, 2, 3)}
        assert len(labs) == 1


def test_x2_rank_and_validation():
    X = build_winding_x2(2)
    assert cb_rank_of(X) == Ordinal.of(2)
    assert derived_levels(X)[2] == ["inf"]
    assert validate_space(X, 30, F(1, 8)).ok


def test_x2_with_supplied_primes():
    X = build_winding_x2(2, primes=[7, 11, 13])
    assert X.level_certificate(1, 1).d == 7
    assert X.level_certificate(3, 2).d == 13


@pytest.mark.parametrize("alpha,rank", [(3, Ordinal.of(3)), (4, Ordinal.of(4)), ("w+1", W + 1)])
def test_tower_ranks(alpha, rank):
    T = build_tower(parse_ordinal(str(alpha)))
    assert cb_rank_of(T) == rank
    levels = derived_levels(T)
    if isinstance(alpha, int):
        assert levels[alpha] == ["inf"] and levels[-1] == [] and len(levels) == alpha + 2
    else:
        # S has rank w: finite stages never remove it
        assert levels[-1] == ["S", "inf"]


def test_tower_two_is_x2():
    assert type(build_tower(2)).__name__ == "X2System"


def test_tower_copy_winds_around_S():
    T = build_tower(3)
    for i in (1, 2):
        cert = T.copy_certificate(i)
        assert cert is not None and cert.d >= 2


def test_tower_validates():
    assert validate_space(build_tower(3), 20, F(1, 8)).ok


def test_tower_rejections():
    with pytest.raises(WindingError, match="successor"):
        build_tower(W)
    with pytest.raises(WindingError):
        build_tower(1)
    with pytest.raises(WindingError, match="cap"):
        build_tower(parse_ordinal("w*2+5"))


def test_limit_glue():
    G = build_limit_glue([build_tower(r) for r in (2, 3, 4)])
    assert G.rank == W
    assert orbit(G, ("x0",), (-3, 3)) == [("x0",)] * 7
    assert validate_space(G, 20, F(1, 8)).ok


def test_limit_glue_rejections():
    with pytest.raises(WindingError):
        build_limit_glue([build_tower(2)])
    with pytest.raises(WindingError, match="increase"):
        build_limit_glue([build_tower(2), build_tower(2)])


def test_harmonic_rule():
    H = build_harmonic()
    assert H.apply(("h", 2)) == ("h", 3) and H.apply(("h", 3)) == ("h", 2)
    assert H.apply(("h", 7)) == ("h", 4)
    assert H.apply(("h0",)) == ("h0",) and H.apply(("h", 1)) == ("h", 1)
    for q in range(2, 70):
        per = 1 << (q.bit_length() - 1)
        assert H.apply(("h", q), per) == ("h", q)
        assert all(H.apply(("h", q), t) != ("h", q) for t in range(1, per))
    with pytest.raises(SpaceError):
        H.apply(("h", 0))


def test_harmonic_blocks_lie_near_zero():
    H = build_harmonic()
    for m in range(1, 6):
        delta = F(1, 2**m)
        for n in range(m, m + 3):
            assert all(H.coord(("h", q))[0] <= delta for q in range(2**n, 2 ** (n + 1)))
