"""Winding constructions around the base sequence S.

S is the two-sided sequence s_j -> s_inf in the Chebyshev plane with
s_inf = (0, 0), s_j = (1/(j+1), 1/(j+1)) for j >= 0 and
s_j = (1/(|j|+1), -1/(|j|+1)) for j < 0.  The shift s_j -> s_{j+1} fixes s_inf.

Everything built here is addressed by pids (see ``spacemodel``):

* ``("inf",)`` and ``("s", j)`` are points of S,
* ``("x", i, m, j)`` is point j of copy m of the level-i winding family,
* ``("c", i, z)`` is the image of inner pid z under the level-i embedding of
  a tower,
* ``("g", t, z)`` is pid z of the t-th tower of a limit glue, ``("x0",)`` its
  glue point,
* ``("h0",)`` and ``("h", q)`` are points of the harmonic example.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .exactnum import Ordinal, ord_max
from .spacemodel import (
    DynSystem,
    Edge,
    Family,
    PointSchema,
    ScatteredSpace,
    SpaceError,
    chebyshev,
)

INF = ("inf",)
TOWER_CAP = Ordinal(((1, 2), (0, 4)))  # w*2+4
MAX_LEVEL = 64  # how deep witness suppliers will search


class WindingError(SpaceError):
    pass


# ---------------------------------------------------------------------------
# primes


_primes = [2, 3, 5, 7, 11, 13]


def nth_prime(t: int) -> int:
    """The t-th prime, 1-based."""
    if t < 1:
        raise ValueError("prime index starts at 1")
    while len(_primes) < t:
        c = _primes[-1] + 2
        while any(c % p == 0 for p in _primes if p * p <= c):
            c += 2
        _primes.append(c)
    return _primes[t - 1]


PrimeStream = Callable[[int], int]


def list_stream(primes: Sequence[int]) -> PrimeStream:
    primes = list(primes)
    for p in primes:
        if p < 2 or any(p % q == 0 for q in range(2, math.isqrt(p) + 1)):
            raise WindingError(f"{p} is not prime")
    if len(set(primes)) != len(primes):
        raise WindingError("primes must be distinct")

    def stream(t: int) -> int:
        if t > len(primes):
            raise WindingError(f"only {len(primes)} primes supplied, level {t} requested")
        return primes[t - 1]

    return stream


def copy_prime(stream: PrimeStream, i: int) -> int:
    """Winding prime of copy i of a tower: the odd positions of the stream."""
    return stream(2 * i - 1)


def child_stream(stream: PrimeStream, i: int) -> PrimeStream:
    """Primes reserved for the inner system of copy i.

    Positions 2^i (2t-1) for t >= 1.  Together with the odd positions these
    partition the stream, so no prime is used twice inside one tower.
    """
    return lambda t: stream((2 ** i) * (2 * t - 1))


def levels_for(length: int) -> int:
    """How many levels/copies a prefix of the given length includes."""
    return max(1, length.bit_length() - 1)


# ---------------------------------------------------------------------------
# the base sequence


def s_coord(j: int) -> tuple:
    a = Fraction(1, abs(j) + 1)
    return (a, a) if j >= 0 else (a, -a)


ORIGIN = (Fraction(0), Fraction(0))


def scale(c: Fraction, pt: tuple) -> tuple:
    return (c * pt[0], c * pt[1])


class SSystem(DynSystem):
    """The shift on S alone."""

    family = "S"

    def apply(self, pid, k=1):
        if pid == INF:
            return INF
        if pid[0] != "s":
            raise SpaceError(f"not a point of S: {pid!r}")
        return ("s", pid[1] + k)

    def coord(self, pid):
        return ORIGIN if pid == INF else s_coord(pid[1])

    def class_of(self, pid):
        return "inf" if pid == INF else "S"

    def enumerate(self, bounds):
        J = int(bounds.get("index", 16))
        return [INF] + [("s", j) for j in range(-J, J + 1)]

    def prefix(self, length):
        return self.enumerate({"index": length})

    def families(self, length):
        return [s_family(length)]

    @property
    def space(self):
        return ScatteredSpace(
            {"inf": PointSchema("inf", "fixed point s_inf", "atom", fixed=True),
             "S": PointSchema("S", "shift orbit s_j")},
            [Edge("S", "inf")],
        )

    def samples(self, schema):
        return [INF] if schema == "inf" else [("s", 0), ("s", 1), ("s", -1)]


def s_family(length: int) -> Family:
    js = list(range(-length, length + 1))
    return Family(("S",), INF, [("s", j) for j in js], js, [Fraction(1, abs(j) + 1) for j in js])


def standard_S() -> SSystem:
    return SSystem()


# ---------------------------------------------------------------------------
# neighborhood systems


@dataclass(frozen=True)
class Box:
    """Closed axis-parallel box: Chebyshev ball when hx == hy."""

    cx: Fraction
    cy: Fraction
    hx: Fraction
    hy: Fraction

    def contains(self, pt) -> bool:
        return abs(pt[0] - self.cx) <= self.hx and abs(pt[1] - self.cy) <= self.hy

    def disjoint(self, other: "Box") -> bool:
        return (abs(self.cx - other.cx) > self.hx + other.hx
                or abs(self.cy - other.cy) > self.hy + other.hy)


def ball(center: tuple, radius: Fraction) -> Box:
    return Box(center[0], center[1], radius, radius)


class LazyTable(Mapping):
    """Read-only map on a key range whose values are computed on first access.

    Deep tower copies need neighborhood systems and anchor tables with
    hundreds of thousands of entries, of which a truncation touches few.
    """

    def __init__(self, keys: range, make: Callable):
        self._keys = keys
        self._make = make
        self._done = {}

    def __getitem__(self, key):
        v = self._done.get(key)
        if v is None:
            if key not in self._keys:
                raise KeyError(key)
            v = self._done[key] = self._make(key)
        return v

    def __contains__(self, key):
        return isinstance(key, int) and key in self._keys

    def __iter__(self):
        return iter(self._keys)

    def __len__(self):
        return len(self._keys)


@dataclass
class NeighborhoodSystem:
    """Cells U(s_j), |j| <= r, plus the central cell U(s_inf)."""

    r: int
    cells: Mapping  # j -> Box
    inf_cell: Box
    standard: bool = False  # cells are the equal balls built by make_neighborhood_system

    @property
    def radii(self) -> dict:
        return {j: b.hx for j, b in self.cells.items()}

    @property
    def rho(self) -> Fraction:
        return self.inf_cell.hx

    def _candidates(self, pt):
        # cells are centred on s_j and far narrower than the gaps between
        # them, so only the two indices next to 1/x - 1 can contain pt
        if not self.standard or pt[0] <= 0:
            return self.cells
        a = 1 / pt[0] - 1
        out = {}
        for m in {math.floor(a), math.ceil(a)}:
            j = m if pt[1] > 0 else -m
            if j in self.cells:
                out[j] = self.cells[j]
        return out

    def locate(self, pt):
        """Label of the unique cell containing pt: an int, "inf", or None."""
        hits = [j for j, b in self._candidates(pt).items() if b.contains(pt)]
        if self.inf_cell.contains(pt):
            hits.append("inf")
        if len(hits) > 1:
            raise WindingError(f"point {pt} lies in several cells: {hits}")
        return hits[0] if hits else None

    def check(self) -> None:
        """Exact disjointness and coverage of S."""
        boxes = list(self.cells.items()) + [("inf", self.inf_cell)]
        for a in range(len(boxes)):
            for b in range(a + 1, len(boxes)):
                if not boxes[a][1].disjoint(boxes[b][1]):
                    raise WindingError(f"cells {boxes[a][0]} and {boxes[b][0]} overlap")
        for j, b in self.cells.items():
            if not b.contains(s_coord(j)):
                raise WindingError(f"cell {j} misses s_{j}")
        # the tail of S shrinks monotonically, so the first points outside suffice
        for j in (self.r + 1, -self.r - 1):
            if not self.inf_cell.contains(s_coord(j)):
                raise WindingError(f"s_{j} is outside the central cell")
        if not self.inf_cell.contains(ORIGIN):
            raise WindingError("central cell misses s_inf")


@lru_cache(maxsize=None)
def make_neighborhood_system(r: int) -> NeighborhoodSystem:
    if r < 1:
        raise WindingError("neighborhood system needs r >= 1")
    rad = Fraction(1, 4 * (r + 2) ** 2)
    cells = LazyTable(range(-r, r + 1), lambda j: ball(s_coord(j), rad))
    return NeighborhoodSystem(r, cells, ball(ORIGIN, Fraction(1, r + 2)), standard=True)


# ---------------------------------------------------------------------------
# winding numbers


@dataclass
class WindingCertificate:
    """Evidence that a finite sequence winds d times around S.

    ``starts`` are the sequence indices where each pass s_{-r}..s_r begins,
    ``labels`` the cell of every index outside the central cell.
    """

    r: int
    d: int
    k: Optional[int]
    starts: list
    labels: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"r": self.r, "d": self.d, "k": self.k, "starts": self.starts,
                "labels": {str(m): v for m, v in sorted(self.labels.items())}}


def _passes(coords: Sequence, first: int, V: NeighborhoodSystem):
    """Split the non-central part of a sequence into passes over the cells.

    Returns (labels, starts), or (labels, None) if some run of non-central
    points is not a concatenation of complete passes -r..r.
    """
    labels = {}
    for off, pt in enumerate(coords):
        lab = V.locate(pt)
        if lab is None:
            raise WindingError(f"point {first + off} lies in no cell")
        if lab != "inf":
            labels[first + off] = lab
    if coords and (V.locate(coords[0]) != "inf" or V.locate(coords[-1]) != "inf"):
        raise WindingError("window must start and end in the central cell")
    width = 2 * V.r + 1
    starts = []
    idx = sorted(labels)
    pos = 0
    while pos < len(idx):
        m = idx[pos]
        run = [labels.get(m + q) for q in range(width)]
        if run != list(range(-V.r, V.r + 1)):
            return labels, None
        starts.append(m)
        pos += width
    return labels, starts


def winding_number(coords: Sequence, first: int, V: NeighborhoodSystem) -> Optional[WindingCertificate]:
    """Winding number of the sequence ``coords`` (indexed from ``first``).

    Requires every point outside the central cell to sit in passes of
    consecutive cells s_{-r}..s_r with a common stride k > 2r.  Returns None
    when the sequence has no winding number, raises if a point lies in no
    cell or in two cells.
    """
    labels, starts = _passes(coords, first, V)
    if starts is None:
        return None
    if not starts:
        return WindingCertificate(V.r, 0, None, [], labels)
    if len(starts) == 1:
        return WindingCertificate(V.r, 1, 2 * V.r + 1, starts, labels)
    strides = {b - a for a, b in zip(starts, starts[1:])}
    if len(strides) != 1:
        return None
    (k,) = strides
    if k <= 2 * V.r:
        return None
    return WindingCertificate(V.r, len(starts), k, starts, labels)


def pass_count(coords: Sequence, first: int, V: NeighborhoodSystem) -> Optional[int]:
    """Number of complete passes, ignoring the common-stride requirement."""
    _, starts = _passes(coords, first, V)
    return None if starts is None else len(starts)


# ---------------------------------------------------------------------------
# X_2: n close copies of a p_i-winding sequence at every level i


class X2System(DynSystem):
    """S plus, for each level i >= 1, n shift orbits x^i_{m,.} (m = 1..n).

    Level i uses r_i = r_base + i - 1, winding prime p_i and stride
    k_i = 2(2 r_i + 1).  Indices 0..E_i (E_i = (p_i - 1) k_i + 2 r_i) form the
    wind region: block t, offset q <= 2 r_i sits just inside the cell of
    s_{q - r_i}; the other offsets are gap points in the central cell.
    Outside the wind region the orbit runs along rays into s_inf.  The n
    copies differ only by tiny per-copy offsets, so they stay close forever.
    """

    family = "winding-x2"

    def __init__(self, n: int, primes: Optional[PrimeStream] = None, r_base: int = 1):
        if n < 1:
            raise WindingError("need at least one copy per level")
        if r_base < 1:
            raise WindingError("r_base must be >= 1")
        self.n = n
        self.r_base = r_base
        self.stream = primes or nth_prime
        self._coords = {}

    # level data
    def r(self, i):
        return self.r_base + i - 1

    def p(self, i):
        return self.stream(i)

    def k(self, i):
        return 2 * (2 * self.r(i) + 1)

    def extent(self, i):
        return (self.p(i) - 1) * self.k(i) + 2 * self.r(i)

    def lam_max(self, i) -> Fraction:
        return Fraction(1, 4 ** (self.r(i) + 2))

    def rho(self, i) -> Fraction:
        return Fraction(1, self.r(i) + 2)

    def beta(self, i, m) -> Fraction:
        return Fraction(1, 4) * (1 + Fraction(1, 2 ** self.r(i)) * (1 + Fraction(m - 1, self.n)))

    def neighborhood(self, i) -> NeighborhoodSystem:
        return make_neighborhood_system(self.r(i))

    def params(self):
        return {"n": self.n, "r_base": self.r_base, "primes": [self.p(i) for i in (1, 2, 3)]}

    # points
    def _check(self, pid):
        if pid == INF or pid[0] == "s":
            return
        if pid[0] != "x" or len(pid) != 4:
            raise SpaceError(f"not a point of this system: {pid!r}")
        _, i, m, _ = pid
        if i < 1 or not 1 <= m <= self.n:
            raise SpaceError(f"level/copy out of range in {pid!r}")

    def apply(self, pid, k=1):
        self._check(pid)
        if pid == INF:
            return INF
        if pid[0] == "s":
            return ("s", pid[1] + k)
        return ("x", pid[1], pid[2], pid[3] + k)

    def class_of(self, pid):
        self._check(pid)
        return {"inf": "inf", "s": "S", "x": "Y"}[pid[0]]

    def coord(self, pid):
        c = self._coords.get(pid)
        if c is None:
            self._check(pid)
            if pid == INF:
                c = ORIGIN
            elif pid[0] == "s":
                c = s_coord(pid[1])
            else:
                c = self._x_coord(*pid[1:])
            self._coords[pid] = c
        return c

    def _x_coord(self, i, m, j):
        r, p, k, E = self.r(i), self.p(i), self.k(i), self.extent(i)
        rho, beta = self.rho(i), self.beta(i, m)
        if j < 0:
            mu = rho / (1 - j)
            return (mu, mu * beta)
        if j > E:
            mu = rho / (j - E + 1)
            return (mu, -mu * beta)
        t, q = divmod(j, k)
        if q <= 2 * r:
            lam = self.lam_max(i) * (1 - Fraction((m - 1) * p + t, 2 * self.n * p))
            return scale(1 - lam, s_coord(q - r))
        mu = rho / (2 + j)
        return (-mu, mu * beta)

    def wind_index(self, i, t, c):
        """Orbit index at which block t of level i visits the cell of s_c."""
        return t * self.k(i) + c + self.r(i)

    def enumerate(self, bounds):
        I = int(bounds.get("levels", 2))
        J = int(bounds.get("index", 8))
        pts = [INF] + [("s", j) for j in range(-J, J + 1)]
        for i in range(1, I + 1):
            for m in range(1, self.n + 1):
                pts += [("x", i, m, j) for j in range(-J, self.extent(i) + J + 1)]
        return pts

    def suggested_horizon(self, bounds):
        I = int(bounds.get("levels", 2))
        J = int(bounds.get("index", 8))
        return J + max(self.extent(i) for i in range(1, I + 1)) + 1

    def prefix(self, length):
        pts = [INF] + [("s", j) for j in range(-length, length + 1)]
        for i in range(1, levels_for(length) + 1):
            for m in range(1, self.n + 1):
                pts += [("x", i, m, j) for j in range(-length, length + 1)]
        return pts

    def families(self, length):
        fams = [s_family(length)]
        levels = range(1, levels_for(length) + 1)
        for i in levels:
            E = self.extent(i)
            for m in range(1, self.n + 1):
                js = list(range(-length, length + 1))
                bounds = [chebyshev(self.coord(("x", i, m, j)), ORIGIN) if (j < 0 or j > E) else Fraction(1)
                          for j in js]
                fams.append(Family(("Y", i, m), INF, [("x", i, m, j) for j in js], js, bounds))
        for c in range(-length, length + 1):
            for m in range(1, self.n + 1):
                members, idx, bounds = [], [], []
                for i in levels:
                    if self.r(i) < abs(c):
                        continue
                    for t in range(self.p(i)):
                        j = self.wind_index(i, t, c)
                        if j <= length:
                            members.append(("x", i, m, j))
                            idx.append(i)
                            bounds.append(self.lam_max(i) / (abs(c) + 1))
                if members:
                    fams.append(Family(("D", c, m), ("s", c), members, idx, bounds))
        return fams

    @property
    def space(self):
        return ScatteredSpace(
            {"inf": PointSchema("inf", "fixed point s_inf", "atom", fixed=True),
             "S": PointSchema("S", "shift orbit s_j"),
             "Y": PointSchema("Y", "winding orbits x^i_{m,j}")},
            [Edge("S", "inf"), Edge("Y", "inf"), Edge("Y", "S", "winding")],
        )

    def samples(self, schema):
        if schema == "inf":
            return [INF]
        if schema == "S":
            return [("s", 0), ("s", 1), ("s", -1)]
        return [("x", 1, 1, 0), ("x", 1, 1, -1), ("x", 1, self.n, 1)]

    def witness_suppliers(self):
        def supply(target, eps, d):
            if target[0] != "s":
                return
            c = target[1]
            for i in range(1, MAX_LEVEL + 1):
                if self.r(i) >= abs(c) and self.p(i) > d and self.lam_max(i) / (abs(c) + 1) <= eps:
                    yield ("x", i, 1, self.wind_index(i, 0, c)), self.k(i)

        return {("Y", "S"): supply}

    # winding evidence
    def level_certificate(self, i, m, V: Optional[NeighborhoodSystem] = None) -> Optional[WindingCertificate]:
        """Winding certificate of x^i_{m,.} with respect to V (default V_i)."""
        V = V or self.neighborhood(i)
        E = self.extent(i)
        coords = [self.coord(("x", i, m, j)) for j in range(-1, E + 2)]
        return winding_number(coords, -1, V)


def build_winding_x2(n: int, primes: Optional[Sequence[int]] = None, r_base: int = 1) -> X2System:
    stream = list_stream(primes) if primes is not None else nth_prime
    return X2System(n, stream, r_base)


# ---------------------------------------------------------------------------
# towers: X_alpha = S plus embedded copies of smaller towers


@dataclass
class CopyGeometry:
    """Where copy i of a tower puts its inner system.

    Inner s_{j'} with |j'| <= R is sent to anchor number a = j' + c0.  Anchors
    0..E follow the same wind/gap pattern as an X_2 level with radius r and
    prime p.  The inner cell around s_{j'} is mapped by a contraction with
    factor ``local`` onto a box around its anchor; the inner central cell is
    squeezed towards s_inf by ``(central, central * sigma)``.
    """

    r: int
    p: int
    k: int
    E: int
    c0: int
    R: int
    lam: Fraction
    rho: Fraction
    beta: Fraction
    local: Fraction
    central: Fraction
    sigma: Fraction
    inner_V: NeighborhoodSystem
    anchors: Mapping  # j' -> anchor coordinate


def _copy_geometry(r: int, p: int, i: int) -> CopyGeometry:
    k = 2 * (2 * r + 1)
    E = (p - 1) * k + 2 * r
    c0 = (E + 1) // 2
    R = c0
    lam = Fraction(1, 4 ** (r + 2))
    rho = Fraction(1, r + 2)
    beta = Fraction(1, 4) * (1 + Fraction(1, 2 ** r))

    def anchor(jp):
        a = jp + c0
        t, q = divmod(a, k)
        if a <= E and q <= 2 * r:
            return scale(1 - lam * (1 - Fraction(t, 2 * p)), s_coord(q - r))
        mu = rho / (2 + a)
        return (-mu, mu * beta)

    anchors = LazyTable(range(-c0, c0 + 1), anchor)
    inner_V = make_neighborhood_system(R)
    # half-widths of the image boxes: small against anchor spacing and margins
    h_central = rho / (4 * (2 * c0 + 3))
    h_local = min(lam / (8 * p * (r + 1)), rho / (4 * (2 * c0 + 3) ** 2))
    return CopyGeometry(
        r, p, k, E, c0, R, lam, rho, beta,
        local=h_local / inner_V.cells[0].hx,
        central=h_central / inner_V.rho,
        sigma=Fraction(1, i + 2),
        inner_V=inner_V,
        anchors=anchors,
    )


def _approach(limit: Ordinal, i: int) -> Ordinal:
    """i-th term of a fixed increasing sequence of successor ordinals >= 2 tending to limit."""
    *body, (e, c) = limit.terms
    base = Ordinal(body + ([(e, c - 1)] if c > 1 else []))
    step = Ordinal.omega(e - 1, i) if e > 1 else Ordinal.of(i)
    return base + step + 1


class TowerSystem(DynSystem):
    """X_alpha for a successor alpha >= 3.

    Copy i (i >= 1) is an inner system of rank beta_i embedded by a
    piecewise contraction so that its copy of S winds p_i times around S
    with respect to the level-i neighborhood system.  When alpha - 1 is a
    successor every copy has rank alpha - 1; when it is a limit the copies
    have ranks increasing to it and only the first ``copies`` of them are
    described.
    """

    family = "tower"

    def __init__(self, alpha: Ordinal, n: int, primes: Optional[PrimeStream] = None,
                 r_base: int = 1, copies: int = 3):
        if alpha.kind() != "successor":
            raise WindingError(f"tower rank must be a successor ordinal, got {alpha}")
        if alpha < Ordinal.of(3):
            raise WindingError("towers start at rank 3; rank 2 is X_2")
        if alpha > TOWER_CAP:
            raise WindingError(f"tower rank {alpha} exceeds the supported cap {TOWER_CAP}")
        self.alpha = alpha
        self.n = n
        self.stream = primes or nth_prime
        self.r_base = r_base
        pred = alpha.predecessor()
        self.limit_copies = pred.kind() == "limit"
        self.pred = pred
        self.copies = copies
        self._inner = {}
        self._geom = {}
        self._coords = {}

    def params(self):
        return {"alpha": str(self.alpha), "n": self.n, "r_base": self.r_base,
                **({"copies": self.copies} if self.limit_copies else {})}

    # copies
    def inner_rank(self, i) -> Ordinal:
        return _approach(self.pred, i) if self.limit_copies else self.pred

    def geometry(self, i) -> CopyGeometry:
        g = self._geom.get(i)
        if g is None:
            g = self._geom[i] = _copy_geometry(self.r_base + i - 1, copy_prime(self.stream, i), i)
        return g

    def inner(self, i) -> DynSystem:
        if i < 1:
            raise SpaceError(f"copy index must be >= 1, got {i}")
        if self.limit_copies and i > self.copies:
            raise SpaceError(f"only {self.copies} copies are described")
        s = self._inner.get(i)
        if s is None:
            s = self._inner[i] = build_tower(self.inner_rank(i), self.n, child_stream(self.stream, i),
                                             r_base=self.geometry(i).R)
        return s

    def copy_range(self, length) -> list:
        """Copies included in a prefix: the first few with an anchor inside it."""
        top = levels_for(length)
        if self.limit_copies:
            top = min(top, self.copies)
        return [i for i in range(1, top + 1) if i == 1 or self.geometry(i).c0 - self.geometry(i).r <= length]

    def prefix_tag(self, i) -> str:
        return f"c{i}." if self.limit_copies else "c."

    # embedding
    def piece(self, i, z):
        """Label of the inner piece containing inner coordinate z."""
        lab = self.geometry(i).inner_V.locate(z)
        if lab is None:
            raise SpaceError(f"inner point {z} lies outside the inner neighborhood system")
        return lab

    def psi(self, i, z):
        g = self.geometry(i)
        lab = self.piece(i, z)
        if lab == "inf":
            return (g.central * z[0], g.central * g.sigma * z[1])
        s = s_coord(lab)
        w = g.anchors[lab]
        return (w[0] + g.local * (z[0] - s[0]), w[1] + g.local * (z[1] - s[1]))

    def piece_scale(self, i, lab) -> Fraction:
        g = self.geometry(i)
        return g.central if lab == "inf" else g.local

    # points
    def apply(self, pid, k=1):
        if pid == INF:
            return INF
        if pid[0] == "s":
            return ("s", pid[1] + k)
        if pid[0] != "c":
            raise SpaceError(f"not a point of this tower: {pid!r}")
        _, i, z = pid
        w = self.inner(i).apply(z, k)
        return INF if w == INF else ("c", i, w)

    def coord(self, pid):
        c = self._coords.get(pid)
        if c is None:
            if pid == INF:
                c = ORIGIN
            elif pid[0] == "s":
                c = s_coord(pid[1])
            elif pid[0] == "c":
                _, i, z = pid
                c = self.psi(i, self.inner(i).coord(z))
            else:
                raise SpaceError(f"not a point of this tower: {pid!r}")
            self._coords[pid] = c
        return c

    def class_of(self, pid):
        if pid == INF:
            return "inf"
        if pid[0] == "s":
            return "S"
        _, i, z = pid
        return self.prefix_tag(i) + self.inner(i).class_of(z)

    def _lift(self, i, pids):
        return [("c", i, z) for z in pids if z != INF]

    def enumerate(self, bounds):
        I = int(bounds.get("levels", 1))
        J = int(bounds.get("index", 8))
        pts = [INF] + [("s", j) for j in range(-J, J + 1)]
        for i in range(1, I + 1):
            pts += self._lift(i, self.inner(i).enumerate(bounds))
        return pts

    def suggested_horizon(self, bounds):
        I = int(bounds.get("levels", 1))
        return max(self.inner(i).suggested_horizon(bounds) for i in range(1, I + 1))

    def prefix(self, length):
        pts = [INF] + [("s", j) for j in range(-length, length + 1)]
        for i in self.copy_range(length):
            pts += self._lift(i, self.inner(i).prefix(length))
        return pts

    def families(self, length):
        fams = [s_family(length)]
        for i in self.copy_range(length):
            inner = self.inner(i)
            for f in inner.families(length):
                tpiece = self.piece(i, inner.coord(f.target))
                sc = self.piece_scale(i, tpiece)
                bounds = [sc * b if self.piece(i, inner.coord(m)) == tpiece else Fraction(1)
                          for m, b in zip(f.members, f.bounds)]
                if all(b == 1 for b in bounds):
                    continue  # no member inside the target's piece yet
                target = INF if f.target == INF else ("c", i, f.target)
                fams.append(Family(("c", i) + tuple(f.key), target, self._lift(i, f.members), f.indices, bounds))
        for c in range(-length, length + 1):
            members, idx, bounds = [], [], []
            for i in self.copy_range(length):
                g = self.geometry(i)
                if g.r < abs(c):
                    continue
                for t in range(g.p):
                    jp = t * g.k + c + g.r - g.c0
                    if abs(jp) <= length:
                        members.append(("c", i, ("s", jp)))
                        idx.append(i)
                        bounds.append(g.lam / (abs(c) + 1))
            if members:
                fams.append(Family(("A", c), ("s", c), members, idx, bounds))
        return fams

    @property
    def space(self):
        schemas = {"inf": PointSchema("inf", "fixed point s_inf", "atom", fixed=True),
                   "S": PointSchema("S", "shift orbit s_j")}
        edges = [Edge("S", "inf")]
        declared = {}
        copies = range(1, self.copies + 1) if self.limit_copies else [1]
        for i in copies:
            tag = self.prefix_tag(i)
            inner = self.inner(i).space
            for name, sch in inner.schemas.items():
                if name == "inf":
                    continue
                schemas[tag + name] = PointSchema(tag + name, f"copy of {sch.description}", sch.index,
                                                  sch.periodic, sch.fixed)
                edges.append(Edge(tag + name, "S", "winding" if name == "S" else "plain"))
                edges.append(Edge(tag + name, "inf"))
            for e in inner.edges:
                src = tag + e.src
                dst = "inf" if e.dst == "inf" else tag + e.dst
                edges.append(Edge(src, dst, e.kind))
            for name, rank in inner.declared.items():
                declared[tag + name] = rank
        if self.limit_copies:
            declared["S"] = self.pred
        return ScatteredSpace(schemas, _dedupe(edges), declared)

    def samples(self, schema):
        if schema == "inf":
            return [INF]
        if schema == "S":
            return [("s", 0), ("s", 1), ("s", -1)]
        tag, _, rest = schema.partition(".")
        i = 1 if tag == "c" else int(tag[1:])
        return [("c", i, z) for z in self.inner(i).samples(rest)]

    def witness_suppliers(self):
        out = {}

        def anchors(target, eps, d):
            if target[0] != "s":
                return
            c = target[1]
            top = self.copies if self.limit_copies else MAX_LEVEL
            for i in range(1, top + 1):
                g = self.geometry(i)
                if g.r >= abs(c) and g.p > d and g.lam / (abs(c) + 1) <= eps:
                    yield ("c", i, ("s", c + g.r - g.c0)), g.k

        copies = range(1, self.copies + 1) if self.limit_copies else [1]
        for i in copies:
            tag = self.prefix_tag(i)
            out[(tag + "S", "S")] = anchors
            for (a, b), f in self.inner(i).witness_suppliers().items():
                out[(tag + a, tag + b)] = _lifted_supplier(self, f)
        return out

    def copy_certificate(self, i, V: Optional[NeighborhoodSystem] = None) -> Optional[WindingCertificate]:
        """Winding of the image of inner S under copy i, w.r.t. V (default V_i)."""
        g = self.geometry(i)
        V = V or make_neighborhood_system(g.r)
        coords = [self.coord(("c", i, ("s", j))) for j in range(-g.c0 - 1, g.c0 + 2)]
        return winding_number(coords, -g.c0 - 1, V)


def _lifted_supplier(tower: TowerSystem, f):
    def supply(target, eps, d):
        if target[0] != "c":
            return
        i = target[1]
        for w, k in f(target[2], eps, d):
            yield ("c", i, w), k
    return supply


def _dedupe(edges):
    seen, out = set(), []
    for e in edges:
        if (e.src, e.dst) not in seen:
            seen.add((e.src, e.dst))
            out.append(e)
    return out


def build_tower(alpha, n: int = 2, primes=None, r_base: int = 1, copies: int = 3) -> DynSystem:
    """X_alpha for successor alpha with 2 <= alpha <= w*2+4."""
    if isinstance(alpha, int):
        alpha = Ordinal.of(alpha)
    stream = list_stream(primes) if isinstance(primes, (list, tuple)) else (primes or nth_prime)
    if alpha.kind() != "successor":
        raise WindingError(f"tower rank must be a successor ordinal, got {alpha}")
    if alpha < Ordinal.of(2):
        raise WindingError("tower rank must be >= 2")
    if alpha == Ordinal.of(2):
        return X2System(n, stream, r_base)
    return TowerSystem(alpha, n, stream, r_base, copies)


# ---------------------------------------------------------------------------
# limit glue: towers of increasing rank shrinking to one extra fixed point


X0 = ("x0",)


class GlueSystem(DynSystem):
    """Disjoint scaled copies of towers accumulating at a new fixed point x0.

    Tower t (0-based) is moved by z -> x0 + (3/2^(t+1), 0) + z/2^(t+2); the
    copies sit in disjoint boxes converging to x0.
    """

    family = "limit-glue"

    def __init__(self, towers: Sequence[DynSystem], x0: tuple = ORIGIN, rank: Optional[Ordinal] = None):
        if len(towers) < 2:
            raise WindingError("limit glue needs at least two towers")
        self.towers = list(towers)
        self.ranks = [cb_rank_of(t) for t in self.towers]
        for a, b in zip(self.ranks, self.ranks[1:]):
            if not a < b:
                raise WindingError("tower ranks must strictly increase")
        self.x0 = (Fraction(x0[0]), Fraction(x0[1]))
        self.rank = rank or self.ranks[-1].next_limit()
        if not self.ranks[-1] < self.rank:
            raise WindingError("glue point rank must exceed every tower rank")
        self._extra = {}

    def params(self):
        return {"towers": [str(r) for r in self.ranks], "x0": [str(c) for c in self.x0],
                "rank": str(self.rank)}

    def place(self, t, z):
        f = Fraction(1, 2 ** (t + 2))
        return (self.x0[0] + Fraction(3, 2 ** (t + 1)) + f * z[0], self.x0[1] + f * z[1])

    def _tower(self, t):
        """Tower t; past the supplied list the ranks keep growing by one."""
        if t < 0:
            raise SpaceError(f"no tower number {t}")
        if t < len(self.towers):
            return self.towers[t]
        T = self._extra.get(t)
        if T is None:
            last = self.towers[-1]
            rank = self.ranks[-1] + (t - len(self.towers) + 1)
            if not rank < self.rank:
                raise SpaceError(f"tower {t} would reach the glue rank {self.rank}")
            T = self._extra[t] = build_tower(rank, getattr(last, "n", 2))
        return T

    def _glue_count(self, length):
        return len(self.towers) + levels_for(length)

    def apply(self, pid, k=1):
        if pid == X0:
            return X0
        _, t, z = pid
        return ("g", t, self._tower(t).apply(z, k))

    def coord(self, pid):
        if pid == X0:
            return self.x0
        _, t, z = pid
        return self.place(t, self._tower(t).coord(z))

    def class_of(self, pid):
        if pid == X0:
            return "x0"
        _, t, z = pid
        return f"g{t}." + self._tower(t).class_of(z)

    def enumerate(self, bounds):
        return [X0] + [("g", t, z) for t, T in enumerate(self.towers) for z in T.enumerate(bounds)]

    def prefix(self, length):
        pts = [X0] + [("g", t, z) for t, T in enumerate(self.towers) for z in T.prefix(length)]
        return pts + [("g", t, INF) for t in range(len(self.towers), self._glue_count(length))]

    def families(self, length):
        fams = []
        for t, T in enumerate(self.towers):
            f = Fraction(1, 2 ** (t + 2))
            for fam in T.families(length):
                fams.append(Family(("g", t) + tuple(fam.key), ("g", t, fam.target),
                                   [("g", t, m) for m in fam.members], fam.indices,
                                   [f * b for b in fam.bounds]))
        ts = list(range(self._glue_count(length)))
        fams.append(Family(("x0",), X0, [("g", t, INF) for t in ts], ts,
                           [Fraction(3, 2 ** (t + 1)) for t in ts]))
        return fams

    @property
    def space(self):
        schemas = {"x0": PointSchema("x0", "glue point", "atom", fixed=True)}
        edges, declared = [], {"x0": self.rank}
        for t, T in enumerate(self.towers):
            sp = T.space
            tag = f"g{t}."
            for name, sch in sp.schemas.items():
                schemas[tag + name] = PointSchema(tag + name, sch.description, sch.index, sch.periodic, sch.fixed)
                edges.append(Edge(tag + name, "x0"))
            edges += [Edge(tag + e.src, tag + e.dst, e.kind) for e in sp.edges]
            declared.update({tag + n: r for n, r in sp.declared.items()})
        return ScatteredSpace(schemas, edges, declared)

    def samples(self, schema):
        if schema == "x0":
            return [X0]
        tag, _, rest = schema.partition(".")
        t = int(tag[1:])
        return [("g", t, z) for z in self.towers[t].samples(rest)]

    def witness_suppliers(self):
        out = {}
        for t, T in enumerate(self.towers):
            for (a, b), f in T.witness_suppliers().items():
                out[(f"g{t}." + a, f"g{t}." + b)] = _glued_supplier(t, f)
        return out


def _glued_supplier(t, f):
    def supply(target, eps, d):
        if target[0] != "g" or target[1] != t:
            return
        # placement shrinks distances by 2^-(t+2), so a looser inner eps suffices
        for w, k in f(target[2], eps * 2 ** (t + 2), d):
            yield ("g", t, w), k
    return supply


def cb_rank_of(sys: DynSystem) -> Ordinal:
    return ord_max(list(sys.space.schema_ranks().values()))


def build_limit_glue(towers: Sequence[DynSystem], fixed_point_coord=ORIGIN,
                     rank: Optional[Ordinal] = None) -> GlueSystem:
    return GlueSystem(towers, fixed_point_coord, rank)


# ---------------------------------------------------------------------------
# harmonic example: cyclic blocks 1/2^n .. 1/(2^(n+1)-1) converging to 0


class HarmonicSystem(DynSystem):
    """Points 0 and 1/q (q >= 1) on the x-axis.

    0 and 1 are fixed; block n (2^n <= q < 2^(n+1)) is a single cycle of
    length 2^n sending 1/q to 1/(q+1) and the last point back to 1/2^n.
    """

    family = "harmonic"

    def apply(self, pid, k=1):
        if pid == ("h0",):
            return pid
        if pid[0] != "h" or pid[1] < 1:
            raise SpaceError(f"not a point of the harmonic system: {pid!r}")
        q = pid[1]
        base = 1 << (q.bit_length() - 1)
        return ("h", base + (q - base + k) % base)

    def coord(self, pid):
        if pid == ("h0",):
            return ORIGIN
        return (Fraction(1, pid[1]), Fraction(0))

    def class_of(self, pid):
        if pid == ("h0",):
            return "zero"
        return "one" if pid[1] == 1 else "B"

    def enumerate(self, bounds):
        N = int(bounds.get("N", 16))
        return [("h0",)] + [("h", q) for q in range(1, N)]

    def suggested_horizon(self, bounds):
        N = int(bounds.get("N", 16))
        return 1 << ((N - 1).bit_length() - 1)  # longest block period present

    def prefix(self, length):
        return self.enumerate({"N": length + 1})

    def families(self, length):
        qs = list(range(2, length + 1))
        return [Family(("B",), ("h0",), [("h", q) for q in qs], qs, [Fraction(1, q) for q in qs])]

    @property
    def space(self):
        return ScatteredSpace(
            {"zero": PointSchema("zero", "fixed point 0", "atom", fixed=True),
             "one": PointSchema("one", "fixed point 1", "atom", fixed=True),
             "B": PointSchema("B", "cyclic blocks", "N", periodic=True)},
            [Edge("B", "zero")],
        )

    def samples(self, schema):
        return {"zero": [("h0",)], "one": [("h", 1)], "B": [("h", 2), ("h", 5), ("h", 12)]}[schema]

    def is_periodic(self, pid, max_period):
        if pid == ("h0",) or pid[1] == 1:
            return 1
        per = 1 << (pid[1].bit_length() - 1)
        return per if per <= max_period else None


def build_harmonic() -> HarmonicSystem:
    return HarmonicSystem()
