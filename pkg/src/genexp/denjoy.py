"""Denjoy homeomorphism of a circle of length 2 with rotation number sqrt(2) - 1.

The orbit of angle 0 under the rotation by alpha = sqrt(2) - 1 is blown up
into wandering arcs I_k of length (1/3) 2^-|k|.  An angle theta not on that
orbit becomes the single point

    theta + sum of l(I_k) over k with theta_k < theta,

with theta_k = frac(k alpha).  I_k starts at the same expression for theta_k
and is mapped affinely onto I_{k+1}.  The total length is 1 + 1 = 2.

Pids are ``("a", k, i)`` for the i-th of n evenly spaced points of I_k
(endpoints included) and ``("cantor", c, num, den)`` for the point over the
angle frac(c alpha + num/den), which lies on no arc.
"""

from __future__ import annotations

import bisect
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .exactnum import ALPHA, CertifiedInterval, Quad, interval_refine
from .spacemodel import CIRCLE, DynSystem, SpaceError, circle_distance

CIRCUMFERENCE = Fraction(2)
PRECISION_ENV = "GENEXP_PRECISION"
MAX_BITS = 1024


def default_precision() -> int:
    return int(os.environ.get(PRECISION_ENV, "64"))


def arc_length(k: int) -> Fraction:
    return Fraction(1, 3 * 2 ** abs(k))


def total_arc_length() -> Fraction:
    """Sum of all arc lengths in closed form: 1/3 + 2 * (1/3) * (1/2)/(1 - 1/2)."""
    first = arc_length(0)
    ratio = Fraction(1, 2)
    return first + 2 * first * ratio / (1 - ratio)


def tail_length(K: int) -> Fraction:
    """Total length of the arcs with |k| > K."""
    return 2 * arc_length(K)


def theta(k: int) -> Quad:
    return (ALPHA * k).frac()


@dataclass(frozen=True)
class ArcPoint:
    k: int
    i: int

    @property
    def pid(self):
        return ("a", self.k, self.i)


@dataclass(frozen=True)
class CantorPoint:
    """Point over angle frac(c alpha + r); side is meaningful only at arc ends."""

    c: int
    r: Fraction
    side: str = "interior"

    def __post_init__(self):
        if self.r.denominator == 1:
            raise SpaceError("integer offsets land on the blown-up orbit; use ArcPoint")
        if self.side not in ("interior", "minus", "plus"):
            raise SpaceError(f"bad side {self.side!r}")

    @property
    def pid(self):
        return ("cantor", self.c, self.r.numerator, self.r.denominator)


DenjoyPoint = Union[ArcPoint, CantorPoint]


class DenjoySystem(DynSystem):
    family = "denjoy"
    metric = CIRCLE
    countable = False

    def __init__(self, n: int, precision: Optional[int] = None):
        if n < 2:
            raise SpaceError("fibers need at least their two endpoints (n >= 2)")
        if total_arc_length() != 1:
            raise SpaceError("arc lengths do not sum to 1")
        self.n = n
        self.precision = precision or default_precision()
        self._sorted = {}
        self._pos = {}

    def params(self):
        return {"n": self.n, "alpha": "-1/1+1/1*sqrt2", "precision": self.precision}

    # dynamics
    def apply(self, pid, k=1):
        if pid[0] == "a":
            return ("a", pid[1] + k, pid[2])
        if pid[0] == "cantor":
            return ("cantor", pid[1] + k, pid[2], pid[3])
        raise SpaceError(f"not a Denjoy point: {pid!r}")

    def class_of(self, pid):
        return "arc" if pid[0] == "a" else "cantor"

    def angle(self, pid) -> Quad:
        if pid[0] == "a":
            return theta(pid[1])
        _, c, num, den = pid
        return (ALPHA * c + Fraction(num, den)).frac()

    def offset(self, pid) -> Fraction:
        """Exact position of pid inside its arc (0 for Cantor points)."""
        if pid[0] != "a":
            return Fraction(0)
        if not 0 <= pid[2] < self.n:
            raise SpaceError(f"arc point index out of range in {pid!r}")
        return arc_length(pid[1]) * Fraction(pid[2], self.n - 1)

    # certified positions
    def _table(self, K):
        t = self._sorted.get(K)
        if t is None:
            ks = sorted(range(-K, K + 1), key=theta)
            thetas = [theta(k) for k in ks]
            sums = [Fraction(0)]
            for k in ks:
                sums.append(sums[-1] + arc_length(k))
            t = self._sorted[K] = (thetas, sums)
        return t

    def _scaled(self, pid, bits):
        """Integers (lo, hi) with lo/D <= position <= hi/D, D = 3 * 2^bits."""
        key = (pid, bits)
        iv = self._pos.get(key)
        if iv is None:
            K = bits
            D = 3 << bits
            thetas, sums = self._table(K)
            th = self.angle(pid)
            below = sums[bisect.bisect_left(thetas, th)] + self.offset(pid)
            ti = interval_refine(th, bits)
            lo = ti.lo + below
            hi = ti.hi + below + tail_length(K)
            iv = (math.floor(lo * D), math.ceil(hi * D))
            self._pos[key] = iv
        return iv

    def position(self, pid, bits: Optional[int] = None) -> CertifiedInterval:
        """Certified enclosure of the position of pid on [0, 2)."""
        bits = bits or self.precision
        lo, hi = self._scaled(pid, bits)
        D = 3 << bits
        return CertifiedInterval(Fraction(lo, D), Fraction(hi, D))

    def coord(self, pid):
        return self.position(pid)

    def same_fiber(self, p, q) -> bool:
        return p[0] == "a" and q[0] == "a" and p[1] == q[1]

    def dist(self, p, q):
        if self.same_fiber(p, q):
            return abs(self.offset(p) - self.offset(q))
        return circle_distance(self.position(p), self.position(q), CIRCUMFERENCE)

    def dist_le(self, p, q, delta) -> bool:
        delta = Fraction(delta)
        if p == q:
            return True
        if self.same_fiber(p, q):
            return abs(self.offset(p) - self.offset(q)) <= delta
        bits = self.precision
        while bits <= MAX_BITS:
            D = 3 << bits
            (a0, a1), (b0, b1) = self._scaled(p, bits), self._scaled(q, bits)
            lo, hi = max(a0 - b1, b0 - a1, 0), max(a1 - b0, b1 - a0)
            C = 2 * D  # circumference
            # shorter arc: min(diff, C - diff), monotone pieces handled separately
            dlo = min(lo, C - hi)
            dhi = min(hi, C - lo)
            if dhi * delta.denominator <= delta.numerator * D:
                return True
            if dlo * delta.denominator > delta.numerator * D:
                return False
            bits *= 2
        raise SpaceError(f"cannot decide distance({p}, {q}) <= {delta} at {MAX_BITS} bits")

    # truncations
    def separation_horizon(self, bounds, forward: bool = False) -> int:
        """Horizon by which any two points of different fibers have separated.

        Between two angularly adjacent points of the truncation lies some
        orbit angle theta_j; at time m = -j the arc I_0 of length 1/3 sits
        between their images.  The answer is the largest, over adjacent
        pairs, of the least such |j| (j <= 0 only when ``forward``).  This
        bounds separation for every delta < 1/3.
        """
        angles = sorted({self.angle(p) for p in self.enumerate(bounds)})
        if len(angles) < 2:
            return 0
        worst = 0
        for a, b in zip(angles, angles[1:] + [angles[0] + 1]):
            worst = max(worst, _first_between(a, b, forward))
        return worst

    def suggested_horizon(self, bounds):
        return self.separation_horizon(bounds)

    def enumerate(self, bounds):
        K = int(bounds.get("k", 32))
        C = int(bounds.get("cantor", 16))
        pts = [("a", k, i) for k in range(-K, K + 1) for i in range(self.n)]
        return pts + cantor_samples(C, K)


def _first_between(a: Quad, b: Quad, forward: bool, limit: int = 1 << 16) -> int:
    """Least m >= 0 such that theta_{-m} (or theta_m, two-sided) lies strictly inside (a, b), mod 1."""
    fa, fb = float(a), float(b)
    for m in range(limit):
        for j in ((-m,) if forward else (m, -m)):
            t = theta(j)
            ft = float(t)
            for shift in (0, 1):
                if fa - 1e-9 < ft + shift < fb + 1e-9 and a < t + shift < b:
                    return m
    raise SpaceError(f"no orbit angle between {a} and {b} below index {limit}")


def cantor_samples(count: int, K: int) -> list:
    """Interior points spread over gaps of {theta_k : |k| <= S} away from the arcs |k| <= K.

    Each sample is theta_u + r for a gap (theta_u, theta_v) whose two ends
    both have |index| > K, with r a rational strictly inside the gap.  S
    starts at 2K and grows until there are enough gaps, so an arc of index
    at most S lies between a sample and every truncated arc.
    """
    if count <= 0:
        return []
    S = max(2 * K, 1)
    while True:
        ks = sorted(range(-S, S + 1), key=theta)
        gaps = []
        for u, v in zip(ks, ks[1:]):
            if abs(u) > K and abs(v) > K:
                width = interval_refine(theta(v) - theta(u), 64).lo
                gaps.append((u, width / 2))
        if len(gaps) >= count:
            break
        S += max(K, 4)
    step = len(gaps) / count
    out = []
    for j in range(count):
        u, r = gaps[int(j * step)]
        out.append(("cantor", u, r.numerator, r.denominator))
    return out


def build_denjoy(n: int, precision: Optional[int] = None) -> DenjoySystem:
    return DenjoySystem(n, precision)


def arc_diameter_profile(k: int, m_range: tuple) -> list:
    """Diameter of T^m(I_k) for m in the inclusive range: the length of I_{k+m}."""
    lo, hi = m_range
    return [arc_length(k + m) for m in range(lo, hi + 1)]
