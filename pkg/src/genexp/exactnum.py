"""Exact scalars, certified dyadic intervals and ordinals below w^w.

Scalars are either ``fractions.Fraction`` (the rational kind) or ``Quad``
(elements a + b*sqrt(2) with rational a, b).  Every comparison is decided
algebraically; nothing here ever touches a float.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import isqrt
from typing import Iterable, Sequence, Union

Rational = Union[int, Fraction]


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


@total_ordering
class Quad:
    """The number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    __slots__ = ("a", "b")

    def __init__(self, a: Rational = 0, b: Rational = 0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @staticmethod
    def coerce(x) -> "Quad":
        if isinstance(x, Quad):
            return x
        if isinstance(x, (int, Fraction)):
            return Quad(x, 0)
        raise TypeError(f"cannot use {type(x).__name__} as an exact scalar")

    def sign(self) -> int:
        sa, sb = _sign(self.a), _sign(self.b)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 against 2 b^2 (never equal, sqrt2 irrational)
        if sa > 0:
            return 1 if self.a * self.a > 2 * self.b * self.b else -1
        return 1 if 2 * self.b * self.b > self.a * self.a else -1

    def is_rational(self) -> bool:
        return self.b == 0

    def __add__(self, other):
        try:
            o = Quad.coerce(other)
        except TypeError:
            return NotImplemented
        return Quad(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Quad(-self.a, -self.b)

    def __sub__(self, other):
        try:
            o = Quad.coerce(other)
        except TypeError:
            return NotImplemented
        return Quad(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return Quad.coerce(other) - self

    def __mul__(self, other):
        try:
            o = Quad.coerce(other)
        except TypeError:
            return NotImplemented
        return Quad(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = Quad.coerce(other)
        except TypeError:
            return NotImplemented
        norm = o.a * o.a - 2 * o.b * o.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt2)")
        return self * Quad(o.a / norm, -o.b / norm)

    def __rtruediv__(self, other):
        return Quad.coerce(other) / self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __eq__(self, other):
        try:
            o = Quad.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __lt__(self, other):
        try:
            o = Quad.coerce(other)
        except TypeError:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b))

    def __floor__(self) -> int:
        if self.b == 0:
            return self.a.__floor__()
        den = self.a.denominator * self.b.denominator
        big_a = self.a.numerator * self.b.denominator
        big_b = self.b.numerator * self.a.denominator
        root = isqrt(2 * big_b * big_b)
        n = (big_a + root if big_b > 0 else big_a - root) // den
        while Quad(n + 1) <= self:
            n += 1
        while Quad(n) > self:
            n -= 1
        return n

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * 2 ** 0.5

    def frac(self) -> "Quad":
        """Fractional part, in [0, 1)."""
        return self - self.__floor__()

    def __repr__(self):
        return f"Quad({self.a}, {self.b})"

    def __str__(self):
        return format_scalar(self)


Scalar = Union[Fraction, Quad]

SQRT2 = Quad(0, 1)
ALPHA = Quad(-1, 1)  # sqrt(2) - 1, the fixed irrational rotation number


def normalize(x) -> Scalar:
    """Collapse a rational Quad to a Fraction; ints become Fractions."""
    if isinstance(x, Quad):
        return x.a if x.b == 0 else x
    return Fraction(x)


def floor_scalar(x: Scalar) -> int:
    return x.__floor__()


_FRAC_RE = r"[+-]?\d+(?:/\d+)?"
_QUAD_RE = re.compile(rf"^\s*({_FRAC_RE})\s*([+-])\s*(\d+(?:/\d+)?)\s*\*\s*sqrt2\s*$")


def format_scalar(x) -> str:
    """``p/q`` for rationals and ``a/b+c/d*sqrt2`` for quadratic values."""
    if isinstance(x, Quad):
        if x.b == 0:
            return format_scalar(x.a)
        b = x.b
        op = "+" if b > 0 else "-"
        return f"{_frac_str(x.a)}{op}{_frac_str(abs(b))}*sqrt2"
    return _frac_str(Fraction(x))


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def parse_scalar(text: str) -> Scalar:
    m = _QUAD_RE.match(text)
    if m:
        b = Fraction(m.group(3))
        if m.group(2) == "-":
            b = -b
        return normalize(Quad(Fraction(m.group(1)), b))
    if re.fullmatch(rf"\s*{_FRAC_RE}\s*", text):
        return Fraction(text.strip())
    raise ValueError(f"not an exact scalar: {text!r}")


@dataclass(frozen=True)
class CertifiedInterval:
    """Closed interval with dyadic (or at least rational) endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: Rational) -> "CertifiedInterval":
        return cls(Fraction(x), Fraction(x))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other):
        if isinstance(other, CertifiedInterval):
            return CertifiedInterval(self.lo + other.lo, self.hi + other.hi)
        o = Fraction(other)
        return CertifiedInterval(self.lo + o, self.hi + o)

    __radd__ = __add__

    def __neg__(self):
        return CertifiedInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        if isinstance(other, CertifiedInterval):
            return self + (-other)
        return self + (-Fraction(other))

    def __rsub__(self, other):
        return (-self) + other

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return CertifiedInterval(Fraction(0), max(-self.lo, self.hi))

    def certainly_le(self, x) -> bool:
        return self.hi <= x

    def certainly_gt(self, x) -> bool:
        return self.lo > x

    def __str__(self):
        return f"[{_frac_str(self.lo)}, {_frac_str(self.hi)}]"


def interval_refine(x, precision_bits: int) -> CertifiedInterval:
    """Dyadic enclosure of ``x`` of width at most ``2**-precision_bits``.

    Endpoints are ``floor(x*2^b)/2^b`` and ``ceil(x*2^b)/2^b``, so enclosures
    for increasing ``b`` are nested.
    """
    if precision_bits < 1:
        raise ValueError("precision_bits must be >= 1")
    scale = 1 << precision_bits
    if isinstance(x, Quad) and x.b != 0:
        lo = (x * scale).__floor__()
        return CertifiedInterval(Fraction(lo, scale), Fraction(lo + 1, scale))
    f = normalize(x)
    lo = (f * scale).__floor__()
    hi = -((-f * scale).__floor__())
    return CertifiedInterval(Fraction(lo, scale), Fraction(hi, scale))


# ---------------------------------------------------------------------------
# ordinals below w^w


class OrdinalError(ValueError):
    pass


@total_ordering
class Ordinal:
    """An ordinal below w^w in Cantor normal form.

    ``terms`` is a tuple of ``(exponent, coefficient)`` pairs with strictly
    decreasing natural exponents and positive coefficients; ``()`` is zero.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[int, int]] = ()):
        terms = tuple((int(e), int(c)) for e, c in terms)
        for e, c in terms:
            if e < 0 or c <= 0:
                raise OrdinalError(f"bad CNF term w^{e}*{c}")
        for (e1, _), (e2, _) in zip(terms, terms[1:]):
            if e1 <= e2:
                raise OrdinalError("CNF exponents must strictly decrease")
        self.terms = terms

    @classmethod
    def of(cls, n: int) -> "Ordinal":
        if n < 0:
            raise OrdinalError("negative ordinal")
        return cls(((0, n),)) if n else cls()

    @classmethod
    def omega(cls, power: int = 1, coef: int = 1) -> "Ordinal":
        return cls(((power, coef),))

    def kind(self) -> str:
        if not self.terms:
            return "zero"
        return "successor" if self.terms[-1][0] == 0 else "limit"

    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == 0)

    def finite_value(self) -> int:
        if not self.is_finite():
            raise OrdinalError(f"{self} is infinite")
        return self.terms[0][1] if self.terms else 0

    def __add__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        if not other.terms:
            return self
        lead = other.terms[0][0]
        kept = [t for t in self.terms if t[0] > lead]
        same = [c for e, c in self.terms if e == lead]
        head = (lead, other.terms[0][1] + (same[0] if same else 0))
        return Ordinal(kept + [head] + list(other.terms[1:]))

    def successor(self) -> "Ordinal":
        return self + 1

    def predecessor(self) -> "Ordinal":
        if self.kind() != "successor":
            raise OrdinalError(f"{self} has no predecessor")
        e, c = self.terms[-1]
        return Ordinal(self.terms[:-1] + (((0, c - 1),) if c > 1 else ()))

    def next_limit(self) -> "Ordinal":
        """Least limit ordinal strictly above ``self``."""
        body = [t for t in self.terms if t[0] > 0]
        return Ordinal(body) + Ordinal.omega()

    def __eq__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other) if other >= 0 else None
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __lt__(self, other):
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return ord_compare(self, other) == "less"

    def __hash__(self):
        return hash(self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            if e == 0:
                parts.append(str(c))
                continue
            base = "w" if e == 1 else f"w^{e}"
            parts.append(base if c == 1 else f"{base}*{c}")
        return "+".join(parts)

    def __repr__(self):
        return f"Ordinal({str(self)!r})"


def ord_compare(a: Ordinal, b: Ordinal) -> str:
    """Three-way comparison returning ``less``, ``equal`` or ``greater``."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        if (ea, ca) != (eb, cb):
            if ea != eb:
                return "greater" if ea > eb else "less"
            return "greater" if ca > cb else "less"
    if len(a.terms) == len(b.terms):
        return "equal"
    return "greater" if len(a.terms) > len(b.terms) else "less"


def ord_kind(a: Ordinal) -> str:
    return a.kind()


def ord_max(items: Sequence[Ordinal]) -> Ordinal:
    best = Ordinal()
    for x in items:
        if x > best:
            best = x
    return best


_ORD_TERM = re.compile(r"^(?:(w)(?:\^(\d+))?(?:\*(\d+))?|(\d+))$")


def parse_ordinal(text: str) -> Ordinal:
    """Parse a CNF string such as ``w^2*3+w+4`` (``w`` stands for omega)."""
    text = text.replace(" ", "")
    if text == "0":
        return Ordinal()
    terms = []
    for chunk in text.split("+"):
        m = _ORD_TERM.match(chunk)
        if not m:
            raise OrdinalError(f"bad ordinal term {chunk!r}")
        if m.group(4) is not None:
            terms.append((0, int(m.group(4))))
        else:
            e = int(m.group(2)) if m.group(2) else 1
            terms.append((e, int(m.group(3)) if m.group(3) else 1))
    return Ordinal(terms)
