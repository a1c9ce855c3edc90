"""Symbolic countable compact spaces, exact metrics and finite truncations.

A point is addressed by a *pid*: a hashable tuple whose first entry is a tag
string and whose remaining entries are ints or nested pids.  A system knows
how to place any pid in the plane (or on the Denjoy circle), how to move it
with ``apply`` and which *schema* (point class) it belongs to.

The accumulation structure is declared at two levels:

* schema level: ``Edge(src, dst)`` says every point of ``dst`` is a limit of
  points of ``src``.  Derived sets and ranks are computed on this graph.
* point level: a ``Family`` is one concrete sequence converging to one target
  point, with a tail bound.  Families drive validation and the brute-force
  derived-set cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .exactnum import CertifiedInterval, Ordinal, Quad, ord_max

PLANE = "chebyshev-plane"
CIRCLE = "circle-length"


class SpaceError(Exception):
    """Structural problem with a space or system description."""


class TruncationError(SpaceError):
    pass


# ---------------------------------------------------------------------------
# point ids


def pid_name(pid) -> str:
    tag, args = pid[0], pid[1:]
    if not args:
        return tag
    if len(args) == 2 and isinstance(args[1], tuple):
        return f"{tag}[{args[0]}]/{pid_name(args[1])}"
    return f"{tag}[{','.join(str(a) for a in args)}]"


def pid_key(pid):
    """Total, deterministic sort key for pids of mixed shape."""
    out = []
    for a in pid:
        if isinstance(a, tuple):
            out.append((2, pid_key(a)))
        elif isinstance(a, str):
            out.append((1, a))
        else:
            out.append((0, a))
    return tuple(out)


def sort_pids(pids: Iterable) -> list:
    return sorted(set(pids), key=pid_key)


@dataclass(frozen=True)
class Point:
    pid: tuple
    coord: object  # (x, y) pair for the plane, position interval on the circle

    @property
    def name(self) -> str:
        return pid_name(self.pid)


# ---------------------------------------------------------------------------
# schema-level description


@dataclass(frozen=True)
class PointSchema:
    name: str
    description: str
    index: str = "Z"  # "Z", "N" or "atom"
    periodic: bool = False  # every member is periodic
    fixed: bool = False  # every member is a fixed point


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    kind: str = "plain"  # "plain" or "winding"


# A witness supplier proposes (start pid, stride) pairs whose orbits return
# to a target point at stride-spaced times.  Arguments: (target pid, eps, d).
WitnessSupplier = Callable[[tuple, Fraction, int], Iterator[tuple]]


@dataclass
class ScatteredSpace:
    """Finite graph of point schemas with declared accumulation edges."""

    schemas: dict
    edges: list
    declared: dict = field(default_factory=dict)  # schema -> declared rank (limits)
    order: int = 0  # number of derived-set steps already applied

    def __post_init__(self):
        for e in self.edges:
            if e.src not in self.schemas or e.dst not in self.schemas:
                raise SpaceError(f"edge {e.src}->{e.dst} mentions an unknown schema")

    @property
    def names(self) -> frozenset:
        return frozenset(self.schemas)

    def incoming(self, name: str, kind: Optional[str] = None) -> list:
        return [e for e in self.edges if e.dst == name and (kind is None or e.kind == kind)]

    def restrict(self, names: Iterable[str], order: Optional[int] = None) -> "ScatteredSpace":
        keep = set(names)
        return ScatteredSpace(
            {k: v for k, v in self.schemas.items() if k in keep},
            [e for e in self.edges if e.src in keep and e.dst in keep],
            {k: v for k, v in self.declared.items() if k in keep},
            self.order if order is None else order,
        )

    def check_well_founded(self) -> None:
        state = {}

        def visit(n, stack):
            if state.get(n) == 1:
                raise SpaceError(f"limit structure has a cycle through {' -> '.join(stack + [n])}")
            if state.get(n) == 2:
                return
            state[n] = 1
            for e in self.edges:
                if e.src == n:
                    visit(e.dst, stack + [n])
            state[n] = 2

        for n in sorted(self.schemas):
            visit(n, [])

    def schema_ranks(self) -> dict:
        """Cantor-Bendixson rank of each schema, computed structurally.

        rank(B) = sup over edges A->B of rank(A)+1, raised to any declared
        (limit) rank.  Sources have rank 0.
        """
        self.check_well_founded()
        ranks: dict = {}

        def rank(n):
            if n not in ranks:
                vals = [rank(e.src) + 1 for e in self.incoming(n)]
                if n in self.declared:
                    vals.append(self.declared[n])
                ranks[n] = ord_max(vals)
            return ranks[n]

        for n in self.schemas:
            rank(n)
        return ranks


def derived_set(s: ScatteredSpace) -> ScatteredSpace:
    """Schema-level derived set: keep targets of edges from surviving schemas."""
    step = s.order + 1
    keep = {e.dst for e in s.edges}
    keep |= {n for n, r in s.declared.items() if r >= Ordinal.of(step)}
    return s.restrict(keep, order=step)


def derived_chain(s: ScatteredSpace, max_steps: int = 64) -> list:
    chain = [s]
    while chain[-1].schemas and len(chain) <= max_steps:
        chain.append(derived_set(chain[-1]))
    return chain


# ---------------------------------------------------------------------------
# point-level families


@dataclass
class Family:
    """A declared sequence of points converging to ``target``."""

    key: tuple
    target: tuple
    members: list  # pids, ordered by index
    indices: list  # index of each member
    bounds: list  # declared tail bound on distance(member, target)


# ---------------------------------------------------------------------------
# systems


class DynSystem:
    """Base class of all systems: a homeomorphism on a described point set.

    Subclasses implement ``apply``, ``coord``, ``class_of``, ``enumerate``
    and, for scattered systems, ``space``, ``prefix`` and ``families``.
    """

    family = "abstract"
    metric = PLANE
    countable = True

    # -- required interface
    def apply(self, pid, k: int = 1):
        raise NotImplementedError

    def coord(self, pid):
        raise NotImplementedError

    def class_of(self, pid) -> str:
        raise NotImplementedError

    def enumerate(self, bounds: dict) -> list:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    # -- optional interface
    @property
    def space(self) -> ScatteredSpace:
        raise SpaceError(f"{self.family} has no scattered-space description")

    def prefix(self, length: int) -> list:
        raise SpaceError(f"{self.family} has no prefix enumeration")

    def families(self, length: int) -> list:
        return []

    def witness_suppliers(self) -> dict:
        """Map from winding edge (src, dst) to a WitnessSupplier."""
        return {}

    def samples(self, schema: str) -> list:
        """A few representative members of a schema."""
        return []

    def suggested_horizon(self, bounds: dict) -> Optional[int]:
        """Horizon after which orbits of the enumerated points have shown all their structure."""
        return None

    def expand_bounds(self, bounds: dict) -> dict:
        return {k: (2 * v if isinstance(v, int) else v) for k, v in bounds.items()}

    def is_periodic(self, pid, max_period: int) -> Optional[int]:
        q = pid
        for k in range(1, max_period + 1):
            q = self.apply(q, 1)
            if q == pid:
                return k
        return None

    # -- metric
    def point(self, pid) -> Point:
        return Point(pid, self.coord(pid))

    def dist(self, p, q):
        return chebyshev(self.coord(p), self.coord(q))

    def fcoord(self, pid) -> tuple:
        cache = self.__dict__.setdefault("_fcoords", {})
        c = cache.get(pid)
        if c is None:
            x, y = self.coord(pid)
            c = cache[pid] = (float(x), float(y))
        return c

    def dist_le(self, p, q, delta) -> bool:
        # Floats decide when they are far from the threshold; coordinates lie
        # in [-1, 1], so conversion and subtraction errors stay below 1e-15.
        a, b = self.fcoord(p), self.fcoord(q)
        d = max(abs(a[0] - b[0]), abs(a[1] - b[1]))
        fd = float(delta)
        if d > fd + FLOAT_MARGIN:
            return False
        if d < fd - FLOAT_MARGIN:
            return True
        return chebyshev_le(self.coord(p), self.coord(q), delta)


FLOAT_MARGIN = 1e-12


class PowerSystem(DynSystem):
    """``T^k`` on the same space as ``T``."""

    def __init__(self, base: DynSystem, k: int):
        if k == 0:
            raise ValueError("power k must be nonzero")
        self.base = base
        self.k = k
        self.family = base.family
        self.metric = base.metric
        self.countable = base.countable

    def apply(self, pid, k: int = 1):
        return self.base.apply(pid, k * self.k)

    def coord(self, pid):
        return self.base.coord(pid)

    def class_of(self, pid):
        return self.base.class_of(pid)

    def enumerate(self, bounds):
        return self.base.enumerate(bounds)

    def params(self):
        return {**self.base.params(), "power": self.k}

    @property
    def space(self):
        return self.base.space

    def expand_bounds(self, bounds):
        return self.base.expand_bounds(bounds)

    def dist(self, p, q):
        return self.base.dist(p, q)

    def dist_le(self, p, q, delta):
        return self.base.dist_le(p, q, delta)


def power_system(sys: DynSystem, k: int) -> DynSystem:
    if k == 0:
        raise ValueError("power k must be nonzero")
    if k == 1:
        return sys
    if isinstance(sys, PowerSystem):
        return PowerSystem(sys.base, sys.k * k)
    return PowerSystem(sys, k)


def orbit(sys: DynSystem, x, m_range: tuple) -> list:
    lo, hi = m_range
    return [sys.apply(x, m) for m in range(lo, hi + 1)]


@dataclass
class Truncation:
    """Finite exact subsample of a system with an orbit horizon."""

    system: DynSystem
    points: list
    horizon: int
    bounds: dict
    _orbits: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.points)

    def orbit(self, pid) -> list:
        """``T^m pid`` for ``m = -H..H``; entry ``H`` is the point itself."""
        o = self._orbits.get(pid)
        if o is None:
            h = self.horizon
            o = [self.system.apply(pid, m) for m in range(-h, h + 1)]
            self._orbits[pid] = o
        return o

    def at(self, pid, m: int):
        return self.orbit(pid)[self.horizon + m]

    def with_system(self, sys: DynSystem, horizon: Optional[int] = None) -> "Truncation":
        return Truncation(sys, list(self.points), self.horizon if horizon is None else horizon, dict(self.bounds))

    def expanded(self) -> "Truncation":
        return truncate(self.system, self.system.expand_bounds(self.bounds), self.horizon)


def truncate(sys: DynSystem, bounds: dict, horizon: int) -> Truncation:
    """Enumerate the points inside ``bounds`` and check their orbit segments."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    pts = sort_pids(sys.enumerate(bounds))
    tr = Truncation(sys, pts, horizon, dict(bounds))
    for p in pts:
        try:
            tr.orbit(p)
        except Exception as exc:  # rule left the representable set
            raise TruncationError(f"orbit of {pid_name(p)} leaves the described set: {exc}") from exc
    return tr


# ---------------------------------------------------------------------------
# metrics


def chebyshev(a, b) -> Fraction:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def chebyshev_le(a, b, delta) -> bool:
    return abs(a[0] - b[0]) <= delta and abs(a[1] - b[1]) <= delta


def circle_distance(pa, pb, circumference=Fraction(2)):
    """Shorter-arc distance between two positions (exact or intervals)."""
    if isinstance(pa, CertifiedInterval) or isinstance(pb, CertifiedInterval):
        pa = pa if isinstance(pa, CertifiedInterval) else CertifiedInterval.point(pa)
        pb = pb if isinstance(pb, CertifiedInterval) else CertifiedInterval.point(pb)
        diff = abs(pa - pb)
        other = CertifiedInterval(circumference - diff.hi, circumference - diff.lo)
        return CertifiedInterval(min(diff.lo, other.lo), min(diff.hi, other.hi))
    d = abs(pa - pb) % circumference
    return min(d, circumference - d)


def distance(a: Point, b: Point, metric: str = PLANE):
    """Distance between two points carrying coordinates of the same kind."""
    plane_a = isinstance(a.coord, tuple)
    plane_b = isinstance(b.coord, tuple)
    if plane_a != plane_b:
        raise SpaceError("points live in different coordinate systems")
    if metric == PLANE:
        if not plane_a:
            raise SpaceError("chebyshev-plane metric needs plane coordinates")
        return chebyshev(a.coord, b.coord)
    if metric == CIRCLE:
        if plane_a:
            raise SpaceError("circle-length metric needs circle positions")
        return circle_distance(a.coord, b.coord)
    raise SpaceError(f"unknown metric {metric!r}")


def hausdorff_distance(A: Sequence, B: Sequence, metric: str = PLANE) -> Fraction:
    """Symmetrized Hausdorff distance between two finite coordinate sets."""
    if not A or not B:
        raise SpaceError("Hausdorff distance of an empty set")
    d = chebyshev if metric == PLANE else circle_distance
    ab = max(min(d(a, b) for b in B) for a in A)
    ba = max(min(d(a, b) for a in A) for b in B)
    return max(ab, ba)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    ok: bool
    problems: list

    def to_json(self) -> dict:
        return {"ok": self.ok, "problems": self.problems}


def validate_space(sys: DynSystem, prefix_len: int, tolerance: Fraction) -> ValidationReport:
    """Sanity-check a system's declared structure on a finite prefix.

    Checks well-foundedness of the schema graph, uniqueness of ids and
    coordinates, that every declared family stays inside its tail bound,
    and that the bound has dropped to ``tolerance`` by the end of the prefix.
    """
    if prefix_len < 1:
        raise ValueError("prefix_len must be >= 1")
    problems = []
    try:
        sys.space.check_well_founded()
    except SpaceError as exc:
        problems.append({"check": "well-founded", "detail": str(exc)})
    pts = sys.prefix(prefix_len)
    if len(set(pts)) != len(pts):
        problems.append({"check": "unique-ids", "detail": "duplicate pid in prefix"})
    seen = {}
    for p in pts:
        c = sys.coord(p)
        key = tuple(x if isinstance(x, Fraction) else (x.a, x.b) if isinstance(x, Quad) else x for x in c)
        if key in seen and seen[key] != p:
            problems.append({"check": "unique-coords", "detail": f"{pid_name(p)} and {pid_name(seen[key])} coincide"})
        seen[key] = p
    for fam in sys.families(prefix_len):
        tc = sys.coord(fam.target)
        for pid, idx, bound in zip(fam.members, fam.indices, fam.bounds):
            d = chebyshev(sys.coord(pid), tc)
            if d > bound:
                problems.append({
                    "check": "tail-bound",
                    "schema": sys.class_of(pid),
                    "family": str(fam.key),
                    "index": idx,
                    "detail": f"distance {d} exceeds bound {bound}",
                })
                break
        if fam.bounds and min(fam.bounds) > tolerance:
            problems.append({
                "check": "tail-shrinks",
                "family": str(fam.key),
                "detail": f"tail bound never drops to {tolerance} on the prefix",
            })
    return ValidationReport(not problems, problems)


def brute_force_derived_chain(sys: DynSystem, prefix_len: int, threshold: int = 2) -> list:
    """Derived-set iteration on an expanded finite prefix.

    A point survives a step iff it is still present and some declared family
    into it has more than ``threshold`` surviving members.  Returns the list
    of surviving point sets, ending with the empty set.
    """
    current = set(sys.prefix(prefix_len))
    fams = sys.families(prefix_len)
    chain = [current]
    while current:
        counts = {}
        for fam in fams:
            if fam.target not in current:
                continue
            n = sum(1 for m in fam.members if m in current)
            counts[fam.target] = max(counts.get(fam.target, 0), n)
        current = {t for t, n in counts.items() if n > threshold}
        chain.append(current)
        if len(chain) > 64:
            raise SpaceError("brute-force derived chain did not terminate")
    return chain
