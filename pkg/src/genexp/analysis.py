"""Analyses on truncations: companion sets, expansiveness, limit sets, depth.

Everything decided here is decided exactly (rationals, quadratic surds, or
certified intervals escalated until they separate from the threshold).
Statements about the infinite system are either symbolic (schema graph plus
numerically verified witnesses) or explicitly labelled as truncation
evidence.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .exactnum import Ordinal, ord_max
from .spacemodel import (
    CIRCLE,
    DynSystem,
    ScatteredSpace,
    SpaceError,
    Truncation,
    derived_chain,
    pid_name,
    sort_pids,
    truncate,
)

TWO_SIDED = "two_sided"
FORWARD = "forward"


class UndecidedError(SpaceError):
    """The requested classification cannot be certified."""


# ---------------------------------------------------------------------------
# companion sets


class _Neighbors:
    """Candidate pairs at time 0 via a sorted first coordinate."""

    def __init__(self, tr: Truncation):
        self.tr = tr
        sys = tr.system
        self.circle = sys.metric == CIRCLE
        keyed = []
        for p in tr.points:
            c = sys.coord(p)
            keyed.append((c.lo if self.circle else c[0], p))
        keyed.sort(key=lambda kp: kp[0])
        self.keys = [k for k, _ in keyed]
        self.pids = [p for _, p in keyed]
        self.slack = max((sys.coord(p).width for p in tr.points), default=0) if self.circle else 0

    def near(self, x, delta) -> list:
        sys = self.tr.system
        c = sys.coord(x)
        k = c.lo if self.circle else c[0]
        r = delta + self.slack
        shifts = (-2, 0, 2) if self.circle else (0,)
        out = set()
        for s in shifts:
            lo = bisect.bisect_left(self.keys, k + s - r)
            hi = bisect.bisect_right(self.keys, k + s + r)
            out.update(self.pids[lo:hi])
        return [y for y in out if sys.dist_le(x, y, delta)]


def _layers(tr: Truncation, x, delta, horizons: Sequence[int], mode: str, nb: Optional[_Neighbors] = None) -> dict:
    """Companion set of x after each horizon in ``horizons`` (ascending)."""
    if mode not in (TWO_SIDED, FORWARD):
        raise ValueError(f"unknown mode {mode!r}")
    if max(horizons) > tr.horizon:
        raise ValueError(f"horizon {max(horizons)} exceeds the truncation horizon {tr.horizon}")
    sys = tr.system
    nb = nb or _Neighbors(tr)
    alive = nb.near(x, delta)
    out = {}
    wanted = set(horizons)
    if 0 in wanted:
        out[0] = frozenset(alive)
    for m in range(1, max(horizons) + 1):
        times = (m, -m) if mode == TWO_SIDED else (m,)
        for t in times:
            xt = tr.at(x, t)
            alive = [y for y in alive if sys.dist_le(xt, tr.at(y, t), delta)]
        if m in wanted:
            out[m] = frozenset(alive)
    return out


@dataclass
class CompanionReport:
    center: tuple
    delta: Fraction
    horizon: int
    mode: str
    members: list
    stable: bool  # same set one horizon earlier

    def to_json(self) -> dict:
        return {"center": pid_name(self.center), "delta": str(self.delta), "horizon": self.horizon,
                "mode": self.mode, "card": len(self.members),
                "members": [pid_name(p) for p in self.members], "stable": self.stable}


def companion_set(tr: Truncation, x, delta, horizon: Optional[int] = None, mode: str = TWO_SIDED) -> CompanionReport:
    """Points y of the truncation with d(T^m x, T^m y) <= delta for all m in the window."""
    if x not in set(tr.points):
        raise SpaceError(f"{pid_name(x)} is not in the truncation")
    H = tr.horizon if horizon is None else horizon
    hs = sorted({max(H - 1, 0), H})
    lay = _layers(tr, x, delta, hs, mode)
    return CompanionReport(x, Fraction(delta), H, mode, sort_pids(lay[H]), lay[hs[0]] == lay[H])


@dataclass
class ProfileReport:
    delta: Fraction
    mode: str
    rows: list  # dicts: horizon, max, argmax
    stable: bool  # every companion set unchanged between the last two horizons
    sets: dict = field(default_factory=dict, repr=False)  # pid -> members at the last horizon

    @property
    def max_card(self) -> int:
        return self.rows[-1]["max"]

    def stabilization_horizon(self) -> Optional[int]:
        """First horizon from which the maximum no longer changes."""
        last = self.rows[-1]["max"]
        h = None
        for row in reversed(self.rows):
            if row["max"] != last:
                break
            h = row["horizon"]
        return h if self.stable else None

    def to_json(self) -> dict:
        return {"delta": str(self.delta), "mode": self.mode, "stable": self.stable,
                "stabilization_horizon": self.stabilization_horizon(),
                "rows": [{"horizon": r["horizon"], "max": r["max"], "argmax": pid_name(r["argmax"])}
                         for r in self.rows]}


def max_companion_profile(tr: Truncation, delta, horizons: Sequence[int], mode: str = TWO_SIDED) -> ProfileReport:
    hs = sorted(set(horizons))
    nb = _Neighbors(tr)
    per = {x: _layers(tr, x, delta, hs, mode, nb) for x in tr.points}
    rows = []
    for h in hs:
        best, arg = -1, None
        for x in tr.points:  # already sorted, so ties go to the first pid
            c = len(per[x][h])
            if c > best:
                best, arg = c, x
        rows.append({"horizon": h, "max": best, "argmax": arg})
    stable = len(hs) > 1 and all(per[x][hs[-1]] == per[x][hs[-2]] for x in tr.points)
    return ProfileReport(Fraction(delta), mode, rows, stable, {x: per[x][hs[-1]] for x in tr.points})


@dataclass
class ExpansivenessReport:
    verdict: str  # consistent-with-n-expansive, consistent-with-aleph0, unresolved
    n: Optional[int]
    essential: Optional[bool]
    mode: str
    per_delta: list

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "n": self.n, "essential": self.essential,
                "mode": self.mode, "per_delta": self.per_delta}


def _horizons_for(H: int) -> list:
    return [max(H - 1, 0), H]


def classify_expansiveness(tr: Truncation, deltas: Sequence, horizons: Optional[Sequence[int]] = None,
                           mode: str = TWO_SIDED, growth: bool = True) -> ExpansivenessReport:
    """Truncation evidence for (n-)expansiveness.

    For each delta the maximal companion cardinality must be stable across
    the last two horizons.  With ``growth`` the check is repeated on the
    truncation with doubled bounds; a larger maximum there is read as
    unbounded growth.  The answer is evidence about the truncations only.
    """
    horizons = list(horizons) if horizons else _horizons_for(tr.horizon)
    big = None
    if growth:
        sys = tr.system
        b2 = sys.expand_bounds(tr.bounds)
        H2 = sys.suggested_horizon(b2) or 2 * tr.horizon
        big = truncate(sys, b2, H2)
    rows = []
    for d in deltas:
        prof = max_companion_profile(tr, d, horizons, mode)
        row = {"delta": str(Fraction(d)), "stable": prof.stable, "max": prof.max_card}
        if growth and prof.stable:
            prof2 = max_companion_profile(big, d, _horizons_for(big.horizon), mode)
            row["expanded_max"] = prof2.max_card
            row["expanded_stable"] = prof2.stable
            if not prof2.stable:
                row["reading"] = "unresolved"
            elif prof2.max_card > prof.max_card:
                row["reading"] = "grows"
            else:
                row["reading"] = "bounded"
        else:
            row["reading"] = "bounded" if prof.stable else "unresolved"
        rows.append(row)
    readings = [r["reading"] for r in rows]
    if "unresolved" in readings:
        return ExpansivenessReport("unresolved", None, None, mode, rows)
    bounded = [r["max"] for r in rows if r["reading"] == "bounded"]
    if not bounded:
        return ExpansivenessReport("consistent-with-aleph0", None, None, mode, rows)
    n = min(bounded)
    essential = all(r["reading"] == "bounded" and r["max"] == n for r in rows) and n > 1
    return ExpansivenessReport("consistent-with-n-expansive", n, essential, mode, rows)


# ---------------------------------------------------------------------------
# fixed points, periodic points, converging semiorbits


def fixed_points(tr: Truncation) -> list:
    return [p for p in tr.points if tr.system.apply(p, 1) == p]


def periodic_points(tr: Truncation, max_period: int) -> list:
    """(pid, least period) for every point of period <= max_period."""
    out = []
    for p in tr.points:
        k = tr.system.is_periodic(p, max_period)
        if k is not None:
            out.append((p, k))
    return out


@dataclass
class SemiorbitEntry:
    point: tuple
    backward_limit: tuple
    forward_limit: tuple

    def to_json(self) -> dict:
        return {"point": pid_name(self.point), "alpha_limit": pid_name(self.backward_limit),
                "omega_limit": pid_name(self.forward_limit)}


def converging_semiorbits(tr: Truncation, tol, horizon: Optional[int] = None) -> list:
    """Points whose orbit tails (|m| in [H/2, H]) stay within tol of a fixed point on each side.

    Periodic points that are not fixed are excluded outright.
    """
    sys = tr.system
    H = tr.horizon if horizon is None else horizon
    fixed = fixed_points(tr)
    out = []
    for x in tr.points:
        k = sys.is_periodic(x, H)
        if k is not None and k > 1:
            continue
        tail = range((H + 1) // 2, H + 1)

        def limit(sign):
            for z in fixed:
                if all(sys.dist_le(tr.at(x, sign * m), z, tol) for m in tail):
                    return z
            return None

        fwd = limit(1)
        back = limit(-1) if fwd is not None else None
        if fwd is not None and back is not None:
            out.append(SemiorbitEntry(x, back, fwd))
    return out


# ---------------------------------------------------------------------------
# Cantor-Bendixson rank


def cb_rank(s) -> Ordinal:
    """Rank of a system or schema graph: the largest schema rank.

    For finite ranks the structural answer is cross-checked against plain
    derived-set iteration.
    """
    space = s.space if isinstance(s, DynSystem) else s
    ranks = space.schema_ranks()
    top = ord_max(list(ranks.values()))
    if top.is_finite():
        steps = len(derived_chain(space)) - 2  # last entry is empty
        if steps != top.finite_value():
            raise SpaceError(f"derived-set iteration gives {steps}, ranks give {top}")
    return top


def derived_levels(s) -> list:
    space = s.space if isinstance(s, DynSystem) else s
    return [sorted(x.names) for x in derived_chain(space)]


# ---------------------------------------------------------------------------
# nonwandering and multi-nonwandering sets


def _returns(sys, w, k, target, eps, d) -> bool:
    return all(sys.dist_le(sys.apply(w, t * k), target, eps) for t in range(d + 1))


@dataclass
class ReturnWitness:
    target: tuple
    start: tuple
    stride: int
    d: int
    source: str  # "truncation", "periodic" or "winding-certificate"

    def to_json(self) -> dict:
        return {"target": pid_name(self.target), "start": pid_name(self.start), "stride": self.stride,
                "times": [t * self.stride for t in range(self.d + 1)], "source": self.source}


@dataclass
class MembershipReport:
    eps: Fraction
    d: int
    members: dict  # pid -> ReturnWitness
    nonmembers: dict  # pid -> reason
    undecided: list

    def to_json(self) -> dict:
        return {"eps": str(self.eps), "d": self.d,
                "members": {pid_name(p): w.to_json() for p, w in sorted(self.members.items(), key=lambda kv: pid_name(kv[0]))},
                "nonmembers": {pid_name(p): r for p, r in self.nonmembers.items()},
                "undecided": [pid_name(p) for p in self.undecided]}


def _isolated_aperiodic(sys: DynSystem, x) -> Optional[str]:
    try:
        space = sys.space
    except SpaceError:
        return None
    name = sys.class_of(x)
    sch = space.schemas[name]
    if space.incoming(name) or name in space.declared or sch.periodic or sch.fixed:
        return None
    return f"class {name} is isolated and aperiodic"


def _symbolic_witness(sys: DynSystem, x, eps, d) -> Optional[ReturnWitness]:
    try:
        space = sys.space
    except SpaceError:
        return None
    name = sys.class_of(x)
    sups = sys.witness_suppliers()
    for e in space.incoming(name, "winding"):
        f = sups.get((e.src, e.dst))
        if f is None:
            continue
        for w, k in f(x, Fraction(eps), d):
            if _returns(sys, w, k, x, eps, d):
                return ReturnWitness(x, w, k, d, "winding-certificate")
    return None


def multi_nonwandering(tr: Truncation, eps, max_k: int, d: int, symbolic: bool = True) -> MembershipReport:
    """Points x with some y near x and k <= max_k such that T^{tk} y is eps-near x for t = 0..d."""
    if d < 1:
        raise ValueError("d must be >= 1")
    sys = tr.system
    nb = _Neighbors(tr)
    members, non, und = {}, {}, []
    for x in tr.points:
        per = sys.is_periodic(x, max_k)
        if per is not None:
            members[x] = ReturnWitness(x, x, per, d, "periodic")
            continue
        why = _isolated_aperiodic(sys, x)
        if why:
            non[x] = why
            continue
        found = None
        for y in sort_pids(nb.near(x, eps)):
            for k in range(1, max_k + 1):
                if _returns(sys, y, k, x, eps, d):
                    found = ReturnWitness(x, y, k, d, "truncation")
                    break
            if found:
                break
        if found is None and symbolic:
            found = _symbolic_witness(sys, x, eps, d)
        if found:
            members[x] = found
        else:
            und.append(x)
    return MembershipReport(Fraction(eps), d, members, non, und)


def nonwandering(tr: Truncation, eps, max_k: int, symbolic: bool = True) -> MembershipReport:
    return multi_nonwandering(tr, eps, max_k, 1, symbolic)


# ---------------------------------------------------------------------------
# depth: the chain Omega_0 = X, Omega_{k+1} = nonwandering set of T on Omega_k


@dataclass
class DepthReport:
    mode: str
    levels: list  # sorted schema names at each step
    depth: object  # int or Ordinal
    steps: list  # certificates per step

    def to_json(self) -> dict:
        return {"mode": self.mode, "depth": str(self.depth), "levels": self.levels, "steps": self.steps}


def _omega_step(sys: DynSystem, full: ScatteredSpace, current: set, eps, d, max_period, sups) -> tuple:
    keep, cert = set(), {}
    for name in sorted(current):
        sch = full.schemas[name]
        samples = sys.samples(name)
        if sch.fixed or sch.periodic:
            ws = []
            for s in samples:
                k = sys.is_periodic(s, max_period)
                if k is None:
                    raise UndecidedError(f"{pid_name(s)} is declared periodic but no period <= {max_period}")
                ws.append({"point": pid_name(s), "period": k})
            keep.add(name)
            cert[name] = {"kept": "periodic", "witnesses": ws}
            continue
        sources = [e for e in full.incoming(name) if e.src in current]
        if not sources:
            for s in samples:
                if sys.is_periodic(s, max_period) is not None:
                    raise UndecidedError(f"{pid_name(s)} is periodic but its class is not declared so")
            cert[name] = {"removed": "isolated and aperiodic in the current set"}
            continue
        wind = [e for e in sources if e.kind == "winding" and (e.src, e.dst) in sups]
        ws = []
        for s in samples:
            hit = None
            for e in wind:
                for w, k in sups[(e.src, e.dst)](s, Fraction(eps), d):
                    if sys.class_of(w) == e.src and _returns(sys, w, k, s, eps, d):
                        hit = {"point": pid_name(s), "start": pid_name(w), "stride": k, "d": d}
                        break
                if hit:
                    break
            if hit is None:
                raise UndecidedError(f"no verified return witness for {pid_name(s)} in class {name}")
            ws.append(hit)
        keep.add(name)
        cert[name] = {"kept": "recurrent", "witnesses": ws}
    return keep, cert


def depth_chain(sys: DynSystem, mode: str = "wandering", eps=Fraction(1, 4), d: int = 2,
                max_period: int = 64, max_steps: int = 32) -> DepthReport:
    """Symbolic Omega chain on the schema graph, every step backed by verified witnesses.

    In "multi" mode a class survives through a return along an arithmetic
    progression of d+1 times; in "wandering" mode d is forced to 1.
    """
    if mode not in ("wandering", "multi"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "wandering":
        d = 1
    components = getattr(sys, "towers", None)
    if components is not None:
        return _glue_depth(sys, mode, eps, d, max_period, max_steps)
    full = sys.space
    sups = sys.witness_suppliers()
    current = set(full.names)
    levels, steps = [sorted(current)], []
    for _ in range(max_steps):
        keep, cert = _omega_step(sys, full, current, eps, d, max_period, sups)
        steps.append(cert)
        if keep == current:
            return DepthReport(mode, levels, len(levels) - 1, steps)
        current = keep
        levels.append(sorted(current))
    raise UndecidedError(f"chain did not stabilise within {max_steps} steps")


def _glue_depth(sys, mode, eps, d, max_period, max_steps) -> DepthReport:
    parts = [depth_chain(T, mode, eps, d, max_period, max_steps) for T in sys.towers]
    depths = [p.depth for p in parts]
    if any(not a < b for a, b in zip(depths, depths[1:])):
        raise UndecidedError(f"component depths {depths} do not increase; no limit to extrapolate")
    depth = Ordinal.of(depths[-1]).next_limit()
    steps = [{"component": t, "depth": p.depth, "levels": p.levels} for t, p in enumerate(parts)]
    steps.append({"extrapolated": f"components keep increasing by one, limit {depth}"})
    return DepthReport(mode, [["x0"] + [f"g{t}.*" for t in range(len(parts))], ["x0"]], depth, steps)


# ---------------------------------------------------------------------------
# refuting positive n-expansiveness on countable systems


@dataclass
class RefutationReport:
    n: int
    refuted: bool
    per_delta: list

    def to_json(self) -> dict:
        return {"n": self.n, "refuted": self.refuted, "per_delta": self.per_delta}


def refute_positive_n_expansiveness(tr: Truncation, n: int, deltas: Sequence, horizon: Optional[int] = None) -> RefutationReport:
    """For each delta, exhibit the point with the largest forward companion set if it exceeds n."""
    if not tr.system.countable:
        raise SpaceError("refutation only applies to countable spaces")
    H = tr.horizon if horizon is None else horizon
    rows = []
    for d in deltas:
        prof = max_companion_profile(tr, d, [H], FORWARD)
        x = prof.rows[-1]["argmax"]
        members = sort_pids(prof.sets[x])
        rows.append({"delta": str(Fraction(d)), "witness": pid_name(x), "card": len(members),
                     "members": [pid_name(p) for p in members], "exceeds": len(members) > n})
    return RefutationReport(n, all(r["exceeds"] for r in rows), rows)


# ---------------------------------------------------------------------------
# independent oracle: covers and bisequences


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: Fraction


WHOLE = "whole-space"
MAX_ORACLE_POINTS = 64
MAX_ORACLE_HORIZON = 8


def window_points(tr: Truncation, horizon: int, mode: str = TWO_SIDED) -> list:
    lo = -horizon if mode == TWO_SIDED else 0
    return sort_pids(tr.at(y, m) for y in tr.points for m in range(lo, horizon + 1))


def ball_cover(tr: Truncation, radius, horizon: int, mode: str = TWO_SIDED) -> list:
    """Closed balls of the given radius around every point the window visits."""
    return [Ball(p, Fraction(radius)) for p in window_points(tr, horizon, mode)]


def _member(sys, y, A) -> bool:
    if A == WHOLE:
        return True
    if isinstance(A, Ball):
        return sys.dist_le(y, A.center, A.radius)
    return y in A


def cover_companion_oracle(tr: Truncation, cover: Iterable, horizon: int, mode: str = TWO_SIDED) -> int:
    """Largest |tr ∩ (intersection over m of T^-m A_m)| over sequences (A_m) from the cover.

    The cover must contain every orbit point the window visits.  The search
    is exhaustive over all sequences, merging identical intermediate sets,
    and is only allowed for small truncations and horizons.
    """
    if len(tr) > MAX_ORACLE_POINTS or horizon > MAX_ORACLE_HORIZON:
        raise ValueError(f"oracle is limited to {MAX_ORACLE_POINTS} points and horizon {MAX_ORACLE_HORIZON}")
    if horizon > tr.horizon:
        raise ValueError("horizon exceeds the truncation horizon")
    sys = tr.system
    cover = list(cover)
    for y in window_points(tr, horizon, mode):
        if not any(_member(sys, y, A) for A in cover):
            raise SpaceError(f"cover misses {pid_name(y)}")
    times = range(-horizon, horizon + 1) if mode == TWO_SIDED else range(0, horizon + 1)
    states = {frozenset(tr.points)}
    for m in times:
        moved = {y: tr.at(y, m) for y in tr.points}
        hits = [frozenset(y for y in tr.points if _member(sys, moved[y], A)) for A in cover]
        states = {s & h for s in states for h in hits if s & h}
    return max((len(s) for s in states), default=0)
