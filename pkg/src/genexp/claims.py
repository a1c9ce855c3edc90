"""Named end-to-end checks of the constructions, used by ``genexp verify``.

Each check builds its systems, runs the analyses and returns a report whose
``checks`` list holds one entry per stated condition.  The check passes iff
every entry does.  Reports contain no timings, so equal inputs give equal
bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .analysis import (
    FORWARD,
    TWO_SIDED,
    ball_cover,
    cb_rank,
    classify_expansiveness,
    companion_set,
    cover_companion_oracle,
    depth_chain,
    derived_levels,
    fixed_points,
    max_companion_profile,
    multi_nonwandering,
    refute_positive_n_expansiveness,
)
from .denjoy import build_denjoy
from .exactnum import Ordinal
from .reports import make_report
from .spacemodel import brute_force_derived_chain, pid_name, power_system, sort_pids, truncate
from .winding import build_harmonic, build_limit_glue, build_tower, build_winding_x2, standard_S

DELTA_GRID = (Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))
X2_GRID = (Fraction(1, 8), Fraction(1, 16), Fraction(1, 32))
DENJOY_BOUNDS = {"k": 32, "cantor": 16}
DENJOY_HORIZON = 64


@dataclass(frozen=True)
class Claim:
    name: str
    criterion: int
    summary: str
    run: Callable[..., dict]


def _check(name: str, ok: bool, **detail) -> dict:
    return {"check": name, "ok": bool(ok), **detail}


def _finish(name: str, params: dict, checks: list, **extra) -> dict:
    return make_report("claim", params, claim=name, ok=all(c["ok"] for c in checks), checks=checks, **extra)


def _names(pids) -> list:
    return [pid_name(p) for p in sort_pids(pids)]


# ---------------------------------------------------------------------------
# Denjoy


def _fiber_witnesses(prof, n: int) -> list:
    """Arc points whose companion set is exactly their own fiber of n points."""
    out = []
    for x, members in prof.sets.items():
        if x[0] == "a" and len(members) == n and all(y[0] == "a" and y[1] == x[1] for y in members):
            out.append(x)
    return sort_pids(out)


def _denjoy_run(sys, n: int, horizon: int) -> tuple:
    tr = truncate(sys, DENJOY_BOUNDS, horizon)
    checks, rows = [], []
    for d in DELTA_GRID:
        fwd = max_companion_profile(tr, d, [horizon], FORWARD)
        wit = _fiber_witnesses(fwd, n)
        rows.append({"delta": str(d), "forward_max": fwd.max_card, "forward_argmax": pid_name(fwd.rows[-1]["argmax"]),
                     "fiber_witnesses": len(wit), "first_fiber_witness": pid_name(wit[0]) if wit else None})
        checks.append(_check(f"fiber witness of forward size {n} at delta {d}", bool(wit)))
        if d == Fraction(1, 8):
            late = [x for x in wit if x[1] >= 2]
            checks.append(_check("forward max at delta 1/8", fwd.max_card == n and bool(late),
                                 value=fwd.max_card, expected=n,
                                 witness=pid_name(late[0]) if late else None))
            two = max_companion_profile(tr, d, [horizon], TWO_SIDED)
            checks.append(_check("two-sided max at delta 1/8", two.max_card == 1, value=two.max_card,
                                 expected=1, argmax=pid_name(two.rows[-1]["argmax"])))
    return checks, rows


def claim_denjoy_positive(n: int = 3) -> dict:
    sys = build_denjoy(n)
    checks, rows = _denjoy_run(sys, n, DENJOY_HORIZON)
    # The same checks at the horizon by which every pair of fibers has provably separated.
    H = max(sys.separation_horizon(DENJOY_BOUNDS), sys.separation_horizon(DENJOY_BOUNDS, forward=True))
    sep_checks, sep_rows = _denjoy_run(sys, n, H)
    params = {"n": n, "bounds": DENJOY_BOUNDS, "horizon": DENJOY_HORIZON}
    return _finish("denjoy-positive", params, checks, rows=rows,
                   separation_run={"horizon": H, "ok": all(c["ok"] for c in sep_checks),
                                   "checks": sep_checks, "rows": sep_rows})


def claim_denjoy_expansive(n: int = 3) -> dict:
    sys = build_denjoy(n)
    H = sys.separation_horizon(DENJOY_BOUNDS)
    tr = truncate(sys, DENJOY_BOUNDS, H)
    deltas = [d for d in DELTA_GRID if d < Fraction(1, 6)]
    rep = classify_expansiveness(tr, deltas, mode=TWO_SIDED)
    checks = [_check("two-sided verdict", rep.verdict == "consistent-with-n-expansive" and rep.n == 1,
                     verdict=rep.verdict, n=rep.n)]
    return _finish("denjoy-expansive", {"n": n, "bounds": DENJOY_BOUNDS, "horizon": H,
                                        "deltas": [str(d) for d in deltas]}, checks, report=rep.to_json())


# ---------------------------------------------------------------------------
# winding systems

X2_BOUNDS = {"levels": 2, "index": 8}


def _x2_companions(n: int) -> tuple:
    sys = build_winding_x2(n)
    checks = []
    rank = cb_rank(sys)
    levels = derived_levels(sys)
    checks.append(_check(f"n={n}: rank", rank == Ordinal.of(2), value=str(rank)))
    checks.append(_check(f"n={n}: second derived set", len(levels) > 2 and levels[2] == ["inf"],
                         value=levels[2] if len(levels) > 2 else None))
    H = sys.suggested_horizon(X2_BOUNDS)
    tr = truncate(sys, X2_BOUNDS, H)
    rows = []
    for d in X2_GRID:
        prof = max_companion_profile(tr, d, range(H + 1), TWO_SIDED)
        sh = prof.stabilization_horizon()
        # a witness set: y whose companions all have exactly the same companion set
        wit = None
        for x in tr.points:
            s = prof.sets[x]
            if len(s) == n and all(prof.sets[y] == s for y in s):
                wit = s
                break
        rows.append({"delta": str(d), "max": prof.max_card, "stable": prof.stable, "stabilization_horizon": sh,
                     "witness_set": _names(wit) if wit else None,
                     "profile": [[r["horizon"], r["max"]] for r in prof.rows]})
        checks.append(_check(f"n={n}: stabilized max at delta {d}", prof.stable and prof.max_card == n,
                             value=prof.max_card, stabilization_horizon=sh))
        checks.append(_check(f"n={n}: exact companion set at delta {d}", wit is not None))
    return checks, {"n": n, "rank": str(rank), "levels": levels, "horizon": H, "rows": rows}


def claim_x2_companions(n: Optional[int] = None) -> dict:
    ns = [n] if n else [2, 3]
    checks, runs = [], []
    for k in ns:
        c, r = _x2_companions(k)
        checks += c
        runs.append(r)
    return _finish("x2-companions", {"n": ns, "bounds": X2_BOUNDS, "deltas": [str(d) for d in X2_GRID]},
                   checks, runs=runs)


def claim_depth(n: int = 2) -> dict:
    x2 = build_winding_x2(n)
    checks, reports = [], {}
    expect = [["S", "Y", "inf"], ["S", "inf"], ["inf"]]
    for mode in ("wandering", "multi"):
        rep = depth_chain(x2, mode, d=3)
        reports[f"x2-{mode}"] = rep.to_json()
        checks.append(_check(f"X2 depth ({mode})", rep.depth == 2 and rep.levels == expect,
                             value=str(rep.depth), levels=rep.levels))
    tr = truncate(x2, {"levels": 1, "index": 2}, 4)
    mem = multi_nonwandering(tr, Fraction(1, 4), max_k=4, d=3)
    w = mem.members.get(("s", 0))
    checks.append(_check("s_0 multi-nonwandering at d=3, eps=1/4", w is not None and w.d == 3,
                         witness=w.to_json() if w else None))
    t3 = build_tower(3, n)
    r3 = cb_rank(t3)
    checks.append(_check("rank-3 tower: rank", r3 == Ordinal.of(3), value=str(r3)))
    for mode in ("wandering", "multi"):
        rep = depth_chain(t3, mode, d=3)
        reports[f"tower3-{mode}"] = rep.to_json()
        checks.append(_check(f"rank-3 tower: depth ({mode})", rep.depth == 3, value=str(rep.depth)))
    return _finish("depth", {"n": n, "eps": "1/4", "d": 3}, checks, reports=reports)


def claim_limit_glue(n: int = 2) -> dict:
    towers = [build_tower(a, n) for a in (2, 3, 4)]
    glue = build_limit_glue(towers)
    rank = cb_rank(glue)
    ranks = [cb_rank(t) for t in towers]
    checks = [
        _check("glue rank", rank == Ordinal.omega(), value=str(rank)),
        _check("witness chain increases", all(a < b for a, b in zip(ranks, ranks[1:])),
               chain=[str(r) for r in ranks]),
    ]
    depth = depth_chain(glue, "wandering")
    checks.append(_check("glue depth", depth.depth == Ordinal.omega(), value=str(depth.depth)))
    return _finish("limit-glue", {"n": n, "towers": ["2", "3", "4"]}, checks,
                   ranks={k: str(v) for k, v in sorted(glue.space.schema_ranks().items())},
                   depth=depth.to_json())


# ---------------------------------------------------------------------------
# harmonic example and countable refutation


def claim_harmonic() -> dict:
    sys = build_harmonic()
    checks, counts = [], {}
    for N in (1 << 10, 1 << 11):
        tr = truncate(sys, {"N": N}, 16)
        if N == 1 << 10:
            fx = fixed_points(tr)
            checks.append(_check("fixed points", fx == [("h", 1), ("h0",)] or set(fx) == {("h0",), ("h", 1)},
                                 value=_names(fx)))
        counts[N] = len(companion_set(tr, ("h0",), Fraction(1, 8), mode=TWO_SIDED).members)
    checks.append(_check("companions of 0 at N=1024", counts[1024] >= 1000, value=counts[1024]))
    checks.append(_check("companion count grows with N", counts[2048] > counts[1024],
                         values=[counts[1024], counts[2048]]))
    return _finish("harmonic", {"delta": "1/8", "horizon": 16, "N": [1024, 2048]}, checks)


def claim_refuter(max_n: int = 5) -> dict:
    cases = [("harmonic", build_harmonic(), {"N": 64}), ("x2", build_winding_x2(2), X2_BOUNDS)]
    checks, rows = [], []
    for name, sys, bounds in cases:
        tr = truncate(sys, bounds, sys.suggested_horizon(bounds))
        for n in range(1, max_n + 1):
            rep = refute_positive_n_expansiveness(tr, n, DELTA_GRID)
            rows.append({"system": name, **rep.to_json()})
            checks.append(_check(f"{name}: forward companions exceed {n}", rep.refuted,
                                 cards=[r["card"] for r in rep.per_delta]))
    return _finish("refuter", {"max_n": max_n, "deltas": [str(d) for d in DELTA_GRID]}, checks, rows=rows)


# ---------------------------------------------------------------------------
# power containment, oracle agreement, derived-set agreement


def power_cases() -> list:
    return [
        ("S", standard_S(), {"index": 8}, 12),
        ("x2", build_winding_x2(2), {"levels": 1, "index": 3}, 12),
        ("tower3", build_tower(3), {"levels": 1, "index": 2}, 12),
        ("glue", build_limit_glue([build_tower(2), build_tower(3)]), {"levels": 1, "index": 1}, 12),
        ("harmonic", build_harmonic(), {"N": 40}, 12),
        ("denjoy", build_denjoy(3), {"k": 6, "cantor": 4}, 12),
    ]


def claim_power_containment(delta: Fraction = Fraction(1, 8)) -> dict:
    checks = []
    for name, sys, bounds, H in power_cases():
        tr = truncate(sys, bounds, H)
        for mode in (TWO_SIDED, FORWARD):
            base = max_companion_profile(tr, delta, [H], mode).sets
            for k in (2, 3):
                trk = truncate(power_system(sys, k), bounds, H // k)
                pw = max_companion_profile(trk, delta, [H // k], mode).sets
                bad = [x for x in tr.points if not base[x] <= pw[x]]
                checks.append(_check(f"{name} {mode} k={k}", not bad, points=len(tr.points),
                                     violations=_names(bad[:5])))
    return _finish("power-containment", {"delta": str(delta), "k": [2, 3]}, checks)


def oracle_cases() -> list:
    return [
        ("x2 n=2", build_winding_x2(2), {"levels": 1, "index": 2}, Fraction(1, 16), 8),
        ("x2 n=3", build_winding_x2(3), {"levels": 1, "index": 1}, Fraction(1, 16), 4),
        ("denjoy n=3", build_denjoy(3), {"k": 4, "cantor": 4}, Fraction(1, 8), 8),
        ("harmonic", build_harmonic(), {"N": 16}, Fraction(1, 16), 8),
        ("S", standard_S(), {"index": 8}, Fraction(1, 8), 8),
    ]


def claim_oracle() -> dict:
    checks, rows = [], []
    for name, sys, bounds, delta, H in oracle_cases():
        tr = truncate(sys, bounds, H)
        for mode in (TWO_SIDED, FORWARD):
            direct = max_companion_profile(tr, delta, [H], mode).max_card
            oracle = cover_companion_oracle(tr, ball_cover(tr, delta, H, mode), H, mode)
            half = cover_companion_oracle(tr, ball_cover(tr, delta / 2, H, mode), H, mode)
            lower = max_companion_profile(tr, delta / 2, [H], mode).max_card
            upper = max_companion_profile(tr, 2 * delta, [H], mode).max_card
            rows.append({"instance": name, "mode": mode, "points": len(tr.points), "horizon": H, "delta": str(delta),
                         "direct": direct, "oracle": oracle, "sandwich": [lower, half, direct, oracle, upper]})
            checks.append(_check(f"{name} {mode}: sandwich", lower <= half <= direct <= oracle <= upper))
    exact = [f"{r['instance']} {r['mode']}" for r in rows if r["direct"] == r["oracle"]]
    checks.insert(0, _check("exact match on at least 3 instances", len(exact) >= 3, instances=exact,
                            mismatches=[f"{r['instance']} {r['mode']}" for r in rows if r["direct"] != r["oracle"]]))
    return _finish("oracle", {"guard": {"points": 64, "horizon": 8}}, checks, rows=rows)


def claim_derived_agreement(lengths=(20, 50, 100)) -> dict:
    checks = []
    for name, sys in (("S", standard_S()), ("x2", build_winding_x2(2)), ("tower3", build_tower(3))):
        schema = derived_levels(sys)
        for L in lengths:
            brute = [sorted({sys.class_of(p) for p in s}) for s in brute_force_derived_chain(sys, L)]
            checks.append(_check(f"{name} prefix {L}", brute == schema, brute=brute, schema=schema))
    return _finish("derived-agreement", {"lengths": list(lengths), "threshold": 2}, checks)


CLAIMS = {c.name: c for c in [
    Claim("denjoy-positive", 1, "Denjoy fibers: forward companions are exactly the fiber", claim_denjoy_positive),
    Claim("denjoy-expansive", 2, "Denjoy system is expansive below delta 1/6", claim_denjoy_expansive),
    Claim("x2-companions", 3, "rank-2 winding system has n-point companion sets", claim_x2_companions),
    Claim("depth", 4, "depth of the winding systems equals their rank", claim_depth),
    Claim("limit-glue", 5, "glued towers reach rank omega", claim_limit_glue),
    Claim("harmonic", 6, "cyclic-block example has countably many companions", claim_harmonic),
    Claim("refuter", 7, "countable examples are not positively n-expansive", claim_refuter),
    Claim("power-containment", 8, "companions of T are companions of T^k", claim_power_containment),
    Claim("oracle", 9, "cover oracle agrees with direct companion counts", claim_oracle),
    Claim("derived-agreement", 10, "schema and brute-force derived sets agree", claim_derived_agreement),
]}


def run_claim(name: str, n: Optional[int] = None) -> dict:
    claim = CLAIMS[name]
    if n is not None and name in ("denjoy-positive", "denjoy-expansive", "x2-companions", "depth", "limit-glue"):
        return claim.run(n)
    return claim.run()
