"""Command-line interface: ``genexp build | analyze | verify | emit``.

Exit codes: 0 on success, 1 when a verified claim fails, 2 on usage errors
(unknown family, claim or table kind, malformed input).
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .analysis import (
    FORWARD,
    TWO_SIDED,
    UndecidedError,
    cb_rank,
    converging_semiorbits,
    depth_chain,
    derived_levels,
    fixed_points,
    max_companion_profile,
    multi_nonwandering,
    periodic_points,
    refute_positive_n_expansiveness,
)
from .claims import CLAIMS, DELTA_GRID, run_claim
from .denjoy import PRECISION_ENV, default_precision
from .reports import (
    FAMILIES,
    TABLE_KINDS,
    ReportError,
    arc_diameter_report,
    build_system,
    dumps,
    emit_table,
    load_system,
    make_report,
    number,
    read_json,
    system_config,
    write_atomic,
)
from .spacemodel import SpaceError, pid_name, sort_pids, truncate

DEFAULT_BOUNDS = {
    "denjoy": ({"k": 32, "cantor": 16}, 64),
    "s": ({"index": 16}, 16),
    "x2": ({"levels": 2, "index": 8}, None),
    "tower": ({"levels": 1, "index": 4}, None),
    "glue": ({"levels": 1, "index": 2}, 16),
    "harmonic": ({"N": 64}, None),
    "expr": ({"index": 16}, 16),
}
ANALYSES = ("companions", "rank", "omega", "depth", "fix", "per", "cs", "refute")


class UsageError(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from exc


def _bound(text: str) -> tuple:
    key, sep, value = text.partition("=")
    if not sep or not value.lstrip("-").isdigit():
        raise argparse.ArgumentTypeError(f"bounds are written key=integer, got {text!r}")
    return key, int(value)


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="genexp", description="Exact companion-set and rank analyses.")
    p.add_argument("--version", action="version", version=f"genexp {__version__}")
    p.add_argument("--precision", type=int, default=None,
                   help=f"bits for certified Denjoy positions (default ${PRECISION_ENV} or 64)")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a system and write its config")
    b.add_argument("--family", required=True, choices=FAMILIES)
    b.add_argument("--n", type=int, default=None, help="fiber size (denjoy) or copies per level")
    b.add_argument("--alpha", default="3", help="tower rank, e.g. 3, 4 or w+1")
    b.add_argument("--towers", default="2,3,4", help="comma-separated tower ranks for glue")
    b.add_argument("--out", required=True)

    a = sub.add_parser("analyze", help="run one analysis on a built system")
    a.add_argument("analysis", choices=ANALYSES)
    a.add_argument("--sys", required=True, help="system config written by build")
    a.add_argument("--bounds", type=_bound, action="append", default=[], metavar="KEY=INT")
    a.add_argument("--horizon", type=int, default=None)
    a.add_argument("--delta", type=_fraction, action="append", default=None,
                   help="repeatable; companions uses the first")
    a.add_argument("--mode", default=None,
                   help="two_sided or forward (companions); wandering or multi (depth)")
    a.add_argument("--eps", type=_fraction, default=Fraction(1, 4))
    a.add_argument("--d", type=int, default=2)
    a.add_argument("--max-k", type=int, default=None)
    a.add_argument("--max-period", type=int, default=64)
    a.add_argument("--tol", type=_fraction, default=None)
    a.add_argument("--n", type=int, default=5, help="largest n to refute")
    a.add_argument("--decimals", type=int, default=None, help="add decimal renderings")
    a.add_argument("--out", default=None)

    v = sub.add_parser("verify", help="run a named check end to end")
    v.add_argument("--claim", required=True, help=", ".join(CLAIMS))
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--out", default=None)

    e = sub.add_parser("emit", help="turn a report into a plot-ready table")
    e.add_argument("--kind", required=True, help=", ".join(TABLE_KINDS))
    e.add_argument("--report", default=None, help="report file; arc-diameter can be computed directly")
    e.add_argument("--k", type=int, default=0)
    e.add_argument("--m-from", type=int, default=-5)
    e.add_argument("--m-to", type=int, default=10)
    e.add_argument("--sep", default="\t")
    e.add_argument("--out", default=None)
    return p


def _output(text: str, path: Optional[str]) -> None:
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_build(args) -> int:
    n = args.n if args.n is not None else (3 if args.family == "denjoy" else 2)
    try:
        system = build_system(args.family, n=n, alpha=args.alpha, towers=args.towers.split(","),
                              precision=args.precision)
    except SpaceError as exc:
        raise UsageError(str(exc)) from exc
    _output(dumps(system_config(system)), args.out)
    return 0


def _truncation(family: str, system, args):
    bounds, H = DEFAULT_BOUNDS[family]
    bounds = {**bounds, **dict(args.bounds)}
    if args.horizon is not None:
        H = args.horizon
    if H is None:
        H = system.suggested_horizon(bounds) or 16
    return truncate(system, bounds, H)


def _analyze(args, cfg, system) -> dict:
    family = cfg.get("family", "expr")
    params = {"system": {"family": family, **cfg.get("params", {})}}
    what = args.analysis
    digits = args.decimals

    if what in ("rank", "depth"):
        if what == "rank":
            rank = cb_rank(system)
            ranks = {k: str(v) for k, v in sorted(system.space.schema_ranks().items())}
            return make_report("rank", params, rank=str(rank), schema_ranks=ranks,
                               derived_levels=derived_levels(system))
        mode = args.mode or "wandering"
        rep = depth_chain(system, mode, eps=args.eps, d=args.d, max_period=args.max_period)
        params.update(mode=mode, eps=number(args.eps, digits), d=1 if mode == "wandering" else args.d)
        return make_report("omega-chain", params, **rep.to_json())

    tr = _truncation(family, system, args)
    params.update(bounds=tr.bounds, horizon=tr.horizon, points=len(tr.points))
    deltas = args.delta or [Fraction(1, 8)]

    if what == "companions":
        mode = args.mode or TWO_SIDED
        if mode not in (TWO_SIDED, FORWARD):
            raise UsageError(f"companion mode must be {TWO_SIDED} or {FORWARD}")
        H = tr.horizon
        hs = sorted({0, H // 4, H // 2, max(H - 1, 0), H})
        prof = max_companion_profile(tr, deltas[0], hs, mode)
        body = prof.to_json()
        body.pop("delta")
        x = prof.rows[-1]["argmax"]
        params.update(delta=number(deltas[0], digits), mode=mode)
        return make_report("companion-profile", params, witness_members=[pid_name(p) for p in sort_pids(prof.sets[x])], **body)
    if what == "omega":
        max_k = args.max_k or max(tr.horizon // max(args.d, 1), 1)
        rep = multi_nonwandering(tr, args.eps, max_k, args.d)
        params.update(eps=number(args.eps, digits), d=args.d, max_k=max_k)
        return make_report("omega-membership", params, **rep.to_json())
    if what == "fix":
        return make_report("fixed-points", params, points=[pid_name(p) for p in fixed_points(tr)])
    if what == "per":
        per = periodic_points(tr, args.max_period)
        params.update(max_period=args.max_period)
        return make_report("periodic-points", params, points=[{"point": pid_name(p), "period": k} for p, k in per])
    if what == "cs":
        tol = args.tol if args.tol is not None else deltas[0] / 2
        params.update(tol=number(tol, digits))
        return make_report("converging-semiorbits", params,
                           entries=[e.to_json() for e in converging_semiorbits(tr, tol)])
    # refute
    deltas = args.delta or list(DELTA_GRID)
    rows = [refute_positive_n_expansiveness(tr, n, deltas).to_json() for n in range(1, args.n + 1)]
    params.update(deltas=[number(d, digits) for d in deltas], max_n=args.n)
    return make_report("refutation", params, refuted=all(r["refuted"] for r in rows), rows=rows)


def cmd_analyze(args) -> int:
    cfg = read_json(args.sys)
    if args.precision and cfg.get("family") == "denjoy":
        cfg["params"]["precision"] = args.precision
    system = load_system(cfg)
    _output(dumps(_analyze(args, cfg, system)), args.out)
    return 0


def cmd_verify(args) -> int:
    if args.claim not in CLAIMS:
        raise UsageError(f"unknown claim {args.claim!r}; choose from {', '.join(CLAIMS)}")
    report = run_claim(args.claim, args.n)
    _output(dumps(report), args.out)
    return 0 if report["ok"] else 1


def cmd_emit(args) -> int:
    if args.kind not in TABLE_KINDS:
        raise UsageError(f"unknown table kind {args.kind!r}; choose from {', '.join(TABLE_KINDS)}")
    if args.report:
        report = read_json(args.report)
    elif args.kind == "arc-diameter":
        report = arc_diameter_report(args.k, args.m_from, args.m_to)
    else:
        raise UsageError(f"--report is required for {args.kind}")
    _output(emit_table(report, args.kind, args.sep), args.out)
    return 0


COMMANDS = {"build": cmd_build, "analyze": cmd_analyze, "verify": cmd_verify, "emit": cmd_emit}


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parser().parse_args(argv)
    except SystemExit as exc:  # argparse reports usage problems with exit 2
        return int(exc.code or 0)
    if args.precision is None:
        args.precision = default_precision()
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ReportError, OSError, ValueError) as exc:
        print(f"genexp: error: {exc}", file=sys.stderr)
        return 2
    except (SpaceError, UndecidedError) as exc:
        print(f"genexp: analysis failed: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
