"""JSON reports, system configs and plot-ready tables.

Reports are plain dicts carrying ``"format": 1`` and a ``"kind"``.  Numbers
are exact strings (``p/q`` or ``a/b+c/d*sqrt2``); a decimal rendering is
added next to them only when asked for.  Serialization sorts keys so equal
reports give equal bytes.
"""

from __future__ import annotations

import json
import os
import tempfile
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional

from .denjoy import CIRCUMFERENCE, DenjoySystem, arc_length, build_denjoy
from .exactnum import ALPHA, Quad, format_scalar, interval_refine, parse_ordinal
from .exprsystem import ExprSystem
from .spacemodel import DynSystem, SpaceError, pid_name
from .winding import (
    GlueSystem,
    HarmonicSystem,
    SSystem,
    TowerSystem,
    X2System,
    build_harmonic,
    build_limit_glue,
    build_tower,
    build_winding_x2,
    standard_S,
)

FORMAT = 1
FAMILIES = ("denjoy", "s", "x2", "tower", "glue", "harmonic")
TABLE_KINDS = ("companion-profile", "arc-diameter", "omega-chain")


class ReportError(ValueError):
    pass


# ---------------------------------------------------------------------------
# numbers


def exact(x) -> str:
    return format_scalar(x)


def decimal_str(x, digits: int) -> str:
    """Decimal rendering of an exact value, rounded to ``digits`` significant digits."""
    if isinstance(x, Quad):
        iv = interval_refine(x, 4 * digits + 8)
        x = (iv.lo + iv.hi) / 2
    f = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(f.numerator) / Decimal(f.denominator))


def number(x, digits: Optional[int] = None):
    """Exact string, or ``{"exact": ..., "decimal": ...}`` when digits are requested."""
    if digits is None:
        return exact(x)
    return {"exact": exact(x), "decimal": decimal_str(x, digits)}


# ---------------------------------------------------------------------------
# report envelope and output


def make_report(kind: str, params: dict, **body) -> dict:
    return {"format": FORMAT, "kind": kind, "params": params, **body}


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory, then rename over ``path``."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".genexp-", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise ReportError(f"{path}: not a format-{FORMAT} document")
    return data


# ---------------------------------------------------------------------------
# system configs


def system_config(sys: DynSystem) -> dict:
    """Serializable description from which ``load_system`` rebuilds ``sys``."""
    if isinstance(sys, DenjoySystem):
        fam = "denjoy"
        params = {"n": sys.n, "precision": sys.precision}
        meta = {
            "rotation": exact(ALPHA),
            "circumference": exact(CIRCUMFERENCE),
            "fiber_size": sys.n,
            "fiber_offsets": [exact(Fraction(i, max(sys.n - 1, 1))) + "*l(I_k)" for i in range(sys.n)],
            "arc_lengths": {str(k): exact(arc_length(k)) for k in range(-3, 4)},
            "default_truncation": {"k": 32, "cantor": 16, "horizon": 64},
            "positions": {pid_name(p): str(sys.position(p)) for p in
                          [("a", k, i) for k in range(-2, 3) for i in range(sys.n)]},
        }
    elif isinstance(sys, SSystem):
        fam, params, meta = "s", {}, {}
    elif isinstance(sys, X2System):
        fam = "x2"
        params = {"n": sys.n, "r_base": sys.r_base}
        meta = {"primes": [sys.p(i) for i in (1, 2, 3)]}
    elif isinstance(sys, TowerSystem):
        fam = "tower"
        params = {"alpha": str(sys.alpha), "n": sys.n, "r_base": sys.r_base, "copies": sys.copies}
        meta = {}
    elif isinstance(sys, GlueSystem):
        fam = "glue"
        params = {"towers": [str(r) for r in sys.ranks], "n": getattr(sys.towers[0], "n", 2),
                  "x0": [exact(c) for c in sys.x0]}
        meta = {"rank": str(sys.rank)}
    elif isinstance(sys, HarmonicSystem):
        fam, params, meta = "harmonic", {}, {}
    else:
        raise ReportError(f"no config format for {type(sys).__name__}")
    if fam != "denjoy":
        try:
            meta["schemas"] = sorted(sys.space.names)
        except SpaceError:
            pass
    return make_report("system", params, family=fam, metadata=meta)


def build_system(family: str, n: int = 2, alpha: Optional[str] = None, towers: Optional[list] = None,
                 precision: Optional[int] = None, r_base: int = 1, copies: int = 3,
                 x0: Optional[list] = None) -> DynSystem:
    if family == "denjoy":
        return build_denjoy(n, precision)
    if family == "s":
        return standard_S()
    if family == "x2":
        return build_winding_x2(n, r_base=r_base)
    if family == "tower":
        return build_tower(parse_ordinal(alpha or "3"), n, r_base=r_base, copies=copies)
    if family == "glue":
        ranks = towers or ["2", "3", "4"]
        parts = [build_tower(parse_ordinal(r), n) for r in ranks]
        point = tuple(Fraction(c) for c in x0) if x0 else (Fraction(0), Fraction(0))
        return build_limit_glue(parts, point)
    if family == "harmonic":
        return build_harmonic()
    raise ReportError(f"unknown family {family!r}")


def load_system(cfg: dict) -> DynSystem:
    if cfg.get("kind") == "expr-system":
        return ExprSystem(cfg)
    if cfg.get("kind") != "system":
        raise ReportError("document is not a system config")
    p = cfg.get("params", {})
    return build_system(cfg["family"], n=p.get("n", 2), alpha=p.get("alpha"), towers=p.get("towers"),
                        precision=p.get("precision"), r_base=p.get("r_base", 1),
                        copies=p.get("copies", 3), x0=p.get("x0"))


# ---------------------------------------------------------------------------
# tables

_HEADERS = {
    "companion-profile": ("horizon", "max_card", "witness_id"),
    "arc-diameter": ("k", "m", "diameter"),
    "omega-chain": ("step", "size", "classes"),
}


def _table_rows(report: dict, kind: str) -> list:
    if kind == "companion-profile":
        return [(r["horizon"], r["max"], r["argmax"]) for r in report.get("rows", [])]
    if kind == "arc-diameter":
        return [(r["k"], r["m"], r["diameter"]) for r in report.get("rows", [])]
    return [(i, len(level), " ".join(level)) for i, level in enumerate(report.get("levels", []))]


def emit_table(report: dict, kind: str, sep: str = "\t") -> str:
    """Delimiter-separated table with a header row; an empty report gives the header only."""
    if kind not in _HEADERS:
        raise ReportError(f"unknown table kind {kind!r}")
    if report and report.get("kind") != kind:
        raise ReportError(f"report of kind {report.get('kind')!r} cannot be emitted as {kind!r}")
    lines = [sep.join(_HEADERS[kind])]
    lines += [sep.join(str(c) for c in row) for row in _table_rows(report, kind)]
    return "\n".join(lines) + "\n"


def arc_diameter_report(k: int, m_lo: int, m_hi: int, digits: Optional[int] = None) -> dict:
    rows = [{"k": k, "m": m, "diameter": exact(arc_length(k + m))} for m in range(m_lo, m_hi + 1)]
    if digits is not None:
        for r in rows:
            r["decimal"] = decimal_str(Fraction(r["diameter"]), digits)
    return make_report("arc-diameter", {"k": k, "m_range": [m_lo, m_hi]}, rows=rows)
