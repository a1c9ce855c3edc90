"""Systems described in JSON by closed-form point families.

Document shape::

    {"format": 1, "kind": "expr-system",
     "schemas": [{"base": {"id": "inf", "coord": ["0", "0"]},
                  "family": {"name": "S", "index": "Z",
                             "coord": {"nonneg": ["1/(j+1)", "1/(j+1)"],
                                       "neg": ["1/(1-j)", "-1/(1-j)"]},
                             "limit": "inf", "tail_bound": "..."}}],
     "rule": {"shift": 1}}

Expressions use integer literals, the index ``j``, ``+ - * /``, ``2^j``
(or ``2^-j``) and the token ``sqrt2``.  A coordinate is one pair, or a
pair per sign of the index; a tail bound likewise.  The rule shifts every
family index by a fixed step and keeps base points fixed.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exactnum import SQRT2, normalize
from .spacemodel import DynSystem, Edge, Family, PointSchema, ScatteredSpace, SpaceError

INDEX = "j"


class ExprError(SpaceError):
    pass


@dataclass(frozen=True)
class Expr:
    text: str
    tree: ast.AST

    def __call__(self, j: int):
        return normalize(_eval(self.tree, j))


def parse_expr(text: str) -> Expr:
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval").body
    except SyntaxError as exc:
        raise ExprError(f"cannot parse {text!r}") from exc
    _check(tree, text)
    return Expr(text, tree)


def _check(node, text):
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = node.left
            if not (isinstance(base, ast.Constant) and base.value == 2):
                raise ExprError(f"only powers of 2 are allowed in {text!r}")
        elif not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
            raise ExprError(f"operator not allowed in {text!r}")
        _check(node.left, text)
        _check(node.right, text)
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        _check(node.operand, text)
    elif isinstance(node, ast.Name):
        if node.id not in (INDEX, "sqrt2"):
            raise ExprError(f"unknown name {node.id!r} in {text!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, int) or isinstance(node.value, bool):
            raise ExprError(f"only integer literals are allowed in {text!r}")
    else:
        raise ExprError(f"unsupported syntax in {text!r}")


def _eval(node, j):
    if isinstance(node, ast.Constant):
        return Fraction(node.value)
    if isinstance(node, ast.Name):
        return Fraction(j) if node.id == INDEX else SQRT2
    if isinstance(node, ast.UnaryOp):
        v = _eval(node.operand, j)
        return -v if isinstance(node.op, ast.USub) else v
    a, b = _eval(node.left, j), _eval(node.right, j)
    if isinstance(node.op, ast.Add):
        return a + b
    if isinstance(node.op, ast.Sub):
        return a - b
    if isinstance(node.op, ast.Mult):
        return a * b
    if isinstance(node.op, ast.Div):
        if b == 0:
            raise ExprError(f"division by zero at {INDEX}={j}")
        return a / b
    b = normalize(b)
    if not isinstance(b, Fraction) or b.denominator != 1:
        raise ExprError("exponent must be an integer")
    return Fraction(2) ** int(b)


def _pair(spec) -> tuple:
    if not isinstance(spec, list) or len(spec) != 2:
        raise ExprError(f"a coordinate is a pair of expressions, got {spec!r}")
    return tuple(parse_expr(str(e)) for e in spec)


@dataclass
class ExprFamily:
    name: str
    index: str
    nonneg: tuple
    neg: Optional[tuple]
    limit: str
    bound_nonneg: Expr
    bound_neg: Optional[Expr]

    def coord(self, j: int) -> tuple:
        if self.index == "N" and j < 0:
            raise SpaceError(f"index {j} is negative in the N-indexed family {self.name}")
        pair = self.neg if j < 0 and self.neg else self.nonneg
        return (pair[0](j), pair[1](j))

    def tail_bound(self, j: int) -> Fraction:
        e = self.bound_neg if j < 0 and self.bound_neg else self.bound_nonneg
        return Fraction(e(j))


class ExprSystem(DynSystem):
    """Pids are ``("b", id)`` for base points and ``("m", family, j)`` for members."""

    family = "expr"

    def __init__(self, doc: dict):
        self.doc = doc
        self.bases = {}
        self.fams = {}
        for s in doc.get("schemas", []):
            base = s.get("base")
            if base:
                if base["id"] in self.bases:
                    raise ExprError(f"duplicate base id {base['id']!r}")
                self.bases[base["id"]] = tuple(Fraction(str(c)) for c in base["coord"])
            f = s.get("family")
            if f:
                coord = f["coord"]
                nonneg, neg = (_pair(coord["nonneg"]), _pair(coord["neg"])) if isinstance(coord, dict) \
                    else (_pair(coord), None)
                index = f.get("index", "Z")
                if index not in ("Z", "N"):
                    raise ExprError(f"index must be Z or N, got {index!r}")
                tb = f["tail_bound"]
                b_nonneg, b_neg = (parse_expr(str(tb["nonneg"])), parse_expr(str(tb["neg"]))) \
                    if isinstance(tb, dict) else (parse_expr(str(tb)), None)
                fam = ExprFamily(f["name"], index, nonneg, neg, f["limit"], b_nonneg, b_neg)
                if fam.name in self.fams:
                    raise ExprError(f"duplicate family {fam.name!r}")
                self.fams[fam.name] = fam
        for fam in self.fams.values():
            if fam.limit not in self.bases:
                raise ExprError(f"family {fam.name} converges to unknown point {fam.limit!r}")
        self.step = int(doc.get("rule", {}).get("shift", 1))

    def params(self):
        return {"schemas": len(self.fams), "shift": self.step}

    def apply(self, pid, k=1):
        if pid[0] == "b":
            return pid
        fam = self.fams[pid[1]]
        j = pid[2] + k * self.step
        if fam.index == "N" and j < 0:
            raise SpaceError(f"{fam.name}[{pid[2]}] leaves the N-indexed family")
        return ("m", pid[1], j)

    def coord(self, pid):
        if pid[0] == "b":
            return self.bases[pid[1]]
        return self.fams[pid[1]].coord(pid[2])

    def class_of(self, pid):
        return pid[1]

    def _indices(self, fam, J):
        return range(0 if fam.index == "N" else -J, J + 1)

    def enumerate(self, bounds):
        J = int(bounds.get("index", 16))
        pts = [("b", b) for b in self.bases]
        for name, fam in self.fams.items():
            pts += [("m", name, j) for j in self._indices(fam, J)]
        return pts

    def prefix(self, length):
        return self.enumerate({"index": length})

    def families(self, length):
        out = []
        for name, fam in self.fams.items():
            js = list(self._indices(fam, length))
            out.append(Family((name,), ("b", fam.limit), [("m", name, j) for j in js], js,
                              [fam.tail_bound(j) for j in js]))
        return out

    @property
    def space(self):
        schemas = {b: PointSchema(b, "base point", "atom", fixed=True) for b in self.bases}
        schemas.update({n: PointSchema(n, "closed-form family", f.index) for n, f in self.fams.items()})
        return ScatteredSpace(schemas, [Edge(n, f.limit) for n, f in self.fams.items()])

    def samples(self, schema):
        if schema in self.bases:
            return [("b", schema)]
        return [("m", schema, j) for j in (0, 1, 2)]


def load_expr_system(doc: dict) -> ExprSystem:
    return ExprSystem(doc)


STANDARD_S_DOC = {
    "format": 1,
    "kind": "expr-system",
    "schemas": [{
        "base": {"id": "inf", "coord": ["0", "0"]},
        "family": {"name": "S", "index": "Z",
                   "coord": {"nonneg": ["1/(j+1)", "1/(j+1)"], "neg": ["1/(1-j)", "-1/(1-j)"]},
                   "limit": "inf", "tail_bound": {"nonneg": "1/(j+1)", "neg": "1/(1-j)"}},
    }],
    "rule": {"shift": 1},
}
