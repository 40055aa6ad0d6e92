"""Line-oriented text serialization of the separable cone program.

Every real is written with 17 significant digits, so reading a file back
gives bit-identical coefficients.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError
from .problem import Kind
from .reformulate import SocpProblem

MAGIC = "GTRS-SOCP 1"


def _num(v: float) -> str:
    v = float(v)
    if np.isnan(v):
        raise ValueError("cannot serialize NaN")
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def _row(tag, name, values):
    return " ".join([tag, name] + [_num(v) for v in values])


def dumps(sp: SocpProblem) -> str:
    lines = [
        MAGIC,
        f"KIND {sp.kind.value}",
        f"DIMS {sp.l} {sp.m}",
        f"OBJ_CONST {_num(sp.c0)} {_num(sp.obj_offset)}",
        _row("OBJ", "y", sp.delta),
        _row("OBJ", "x", sp.e),
        _row("OBJ", "z", sp.zeta),
        f"CON_CONST {_num(sp.c)}",
        _row("CON", "y", sp.alpha),
        _row("CON", "x", sp.b),
        _row("CON", "z", np.ones(sp.m)),
        f"BOUNDS {_num(sp.lo)} {_num(sp.hi)}",
    ]
    lines += [f"CONE {i}" for i in range(sp.l)]
    return "\n".join(lines) + "\n"


def loads(text: str) -> SocpProblem:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows or " ".join(rows[0]) != MAGIC:
        raise ParseError("missing GTRS-SOCP header")
    fields: dict = {}
    cones = []
    try:
        for r in rows[1:]:
            tag = r[0]
            if tag == "KIND":
                fields["kind"] = Kind(r[1])
            elif tag == "DIMS":
                fields["l"], fields["m"] = int(r[1]), int(r[2])
            elif tag == "OBJ_CONST":
                fields["c0"], fields["obj_offset"] = float(r[1]), float(r[2])
            elif tag in ("OBJ", "CON"):
                fields[(tag, r[1])] = np.array([float(t) for t in r[2:]])
            elif tag == "CON_CONST":
                fields["c"] = float(r[1])
            elif tag == "BOUNDS":
                fields["lo"], fields["hi"] = float(r[1]), float(r[2])
            elif tag == "CONE":
                cones.append(int(r[1]))
            else:
                raise ParseError(f"unknown row tag {tag!r}")
        l, m = fields["l"], fields["m"]
        sp = SocpProblem(
            kind=fields["kind"],
            delta=fields[("OBJ", "y")],
            e=fields[("OBJ", "x")],
            zeta=fields[("OBJ", "z")],
            c0=fields["c0"],
            obj_offset=fields["obj_offset"],
            alpha=fields[("CON", "y")],
            b=fields[("CON", "x")],
            c=fields["c"],
            lo=fields["lo"],
            hi=fields["hi"],
        )
    except (KeyError, IndexError, ValueError) as exc:
        raise ParseError(f"malformed conic file: {exc}") from exc
    if len(sp.delta) != l or len(sp.e) != l or len(sp.alpha) != l or len(sp.b) != l:
        raise ParseError("vector lengths disagree with DIMS")
    if len(sp.zeta) != m or not np.all(fields.get(("CON", "z"), np.ones(m)) == 1.0):
        raise ParseError("z rows disagree with DIMS")
    if sorted(cones) != list(range(l)):
        raise ParseError("CONE rows must list every y index once")
    return sp
