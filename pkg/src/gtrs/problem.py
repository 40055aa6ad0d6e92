"""Problem data model: one quadratic objective, one quadratic constraint."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatch, EmptyInterval
from .linalg import symmetrize


class Kind(str, enum.Enum):
    INEQ = "ineq"
    EQ = "eq"
    INTERVAL = "interval"


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by the pipeline.

    ``cluster`` is relative to the equilibrated pencil (unit Frobenius norms);
    ``dual`` governs the "is this denominator zero" decisions in the dual.
    """

    sym: float = 1e-10
    eig: float = 1e-10
    cluster: float = 1e-5
    rank: float = 1e-7
    canon: float = 1e-8
    coef: float = 1e-9
    zeta: float = 1e-6
    dual: float = 1e-8
    feas: float = 1e-8
    cond_warn: float = 1e10


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class GtrsProblem:
    """min 0.5 x'Dx + e'x  subject to  h(x) = 0.5 x'Ax + b'x + c  {<= 0 | = 0},
    or, for the interval kind, c1 <= 0.5 x'Ax + b'x <= c2.
    """

    D: np.ndarray
    A: np.ndarray
    e: np.ndarray
    b: np.ndarray
    c: float = 0.0
    kind: Kind = Kind.INEQ
    c1: float | None = None
    c2: float | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        e = np.asarray(self.e, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        n = D.shape[0]
        if D.shape != (n, n) or A.shape != (n, n) or e.shape != (n,) or b.shape != (n,):
            raise DimensionMismatch(
                f"inconsistent shapes D{D.shape} A{A.shape} e{e.shape} b{b.shape}"
            )
        kind = Kind(self.kind)
        object.__setattr__(self, "D", symmetrize(D))
        object.__setattr__(self, "A", symmetrize(A))
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "c", float(self.c))
        if kind is Kind.INTERVAL:
            if self.c1 is None or self.c2 is None:
                raise DimensionMismatch("interval problems need c1 and c2")
            if self.c1 > self.c2:
                raise EmptyInterval(f"c1={self.c1} > c2={self.c2}")
            object.__setattr__(self, "c1", float(self.c1))
            object.__setattr__(self, "c2", float(self.c2))

    @property
    def n(self) -> int:
        return self.D.shape[0]

    def f(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.D @ x + self.e @ x)

    def h(self, x) -> float:
        """Constraint function including the constant ``c``."""
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.A @ x + self.b @ x + self.c)

    def bounds(self) -> tuple[float, float]:
        """Admissible range of ``h`` as a closed interval."""
        if self.kind is Kind.INEQ:
            return -np.inf, 0.0
        if self.kind is Kind.EQ:
            return 0.0, 0.0
        return self.c1, self.c2

    def violation(self, x) -> float:
        lo, hi = self.bounds()
        v = self.h(x)
        return max(0.0, v - hi, lo - v)

    def is_feasible(self, x, tol=1e-7) -> bool:
        lo, hi = self.bounds()
        scale = 1.0 + abs(self.c) + (abs(lo) if np.isfinite(lo) else 0.0) + abs(hi)
        return self.violation(x) <= tol * scale

    def with_kind(self, kind, c=None, c1=None, c2=None) -> "GtrsProblem":
        return replace(
            self,
            kind=Kind(kind),
            c=self.c if c is None else c,
            c1=c1,
            c2=c2,
        )

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "kind": self.kind.value,
            "D": self.D.reshape(-1).tolist(),
            "A": self.A.reshape(-1).tolist(),
            "e": self.e.tolist(),
            "b": self.b.tolist(),
        }
        if self.kind is Kind.INTERVAL:
            out["c1"], out["c2"] = self.c1, self.c2
        else:
            out["c"] = self.c
        return out


def ineq(D, A, e, b, c, name="") -> GtrsProblem:
    return GtrsProblem(D, A, e, b, c, Kind.INEQ, name=name)


def eq(D, A, e, b, c, name="") -> GtrsProblem:
    return GtrsProblem(D, A, e, b, c, Kind.EQ, name=name)


def interval(D, A, e, b, c1, c2, name="") -> GtrsProblem:
    return GtrsProblem(D, A, e, b, 0.0, Kind.INTERVAL, c1=c1, c2=c2, name=name)


def worked_example() -> GtrsProblem:
    """The 4-variable instance with a 2x2 block used as a reference case."""
    A = np.array(
        [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 2, 0], [0, 0, 0, 1.5]], dtype=float
    )
    D = np.array(
        [[0, -1, 0, 0], [-1, 1, 0, 0], [0, 0, -2, 0], [0, 0, 0, 2]], dtype=float
    )
    e = np.array([0, 2, 0, -1], dtype=float)
    return ineq(D, A, e, np.zeros(4), -1.25, name="worked-example")
