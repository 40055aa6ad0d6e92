"""Decide "constraint holds => f(x) + v >= 0" and ship a checkable certificate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import NotApplicable
from .problem import DEFAULT_TOL, GtrsProblem, Kind, Tolerances
from .variants import Solution, Status, solve

HOLD_TOL = 1e-8


@dataclass
class SLemmaQuery:
    D: np.ndarray
    e: np.ndarray
    v: float
    A: np.ndarray
    b: np.ndarray
    c: float = 0.0
    kind: Kind = Kind.INEQ
    c1: float | None = None
    c2: float | None = None

    def __post_init__(self):
        self.kind = Kind(self.kind)
        # GtrsProblem validates shapes and symmetry
        self.problem()

    def problem(self) -> GtrsProblem:
        if self.kind is Kind.INTERVAL:
            return GtrsProblem(self.D, self.A, self.e, self.b, 0.0, Kind.INTERVAL, self.c1, self.c2)
        return GtrsProblem(self.D, self.A, self.e, self.b, self.c, self.kind)

    def level(self, mu: float) -> float:
        """Constant subtracted from h when forming f + v + mu (h - level)."""
        if self.kind is Kind.INTERVAL:
            return self.c2 if mu >= 0 else self.c1
        return 0.0


@dataclass
class SLemmaVerdict:
    holds: bool
    value: float
    mu: float | None = None
    witness: np.ndarray | None = None
    residual: float | None = None
    solution: Solution | None = field(default=None, repr=False)

    def to_dict(self):
        def num(x):
            if x is None:
                return None
            return float(x) if np.isfinite(x) else ("-inf" if x < 0 else "inf")

        return {
            "holds": self.holds,
            "value": num(self.value),
            "mu": num(self.mu),
            "witness": None if self.witness is None else [float(t) for t in self.witness],
            "residual": num(self.residual),
        }


def multiplier_value(q: SLemmaQuery, mu: float) -> float:
    """min over x of f + v + mu (h - level); -inf when unbounded below."""
    P = q.problem()
    H = q.D + mu * q.A
    g = q.e + mu * q.b
    const = q.v + mu * (P.c - q.level(mu))
    w, V = np.linalg.eigh(H)
    tol = 1e-9 * max(1.0, np.max(np.abs(w)))
    if w[0] < -tol:
        return -np.inf
    gt = V.T @ g
    small = np.abs(w) <= tol
    if np.any(np.abs(gt[small]) > 1e-7 * (1.0 + np.linalg.norm(g))):
        return -np.inf
    return float(const - 0.5 * np.sum(gt[~small] ** 2 / w[~small]))


def verify(q: SLemmaQuery, verdict: SLemmaVerdict, tol=1e-7) -> bool:
    """Re-check a verdict by direct evaluation."""
    P = q.problem()
    if verdict.holds:
        if verdict.mu is None:
            return False
        if q.kind is Kind.INEQ and verdict.mu < -tol:
            return False
        return multiplier_value(q, verdict.mu) >= -tol
    x = verdict.witness
    return x is not None and P.is_feasible(x, 1e-8) and P.f(x) + q.v <= -1e-8


def _check_assumption(q: SLemmaQuery, sol: Solution):
    rep = sol.assumptions
    if q.kind is not Kind.INEQ and np.linalg.norm(q.A) == 0 and np.linalg.norm(q.b) == 0:
        raise NotApplicable("two-side Slater", "constraint function is constant")
    if rep is None:
        return
    if not rep.feasible:
        name = "Slater" if q.kind is Kind.INEQ else "two-side Slater"
        raise NotApplicable(name, "constraint set is empty")
    if not rep.two_side_slater:
        name = "Slater" if q.kind is Kind.INEQ else "two-side Slater"
        raise NotApplicable(name, "no strictly feasible point on both sides" if q.kind is not Kind.INEQ
                            else "no strictly feasible point")


def _stationary_mu(q: SLemmaQuery, x) -> float:
    gh = q.A @ x + q.b
    gf = q.D @ x + q.e
    nn = gh @ gh
    return 0.0 if nn == 0 else float(-(gh @ gf) / nn)


def s_lemma(q: SLemmaQuery, tol: Tolerances = DEFAULT_TOL, eps: float = 1e-6) -> SLemmaVerdict:
    """Holds iff the constrained infimum of f + v is >= -1e-8."""
    P = q.problem()
    sol = solve(P, tol, eps)
    _check_assumption(q, sol)
    if sol.status is Status.INFEASIBLE:
        raise NotApplicable("Slater", "constraint set is empty")
    value = sol.value + q.v
    if value >= -HOLD_TOL:
        mu = sol.nu
        if mu is None:
            mu = _stationary_mu(q, sol.x) if sol.x is not None else 0.0
        return SLemmaVerdict(True, value, mu=mu, residual=multiplier_value(q, mu), solution=sol)
    x = sol.x
    if sol.status is Status.UNATTAINED:
        x = sol.epsilon_solution(min(eps, 0.5 * abs(value)))
    return SLemmaVerdict(False, value, witness=x, residual=None if x is None else P.f(x) + q.v, solution=sol)
