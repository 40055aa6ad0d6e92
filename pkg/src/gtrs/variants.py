"""Solver entry points for the inequality, equality and interval forms."""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .canonical import EarlyDiagnostic, canonicalize
from .classify import (
    CASE1,
    CASE2,
    DEFERRED,
    BoundednessReport,
    Reason,
    attainability,
    screen_structure,
    unbounded_witness,
)
from .dual import DualResult, DualSpec, maximize_dual, primal_from_dual
from .errors import LiftingFailed, RecoveryInconsistent
from .problem import DEFAULT_TOL, GtrsProblem, Kind, Tolerances, ineq
from .reformulate import (
    Infeasible,
    ReducedUnconstrained,
    affine_reduction,
    build_socp,
    canonical_problem,
    preprocess,
    recover_x,
)

log = logging.getLogger("gtrs")


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    UNATTAINED = "finite_unattained"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"
    REDUCED = "reduced_unconstrained"


@dataclass
class VariantAssumptionReport:
    feasible: bool = True
    two_side_slater: bool = True
    a_is_zero: bool = False
    degenerate_equality: bool = False
    action: str = "none"
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "feasible": self.feasible,
            "two_side_slater": self.two_side_slater,
            "a_is_zero": self.a_is_zero,
            "degenerate_equality": self.degenerate_equality,
            "action": self.action,
            "notes": list(self.notes),
        }


@dataclass
class Solution:
    status: Status
    value: float
    x: np.ndarray | None = None
    eps: float | None = None
    nu: float | None = None
    reasons: list = field(default_factory=list)
    classification: BoundednessReport | None = None
    canonical: dict | None = None
    assumptions: VariantAssumptionReport | None = None
    dual: DualResult | None = None
    warnings: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    elapsed: float = 0.0
    _eps_solver: object = field(default=None, repr=False)

    @property
    def finite(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.UNATTAINED, Status.REDUCED) and np.isfinite(self.value)

    def epsilon_solution(self, eps: float) -> np.ndarray:
        """Feasible point within ``eps`` of the infimum."""
        if self._eps_solver is None:
            if self.x is None:
                raise ValueError(f"no solution point for status {self.status.value}")
            return self.x
        return self._eps_solver(eps)

    def to_dict(self) -> dict:
        def num(v):
            if v is None:
                return None
            v = float(v)
            if np.isnan(v):
                return None
            if np.isinf(v):
                return "-inf" if v < 0 else "inf"
            return v

        cert = {
            "nu": num(self.nu),
            "canonical": self.canonical,
            "classification": self.classification.to_dict() if self.classification else None,
            "reasons": [r.to_dict() for r in self.reasons],
            "assumptions": self.assumptions.to_dict() if self.assumptions else None,
            "warnings": list(self.warnings),
        }
        if self.dual is not None:
            cert["dual"] = {
                "nu": num(self.dual.nu),
                "value": num(self.dual.value),
                "domain": [num(self.dual.domain[0]), num(self.dual.domain[1])],
                "iterations": self.dual.iterations,
                "active": list(self.dual.active),
                "status": self.dual.status,
            }
        return {
            "status": self.status.value,
            "value": num(self.value),
            "x": None if self.x is None else [float(v) for v in self.x],
            "eps": self.eps,
            "certificate": cert,
            "notes": list(self.notes),
        }


# --------------------------------------------------------------------------
# shared pipeline


def _unbounded(P, reasons, cf=None, cp=None, **kw) -> Solution:
    rule = reasons[0].rule if reasons else None
    x = unbounded_witness(P, cf, cp, rule)
    sol = Solution(Status.UNBOUNDED, -np.inf, x, reasons=reasons, **kw)
    if x is None:
        sol.warnings.append("no explicit unbounded ray found")
    else:
        sol.notes.append(f"witness objective {P.f(x):.6g}")
    return sol


def _pipeline(P: GtrsProblem, tol: Tolerances, eps: float, report: VariantAssumptionReport) -> Solution:
    cf = canonicalize(P.A, P.D, tol)
    screen = screen_structure(cf, None, P.kind)
    if isinstance(cf, EarlyDiagnostic):
        return _unbounded(P, screen.reasons, classification=screen, canonical=cf.summary(), assumptions=report)
    cp = canonical_problem(P, cf, tol)
    screen = screen_structure(cf, cp, P.kind, tol.coef)
    common = dict(classification=screen, canonical=cf.summary(), assumptions=report, warnings=list(cf.warnings))
    if screen.unbounded:
        return _unbounded(P, screen.reasons, cf, cp, **common)
    spec = DualSpec.from_canonical(cp, tol)
    dr = maximize_dual(spec)
    if dr.status == "unbounded_above":
        return Solution(Status.INFEASIBLE, np.inf, dual=dr, notes=["dual unbounded above"], **common)
    if not dr.finite:
        rule = {"unequal_zeta": "UnequalZetas", "zeta_outside": "MultiplierOutsideDomain"}.get(
            dr.status, "EmptyDualDomain"
        )
        screen.verdict = "Unbounded"
        screen.reasons.append(Reason(rule, None, f"dual status {dr.status}"))
        return _unbounded(P, screen.reasons, cf, cp, dual=dr, **common)
    sp = build_socp(cp, tol)
    pt = primal_from_dual(spec, dr.nu, sp)
    k = cp.k
    att = attainability(pt.z[:k], cp.kappa, cp.e_even, P.kind, tol.coef)
    screen.tags = [
        (CASE2 if att == "Unattained" and t == DEFERRED else CASE1 if t == DEFERRED else t)
        for t in screen.tags
    ]

    def eps_solver(e):
        return recover_x(pt, cp, e).x

    rec = recover_x(pt, cp, eps)
    status = Status.OPTIMAL if rec.attained else Status.UNATTAINED
    sol = Solution(
        status,
        dr.value,
        rec.x,
        eps=None if rec.attained else eps,
        nu=dr.nu,
        dual=dr,
        notes=rec.notes,
        _eps_solver=eps_solver,
        **common,
    )
    _validate(P, sol, tol)
    return sol


def _validate(P: GtrsProblem, sol: Solution, tol: Tolerances):
    x = sol.x
    if x is None:
        return
    if not P.is_feasible(x, 1e-7):
        sol.warnings.append(f"recovered point violates the constraint by {P.violation(x):.3g}")
    fx = P.f(x)
    slack = 1e-7 * (1.0 + abs(sol.value))
    if sol.status is Status.UNATTAINED:
        if not (fx - sol.value <= sol.eps + slack):
            sol.warnings.append(f"eps-solution gap {fx - sol.value:.3g} exceeds eps")
    elif abs(fx - sol.value) > 1e-6 * (1.0 + abs(sol.value)):
        sol.warnings.append(f"objective at x ({fx:.10g}) differs from value ({sol.value:.10g})")


def _reduced(P: GtrsProblem, red: ReducedUnconstrained, report, tol) -> Solution:
    res = red.solve(tol.coef)
    if np.isfinite(res.value):
        return Solution(Status.REDUCED, res.value, res.x, assumptions=report)
    sol = Solution(Status.UNBOUNDED, -np.inf, None, assumptions=report,
                   reasons=[Reason("ReducedUnbounded", None, "objective unbounded on the feasible subspace")])
    x0 = red.x0
    for t in 10.0 ** np.arange(1, 14):
        x = x0 + t * res.ray
        if P.is_feasible(x) and P.f(x) < -1e6:
            sol.x = x
            break
    return sol


# --------------------------------------------------------------------------
# entry points


def solve(P: GtrsProblem, tol: Tolerances = DEFAULT_TOL, eps: float = 1e-6, **kw) -> Solution:
    """Solve any constraint kind."""
    t0 = time.perf_counter()
    if P.kind is Kind.EQ:
        sol = solve_eq(P, tol, eps, **kw)
    elif P.kind is Kind.INTERVAL:
        sol = solve_interval(P, tol, eps, **kw)
    else:
        sol = solve_ineq(P, tol, eps)
    sol.elapsed = time.perf_counter() - t0
    return sol


def solve_ineq(P: GtrsProblem, tol: Tolerances = DEFAULT_TOL, eps: float = 1e-6) -> Solution:
    report = VariantAssumptionReport()
    pre = preprocess(P, tol)
    if isinstance(pre, Infeasible):
        report.feasible = False
        report.notes.append(f"h is bounded below by {pre.gap:.6g} > 0")
        return Solution(Status.INFEASIBLE, np.inf, assumptions=report)
    if isinstance(pre, ReducedUnconstrained):
        report.two_side_slater = False
        report.action = "affine_reduction"
        report.notes.append("no strictly feasible point: feasible set is an affine subspace")
        return _reduced(P, pre, report, tol)
    return _run(P, tol, eps, report)


def _run(P, tol, eps, report):
    try:
        return _pipeline(P, tol, eps, report)
    except (RecoveryInconsistent, LiftingFailed) as exc:
        log.warning("recovery failed: %s", exc)
        raise


def _h_range(A, b, c, tol):
    """(inf h, sup h) for h = x'Ax/2 + b'x + c."""
    lo, hi = -np.inf, np.inf
    if linalg.is_psd(A, tol.coef) and linalg.in_range(A, b, tol.coef):
        lo = c - 0.5 * b @ linalg.pseudoinverse(A, tol.eig) @ b
    if linalg.is_psd(-A, tol.coef) and linalg.in_range(A, b, tol.coef):
        hi = c - 0.5 * b @ linalg.pseudoinverse(A, tol.eig) @ b
    return lo, hi


def _level_set_reduction(P: GtrsProblem, tol) -> ReducedUnconstrained:
    """Feasible set {h = extreme value of h}: an affine subspace."""
    A, b = P.A, P.b
    xc = -linalg.pseudoinverse(A, tol.eig) @ b
    V = linalg.null_space_basis(A, tol.eig)
    return affine_reduction(P, xc, V)


def solve_eq(P: GtrsProblem, tol: Tolerances = DEFAULT_TOL, eps: float = 1e-6, zero_a: str = "substitute") -> Solution:
    """Equality form.  ``A = 0`` is reduced by substituting the linear
    equation (``zero_a="square"`` squares it instead, for cross-checks)."""
    if P.kind is not Kind.EQ:
        P = P.with_kind(Kind.EQ)
    report = VariantAssumptionReport()
    A, b, c = P.A, P.b, P.c
    n = P.n
    scale = 1.0 + abs(c)
    if np.linalg.norm(A) <= tol.eig * (1.0 + np.linalg.norm(P.D)):
        report.a_is_zero = True
        if np.linalg.norm(b) <= tol.eig:
            report.feasible = abs(c) <= tol.coef * scale
            if not report.feasible:
                return Solution(Status.INFEASIBLE, np.inf, assumptions=report)
            report.action = "none"
            return _reduced(P, affine_reduction(P, np.zeros(n), np.eye(n)), report, tol)
        if zero_a == "square":
            report.action = "squaring"
            Q = GtrsProblem(P.D, 2.0 * np.outer(b, b), P.e, 2.0 * c * b, c * c, Kind.EQ)
            sol = solve_eq(Q, tol, eps)
            sol.assumptions = report
            return sol
        report.action = "null_space_reduction"
        x0 = -c * b / (b @ b)
        V = linalg.null_space_basis(b.reshape(1, -1), tol.eig)
        return _reduced(P, affine_reduction(P, x0, V), report, tol)
    hmin, hmax = _h_range(A, b, c, tol)
    if hmin > tol.coef * scale or hmax < -tol.coef * scale:
        report.feasible = False
        return Solution(Status.INFEASIBLE, np.inf, assumptions=report)
    if abs(hmin) <= tol.coef * scale or abs(hmax) <= tol.coef * scale:
        report.two_side_slater = False
        report.degenerate_equality = True
        report.action = "affine_reduction"
        return _reduced(P, _level_set_reduction(P, tol), report, tol)
    return _run(P, tol, eps, report)


def solve_interval(P: GtrsProblem, tol: Tolerances = DEFAULT_TOL, eps: float = 1e-6, cross_check: bool = False) -> Solution:
    """Interval form ``c1 <= x'Ax/2 + b'x <= c2``."""
    c1, c2 = P.c1, P.c2
    report = VariantAssumptionReport()
    if c1 == c2:
        sol = solve_eq(GtrsProblem(P.D, P.A, P.e, P.b, -c1, Kind.EQ), tol, eps)
        sol.notes.append("interval collapsed to an equality")
        return sol
    A, b = P.A, P.b
    if np.linalg.norm(A) <= tol.eig * (1.0 + np.linalg.norm(P.D)):
        report.a_is_zero = True
        report.action = "interval_to_ineq"
        if np.linalg.norm(b) <= tol.eig:
            if c1 <= 0 <= c2:
                return _reduced(P, affine_reduction(P, np.zeros(P.n), np.eye(P.n)), report, tol)
            report.feasible = False
            return Solution(Status.INFEASIBLE, np.inf, assumptions=report)
        # c1 <= b'x <= c2  <=>  (b'x - c1)(b'x - c2) <= 0
        Q = ineq(P.D, 2.0 * np.outer(b, b), P.e, -(c1 + c2) * b, c1 * c2)
        sol = solve_ineq(Q, tol, eps)
        sol.assumptions = report
        return sol
    hmin, hmax = _h_range(A, b, 0.0, tol)
    scale = 1.0 + abs(c1) + abs(c2)
    if hmin > c2 + tol.coef * scale or hmax < c1 - tol.coef * scale:
        report.feasible = False
        return Solution(Status.INFEASIBLE, np.inf, assumptions=report)
    for level, edge in ((c2, hmin), (c1, hmax)):
        if abs(edge - level) <= tol.coef * scale:
            report.two_side_slater = False
            report.degenerate_equality = True
            report.notes.append(f"constraint only attainable at h = {level:.6g}")
            sol = solve_eq(GtrsProblem(P.D, A, P.e, b, -level, Kind.EQ), tol, eps)
            sol.assumptions = report
            return sol
    interior = _interior_candidate(P, tol)
    if interior is not None:
        x = interior
        report.notes.append("unconstrained minimizer strictly inside the interval")
        return Solution(Status.OPTIMAL, P.f(x), x, nu=0.0, assumptions=report)
    sol = _run(P, tol, eps, report)
    if cross_check and sol.finite:
        v1 = solve_eq(GtrsProblem(P.D, A, P.e, b, -c1, Kind.EQ), tol, eps).value
        v2 = solve_eq(GtrsProblem(P.D, A, P.e, b, -c2, Kind.EQ), tol, eps).value
        sol.notes.append(f"boundary cross-check: min(EP(c1), EP(c2)) = {min(v1, v2):.10g}")
    return sol


def _interior_candidate(P: GtrsProblem, tol):
    D, e = P.D, P.e
    if not linalg.is_psd(D, tol.coef) or not linalg.in_range(D, e, tol.coef):
        return None
    x = -linalg.pseudoinverse(D, tol.eig) @ e
    h = P.h(x)
    if P.c1 < h < P.c2:
        return x
    return None
