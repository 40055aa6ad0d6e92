"""One-dimensional concave dual of the separable cone program.

For a multiplier ``nu`` (``nu >= 0`` pairs with the upper bound ``hi`` of the
constraint, ``nu <= 0`` with the lower bound ``lo``) the dual function is

    rho(nu) = nu*(c - bound) + c0 + offset + sum_i h_i(nu) + g(nu)

with ``h_i = -(nu b_i + e_i)^2 / (2 (nu alpha_i + delta_i))`` and ``g`` the
indicator of ``zeta_j + nu = 0`` for every product variable.  Its derivative is
the constraint value at the Lagrangian minimizer ``x_i = -p_i/q_i``, which is
what the bracketing search below bisects on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import RecoveryInconsistent
from .problem import DEFAULT_TOL, Kind, Tolerances
from .reformulate import CanonicalProblem, PrimalPoint, SocpProblem, build_socp

NU_CAP = 1e12
MAX_ITER = 200
REL_TOL = 1e-10

# allocation priority of product variables when the constraint must be tightened
LINEAR, ATTAINED, UNATTAINED = 0, 1, 2


@dataclass
class DualSpec:
    alpha: np.ndarray
    delta: np.ndarray
    b: np.ndarray
    e: np.ndarray
    zeta: np.ndarray
    c: float
    c0: float = 0.0
    lo: float = -np.inf
    hi: float = 0.0
    offset: float = 0.0
    z_priority: np.ndarray | None = None
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        for name in ("alpha", "delta", "b", "e", "zeta"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).reshape(-1))
        if self.z_priority is None:
            self.z_priority = np.full(len(self.zeta), ATTAINED, dtype=int)

    @property
    def domain_kind(self) -> str:
        if not np.isfinite(self.lo):
            return "nonneg"
        if self.lo == self.hi:
            return "free"
        return "interval"

    @classmethod
    def from_canonical(cls, cp: CanonicalProblem, tol: Tolerances = DEFAULT_TOL) -> "DualSpec":
        prio = [
            ATTAINED if abs(e2) > tol.coef * (1 + abs(e2)) else UNATTAINED for e2 in cp.e_even
        ] + [LINEAR] * len(cp.lin_b)
        return cls(
            alpha=cp.alpha,
            delta=cp.delta,
            b=cp.b,
            e=cp.e,
            zeta=cp.zeta,
            c=cp.c,
            c0=cp.c0,
            lo=cp.lo,
            hi=cp.hi,
            offset=cp.obj_offset,
            z_priority=np.array(prio, dtype=int),
            tol=tol,
        )

    @classmethod
    def from_socp(cls, sp: SocpProblem, tol: Tolerances = DEFAULT_TOL) -> "DualSpec":
        return cls(sp.alpha, sp.delta, sp.b, sp.e, sp.zeta, sp.c, sp.c0, sp.lo, sp.hi, sp.obj_offset, tol=tol)

    # pieces of the dual function -------------------------------------------

    def _qp(self, nu):
        q = nu * self.alpha + self.delta
        p = nu * self.b + self.e
        qs = self.tol.dual * (1.0 + np.abs(nu * self.alpha) + np.abs(self.delta))
        ps = self.tol.dual * (1.0 + np.abs(nu * self.b) + np.abs(self.e))
        return q, p, qs, ps

    def _bound(self, nu):
        if nu > 0:
            return self.hi
        if nu < 0:
            return self.lo
        return 0.0

    def zeta_ok(self, nu) -> bool:
        return bool(np.all(np.abs(self.zeta + nu) <= self.tol.zeta * (1.0 + np.abs(self.zeta))))


@dataclass
class DualResult:
    nu: float
    value: float
    domain: tuple
    iterations: int = 0
    active: list = field(default_factory=list)
    status: str = "finite"  # finite | empty_domain | unequal_zeta | zeta_outside | unbounded_above

    @property
    def finite(self) -> bool:
        return self.status == "finite" and np.isfinite(self.value)


def dual_value(spec: DualSpec, nu: float) -> float:
    """rho(nu) as an extended real (-inf outside the domain)."""
    nu = float(nu)
    bound = spec._bound(nu)
    if not np.isfinite(bound):
        return -np.inf
    if len(spec.zeta) and not spec.zeta_ok(nu):
        return -np.inf
    q, p, qs, ps = spec._qp(nu)
    if np.any(q < -qs):
        return -np.inf
    zero_q = np.abs(q) <= qs
    if np.any(zero_q & (np.abs(p) > ps)):
        return -np.inf
    safe = np.where(zero_q, 1.0, q)
    h = np.where(zero_q, 0.0, -(p**2) / (2.0 * safe))
    return float(nu * (spec.c - bound) + spec.c0 + spec.offset + np.sum(h))


def _minimizer(spec: DualSpec, nu: float):
    """Lagrangian minimizer x(nu); zero-curvature coordinates take their limit."""
    q, p, qs, ps = spec._qp(nu)
    x = np.zeros(len(q))
    free = np.abs(q) <= qs
    for i in range(len(q)):
        if not free[i]:
            x[i] = -p[i] / q[i]
        elif spec.alpha[i] != 0.0:
            x[i] = -spec.b[i] / spec.alpha[i]
    return x, free


def _derivative(spec: DualSpec, nu: float, side: int) -> float:
    """One-sided derivative of rho on the given side of the kink at 0."""
    bound = spec.hi if side > 0 else spec.lo
    q, p, qs, ps = spec._qp(nu)
    total = spec.c - bound
    for i in range(len(q)):
        if abs(q[i]) <= qs[i]:
            if abs(p[i]) > ps[i]:
                return np.inf if spec.alpha[i] > 0 else -np.inf
            xi = -spec.b[i] / spec.alpha[i] if spec.alpha[i] != 0 else 0.0
        else:
            xi = -p[i] / q[i]
        total += 0.5 * spec.alpha[i] * xi * xi + spec.b[i] * xi
    return float(total)


def feasible_interval(spec: DualSpec):
    """Closed hull of {nu : nu alpha_i + delta_i >= 0 for all i} (may be empty)."""
    L, U = -np.inf, np.inf
    for a, d, b, e in zip(spec.alpha, spec.delta, spec.b, spec.e):
        scale = spec.tol.dual * (1.0 + abs(d))
        if abs(a) <= spec.tol.dual * 1e-3:
            if d < -scale:
                return 1.0, -1.0
            if abs(d) <= scale:
                if abs(b) > 0:
                    L, U = max(L, -e / b), min(U, -e / b)
                elif abs(e) > scale:
                    return 1.0, -1.0
            continue
        r = -d / a
        if a > 0:
            L = max(L, r)
        else:
            U = min(U, r)
    return L, U


def _side_max(spec: DualSpec, side: int, L: float, U: float) -> DualResult:
    if side > 0:
        L = max(L, 0.0)
        if not np.isfinite(spec.hi):
            U = min(U, 0.0)
    else:
        U = min(U, 0.0)
        if not np.isfinite(spec.lo):
            L = max(L, 0.0)
    if L > U + REL_TOL * (1 + abs(L) + abs(U)):
        return DualResult(np.nan, -np.inf, (L, U), status="empty_domain")
    U = max(U, L)

    def d(nu):
        return _derivative(spec, nu, side)

    it = 0
    if np.isfinite(L) and d(L) <= 0:
        return _finish(spec, L, (L, U), it)
    if np.isfinite(U) and d(U) >= 0:
        return _finish(spec, U, (L, U), it)
    lo, hi = L, U
    if not np.isfinite(hi):
        step = max(1.0, abs(lo))
        hi = lo + step
        while d(hi) > 0:
            lo, step = hi, step * 2
            hi = lo + step
            it += 1
            if hi > NU_CAP:
                return DualResult(hi, np.inf, (L, U), it, status="unbounded_above")
    if not np.isfinite(lo):
        step = max(1.0, abs(hi))
        lo = hi - step
        while d(lo) < 0:
            hi, step = lo, step * 2
            lo = hi - step
            it += 1
            if lo < -NU_CAP:
                return DualResult(lo, np.inf, (L, U), it, status="unbounded_above")
    for _ in range(MAX_ITER):
        it += 1
        mid = 0.5 * (lo + hi)
        dm = d(mid)
        if dm > 0:
            lo = mid
        elif dm < 0:
            hi = mid
        else:
            lo = hi = mid
        if hi - lo <= REL_TOL * (1.0 + abs(lo) + abs(hi)):
            break
    width = max(hi - lo, REL_TOL * (1.0 + abs(lo) + abs(hi)))
    mid = _newton_polish(spec, side, 0.5 * (lo + hi), max(L, lo - width), min(U, hi + width))
    best, vbest = mid, dual_value(spec, mid)
    for c in (lo, hi):
        v = dual_value(spec, c)
        if v > vbest + 1e-12 * (1.0 + abs(vbest)):
            best, vbest = c, v
    return _finish(spec, best, (L, U), it)


def _newton_polish(spec, side, nu, lo, hi, steps=8):
    """Newton on the derivative inside the bracket; bisection alone leaves
    a constraint residual of order slope * width near a pole."""
    for _ in range(steps):
        q, p, qs, _ = spec._qp(nu)
        if np.any(np.abs(q) <= qs):
            break
        x = -p / q
        slope = -np.sum((spec.alpha * x + spec.b) ** 2 / q)
        d = _derivative(spec, nu, side)
        if d == 0.0 or slope >= 0.0:
            break
        nxt = nu - d / slope
        if not lo <= nxt <= hi:
            break
        nu = nxt
    return nu


def _finish(spec, nu, domain, it):
    q, p, qs, ps = spec._qp(nu)
    active = [int(i) for i in np.flatnonzero(np.abs(q) <= qs)]
    val = dual_value(spec, nu)
    status = "finite" if np.isfinite(val) else "empty_domain"
    return DualResult(float(nu), val, domain, it, active, status)


def maximize_dual(spec: DualSpec) -> DualResult:
    """Maximize rho over the multiplier domain.

    With product variables the multiplier is forced to ``-zeta`` (all zeta
    must agree); otherwise a bracketing bisection on the one-sided derivative
    runs over the closed feasible interval, one side of the kink at zero at a
    time, ties going to the ``nu >= 0`` side.
    """
    L, U = feasible_interval(spec)
    if len(spec.zeta):
        z = spec.zeta
        if np.ptp(z) > spec.tol.zeta * (1.0 + np.max(np.abs(z))):
            return DualResult(np.nan, -np.inf, (L, U), status="unequal_zeta")
        nu = -float(np.mean(z))
        val = dual_value(spec, nu)
        if not np.isfinite(val):
            return DualResult(nu, -np.inf, (L, U), status="zeta_outside")
        return _finish(spec, nu, (L, U), 0)
    if L > U:
        return DualResult(np.nan, -np.inf, (L, U), status="empty_domain")
    sides = [1] if not np.isfinite(spec.lo) else [1, -1]
    results = [_side_max(spec, s, L, U) for s in sides]
    results = [r for r in results if r.status != "empty_domain"] or results
    best = results[0]
    for r in results[1:]:
        if r.value > best.value:
            best = r
    best.domain = (L, U)
    return best


def maximize_interval_dual(spec: DualSpec) -> DualResult:
    """Interval constraint: best of the two one-sided duals (upper side wins ties)."""
    if spec.domain_kind == "nonneg":
        raise ValueError("interval dual needs a finite lower bound")
    return maximize_dual(spec)


# --------------------------------------------------------------------------
# primal recovery


def primal_from_dual(spec: DualSpec, nu: float, socp: SocpProblem | None = None, verify=True) -> PrimalPoint:
    """Stationary point of the Lagrangian at ``nu`` made complementary.

    Coordinates with ``q_i = nu alpha_i + delta_i = 0`` and every product
    variable are free in the Lagrangian; they absorb the constraint residual in
    the order linear pairs, attained products, free coordinates, unattained
    products.  Raises RecoveryInconsistent if the point misses the dual value.
    """
    nu = float(nu)
    x, free = _minimizer(spec, nu)
    z = np.zeros(len(spec.zeta))
    if socp is None:
        socp = SocpProblem(
            Kind.INEQ if not np.isfinite(spec.lo) else (Kind.EQ if spec.lo == spec.hi else Kind.INTERVAL),
            spec.delta, spec.e, spec.zeta, spec.c0, spec.offset, spec.alpha, spec.b, spec.c, spec.lo, spec.hi,
        )
    g = float(np.sum(0.5 * spec.alpha * x**2 + spec.b * x) + spec.c)
    ns = spec.tol.dual * (1.0 + abs(nu))
    if nu > ns:
        target = spec.hi
    elif nu < -ns:
        target = spec.lo
    else:
        target = min(max(g, spec.lo), spec.hi)
    r = target - g
    feas = spec.tol.feas * (1.0 + abs(spec.c) + abs(target))
    if abs(r) > feas * 1e-3:
        r = _allocate(spec, x, free, z, r)
    if abs(r) > feas:
        raise RecoveryInconsistent(f"constraint residual {r:.3g} could not be allocated")
    pt = PrimalPoint(x=x, y=0.5 * x**2, z=z, socp=socp)
    if verify:
        val = dual_value(spec, nu)
        obj = pt.objective
        if np.isfinite(val) and abs(obj - val) > 1e-7 * (1.0 + abs(val)):
            raise RecoveryInconsistent(f"primal objective {obj:.10g} != dual value {val:.10g}")
    return pt


def _allocate(spec, x, free, z, r):
    for prio in (LINEAR, ATTAINED):
        idx = np.flatnonzero(spec.z_priority == prio)
        if idx.size:
            z[idx[0]] += r
            return 0.0
    want = 1.0 if r > 0 else -1.0
    for i in np.flatnonzero(free):
        a, b = spec.alpha[i], spec.b[i]
        if a * want > 0:
            # 0.5 a t^2 + b t moves from its extreme value by exactly r
            x[i] = -b / a + np.sqrt(2.0 * r / a)
            return 0.0
    idx = np.flatnonzero(spec.z_priority == UNATTAINED)
    if idx.size:
        z[idx[0]] += r
        return 0.0
    return r
