"""Boundedness screening, 2x2 case tags, attainability and unbounded rays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .canonical import CanonicalForm, EarlyDiagnostic
from .problem import GtrsProblem, Kind
from .reformulate import CanonicalProblem

CASE1, CASE2, CASE3, DEFERRED = "Case1", "Case2", "Case3", "Deferred"


def sign(x: float) -> int:
    return 1 if x >= 0 else -1


@dataclass
class Reason:
    rule: str
    block: int | None = None
    detail: str = ""

    def to_dict(self):
        return {"rule": self.rule, "block": self.block, "detail": self.detail}


@dataclass
class BoundednessReport:
    verdict: str  # "Unbounded" | "PossiblyBounded"
    reasons: list = field(default_factory=list)
    tags: list = field(default_factory=list)

    @property
    def unbounded(self) -> bool:
        return self.verdict == "Unbounded"

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "reasons": [r.to_dict() for r in self.reasons],
            "tags": list(self.tags),
        }


def analyze_2x2(tau, lam, e_odd, e_even, kind, tol=1e-9, escale=1.0) -> str:
    """Case tag of one shifted 2x2 block.

    Inequality: Case3 if tau = -1, lam > 0 or e_odd != 0; Case1 if
    e_even != 0; otherwise Deferred (attainability then depends on the sign of
    the optimal product).  Equality and interval constraints drop the ``lam``
    test since the multiplier is free in sign.
    """
    kind = Kind(kind)
    zero = tol * (1.0 + escale)
    if tau != 1 or abs(e_odd) > zero:
        return CASE3
    if kind is Kind.INEQ and lam > zero:
        return CASE3
    if abs(e_even) > zero:
        return CASE1
    return DEFERRED


def screen_structure(cf, cp: CanonicalProblem | None = None, kind=Kind.INEQ, tol=1e-9) -> BoundednessReport:
    """Rule out the always-unbounded structures and tag every 2x2 block."""
    if isinstance(cf, EarlyDiagnostic):
        reasons = [Reason(d.kind, None, d.describe()) for d in cf.diagnostics]
        return BoundednessReport("Unbounded", reasons, [])
    reasons, tags = [], []
    if cp is not None:
        kind = cp.kind
        escale = float(np.linalg.norm(np.concatenate([cp.e, cp.e_odd, cp.e_even])))
        for j in range(cp.k):
            tag = analyze_2x2(cp.tau[j], cp.kappa[j], cp.e_odd[j], cp.e_even[j], kind, tol, escale)
            tags.append(tag)
            if tag == CASE3:
                if abs(cp.e_odd[j]) > tol * (1.0 + escale) and cp.tau[j] == 1:
                    reasons.append(Reason("OddLinearTermNonzero", j, f"e_odd = {cp.e_odd[j]:.6g}"))
                else:
                    reasons.append(
                        Reason("TwoByTwoCase3", j, f"tau = {cp.tau[j]}, kappa = {cp.kappa[j]:.6g}")
                    )
        for col, ej in cp.zero_linear_objective:
            reasons.append(Reason("ZeroPairLinearTerm", None, f"objective term {ej:.6g} on a common null direction"))
        z = cp.zeta
        if len(z) > 1 and np.ptp(z) > 1e-6 * (1.0 + np.max(np.abs(z))):
            reasons.append(Reason("UnequalZetas", None, "zeta = " + ", ".join(f"{v:.6g}" for v in z)))
    elif isinstance(cf, CanonicalForm):
        tags = [DEFERRED] * len(cf.two_by_two)
    verdict = "Unbounded" if reasons else "PossiblyBounded"
    return BoundednessReport(verdict, reasons, tags)


def attainability(zbar, zeta, e_even, kind, tol=1e-9) -> str:
    """Attained unless a 2x2 block with ``e_even = 0`` needs a nonzero product
    it cannot realize (inequality: ``zeta = 0, z < 0`` or ``zeta < 0, z != 0``;
    equality/interval: ``z != 0``)."""
    kind = Kind(kind)
    for z, ze, e2 in zip(np.atleast_1d(zbar), np.atleast_1d(zeta), np.atleast_1d(e_even)):
        if abs(e2) > tol:
            continue
        if kind is Kind.INEQ:
            if abs(ze) <= tol and z < -tol:
                return "Unattained"
            if ze < -tol and abs(z) > tol:
                return "Unattained"
        elif abs(z) > tol:
            return "Unattained"
    return "Attained"


# --------------------------------------------------------------------------
# feasible points


def _level_point(A, b, c, sense, level, n, rng):
    """A point with sense*(h - level) <= 0, or None if there is none."""
    As, bs, cs = sense * A, sense * b, sense * (c - level)
    w, Q = np.linalg.eigh(linalg.symmetrize(As))
    scale = max(1.0, float(np.max(np.abs(w)))) if n else 1.0
    if n and w[0] < -1e-12 * scale:
        d = Q[:, 0]
        if bs @ d > 0:
            d = -d
        t = 1.0
        for _ in range(200):
            x = t * d
            if 0.5 * x @ As @ x + bs @ x + cs <= 0:
                return x
            t *= 2.0
        return None
    if linalg.in_range(As, bs):
        x = -linalg.pseudoinverse(As) @ bs
        return x if 0.5 * x @ As @ x + bs @ x + cs <= 1e-12 * (1 + abs(cs)) else None
    Ap = linalg.pseudoinverse(As)
    d = -(bs - As @ (Ap @ bs))
    t = 1.0
    for _ in range(200):
        x = t * d
        if 0.5 * x @ As @ x + bs @ x + cs <= 0:
            return x
        t *= 2.0
    return None


def _bisect_level(P, xa, xb, level, iters=200):
    """Point on [xa, xb] with h = level, given h(xa) <= level <= h(xb)."""
    ha, hb = P.h(xa) - level, P.h(xb) - level
    if abs(ha) <= abs(hb) and ha == 0:
        return xa
    for _ in range(iters):
        xm = 0.5 * (xa + xb)
        hm = P.h(xm) - level
        if hm <= 0:
            xa = xm
        else:
            xb = xm
    return xa if abs(P.h(xa) - level) <= abs(P.h(xb) - level) else xb


def find_feasible_point(P: GtrsProblem, seed=0):
    """A feasible point (strictly feasible when one exists), or None."""
    rng = np.random.default_rng(seed)
    A, b = P.A, P.b
    n = P.n
    if P.kind is Kind.INEQ:
        x = _level_point(A, b, P.c, 1.0, -1.0, n, rng)
        if x is None:
            x = _level_point(A, b, P.c, 1.0, 0.0, n, rng)
        return x
    if P.kind is Kind.EQ:
        lo = hi = 0.0
        c = P.c
    else:
        lo, hi = P.c1, P.c2
        c = 0.0
    mid = 0.5 * (lo + hi)
    xl = _level_point(A, b, c, 1.0, mid, n, rng)
    xh = _level_point(A, b, c, -1.0, mid, n, rng)
    if xl is None or xh is None:
        return None
    return _bisect_level(P, xl, xh, mid)


# --------------------------------------------------------------------------
# unbounded rays


def _project(P: GtrsProblem, x, level, sweeps=6):
    """Move x along grad h so that h hits ``level`` (smallest step, repeated
    because a far-out point loses digits in a single step)."""
    for _ in range(sweeps):
        g = P.A @ x + P.b
        a0 = P.h(x) - level
        if a0 == 0.0 or not np.any(g):
            return x
        a2 = 0.5 * g @ P.A @ g
        a1 = g @ g
        disc = a1 * a1 - 4 * a2 * a0
        if disc < 0:
            return None
        q = -0.5 * (a1 + np.sqrt(disc))
        roots = [q / a2] if a2 != 0 else []
        roots.append(a0 / q)
        x = x + min(roots, key=abs) * g
    return x


def _make_feasible(P: GtrsProblem, x):
    lo, hi = P.bounds()
    v = P.h(x)
    if lo <= v <= hi:
        return x
    return _project(P, x, hi if v > hi else lo)


def _ray_search(P, point_of, target, feasible_tol=1e-7):
    for k in range(3, 40):
        x = point_of(10.0 ** (k / 2))
        if x is None:
            continue
        x = _make_feasible(P, x)
        if x is None or not np.all(np.isfinite(x)):
            continue
        if P.is_feasible(x, feasible_tol) and P.f(x) < target:
            return x
    return None


def negative_direction(A, D, eq=True, seed=0):
    """Unit d with d'Dd < 0 and d'Ad = 0 (or <= 0 when ``eq`` is false)."""
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    starts = []
    for mu in [0.0, 0.5, -0.5, 1.0, -1.0, 3.0, -3.0, 10.0, -10.0]:
        w, Q = np.linalg.eigh(D + mu * A)
        starts.append(Q[:, 0])
    starts += list(rng.normal(size=(8, n)))

    def ok(d):
        d = d / np.linalg.norm(d)
        qa, qd = d @ A @ d, d @ D @ d
        na = 1.0 + np.linalg.norm(A)
        good = qa <= 1e-10 * na if not eq else abs(qa) <= 1e-10 * na
        return good and qd < -1e-8 * (1.0 + np.linalg.norm(D)), d

    for s in starts:
        good, d = ok(s)
        if good:
            return d
    cons = [{"type": "eq", "fun": lambda d: d @ d - 1.0}]
    cons.append({"type": "eq" if eq else "ineq", "fun": (lambda d: d @ A @ d) if eq else (lambda d: -(d @ A @ d))})
    for s in starts:
        res = minimize(lambda d: d @ D @ d, s / np.linalg.norm(s), method="SLSQP", constraints=cons,
                       options={"maxiter": 200, "ftol": 1e-14})
        good, d = ok(res.x)
        if good:
            return d
    return None


def unbounded_witness(P: GtrsProblem, cf=None, cp: CanonicalProblem | None = None, reason: str | None = None,
                      target=-1e6, seed=0):
    """A feasible point with objective below ``target`` along a proof ray.

    2x2 and multiplier rules use the explicit rays in canonical coordinates
    (keeping every block's constraint contribution fixed); structural rules use
    a direction with ``d'Dd < 0`` on the cone ``d'Ad = 0`` and a projection back
    onto the constraint.  Returns None when no witness is found.
    """
    xbar = find_feasible_point(P, seed)
    if xbar is None:
        return None
    if cp is not None:
        x = _canonical_witness(P, cp, xbar, reason, target)
        if x is not None:
            return x
    d = negative_direction(P.A, P.D, eq=P.kind is not Kind.INEQ, seed=seed)
    if d is not None:
        for sgn in (1.0, -1.0):
            x = _ray_search(P, lambda t: xbar + sgn * t * d, target)
            if x is not None:
                return x
    return _flat_ray(P, xbar, target)


def _flat_ray(P: GtrsProblem, xbar, target):
    """Linear descent along a direction of zero curvature for both forms.

    Type B blocks of size two give no strictly negative direction: along a
    null vector d of A with d'Dd = 0 the objective is linear, with slope
    (Dx + e)'d that can be made nonzero by offsetting the base point along Dd.
    """
    V = linalg.null_space_basis(P.A, 1e-9)
    for d in V.T:
        if abs(d @ P.D @ d) > 1e-9 * (1.0 + np.linalg.norm(P.D)) or abs(P.b @ d) > 1e-9 * (1.0 + np.linalg.norm(P.b)):
            continue
        w = P.D @ d
        nw = float(np.linalg.norm(w))
        bases = [xbar]
        if nw > 0:
            bases += [xbar + s * w / nw for s in (1.0, -1.0, 0.1, -0.1, 0.01, -0.01, 10.0, -10.0)]
        for x0 in bases:
            if not P.is_feasible(x0, 1e-9):
                continue
            slope = (P.D @ x0 + P.e) @ d
            if abs(slope) <= 1e-9:
                continue
            sgn = -np.sign(slope)
            x = _ray_search(P, lambda t: x0 + sgn * t * d, target)
            if x is not None:
                return x
    return None


def _canonical_witness(P, cp, xbar, reason, target):
    bm = cp.back_map
    Sinv = np.linalg.pinv(bm.S)
    vbar = Sinv @ xbar + bm.shift
    k = cp.k

    def from_v(v):
        return bm.to_x(v)

    def pair_ray(j, f):
        i1, i2 = bm.two_cols[j]
        tau = cp.tau[j]
        pi = tau * vbar[i1] * vbar[i2]

        def point(M):
            v = vbar.copy()
            v[i1], v[i2] = f(M, tau, pi, j)
            return from_v(v)
        return point

    rays = []
    for j in range(k):
        tau, lam, e1 = cp.tau[j], cp.kappa[j], cp.e_odd[j]
        if tau == -1:
            rays.append(pair_ray(j, lambda M, t, pi, j: (t * pi / M, M)))
        if abs(e1) > 0:
            rays.append(pair_ray(j, lambda M, t, pi, j: (-sign(cp.e_odd[j]) * M, t * pi / (-sign(cp.e_odd[j]) * M))))
        if P.kind is Kind.INEQ and lam > 0:
            rays.append(pair_ray(j, lambda M, t, pi, j: (-M / cp.kappa[j] - M, M)))
    zeta = cp.zeta
    if len(zeta) > 1:
        a, b = int(np.argmin(zeta)), int(np.argmax(zeta))
        if zeta[b] - zeta[a] > 0:
            rays.append(_shift_ray(cp, vbar, a, b))
    if len(zeta) and P.kind is Kind.INEQ and len(cp.lin_b):
        rays.append(_linear_ray(cp, vbar))
    rays += _one_by_one_rays(P, cp, vbar)
    for ray in rays:
        x = _ray_search(P, ray, target)
        if x is not None:
            return x
    return None


def _product_setter(cp, v, idx, value):
    """Set z-variable ``idx`` (2x2 product or linear pair) to ``value``."""
    bm = cp.back_map
    if idx < cp.k:
        i1, i2 = bm.two_cols[idx]
        z2 = v[i2] if abs(v[i2]) > 1e-12 else 1.0
        v[i2] = z2
        v[i1] = cp.tau[idx] * value / z2
    else:
        li = idx - cp.k
        v[bm.lin_cols[li]] = value / cp.lin_b[li]


def _product_value(cp, v, idx):
    bm = cp.back_map
    if idx < cp.k:
        i1, i2 = bm.two_cols[idx]
        return cp.tau[idx] * v[i1] * v[i2]
    li = idx - cp.k
    return cp.lin_b[li] * v[bm.lin_cols[li]]


def _shift_ray(cp, vbar, a, b):
    """Move t from product b to product a: constraint fixed, objective drops."""
    pa, pb = _product_value(cp, vbar, a), _product_value(cp, vbar, b)

    def point(t):
        v = vbar.copy()
        _product_setter(cp, v, a, pa + t)
        _product_setter(cp, v, b, pb - t)
        return cp.back_map.to_x(v)
    return point


def _linear_ray(cp, vbar):
    """Linear pair with zeta > 0 (inequality): decrease it."""
    li = int(np.argmax(cp.zeta[cp.k:]))
    idx = cp.k + li
    p0 = _product_value(cp, vbar, idx)
    sgn = -1.0 if cp.zeta[idx] > 0 else 1.0

    def point(t):
        v = vbar.copy()
        _product_setter(cp, v, idx, p0 + sgn * t)
        return cp.back_map.to_x(v)
    return point


def _one_by_one_rays(P, cp, vbar):
    """Rays on the 1x1 part when the multiplier domain is empty."""
    bm = cp.back_map
    rays = []
    al, de = cp.alpha, cp.delta
    cols = bm.one_cols
    ineq = P.kind is Kind.INEQ
    for i in range(cp.l):
        if de[i] < 0 and (al[i] == 0 or (ineq and al[i] < 0)):
            for s in (1.0, -1.0):
                def point(t, i=i, s=s):
                    v = vbar.copy()
                    v[cols[i]] += s * t
                    return bm.to_x(v)
                rays.append(point)
    for i in range(cp.l):
        for j in range(cp.l):
            if al[i] > 0 and al[j] < 0 and -de[i] / al[i] > -de[j] / al[j]:
                ratio = np.sqrt(al[i] / -al[j])
                for si in (1.0, -1.0):
                    for sj in (1.0, -1.0):
                        def point(t, i=i, j=j, si=si, sj=sj, ratio=ratio):
                            v = vbar.copy()
                            v[cols[i]] += si * t
                            v[cols[j]] += sj * t * ratio
                            return bm.to_x(v)
                        rays.append(point)
    # multiplier forced by products but some 1x1 curvature negative there
    if len(cp.zeta):
        nu = -float(np.mean(cp.zeta))
        q = nu * al + de
        for i in np.flatnonzero(q < -1e-9):
            for s in (1.0, -1.0):
                def point(t, i=i, s=s):
                    v = vbar.copy()
                    v[cols[i]] += s * t
                    xi, xi0 = v[cols[i]], vbar[cols[i]]
                    dh = 0.5 * al[i] * (xi**2 - xi0**2) + cp.b[i] * (xi - xi0)
                    idx = 0
                    _product_setter(cp, v, idx, _product_value(cp, vbar, idx) - dh)
                    return bm.to_x(v)
                rays.append(point)
    return rays
