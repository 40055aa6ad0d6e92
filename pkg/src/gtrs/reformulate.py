"""From canonical coordinates to the separable cone program and back.

Coordinates: ``x = S @ w`` where ``w`` follows the block order of the
canonical form.  On every 2x2 block the constraint's linear part is shifted
away (``v = w + shift``), so in ``v``-coordinates a 2x2 block contributes
``tau*z1*z2`` to the constraint and ``tau*kappa*z1*z2 + tau*z2^2/2 + e1*z1 + e2*z2``
to the objective.  A zero pair with a nonzero constraint coefficient acts as a
free linear variable ``u = b*w`` entering both functions linearly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .canonical import CanonicalForm, OneByOne, TwoByTwo, ZeroPair
from .errors import LiftingFailed, OddLinearTermNonzero, PreconditionViolated, RecoveryInconsistent
from .problem import DEFAULT_TOL, GtrsProblem, Kind, Tolerances


# --------------------------------------------------------------------------
# Slater preprocessing


@dataclass(frozen=True)
class Proceed:
    pass


@dataclass(frozen=True)
class Infeasible:
    gap: float  # c - b'A^+b/2 > 0: the minimum of h


@dataclass
class UnconstrainedResult:
    value: float
    x: np.ndarray | None
    ray: np.ndarray | None  # descent direction when value is -inf


@dataclass
class ReducedUnconstrained:
    """Feasible set is the affine subspace ``x0 + range(V)``."""

    x0: np.ndarray
    V: np.ndarray
    D_red: np.ndarray
    e_red: np.ndarray
    const: float

    def solve(self, tol=1e-9) -> UnconstrainedResult:
        res = unconstrained_min(self.D_red, self.e_red, self.const, tol)
        x = None if res.x is None else self.x0 + self.V @ res.x
        ray = None if res.ray is None else self.V @ res.ray
        return UnconstrainedResult(res.value, x, ray)


def unconstrained_min(H, g, const=0.0, tol=1e-9) -> UnconstrainedResult:
    """min 0.5 y'Hy + g'y + const over all y."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    g = np.asarray(g, dtype=float).reshape(-1)
    if H.shape[0] == 0:
        return UnconstrainedResult(float(const), np.zeros(0), None)
    w, Q = np.linalg.eigh(linalg.symmetrize(H))
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -tol * scale:
        return UnconstrainedResult(-np.inf, None, Q[:, 0])
    Hp = linalg.pseudoinverse(H, tol)
    y = -Hp @ g
    resid = g + H @ y
    if np.linalg.norm(resid) > tol * max(1.0, float(np.linalg.norm(g))) * 1e3:
        return UnconstrainedResult(-np.inf, None, -resid / np.linalg.norm(resid))
    return UnconstrainedResult(float(const + 0.5 * g @ y), y, None)


def affine_reduction(P: GtrsProblem, x0, V) -> ReducedUnconstrained:
    D, e = P.D, P.e
    return ReducedUnconstrained(
        x0=x0,
        V=V,
        D_red=linalg.symmetrize(V.T @ D @ V),
        e_red=V.T @ (D @ x0 + e),
        const=P.f(x0),
    )


def preprocess(P: GtrsProblem, tol: Tolerances = DEFAULT_TOL):
    """Slater screening for the inequality form.

    Infeasible when ``h`` is a convex quadratic with positive minimum;
    ReducedUnconstrained when that minimum is exactly zero (feasible set is the
    affine set where it is attained); Proceed otherwise.
    """
    A, b, c = P.A, P.b, P.c
    if not linalg.is_psd(A, tol.coef) or not linalg.in_range(A, b, tol.coef):
        return Proceed()
    Ap = linalg.pseudoinverse(A, tol.eig)
    xc = -Ap @ b
    gap = c - 0.5 * b @ Ap @ b
    scale = 1.0 + abs(c) + abs(0.5 * b @ Ap @ b)
    if gap > tol.coef * scale:
        return Infeasible(float(gap))
    if gap < -tol.coef * scale:
        return Proceed()
    V = linalg.null_space_basis(A, tol.eig) if np.any(A) else np.eye(P.n)
    return affine_reduction(P, xc, V)


# --------------------------------------------------------------------------
# canonical coefficients


@dataclass(frozen=True)
class Shift:
    e_odd: float
    e_even: float
    dc: float  # change of the constraint constant
    d0: float  # objective offset
    shift: tuple  # v = w + shift on (z1, z2)


def shift_cross_b(tau, lam, b_pair, e_pair) -> Shift:
    """Remove the constraint's linear part on one 2x2 block.

    With ``z1' = z1 + tau*b2`` and ``z2' = z2 + tau*b1``:
    ``tau z1 z2 + b1 z1 + b2 z2 = tau z1' z2' - tau b1 b2``.
    """
    b1, b2 = b_pair
    e1, e2 = e_pair
    return Shift(
        e_odd=e1 - lam * b1,
        e_even=e2 - b1 - lam * b2,
        dc=-tau * b1 * b2,
        d0=-e1 * tau * b2 - e2 * tau * b1 + tau * lam * b1 * b2 + 0.5 * tau * b1 * b1,
        shift=(tau * b2, tau * b1),
    )


@dataclass
class BackMap:
    S: np.ndarray
    one_cols: np.ndarray  # S-column of each 1x1 block
    two_cols: np.ndarray  # (k, 2) S-columns of each 2x2 block
    lin_cols: np.ndarray  # S-column of each linear zero pair
    dropped_cols: np.ndarray
    shift: np.ndarray  # v = w + shift

    def to_x(self, v) -> np.ndarray:
        return self.S @ (np.asarray(v, dtype=float) - self.shift)


@dataclass
class CanonicalProblem:
    """Separable problem data; ``z``-variables are 2x2 products then linear pairs."""

    kind: Kind
    alpha: np.ndarray
    delta: np.ndarray
    b: np.ndarray
    e: np.ndarray
    tau: np.ndarray
    kappa: np.ndarray
    e_odd: np.ndarray
    e_even: np.ndarray
    lin_b: np.ndarray
    lin_e: np.ndarray
    c: float
    lo: float
    hi: float
    obj_offset: float
    back_map: BackMap
    zero_linear_objective: list = field(default_factory=list)  # (column, e)

    @property
    def l(self) -> int:
        return len(self.alpha)

    @property
    def k(self) -> int:
        return len(self.tau)

    @property
    def c0(self) -> float:
        return float(-np.sum(0.5 * self.e_even**2))

    @property
    def zeta(self) -> np.ndarray:
        """Objective coefficients of all z-variables (2x2 products, then linear)."""
        lin = self.lin_e / self.lin_b if len(self.lin_b) else np.zeros(0)
        return np.concatenate([self.kappa, lin])

    def vector(self, x1, pairs, lin_w) -> np.ndarray:
        """Assemble a shifted canonical vector ``v`` from block values."""
        bm = self.back_map
        v = np.zeros(bm.S.shape[1])
        v[bm.one_cols] = x1
        if self.k:
            v[bm.two_cols[:, 0]] = [p[0] for p in pairs]
            v[bm.two_cols[:, 1]] = [p[1] for p in pairs]
        if len(bm.lin_cols):
            v[bm.lin_cols] = lin_w
        return v

    def split(self, v):
        bm = self.back_map
        x1 = v[bm.one_cols]
        pairs = v[bm.two_cols] if self.k else np.zeros((0, 2))
        lin_w = v[bm.lin_cols]
        return x1, pairs, lin_w

    def objective(self, v) -> float:
        x1, pairs, lin_w = self.split(v)
        val = float(np.sum(0.5 * self.delta * x1**2 + self.e * x1))
        for j in range(self.k):
            z1, z2 = pairs[j]
            t, kap = self.tau[j], self.kappa[j]
            val += t * kap * z1 * z2 + 0.5 * t * z2 * z2 + self.e_odd[j] * z1 + self.e_even[j] * z2
        val += float(np.sum(self.lin_e * lin_w))
        for j, ej in self.zero_linear_objective:
            val += ej * v[j]
        return val + self.obj_offset

    def constraint(self, v) -> float:
        x1, pairs, lin_w = self.split(v)
        val = float(np.sum(0.5 * self.alpha * x1**2 + self.b * x1))
        for j in range(self.k):
            val += self.tau[j] * pairs[j][0] * pairs[j][1]
        val += float(np.sum(self.lin_b * lin_w))
        return val + self.c


def canonical_problem(P: GtrsProblem, cf: CanonicalForm, tol: Tolerances = DEFAULT_TOL) -> CanonicalProblem:
    """Transform ``P`` by the congruence of ``cf`` and shift the 2x2 blocks."""
    S = cf.S
    et = S.T @ P.e
    bt = S.T @ P.b
    ones, twos, lin, dropped, zero_obj = [], [], [], [], []
    escale = 1.0 + float(np.max(np.abs(et))) if et.size else 1.0
    bscale = 1.0 + float(np.max(np.abs(bt))) if bt.size else 1.0
    for blk, cols in zip(cf.blocks, cf.columns):
        if isinstance(blk, OneByOne):
            ones.append((blk, cols[0]))
        elif isinstance(blk, TwoByTwo):
            twos.append((blk, cols))
        else:
            j = cols[0]
            if abs(bt[j]) > tol.coef * bscale:
                lin.append(j)
            elif abs(et[j]) > tol.coef * escale:
                zero_obj.append((j, float(et[j])))
            else:
                dropped.append(j)
    shift = np.zeros(S.shape[1])
    c = P.c
    offset = 0.0
    e_odd, e_even = [], []
    for blk, (i1, i2) in twos:
        sh = shift_cross_b(blk.tau, blk.kappa, (bt[i1], bt[i2]), (et[i1], et[i2]))
        e_odd.append(sh.e_odd)
        e_even.append(sh.e_even)
        c += sh.dc
        offset += sh.d0
        shift[i1], shift[i2] = sh.shift
    lo, hi = P.bounds()
    one_cols = np.array([j for _, j in ones], dtype=int)
    return CanonicalProblem(
        kind=P.kind,
        alpha=np.array([b.alpha for b, _ in ones], dtype=float),
        delta=np.array([b.delta for b, _ in ones], dtype=float),
        b=bt[one_cols] if len(one_cols) else np.zeros(0),
        e=et[one_cols] if len(one_cols) else np.zeros(0),
        tau=np.array([b.tau for b, _ in twos], dtype=int),
        kappa=np.array([b.kappa for b, _ in twos], dtype=float),
        e_odd=np.array(e_odd, dtype=float),
        e_even=np.array(e_even, dtype=float),
        lin_b=bt[lin] if lin else np.zeros(0),
        lin_e=et[lin] if lin else np.zeros(0),
        c=float(c),
        lo=lo,
        hi=hi,
        obj_offset=float(offset),
        back_map=BackMap(
            S=S,
            one_cols=one_cols,
            two_cols=np.array([cols for _, cols in twos], dtype=int).reshape(-1, 2),
            lin_cols=np.array(lin, dtype=int),
            dropped_cols=np.array(dropped, dtype=int),
            shift=shift,
        ),
        zero_linear_objective=zero_obj,
    )


# --------------------------------------------------------------------------
# the cone program


@dataclass
class SocpProblem:
    """min  delta'y + e'x + zeta'z + c0 + obj_offset
    s.t. lo <= alpha'y + b'x + 1'z + c <= hi,   x_i^2/2 <= y_i.
    """

    kind: Kind
    delta: np.ndarray
    e: np.ndarray
    zeta: np.ndarray
    c0: float
    obj_offset: float
    alpha: np.ndarray
    b: np.ndarray
    c: float
    lo: float
    hi: float

    @property
    def l(self) -> int:
        return len(self.alpha)

    @property
    def m(self) -> int:
        return len(self.zeta)

    def objective(self, x, y, z) -> float:
        return float(self.delta @ y + self.e @ x + self.zeta @ z + self.c0 + self.obj_offset)

    def constraint(self, x, y, z) -> float:
        return float(self.alpha @ y + self.b @ x + np.sum(z) + self.c)

    def cone_slack(self, x, y) -> np.ndarray:
        return np.asarray(y) - 0.5 * np.asarray(x) ** 2

    def is_feasible(self, x, y, z, tol=1e-8) -> bool:
        g = self.constraint(x, y, z)
        scale = 1.0 + abs(self.c)
        ok = g <= self.hi + tol * scale and g >= self.lo - tol * scale
        return bool(ok and np.all(self.cone_slack(x, y) >= -tol * (1 + np.abs(y))))


def build_socp(cp: CanonicalProblem, tol: Tolerances = DEFAULT_TOL) -> SocpProblem:
    """Assemble the cone program of a structurally screened canonical problem.

    Raises:
        OddLinearTermNonzero: a 2x2 block has ``e_odd`` beyond tolerance.
        PreconditionViolated: a 2x2 block has ``tau = -1`` or a zero pair
            carries an objective-only linear term (both mean unbounded).
    """
    scale = 1.0 + float(np.linalg.norm(np.concatenate([cp.e, cp.e_odd, cp.e_even])))
    if np.any(np.abs(cp.e_odd) > tol.coef * scale):
        raise OddLinearTermNonzero("2x2 block with nonzero odd linear coefficient")
    if np.any(cp.tau != 1):
        raise PreconditionViolated("2x2 block with tau = -1")
    if cp.zero_linear_objective:
        raise PreconditionViolated("zero pair with an objective-only linear term")
    return SocpProblem(
        kind=cp.kind,
        delta=cp.delta.copy(),
        e=cp.e.copy(),
        zeta=cp.zeta,
        c0=cp.c0,
        obj_offset=cp.obj_offset,
        alpha=cp.alpha.copy(),
        b=cp.b.copy(),
        c=cp.c,
        lo=cp.lo,
        hi=cp.hi,
    )


@dataclass
class PrimalPoint:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    socp: SocpProblem | None = None

    @property
    def objective(self) -> float:
        return self.socp.objective(self.x, self.y, self.z)

    @property
    def residual(self) -> float:
        """Constraint value minus the violated bound (0 when within bounds)."""
        g = self.socp.constraint(self.x, self.y, self.z)
        return max(0.0, g - self.socp.hi, self.socp.lo - g)


# --------------------------------------------------------------------------
# recovery


@dataclass
class Recovery:
    x: np.ndarray
    v: np.ndarray
    attained: bool
    unattained_blocks: list
    eps: float
    notes: list = field(default_factory=list)


def _lift(pt: PrimalPoint, sp: SocpProblem, cp: CanonicalProblem, tol):
    """Close cone slack: x_i = +-sqrt(2 y_i) on slack indices.

    A sign pattern is chosen to keep the objective unchanged; any change of
    the linear constraint is absorbed by one z-variable (a linear pair if
    present, else a 2x2 product with ``e_even != 0``, else the first).
    """
    x = np.array(pt.x, dtype=float)
    y = np.array(pt.y, dtype=float)
    z = np.array(pt.z, dtype=float)
    slack = np.flatnonzero(y - 0.5 * x**2 > tol * (1.0 + np.abs(y)))
    if slack.size == 0:
        return x, z, []
    mags = np.sqrt(2.0 * y[slack])
    g0 = sp.constraint(x, y, z)
    f0 = sp.objective(x, y, z)
    if sp.m:
        attained = [j for j in range(cp.k) if abs(cp.e_even[j]) > tol]
        sink = cp.k if len(cp.lin_b) else (attained[0] if attained else 0)
    else:
        sink = None

    def score(signs):
        xs = x.copy()
        xs[slack] = np.asarray(signs) * mags
        dx = xs[slack] - x[slack]
        dg = float(sp.b[slack] @ dx)
        df = float(sp.e[slack] @ dx)
        if sink is not None:
            return abs(df - sp.zeta[sink] * dg), xs, dg
        g = g0 + dg
        viol = max(0.0, g - sp.hi, sp.lo - g)
        return viol * 1e6 + abs(df), xs, dg

    if slack.size <= 12:
        best = min(
            (score(s) for s in itertools.product([1.0, -1.0], repeat=slack.size)),
            key=lambda t: t[0],
        )
    else:
        signs = np.ones(slack.size)
        for i in range(slack.size):
            trial = signs.copy()
            trial[i] = -1.0
            if score(trial)[0] < score(signs)[0]:
                signs = trial
        best = score(signs)
    _, xs, dg = best
    if sink is not None:
        z[sink] -= dg
    ys = 0.5 * xs**2
    if not sp.is_feasible(xs, ys, z, 1e-8):
        raise LiftingFailed("no sign pattern keeps the linear constraint satisfied")
    f1 = sp.objective(xs, ys, z)
    if abs(f1 - f0) > 1e-7 * (1.0 + abs(f0)):
        raise LiftingFailed(f"lifting changed the objective by {f1 - f0:.3g}")
    return xs, z, [f"lifted {slack.size} slack cone coordinates"]


def recover_x(pt: PrimalPoint, cp: CanonicalProblem, eps: float = 1e-6, tol=1e-9) -> Recovery:
    """Map a cone-program point to an (eps-)solution in original coordinates.

    Slack cone coordinates are lifted first; each 2x2 product ``z_j`` is then
    split as ``z2 = -e_even`` (attained) or ``z2 = 1/M`` with
    ``M = sqrt(1/eps')``, ``eps' = eps / #unattained``, which overshoots the
    infimum by ``eps'/2`` per block.
    """
    sp = pt.socp if pt.socp is not None else build_socp(cp)
    x, z, notes = _lift(pt, sp, cp, tol)
    k = cp.k
    zz = z[:k]
    unatt = [j for j in range(k) if _unattained(cp, j, zz[j], tol)]
    M = np.sqrt(len(unatt) / eps) if unatt else 0.0
    pairs = []
    for j in range(k):
        e2 = cp.e_even[j]
        scale = 1.0 + abs(e2)
        if abs(e2) > tol * scale:
            z2 = -e2
            pairs.append((zz[j] / z2, z2))
        elif j in unatt:
            pairs.append((zz[j] * M, 1.0 / M))
        else:
            pairs.append((0.0, 0.0))
            if abs(zz[j]) > tol:
                notes.append(f"block {j}: product {zz[j]:.3g} released into constraint slack")
    lin_w = z[k:] / cp.lin_b if len(cp.lin_b) else np.zeros(0)
    v = cp.vector(x, pairs, lin_w)
    return Recovery(
        x=cp.back_map.to_x(v),
        v=v,
        attained=not unatt,
        unattained_blocks=unatt,
        eps=eps,
        notes=notes,
    )


def _unattained(cp: CanonicalProblem, j: int, zbar: float, tol: float) -> bool:
    e2 = cp.e_even[j]
    if abs(e2) > tol * (1.0 + abs(e2)):
        return False
    zt = tol * (1.0 + abs(cp.c))
    if cp.kind is Kind.INEQ:
        zeta = cp.kappa[j]
        if abs(zeta) <= tol:
            return zbar < -zt
        return zeta < 0 and abs(zbar) > zt
    return abs(zbar) > zt


def check_recovered(P: GtrsProblem, x, tol=1e-7):
    """Feasibility of a recovered point in the original problem."""
    lo, hi = P.bounds()
    v = P.h(x)
    scale = 1.0 + abs(P.c) + (abs(lo) if np.isfinite(lo) else 0.0) + abs(hi)
    viol = max(0.0, v - hi, lo - v)
    if viol > tol * scale:
        raise RecoveryInconsistent(f"recovered point violates the constraint by {viol:.3g}")
    return viol
