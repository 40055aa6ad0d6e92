"""Brute-force reference minimizer for small instances.

Nothing here uses the canonical form or the dual: the point is to have an
independent number to compare the solver against.  Values are upper bounds on
the true infimum (every returned point is feasible), never certificates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .errors import DimensionTooLarge
from .problem import GtrsProblem, Kind

MAX_DIM = 8


@dataclass(frozen=True)
class OracleConfig:
    radius: float = 10.0
    resolution: int = 41
    rounds: int = 30
    band: float = 1e-9
    seed: int = 0
    budget: int = 50_000  # grid points actually evaluated

    def __post_init__(self):
        if self.resolution < 3:
            raise ValueError("resolution must be at least 3")
        if not self.radius > 0:
            raise ValueError("radius must be positive")


@dataclass
class OracleResult:
    value: float
    x: np.ndarray | None
    note: str
    spacing: float = 0.0

    def __iter__(self):
        return iter((self.value, self.x, self.note))


def _limits(P: GtrsProblem):
    lo, hi = P.bounds()
    return lo, hi


def _line_min(P, x, d, lo, hi, band, tmin, tmax):
    """Exact minimum of f on {x + t d : lo <= h <= hi, tmin <= t <= tmax}."""
    Dx = P.D @ x
    Ad = P.A @ d
    qf = d @ P.D @ d
    gf = (Dx + P.e) @ d
    qh = d @ Ad
    gh = (P.A @ x + P.b) @ d
    h0 = P.h(x)
    cands = [tmin, tmax, 0.0]
    if qf > 0:
        cands.append(-gf / qf)
    for level in (lo, hi):
        if np.isfinite(level):
            cands.extend(_roots(0.5 * qh, gh, h0 - level))
    best_t, best_f = None, np.inf
    for t in cands:
        if not (tmin <= t <= tmax):
            continue
        ht = h0 + gh * t + 0.5 * qh * t * t
        if ht < lo - band or ht > hi + band:
            continue
        ft = gf * t + 0.5 * qf * t * t
        if ft < best_f:
            best_t, best_f = t, ft
    return best_t


def _roots(a, b, c):
    if abs(a) <= 1e-14 * (abs(b) + abs(c) + 1e-300):
        return [-c / b] if b != 0 else []
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    s = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(s, b))
    out = [q / a]
    if q != 0:
        out.append(c / q)
    return out


def _box_range(x, d, r):
    tmin, tmax = -np.inf, np.inf
    for xi, di in zip(x, d):
        if di > 0:
            tmin, tmax = max(tmin, (-r - xi) / di), min(tmax, (r - xi) / di)
        elif di < 0:
            tmin, tmax = max(tmin, (r - xi) / di), min(tmax, (-r - xi) / di)
    return tmin, tmax


SCALES = (1.0, 0.25, 0.0625)


def _grid(P, cfg, lo, hi):
    """Nested grids over boxes of radius r, r/4 and r/16, so a wide box does
    not starve a small feasible set of samples."""
    n = P.n
    per_axis = max(3, min(cfg.resolution, int((cfg.budget / len(SCALES)) ** (1.0 / n))))
    meshes = []
    for s in SCALES:
        axis = np.linspace(-cfg.radius * s, cfg.radius * s, per_axis)
        meshes.append(np.stack(np.meshgrid(*([axis] * n), indexing="ij"), -1).reshape(-1, n))
    mesh = np.vstack(meshes)
    h = 0.5 * np.einsum("ij,jk,ik->i", mesh, P.A, mesh) + mesh @ P.b + P.c
    inside = (h >= lo - cfg.band) & (h <= hi + cfg.band)
    pts = mesh[inside]
    # project the rest onto the nearest violated level along grad h
    out = mesh[~inside]
    if len(out):
        level = np.where(h[~inside] > hi, hi, lo)
        g = out @ P.A + P.b
        a2 = 0.5 * np.einsum("ij,jk,ik->i", g, P.A, g)
        a1 = np.einsum("ij,ij->i", g, g)
        a0 = h[~inside] - level
        t = np.full(len(out), np.nan)
        lin = np.abs(a2) <= 1e-14 * (a1 + 1e-300)
        t[lin] = -a0[lin] / np.where(a1[lin] > 0, a1[lin], np.nan)
        disc = a1 * a1 - 4 * a2 * a0
        ok = ~lin & (disc >= 0)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1 = (-a1 + sq) / (2 * a2)
            r2 = (-a1 - sq) / (2 * a2)
        pick = np.where(np.abs(r1) <= np.abs(r2), r1, r2)
        t[ok] = pick[ok]
        good = np.isfinite(t)
        proj = out[good] + t[good, None] * g[good]
        proj = proj[np.all(np.abs(proj) <= cfg.radius, axis=1)]
        pts = np.vstack([pts, proj]) if len(proj) else pts
    return pts, per_axis


def _values(P, X):
    return 0.5 * np.einsum("ij,jk,ik->i", X, P.D, X) + X @ P.e


def _coordinate_descent(P, x, cfg, lo, hi, rng):
    n = P.n
    for _ in range(cfg.rounds):
        f_start = P.f(x)
        dirs = list(np.eye(n)) + list(rng.normal(size=(n, n)))
        for d in dirs:
            d = d / np.linalg.norm(d)
            tmin, tmax = _box_range(x, d, cfg.radius)
            t = _line_min(P, x, d, lo, hi, cfg.band, tmin, tmax)
            if t is not None and t != 0.0:
                cand = x + t * d
                if P.f(cand) < P.f(x):
                    x = cand
        if f_start - P.f(x) <= 1e-13 * (1 + abs(f_start)):
            break
    return x


def _polish(P, x, cfg, lo, hi):
    cons = []
    if P.kind is Kind.EQ:
        cons.append({"type": "eq", "fun": P.h, "jac": lambda y: P.A @ y + P.b})
    else:
        cons.append({"type": "ineq", "fun": lambda y: hi - P.h(y), "jac": lambda y: -(P.A @ y + P.b)})
        if np.isfinite(lo):
            cons.append({"type": "ineq", "fun": lambda y: P.h(y) - lo, "jac": lambda y: P.A @ y + P.b})
    with warnings.catch_warnings():
        # SLSQP clips steps to the box and says so; harmless here
        warnings.simplefilter("ignore", RuntimeWarning)
        res = _slsqp(P, x, cons, cfg)
    y = res.x
    if _feasible(P, y, lo, hi, cfg) and P.f(y) < P.f(x):
        return y
    return x


def _slsqp(P, x, cons, cfg):
    return minimize(
        P.f, x, jac=lambda y: P.D @ y + P.e, constraints=cons, method="SLSQP",
        bounds=[(-cfg.radius, cfg.radius)] * P.n, options={"maxiter": 200, "ftol": 1e-14},
    )


def _anchor(P, cfg, lo, hi, rng, tries=20):
    """A feasible point when the grid is too coarse to hit a thin feasible set."""

    def viol(y):
        h = P.h(y)
        return max(0.0, h - hi) ** 2 + (max(0.0, lo - h) ** 2 if np.isfinite(lo) else 0.0)

    for _ in range(tries):
        x0 = rng.uniform(-cfg.radius, cfg.radius, P.n) * 0.1
        res = minimize(viol, x0, method="BFGS", options={"gtol": 1e-14})
        y = res.x
        if P.kind is Kind.EQ or not _feasible(P, y, lo, hi, cfg):
            # finish on the level itself with an exact root along grad h
            g = P.A @ y + P.b
            if g @ g > 0:
                level = hi if P.h(y) > hi else lo if P.h(y) < lo else P.h(y)
                ts = _roots(0.5 * g @ P.A @ g, g @ g, P.h(y) - level)
                if ts:
                    y = y + min(ts, key=abs) * g
        if _feasible(P, y, lo, hi, cfg):
            return y
    return None


def _feasible(P, x, lo, hi, cfg):
    h = P.h(x)
    band = max(cfg.band, 1e-9 * (1 + abs(h)))
    return lo - band <= h <= hi + band and np.all(np.abs(x) <= cfg.radius * (1 + 1e-12))


def brute_force_min(P: GtrsProblem, cfg: OracleConfig = OracleConfig()) -> OracleResult:
    """Best feasible point found in the box ``[-r, r]^n``."""
    if P.n > MAX_DIM:
        raise DimensionTooLarge(f"oracle is limited to n <= {MAX_DIM}, got {P.n}")
    rng = np.random.default_rng(cfg.seed)
    lo, hi = _limits(P)
    pts, per_axis = _grid(P, cfg, lo, hi)
    if len(pts) < 10:
        anchor = _anchor(P, cfg, lo, hi, rng)
        if anchor is not None:
            pts = np.vstack([pts, anchor[None, :]]) if len(pts) else anchor[None, :]
    if not len(pts):
        return OracleResult(np.inf, None, f"grid {per_axis}^{P.n}: no feasible point found")
    vals = _values(P, pts)
    order = np.argsort(vals, kind="stable")
    starts = pts[order[:10]]
    best_x, best_f = None, np.inf
    for x0 in starts:
        x = _coordinate_descent(P, x0.copy(), cfg, lo, hi, rng)
        x = _polish(P, x, cfg, lo, hi)
        x = _coordinate_descent(P, x, cfg, lo, hi, rng)
        fx = P.f(x)
        if fx < best_f and _feasible(P, x, lo, hi, cfg):
            best_x, best_f = x, fx
    spacing = 2 * cfg.radius / (per_axis - 1)
    note = (
        f"grid {per_axis}^{P.n} over radii {cfg.radius:g}/1,4,16 ({len(pts)} feasible or projected samples), "
        f"refined from {len(starts)} starts; upper bound only"
    )
    return OracleResult(float(best_f), best_x, note, spacing)


def probe_unbounded(P: GtrsProblem, scale: float = 1e3, cfg: OracleConfig = OracleConfig()) -> OracleResult:
    """Steepest decrease along +-eigen-directions of D, A and the pencil at radius ``scale``."""
    if P.n > MAX_DIM:
        raise DimensionTooLarge(f"oracle is limited to n <= {MAX_DIM}, got {P.n}")
    lo, hi = _limits(P)
    wide = OracleConfig(radius=scale, resolution=3, rounds=3, band=cfg.band, seed=cfg.seed, budget=2000)
    base = brute_force_min(P, OracleConfig(radius=min(scale, 10.0), resolution=5, rounds=5, band=cfg.band,
                                           seed=cfg.seed, budget=5000))
    if base.x is None:
        return OracleResult(np.inf, None, "no feasible base point")
    dirs = []
    for M in (P.D, P.A, P.D + P.A, P.D - P.A):
        dirs.extend(np.linalg.eigh(M)[1].T)
    best_x, best_f = base.x, base.value
    for d in dirs:
        for s in (1.0, -1.0):
            dd = s * d
            tmin, tmax = _box_range(base.x, dd, scale)
            t = _line_min(P, base.x, dd, lo, hi, wide.band * (1 + scale**2), tmin, tmax)
            if t is None:
                continue
            x = base.x + t * dd
            if P.f(x) < best_f:
                best_x, best_f = x, P.f(x)
    return OracleResult(float(best_f), best_x, f"eigen-direction probe at scale {scale:g}")


# --------------------------------------------------------------------------
# multiplier grid for S-lemma statements


def _lagrangian_min(D, e, const):
    w, V = np.linalg.eigh(D)
    tol = 1e-9 * max(1.0, np.max(np.abs(w)))
    if w[0] < -tol:
        return -np.inf
    g = V.T @ e
    small = np.abs(w) <= tol
    if np.any(np.abs(g[small]) > 1e-7 * (1 + np.linalg.norm(e))):
        return -np.inf
    return float(const - 0.5 * np.sum(g[~small] ** 2 / w[~small]))


def slemma_mu_grid(D, e, v, A, b, c, kind=Kind.INEQ, c1=None, c2=None, mu_max=100.0, points=2001):
    """``max_mu min_x f + v + mu (h - level)`` over a multiplier grid with a local refine.

    Returns ``(best value, best mu)``; the statement holds iff the value is >= 0
    up to tolerance.
    """
    kind = Kind(kind)

    def phi(mu):
        if kind is Kind.INTERVAL:
            level = c2 if mu >= 0 else c1
            return _lagrangian_min(D + mu * A, e + mu * b, v - mu * level)
        return _lagrangian_min(D + mu * A, e + mu * b, v + mu * c)

    lo = 0.0 if kind is Kind.INEQ else -mu_max
    grid = np.linspace(lo, mu_max, points)
    vals = np.array([phi(m) for m in grid])
    i = int(np.argmax(vals))
    best_mu, best = float(grid[i]), float(vals[i])
    if np.isfinite(best):
        step = grid[1] - grid[0]
        a, b_ = max(lo, best_mu - step), min(mu_max, best_mu + step)
        res = minimize_scalar(lambda m: -phi(m) if np.isfinite(phi(m)) else 1e300, bounds=(a, b_),
                              method="bounded", options={"xatol": 1e-12})
        if -res.fun > best:
            best_mu, best = float(res.x), float(-res.fun)
    return best, best_mu
