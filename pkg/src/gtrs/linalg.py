"""Dense real symmetric linear algebra primitives.

Thin wrappers over LAPACK (via numpy) with the rank and symmetry conventions
used throughout the package: a singular or eigen value counts as zero when it
is below ``tol`` times the largest magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonSquare, NotSymmetric

TOL_SYM = 1e-10
TOL_EIG = 1e-10


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def as_matrix(m) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")
    return m


def check_symmetric(m, tol=TOL_SYM) -> np.ndarray:
    m = as_matrix(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.T)) > tol * scale:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    return m


def symmetrize(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + m.T)


def sym_eig(m, tol=TOL_SYM) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending.

    Raises:
        NonSquare: ``m`` is not square.
        NotSymmetric: ``m`` differs from its transpose by more than ``tol``
            relative to its largest entry.
    """
    m = check_symmetric(m, tol)
    w, q = np.linalg.eigh(symmetrize(m))
    return EigenDecomposition(w, q)


def _threshold(values, tol):
    values = np.abs(np.asarray(values, dtype=float))
    if values.size == 0:
        return 0.0
    return tol * float(values.max())


def numerical_rank(m, tol=TOL_EIG) -> int:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > _threshold(s, tol)))


def pseudoinverse(m, tol=TOL_EIG) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a symmetric matrix (symmetric output)."""
    m = as_matrix(m)
    if m.size == 0:
        return m.copy()
    w, q = np.linalg.eigh(symmetrize(m))
    cut = _threshold(w, tol)
    inv = np.zeros_like(w)
    keep = np.abs(w) > cut
    inv[keep] = 1.0 / w[keep]
    p = (q * inv) @ q.T
    return symmetrize(p)


def null_space_basis(m, tol=TOL_EIG) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space of ``m``."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    ncols = m.shape[1]
    if m.shape[0] == 0 or not np.any(m):
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(m, full_matrices=True)
    rank = int(np.sum(s > _threshold(s, tol)))
    return vt[rank:].T.copy()


def range_basis(m, tol=TOL_EIG) -> np.ndarray:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if not np.any(m):
        return np.zeros((m.shape[0], 0))
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    rank = int(np.sum(s > _threshold(s, tol)))
    return u[:, :rank].copy()


def in_range(m, v, tol=1e-9) -> bool:
    """Whether ``v`` lies in the column space of symmetric ``m``."""
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        return True
    r = range_basis(m, TOL_EIG)
    resid = v - r @ (r.T @ v)
    scale = max(1.0, float(np.linalg.norm(v)))
    return float(np.linalg.norm(resid)) <= tol * scale


def is_psd(m, tol=1e-9) -> bool:
    m = as_matrix(m)
    if m.size == 0:
        return True
    w = np.linalg.eigvalsh(symmetrize(m))
    scale = max(1.0, float(np.max(np.abs(w))))
    return bool(w[0] >= -tol * scale)


def condition_number(m) -> float:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.size == 0:
        return 1.0
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def _probe_points(n, rng):
    pts = [0.0]
    k = 1
    while len(pts) < n + 1:
        pts.extend([float(k), float(-k)])
        k += 1
    pts.extend(rng.uniform(-3.0, 3.0, size=4).tolist())
    return pts


def nonsingular_shift(a, d, tol=TOL_EIG, seed=0):
    """Find a real ``mu`` with ``a + mu * d`` nonsingular, or None.

    Probes ``mu`` in {0, 1, -1, 2, -2, ...} (at least n+1 distinct points,
    scaled by ``|a| / |d|``) plus a few seeded random draws and returns the
    best-conditioned nonsingular candidate, ties going to the earlier probe.
    None means every probe was singular, so ``det(a + mu d)`` vanishes
    identically.
    """
    a = as_matrix(a)
    d = as_matrix(d)
    n = a.shape[0]
    if d.shape != a.shape:
        raise NonSquare("a and d must have the same shape")
    if n == 0:
        return 0.0
    na = np.linalg.norm(a)
    nd = np.linalg.norm(d)
    scale = na / nd if na > 0 and nd > 0 else 1.0
    rng = np.random.default_rng(seed)
    best_mu, best_cond = None, np.inf
    for t in _probe_points(n, rng):
        mu = t * scale
        c = a + mu * d
        s = np.linalg.svd(c, compute_uv=False)
        # relative to the inputs: a near-cancelling combination is not "nonsingular"
        ref = max(s[0], na + abs(mu) * nd)
        if s[0] <= tol * ref or s[-1] <= tol * ref:
            continue
        cond = s[0] / s[-1]
        if cond < best_cond * (1 - 1e-12):
            best_mu, best_cond = mu, cond
    return best_mu
