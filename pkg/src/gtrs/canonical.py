"""Congruent canonical form of a pair of real symmetric matrices.

Given symmetric ``A`` and ``D`` we look for an invertible ``S`` such that
``S.T @ A @ S`` and ``S.T @ D @ S`` are block diagonal with block pairs of the
following kinds:

* ``OneByOne(alpha, delta)`` -- a 1x1 pair.  ``alpha = +-1`` for type A blocks;
  ``alpha = 0, delta = +-1`` for a 1x1 type B block.
* ``TwoByTwo(tau, kappa)`` -- A part ``tau*[[0,1],[1,0]]``, D part
  ``tau*[[0,kappa],[kappa,1]]`` (a size-2 real Jordan block).
* ``ZeroPair`` -- a common null direction of A and D.

Structures that never occur in a bounded problem (real Jordan blocks of size
three or more, complex eigenvalue pairs, type B blocks of size two or more,
singular pencils without a common null vector) are reported as
:class:`Diagnostic` values in an :class:`EarlyDiagnostic` instead of being
assembled.

Routing: nonsingular ``A`` is handled directly; otherwise a shift
``C = A + mu*D`` with ``C`` nonsingular is used, and the pencil eigenvalue
``1/mu`` of ``C^{-1} D`` marks the type B part.  If no such shift exists the
common null space is split off first (:func:`reduce_doubly_singular`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.linalg as sla

from . import linalg
from .errors import ChainTooComplex, PreconditionViolated, SingularA
from .problem import DEFAULT_TOL, Tolerances

E2 = np.array([[0.0, 1.0], [1.0, 0.0]])


# --------------------------------------------------------------------------
# block pair types


@dataclass(frozen=True)
class OneByOne:
    alpha: float
    delta: float
    size: int = field(default=1, init=False)

    @property
    def type(self) -> str:
        return "B1" if self.alpha == 0 else "A1"

    def parts(self):
        return np.array([[self.alpha]]), np.array([[self.delta]])


@dataclass(frozen=True)
class TwoByTwo:
    tau: int
    kappa: float
    size: int = field(default=2, init=False)

    type = "A2"

    def parts(self):
        a = self.tau * E2
        d = self.tau * np.array([[0.0, self.kappa], [self.kappa, 1.0]])
        return a, d


@dataclass(frozen=True)
class ZeroPair:
    size: int = field(default=1, init=False)

    type = "C"

    def parts(self):
        return np.zeros((1, 1)), np.zeros((1, 1))


@dataclass(frozen=True)
class Diagnostic:
    """Structure that makes the problem unbounded; never assembled."""

    kind: str  # JordanTooLarge | ComplexPair | TypeBLarge | SingularPencil
    size: int = 0
    re: float = 0.0
    im: float = 0.0

    def describe(self) -> str:
        if self.kind == "ComplexPair":
            return f"ComplexPair({self.re:.6g}+-{self.im:.6g}i)"
        return f"{self.kind}({self.size})"


BlockPair = Union[OneByOne, TwoByTwo, ZeroPair]


def assemble(blocks) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonal (A part, D part) for a list of block pairs."""
    if not blocks:
        return np.zeros((0, 0)), np.zeros((0, 0))
    aparts, dparts = zip(*(b.parts() for b in blocks))
    return sla.block_diag(*aparts), sla.block_diag(*dparts)


def block_summary(blocks) -> list[dict]:
    out = []
    for blk in blocks:
        if isinstance(blk, TwoByTwo):
            out.append({"type": "A2", "size": 2, "tau": blk.tau, "kappa": blk.kappa})
        elif isinstance(blk, OneByOne):
            out.append(
                {"type": blk.type, "size": 1, "alpha": blk.alpha, "delta": blk.delta}
            )
        else:
            out.append({"type": "C", "size": 1})
    return out


@dataclass
class CanonicalForm:
    """``S.T @ A @ S`` and ``S.T @ D @ S`` equal ``assemble(blocks)``.

    ``columns[i]`` lists the S-column indices that belong to ``blocks[i]``;
    blocks are ordered 1x1 first, then 2x2, then zero pairs.
    """

    S: np.ndarray
    blocks: list
    zero_count: int
    columns: list
    route: str
    mu: float = 0.0
    cond_S: float = 1.0
    warnings: list = field(default_factory=list)
    permutation_notes: list = field(default_factory=list)

    def assemble(self):
        return assemble(self.blocks)

    @property
    def one_by_one(self):
        return [b for b in self.blocks if isinstance(b, OneByOne)]

    @property
    def two_by_two(self):
        return [b for b in self.blocks if isinstance(b, TwoByTwo)]

    def residual(self, A, D) -> float:
        """max(|S'AS - A_hat|_F, |S'DS - D_hat|_F)."""
        ah, dh = self.assemble()
        S = self.S
        ra = np.linalg.norm(S.T @ A @ S - ah)
        rd = np.linalg.norm(S.T @ D @ S - dh)
        return float(max(ra, rd))

    def summary(self) -> dict:
        return {
            "route": self.route,
            "blocks": block_summary(self.blocks),
            "zero_count": self.zero_count,
            "cond_S": self.cond_S,
            "warnings": list(self.warnings),
        }


@dataclass
class EarlyDiagnostic:
    diagnostics: list
    route: str
    notes: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "route": self.route,
            "diagnostics": [d.describe() for d in self.diagnostics],
            "notes": list(self.notes),
        }


@dataclass
class Chain:
    eigenvalue: complex
    sizes: list

    @property
    def is_real(self) -> bool:
        return self.eigenvalue.imag == 0.0


@dataclass
class JordanData:
    V: np.ndarray
    chains: list
    has_complex: bool
    has_large_block: bool
    chains_with_2x2: int

    def jordan_matrix(self) -> np.ndarray:
        parts = []
        for ch in self.chains:
            if not ch.is_real:
                raise ValueError("Jordan matrix only assembled for real spectra")
            lam = ch.eigenvalue.real
            for s in ch.sizes:
                parts.append(lam * np.eye(s) + np.eye(s, k=1))
        return sla.block_diag(*parts)


# --------------------------------------------------------------------------
# spectral analysis of a regular pencil


def _cluster(eigs, tol):
    """Single-linkage clusters of complex eigenvalues at relative tolerance."""
    n = len(eigs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = 1.0 + max(abs(eigs[i]), abs(eigs[j]))
            if abs(eigs[i] - eigs[j]) <= tol * scale:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = [np.array(sorted(g)) for g in groups.values()]
    clusters = _merge_split_triples(eigs, clusters, tol)
    clusters.sort(key=lambda g: (np.mean(eigs[g]).real, np.mean(eigs[g]).imag))
    return clusters


def _merge_split_triples(eigs, clusters, tol):
    """Rejoin a near-real conjugate pair with the real eigenvalue next to it.

    A perturbed block of size three splits into a roughly equilateral triangle
    of radius ~ eps^(1/3), wider than the cluster tolerance once the pencil is
    mildly ill-conditioned; its real vertex sits about 1.5x the imaginary part
    away from the midpoint of the pair.
    """
    limit = np.sqrt(tol)
    out = [list(g) for g in clusters]

    def center(g):
        return complex(np.mean(eigs[g]))

    def is_real(g):
        return bool(np.all(eigs[g].imag == 0))

    for a in range(len(out)):
        if not out[a] or is_real(out[a]):
            continue
        ca = center(out[a])
        if ca.imag <= 0 or ca.imag > limit * (1 + abs(ca)):
            continue
        pair = [g for g in range(len(out)) if g != a and out[g]
                and abs(center(out[g]) - ca.conjugate()) <= tol * (1 + abs(ca))]
        if not pair:
            continue
        mid = ca.real
        real = [g for g in range(len(out)) if out[g] and is_real(out[g])
                and abs(center(out[g]).real - mid) <= 2.0 * ca.imag + tol * (1 + abs(ca))]
        if not real:
            continue
        b, r = pair[0], min(real, key=lambda g: abs(center(out[g]).real - mid))
        out[a] = out[a] + out[b] + out[r]
        out[b], out[r] = [], []
    return [np.array(sorted(g)) for g in out if g]


def _invariant_subspace(M, eigs, members):
    m = len(members)
    center = complex(np.mean(eigs[members]))
    spread = float(np.max(np.abs(eigs[members] - center)))
    others = np.delete(eigs, members)
    gap = float(np.min(np.abs(others - center))) if others.size else np.inf
    radius = spread + 0.5 * (gap - spread) if np.isfinite(gap) else spread + 1.0

    def select(x, y=None):
        z = complex(x) if y is None else complex(x, y)
        return abs(z - center) <= radius

    try:
        _, Z, sdim = sla.schur(M, output="real", sort=select)
        if sdim == m:
            return Z[:, :m]
    except (np.linalg.LinAlgError, ValueError):
        pass
    # generalized eigenspace as the null space of (M - center)^m
    P = np.linalg.matrix_power(M - center.real * np.eye(M.shape[0]), m)
    _, _, vt = np.linalg.svd(P)
    return vt[-m:].T.copy()


def _jordan_sizes(T, center, rank_tol):
    """Jordan block sizes (descending) of a single-eigenvalue block ``T``."""
    m = T.shape[0]
    N = T - center * np.eye(m)
    scale = max(1.0, float(np.linalg.norm(T, 2)))
    ranks = [m]
    P = np.eye(m)
    for _ in range(m):
        P = P @ N
        s = np.linalg.svd(P, compute_uv=False)
        r = int(np.sum(s > rank_tol * scale ** (len(ranks))))
        ranks.append(r)
        if r == 0 or r == ranks[-2]:
            break
    if ranks[-1] != 0:
        # numerically inconsistent chain: report it as one oversized block
        return [m]
    at_least = [ranks[p - 1] - ranks[p] for p in range(1, len(ranks))]
    at_least.append(0)
    sizes = []
    for p in range(len(at_least) - 1, 0, -1):
        sizes.extend([p] * (at_least[p - 1] - at_least[p]))
    return sorted(sizes, reverse=True)


@dataclass
class _Cluster:
    eigenvalue: complex
    members: np.ndarray
    basis: np.ndarray | None
    sizes: list


def _analyze_pencil(C, D, tol: Tolerances):
    """Cluster the spectrum of C^{-1} D and compute per-cluster structure."""
    M = np.linalg.solve(C, D)
    eigs = np.linalg.eigvals(M)
    clusters = []
    for members in _cluster(eigs, tol.cluster):
        center = complex(np.mean(eigs[members]))
        if abs(center.imag) <= tol.cluster * (1.0 + abs(center)):
            basis = _invariant_subspace(M, eigs, members)
            T = basis.T @ M @ basis
            sizes = _jordan_sizes(T, center.real, tol.rank)
            clusters.append(_Cluster(complex(center.real, 0.0), members, basis, sizes))
        else:
            clusters.append(_Cluster(center, members, None, [len(members)]))
    return M, clusters


# --------------------------------------------------------------------------
# Jordan chains


def jordan_structure(A, D, tol: Tolerances = DEFAULT_TOL) -> JordanData:
    """Jordan structure of ``A^{-1} D`` for nonsingular symmetric ``A``.

    Eigenvalues closer than ``tol.cluster`` (relative) are merged; block sizes
    in a cluster come from the rank sequence of powers of ``A^{-1}D - lambda``.
    Blocks of size two or more get an explicit chain basis; larger blocks are
    only flagged.

    Raises:
        SingularA: ``A`` is numerically singular.
    """
    A = linalg.check_symmetric(A, tol.sym)
    D = linalg.check_symmetric(D, tol.sym)
    if linalg.numerical_rank(A, tol.eig) < A.shape[0]:
        raise SingularA("A must be nonsingular")
    M, clusters = _analyze_pencil(A, D, tol)
    chains, cols = [], []
    for cl in clusters:
        chains.append(Chain(cl.eigenvalue, cl.sizes))
        if cl.basis is None:
            continue
        if max(cl.sizes) <= 2:
            Ac = cl.basis.T @ A @ cl.basis
            Dc = cl.basis.T @ D @ cl.basis
            V, _ = _chain_basis(Ac, Dc, cl.sizes.count(2))
            cols.append(cl.basis @ V)
        else:
            cols.append(cl.basis)
    n = A.shape[0]
    V = np.hstack(cols) if cols else np.zeros((n, 0))
    return JordanData(
        V=V,
        chains=chains,
        has_complex=any(not ch.is_real for ch in chains),
        has_large_block=any(max(ch.sizes) > 2 for ch in chains if ch.is_real),
        chains_with_2x2=sum(1 for ch in chains if ch.is_real and 2 in ch.sizes),
    )


def _chain_basis(Ac, Dc, k):
    """Jordan basis [p1, q1, ..., pk, qk, r...] of A_c^{-1} D_c (one eigenvalue).

    ``q_j`` span a complement of ker N, ``p_j = N q_j``, and the ``r`` complete
    span{p} to ker N, where ``N = A_c^{-1} D_c - kappa``.
    """
    m = Ac.shape[0]
    M = np.linalg.solve(Ac, Dc)
    kappa = float(np.trace(M)) / m
    if k == 0:
        return np.eye(m), kappa
    N = M - kappa * np.eye(m)
    _, _, vt = np.linalg.svd(N)
    q = vt[:k].T
    p = N @ q
    ker = vt[k:].T
    coords = ker.T @ p
    comp = linalg.null_space_basis(coords.T, 1e-8) if m - 2 * k > 0 else np.zeros((m - k, 0))
    comp = comp[:, : m - 2 * k]
    r = ker @ comp
    cols = []
    for j in range(k):
        cols.extend([p[:, j], q[:, j]])
    cols.extend(r.T)
    return np.column_stack(cols), kappa


def _chain_assemble(kappa, sizes):
    parts = [kappa * np.eye(s) + np.eye(s, k=1) for s in sizes]
    return sla.block_diag(*parts)


def chain_canonical(Ai, Di, lam, sizes, tol=1e-10):
    """Canonical form of one full Jordan chain given in a Jordan basis.

    ``Ai`` and ``Di`` are the chain's blocks with ``Ai^{-1} Di = C(lam)``, the
    2x2 Jordan blocks first.  The sweep follows the classic construction:
    make each 2x2 diagonal block nonsingular (block swap, or adding a later
    block when every remaining diagonal block is singular), clear its block
    row by congruence, diagonalize the trailing 1x1 part spectrally, then
    scale.

    Returns:
        ``(A_check, D_check, U)`` with ``A_check = U' Ai U`` equal to
        ``diag(eps_1 E, ..., eps_k E, eps_{k+1}, ..., eps_l)`` and
        ``D_check = U' Di U = A_check C(lam)``.

    Raises:
        ChainTooComplex: a block of size greater than two is present.
    """
    Ai = np.atleast_2d(np.asarray(Ai, dtype=float))
    Di = np.atleast_2d(np.asarray(Di, dtype=float))
    sizes = list(sizes)
    if any(s > 2 for s in sizes):
        raise ChainTooComplex(f"chain sizes {sizes} contain a block larger than 2")
    if sorted(sizes, reverse=True) != sizes:
        raise ChainTooComplex("2x2 blocks must come first in the chain")
    k = sizes.count(2)
    dim = Ai.shape[0]
    if dim != sum(sizes):
        raise ChainTooComplex("chain sizes do not match the block dimension")
    scale = max(1.0, float(np.max(np.abs(Ai)))) if dim else 1.0

    U = np.eye(dim)
    for j in range(k):
        A = U.T @ Ai @ U
        jj = slice(2 * j, 2 * j + 2)
        pivots = [abs(A[2 * s, 2 * s + 1]) for s in range(j, k)]
        X = np.eye(dim)
        if pivots[0] <= tol * scale or pivots[0] < 0.5 * max(pivots):
            best = j + int(np.argmax(pivots))
            if pivots[best - j] > tol * scale:
                # swap block j with a later block whose diagonal block is nonsingular
                ss = slice(2 * best, 2 * best + 2)
                X[:, jj], X[:, ss] = np.eye(dim)[:, ss], np.eye(dim)[:, jj]
            else:
                # every remaining diagonal block is singular: add a coupled block
                coupling = [abs(A[2 * j, 2 * s + 1]) for s in range(j + 1, k)]
                if not coupling:
                    raise ChainTooComplex("singular chain block without coupling")
                s = j + 1 + int(np.argmax(coupling))
                ss = slice(2 * s, 2 * s + 2)
                X[ss, jj] += np.eye(2)
                X[jj, ss] -= np.eye(2)
            U = U @ X
            A = U.T @ Ai @ U
        Y = np.eye(dim)
        rest = slice(2 * j + 2, dim)
        Y[jj, rest] = -np.linalg.solve(A[jj, jj], A[jj, rest])
        U = U @ Y

    A = U.T @ Ai @ U
    if dim > 2 * k:
        tail = linalg.symmetrize(A[2 * k :, 2 * k :])
        _, Q = np.linalg.eigh(tail)
        Qbar = sla.block_diag(np.eye(2 * k), Q)
        U = U @ Qbar
    A = U.T @ Ai @ U
    P = np.eye(dim)
    for j in range(k):
        a1, a2 = A[2 * j, 2 * j + 1], A[2 * j + 1, 2 * j + 1]
        r = 1.0 / np.sqrt(abs(a1))
        P[2 * j : 2 * j + 2, 2 * j : 2 * j + 2] = [[r, -a2 / (2 * a1) * r], [0.0, r]]
    for i in range(2 * k, dim):
        P[i, i] = 1.0 / np.sqrt(abs(A[i, i]))
    U = U @ P
    return U.T @ Ai @ U, U.T @ Di @ U, U


def _blocks_from_chain(Ac_check, Dc_check, k):
    blocks = []
    for j in range(k):
        tau = 1 if Ac_check[2 * j, 2 * j + 1] > 0 else -1
        blocks.append((TwoByTwo(tau, float(tau * Dc_check[2 * j, 2 * j + 1])), [2 * j, 2 * j + 1]))
    for i in range(2 * k, Ac_check.shape[0]):
        alpha = 1.0 if Ac_check[i, i] > 0 else -1.0
        blocks.append((OneByOne(alpha, float(Dc_check[i, i])), [i]))
    return blocks


# --------------------------------------------------------------------------
# doubly singular pencils


@dataclass
class Reduction:
    """Result of splitting the common null space off a singular pencil."""

    A_red: np.ndarray
    D_red: np.ndarray
    R: np.ndarray  # n x n' embedding of the reduced coordinates
    Z: np.ndarray  # n x zero_count common null directions
    zero_count: int
    regular: bool


def reduce_doubly_singular(A, D, tol: Tolerances = DEFAULT_TOL, check=True) -> Reduction:
    """Split the common null space off a pair with no nonsingular pencil member.

    Applies the four congruences of the existence proof: diagonalize A
    (nonzero part first), diagonalize the trailing block of D, eliminate the
    coupling to that block, and column-compress the remaining coupling block.
    Columns compressed to zero are common null directions.

    ``regular`` reports whether the reduced pair admits a nonsingular pencil
    member; a False value means a singular pencil block without a common
    null vector remains.

    Raises:
        PreconditionViolated: some ``A + mu D`` or ``D + mu A`` is nonsingular
            (only checked when ``check`` is true).
    """
    A = linalg.symmetrize(A)
    D = linalg.symmetrize(D)
    n = A.shape[0]
    if check and (
        linalg.nonsingular_shift(A, D, tol.eig) is not None
        or linalg.nonsingular_shift(D, A, tol.eig) is not None
    ):
        raise PreconditionViolated("a nonsingular pencil member exists")

    w, U = np.linalg.eigh(A)
    cut = tol.eig * max(float(np.max(np.abs(w))), 0.0) if n else 0.0
    nz = np.abs(w) > cut
    order = np.concatenate([np.flatnonzero(nz), np.flatnonzero(~nz)])
    Q1 = U[:, order]
    q = int(nz.sum())
    Dbar = Q1.T @ D @ Q1

    D3 = linalg.symmetrize(Dbar[q:, q:])
    w3, U3 = np.linalg.eigh(D3) if n - q else (np.zeros(0), np.zeros((0, 0)))
    cut3 = tol.eig * max(1.0, float(np.max(np.abs(Dbar)))) if n else 0.0
    nz3 = np.abs(w3) > cut3
    order3 = np.concatenate([np.flatnonzero(nz3), np.flatnonzero(~nz3)])
    s = int(nz3.sum())
    Q2 = sla.block_diag(np.eye(q), U3[:, order3]) if n - q else np.eye(n)
    Dhat = Q2.T @ Dbar @ Q2

    Q3 = np.eye(n)
    if s:
        D4 = Dhat[:q, q : q + s]
        D6 = Dhat[q : q + s, q : q + s]
        Q3[q : q + s, :q] = -np.linalg.solve(D6, D4.T)
    Dtil = Q3.T @ Dhat @ Q3

    t = n - q - s
    Q4 = np.eye(n)
    r5 = 0
    if t:
        D5 = Dtil[:q, q + s :]
        if D5.size and np.any(D5):
            _, sv, vt = np.linalg.svd(D5)
            r5 = int(np.sum(sv > tol.eig * max(1.0, float(np.max(np.abs(Dbar))))))
            Q4[q + s :, q + s :] = vt.T
    T = Q1 @ Q2 @ Q3 @ Q4
    keep = q + s + r5
    R, Z = T[:, :keep], T[:, keep:]
    A_red = linalg.symmetrize(R.T @ A @ R)
    D_red = linalg.symmetrize(R.T @ D @ R)
    regular = keep == 0 or (
        linalg.nonsingular_shift(D_red, A_red, tol.eig) is not None
        or linalg.nonsingular_shift(A_red, D_red, tol.eig) is not None
    )
    return Reduction(A_red, D_red, R, Z, n - keep, regular)


# --------------------------------------------------------------------------
# driver


def canonicalize(A, D, tol: Tolerances = DEFAULT_TOL):
    """Canonical form of the symmetric pair ``(A, D)``.

    Returns a :class:`CanonicalForm`, or an :class:`EarlyDiagnostic` listing
    every structure that is reported rather than assembled.
    """
    A = linalg.symmetrize(linalg.check_symmetric(A, tol.sym))
    D = linalg.symmetrize(linalg.check_symmetric(D, tol.sym))
    if A.shape != D.shape:
        raise ValueError("A and D must have the same shape")
    n = A.shape[0]
    sA = float(np.linalg.norm(A)) or 1.0
    sD = float(np.linalg.norm(D)) or 1.0
    As, Ds = A / sA, D / sD

    notes = []
    mu = linalg.nonsingular_shift(As, Ds, tol.eig)
    if mu is not None:
        R, Z = np.eye(n), np.zeros((n, 0))
        Ar, Dr = As, Ds
        route = "nonsingular" if mu == 0.0 else "pencil"
    else:
        red = reduce_doubly_singular(As, Ds, tol, check=False)
        if not red.regular:
            return EarlyDiagnostic(
                [Diagnostic("SingularPencil", size=n - red.zero_count)],
                "doubly_singular",
                ["reduced pair still has a singular pencil"],
            )
        R, Z, Ar, Dr = red.R, red.Z, red.A_red, red.D_red
        route = "doubly_singular"
        mu = 0.0 if Ar.shape[0] == 0 else linalg.nonsingular_shift(Ar, Dr, tol.eig)
        if mu is None:
            mu = _shift_for_singular_a(Ar, Dr, tol)
        notes.append(f"split off {red.zero_count} common null directions")

    blocks_cols, diags = _regular_blocks(Ar, Dr, mu, tol)
    if diags:
        return EarlyDiagnostic(diags, route, notes)

    # assemble in reduced coordinates, then embed
    ones = [(b, R @ c) for b, c in blocks_cols if isinstance(b, OneByOne)]
    twos = [(b, R @ c) for b, c in blocks_cols if isinstance(b, TwoByTwo)]
    blocks, cols, S_cols = [], [], []
    idx = 0
    ratio = sD / sA
    for blk, c in ones + twos:
        blk, c = _unscale(blk, c, ratio, sA)
        blocks.append(blk)
        cols.append(list(range(idx, idx + blk.size)))
        S_cols.append(c)
        idx += blk.size
    for j in range(Z.shape[1]):
        blocks.append(ZeroPair())
        cols.append([idx])
        S_cols.append(Z[:, j : j + 1] / np.sqrt(sA))
        idx += 1
    S = np.hstack(S_cols) if S_cols else np.zeros((n, 0))
    cf = CanonicalForm(
        S=S,
        blocks=blocks,
        zero_count=Z.shape[1],
        columns=cols,
        route=route,
        mu=float(mu),
        cond_S=linalg.condition_number(S),
        permutation_notes=notes + ["blocks reordered: 1x1, then 2x2, then zero pairs"],
    )
    if cf.cond_S > tol.cond_warn:
        msg = f"ill-conditioned congruence (cond(S) = {cf.cond_S:.3g})"
        cf.warnings.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return cf


def _shift_for_singular_a(A, D, tol):
    n = A.shape[0]
    scale = 1.0
    for t in [0.5, 1.0, 2.0, -0.5, -1.0, 3.0, -2.0, 0.3]:
        mu = t * scale
        if linalg.numerical_rank(A + mu * D, tol.eig) == n:
            return mu
    raise PreconditionViolated("no nonsingular shift found for a regular pencil")


def _unscale(blk, cols, ratio, sA):
    """Map a block of the equilibrated pair (A/sA, D/sD) back to (A, D)."""
    cols = cols / np.sqrt(sA)
    if isinstance(blk, TwoByTwo):
        r = np.sqrt(ratio)
        cols = cols * np.array([r, 1.0 / r])
        return TwoByTwo(blk.tau, blk.kappa * ratio), cols
    if blk.alpha == 0:
        return OneByOne(0.0, blk.delta), cols / np.sqrt(ratio)
    return OneByOne(blk.alpha, blk.delta * ratio), cols


def _regular_blocks(A, D, mu, tol):
    """Blocks of a regular pencil, with columns in the coordinates of A, D."""
    n = A.shape[0]
    if n == 0:
        return [], []
    C = A + mu * D
    _, clusters = _analyze_pencil(C, D, tol)
    out, diags = [], []
    two_chains = 0
    for cl in clusters:
        lam = cl.eigenvalue
        if cl.basis is None:
            if lam.imag > 0:
                kappa = lam / (1 - mu * lam)
                diags.append(Diagnostic("ComplexPair", len(cl.members), kappa.real, abs(kappa.imag)))
            continue
        lam = lam.real
        typeB = mu != 0.0 and abs(1.0 - mu * lam) <= tol.cluster * (1.0 + abs(mu * lam))
        big = max(cl.sizes)
        if typeB:
            if big >= 2:
                diags.append(Diagnostic("TypeBLarge", big))
                continue
            Dc = linalg.symmetrize(cl.basis.T @ D @ cl.basis)
            w, Q = np.linalg.eigh(Dc)
            for i in range(len(w)):
                col = cl.basis @ Q[:, i : i + 1] / np.sqrt(abs(w[i]))
                out.append((OneByOne(0.0, 1.0 if w[i] > 0 else -1.0), col))
            continue
        if big >= 3:
            diags.append(Diagnostic("JordanTooLarge", big, lam / (1 - mu * lam)))
            continue
        k = cl.sizes.count(2)
        two_chains += k > 0
        Ac = linalg.symmetrize(cl.basis.T @ A @ cl.basis)
        Dc = linalg.symmetrize(cl.basis.T @ D @ cl.basis)
        V, kappa = _chain_basis(Ac, Dc, k)
        AJ = linalg.symmetrize(V.T @ Ac @ V)
        DJ = linalg.symmetrize(V.T @ Dc @ V)
        Ach, Dch, U = chain_canonical(AJ, DJ, kappa, cl.sizes)
        W = cl.basis @ V @ U
        for blk, idx in _blocks_from_chain(Ach, Dch, k):
            out.append((blk, W[:, idx]))
    return out, diags
