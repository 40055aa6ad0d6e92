"""Acceptance gate: one PASS/FAIL line per criterion.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the lines.
"""

from __future__ import annotations

import time

import numpy as np
import pytest
from scipy.linalg import block_diag

from generators import E2, anti, bounded_slater_instance, jordan, planted_pair, random_general, scramble
from gtrs.canonical import CanonicalForm, canonicalize
from gtrs.oracle import OracleConfig, brute_force_min, slemma_mu_grid
from gtrs.problem import GtrsProblem, Kind, eq, ineq, worked_example
from gtrs.slemma import SLemmaQuery, s_lemma, verify
from gtrs.variants import Status, solve, solve_interval


def report(num, ok, detail):
    print(f"\nCRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


# 1 ------------------------------------------------------------------------


def test_criterion_1_worked_example():
    P = worked_example()
    solve(P)  # warm-up: first call pays for lazy imports inside scipy
    t0 = time.perf_counter()
    sol = solve(P)
    dt = time.perf_counter() - t0
    ok = (
        sol.status is Status.OPTIMAL
        and abs(sol.value - (-3.3929)) <= 1e-3
        and P.violation(sol.x) <= 1e-6
        and abs(sol.x[3] - 0.2857) <= 1e-3
        and dt < 0.1
    )
    report(1, ok, f"status={sol.status.value} value={sol.value:.6f} x4={sol.x[3]:.6f} "
                  f"violation={P.violation(sol.x):.2e} time={dt * 1e3:.1f}ms")


# 2 ------------------------------------------------------------------------


def test_criterion_2_dual_oracle_sandwich():
    rng = np.random.default_rng(20260101)
    t0 = time.perf_counter()
    failures = []
    worst = 0.0
    for k in range(200):
        P = bounded_slater_instance(rng, k)
        sol = solve(P)
        orc = brute_force_min(P, OracleConfig(radius=60.0, seed=k))
        d = sol.value
        # oracle resolution bound: the oracle is an upper bound, exact up to its feasibility band
        below = d <= orc.value + 1e-8 * (1.0 + abs(d))
        gap = (orc.value - d) / max(1.0, abs(d))
        worst = max(worst, gap)
        if not (np.isfinite(d) and below and gap <= 1e-3):
            failures.append((k, P.name, d, orc.value))
    dt = time.perf_counter() - t0
    report(2, not failures and dt < 60.0,
           f"{200 - len(failures)}/200 sandwiched, worst relative gap {worst:.2e}, time {dt:.1f}s"
           + (f", first failure {failures[0]}" if failures else ""))


# 3 ------------------------------------------------------------------------


def _multiset(cf):
    out = []
    for b in cf.blocks:
        if b.type == "A2":
            out.append(("A2", b.tau, b.kappa))
        elif b.type == "C":
            out.append(("C", 0, 0.0))
        else:
            out.append((b.type, b.alpha, b.delta))
    return sorted(out)


def _same_multiset(m1, m2, tol=1e-5):
    if len(m1) != len(m2):
        return False
    return all(a[0] == b[0] and a[1] == b[1] and abs(a[2] - b[2]) <= tol * (1 + abs(a[2])) for a, b in zip(m1, m2))


def test_criterion_3_canonical_round_trip():
    rng = np.random.default_rng(2024)
    cats = ["nonsingular", "singular_a", "doubly_singular"]
    bad = []
    worst = 0.0
    for i in range(500):
        cat = cats[i % 3]
        n = int(rng.integers(2 if cat == "doubly_singular" else 1, 11))
        A0, D0, _ = planted_pair(rng, n, cat)
        A, D = scramble(rng, A0, D0)
        cf = canonicalize(A, D)
        A2, D2 = scramble(rng, A, D)
        cf2 = canonicalize(A2, D2)
        if not isinstance(cf, CanonicalForm) or not isinstance(cf2, CanonicalForm):
            bad.append((i, cat, "no canonical form"))
            continue
        rel = cf.residual(A, D) / (1.0 + np.linalg.norm(A) + np.linalg.norm(D))
        worst = max(worst, rel)
        if rel > 1e-7 or not _same_multiset(_multiset(cf), _multiset(cf2)):
            bad.append((i, cat, rel))
    report(3, not bad, f"{500 - len(bad)}/500 pairs, worst scaled residual {worst:.2e}"
           + (f", first failure {bad[0]}" if bad else ""))


# 4 ------------------------------------------------------------------------


def _structural_instances():
    z2, z3, z4 = np.zeros(2), np.zeros(3), np.zeros(4)
    return {
        "JordanTooLarge": (anti(3) @ jordan(0.5, 3), anti(3), z3, z3),
        "ComplexPair": (E2, np.diag([1.0, -1.0]), z2, z2),
        "TypeBLarge": (E2, np.diag([0.0, 1.0]), z2, z2),
        "TwoByTwoCase3": (-E2 @ jordan(0.5, 2), -E2, z2, z2),
        "OddLinearTermNonzero": (E2 @ jordan(-0.5, 2), E2, np.array([1.0, 0.0]), z2),
        "UnequalZetas": (block_diag(E2 @ jordan(-1, 2), E2 @ jordan(-2, 2)), block_diag(E2, E2), z4, z4),
    }


def test_criterion_4_unboundedness_certificates():
    rng = np.random.default_rng(4)
    lines = []
    ok = True
    for rule, (D, A, e, b) in _structural_instances().items():
        S = rng.normal(size=A.shape)
        P = ineq(S.T @ D @ S, S.T @ A @ S, S.T @ e, S.T @ b, -1.0)
        sol = solve(P)
        rules = [r.rule for r in sol.reasons]
        x = sol.x
        good = (
            sol.status is Status.UNBOUNDED
            and rule in rules
            and x is not None
            and P.is_feasible(x, 1e-7)
            and P.f(x) < -1e6
        )
        ok &= good
        lines.append(f"{rule}:{'ok' if good else 'MISS'}" + ("" if x is None else f"(f={P.f(x):.2e})"))
    report(4, ok, ", ".join(lines))


# 5 ------------------------------------------------------------------------


def test_criterion_5_unattained_infimum():
    # zeta = kappa = -1 < 0, e_even = 0, constraint forces the product to -1
    P = ineq(np.array([[0.0, -1.0], [-1.0, 1.0]]), E2, np.zeros(2), np.zeros(2), 1.0)
    sol = solve(P)
    gaps = {}
    ok = sol.status is Status.UNATTAINED
    for eps in (1e-2, 1e-4, 1e-6):
        x = sol.epsilon_solution(eps)
        gap = P.f(x) - sol.value
        gaps[eps] = gap
        ok &= P.is_feasible(x, 1e-9) and 0.0 < gap <= eps
    report(5, ok, f"status={sol.status.value} value={sol.value:.6g} gaps="
           + ", ".join(f"{k:g}:{v:.3g}" for k, v in gaps.items()))


# 6 ------------------------------------------------------------------------


def test_criterion_6_degenerate_routing():
    # min x1 x2 s.t. x2^2 <= 0
    P1 = ineq(E2, np.diag([0.0, 2.0]), np.zeros(2), np.zeros(2), 0.0)
    s1 = solve(P1)
    # min 2 x1^2 - x2^2 s.t. x1 = x2
    P2 = eq(np.diag([4.0, -2.0]), np.zeros((2, 2)), np.zeros(2), np.array([1.0, -1.0]), 0.0)
    s2 = solve(P2)
    ok = (
        s1.status is Status.REDUCED and s1.value == pytest.approx(0.0, abs=1e-12)
        and s1.assumptions.action == "affine_reduction"
        and s2.status is Status.REDUCED and s2.value == pytest.approx(0.0, abs=1e-12)
        and s2.assumptions.a_is_zero
    )
    report(6, ok, f"remark: {s1.status.value} {s1.value:.3g} via {s1.assumptions.action}; "
                  f"A=0 equality: {s2.status.value} {s2.value:.3g} via {s2.assumptions.action}")


# 7 ------------------------------------------------------------------------


def test_criterion_7_variant_consistency():
    rng = np.random.default_rng(7)
    eq_bad, cross_bad, crossed = 0, 0, 0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        P = random_general(rng, n, "eq")
        IP = GtrsProblem(P.D, P.A, P.e, P.b, 0.0, Kind.INTERVAL, -P.c, -P.c)
        v_ip, v_ep = solve(IP).value, solve(P).value
        if not (v_ip == v_ep or abs(v_ip - v_ep) <= 1e-8 * (1 + abs(v_ep))):
            eq_bad += 1
        Q = random_general(rng, n, "interval")
        sol = solve_interval(Q)
        if sol.nu == 0.0 and sol.assumptions and any("inside" in s for s in sol.assumptions.notes):
            continue
        crossed += 1
        w = min(solve(GtrsProblem(Q.D, Q.A, Q.e, Q.b, -lev, Kind.EQ)).value for lev in (Q.c1, Q.c2))
        if not (sol.value == w or abs(sol.value - w) <= 1e-6 * (1 + abs(w))):
            cross_bad += 1
    report(7, eq_bad == 0 and cross_bad == 0,
           f"IP(c1=c2) vs EP mismatches {eq_bad}/100; boundary cross-check mismatches {cross_bad}/{crossed}")


# 8 ------------------------------------------------------------------------


def test_criterion_8_slemma_agreement():
    from gtrs.errors import NotApplicable

    rng = np.random.default_rng(8)
    agree, decided, unverified = 0, 0, 0
    kinds = ["ineq", "eq", "interval"]
    for k in range(100):
        n = int(rng.integers(1, 5))
        kind = kinds[k % 3]
        M = rng.normal(size=(n, n))
        A = M + M.T
        M = rng.normal(size=(n, n))
        D = M + M.T
        e, b = rng.normal(size=n), rng.normal(size=n)
        v = 3.0 * float(rng.normal())
        if kind == "interval":
            q = SLemmaQuery(D, e, v, A, b, 0.0, Kind.INTERVAL, -1.0, 1.0)
        else:
            q = SLemmaQuery(D, e, v, A, b, -1.0, Kind(kind))
        try:
            verdict = s_lemma(q)
        except NotApplicable:
            continue
        decided += 1
        grid_value, _ = slemma_mu_grid(D, e, v, A, b, q.c, q.kind, q.c1, q.c2)
        if (grid_value >= -1e-6) == verdict.holds:
            agree += 1
        if not verdict.holds and not verify(q, verdict):
            unverified += 1
    report(8, agree == decided and unverified == 0,
           f"{agree}/{decided} verdicts match the multiplier grid ({100 - decided} outside scope), "
           f"{unverified} unverified witnesses")
