import numpy as np
import pytest

from generators import E2, jordan
from gtrs.canonical import canonicalize
from gtrs.errors import OddLinearTermNonzero, PreconditionViolated
from gtrs.problem import DEFAULT_TOL, Kind, eq, ineq, worked_example
from gtrs.reformulate import (
    Infeasible,
    PrimalPoint,
    Proceed,
    ReducedUnconstrained,
    build_socp,
    canonical_problem,
    check_recovered,
    preprocess,
    recover_x,
    shift_cross_b,
)


def canon(P):
    cf = canonicalize(P.A, P.D)
    return cf, canonical_problem(P, cf)


class TestPreprocess:
    def test_infeasible(self):
        res = preprocess(ineq(np.eye(2), np.eye(2), np.zeros(2), np.zeros(2), 1.0))
        assert isinstance(res, Infeasible) and res.gap == pytest.approx(1.0)

    def test_boundary_only(self):
        res = preprocess(ineq(np.eye(2), np.eye(2), np.zeros(2), np.zeros(2), 0.0))
        assert isinstance(res, ReducedUnconstrained)
        out = res.solve()
        assert out.value == 0.0 and np.allclose(out.x, 0.0)

    def test_degenerate_product(self):
        # min x1 x2 s.t. x2^2 <= 0 has value 0, not -inf
        res = preprocess(ineq(E2, np.diag([0.0, 2.0]), np.zeros(2), np.zeros(2), 0.0))
        assert isinstance(res, ReducedUnconstrained)
        assert res.solve().value == pytest.approx(0.0)

    def test_slater_holds(self):
        assert isinstance(preprocess(worked_example()), Proceed)


class TestShift:
    def test_no_linear_part(self):
        s = shift_cross_b(1, 0.3, (0.0, 0.0), (0.5, -1.0))
        assert s.shift == (0.0, 0.0) and s.d0 == 0.0 and s.dc == 0.0
        assert (s.e_odd, s.e_even) == (0.5, -1.0)

    @pytest.mark.parametrize("tau", [1, -1])
    def test_point_evaluation(self, tau):
        rng = np.random.default_rng(tau + 5)
        lam, b1, b2, e1, e2 = -1.0, 1.0, 2.0, 0.0, 2.0
        s = shift_cross_b(tau, lam, (b1, b2), (e1, e2))
        for _ in range(5):
            z = rng.normal(size=2)
            w = z + np.array(s.shift)
            f = tau * (lam * z[0] * z[1] + 0.5 * z[1] ** 2) + e1 * z[0] + e2 * z[1]
            g = tau * (lam * w[0] * w[1] + 0.5 * w[1] ** 2) + s.e_odd * w[0] + s.e_even * w[1] + s.d0
            h = tau * z[0] * z[1] + b1 * z[0] + b2 * z[1]
            assert abs(f - g) <= 1e-12
            assert abs(h - (tau * w[0] * w[1] + s.dc)) <= 1e-12

    def test_odd_term_detected(self):
        s = shift_cross_b(1, -1.0, (1.0, 2.0), (0.0, 2.0))
        assert s.e_odd == pytest.approx(1.0)


class TestCanonicalProblem:
    def test_values_preserved(self):
        rng = np.random.default_rng(2)
        for P in (worked_example(), ineq(E2 @ jordan(-0.5, 2), E2, np.array([0.3, 1.0]), np.array([1.0, 2.0]), -1.0)):
            cf, cp = canon(P)
            for _ in range(5):
                x = rng.normal(size=P.n)
                v = np.linalg.solve(cp.back_map.S, x) + cp.back_map.shift
                assert cp.back_map.to_x(v) == pytest.approx(x)
                assert cp.objective(v) == pytest.approx(P.f(x), abs=1e-10)
                assert cp.constraint(v) == pytest.approx(P.h(x), abs=1e-10)

    def test_zero_pair_objective_only_term(self):
        P = ineq(np.diag([1.0, 0.0]), np.diag([1.0, 0.0]), np.array([0.0, 1.0]), np.zeros(2), -1.0)
        cf, cp = canon(P)
        assert cp.zero_linear_objective
        with pytest.raises(PreconditionViolated):
            build_socp(cp)


class TestSocp:
    def test_worked_example_coefficients(self):
        P = worked_example()
        cf, cp = canon(P)
        sp = build_socp(cp)
        # objective -z1 - 2 y3 + 2 y4 - x4 - 2 and constraint z1 + 2 y3 + 1.5 y4 <= 1.25,
        # expressed in unit-scaled cone variables
        assert sp.zeta.tolist() == [-1.0]
        assert sp.c0 + sp.obj_offset == pytest.approx(-2.0)
        assert sp.delta / sp.alpha == pytest.approx([-1.0, 4 / 3])
        assert sp.c == pytest.approx(-1.25)
        assert sp.kind is Kind.INEQ

    def test_no_2x2(self):
        P = ineq(np.diag([1.0, -1.0]), np.eye(2), np.ones(2), np.zeros(2), -1.0)
        sp = build_socp(canon(P)[1])
        assert sp.m == 0 and sp.l == 2

    def test_equality_same_coefficients(self):
        P = worked_example()
        a = build_socp(canon(P)[1])
        b = build_socp(canon(P.with_kind(Kind.EQ))[1])
        assert b.kind is Kind.EQ and b.lo == b.hi == 0.0
        for f in ("delta", "e", "zeta", "alpha", "b"):
            assert np.array_equal(getattr(a, f), getattr(b, f))

    def test_odd_term_rejected(self):
        P = ineq(E2 @ jordan(-0.5, 2), E2, np.array([1.0, 0.0]), np.zeros(2), -1.0)
        with pytest.raises(OddLinearTermNonzero):
            build_socp(canon(P)[1])


class TestRecover:
    def test_worked_example_point(self):
        P = worked_example()
        cf, cp = canon(P)
        sp = build_socp(cp)
        y3, x4 = 7.0830, 2.0 / 7.0
        y4 = 0.5 * x4**2
        z1 = 1.25 - 2.0 * y3 - 1.5 * y4
        # cone variables are the original coordinates divided by the column scale of S
        s3, s4 = cf.S[2, 0], cf.S[3, 1]
        pt = PrimalPoint(np.array([0.0, x4 / s4]), np.array([y3 / s3**2, y4 / s4**2]), np.array([z1]), sp)
        assert pt.objective == pytest.approx(-3.392857142857, abs=1e-9)
        rec = recover_x(pt, cp)
        assert rec.attained
        assert rec.x[0] == pytest.approx(6.4886, abs=1e-4)
        assert rec.x[1] == pytest.approx(-2.0, abs=1e-9)
        assert abs(rec.x[2]) == pytest.approx(3.7638, abs=1e-4)
        assert rec.x[3] == pytest.approx(0.2857, abs=1e-4)
        assert P.f(rec.x) == pytest.approx(-3.392857142857, abs=1e-9)
        check_recovered(P, rec.x)

    def test_identity_lift(self):
        P = ineq(np.diag([1.0, 2.0]), np.eye(2), np.array([-1.0, 0.5]), np.zeros(2), -4.0)
        cf, cp = canon(P)
        sp = build_socp(cp)
        x = np.array([0.3, -0.2])
        pt = PrimalPoint(x, 0.5 * x**2, np.zeros(0), sp)
        rec = recover_x(pt, cp)
        v = np.linalg.solve(cf.S, rec.x)
        assert np.allclose(np.sort(np.abs(v)), np.sort(np.abs(x)))

    @pytest.mark.parametrize("eps", [1e-2, 1e-6])
    def test_unattained_block(self, eps):
        P = ineq(np.array([[0.0, -1.0], [-1.0, 1.0]]), E2, np.zeros(2), np.zeros(2), 1.0)
        cf, cp = canon(P)
        sp = build_socp(cp)
        pt = PrimalPoint(np.zeros(0), np.zeros(0), np.array([-1.0]), sp)
        rec = recover_x(pt, cp, eps)
        assert not rec.attained
        gap = P.f(rec.x) - pt.objective
        assert 0.0 < gap <= eps
        assert P.is_feasible(rec.x, 1e-12)
