import numpy as np
import pytest

from generators import E2
from gtrs.errors import DimensionTooLarge
from gtrs.oracle import OracleConfig, brute_force_min, probe_unbounded, slemma_mu_grid
from gtrs.problem import Kind, eq, ineq, interval, worked_example
from gtrs.variants import solve


def test_worked_example_upper_bound():
    value, x, note = brute_force_min(worked_example(), OracleConfig(radius=10, resolution=41))
    assert value <= -3.39
    # never below the true optimum
    assert value >= -3.392857142857 - 1e-8
    assert worked_example().is_feasible(x, 1e-8)
    assert "upper bound" in note


def test_convex_ball():
    P = ineq(np.eye(3), np.eye(3), np.zeros(3), np.zeros(3), -1.0)
    res = brute_force_min(P)
    assert res.value == pytest.approx(0.0, abs=1e-8)
    # budget caps the per-axis count in 3-D; the full resolution fits in 2-D
    assert res.spacing >= 20.0 / 40.0
    P2 = ineq(np.eye(2), np.eye(2), np.zeros(2), np.zeros(2), -1.0)
    assert brute_force_min(P2).spacing == pytest.approx(20.0 / 40.0)


def test_thin_equality_set():
    P = eq(np.diag([1.0, 2.0]), np.diag([1.0, 1.0]), np.array([0.5, 0.0]), np.zeros(2), -2.0)
    res = brute_force_min(P)
    assert abs(P.h(res.x)) <= 1e-6
    assert res.value == pytest.approx(solve(P).value, abs=1e-6)


def test_interval_band():
    P = interval(np.diag([-1.0, 1.0]), np.eye(2), np.zeros(2), np.zeros(2), 0.5, 1.0)
    res = brute_force_min(P)
    assert res.value == pytest.approx(-1.0, abs=1e-6)


def test_deterministic_per_seed():
    P = worked_example()
    a = brute_force_min(P, OracleConfig(seed=3))
    b = brute_force_min(P, OracleConfig(seed=3))
    assert a.value == b.value and np.array_equal(a.x, b.x)


def test_dimension_limit():
    with pytest.raises(DimensionTooLarge):
        brute_force_min(ineq(np.eye(9), np.eye(9), np.zeros(9), np.zeros(9), -1.0))


@pytest.mark.parametrize("kw", [{"resolution": 2}, {"radius": 0.0}, {"radius": -1.0}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        OracleConfig(**kw)


def test_probe_finds_descent():
    z = np.zeros(2)
    P = ineq(E2, np.diag([1.0, -1.0]), z, z, -1.0)
    res = probe_unbounded(P, scale=1e3)
    assert res.value < -1e4 and P.is_feasible(res.x, 1e-6)


def test_probe_bounded_problem():
    P = ineq(np.eye(2), np.eye(2), np.zeros(2), np.zeros(2), -1.0)
    assert probe_unbounded(P).value == pytest.approx(0.0, abs=1e-8)


def test_mu_grid():
    # -x^2/2 + 1 + mu (x^2/2 - 1/2): best at mu = 1 with value 1/2
    val, mu = slemma_mu_grid(-np.eye(1), np.zeros(1), 1.0, np.eye(1), np.zeros(1), -0.5)
    assert val == pytest.approx(0.5, abs=1e-9) and mu == pytest.approx(1.0, abs=1e-6)
    val, _ = slemma_mu_grid(-np.eye(1), np.zeros(1), 0.0, np.eye(1), np.zeros(1), -0.5, Kind.INEQ)
    assert val < 0


def test_sandwich_small_random():
    rng = np.random.default_rng(9)
    for _ in range(10):
        n = int(rng.integers(1, 4))
        M = rng.normal(size=(n, n))
        A = M @ M.T + np.eye(n)
        M = rng.normal(size=(n, n))
        P = ineq(M + M.T, A, rng.normal(size=n), rng.normal(size=n), -1.0)
        d = solve(P).value
        o = brute_force_min(P).value
        assert d <= o + 1e-8 * (1 + abs(d))
        assert o - d <= 1e-4 * max(1.0, abs(d))
