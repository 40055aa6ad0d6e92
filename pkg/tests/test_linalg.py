import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtrs import linalg
from gtrs.errors import NonSquare, NotSymmetric


def test_sym_eig_identity():
    ed = linalg.sym_eig(np.eye(3))
    assert np.allclose(ed.eigenvalues, 1.0)
    assert np.allclose(ed.eigenvectors.T @ ed.eigenvectors, np.eye(3))


def test_sym_eig_sorted():
    ed = linalg.sym_eig(np.diag([2.0, 1.5]))
    assert np.allclose(ed.eigenvalues, [1.5, 2.0])


def test_sym_eig_reconstruction():
    rng = np.random.default_rng(6)
    Q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    lam = rng.normal(size=6)
    M = (Q * lam) @ Q.T
    ed = linalg.sym_eig(M)
    assert np.linalg.norm(ed.reconstruct() - M) <= 1e-10
    assert np.allclose(np.sort(lam), ed.eigenvalues)


def test_sym_eig_rejects_bad_input():
    with pytest.raises(NonSquare):
        linalg.sym_eig(np.ones((2, 3)))
    with pytest.raises(NotSymmetric):
        linalg.sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


@pytest.mark.parametrize(
    "M, expected",
    [
        (np.diag([2.0, 0.0]), np.diag([0.5, 0.0])),
        (np.eye(3), np.eye(3)),
    ],
)
def test_pseudoinverse_known(M, expected):
    assert np.allclose(linalg.pseudoinverse(M), expected)


def test_pseudoinverse_rank_one():
    v = np.array([1.2, 1.6, 0.0])  # norm 2
    M = np.outer(v, v)
    P = linalg.pseudoinverse(M)
    assert np.allclose(P, M / 16.0)
    # Penrose identities
    assert np.allclose(M @ P @ M, M)
    assert np.allclose(P @ M @ P, P)


def test_null_space_basis():
    assert linalg.null_space_basis(np.zeros((2, 2))).shape == (2, 2)
    assert linalg.null_space_basis(np.eye(3)).shape == (3, 0)
    v = linalg.null_space_basis(np.array([[1.0, -1.0]]))
    assert v.shape == (2, 1)
    assert np.allclose(np.abs(v[:, 0]), [1 / np.sqrt(2)] * 2)


def test_nonsingular_shift_cases():
    assert linalg.nonsingular_shift(np.eye(3), np.diag([1.0, -2.0, 0.0])) == 0.0
    mu = linalg.nonsingular_shift(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    assert mu is not None and abs(np.linalg.det(np.diag([1.0, mu]))) > 0
    assert linalg.nonsingular_shift(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])) is None


def test_nonsingular_shift_proportional_rank_deficient():
    # a - d cancels exactly; that must not count as nonsingular
    rng = np.random.default_rng(1)
    S = rng.normal(size=(2, 2))
    A = S.T @ np.diag([0.0, 1.0]) @ S
    assert linalg.nonsingular_shift(A / np.linalg.norm(A), A / np.linalg.norm(A)) is None


def test_range_and_psd_helpers():
    M = np.diag([1.0, 0.0])
    assert linalg.in_range(M, np.array([3.0, 0.0]))
    assert not linalg.in_range(M, np.array([0.0, 1.0]))
    assert linalg.is_psd(M)
    assert not linalg.is_psd(-np.eye(2))
    assert linalg.numerical_rank(M) == 1
    assert linalg.range_basis(M).shape == (2, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=10_000))
def test_pseudoinverse_penrose_property(n, seed):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(0, n + 1))
    X = rng.normal(size=(n, r))
    M = X @ np.diag(rng.choice([-1.0, 1.0], size=r)) @ X.T
    P = linalg.pseudoinverse(M)
    scale = 1.0 + np.linalg.norm(M) * np.linalg.norm(P)
    assert np.linalg.norm(M @ P @ M - M) <= 1e-8 * scale * (1 + np.linalg.norm(M))
    assert np.allclose(P, P.T)
