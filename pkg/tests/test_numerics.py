import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from susyband import numerics as nm
from susyband.errors import NotHermitian, SingularAtGapFloor

from conftest import random_hermitian


def test_eigh_identity_and_pauli():
    w, V = nm.eigh(np.eye(2))
    np.testing.assert_allclose(w, [1, 1])
    np.testing.assert_allclose(V, np.eye(2))
    np.testing.assert_allclose(nm.eigh(nm.SZ).eigenvalues, [-1, 1])


def test_eigh_round_trip_random(rng):
    H = random_hermitian(rng, 8)
    w, V = nm.eigh(H)
    assert nm.max_abs(V @ np.diag(w) @ V.conj().T - H) < 1e-10
    assert np.all(np.diff(w) >= 0)


def test_eigh_matches_jacobi_oracle(rng):
    H = random_hermitian(rng, 7)
    w, V = nm.eigh(H)
    wj, Vj = nm.jacobi_eigh(H)
    np.testing.assert_allclose(w, wj, atol=1e-12)
    # nondegenerate spectrum: canonical phases make the frames identical
    np.testing.assert_allclose(V, Vj, atol=1e-10)


def test_eigh_degenerate_frame_is_basis_independent(rng):
    # same operator written in two different eigenbases of a degenerate cluster
    U, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    H = U @ np.diag([1.0, 1.0, 2.0, 3.0]) @ U.conj().T
    R, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    U2 = U.copy()
    U2[:, :2] = U[:, :2] @ R
    H2 = U2 @ np.diag([1.0, 1.0, 2.0, 3.0]) @ U2.conj().T
    np.testing.assert_allclose(nm.eigh(H).eigenvectors, nm.eigh(H2).eigenvectors, atol=1e-10)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        nm.eigh(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eig_general_examples(rng):
    # iσy = [[0, 1], [-1, 0]] has +-i; σy itself is Hermitian with +-1
    np.testing.assert_allclose(nm.eig_general(np.array([[0, 1], [-1, 0]])), [1j, -1j], atol=1e-14)
    np.testing.assert_allclose(nm.eig_general(np.array([[0, 2.5], [-2.5, 0]])), [2.5j, -2.5j], atol=1e-14)
    np.testing.assert_allclose(np.sort(nm.eig_general(nm.SY).real), [-1, 1], atol=1e-14)
    M = rng.normal(size=(6, 6))
    roots = np.roots(np.poly(M))
    ev = nm.eig_general(M)
    # match each root to its nearest eigenvalue
    d = np.abs(ev[:, None] - roots[None, :]).min(axis=1)
    assert d.max() < 1e-8


def test_mat_func_examples(rng):
    np.testing.assert_allclose(nm.mat_func(np.eye(3), "sqrt"), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(nm.mat_func(nm.SZ, "abs"), np.eye(2), atol=1e-15)
    A = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    H = A @ A.conj().T + 0.5 * np.eye(5)
    S = nm.mat_func(H, "inv_sqrt")
    assert nm.max_abs(S @ H @ S - np.eye(5)) < 1e-10


def test_mat_func_gap_floor():
    with pytest.raises(SingularAtGapFloor):
        nm.mat_func(np.diag([1.0, 1e-12]), "abs_inv_sqrt")
    # a larger floor rejects matrices that pass the default
    nm.mat_func(np.diag([1.0, 1e-6]), "inv")
    with pytest.raises(SingularAtGapFloor):
        nm.mat_func(np.diag([1.0, 1e-6]), "inv", gap_floor=1e-5)


def test_polar_examples(rng):
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    U, P = nm.polar(Q)
    np.testing.assert_allclose(U, Q, atol=1e-12)
    np.testing.assert_allclose(P, np.eye(4), atol=1e-12)
    U, P = nm.polar(2 * np.eye(3))
    np.testing.assert_allclose(U, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(P, 2 * np.eye(3), atol=1e-14)
    M = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    U, P = nm.polar(M)
    assert nm.max_abs(U @ P - M) < 1e-10
    assert nm.max_abs(P @ P - M.conj().T @ M) < 1e-10
    assert np.all(np.linalg.eigvalsh(P) > 0)


def test_sigma_min(rng):
    assert nm.sigma_min(np.eye(3)) == pytest.approx(1.0)
    assert nm.sigma_min(np.diag([3.0, 0.5])) == pytest.approx(0.5)
    M = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    ref = np.sqrt(np.linalg.eigvalsh(M.conj().T @ M).min())
    assert nm.sigma_min(M) == pytest.approx(ref, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 32), seed=st.integers(0, 2**31 - 1))
def test_eigh_round_trip_property(n, seed):
    H = random_hermitian(np.random.default_rng(seed), n)
    w, V = nm.eigh(H)
    assert nm.max_abs(V @ np.diag(w) @ V.conj().T - H) <= 1e-10 * (1 + nm.max_abs(H))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**31 - 1))
def test_sign_times_abs_property(n, seed):
    H = random_hermitian(np.random.default_rng(seed), n)
    if np.min(np.abs(np.linalg.eigvalsh(H))) <= nm.GAP_FLOOR:
        return
    assert nm.max_abs(nm.mat_func(H, "sign") @ nm.mat_func(H, "abs") - H) < 1e-10
