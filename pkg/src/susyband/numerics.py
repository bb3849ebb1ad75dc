"""Dense complex linear algebra kernels.

Every routine accepts either a single matrix of shape ``(m, m)`` or a stack of
matrices of shape ``(..., m, m)``; the leading axes are treated as a batch so the
same code path serves a single Bloch matrix and a whole Brillouin-zone grid.

Heavy lifting is delegated to LAPACK through :mod:`numpy.linalg`.  A small cyclic
Jacobi solver (:func:`jacobi_eigh`) is kept as an independent reference used by
the test-suite to cross-check the LAPACK path.
"""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .errors import NoConvergence, NotHermitian, SingularAtGapFloor

GAP_FLOOR = 1e-10
"""Default smallest |eigenvalue| tolerated by inverse spectral functions."""

DEGENERACY_TOL = 1e-9
"""Eigenvalues closer than this are treated as one degenerate cluster."""

HERMITIAN_TOL = 1e-12

S0 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"0": S0, "x": SX, "y": SY, "z": SZ}


def X(n: int) -> np.ndarray:
    """Nambu particle-hole exchange ``σx ⊗ 1_n`` of size ``2n``."""
    return np.kron(SX, np.eye(n))


def Z(n: int) -> np.ndarray:
    """Nambu grading ``σz ⊗ 1_n`` of size ``2n``."""
    return np.kron(SZ, np.eye(n))


def kron(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of several matrices, left factor slowest."""
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose acting on the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def max_abs(a: np.ndarray) -> float:
    """Largest entry modulus (0 for empty arrays)."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


class HermEig(NamedTuple):
    """Eigen-decomposition ``H V = V diag(w)`` with ascending ``w``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def check_finite(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return a


def hermiticity_violation(H: np.ndarray) -> float:
    """``max |H - H†|`` over the whole batch."""
    return max_abs(H - dagger(H))


def _require_hermitian(H: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    H = check_finite(np.asarray(H, dtype=complex))
    if H.shape[-1] != H.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {H.shape}")
    scale = max(max_abs(H), np.finfo(float).tiny)
    viol = hermiticity_violation(H)
    if viol > tol * scale:
        raise NotHermitian(f"|H - H^dag| = {viol:.3e} exceeds {tol:.0e}*|H| = {tol*scale:.3e}")
    return 0.5 * (H + dagger(H))


def _first_dominant_index(v: np.ndarray) -> int:
    """Index of the first component whose modulus is within rounding of the largest."""
    mod = np.abs(v)
    top = mod.max()
    return int(np.flatnonzero(mod >= top - 1e-10 * max(top, 1.0))[0])


def fix_phases(V: np.ndarray) -> np.ndarray:
    """Rotate each column so that its dominant component is real and positive.

    Works on stacks; the dominant component is the first entry (in index order)
    whose modulus equals the column maximum up to rounding, which keeps the
    choice deterministic when several entries tie.
    """
    V = np.array(V, dtype=complex, copy=True)
    mod = np.abs(V)
    top = mod.max(axis=-2, keepdims=True)
    mask = mod >= top - 1e-10 * np.maximum(top, 1.0)
    idx = np.argmax(mask, axis=-2)  # first True along the row axis
    comp = np.take_along_axis(V, idx[..., None, :], axis=-2)
    phase = np.where(np.abs(comp) > 0, comp / np.where(comp == 0, 1, np.abs(comp)), 1.0)
    return V * np.conj(phase)


def _canonical_cluster_basis(Vc: np.ndarray) -> np.ndarray:
    """Basis-independent orthonormal frame of the span of ``Vc``.

    The projector onto the span is unique; a pivoted QR of it yields a frame
    that depends only on the subspace.  Columns are then phase-fixed and
    ordered by the index of their dominant component.
    """
    k = Vc.shape[1]
    P = Vc @ Vc.conj().T
    Q, _, _ = scipy.linalg.qr(P, pivoting=True)
    B = fix_phases(Q[:, :k])
    keys = [(_first_dominant_index(B[:, j]), -abs(B[_first_dominant_index(B[:, j]), j])) for j in range(k)]
    order = sorted(range(k), key=lambda j: keys[j])
    return B[:, order]


def _canonicalize(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    V = fix_phases(V)
    if w.shape[-1] < 2:
        return V
    scale = np.maximum(1.0, np.abs(w))
    close = np.diff(w, axis=-1) < DEGENERACY_TOL * scale[..., 1:]
    if not np.any(close):
        return V
    batch_shape = w.shape[:-1]
    flat_w = w.reshape(-1, w.shape[-1])
    flat_V = V.reshape(-1, *V.shape[-2:])
    flat_close = close.reshape(-1, close.shape[-1])
    for b in np.flatnonzero(flat_close.any(axis=-1)):
        start = 0
        m = flat_w.shape[-1]
        while start < m:
            stop = start + 1
            while stop < m and flat_close[b, stop - 1]:
                stop += 1
            if stop - start > 1:
                flat_V[b, :, start:stop] = _canonical_cluster_basis(flat_V[b, :, start:stop])
            start = stop
    return flat_V.reshape(*batch_shape, *V.shape[-2:])


def eigh(H: np.ndarray, *, hermitian_tol: float = HERMITIAN_TOL) -> HermEig:
    """Hermitian eigen-decomposition with deterministic frames.

    Eigenvalues are ascending.  Each eigenvector has its dominant component
    made real-positive; inside degenerate clusters (gap < 1e-9) the frame is
    rebuilt from the cluster projector so that it does not depend on what
    LAPACK happened to return.

    Raises
    ------
    NotHermitian
        If ``|H - H†|`` exceeds ``hermitian_tol * |H|``.
    """
    Hs = _require_hermitian(H, hermitian_tol)
    try:
        w, V = np.linalg.eigh(Hs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NoConvergence(str(exc)) from exc
    return HermEig(w, _canonicalize(w, V))


def eigvalsh(H: np.ndarray, *, hermitian_tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Ascending eigenvalues only (no frame canonicalisation needed)."""
    return np.linalg.eigvalsh(_require_hermitian(H, hermitian_tol))


def jacobi_eigh(H: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60) -> HermEig:
    """Cyclic Jacobi eigensolver for a single complex Hermitian matrix.

    Slow (O(n^3) per sweep, pure Python loops over pivots) but entirely
    independent of LAPACK; used as a test oracle for :func:`eigh`.
    """
    A = _require_hermitian(H).copy()
    if A.ndim != 2:
        raise ValueError("jacobi_eigh works on a single matrix")
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = max(max_abs(A), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.abs(A - np.diag(np.diag(A))) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                ab = abs(b)
                if ab <= 1e-300:
                    continue
                phase = b / ab
                a_pp, a_qq = A[p, p].real, A[q, q].real
                tau = (a_qq - a_pp) / (2.0 * ab)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]] restricted to (p, q)
                G = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                cols = A[:, [p, q]] @ G
                A[:, p], A[:, q] = cols[:, 0], cols[:, 1]
                rows = G.conj().T @ A[[p, q], :]
                A[p, :], A[q, :] = rows[0], rows[1]
                A[p, q] = A[q, p] = 0.0
                vcols = V[:, [p, q]] @ G
                V[:, p], V[:, q] = vcols[:, 0], vcols[:, 1]
    else:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    return HermEig(w, _canonicalize(w, V))


def eig_general(M: np.ndarray) -> np.ndarray:
    """Eigenvalues of a general square matrix in conjugate-paired order.

    Ordering: ascending real part, then descending |Im|, then descending Im,
    so that a pair ``±iλ`` appears as ``(+iλ, -iλ)`` and pairs are adjacent.
    """
    M = check_finite(np.asarray(M, dtype=complex))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("eig_general expects one square matrix")
    try:
        w = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    scale = max(max_abs(w), 1.0)
    re = np.round(w.real / scale, 9)
    im = np.round(w.imag / scale, 9)
    order = np.lexsort((-w.imag, -np.abs(im), re))
    return w[order]


_SPECTRAL: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sqrt": np.sqrt,
    "inv_sqrt": lambda w: 1.0 / np.sqrt(w),
    "abs": np.abs,
    "abs_inv_sqrt": lambda w: 1.0 / np.sqrt(np.abs(w)),
    "sign": np.sign,
    "inv": lambda w: 1.0 / w,
}


def mat_func(H: np.ndarray, f: str, *, gap_floor: float = GAP_FLOOR) -> np.ndarray:
    """Spectral function ``V f(w) V†`` of a Hermitian matrix (or stack).

    Parameters
    ----------
    H : array_like
        Hermitian matrix or stack of them.
    f : {"sqrt", "inv_sqrt", "abs", "abs_inv_sqrt", "sign", "inv"}
        Function applied to the eigenvalues.
    gap_floor : float
        Eigenvalues with modulus below this raise :class:`SingularAtGapFloor`
        for the inverse functions.
    """
    if f not in _SPECTRAL:
        raise ValueError(f"unknown spectral function {f!r}")
    Hs = _require_hermitian(H)
    w, V = np.linalg.eigh(Hs)
    if f in ("inv_sqrt", "abs_inv_sqrt", "inv", "sign"):
        low = np.abs(w)
        if np.any(low < gap_floor) and f != "sign":
            raise SingularAtGapFloor(float(w.flat[np.argmin(low)]), gap_floor)
    if f in ("sqrt", "inv_sqrt"):
        scale = np.max(np.abs(w), axis=-1, keepdims=True)
        if np.any(w < -1e-12 * np.maximum(scale, 1.0)):
            raise ValueError(f"{f} needs a positive semidefinite matrix")
        w = np.clip(w, 0.0, None) if f == "sqrt" else w
    fw = _SPECTRAL[f](w)
    return (V * fw[..., None, :]) @ dagger(V)


def sigma_min(M: np.ndarray) -> np.ndarray | float:
    """Smallest singular value (per matrix for a stack)."""
    s = np.linalg.svd(check_finite(np.asarray(M, dtype=complex)), compute_uv=False)
    out = s[..., -1]
    return float(out) if np.ndim(out) == 0 else out


def polar(M: np.ndarray, *, gap_floor: float = GAP_FLOOR) -> tuple[np.ndarray, np.ndarray]:
    """Right polar decomposition ``M = U P`` with ``P = sqrt(M†M)``.

    Computed from the SVD ``M = W Σ V†`` as ``U = W V†`` and ``P = V Σ V†``,
    which is the same pair as ``P = mat_func(M†M, "sqrt")``, ``U = M P^{-1}``
    but without squaring the condition number.
    """
    M = check_finite(np.asarray(M, dtype=complex))
    W, s, Vh = np.linalg.svd(M)
    smin = s[..., -1]
    if np.any(smin < gap_floor):
        raise SingularAtGapFloor(float(np.min(smin)), gap_floor)
    U = W @ Vh
    P = (dagger(Vh) * s[..., None, :]) @ Vh
    P = 0.5 * (P + dagger(P))
    return U, P
