"""Brute-force many-body check of the SUSY algebra on tiny systems.

Fermions are represented by Jordan-Wigner strings, bosons by ladder matrices
truncated at ``n_max`` quanta per mode.  The supercharge

    ``Q = Σ_{aβ} (Ψ_f†)_a M_{aβ} (Ψ_b)_β``,   ``M = [[U*, T*], [T, U]]``,

with ``Ψ_f† = (c†, c)`` and ``Ψ_b = (b, b†)``, is the real-space form of a
Bloch supercharge ``q(k)``; ``M`` is exactly the dense real-space matrix of
``q`` in the package's Nambu ordering.  The quadratic Hamiltonians are

    ``H_f = ½ Ψ_f† (M Z M†) Ψ_f``,   ``H_b = ½ Ψ_b† (M† M) Ψ_b``,

and ``Q² = H_f + H_b`` holds as an operator identity, constants included.

Because ``Q`` changes each boson occupation by at most one, the truncated
product ``Q_t Q_t`` agrees with the truncation of ``Q²`` on every basis
state whose boson occupations are all at most ``n_max - 1`` (the safe
sector), so the identity can be tested there exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from . import numerics as nm
from .bloch import realspace_matrix
from .errors import TruncationTooSmall
from .supercharge import Supercharge

MAX_DIM = 200_000


@dataclass(frozen=True)
class FockSpace:
    """Fermion modes (Jordan-Wigner) tensored with truncated boson modes.

    The basis index is ``fermion_index * (n_max+1)^n_b + boson_index`` with
    occupations read most-significant-mode first.
    """

    n_f: int
    n_max: int
    n_b: int | None = None

    def __post_init__(self):
        if self.n_b is None:
            object.__setattr__(self, "n_b", self.n_f)
        if not 1 <= self.n_f <= 4:
            raise ValueError("n_f must be between 1 and 4")
        if not 1 <= self.n_max <= 8:
            raise ValueError("n_max must be between 1 and 8")
        if self.dim > MAX_DIM:
            raise ValueError(f"Fock dimension {self.dim} exceeds {MAX_DIM}")

    @property
    def dim_f(self) -> int:
        return 2 ** self.n_f

    @property
    def dim_b(self) -> int:
        return (self.n_max + 1) ** self.n_b

    @property
    def dim(self) -> int:
        return self.dim_f * self.dim_b

    @cached_property
    def boson_occupations(self) -> np.ndarray:
        """Occupation table of shape ``(dim, n_b)``."""
        occ = np.array(np.unravel_index(np.arange(self.dim_b), (self.n_max + 1,) * self.n_b)).T
        return np.tile(occ, (self.dim_f, 1))

    def safe_mask(self, depth: int = 1) -> np.ndarray:
        """Basis states whose every boson occupation is at most ``n_max - depth``."""
        return np.all(self.boson_occupations <= self.n_max - depth, axis=1)

    # -- single-mode operators ---------------------------------------------

    @cached_property
    def _id_f(self):
        return sp.identity(self.dim_f, format="csr", dtype=complex)

    @cached_property
    def _id_b(self):
        return sp.identity(self.dim_b, format="csr", dtype=complex)

    @cached_property
    def c(self) -> list[sp.csr_matrix]:
        """Fermion annihilators ``c_j`` on the full space."""
        a = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex))
        zs = sp.csr_matrix(np.diag([1.0, -1.0]).astype(complex))
        i2 = sp.identity(2, format="csr", dtype=complex)
        ops = []
        for j in range(self.n_f):
            f = sp.identity(1, format="csr", dtype=complex)
            for i in range(self.n_f):
                f = sp.kron(f, zs if i < j else (a if i == j else i2), format="csr")
            ops.append(sp.kron(f, self._id_b, format="csr"))
        return ops

    @cached_property
    def b(self) -> list[sp.csr_matrix]:
        """Truncated boson annihilators ``b_j`` on the full space."""
        d = self.n_max + 1
        a = sp.diags(np.sqrt(np.arange(1, d, dtype=float)), 1, format="csr", dtype=complex)
        i1 = sp.identity(d, format="csr", dtype=complex)
        ops = []
        for j in range(self.n_b):
            f = sp.identity(1, format="csr", dtype=complex)
            for i in range(self.n_b):
                f = sp.kron(f, a if i == j else i1, format="csr")
            ops.append(sp.kron(self._id_f, f, format="csr"))
        return ops

    def nambu_f(self) -> list[sp.csr_matrix]:
        """``Ψ_f = (c_1..c_n, c_1†..c_n†)``."""
        return self.c + [o.conj().T.tocsr() for o in self.c]

    def nambu_b(self) -> list[sp.csr_matrix]:
        """``Ψ_b = (b_1..b_n, b_1†..b_n†)``."""
        return self.b + [o.conj().T.tocsr() for o in self.b]


@dataclass(frozen=True)
class ManyBodyOperator:
    matrix: sp.csr_matrix
    space: FockSpace
    hermitian: bool = False

    def hermiticity_residual(self, safe_only: bool = True) -> float:
        D = (self.matrix - self.matrix.conj().T).tocsc()
        if safe_only:
            D = D[:, np.flatnonzero(self.space.safe_mask())]
        return float(np.max(np.abs(D.data))) if D.nnz else 0.0


def supercharge_matrix(U: np.ndarray, T: np.ndarray) -> np.ndarray:
    """``M = [[U*, T*], [T, U]]``."""
    U = np.asarray(U, dtype=complex)
    T = np.asarray(T, dtype=complex)
    return np.block([[U.conj(), T.conj()], [T, U]])


def couplings_from_supercharge(q: Supercharge) -> tuple[np.ndarray, np.ndarray]:
    """``(U, T)`` of a Bloch supercharge, read off its real-space matrix."""
    M = realspace_matrix(q.field)
    N = M.shape[0] // 2
    return M[N:, N:].copy(), M[N:, :N].copy()


def quadratic_matrices(U: np.ndarray, T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real-space ``(h_f, h_b) = (M Z M†, M† M)``."""
    M = supercharge_matrix(U, T)
    N = M.shape[0] // 2
    return M @ nm.Z(N) @ nm.dagger(M), nm.dagger(M) @ M


def build_Q(U: np.ndarray, T: np.ndarray, space: FockSpace) -> ManyBodyOperator:
    """Many-body supercharge ``Q = Σ (Ψ_f†)_a M_{aβ} (Ψ_b)_β``."""
    M = supercharge_matrix(U, T)
    if M.shape != (2 * space.n_f, 2 * space.n_b):
        raise ValueError("coupling shape does not match the Fock space")
    Pf = [o.conj().T.tocsr() for o in space.nambu_f()]
    Pb = space.nambu_b()
    Q = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for a in range(M.shape[0]):
        row = sp.csr_matrix((space.dim, space.dim), dtype=complex)
        for beta in range(M.shape[1]):
            if M[a, beta] != 0:
                row = row + M[a, beta] * Pb[beta]
        Q = Q + Pf[a] @ row
    return ManyBodyOperator(Q.tocsr(), space, hermitian=True)


def quadratic_operator(h: np.ndarray, ops: list[sp.csr_matrix]) -> sp.csr_matrix:
    """``½ Σ_ab h_ab Ψ_a† Ψ_b``."""
    dim = ops[0].shape[0]
    H = sp.csr_matrix((dim, dim), dtype=complex)
    for a, oa in enumerate(ops):
        oad = oa.conj().T
        for b_, ob in enumerate(ops):
            if h[a, b_] != 0:
                H = H + (0.5 * h[a, b_]) * (oad @ ob)
    return H.tocsr()


def build_hamiltonians(U: np.ndarray, T: np.ndarray, space: FockSpace) -> tuple[ManyBodyOperator, ManyBodyOperator]:
    """Many-body ``H_f`` and ``H_b`` from the quadratic coefficient matrices."""
    hf, hb = quadratic_matrices(U, T)
    Hf = quadratic_operator(hf, space.nambu_f())
    Hb = quadratic_operator(hb, space.nambu_b())
    return ManyBodyOperator(Hf, space, True), ManyBodyOperator(Hb, space, True)


def verify_susy_algebra(Q: ManyBodyOperator, H_f: ManyBodyOperator, H_b: ManyBodyOperator,
                        space: FockSpace | None = None) -> float:
    """``max_ψ ‖(Q² - H_f - H_b)|ψ⟩‖`` over safe-sector basis states.

    Raises
    ------
    TruncationTooSmall
        If no basis state is safe.
    """
    space = space or Q.space
    cols = np.flatnonzero(space.safe_mask())
    if cols.size == 0:
        raise TruncationTooSmall("safe sector is empty")
    Qm = Q.matrix
    Qc = Qm[:, cols]
    R = (Qm @ Qc - H_f.matrix[:, cols] - H_b.matrix[:, cols]).tocsc()
    norms = np.sqrt(np.asarray(abs(R).power(2).sum(axis=0))).ravel()
    return float(norms.max()) if norms.size else 0.0


def _eom_matrix(H: sp.csr_matrix, ops: list[sp.csr_matrix], cols: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares ``A`` with ``[H, O_β] ≈ Σ_γ A_βγ O_γ`` on the given columns.

    Returns ``A`` and the largest residual entry of the fit.
    """
    sub = [o[:, cols].tocsc() for o in ops]
    comm = [(H @ o - o @ H)[:, cols].tocsc() for o in ops]
    n = len(ops)
    G = np.empty((n, n), dtype=complex)
    B = np.empty((n, n), dtype=complex)
    for g in range(n):
        og = sub[g].conj()
        for h in range(n):
            G[g, h] = og.multiply(sub[h]).sum()
            B[g, h] = og.multiply(comm[h]).sum()
    X = np.linalg.solve(G, B)  # comm_β = Σ_γ X_γβ O_γ
    A = X.T
    res = 0.0
    for beta in range(n):
        fit = sum(A[beta, g] * sub[g] for g in range(n))
        diff = (comm[beta] - fit)
        if diff.nnz:
            res = max(res, float(np.max(np.abs(diff.data))))
    return A, res


class PairingReport(NamedTuple):
    fermion_gaps: np.ndarray
    boson_gaps: np.ndarray
    mismatch: float
    fit_residual: float


def excitation_gaps(H: ManyBodyOperator, species: str) -> tuple[np.ndarray, float]:
    """Single-excitation energies extracted from the many-body equations of motion.

    The commutators ``[H, Ψ_β]`` are fitted by linear combinations of the
    ladder operators on basis states where no truncation can occur; the
    positive eigenvalues of the fitted matrix are the excitation energies.
    """
    space = H.space
    if species == "f":
        ops, cols = space.nambu_f(), np.arange(space.dim)
    elif species == "b":
        ops = space.nambu_b()
        # O raises one boson, H two more: depth 3 keeps H O exact
        cols = np.flatnonzero(space.safe_mask(depth=3))
        if cols.size == 0:
            raise TruncationTooSmall("n_max too small for the boson equations of motion")
    else:
        raise ValueError("species must be 'f' or 'b'")
    A, res = _eom_matrix(H.matrix, ops, cols)
    ev = np.sort(np.linalg.eigvals(A).real)
    n = len(ops) // 2
    return np.sort(np.abs(ev[n:])), res


def spectrum_pairing_check(H_f: ManyBodyOperator, H_b: ManyBodyOperator,
                           space: FockSpace | None = None) -> PairingReport:
    """Compare fermion and boson single-excitation energies of the many-body pair."""
    ef, rf = excitation_gaps(H_f, "f")
    eb, rb = excitation_gaps(H_b, "b")
    return PairingReport(ef, eb, float(np.max(np.abs(ef - eb))), max(rf, rb))


# ---------------------------------------------------------------------------
# Tiny test models
# ---------------------------------------------------------------------------

class TinyModel(NamedTuple):
    name: str
    U: np.ndarray
    T: np.ndarray
    epsilon: np.ndarray | None = None


def single_mode(U: complex = 1.0, T: complex = 0.0) -> TinyModel:
    return TinyModel("single_mode", np.array([[U]], dtype=complex), np.array([[T]], dtype=complex))


def kitaev_two_site(mu: float = 1.0, t: float = 0.7) -> TinyModel:
    """Kitaev supercharge on a periodic ring of two sites."""
    from .models import kitaev_chain

    km = kitaev_chain(mu, t, 2)
    U, T = couplings_from_supercharge(km.q_closed)
    return TinyModel("kitaev_2site", U, T, np.sort(np.asarray(km.epsilon)))


def random_tiny(n: int = 3, seed: int = 0, strength: float = 0.4) -> TinyModel:
    """Random class-none couplings ``U = 1 + strength·R_1``, ``T = strength·R_2``.

    ``R_1``, ``R_2`` have entries uniform in the unit square of the complex
    plane; the identity offset keeps the one-particle gap of order one.
    """
    rng = np.random.default_rng(seed)
    R1 = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    R2 = rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))
    return TinyModel(f"random_{n}_{seed}", np.eye(n) + strength * R1, strength * R2)


def one_particle_energies(U: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Positive eigenvalues of ``h_f = M Z M†`` (reference values)."""
    hf, _ = quadratic_matrices(U, T)
    w = np.linalg.eigvalsh(0.5 * (hf + nm.dagger(hf)))
    return np.sort(w[len(w) // 2:])


class OracleReport(NamedTuple):
    name: str
    dim: int
    hermiticity: float
    algebra_residual: float
    pairing: PairingReport
    epsilon_reference: np.ndarray
    epsilon_mismatch: float

    def as_dict(self) -> dict:
        return {
            "model": self.name,
            "dim": self.dim,
            "hermiticity": self.hermiticity,
            "algebra_residual": self.algebra_residual,
            "fermion_gaps": self.pairing.fermion_gaps.tolist(),
            "boson_gaps": self.pairing.boson_gaps.tolist(),
            "pairing_mismatch": self.pairing.mismatch,
            "eom_fit_residual": self.pairing.fit_residual,
            "epsilon_reference": self.epsilon_reference.tolist(),
            "epsilon_mismatch": self.epsilon_mismatch,
        }


def run_oracle(model: TinyModel, n_max: int = 6) -> OracleReport:
    """Full oracle on one tiny model: Hermiticity, ``Q² = H_f + H_b``, gap pairing."""
    n = model.U.shape[0]
    space = FockSpace(n, n_max)
    Q = build_Q(model.U, model.T, space)
    Hf, Hb = build_hamiltonians(model.U, model.T, space)
    res = verify_susy_algebra(Q, Hf, Hb, space)
    pr = spectrum_pairing_check(Hf, Hb, space)
    ref = model.epsilon if model.epsilon is not None else one_particle_energies(model.U, model.T)
    mism = float(max(np.max(np.abs(pr.fermion_gaps - ref)), np.max(np.abs(pr.boson_gaps - ref))))
    return OracleReport(model.name, space.dim, Q.hermiticity_residual(), res, pr, np.asarray(ref), mism)


def default_suite() -> list[TinyModel]:
    return [single_mode(1.0, 0.0), single_mode(0.0, 1.0), kitaev_two_site(), random_tiny(3, 0)]
