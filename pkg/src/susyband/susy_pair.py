"""SUSY pairs ``(h_f, h_b)`` generated by a supercharge and their identification maps.

Mode conventions
----------------
Operators are written as coefficient rows on the Nambu vector,
``f = w^T Ψ_f`` with ``Ψ_f = (c, c†)`` and ``b = u^T Ψ_b`` with
``Ψ_b = (b, b†)``.  The identification maps act on these rows,
``w^T -> w^T L1`` (fermion to boson) and ``u^T -> u^T L2`` (boson to fermion),
with

    ``L1(k) = |h_f(k)|^{-1/2} q(k)`` and ``L2(k) = -i Z q(k)† |h_f(k)|^{-1/2}``.

Because the maps act on rows, applying ``L1`` first and ``L2`` second is the
matrix product ``L1 L2``.  The fermionic complex structure is therefore
``J_f = L1 L2 = -i sign(h_f)`` and the bosonic one ``J_b = L2 L1``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import numerics as nm
from .bloch import BlochField, check_phs_bdg
from .errors import GapClosed
from .supercharge import PhsFrame, Supercharge, phs_frame

EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class SusyPair:
    """Fermion/boson BdG pair generated by one supercharge.

    Attributes
    ----------
    epsilon : ndarray, shape (*grid, n)
        One-particle energies ``ε_{kα} > 0``, ascending per ``k``.
    frame : PhsFrame
        Particle-hole adapted eigenframe of ``h_f``.
    boson_frame : ndarray, shape (*grid, 2n, 2n)
        ``Z L1(k)† V(k)``, whose columns are eigenvectors of ``Z h_b(k)`` with
        eigenvalues ``Λ(k)``; derived from the fermion frame, not diagonalised.
    """

    q: Supercharge
    h_f: BlochField
    h_b: BlochField
    epsilon: np.ndarray
    frame: PhsFrame
    abs_inv_sqrt: np.ndarray
    boson_frame: np.ndarray

    @property
    def grid(self):
        return self.q.grid

    @property
    def n(self) -> int:
        return self.q.n

    def spectrum_csv(self) -> str:
        """CSV ``k_index_1..k_index_d, alpha, epsilon`` with ``alpha`` starting at 0."""
        d = self.grid.dim
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"k_index_{j + 1}" for j in range(d)] + ["alpha", "epsilon"])
        for idx in np.ndindex(*self.grid.sizes):
            for a in range(self.n):
                w.writerow([*idx, a, "%.17g" % self.epsilon[idx + (a,)]])
        return buf.getvalue()


class IdentificationMaps(NamedTuple):
    L1: BlochField
    L2: BlochField

    def J_f(self) -> BlochField:
        return BlochField(self.L1.grid, self.L1.values @ self.L2.values, "complex_structure")

    def J_b(self) -> BlochField:
        return BlochField(self.L1.grid, self.L2.values @ self.L1.values, "complex_structure")


def build_pair(q: Supercharge, gap_floor: float = nm.GAP_FLOOR) -> SusyPair:
    """Assemble ``h_f = q Z q†`` and ``h_b = q† q`` with their shared spectrum.

    Raises
    ------
    GapClosed
        If some ``ε_{kα}`` falls below ``max(gap_floor, 1e-12)``.
    """
    n = q.n
    qv = q.values
    h_f = q.h_f()
    h_f = h_f.with_values(0.5 * (h_f.values + nm.dagger(h_f.values)))
    h_b = q.h_b()
    h_b = h_b.with_values(0.5 * (h_b.values + nm.dagger(h_b.values)))
    floor = max(gap_floor, EPS_FLOOR)
    frame = phs_frame(h_f, floor)
    eps = frame.lam_plus
    if eps.min() <= floor:
        idx = np.unravel_index(int(np.argmin(eps.min(axis=-1))), q.grid.sizes)
        raise GapClosed(idx, float(eps.min()))
    # |h_f|^{-1/2} from the PHS frame: V diag(|Λ|^{-1/2}) V†
    absl = np.abs(frame.lam())
    V = frame.V
    ais = (V * (absl ** -0.5)[..., None, :]) @ nm.dagger(V)
    L1 = ais @ qv
    boson_frame = nm.Z(n) @ nm.dagger(L1) @ V
    return SusyPair(q, h_f, h_b, eps, frame, ais, boson_frame)


def identification_maps(pair: SusyPair) -> IdentificationMaps:
    """``L1 = |h_f|^{-1/2} q`` and ``L2 = -i Z q† |h_f|^{-1/2}``."""
    qv = pair.q.values
    ais = pair.abs_inv_sqrt
    L1 = ais @ qv
    L2 = -1j * nm.Z(pair.n) @ nm.dagger(qv) @ ais
    return IdentificationMaps(BlochField(pair.grid, L1, "map"), BlochField(pair.grid, L2, "map"))


def boson_covariance(pair: SusyPair) -> BlochField:
    """``G_b = Z q† |h_f|^{-1} q Z = i J_b Z``, Hermitian positive definite.

    ``G_b`` defines the bosonic ground state: its symplectic eigenvalues
    relative to ``Z`` on a subsystem are the bosonic ``λ_b``.
    """
    qZ = pair.q.values @ nm.Z(pair.n)
    ai = pair.abs_inv_sqrt
    G = nm.dagger(qZ) @ ai @ ai @ qZ
    return BlochField(pair.grid, 0.5 * (G + nm.dagger(G)), "complex_structure")


def zhb_spectrum(pair: SusyPair) -> np.ndarray:
    """Sorted real parts of the eigenvalues of ``Z h_b(k)``."""
    ev = np.linalg.eigvals(nm.Z(pair.n) @ pair.h_b.values)
    return np.sort(ev.real, axis=-1)


def spectral_duality_report(pair: SusyPair) -> float:
    """``max_k |sorted spec h_f(k) - sorted spec Z h_b(k)|``."""
    wf = np.linalg.eigvalsh(pair.h_f.values)
    return nm.max_abs(wf - zhb_spectrum(pair))


class PairReport(NamedTuple):
    duality: float
    phs_f: float
    phs_b: float
    complex_structure: float
    boson_frame: float


def validate_pair(pair: SusyPair, maps: IdentificationMaps | None = None) -> PairReport:
    """All pair invariants as violation numbers.

    ``complex_structure`` is ``max(‖J_f² + 1‖, ‖J_b² + 1‖)``; ``boson_frame``
    measures ``Z h_b B - B Λ`` for the boson frame ``B``.
    """
    maps = maps or identification_maps(pair)
    N = 2 * pair.n
    one = np.eye(N)
    Jf, Jb = maps.J_f().values, maps.J_b().values
    cs = max(nm.max_abs(Jf @ Jf + one), nm.max_abs(Jb @ Jb + one))
    lam = pair.frame.lam()
    Bf = pair.boson_frame
    bf = nm.max_abs(nm.Z(pair.n) @ pair.h_b.values @ Bf - Bf * lam[..., None, :])
    return PairReport(
        spectral_duality_report(pair),
        check_phs_bdg(pair.h_f, -1),
        check_phs_bdg(pair.h_b, +1),
        cs,
        bf,
    )
