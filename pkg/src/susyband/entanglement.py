"""Mode entanglement of fermionic and bosonic Gaussian ground states of a SUSY pair.

Real-space objects use the global Nambu index ``sector·(|Ω| n) + site·n + s``
(see :func:`susyband.bloch.realspace_matrix`).  Operators are coefficient rows
``w^T Ψ``; a subsystem is the span of a set of such rows.

Restriction
-----------
For fermions the ground state is encoded in ``S = i J_f = sign(h_f)``.  On a
subsystem spanned by rows ``U`` the anticommutator Gram matrix is ``M = U U†``
and the restricted structure has the generalized spectrum of
``(U S U†, M)``, i.e. ``±λ_f``.  For site subsystems ``M = 1`` and this is the
principal submatrix ``S_AA``.

For bosons the commutator form ``M_b = U Z U†`` is indefinite while
``C_b = U G U†`` with ``G = i J_b Z`` is positive definite.  With the
Cholesky factor ``C_b = L L†`` the eigenvalues of ``L^{-1} M_b L^{-†}`` are
``±1/λ_b``.  A vanishing value corresponds to ``λ_b = ∞`` and is flagged as
diverged.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import numerics as nm
from .bloch import MomentumGrid, realspace_matrix, site_indices
from .errors import IllConditionedSubspace
from .susy_pair import IdentificationMaps, SusyPair, identification_maps

SPECIES = ("fermion", "boson")
COND_MAX = 1e12
DIVERGE_TOL = 1e-12
RANGE_SLACK = 1e-8


@dataclass(frozen=True)
class RealSpaceStructure:
    """Real-space complex structure ``J`` of one species."""

    J: np.ndarray
    species: str
    grid: MomentumGrid
    n: int

    def __post_init__(self):
        if self.species not in SPECIES:
            raise ValueError(f"species must be one of {SPECIES}")

    @property
    def modes(self) -> int:
        return self.grid.volume * self.n

    def Zfull(self) -> np.ndarray:
        return np.diag(np.r_[np.ones(self.modes), -np.ones(self.modes)]).astype(complex)

    def metric(self) -> np.ndarray:
        """``S = iJ`` for fermions, ``G = i J Z`` for bosons (both Hermitian)."""
        if self.species == "fermion":
            M = 1j * self.J
        else:
            M = 1j * self.J @ self.Zfull()
        return 0.5 * (M + nm.dagger(M))

    def square_violation(self) -> float:
        return nm.max_abs(self.J @ self.J + np.eye(self.J.shape[0]))

    def block(self, site_from: int, site_to: int) -> np.ndarray:
        """The ``2n x 2n`` Nambu block of ``J`` coupling two sites."""
        a = site_indices(self.grid, self.n, [site_from])
        b = site_indices(self.grid, self.n, [site_to])
        return self.J[np.ix_(a, b)]


def realspace_structure(pair: SusyPair, species: str, maps: IdentificationMaps | None = None) -> RealSpaceStructure:
    """Inverse Fourier transform of ``J_f = L1 L2`` or ``J_b = L2 L1``."""
    maps = maps or identification_maps(pair)
    Jk = maps.J_f() if species == "fermion" else maps.J_b()
    if species not in SPECIES:
        raise ValueError(f"species must be one of {SPECIES}")
    return RealSpaceStructure(realspace_matrix(Jk), species, pair.grid, pair.n)


class RealSpaceMaps(NamedTuple):
    L1: np.ndarray
    L2: np.ndarray
    grid: MomentumGrid
    n: int


def realspace_maps(maps: IdentificationMaps) -> RealSpaceMaps:
    return RealSpaceMaps(realspace_matrix(maps.L1), realspace_matrix(maps.L2), maps.L1.grid, maps.L1.n)


@dataclass(frozen=True)
class SubsystemSpec:
    """A subsystem given by sites (all internal states, both sectors) or by basis rows."""

    grid: MomentumGrid
    n: int
    sites: tuple | None = None
    basis: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if (self.sites is None) == (self.basis is None):
            raise ValueError("give exactly one of sites or basis")
        if self.basis is not None:
            B = np.asarray(self.basis, dtype=complex)
            if B.ndim != 2 or B.shape[1] != 2 * self.grid.volume * self.n or B.shape[0] % 2:
                raise ValueError("basis must be (2m, 2N) with an even number of rows")
            object.__setattr__(self, "basis", B)
        else:
            object.__setattr__(self, "sites", tuple(self.sites))

    @classmethod
    def from_sites(cls, grid: MomentumGrid, n: int, sites: Iterable) -> "SubsystemSpec":
        return cls(grid, n, sites=tuple(sites))

    @classmethod
    def contiguous(cls, grid: MomentumGrid, n: int, l: int, start: int = 0) -> "SubsystemSpec":
        if grid.dim != 1:
            raise ValueError("contiguous subsystems are defined for 1D grids")
        return cls(grid, n, sites=tuple((start + j) % grid.sizes[0] for j in range(l)))

    @property
    def dim(self) -> int:
        if self.basis is not None:
            return self.basis.shape[0]
        return 2 * self.n * len(self.sites)

    def indices(self) -> np.ndarray:
        if self.sites is None:
            raise ValueError("subsystem is given by an explicit basis")
        return site_indices(self.grid, self.n, self.sites)

    def rows(self) -> np.ndarray:
        """Basis rows; for site subsystems, rows of the identity."""
        if self.basis is not None:
            return self.basis
        N2 = 2 * self.grid.volume * self.n
        return np.eye(N2, dtype=complex)[self.indices()]

    def conjugation_defect(self) -> float:
        """Distance of the particle-hole image of the rows from their span."""
        U = self.rows()
        N = U.shape[1] // 2
        Xf = np.block([[np.zeros((N, N)), np.eye(N)], [np.eye(N), np.zeros((N, N))]])
        C = np.conj(U) @ Xf
        Q, _ = np.linalg.qr(U.T)
        resid = C.T - Q @ (Q.conj().T @ C.T)
        return float(np.max(np.abs(resid))) if resid.size else 0.0


def mode_entropy(lam: float, species: str) -> float:
    """``s(x) = ((1+x)/2)|log((1+x)/2)| - (|1-x|/2) log(|1-x|/2)``.

    ``0 log 0`` is taken as 0.  A bosonic ``λ = ∞`` returns ``inf``.
    """
    x = float(lam)
    if species == "fermion":
        if not (-RANGE_SLACK <= x <= 1 + RANGE_SLACK):
            raise ValueError(f"fermionic lambda {x} outside [0, 1]")
    elif species == "boson":
        if x < 1 - RANGE_SLACK:
            raise ValueError(f"bosonic lambda {x} below 1")
        if np.isinf(x):
            return float("inf")
    else:
        raise ValueError(f"species must be one of {SPECIES}")
    x = abs(x)
    a = (1 + x) / 2
    b = abs(1 - x) / 2
    ta = a * abs(np.log(a)) if a > 0 else 0.0
    tb = b * np.log(b) if b > 0 else 0.0
    return float(ta - tb)


@dataclass(frozen=True)
class EntanglementReport:
    """Restricted eigenvalues ``λ_i`` (ascending) and their entropies.

    ``total`` sums the finite entropies; ``diverged_count`` counts bosonic
    modes with ``λ_b = ∞`` whose entropy is not a number.
    """

    species: str
    lambdas: np.ndarray
    entropies: np.ndarray
    total: float
    diverged_count: int
    vectors: np.ndarray | None = field(default=None, compare=False, repr=False)

    def to_json(self) -> str:
        from .cli import dumps  # local import keeps the float formatting in one place

        return dumps({
            "species": self.species,
            "lambdas": [None if np.isinf(x) else float(x) for x in self.lambdas],
            "entropies": [None if np.isinf(x) else float(x) for x in self.entropies],
            "total": float(self.total),
            "diverged_count": int(self.diverged_count),
        })


def _pair_halves(mu: np.ndarray) -> np.ndarray:
    """``λ_i`` from a spectrum symmetric under ``μ -> -μ``: average of each ± pair."""
    mu = np.sort(mu)
    m = len(mu) // 2
    return np.sort(0.5 * (mu[::-1][:m] - mu[:m]))


def _cholesky_whiten(M: np.ndarray, C: np.ndarray, what: str) -> np.ndarray:
    """``L^{-1} C L^{-†}`` for ``M = L L†`` (``M`` Hermitian positive definite)."""
    M = 0.5 * (M + nm.dagger(M))
    w = np.linalg.eigvalsh(M)
    if w[0] <= 0 or w[-1] / w[0] > COND_MAX:
        cond = np.inf if w[0] <= 0 else w[-1] / w[0]
        raise IllConditionedSubspace(f"{what} condition number {cond:.3e} exceeds {COND_MAX:.0e}")
    L = np.linalg.cholesky(M)
    Li = np.linalg.inv(L)
    K = Li @ C @ nm.dagger(Li)
    return 0.5 * (K + nm.dagger(K))


def restrict(J: RealSpaceStructure, sub: SubsystemSpec) -> EntanglementReport:
    """Restricted complex structure eigenvalues ``λ`` of a subsystem.

    Raises
    ------
    IllConditionedSubspace
        If the relevant positive Gram matrix has condition number above 1e12.
    """
    metric = J.metric()
    if J.species == "fermion":
        if sub.sites is not None:
            A = sub.indices()
            K = metric[np.ix_(A, A)]
            mu, vecs = np.linalg.eigh(0.5 * (K + nm.dagger(K)))
        else:
            U = sub.rows()
            K = _cholesky_whiten(U @ nm.dagger(U), U @ metric @ nm.dagger(U), "anticommutator Gram")
            mu, vecs = np.linalg.eigh(K)
        lam = _pair_halves(mu)
        lam = np.clip(lam, 0.0, None)
        ent = np.array([mode_entropy(min(x, 1.0), "fermion") for x in lam])
        return EntanglementReport("fermion", lam, ent, float(ent.sum()), 0, vecs)
    U = sub.rows()
    Zf = J.Zfull()
    Mb = U @ Zf @ nm.dagger(U)
    Cb = U @ metric @ nm.dagger(U)
    K = _cholesky_whiten(Cb, Mb, "boson covariance")
    mu, vecs = np.linalg.eigh(K)
    nu = _pair_halves(mu)
    with np.errstate(divide="ignore"):
        lam = np.where(nu > DIVERGE_TOL, 1.0 / np.maximum(nu, DIVERGE_TOL), np.inf)
    lam = np.sort(lam)
    ent = np.array([mode_entropy(max(x, 1.0), "boson") for x in lam])
    finite = np.isfinite(ent)
    return EntanglementReport("boson", lam, ent, float(ent[finite].sum()), int((~finite).sum()), vecs)


def dual_subsystem(maps, sub: SubsystemSpec, direction: str = "f->b") -> SubsystemSpec:
    """Image of a subsystem under the real-space identification map.

    ``direction`` is ``"f->b"`` (rows times ``L1``) or ``"b->f"`` (rows times
    ``L2``).  ``maps`` may be :class:`IdentificationMaps` or
    :class:`RealSpaceMaps`.
    """
    rs = maps if isinstance(maps, RealSpaceMaps) else realspace_maps(maps)
    if direction == "f->b":
        L = rs.L1
    elif direction == "b->f":
        L = rs.L2
    else:
        raise ValueError("direction must be 'f->b' or 'b->f'")
    return SubsystemSpec(sub.grid, sub.n, basis=sub.rows() @ L)


class DualityResult(NamedTuple):
    max_deviation: float
    diverged_count: int
    lambda_f: np.ndarray
    lambda_b: np.ndarray


def duality_check(J_f: RealSpaceStructure, J_b: RealSpaceStructure, maps, sub: SubsystemSpec) -> DualityResult:
    """``max |λ_f λ_b - 1|`` between a fermionic subsystem and its ``L1`` image.

    Sorted ``λ_f`` (ascending) is paired with sorted ``λ_b`` (descending).
    Pairs with ``λ_b = ∞`` are skipped and counted in ``diverged_count``.
    """
    rf = restrict(J_f, sub)
    rb = restrict(J_b, dual_subsystem(maps, sub, "f->b"))
    lf = rf.lambdas
    lb = np.sort(rb.lambdas)[::-1]
    ok = np.isfinite(lb)
    dev = float(np.max(np.abs(lf[ok] * lb[ok] - 1.0))) if ok.any() else 0.0
    return DualityResult(dev, int((~ok).sum()), lf, np.sort(rb.lambdas))


# ---------------------------------------------------------------------------
# Edge modes and squeezing
# ---------------------------------------------------------------------------

class EdgeMode(NamedTuple):
    """Fermionic mode ``c' = Σ_i α_i c_i + β_i c_i†`` of a subsystem.

    ``w`` is the full coefficient row (length ``2N``) and ``lam`` the
    restricted eigenvalue of the mode.
    """

    alpha: np.ndarray
    beta: np.ndarray
    lam: float
    w: np.ndarray
    sites: tuple


def edge_mode_profile(J_f: RealSpaceStructure, sub: SubsystemSpec) -> EdgeMode:
    """Eigenmode of the restricted fermionic structure with the smallest ``λ``.

    The mode is normalised to ``{c', c'†} = 1``.  Of the ``±λ`` pair the
    eigenvector with ``μ ≥ 0`` is used.
    """
    if J_f.species != "fermion":
        raise ValueError("edge modes are defined for the fermionic structure")
    A = sub.indices()
    K = J_f.metric()[np.ix_(A, A)]
    mu, V = nm.eigh(0.5 * (K + nm.dagger(K)))
    order = np.lexsort((-mu, np.round(np.abs(mu), 14)))
    j = int(order[0])
    v = V[:, j]
    if mu[j] < 0:
        # partner with the opposite sign: same |μ|, use the PHS image
        Xl = np.roll(np.eye(len(A)), len(A) // 2, axis=0)
        v = Xl @ np.conj(v)
    w_local = np.conj(v)
    w = np.zeros(J_f.J.shape[0], dtype=complex)
    w[A] = w_local
    m = len(sub.sites) * J_f.n
    alpha = w_local[:m].reshape(len(sub.sites), J_f.n)
    beta = w_local[m:].reshape(len(sub.sites), J_f.n)
    return EdgeMode(alpha, beta, float(abs(mu[j])), w, sub.sites)


def boson_image(maps, w: np.ndarray) -> np.ndarray:
    """Coefficient row ``w^T L1`` of the bosonic image of a fermionic mode."""
    rs = maps if isinstance(maps, RealSpaceMaps) else realspace_maps(maps)
    return np.asarray(w) @ rs.L1


def squeezing_commutator(maps, mode) -> float:
    """``[L1(c'), L1(c')†]`` for a fermionic mode (row vector or :class:`EdgeMode`).

    Equals the ground-state expectation of ``[c', c'†]``; a small value means
    the normalised bosonic image is strongly squeezed.
    """
    w = mode.w if isinstance(mode, EdgeMode) else np.asarray(mode)
    u = boson_image(maps, w)
    N = len(u) // 2
    z = np.r_[np.ones(N), -np.ones(N)]
    return float(np.real(np.sum(z * np.abs(u) ** 2)))


def site_weights(w: np.ndarray, grid: MomentumGrid, n: int) -> np.ndarray:
    """``Σ_s |α_{i s}|² + |β_{i s}|²`` per site for a full coefficient row."""
    V = grid.volume
    a = np.abs(w[: V * n]) ** 2 + np.abs(w[V * n:]) ** 2
    return a.reshape(V, n).sum(axis=1)


def _centred_offsets(sites: Sequence[int], N: int) -> np.ndarray:
    s = np.asarray(sites, dtype=float)
    offs = (s - s[0]) % N
    centre = s[0] + offs.max() / 2.0
    return (np.arange(N) - centre + N / 2.0) % N - N / 2.0


def mirror_ratio(weights: np.ndarray, sites: Sequence[int], N: int, within: bool = True) -> float:
    """Left/right weight ratio about the centre of a contiguous 1D subsystem.

    With ``within=True`` (default) only the subsystem's own sites count, i.e.
    the ratio compares the two halves of the subsystem support.  With
    ``within=False`` the whole ring is split at the centre and its antipode.
    Sites exactly at the centre are not counted.
    """
    d = _centred_offsets(sites, N)
    mask = np.zeros(N, dtype=bool)
    if within:
        mask[np.asarray(sites) % N] = True
    else:
        mask[:] = True
    left = float(weights[mask & (d < -1e-9)].sum())
    right = float(weights[mask & (d > 1e-9)].sum())
    return left / right


def mirror_asymmetry(weights: np.ndarray, sites: Sequence[int], N: int) -> float:
    """``Σ_i |w_i - w_{σ(i)}| / Σ_i w_i`` with ``σ`` the reflection about the subsystem centre.

    Zero for a mirror-symmetric profile, at most 2.
    """
    s = np.asarray(sites)
    centre2 = int(2 * s[0] + ((s - s[0]) % N).max())  # twice the centre, an integer
    refl = (centre2 - np.arange(N)) % N
    return float(np.abs(weights - weights[refl]).sum() / weights.sum())


# ---------------------------------------------------------------------------
# Scaling curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingCurve:
    l: np.ndarray
    S_f: np.ndarray
    S_b: np.ndarray
    diverged: np.ndarray

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["l", "S_f", "S_b"])
        for l, f, b in zip(self.l, self.S_f, self.S_b):
            w.writerow([int(l), "%.17g" % f, "%.17g" % b])
        return buf.getvalue()


class PairStructures(NamedTuple):
    J_f: RealSpaceStructure
    J_b: RealSpaceStructure
    maps: RealSpaceMaps


def pair_structures(pair: SusyPair) -> PairStructures:
    maps = identification_maps(pair)
    return PairStructures(
        realspace_structure(pair, "fermion", maps),
        realspace_structure(pair, "boson", maps),
        realspace_maps(maps),
    )


def entropy_scaling_curve(pair: SusyPair, l_list: Sequence[int], start: int = 0,
                          structures: PairStructures | None = None) -> ScalingCurve:
    """``S_f(l)`` for sites ``start .. start+l-1`` and ``S_b(l)`` of the dual subsystem."""
    if pair.grid.dim != 1:
        raise ValueError("scaling curves are defined for 1D pairs")
    st = structures or pair_structures(pair)
    Sf, Sb, dv = [], [], []
    for l in l_list:
        sub = SubsystemSpec.contiguous(pair.grid, pair.n, int(l), start)
        rf = restrict(st.J_f, sub)
        rb = restrict(st.J_b, dual_subsystem(st.maps, sub, "f->b"))
        Sf.append(rf.total)
        Sb.append(rb.total)
        dv.append(rb.diverged_count)
    return ScalingCurve(np.asarray(l_list, dtype=int), np.array(Sf), np.array(Sb), np.array(dv))


def report_json(rep: EntanglementReport) -> dict:
    """Plain-dict form of a report (``inf`` mapped to ``None``)."""
    return json.loads(rep.to_json())
