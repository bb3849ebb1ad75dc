"""Supercharges ``q(k)`` generating a target fermion BdG Hamiltonian.

A supercharge is a ``2n x 2n`` Bloch matrix obeying the intrinsic
particle-hole constraint ``X q(k)* X = q(-k)``.  It generates

* the fermion Hamiltonian ``h_f(k) = q(k) Z q(k)†`` and
* the boson Hamiltonian ``h_b(k) = q(k)† q(k)``,

which share their one-particle spectrum.  This module collects the ways of
building ``q`` from a prescribed ``h_f``:

``from_hf_general``
    eigenframe construction ``q = V |Λ|^{1/2}``, valid for any gapped ``h_f``
    but with no locality guarantee.
``two_band_closed_form``
    the explicit ``2 x 2`` formula for ``h_f = d·σ``.
``bdi_strict``, ``aiii_strict``, ``cii_strict``, ``ai_strict``, ``aii_strict``
    polynomial constructions whose real-space range never exceeds that of
    the input Hamiltonian.
``aii_analytic``
    a time-reversal covariant class AII construction that is correct for
    every gapped input but only exponentially local (see its docstring).

It also provides the homotopy transport of a supercharge along a gapped path
of Hamiltonians, the polar-decomposition unitarization and the two gauge
transformations that make either partner number conserving.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import numerics as nm
from .bloch import BlochField, MomentumGrid, as_values, check_phs_supercharge, neg_k
from .errors import GapClosed, GapClosedOnPath, OdeNotConverged

LOCALITY_TAGS = ("strict", "analytic", "nonlocal")
AZ_CLASSES = ("A", "AIII", "AI", "BDI", "D", "DIII", "AII", "CII", "C", "CI")

P_PLUS = 0.5 * (nm.S0 + nm.SX)
P_MINUS = 0.5 * (nm.S0 - nm.SX)
P_UP = 0.5 * (nm.S0 + nm.SZ)
P_DOWN = 0.5 * (nm.S0 - nm.SZ)


def _bkron(a: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kronecker product of a constant matrix with a batched field block."""
    a = np.asarray(a)
    out = a[..., :, None, :, None] * B[..., None, :, None, :]
    s = out.shape
    return out.reshape(s[:-4] + (s[-4] * s[-3], s[-2] * s[-1]))


def _blocks(rows: list[list[np.ndarray]]) -> np.ndarray:
    """``np.block`` for batched matrices (blocks share leading axes)."""
    return np.concatenate([np.concatenate(r, axis=-1) for r in rows], axis=-2)


def _eye_like(B: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.eye(B.shape[-1], dtype=complex), B.shape)


@dataclass(frozen=True)
class Supercharge:
    """A supercharge field with its class label, locality tag and provenance.

    Construction does not enforce the particle-hole constraint: some
    textbook formulas (the two-band closed form) violate it at isolated
    momenta, and callers need to see that.  Use :meth:`validate` for the
    full invariant check.
    """

    field: BlochField
    class_label: str = "none"
    locality: str = "nonlocal"
    construction: str = ""

    def __post_init__(self):
        if self.locality not in LOCALITY_TAGS:
            raise ValueError(f"locality must be one of {LOCALITY_TAGS}")
        if self.class_label != "none" and self.class_label not in AZ_CLASSES:
            raise ValueError(f"unknown class {self.class_label!r}")
        if self.field.kind != "supercharge":
            object.__setattr__(self, "field", self.field.with_values(self.field.values, "supercharge"))

    @property
    def grid(self) -> MomentumGrid:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @property
    def n(self) -> int:
        return self.field.n

    def phs_violation(self) -> float:
        return check_phs_supercharge(self.field)

    def min_sigma(self) -> float:
        return float(np.min(nm.sigma_min(self.values)))

    def h_f(self) -> BlochField:
        q = self.values
        return BlochField(self.grid, q @ nm.Z(self.n) @ nm.dagger(q), "bdg_fermion")

    def h_b(self) -> BlochField:
        q = self.values
        return BlochField(self.grid, nm.dagger(q) @ q, "bdg_boson")

    def validate(self, phs_tol: float = 1e-10, gap_floor: float = nm.GAP_FLOOR) -> "Supercharge":
        """Raise if the PHS constraint or the gap condition fails."""
        v = self.phs_violation()
        if v > phs_tol:
            raise ValueError(f"particle-hole violation {v:.3e} exceeds {phs_tol:.1e}")
        _require_gap(self.values, gap_floor)
        return self


def _require_gap(q: np.ndarray, gap_floor: float) -> None:
    s = nm.sigma_min(q)
    s = np.atleast_1d(s)
    idx = np.unravel_index(int(np.argmin(s)), s.shape)
    if s[idx] <= gap_floor:
        raise GapClosed(idx, float(s[idx]), f"supercharge singular (sigma_min {s[idx]:.3e}) at k-index {idx}")


def reconstruction_error(q, h_f) -> float:
    """``max_k ‖q Z q† - h_f‖_max``."""
    qv = as_values(q.field if isinstance(q, Supercharge) else q)
    hv = as_values(h_f)
    n = qv.shape[-1] // 2
    return nm.max_abs(qv @ nm.Z(n) @ nm.dagger(qv) - hv)


# ---------------------------------------------------------------------------
# General construction
# ---------------------------------------------------------------------------

class PhsFrame(NamedTuple):
    """Particle-hole adapted eigenframe of ``h_f``.

    ``V[k] = [u_{k,1..n} | X u*_{-k,1..n}]`` and ``h_f V = V diag(Λ+(k), -Λ+(-k))``.
    """

    V: np.ndarray
    lam_plus: np.ndarray
    grid: MomentumGrid

    def lam(self) -> np.ndarray:
        """Full diagonal ``Λ(k)`` per grid point."""
        return np.concatenate([self.lam_plus, -neg_k(self.lam_plus[..., None], self.grid)[..., 0]], axis=-1)


def _gap_or_raise(w: np.ndarray, n: int, gap_floor: float, grid: MomentumGrid) -> None:
    absmin = np.min(np.abs(w), axis=-1)
    npos = np.sum(w > 0, axis=-1)
    bad = (absmin <= gap_floor) | (npos != n)
    if np.any(bad):
        # report the worst point
        score = np.where(bad, absmin, np.inf)
        idx = np.unravel_index(int(np.argmin(score)), grid.sizes)
        raise GapClosed(idx, float(absmin[idx]))


def phs_frame(h_f: BlochField, gap_floor: float = nm.GAP_FLOOR) -> PhsFrame:
    """Eigenframe whose negative-energy half is the PHS image of the positive half.

    Only the positive-energy eigenvectors are taken from the solver; the
    negative-energy columns at ``k`` are ``X u*_{-k}``.
    """
    n = h_f.n
    w, U = nm.eigh(h_f.values)
    _gap_or_raise(w, n, gap_floor, h_f.grid)
    upos = U[..., n:]
    lam_plus = w[..., n:]
    Xn = nm.X(n)
    uneg = Xn @ np.conj(neg_k(upos, h_f.grid))
    V = np.concatenate([upos, uneg], axis=-1)
    return PhsFrame(V, lam_plus, h_f.grid)


def from_hf_general(h_f: BlochField, gap_floor: float = nm.GAP_FLOOR) -> Supercharge:
    """``q(k) = V(k) |Λ(k)|^{1/2}`` from the particle-hole adapted frame.

    The boson partner is diagonal, ``h_b(k) = |Λ(k)|``.  No smoothness of
    ``V`` in ``k`` is attempted, so the result is tagged ``nonlocal``.
    """
    frame = phs_frame(h_f, gap_floor)
    absl = np.abs(frame.lam())
    q = frame.V * np.sqrt(absl)[..., None, :]
    return Supercharge(BlochField(h_f.grid, q, "supercharge"), "none", "nonlocal", "general")


def two_band_closed_form(
    grid: MomentumGrid, d_x, d_y, d_z, gap_floor: float = nm.GAP_FLOOR
) -> Supercharge:
    """Closed-form supercharge for ``h_f = d_x σx + d_y σy + d_z σz``.

    ::

        q = 1/√2 [[e^{-iφ} √(|d|+d_z),  √(|d|-d_z)],
                  [√(|d|-d_z),         -e^{iφ} √(|d|+d_z)]]

    with ``e^{iφ} = (d_x + i d_y)/√(d_x² + d_y²)``.  Where ``d_x = d_y = 0``
    the phase is undefined and is set to ``e^{iφ} = 1``.  At such momenta with
    ``d_z > 0`` the formula cannot satisfy the particle-hole constraint for any
    phase; the violation is left in place and reported by
    :meth:`Supercharge.phs_violation`.
    """
    dx, dy, dz = (np.broadcast_to(np.asarray(a, dtype=float), grid.sizes) for a in (d_x, d_y, d_z))
    norm = np.sqrt(dx**2 + dy**2 + dz**2)
    if np.min(norm) <= gap_floor:
        idx = np.unravel_index(int(np.argmin(norm)), grid.sizes)
        raise GapClosed(idx, float(norm[idx]))
    rho = np.hypot(dx, dy)
    safe = rho > 0
    phase = np.where(safe, (dx + 1j * dy) / np.where(safe, rho, 1.0), 1.0)
    sp = np.sqrt(np.maximum(norm + dz, 0.0))
    sm = np.sqrt(np.maximum(norm - dz, 0.0))
    q = np.empty(grid.sizes + (2, 2), dtype=complex)
    q[..., 0, 0] = np.conj(phase) * sp
    q[..., 0, 1] = sm
    q[..., 1, 0] = sm
    q[..., 1, 1] = -phase * sp
    q /= np.sqrt(2.0)
    return Supercharge(BlochField(grid, q, "supercharge"), "D", "nonlocal", "two_band")


# ---------------------------------------------------------------------------
# Target Hamiltonians of the symmetry-class constructions
# ---------------------------------------------------------------------------

def bdi_hamiltonian(h_y: BlochField, h_z: BlochField) -> BlochField:
    """``σy ⊗ h_y + σz ⊗ h_z``."""
    return BlochField(h_y.grid, _bkron(nm.SY, h_y.values) + _bkron(nm.SZ, h_z.values), "bdg_fermion")


def aiii_hamiltonian(h_1: BlochField, h_2: BlochField) -> BlochField:
    """Block form ``[[h1,0,0,-h2],[0,h1(-k)*,h2(-k)*,0],[0,h2(-k)*,-h1(-k)*,0],[-h2,0,0,-h1]]``."""
    g = h_1.grid
    a, b = h_1.values, h_2.values
    am, bm = np.conj(neg_k(a, g)), np.conj(neg_k(b, g))
    O = np.zeros_like(a)
    H = _blocks([[a, O, O, -b], [O, am, bm, O], [O, bm, -am, O], [-b, O, O, -a]])
    return BlochField(g, H, "bdg_fermion")


def cii_hamiltonian(A: BlochField, B: BlochField) -> BlochField:
    """``[[σ0⊗Ã, σy⊗B̃], [σy⊗B̃(-k)*, -σ0⊗Ã(-k)*]]``."""
    g = A.grid
    Am, Bm = np.conj(neg_k(A.values, g)), np.conj(neg_k(B.values, g))
    H = _blocks([
        [_bkron(nm.S0, A.values), _bkron(nm.SY, B.values)],
        [_bkron(nm.SY, Bm), -_bkron(nm.S0, Am)],
    ])
    return BlochField(g, H, "bdg_fermion")


def ai_hamiltonian(h_I: BlochField) -> BlochField:
    """``σz ⊗ h_I``."""
    return BlochField(h_I.grid, _bkron(nm.SZ, h_I.values), "bdg_fermion")


def aii_hamiltonian(h_II: BlochField) -> BlochField:
    """``P_up ⊗ h_II(k) - P_down ⊗ h_II(-k)*``."""
    g = h_II.grid
    hm = np.conj(neg_k(h_II.values, g))
    return BlochField(g, _bkron(P_UP, h_II.values) - _bkron(P_DOWN, hm), "bdg_fermion")


def spin_y(m: int) -> np.ndarray:
    """``σy ⊗ 1_m`` (the spin-1/2 time-reversal matrix on spin ⊗ orbital)."""
    return np.kron(nm.SY, np.eye(m))


# ---------------------------------------------------------------------------
# Strictly local constructions
# ---------------------------------------------------------------------------

def _finish(values: np.ndarray, grid: MomentumGrid, label: str, locality: str, name: str,
            gap_floor: float) -> Supercharge:
    _require_gap(values, gap_floor)
    return Supercharge(BlochField(grid, values, "supercharge"), label, locality, name)


def bdi_strict(h_y: BlochField, h_z: BlochField, gap_floor: float = nm.GAP_FLOOR) -> Supercharge:
    """``q = P+ ⊗ 1 + P- ⊗ (h_z - i h_y)`` with ``P± = (σ0 ± σx)/2``.

    Generates ``σy ⊗ h_y + σz ⊗ h_z`` when ``h_y* = -h_y(-k)`` and
    ``h_z* = h_z(-k)``; respects ``q* = q(-k)``.
    """
    qm = h_z.values - 1j * h_y.values
    q = _bkron(P_PLUS, _eye_like(qm)) + _bkron(P_MINUS, qm)
    return _finish(q, h_y.grid, "BDI", "strict", "bdi_strict", gap_floor)


def aiii_strict(h_1: BlochField, h_2: BlochField, gap_floor: float = nm.GAP_FLOOR) -> Supercharge:
    """``q1 = (A + 1)/2``, ``q2 = i(A - 1)/2`` with ``A = h1 - i h2``.

    Assembled as ``[[q1,0,0,q2],[0,q1(-k)*,-q2(-k)*,0],[0,q2(-k)*,q1(-k)*,0],[-q2,0,0,q1]]``
    in the ordering Nambu ⊗ spin ⊗ orbital.
    """
    g = h_1.grid
    A = h_1.values - 1j * h_2.values
    one = _eye_like(A)
    q1 = 0.5 * (A + one)
    q2 = 0.5j * (A - one)
    q1m, q2m = np.conj(neg_k(q1, g)), np.conj(neg_k(q2, g))
    O = np.zeros_like(A)
    q = _blocks([[q1, O, O, q2], [O, q1m, -q2m, O], [O, q2m, q1m, O], [-q2, O, O, q1]])
    return _finish(q, g, "AIII", "strict", "aiii_strict", gap_floor)


def cii_strict(A: BlochField, B: BlochField, gap_floor: float = nm.GAP_FLOOR) -> Supercharge:
    """Strictly local class CII supercharge.

    With ``Y = σy ⊗ 1`` on spin ⊗ orbital and ``B' = -B̃``::

        ã = (Ã + B'Y + 1)/2,    b̃ = (ÃY + B' - Y)/2,
        q = [[σ0⊗ã, σy⊗b̃], [-σy⊗b̃(-k)*, σ0⊗ã(-k)*]]

    in the ordering Nambu ⊗ other ⊗ spin ⊗ orbital.  The input blocks must
    satisfy ``Ã = Ã†``, ``Y Ã* Y = Ã(-k)``, ``B̃(-k) = B̃(k)^T`` and
    ``Y B̃* Y = -B̃(-k)``; the result generates
    ``[[σ0⊗Ã, σy⊗B̃], [σy⊗B̃(-k)*, -σ0⊗Ã(-k)*]]``.

    The lower block row is the one forced by ``X q* X = q(-k)``.  Using it
    flips the sign of the generated pairing block, which is compensated by
    building ``ã, b̃`` from ``-B̃``.  The lone ``Y`` in ``b̃`` enters with a
    minus sign; with a plus sign the cross terms leave a residual ``σy ⊗ Y``
    in the pairing block.
    """
    g = A.grid
    m2 = A.values.shape[-1]
    if m2 % 2:
        raise ValueError("CII blocks act on spin ⊗ orbital and must have even size")
    Y = spin_y(m2 // 2)
    Av, Bp = A.values, -B.values
    one = _eye_like(Av)
    a = 0.5 * (Av + Bp @ Y + one)
    b = 0.5 * (Av @ Y + Bp - Y)
    am, bm = np.conj(neg_k(a, g)), np.conj(neg_k(b, g))
    q = _blocks([
        [_bkron(nm.S0, a), _bkron(nm.SY, b)],
        [-_bkron(nm.SY, bm), _bkron(nm.S0, am)],
    ])
    return _finish(q, g, "CII", "strict", "cii_strict", gap_floor)


def ai_strict(h_I: BlochField, gap_floor: float = nm.GAP_FLOOR) -> Supercharge:
    """``q = P+ ⊗ h_I + P- ⊗ 1`` generating ``σz ⊗ h_I``; breaks the U(1) symmetry."""
    hv = h_I.values
    q = _bkron(P_PLUS, hv) + _bkron(P_MINUS, _eye_like(hv))
    return _finish(q, h_I.grid, "AI", "strict", "ai_strict", gap_floor)


def _diii_assemble(a: np.ndarray, b: np.ndarray, grid: MomentumGrid) -> np.ndarray:
    am, bm = np.conj(neg_k(a, grid)), np.conj(neg_k(b, grid))
    return _blocks([[a, b], [bm, am]])


def aii_strict(h_II: BlochField, gap_floor: float = nm.GAP_FLOOR) -> Supercharge:
    """``a = (1 + h_II)/2``, ``b = (1 - h_II)/2`` in ``q = [[a, b], [b(-k)*, a(-k)*]]``.

    This choice satisfies ``a a† - b b† = h_II`` but the second requirement
    ``a Y b† = b Y a†`` (``Y = σy ⊗ 1``) reduces to ``[h_II, Y] = 0``.  It
    therefore reproduces the class AII target only when ``h_II`` commutes with
    ``Y``, for example ``h_II = 1_spin ⊗ h_orb``.  For a generic
    time-reversal symmetric ``h_II`` the reconstruction error is of order
    one; :func:`aii_analytic` is a correct alternative that gives up strict
    locality.
    """
    hv = h_II.values
    one = _eye_like(hv)
    q = _diii_assemble(0.5 * (one + hv), 0.5 * (one - hv), h_II.grid)
    return _finish(q, h_II.grid, "AII", "strict", "aii_strict", gap_floor)


def aii_analytic(h_II: BlochField, gap_floor: float = nm.GAP_FLOOR) -> Supercharge:
    """Class AII supercharge from the spectral split of ``h_II``.

    ``a = F(h_II)``, ``b = G(h_II) J`` with ``F(x) = √max(x, 0)``,
    ``G(x) = √max(-x, 0)`` and ``J = iY`` (real).  Then ``a a† - b b† = h_II``
    and ``a Y b† = b Y a† = 0`` because ``F G = 0``.  Time reversal covariance
    follows from ``Y F(h)* Y = F(Y h* Y)``.  ``F`` and ``G`` are analytic on
    the spectrum of a gapped ``h_II``, so the supercharge decays exponentially
    in real space but is not strictly local.
    """
    hv = h_II.values
    m2 = hv.shape[-1]
    if m2 % 2:
        raise ValueError("class AII blocks act on spin ⊗ orbital and must have even size")
    J = 1j * spin_y(m2 // 2)
    w, U = nm.eigh(hv)
    if np.min(np.abs(w)) <= gap_floor:
        idx = np.unravel_index(int(np.argmin(np.min(np.abs(w), axis=-1))), h_II.grid.sizes)
        raise GapClosed(idx, float(np.min(np.abs(w[idx]))))
    Ud = nm.dagger(U)
    a = (U * np.sqrt(np.maximum(w, 0.0))[..., None, :]) @ Ud
    b = (U * np.sqrt(np.maximum(-w, 0.0))[..., None, :]) @ Ud @ J
    q = _diii_assemble(a, b, h_II.grid)
    return _finish(q, h_II.grid, "AII", "analytic", "aii_analytic", gap_floor)


# ---------------------------------------------------------------------------
# Homotopy transport
# ---------------------------------------------------------------------------

def _min_gap(h: np.ndarray) -> tuple[float, tuple[int, ...]]:
    g = np.min(np.abs(np.linalg.eigvalsh(h)), axis=-1)
    idx = np.unravel_index(int(np.argmin(g)), g.shape)
    return float(g[idx]), tuple(int(i) for i in idx)


def _golden_min(f: Callable[[float], float], a: float, b: float, tol: float = 1e-13, maxit: int = 200):
    """Golden-section minimisation of a unimodal function on ``[a, b]``."""
    r = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxit):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - r * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + r * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def scan_path_gap(path: Callable[[float], np.ndarray], samples: int, gap_floor: float = nm.GAP_FLOOR) -> float:
    """Minimum gap along ``λ ∈ [0, 1]``; raise :class:`GapClosedOnPath` if it closes.

    The gap is sampled on a uniform grid, then every sampled local minimum is
    refined by golden-section search so that crossings between samples are
    caught.
    """
    lams = np.linspace(0.0, 1.0, samples + 1)
    gaps = np.empty_like(lams)
    where: list[tuple[int, ...]] = []
    for i, lam in enumerate(lams):
        gaps[i], idx = _min_gap(path(float(lam)))
        where.append(idx)
        if gaps[i] <= gap_floor:
            raise GapClosedOnPath(lam, idx, gaps[i])
    best = float(gaps.min())
    for i in range(len(lams)):
        left = gaps[i - 1] if i > 0 else np.inf
        right = gaps[i + 1] if i < len(lams) - 1 else np.inf
        if gaps[i] <= left and gaps[i] <= right:
            lo, hi = lams[max(i - 1, 0)], lams[min(i + 1, len(lams) - 1)]
            lam_star, g_star = _golden_min(lambda x: _min_gap(path(x))[0], lo, hi)
            if g_star <= gap_floor:
                raise GapClosedOnPath(lam_star, _min_gap(path(lam_star))[1], g_star)
            best = min(best, g_star)
    return best


def _numeric_derivative(path: Callable[[float], np.ndarray], lam: float, step: float = 1e-3) -> np.ndarray:
    """Five-point central difference of ``path`` at ``lam``."""
    d1 = path(lam + step) - path(lam - step)
    d2 = path(lam + 2 * step) - path(lam - 2 * step)
    return (8 * d1 - d2) / (12 * step)


def _rk4(path, dpath, steps: int, shape: tuple[int, ...]) -> np.ndarray:
    v = np.broadcast_to(np.eye(shape[-1], dtype=complex), shape).copy()
    dl = 1.0 / steps

    def rhs(lam, v):
        h = path(lam)
        return 0.5 * np.linalg.solve(h.swapaxes(-1, -2), dpath(lam).swapaxes(-1, -2)).swapaxes(-1, -2) @ v

    for j in range(steps):
        lam = j * dl
        k1 = rhs(lam, v)
        k2 = rhs(lam + dl / 2, v + dl / 2 * k1)
        k3 = rhs(lam + dl / 2, v + dl / 2 * k2)
        k4 = rhs(lam + dl, v + dl * k3)
        v = v + dl / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def homotopy_transport(
    q0: Supercharge,
    path: Callable[[float], np.ndarray],
    steps: int = 128,
    *,
    dpath: Callable[[float], np.ndarray] | None = None,
    ode_tol: float = 1e-6,
    gap_floor: float = nm.GAP_FLOOR,
) -> Supercharge:
    """Transport ``q0`` along ``λ ↦ h_f(k; λ)`` by ``∂v = ½ (∂h) h^{-1} v``.

    Parameters
    ----------
    q0 : Supercharge
        Must generate ``path(0)``.
    path : callable
        ``λ -> array (*grid, 2n, 2n)``.  When ``dpath`` is omitted the
        derivative is taken by central differences, so ``path`` must accept
        arguments slightly outside ``[0, 1]``.
    steps : int
        RK4 steps for the first pass.  The result is compared with a run at
        twice the step count (Richardson estimate); if the estimate exceeds
        ``ode_tol`` the step count is doubled, at most twice.

    Returns
    -------
    Supercharge
        ``q1 = v(1) q0`` with the locality tag of ``q0`` (``v`` is analytic
        in ``k`` along a gapped path).

    Raises
    ------
    GapClosedOnPath
        If ``min_k |eig h_f(k; λ)|`` drops below ``gap_floor`` for some λ.
    OdeNotConverged
        If two step doublings do not reach ``ode_tol``.
    """
    h0 = np.asarray(path(0.0), dtype=complex)
    err0 = reconstruction_error(q0, h0)
    if err0 > 1e-8 * (1.0 + nm.max_abs(h0)):
        raise ValueError(f"q0 does not generate path(0) (error {err0:.2e})")
    scan_path_gap(path, max(steps, 16), gap_floor)
    if dpath is None:
        dpath = lambda lam: _numeric_derivative(path, lam)  # noqa: E731
    shape = q0.values.shape
    n_steps = steps
    v_coarse = _rk4(path, dpath, n_steps, shape)
    for _ in range(3):
        v_fine = _rk4(path, dpath, 2 * n_steps, shape)
        est = nm.max_abs(v_fine - v_coarse) / 15.0
        if est <= ode_tol:
            q1 = v_fine @ q0.values
            return Supercharge(BlochField(q0.grid, q1, "supercharge"), q0.class_label, q0.locality,
                               "homotopy(" + q0.construction + ")")
        n_steps *= 2
        v_coarse = v_fine
    raise OdeNotConverged(f"Richardson error {est:.2e} above {ode_tol:.1e} after {n_steps} steps")


# ---------------------------------------------------------------------------
# Unitarization
# ---------------------------------------------------------------------------

class UnitarizeResult(NamedTuple):
    u: Supercharge
    min_sigma_on_path: float


def unitarize_path(q: Supercharge, lam_samples: int = 101, gap_floor: float = nm.GAP_FLOOR) -> UnitarizeResult:
    """Polar-unitarize ``q = u |q|`` and scan ``σ_min((1-λ) q + λ u)`` over λ.

    Because ``(1-λ) q + λ u = u ((1-λ)|q| + λ)`` the path stays invertible;
    the scanned minimum makes that visible numerically.
    """
    u, _ = nm.polar(q.values, gap_floor=gap_floor)
    smin = np.inf
    for lam in np.linspace(0.0, 1.0, lam_samples):
        smin = min(smin, float(np.min(nm.sigma_min((1 - lam) * q.values + lam * u))))
    return UnitarizeResult(
        Supercharge(BlochField(q.grid, u, "supercharge"), q.class_label, q.locality, "unitarized"), smin
    )


# ---------------------------------------------------------------------------
# Gauge transformations
# ---------------------------------------------------------------------------

class GaugeResult(NamedTuple):
    q: Supercharge
    transform: BlochField


def _abs_hf(q: np.ndarray, gap_floor: float) -> tuple[np.ndarray, np.ndarray]:
    n = q.shape[-1] // 2
    h = q @ nm.Z(n) @ nm.dagger(q)
    h = 0.5 * (h + nm.dagger(h))
    return nm.mat_func(h, "abs", gap_floor=gap_floor), nm.mat_func(h, "abs_inv_sqrt", gap_floor=gap_floor)


def _gauge_S(q: np.ndarray, gap_floor: float) -> np.ndarray:
    absh, _ = _abs_hf(q, gap_floor)
    qinv = np.linalg.inv(q)
    S2 = qinv @ absh @ nm.dagger(qinv)
    S2 = 0.5 * (S2 + nm.dagger(S2))
    return nm.mat_func(S2, "sqrt", gap_floor=gap_floor)


def gauge_boson_number_conserving(q: Supercharge, gap_floor: float = nm.GAP_FLOOR) -> GaugeResult:
    """``q' = q S`` with ``S = (q^{-1} |h_f| q^{-†})^{1/2}``.

    ``S`` is Hermitian positive definite and symplectic (``S Z S = Z``), so
    ``h_f`` is unchanged while ``h_b' = S q† q S`` commutes with ``Z``.
    """
    _require_gap(q.values, gap_floor)
    S = _gauge_S(q.values, gap_floor)
    qp = q.values @ S
    return GaugeResult(
        Supercharge(BlochField(q.grid, qp, "supercharge"), q.class_label, q.locality, "gauge_boson"),
        BlochField(q.grid, S, "map"),
    )


def gauge_fermion_number_conserving(q: Supercharge, gap_floor: float = nm.GAP_FLOOR) -> GaugeResult:
    """``q' = W q`` with ``W = S q† |h_f|^{-1/2}``, ``S`` as in the boson gauge.

    ``W`` is unitary, so ``h_b`` is unchanged, and ``h_f' = W h_f W†``
    commutes with ``Z``.
    """
    _require_gap(q.values, gap_floor)
    S = _gauge_S(q.values, gap_floor)
    _, hinv = _abs_hf(q.values, gap_floor)
    W = S @ nm.dagger(q.values) @ hinv
    qp = W @ q.values
    return GaugeResult(
        Supercharge(BlochField(q.grid, qp, "supercharge"), q.class_label, q.locality, "gauge_fermion"),
        BlochField(q.grid, W, "map"),
    )
