"""Brillouin-zone grids, Bloch matrix fields, symmetry checks and Fourier tools.

Fourier convention
------------------
A Bloch field ``F(k)`` and its real-space couplings ``F_r`` are related by::

    F_r  = |Ω|^{-1} Σ_k F(k) e^{-i k·r}
    F(k) = Σ_r F_r e^{+i k·r}

so that ``F(k) = e^{ik}`` is a coupling at displacement ``r = +1``.  The
real-space matrix of a translation-invariant operator has block
``(r, r')`` equal to ``F_{r-r'}``; with this choice products and adjoints of
Bloch fields map to products and adjoints of real-space matrices.

Nambu ordering: within every one-particle matrix the first ``n`` rows/columns
form the annihilation sector and the last ``n`` the creation sector.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import numerics as nm
from .errors import GridMismatch

KINDS = ("supercharge", "bdg_fermion", "bdg_boson", "map", "complex_structure", "block")


@dataclass(frozen=True)
class MomentumGrid:
    """Hypercubic momentum grid ``k_j = 2π m_j / N_j`` with even ``N_j``."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not 1 <= len(sizes) <= 3:
            raise ValueError("grid dimension must be 1, 2 or 3")
        if any(s <= 0 or s % 2 for s in sizes):
            raise GridMismatch(f"grid sizes must be positive and even, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def dim(self) -> int:
        return len(self.sizes)

    @property
    def volume(self) -> int:
        return int(np.prod(self.sizes))

    def axes(self) -> list[np.ndarray]:
        """Per-axis momentum values."""
        return [2 * np.pi * np.arange(N) / N for N in self.sizes]

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Momentum components on the full grid (``indexing='ij'``)."""
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def displacements(self) -> tuple[np.ndarray, ...]:
        """Minimum-image displacement components, one array per axis."""
        ax = [np.where(np.arange(N) <= N // 2, np.arange(N), np.arange(N) - N) for N in self.sizes]
        return tuple(np.meshgrid(*ax, indexing="ij"))

    def index_of_minus(self, index: Sequence[int]) -> tuple[int, ...]:
        return tuple((-int(m)) % N for m, N in zip(index, self.sizes))


def _neg_k(values: np.ndarray, dim: int) -> np.ndarray:
    """``F(-k)`` on the grid: index ``m`` goes to ``(-m) mod N`` on every axis."""
    axes = tuple(range(dim))
    return np.roll(np.flip(values, axis=axes), 1, axis=axes)


@dataclass(frozen=True)
class BlochField:
    """One matrix per grid point, stored as an array of shape ``(*sizes, a, b)``."""

    grid: MomentumGrid
    values: np.ndarray
    kind: str = "block"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape[: self.grid.dim] != self.grid.sizes or vals.ndim != self.grid.dim + 2:
            raise GridMismatch(
                f"values shape {vals.shape} incompatible with grid {self.grid.sizes}"
            )
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        nm.check_finite(vals, "Bloch field")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: MomentumGrid, fn: Callable[..., np.ndarray], kind: str = "block"):
        """Evaluate ``fn(k_1, ..., k_d)`` (vectorised over mesh arrays)."""
        return cls(grid, np.asarray(fn(*grid.mesh()), dtype=complex), kind)

    @classmethod
    def constant(cls, grid: MomentumGrid, matrix: np.ndarray, kind: str = "block"):
        m = np.asarray(matrix, dtype=complex)
        return cls(grid, np.broadcast_to(m, grid.sizes + m.shape).copy(), kind)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[-2:]

    @property
    def n(self) -> int:
        """Internal-state count (half the matrix size)."""
        return self.values.shape[-1] // 2

    def with_values(self, values: np.ndarray, kind: str | None = None) -> "BlochField":
        return BlochField(self.grid, values, kind or self.kind)

    def minus_k(self) -> np.ndarray:
        return _neg_k(self.values, self.grid.dim)

    def dag(self) -> np.ndarray:
        return nm.dagger(self.values)

    def __matmul__(self, other):
        ov = other.values if isinstance(other, BlochField) else other
        if isinstance(other, BlochField) and other.grid != self.grid:
            raise GridMismatch("grids differ")
        return self.with_values(self.values @ ov)


def as_values(F, grid: MomentumGrid | None = None) -> np.ndarray:
    """Accept a :class:`BlochField` or a raw array and return the array."""
    if isinstance(F, BlochField):
        if grid is not None and F.grid != grid:
            raise GridMismatch("grids differ")
        return F.values
    return np.asarray(F, dtype=complex)


def neg_k(values: np.ndarray, grid: MomentumGrid) -> np.ndarray:
    """Evaluate a raw grid array at ``-k``."""
    return _neg_k(values, grid.dim)


# ---------------------------------------------------------------------------
# Intrinsic particle-hole symmetry
# ---------------------------------------------------------------------------

def check_phs_supercharge(q: BlochField) -> float:
    """``max_k |X q(k)* X - q(-k)|`` for a supercharge field."""
    Xn = nm.X(q.n)
    return nm.max_abs(Xn @ np.conj(q.values) @ Xn - q.minus_k())


def check_phs_bdg(h: BlochField, sign: int) -> float:
    """``max_k |X h(k)* X - sign·h(-k)|`` (sign -1 for fermions, +1 for bosons)."""
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    Xn = nm.X(h.n)
    return nm.max_abs(Xn @ np.conj(h.values) @ Xn - sign * h.minus_k())


def phs_project(values: np.ndarray, grid: MomentumGrid, sign: int = 1) -> np.ndarray:
    """Average a field with its particle-hole image so that ``X F* X = sign F(-k)`` holds."""
    n = values.shape[-1] // 2
    Xn = nm.X(n)
    image = sign * neg_k(Xn @ np.conj(values) @ Xn, grid)
    return 0.5 * (values + image)


# ---------------------------------------------------------------------------
# Real space
# ---------------------------------------------------------------------------

def to_realspace(F) -> np.ndarray:
    """Couplings ``F_r`` on the whole periodic lattice, shape ``(*sizes, a, b)``.

    Index ``m`` on each axis corresponds to displacement ``m`` (mod ``N``).
    """
    grid = F.grid
    axes = tuple(range(grid.dim))
    return np.fft.fftn(F.values, axes=axes) / grid.volume


def from_realspace(grid: MomentumGrid, couplings: np.ndarray, kind: str = "block") -> BlochField:
    """Inverse of :func:`to_realspace`: ``F(k) = Σ_r F_r e^{ik·r}``."""
    axes = tuple(range(grid.dim))
    vals = np.fft.ifftn(np.asarray(couplings, dtype=complex), axes=axes) * grid.volume
    return BlochField(grid, vals, kind)


def support_radius(F, tol: float = 1e-12) -> int:
    """Largest Chebyshev length of a displacement carrying an entry above ``tol``."""
    C = to_realspace(F)
    grid = F.grid
    mags = np.max(np.abs(C), axis=(-1, -2))
    disp = grid.displacements()
    cheb = np.max(np.abs(np.stack(disp)), axis=0)
    live = mags > tol
    return int(cheb[live].max()) if np.any(live) else 0


def realspace_matrix(F) -> np.ndarray:
    """Dense real-space matrix of a Nambu Bloch field.

    Global index ordering is ``sector * (|Ω| n) + site * n + s`` with sites
    flattened in row-major order, so the annihilation operators of all sites come
    first and the creation operators follow.
    """
    grid = F.grid
    a, b = F.shape
    if a % 2 or b % 2:
        raise ValueError("realspace_matrix needs Nambu-structured (even) blocks")
    na, nb = a // 2, b // 2
    C = to_realspace(F)
    V = grid.volume
    sites = np.array(np.unravel_index(np.arange(V), grid.sizes)).T  # (V, d)
    diff = (sites[:, None, :] - sites[None, :, :]) % np.array(grid.sizes)
    blocks = C[tuple(diff[..., j] for j in range(grid.dim))]  # (V, V, a, b)
    blocks = blocks.reshape(V, V, 2, na, 2, nb)
    M = blocks.transpose(2, 0, 3, 4, 1, 5).reshape(2 * V * na, 2 * V * nb)
    return M


def site_indices(grid: MomentumGrid, n: int, sites: Iterable) -> np.ndarray:
    """Global Nambu indices of all internal states, both sectors, of ``sites``.

    ``sites`` may hold flat site numbers or coordinate tuples.  The result lists
    every annihilation index first, then every creation index.
    """
    V = grid.volume
    flat = []
    for s in sites:
        if np.ndim(s) == 0:
            flat.append(int(s) % V)
        else:
            flat.append(int(np.ravel_multi_index(tuple(int(c) for c in s), grid.sizes, mode="wrap")))
    flat = np.asarray(flat, dtype=int)
    base = (flat[:, None] * n + np.arange(n)[None, :]).ravel()
    return np.concatenate([base, base + V * n])


# ---------------------------------------------------------------------------
# Locality profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RealSpaceProfile:
    """Block-resolved magnitude of real-space couplings along a ray."""

    r: np.ndarray
    diag: np.ndarray
    offdiag: np.ndarray
    direction: tuple[int, ...] = (1,)

    def __post_init__(self):
        if not (len(self.r) == len(self.diag) == len(self.offdiag)):
            raise ValueError("profile columns have different lengths")
        if np.any(np.asarray(self.diag) < 0) or np.any(np.asarray(self.offdiag) < 0):
            raise ValueError("profile values must be nonnegative")

    def component(self, which: str) -> np.ndarray:
        if which == "diag":
            return np.asarray(self.diag)
        if which == "offdiag":
            return np.asarray(self.offdiag)
        if which == "total":
            return np.maximum(self.diag, self.offdiag)
        raise ValueError(f"unknown component {which!r}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "diag", "offdiag"])
        for r, d, o in zip(self.r, self.diag, self.offdiag):
            w.writerow([int(r), "%.17g" % d, "%.17g" % o])
        return buf.getvalue()


def fourier_ray(F: BlochField, direction: Sequence[int], r_max: int) -> RealSpaceProfile:
    """Couplings ``F_r`` at ``r = m·direction`` for ``m = 0..r_max``.

    Direct summation, separable over axes so the cost is ``O(|Ω| r_max)``
    without holding a ``|Ω| x r_max`` phase table.  Returns the largest modulus
    inside the diagonal (hopping) and the off-diagonal (pairing) Nambu blocks.
    """
    direction = tuple(int(c) for c in direction)
    grid = F.grid
    if len(direction) != grid.dim or not any(direction):
        raise ValueError("direction must be a nonzero lattice vector of the grid dimension")
    m = np.arange(int(r_max) + 1)
    vals = F.values
    # first axis: T[m, k2, ..., a, b]
    phase0 = np.exp(-1j * np.outer(m * direction[0], grid.axes()[0]))  # (M, N1)
    T = np.tensordot(phase0, vals, axes=([1], [0]))
    for j in range(1, grid.dim):
        ph = np.exp(-1j * np.outer(m * direction[j], grid.axes()[j]))  # (M, Nj)
        # contract axis 1 of T (the k_j axis) elementwise in m
        T = np.einsum("mk,mk...->m...", ph, T)
    T = T / grid.volume
    n = F.n
    a_blk = np.abs(T[:, :n, :n]).max(axis=(-1, -2))
    d_blk = np.abs(T[:, n:, n:]).max(axis=(-1, -2))
    o1 = np.abs(T[:, :n, n:]).max(axis=(-1, -2))
    o2 = np.abs(T[:, n:, :n]).max(axis=(-1, -2))
    return RealSpaceProfile(m, np.maximum(a_blk, d_blk), np.maximum(o1, o2), direction)


@dataclass(frozen=True)
class DecayFit:
    model: str
    rate_or_exponent: float
    goodness: float
    exp_fit: tuple[float, float, float]
    pow_fit: tuple[float, float, float]


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), ss_res, r2


def fit_decay(profile: RealSpaceProfile, window: Sequence[float], component: str = "total") -> DecayFit:
    """Fit ``log v`` against ``r`` (exponential) and ``log r`` (power law).

    The model with the smaller residual sum of squares wins; ``goodness`` is
    its coefficient of determination in log space.  ``rate_or_exponent`` is
    the positive decay constant (``v ~ e^{-a r}`` or ``v ~ r^{-a}``).
    """
    lo, hi = window
    r = np.asarray(profile.r, dtype=float)
    sel = (r >= lo) & (r <= hi)
    if sel.sum() < 3:
        raise ValueError("fit window holds fewer than three points")
    r = r[sel]
    if np.any(r <= 0):
        raise ValueError("power-law fit needs r > 0")
    v = np.maximum(profile.component(component)[sel], 1e-300)
    y = np.log(v)
    se, ie, re_, r2e = _linfit(r, y)
    sp, ip, rp, r2p = _linfit(np.log(r), y)
    if re_ <= rp:
        return DecayFit("exponential", -se, r2e, (-se, ie, r2e), (-sp, ip, r2p))
    return DecayFit("powerlaw", -sp, r2p, (-se, ie, r2e), (-sp, ip, r2p))


# ---------------------------------------------------------------------------
# Symmetry classes
# ---------------------------------------------------------------------------

def _trs_violation(F: BlochField, U: np.ndarray | None) -> float:
    """``max |U F(k)* U† - F(-k)|`` (``U = None`` means complex conjugation only)."""
    Fc = np.conj(F.values)
    if U is not None:
        Fc = U @ Fc @ U.conj().T
    return nm.max_abs(Fc - F.minus_k())


def _commutator(F: BlochField, G: np.ndarray) -> float:
    return nm.max_abs(G @ F.values - F.values @ G)


def symmetry_check(class_label: str, F: BlochField) -> dict[str, float]:
    """Per-constraint violations for a supercharge or BdG field of a symmetry class.

    Layouts (left factor slowest):

    * ``BDI``: Nambu ⊗ orbitals; TRS ``F(k)* = F(-k)``.
    * ``AIII``: Nambu ⊗ spin ⊗ orbitals; TRS with ``σ0⊗σy⊗1``, spin rotation
      ``[σz⊗σz⊗1, F] = 0``.
    * ``CII``: Nambu ⊗ other ⊗ spin ⊗ orbitals; TRS with ``σ0⊗σ0⊗σy⊗1`` and the
      two commutation constraints with ``σz⊗σx⊗σ0⊗1`` and ``σz⊗σz⊗σ0⊗1``.
    * ``AI``: Nambu ⊗ orbitals; TRS ``F* = F(-k)`` and U(1) ``[Z, F] = 0``.
    * ``AII``: Nambu ⊗ spin ⊗ orbitals; TRS with ``σ0⊗σy⊗1`` and U(1).
    * ``A``: U(1) only.  ``D``/``none``: no constraint beyond PHS.

    The intrinsic particle-hole constraint is always reported under ``"PHS"``
    (sign chosen from ``F.kind``).
    """
    lab = class_label.upper() if class_label.lower() != "none" else "none"
    size = F.shape[0]
    out: dict[str, float] = {}
    if F.kind == "supercharge":
        out["PHS"] = check_phs_supercharge(F)
    elif F.kind == "bdg_fermion":
        out["PHS"] = check_phs_bdg(F, -1)
    elif F.kind == "bdg_boson":
        out["PHS"] = check_phs_bdg(F, +1)

    def need(mult: int):
        if size % mult:
            raise ValueError(f"class {lab} needs matrix size divisible by {mult}, got {size}")
        return size // mult

    Zg = nm.Z(size // 2)
    if lab in ("none", "D"):
        pass
    elif lab == "A":
        out["U1"] = _commutator(F, Zg)
    elif lab == "BDI":
        out["TRS"] = _trs_violation(F, None)
    elif lab == "AI":
        out["TRS"] = _trs_violation(F, None)
        out["U1"] = _commutator(F, Zg)
    elif lab in ("AIII", "AII"):
        m = need(4)
        T = nm.kron(nm.S0, nm.SY, np.eye(m))
        out["TRS"] = _trs_violation(F, T)
        if lab == "AIII":
            out["spin_U1"] = _commutator(F, nm.kron(nm.SZ, nm.SZ, np.eye(m)))
        else:
            out["U1"] = _commutator(F, Zg)
    elif lab == "CII":
        m = need(8)
        T = nm.kron(nm.S0, nm.S0, nm.SY, np.eye(m))
        out["TRS"] = _trs_violation(F, T)
        out["SU2_x"] = _commutator(F, nm.kron(nm.SZ, nm.SX, nm.S0, np.eye(m)))
        out["SU2_z"] = _commutator(F, nm.kron(nm.SZ, nm.SZ, nm.S0, np.eye(m)))
    else:
        raise ValueError(f"no constraint set for class {class_label!r}")
    return out
