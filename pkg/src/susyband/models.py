"""Model builders: Kitaev chain, chiral p+ip superconductor and random class models.

Random generators draw real-space couplings uniformly in ``[-1, 1]`` (real
and imaginary parts) on the displacements ``|r|_∞ ≤ range``, project them onto
the constraints of the requested class by alternating averages over the
class's involutions, and Fourier transform to the grid.  All projections act
pointwise in ``k`` or map ``k -> -k``, so the coupling range is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import numerics as nm
from .bloch import BlochField, MomentumGrid, from_realspace, neg_k
from .supercharge import (
    P_MINUS,
    P_PLUS,
    Supercharge,
    spin_y,
    two_band_closed_form,
)


@dataclass(frozen=True)
class ModelSpec:
    """Named model with real parameters and grid sizes."""

    name: str
    params: dict = field(default_factory=dict)
    sizes: tuple[int, ...] = (60,)

    def __post_init__(self):
        for k, v in self.params.items():
            if not np.isfinite(float(v)):
                raise ValueError(f"parameter {k} is not finite")


# ---------------------------------------------------------------------------
# Kitaev chain
# ---------------------------------------------------------------------------

class KitaevModel(NamedTuple):
    h_f: BlochField
    q_closed: Supercharge
    epsilon: np.ndarray


def kitaev_epsilon(mu: float, t: float, k: np.ndarray) -> np.ndarray:
    """``ε_k = √(μ² + 4t² + 4tμ cos k)``."""
    return np.sqrt(mu**2 + 4 * t**2 + 4 * t * mu * np.cos(k))


def kitaev_chain(mu: float, t: float, N: int) -> KitaevModel:
    """Kitaev chain ``h_f(k) = -2t sin k σy + (μ + 2t cos k) σz`` on ``N`` sites.

    The supercharge is ``q(k) = √ε_k P+ + (μ + 2t e^{ik}) P- / √ε_k`` with
    ``P± = (σ0 ± σx)/2``, so that ``q† q = ε_k 1``.
    """
    if abs(abs(mu) - abs(2 * t)) < 1e-14:
        raise ValueError("Kitaev chain is gapless at |mu| = |2t|")
    grid = MomentumGrid((N,))
    (k,) = grid.mesh()
    eps = kitaev_epsilon(mu, t, k)
    h = (-2 * t * np.sin(k))[:, None, None] * nm.SY + (mu + 2 * t * np.cos(k))[:, None, None] * nm.SZ
    z = mu + 2 * t * np.exp(1j * k)
    q = np.sqrt(eps)[:, None, None] * P_PLUS + (z / np.sqrt(eps))[:, None, None] * P_MINUS
    return KitaevModel(
        BlochField(grid, h, "bdg_fermion"),
        Supercharge(BlochField(grid, q, "supercharge"), "BDI", "analytic", "kitaev_closed_form"),
        eps,
    )


def kitaev_blocks(mu: float, t: float, N: int) -> tuple[BlochField, BlochField]:
    """Scalar BDI blocks ``h_y = -2t sin k`` and ``h_z = μ + 2t cos k``."""
    grid = MomentumGrid((N,))
    (k,) = grid.mesh()
    hy = (-2 * t * np.sin(k))[:, None, None]
    hz = (mu + 2 * t * np.cos(k))[:, None, None]
    return BlochField(grid, hy), BlochField(grid, hz)


def kitaev_path(t: float, mu0: float, mu1: float, N: int) -> Callable[[float], np.ndarray]:
    """``λ -> h_f(k; μ0 + λ(μ1 - μ0))`` for :func:`~susyband.supercharge.homotopy_transport`."""
    (k,) = MomentumGrid((N,)).mesh()

    def path(lam: float) -> np.ndarray:
        mu = mu0 + lam * (mu1 - mu0)
        return (-2 * t * np.sin(k))[:, None, None] * nm.SY + (mu + 2 * t * np.cos(k))[:, None, None] * nm.SZ

    return path


# ---------------------------------------------------------------------------
# Chiral superconductor
# ---------------------------------------------------------------------------

class ChiralModel(NamedTuple):
    h_f: BlochField
    q_nonlocal: Supercharge
    d: tuple[np.ndarray, np.ndarray, np.ndarray]
    q_local: Supercharge | None = None


def trivial_two_band_supercharge(grid: MomentumGrid, d_x, d_y, d_z) -> Supercharge:
    """Analytic supercharge for a two-band field whose ``d_z`` never changes sign.

    With ``n = d/|d|`` and ``s = sign(d_z)``, the reflection
    ``M = (n·σ + s σz) / sqrt(2 (1 + s n_z))`` conjugates ``s σz`` into
    ``n·σ``.  The supercharge is ``q = i |d|^{1/2} M`` for ``s = +1`` and
    ``q = i |d|^{1/2} M σx`` for ``s = -1``; both obey the particle-hole
    constraint and are smooth (hence exponentially local) because
    ``1 + s n_z`` stays away from zero.
    """
    d = np.stack([np.asarray(c, dtype=float) for c in (d_x, d_y, d_z)])
    s = np.sign(d[2])
    if np.any(s == 0) or np.any(s != s.flat[0]):
        raise ValueError("d_z must keep one sign over the zone")
    s = float(s.flat[0])
    norm = np.sqrt(np.sum(d * d, axis=0))
    n = d / norm
    ns = sum(c[..., None, None] * p for c, p in zip(n, (nm.SX, nm.SY, nm.SZ)))
    M = (ns + s * nm.SZ) / np.sqrt(2 * (1 + s * n[2]))[..., None, None]
    if s > 0:
        q = 1j * np.sqrt(norm)[..., None, None] * M
    else:
        q = 1j * np.sqrt(norm)[..., None, None] * M @ nm.SX
    return Supercharge(BlochField(grid, q, "supercharge"), "D", "analytic", "two_band_trivial")


def chiral_sc(m: float, Nx: int, Ny: int) -> ChiralModel:
    """``h_f = sin kx σx + sin ky σy + (m - cos kx - cos ky) σz`` with its supercharges.

    ``q_nonlocal`` is the two-band closed form.  In the trivial phase
    ``|m| > 2`` the model also carries ``q_local``, an analytic supercharge
    built from :func:`trivial_two_band_supercharge`; it is ``None`` in the
    topological phase, where no local supercharge exists.
    """
    if min(abs(m), abs(abs(m) - 2)) < 1e-14:
        raise ValueError("chiral superconductor is gapless at m in {0, ±2}")
    grid = MomentumGrid((Nx, Ny))
    kx, ky = grid.mesh()
    d = (np.sin(kx), np.sin(ky), m - np.cos(kx) - np.cos(ky))
    h = sum(c[..., None, None] * s for c, s in zip(d, (nm.SX, nm.SY, nm.SZ)))
    q = two_band_closed_form(grid, *d)
    topological = 0 < abs(m) < 2
    q = Supercharge(q.field, "D", "nonlocal", "two_band")
    q_loc = None if topological else trivial_two_band_supercharge(grid, *d)
    return ChiralModel(BlochField(grid, h, "bdg_fermion"), q, d, q_loc)


# ---------------------------------------------------------------------------
# Random generation
# ---------------------------------------------------------------------------

def _random_couplings(rng: np.random.Generator, grid: MomentumGrid, shape: tuple[int, int], rng_range: int,
                      real: bool = False) -> np.ndarray:
    """Uniform couplings on ``|r|_∞ ≤ range`` placed on the periodic lattice."""
    if rng_range < 1:
        raise ValueError("range must be at least 1")
    if any(2 * rng_range + 1 > N for N in grid.sizes):
        raise ValueError("grid too small for the requested range")
    C = np.zeros(grid.sizes + shape, dtype=complex)
    disp = np.stack(grid.displacements())
    live = np.max(np.abs(disp), axis=0) <= rng_range
    cnt = int(live.sum())
    vals = rng.uniform(-1, 1, (cnt,) + shape)
    if not real:
        vals = vals + 1j * rng.uniform(-1, 1, (cnt,) + shape)
    C[live] = vals
    return C


def _project(values: np.ndarray, maps: list[Callable[[np.ndarray], np.ndarray]], tol: float = 1e-15,
             max_iter: int = 200) -> np.ndarray:
    """Alternating averages ``v <- (v + g(v))/2`` over involutions until all are fixed."""
    v = values
    for _ in range(max_iter):
        for g in maps:
            v = 0.5 * (v + g(v))
        if all(nm.max_abs(g(v) - v) <= tol * (1 + nm.max_abs(v)) for g in maps):
            return v
    return v


def _maps_hermitian(grid):
    return lambda F: nm.dagger(F)


def _map_conj_minus(grid, U: np.ndarray | None = None, sign: float = 1.0):
    """``F -> sign · U F(-k)* U†``."""
    if U is None:
        return lambda F: sign * np.conj(neg_k(F, grid))
    Ud = U.conj().T
    return lambda F: sign * (U @ np.conj(neg_k(F, grid)) @ Ud)


def _map_adjoint(G: np.ndarray):
    Ginv = np.linalg.inv(G)
    return lambda F: G @ F @ Ginv


def _draw_field(seed: int, grid: MomentumGrid, size: int, rng_range: int,
                maps: list[Callable[[np.ndarray], np.ndarray]]) -> np.ndarray:
    rng = np.random.default_rng(seed)
    C = _random_couplings(rng, grid, (size, size), rng_range)
    F = from_realspace(grid, C).values.copy()
    return _project(F, maps)


def supercharge_constraints(class_label: str, n: int, grid: MomentumGrid) -> list[Callable]:
    """Involutions whose common fixed points are the allowed supercharges of a class."""
    lab = class_label.upper() if class_label.lower() != "none" else "none"
    size = 2 * n
    Xn = nm.X(n)
    maps = [_map_conj_minus(grid, Xn)]
    Zg = nm.Z(n)
    if lab in ("none", "D"):
        return maps
    if lab == "A":
        return maps + [_map_adjoint(Zg)]
    if lab == "BDI":
        return maps + [_map_conj_minus(grid)]
    if lab == "AI":
        return maps + [_map_conj_minus(grid)]
    if lab in ("AIII", "AII", "DIII"):
        if size % 4:
            raise ValueError(f"class {lab} needs 2n divisible by 4")
        T = nm.kron(nm.S0, nm.SY, np.eye(size // 4))
        maps = maps + [_map_conj_minus(grid, T)]
        if lab == "AIII":
            maps.append(_map_adjoint(nm.kron(nm.SZ, nm.SZ, np.eye(size // 4))))
        return maps
    if lab == "CII":
        if size % 8:
            raise ValueError("class CII needs 2n divisible by 8")
        m = size // 8
        T = nm.kron(nm.S0, nm.S0, nm.SY, np.eye(m))
        return maps + [
            _map_conj_minus(grid, T),
            _map_adjoint(nm.kron(nm.SZ, nm.SX, nm.S0, np.eye(m))),
            _map_adjoint(nm.kron(nm.SZ, nm.SZ, nm.S0, np.eye(m))),
        ]
    raise ValueError(f"random supercharges are not available for class {class_label!r}")


def random_supercharge(class_label: str, n: int, rng_range: int, seed: int,
                       sizes: tuple[int, ...] = (16,), max_draws: int = 200) -> Supercharge:
    """Strictly local random supercharge of a symmetry class.

    Couplings are symmetry projected (see :func:`supercharge_constraints`).
    For the Wigner-Dyson classes AI and AII the U(1) symmetry is not imposed
    on ``q``, in line with the strictly local constructions of those classes.
    A draw is accepted when ``min_k σ_min(q) > 0.1 · median singular value``;
    otherwise the seed sequence advances deterministically.
    """
    grid = MomentumGrid(tuple(sizes))
    maps = supercharge_constraints(class_label, n, grid)
    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(max_draws):
        q = _draw_field(int(child.generate_state(1)[0]), grid, 2 * n, rng_range, maps)
        sv = np.linalg.svd(q, compute_uv=False)
        if sv.min() > 0.1 * np.median(sv):
            label = class_label if class_label.lower() != "none" else "none"
            return Supercharge(BlochField(grid, q, "supercharge"), label, "strict", f"random(seed={seed})")
    raise RuntimeError("no sufficiently gapped draw found")


class ClassModel(NamedTuple):
    """Input blocks of a strictly local class construction and its target ``h_f``."""

    class_label: str
    blocks: tuple[BlochField, ...]
    h_f: BlochField


def _gapped(h: np.ndarray, ratio: float = 0.05) -> bool:
    w = np.abs(np.linalg.eigvalsh(h))
    return w.min() > ratio * np.median(w)


def random_class_model(class_label: str, m: int, rng_range: int, seed: int,
                       sizes: tuple[int, ...] = (16,), max_draws: int = 200) -> ClassModel:
    """Random strictly local Hamiltonian blocks for BDI, AIII, CII, AI or AII.

    ``m`` is the orbital count of each block (blocks acting on spin ⊗ orbital
    are ``2m x 2m``).  Draws whose target ``h_f`` has a relative gap below 5 %
    of its median level are rejected.
    """
    from . import supercharge as sc

    grid = MomentumGrid(tuple(sizes))
    lab = class_label.upper()
    herm = lambda F: nm.dagger(F)  # noqa: E731
    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(max_draws):
        s1, s2 = (int(x) for x in child.generate_state(2))
        if lab == "BDI":
            hy = _draw_field(s1, grid, m, rng_range, [herm, _map_conj_minus(grid, sign=-1.0)])
            hz = _draw_field(s2, grid, m, rng_range, [herm, _map_conj_minus(grid)])
            blocks = (BlochField(grid, hy), BlochField(grid, hz))
            h = sc.bdi_hamiltonian(*blocks)
        elif lab == "AIII":
            h1 = _draw_field(s1, grid, m, rng_range, [herm])
            h2 = _draw_field(s2, grid, m, rng_range, [herm])
            blocks = (BlochField(grid, h1), BlochField(grid, h2))
            h = sc.aiii_hamiltonian(*blocks)
        elif lab == "CII":
            Y = spin_y(m)
            A = _draw_field(s1, grid, 2 * m, rng_range, [herm, _map_conj_minus(grid, Y)])
            B = _draw_field(s2, grid, 2 * m, rng_range,
                            [lambda F: neg_k(F, grid).swapaxes(-1, -2), _map_conj_minus(grid, Y, -1.0)])
            blocks = (BlochField(grid, A), BlochField(grid, B))
            h = sc.cii_hamiltonian(*blocks)
        elif lab == "AI":
            hI = _draw_field(s1, grid, m, rng_range, [herm, _map_conj_minus(grid)])
            blocks = (BlochField(grid, hI),)
            h = sc.ai_hamiltonian(*blocks)
        elif lab == "AII":
            hII = _draw_field(s1, grid, 2 * m, rng_range, [herm, _map_conj_minus(grid, spin_y(m))])
            blocks = (BlochField(grid, hII),)
            h = sc.aii_hamiltonian(*blocks)
        else:
            raise ValueError(f"no strictly local construction for class {class_label!r}")
        if _gapped(h.values):
            return ClassModel(lab, blocks, h)
    raise RuntimeError("no sufficiently gapped draw found")


STRICT_CONSTRUCTIONS = {
    "BDI": "bdi_strict",
    "AIII": "aiii_strict",
    "CII": "cii_strict",
    "AI": "ai_strict",
    "AII": "aii_strict",
}


def strict_supercharge(model: ClassModel) -> Supercharge:
    """Apply the strictly local construction matching ``model.class_label``."""
    from . import supercharge as sc

    return getattr(sc, STRICT_CONSTRUCTIONS[model.class_label])(*model.blocks)
