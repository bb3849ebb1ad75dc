"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class SusyBandError(Exception):
    """Base class for every error raised by the package."""


class NotHermitian(SusyBandError):
    """A matrix expected to be Hermitian failed the symmetry check."""


class NoConvergence(SusyBandError):
    """An iterative eigensolver hit its iteration cap."""


class SingularAtGapFloor(SusyBandError):
    """A spectral function was asked to invert an eigenvalue below ``gap_floor``."""

    def __init__(self, eigenvalue: float, gap_floor: float):
        self.eigenvalue = float(eigenvalue)
        self.gap_floor = float(gap_floor)
        super().__init__(
            f"eigenvalue {self.eigenvalue:.3e} is below gap_floor {self.gap_floor:.1e}"
        )


class GridMismatch(SusyBandError):
    """Fields live on incompatible grids, or -k is not a grid point."""


class GapClosed(SusyBandError):
    """The one-particle gap closes (or falls under tolerance) at some k."""

    def __init__(self, k_index, gap: float, message: str | None = None):
        self.k_index = tuple(int(i) for i in k_index)
        self.gap = float(gap)
        super().__init__(message or f"gap {self.gap:.3e} at k-index {self.k_index}")


class GapClosedOnPath(SusyBandError):
    """A homotopy path closes the gap at parameter ``lam`` and momentum ``k_index``."""

    def __init__(self, lam: float, k_index, gap: float):
        self.lam = float(lam)
        self.k_index = tuple(int(i) for i in k_index)
        self.gap = float(gap)
        super().__init__(
            f"gap {self.gap:.3e} at lambda={self.lam:.12f}, k-index {self.k_index}"
        )


class OdeNotConverged(SusyBandError):
    """Step doubling failed to bring the ODE error estimate below tolerance."""


class IllConditionedSubspace(SusyBandError):
    """The Gram matrix of a subsystem basis is numerically singular."""


class NonIntegerResult(SusyBandError):
    """A topological invariant came out too far from an integer."""


class TruncationTooSmall(SusyBandError):
    """The truncation-safe sector of a Fock space is empty."""


class ConfigInvalid(SusyBandError):
    """A CLI configuration failed schema validation."""


class ComputationFailed(SusyBandError):
    """A CLI computation finished but violated an invariant above tolerance."""
