"""Supersymmetric fermion/boson band pairs generated by a shared supercharge.

Submodules
----------
numerics      dense spectral toolkit (eigensolvers, matrix functions, polar)
bloch         momentum grids, Bloch fields, Fourier transforms, symmetry checks
supercharge   supercharges, constructions per symmetry class, homotopy, gauges
susy_pair     the fermion/boson pair and the identification maps
entanglement  restricted complex structures, entropies, entanglement duality
topology      Chern and winding numbers, mirror test, classification table
models        Kitaev chain, chiral superconductor, random class models
fock_oracle   many-body check of the SUSY algebra on tiny systems
cli           the ``susy-band`` command
"""

from .bloch import BlochField, MomentumGrid
from .errors import SusyBandError
from .supercharge import Supercharge
from .susy_pair import SusyPair, build_pair, identification_maps

__all__ = [
    "BlochField",
    "MomentumGrid",
    "Supercharge",
    "SusyBandError",
    "SusyPair",
    "build_pair",
    "identification_maps",
]

__version__ = "0.1.0"
