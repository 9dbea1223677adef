"""Spectral toolkit for fractional Polya-Szego, Gagliardo-Nirenberg and
Sobolev inequalities, and for sphere-constrained fractional ground states."""
from .grid import (
    Field,
    Grid,
    Spectrum,
    bessel_potential,
    dirichlet_energy,
    fractional_laplacian,
    inverse_transform,
    lp_norm,
    riesz_potential,
    transform,
)
from .rearrange import asymmetry, radial_decay_check, schwarz_rearrange

__version__ = "0.1.0"
