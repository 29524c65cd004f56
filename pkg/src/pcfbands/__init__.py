"""Band structures of high-contrast photonic-crystal-fibre claddings."""

from .bands import BandStructure, GapRecord, OmegaKRegion, detect_gaps, hausdorff_distance, map_gap_to_omega_k, sweep
from .cell import CellSpec, Disc, DispersionPair, Raster, Slab, beta_form, gamma, indicator_fourier, recover_transverse
from .epsilon import solve_epsilon_spectrum
from .fourier import BlochTheta, FourierField
from .limit import MulticellIndex, Spectrum, build_V_basis, solve_limit_spectrum, solve_multicell_spectrum

__all__ = [
    "BandStructure",
    "BlochTheta",
    "CellSpec",
    "Disc",
    "DispersionPair",
    "FourierField",
    "GapRecord",
    "MulticellIndex",
    "OmegaKRegion",
    "Raster",
    "Slab",
    "Spectrum",
    "beta_form",
    "build_V_basis",
    "detect_gaps",
    "gamma",
    "hausdorff_distance",
    "indicator_fourier",
    "map_gap_to_omega_k",
    "recover_transverse",
    "solve_epsilon_spectrum",
    "solve_limit_spectrum",
    "solve_multicell_spectrum",
    "sweep",
]
