"""Monodromy data of rank-1 irregular linear systems with coalescing eigenvalues.

Computes Stokes matrices, central connection matrices and Levelt exponents of
n x n systems dY/dz = (Lambda(t) + A1(t)/z) Y whose leading eigenvalues merge
along a locus in the deformation space, and integrates / verifies the
isomonodromic deformation flow across that locus.
"""

from .cells import (
    cell_signature,
    detect_crossings,
    enumerate_cells,
    radius_bound,
)
from .connect import (
    CoverPoint,
    MonodromyData,
    NumericsParams,
    connection_matrices,
    evaluate_formal,
    monodromy_consistency,
    propagate,
    stokes_matrices,
)
from .core import (
    GaussRational,
    Matrix,
    MatrixSeries,
    RatFunc,
    SystemCoefficients,
    diagonalize,
    make_system,
)
from .formal import (
    FormalSolution,
    formal_coefficients,
    frozen_formal,
    vanishing_report,
)
from .geometry import (
    Sector,
    StokesFan,
    build_fan,
    build_sectors,
    dominance,
    stokes_directions,
)
from .isomono import (
    Family,
    coalescence_limit,
    flow,
    omega_form,
    verify_isomonodromic,
)
from .levelt import (
    LeveltData,
    gauge_apply,
    levelt_exponents,
    levelt_series,
)

__all__ = [
    "CoverPoint",
    "Family",
    "FormalSolution",
    "GaussRational",
    "LeveltData",
    "Matrix",
    "MatrixSeries",
    "MonodromyData",
    "NumericsParams",
    "RatFunc",
    "Sector",
    "StokesFan",
    "SystemCoefficients",
    "build_fan",
    "build_sectors",
    "cell_signature",
    "coalescence_limit",
    "connection_matrices",
    "detect_crossings",
    "diagonalize",
    "dominance",
    "enumerate_cells",
    "evaluate_formal",
    "flow",
    "formal_coefficients",
    "frozen_formal",
    "gauge_apply",
    "levelt_exponents",
    "levelt_series",
    "make_system",
    "monodromy_consistency",
    "omega_form",
    "propagate",
    "radius_bound",
    "stokes_directions",
    "stokes_matrices",
    "vanishing_report",
    "verify_isomonodromic",
]

__version__ = "0.1.0"
