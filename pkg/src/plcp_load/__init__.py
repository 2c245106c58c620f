"""Load and rate coverage of cellular base stations serving vehicular users.

Vehicles live on the lines of a Poisson line process (a Poisson line Cox
process); base stations form a planar PPP whose Voronoi cells are the service
regions.  The package computes the probability mass function of the number of
users per cell analytically, via Laplace transforms of the total chord length,
and validates everything against a geometric Monte-Carlo engine.
"""

from .coverage import RateCoverageResult, RateQuery, coverage_probability, rate_coverage
from .geometry import ConvexPolygon, Line, Point2
from .laws import ChordLawTable, GeneralizedGamma, chord_law_table
from .load import (
    Pmf,
    TotalChordLaw,
    laplace_W_typical_disc,
    laplace_W_typical_exact,
    laplace_W_zero,
    pmf_tagged,
    pmf_typical,
)
from .montecarlo import (
    SimReport,
    simulate_rate_coverage,
    simulate_tagged_load,
    simulate_typical_load,
)
from .numerics import QuadratureConfig, QuadratureError, integrate
from .processes import NetworkParams, RngSeed
from .tessellation import CellSample, cell_chords, typical_cell, zero_cell

__version__ = "0.1.0"

__all__ = [
    "CellSample",
    "ChordLawTable",
    "ConvexPolygon",
    "GeneralizedGamma",
    "Line",
    "NetworkParams",
    "Pmf",
    "Point2",
    "QuadratureConfig",
    "QuadratureError",
    "RateCoverageResult",
    "RateQuery",
    "RngSeed",
    "SimReport",
    "TotalChordLaw",
    "cell_chords",
    "chord_law_table",
    "coverage_probability",
    "integrate",
    "laplace_W_typical_disc",
    "laplace_W_typical_exact",
    "laplace_W_zero",
    "pmf_tagged",
    "pmf_typical",
    "rate_coverage",
    "simulate_rate_coverage",
    "simulate_tagged_load",
    "simulate_typical_load",
    "typical_cell",
    "zero_cell",
    "__version__",
]
