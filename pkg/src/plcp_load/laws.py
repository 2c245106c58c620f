"""Analytic densities of the planar Poisson-Voronoi tessellation.

Closed forms: the generalized-gamma fits for the typical cell's perimeter and
area, and the biased laws derived from them (zero-cell area, equivalent-disc
radii, origin-chord length).  Quadrature-backed: the chord-length density of
a stationary line hitting the typical cell, precomputed on a scale-free grid
(all laws obey the rescaling length -> sqrt(lambda_b)*length, so the table is
built once at unit density).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaln

from .numerics import gauss_legendre_panels

__all__ = [
    "GeneralizedGamma",
    "GG_PERIMETER",
    "GG_AREA",
    "gen_gamma_pdf",
    "ChordLawTable",
    "chord_law_table",
    "chord_kernel",
    "chord_pdf_direct",
    "chord_pdf",
    "perimeter_pdf",
    "area_pdf",
    "chord_origin_pdf",
    "zero_area_pdf",
    "typical_disc_radius_pdf",
    "zero_disc_radius_pdf",
    "BiasedLaws",
    "biased_laws",
    "CACHE_DIR_ENV",
]

CACHE_DIR_ENV = "PLCP_LOAD_CACHE_DIR"
_TABLE_FILENAME = "chord_law_512.csv"


@dataclass(frozen=True)
class GeneralizedGamma:
    """Density a * b^(c/a) / Gamma(c/a) * x^(c-1) * exp(-b x^a) on x >= 0."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if min(self.a, self.b, self.c) <= 0.0:
            raise ValueError("shape parameters must be positive")

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0.0
        xp = x[pos]
        log_pdf = (
            math.log(self.a)
            + (self.c / self.a) * math.log(self.b)
            - gammaln(self.c / self.a)
            + (self.c - 1.0) * np.log(xp)
            - self.b * xp**self.a
        )
        out[pos] = np.exp(log_pdf)
        return out if out.ndim else float(out)

    def moment(self, k: float) -> float:
        """E[X^k] in closed form."""
        return float(np.exp(
            gammaln((self.c + k) / self.a) - gammaln(self.c / self.a)
            - (k / self.a) * math.log(self.b)
        ))


# Empirical fits for the typical planar Poisson-Voronoi cell, in scale-free
# variables: perimeter U*sqrt(lambda_b)/4 and area Z*lambda_b.
GG_PERIMETER = GeneralizedGamma(2.33609, 2.97006, 7.58060)
GG_AREA = GeneralizedGamma(1.07950, 3.03226, 3.31122)


def gen_gamma_pdf(p: GeneralizedGamma, x):
    return p.pdf(x)


def perimeter_pdf(lambda_b: float, u, *, fit: GeneralizedGamma = GG_PERIMETER):
    """Density of the typical cell perimeter at MBS density ``lambda_b``."""
    s = math.sqrt(lambda_b) / 4.0
    return s * fit.pdf(s * np.asarray(u, dtype=float))


def area_pdf(lambda_b: float, z, *, fit: GeneralizedGamma = GG_AREA):
    """Density of the typical cell area at MBS density ``lambda_b``."""
    return lambda_b * fit.pdf(lambda_b * np.asarray(z, dtype=float))


def zero_area_pdf(lambda_b: float, z):
    """Area-biased density of the zero cell area: z * f_Z(z) / E[Z].

    E[Z] is the fitted law's own mean (within 1e-4 of 1/lambda_b), so the
    biased density integrates to 1 exactly rather than inheriting the fit's
    mean defect.
    """
    z = np.asarray(z, dtype=float)
    return z * area_pdf(lambda_b, z) * lambda_b / GG_AREA.moment(1)


def typical_disc_radius_pdf(lambda_b: float, r):
    """Density of the radius of the disc with the typical cell's area."""
    r = np.asarray(r, dtype=float)
    return 2.0 * math.pi * r * area_pdf(lambda_b, math.pi * r * r)


def zero_disc_radius_pdf(lambda_b: float, r):
    """Density of the radius of the disc with the zero cell's area,
    2*pi*r * f_{Z'}(pi r^2)."""
    r = np.asarray(r, dtype=float)
    return 2.0 * math.pi * r * zero_area_pdf(lambda_b, math.pi * r * r)


# ---------------------------------------------------------------------------
# Chord-length law of a stationary line through the typical cell
# ---------------------------------------------------------------------------

def chord_kernel(tau, alpha, c):
    """Exclusion-area kernel K(tau, alpha; c) with its first two c-derivatives.

    K is the area of the region that must be void of nuclei for a chord of
    length c to occur with auxiliary variables (tau, alpha); the derivatives
    are obtained analytically (the angle phi depends on c through both the
    arccos argument and the triangle side Q = tau^2 - 2*tau*c*cos(alpha) + c^2).
    """
    tau = np.asarray(tau, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    ca = np.cos(alpha)
    sa = np.sin(alpha)
    Q = tau * tau - 2.0 * tau * c * ca + c * c
    p = c - tau * ca
    with np.errstate(invalid="ignore", divide="ignore"):
        arg = p / np.sqrt(Q)
    # floating drift at the domain boundary (alpha -> 0, tau -> c) must not
    # produce NaN from arccos
    phi = np.arccos(np.clip(arg, -1.0, 1.0))
    big_phi = phi - 0.5 * np.sin(2.0 * phi)
    K = (
        2.0 * math.pi * tau * tau
        - 2.0 * math.pi * tau * c * ca
        - tau * tau * (alpha - 0.5 * np.sin(2.0 * alpha))
        + math.pi * c * c
        - Q * big_phi
    )
    with np.errstate(invalid="ignore", divide="ignore"):
        sin_term = 2.0 * tau**3 * sa**3 / Q
    sin_term = np.where(Q > 0.0, sin_term, 0.0)
    dK = 2.0 * p * (math.pi - big_phi) + sin_term
    d2K = 2.0 * (math.pi - big_phi)
    return K, dK, d2K


def _tau_edges(c: float) -> np.ndarray:
    # refine near tau = c where the kernel has a non-smooth corner at alpha = 0
    rel = c * np.array([0.3, 0.7, 0.9, 0.97, 1.0, 1.03, 1.1, 1.3])
    tail = c + np.array([0.5, 1.5, 2.5, 4.0])
    edges = np.unique(np.concatenate([[0.0], rel[rel > 0.0], tail]))
    return edges


_ALPHA_EDGES = np.array([0.0, 1e-3, 1e-2, 0.06, 0.25, 0.8, 1.8, math.pi])


def chord_pdf_direct(c: float, *, n_tau: int = 20, n_alpha: int = 16) -> float:
    """Chord-length density at unit MBS density by direct double quadrature.

    Composite Gauss-Legendre panels in (tau, alpha), refined toward the
    corner (tau = c, alpha = 0).  Used to build :class:`ChordLawTable`.
    """
    t_nodes, t_w = gauss_legendre_panels(_tau_edges(c), n_tau)
    a_nodes, a_w = gauss_legendre_panels(_ALPHA_EDGES, n_alpha)
    K, dK, d2K = chord_kernel(t_nodes[:, None], a_nodes[None, :], c)
    integrand = t_nodes[:, None] * (dK * dK - d2K) * np.exp(-K)
    return 0.5 * math.pi * float(np.einsum("i,j,ij->", t_w, a_w, integrand))


@dataclass
class ChordLawTable:
    """Tabulated scale-free chord law: density, CDF and mean on a fixed grid.

    The grid stores the law at unit MBS density; chords at density lambda_b
    follow by c -> c*sqrt(lambda_b).  ``cdf_values`` is the trapezoidal
    cumulative of ``pdf_values`` on the grid, so the two are self-consistent
    by construction.
    """

    grid: np.ndarray
    pdf_values: np.ndarray
    cdf_values: np.ndarray
    mean: float
    _pdf_interp: PchipInterpolator | None = field(default=None, repr=False, compare=False)
    _cdf_interp: PchipInterpolator | None = field(default=None, repr=False, compare=False)

    GRID_SIZE = 512
    C_MIN = 1e-3
    C_MAX = 8.0

    @classmethod
    def build(cls) -> "ChordLawTable":
        grid = np.concatenate([[0.0], np.geomspace(cls.C_MIN, cls.C_MAX, cls.GRID_SIZE - 1)])
        pdf = np.array([chord_pdf_direct(c) for c in grid])
        pdf = np.clip(pdf, 0.0, None)
        return cls._from_grid(grid, pdf)

    @classmethod
    def _from_grid(cls, grid: np.ndarray, pdf: np.ndarray) -> "ChordLawTable":
        cdf = np.concatenate([[0.0], np.cumsum(np.diff(grid) * 0.5 * (pdf[1:] + pdf[:-1]))])
        mean = float(np.trapezoid(grid * pdf, grid))
        return cls(grid=grid, pdf_values=pdf, cdf_values=cdf, mean=mean)

    @classmethod
    def from_samples(cls, chords_scaled: np.ndarray) -> "ChordLawTable":
        """Fallback table from empirical (unit-density scaled) chord samples."""
        from scipy.stats import gaussian_kde

        grid = np.concatenate([[0.0], np.geomspace(cls.C_MIN, cls.C_MAX, cls.GRID_SIZE - 1)])
        kde = gaussian_kde(chords_scaled)
        pdf = np.clip(kde(grid), 0.0, None)
        table = cls._from_grid(grid, pdf)
        # renormalise: KDE mass can leak below 0 and beyond the grid
        total = table.cdf_values[-1]
        return cls._from_grid(grid, pdf / total)

    def pdf(self, c_scaled):
        if self._pdf_interp is None:
            self._pdf_interp = PchipInterpolator(self.grid, self.pdf_values, extrapolate=False)
        c = np.asarray(c_scaled, dtype=float)
        out = self._pdf_interp(c)
        out = np.where(np.isnan(out), 0.0, np.clip(out, 0.0, None))
        return out if out.ndim else float(out)

    def cdf(self, c_scaled):
        if self._cdf_interp is None:
            self._cdf_interp = PchipInterpolator(self.grid, self.cdf_values, extrapolate=False)
        c = np.asarray(c_scaled, dtype=float)
        out = self._cdf_interp(c)
        out = np.where(c >= self.grid[-1], self.cdf_values[-1], out)
        out = np.where(c <= 0.0, 0.0, out)
        return out if out.ndim else float(out)

    def quadrature_nodes(self, n: int = 24) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Dense Gauss-Legendre nodes with interpolated pdf, for chord integrals."""
        edges = np.concatenate([[0.0], np.geomspace(0.05, self.grid[-1], 16)])
        nodes, weights = gauss_legendre_panels(edges, n)
        return nodes, weights, np.asarray(self.pdf(nodes))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("c_scaled,pdf,cdf\n")
            for c, p, q in zip(self.grid, self.pdf_values, self.cdf_values):
                fh.write(f"{c!r},{p!r},{q!r}\n")

    @classmethod
    def from_csv(cls, path: str | Path) -> "ChordLawTable":
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        grid, pdf, cdf = data[:, 0], data[:, 1], data[:, 2]
        mean = float(np.trapezoid(grid * pdf, grid))
        return cls(grid=grid, pdf_values=pdf, cdf_values=cdf, mean=mean)


_TABLE: ChordLawTable | None = None


def chord_law_table(cache_dir: str | Path | None = None) -> ChordLawTable:
    """Process-wide chord-law table, built once (or loaded from the cache dir).

    The cache directory is the explicit argument or $PLCP_LOAD_CACHE_DIR;
    when set, the table is persisted there as CSV for reuse across runs.
    """
    global _TABLE
    if _TABLE is not None:
        return _TABLE
    cache = cache_dir if cache_dir is not None else os.environ.get(CACHE_DIR_ENV)
    if cache:
        path = Path(cache) / _TABLE_FILENAME
        if path.is_file():
            _TABLE = ChordLawTable.from_csv(path)
            return _TABLE
    table = ChordLawTable.build()
    if cache:
        Path(cache).mkdir(parents=True, exist_ok=True)
        table.to_csv(Path(cache) / _TABLE_FILENAME)
    _TABLE = table
    return _TABLE


def chord_pdf(lambda_b: float, c, table: ChordLawTable | None = None):
    """Density of the chord a stationary line cuts out of the typical cell."""
    if table is None:
        table = chord_law_table()
    s = math.sqrt(lambda_b)
    return s * table.pdf(s * np.asarray(c, dtype=float))


def chord_origin_pdf(lambda_b: float, c0, table: ChordLawTable | None = None):
    """Length-biased chord law: the chord containing a given point of a line."""
    c0 = np.asarray(c0, dtype=float)
    return (4.0 * math.sqrt(lambda_b) / math.pi) * c0 * chord_pdf(lambda_b, c0, table)


class BiasedLaws(NamedTuple):
    chord_origin: Callable
    zero_area: Callable
    typical_disc_radius: Callable
    zero_disc_radius: Callable


def biased_laws(lambda_b: float, table: ChordLawTable | None = None) -> BiasedLaws:
    """The four point-selected densities at a given MBS density."""
    return BiasedLaws(
        chord_origin=lambda c0: chord_origin_pdf(lambda_b, c0, table),
        zero_area=lambda z: zero_area_pdf(lambda_b, z),
        typical_disc_radius=lambda r: typical_disc_radius_pdf(lambda_b, r),
        zero_disc_radius=lambda r: zero_disc_radius_pdf(lambda_b, r),
    )
