"""Total-chord-length Laplace transforms and the load PMFs.

Three laws are computed.  The exact typical-cell law conditions on the cell
perimeter: given perimeter u the number of intersecting lines is Poisson with
mean lambda_l*u and each contributes an independent chord, so the conditional
transform is exp(-lambda_l*u*(1 - L_C(s))).  The disc approximation replaces
the cell by the disc of equal area (radius mixed over the fitted area law).
The tagged-cell law adds the length-biased chord through the origin and uses
the area-biased zero-cell disc.

The m-th derivatives needed for the PMFs are never taken numerically: each
conditional transform is exp(h(s)) with analytically known h-derivatives, and
the factorially scaled exp-composition recurrence turns those into conditional
load probabilities directly (all terms nonnegative, no cancellation, factors
of m! handled in log domain inside the Poisson weights).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import gammaln

from .laws import (
    ChordLawTable,
    area_pdf,
    chord_law_table,
    perimeter_pdf,
    typical_disc_radius_pdf,
    zero_disc_radius_pdf,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureConfig,
    exp_composition_scaled,
    gauss_legendre_panels,
    integrate,
)
from .processes import NetworkParams

__all__ = [
    "Pmf",
    "TotalChordLaw",
    "laplace_W_typical_exact",
    "laplace_W_typical_disc",
    "laplace_W_zero",
    "pmf_typical",
    "pmf_tagged",
]

_PROB_TOL = 1e-9


@dataclass(frozen=True)
class Pmf:
    """Truncated discrete law p_0..p_{m_max} with explicit tail mass."""

    probs: np.ndarray
    tail_mass: float
    m_max: int

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (self.m_max + 1,):
            raise ValueError("probs must have length m_max + 1")
        if np.any(probs < -_PROB_TOL) or np.any(probs > 1.0 + _PROB_TOL):
            worst = int(np.argmin(probs))
            raise ValueError(f"probability out of range at m={worst}: {probs[worst]!r}")
        if self.tail_mass < -_PROB_TOL:
            raise ValueError(f"negative tail mass {self.tail_mass!r}")
        total = float(probs.sum()) + self.tail_mass
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probabilities and tail must sum to 1, got {total!r}")
        object.__setattr__(self, "probs", np.clip(probs, 0.0, 1.0))
        object.__setattr__(self, "tail_mass", max(0.0, float(self.tail_mass)))

    @classmethod
    def from_counts(cls, loads: np.ndarray, m_max: int) -> "Pmf":
        loads = np.asarray(loads)
        total = loads.size
        if total == 0:
            raise ValueError("no samples")
        counts = np.bincount(np.minimum(loads, m_max + 1), minlength=m_max + 2)
        probs = counts[: m_max + 1] / total
        return cls(probs=probs, tail_mass=counts[m_max + 1] / total, m_max=m_max)

    def mean(self) -> float:
        """Mean of the truncated part (tail ignored)."""
        return float(np.dot(np.arange(self.m_max + 1), self.probs))

    def pgf(self, z: float) -> float:
        """Probability generating function of the truncated part."""
        return float(np.dot(self.probs, z ** np.arange(self.m_max + 1)))

    def tv_distance(self, other: "Pmf") -> float:
        """Total variation distance, tails compared as a single bin."""
        if other.m_max != self.m_max:
            raise ValueError("PMFs must share m_max")
        return 0.5 * (
            float(np.abs(self.probs - other.probs).sum())
            + abs(self.tail_mass - other.tail_mass)
        )


# ---------------------------------------------------------------------------
# chord-count building blocks
# ---------------------------------------------------------------------------

def _poisson_block(orders: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """pois(j; mu) = mu^j exp(-mu) / j! on an (orders,) x mu.shape grid.

    Evaluated in log domain so large j never overflows the factorial.
    """
    mu = np.asarray(mu, dtype=float)
    j = orders.reshape((orders.size,) + (1,) * mu.ndim).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = j * np.log(mu) - mu - gammaln(j + 1.0)
    out = np.exp(logp)
    zero = mu == 0.0
    if np.any(zero):
        out[:, zero] = 0.0
        out[0, zero] = 1.0
    return out


def _chord_nodes(params: NetworkParams, table: ChordLawTable):
    """Dense chord quadrature nodes in physical units with f_C weights."""
    nodes_s, weights_s, pdf_s = table.quadrature_nodes()
    s = math.sqrt(params.lambda_b)
    return nodes_s / s, weights_s * pdf_s  # weight includes f_C(c) dc mass


def _chord_count_probs(params: NetworkParams, m_max: int, table: ChordLawTable) -> np.ndarray:
    """q_j = P(j vehicles on the chord of one intersecting line), j = 0..m_max."""
    c, w = _chord_nodes(params, table)
    block = _poisson_block(np.arange(m_max + 1), params.lambda_v * c)
    q = block @ w
    return q / np.sum(w)  # remove the table's ~1e-6 normalisation defect


def _origin_chord_count_probs(params: NetworkParams, m_max: int,
                              table: ChordLawTable) -> np.ndarray:
    """Vehicle-count law on the length-biased chord through the origin."""
    c, w = _chord_nodes(params, table)
    w0 = w * c * (4.0 * math.sqrt(params.lambda_b) / math.pi)
    block = _poisson_block(np.arange(m_max + 1), params.lambda_v * c)
    q = block @ w0
    return q / np.sum(w0)


_HALF_PI_NODES = 64


def _disc_line_kernel(params: NetworkParams, r: np.ndarray, m_max: int):
    """Scaled h-derivatives and base value for the disc-kernel transform.

    For a disc of radius r the lines hit at rate 2*pi*lambda_l*r with chord
    2*sqrt(r^2 - rho^2); substituting rho = r*sin(t) removes the square-root
    derivative singularity at rho = r.  Returns (H, T0) with
    H[i, j-1] = lambda_v^j |h^(j)(lambda_v)| / j! at radius r_i.
    """
    t, wt = gauss_legendre_panels([0.0, 0.5 * math.pi], _HALF_PI_NODES)
    cos_t = np.cos(t)
    mu = 2.0 * params.lambda_v * r[:, None] * cos_t[None, :]
    rate = 2.0 * math.pi * params.lambda_l * r
    # count law of vehicles on one uniformly placed chord of the disc
    block = _poisson_block(np.arange(m_max + 1), mu)  # (m+1, n_r, n_t)
    q = np.einsum("jrt,t->rj", block, wt * cos_t)
    h0 = np.einsum("rt,t->r", 1.0 - np.exp(-mu), wt * cos_t)
    T0 = np.exp(-rate * h0)
    H = rate[:, None] * q[:, 1:]
    return H, T0, q[:, 0]


def _disc_mixture_pmf(params: NetworkParams, m_max: int, radius_pdf) -> np.ndarray:
    """Mix the disc-conditional load law over a law of the disc radius."""
    r_hat_max = math.sqrt(12.0 / math.pi)  # area fit is ~1e-17 beyond lambda_b*z = 12
    edges = np.linspace(0.0, r_hat_max / math.sqrt(params.lambda_b), 14)
    r, wr = gauss_legendre_panels(edges, 12)
    mix = wr * radius_pdf(r)
    H, T0, _ = _disc_line_kernel(params, r, m_max)
    T = exp_composition_scaled(H, T0)
    return mix @ T


# ---------------------------------------------------------------------------
# Laplace transforms
# ---------------------------------------------------------------------------

def laplace_W_typical_exact(params: NetworkParams, s: float,
                            cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                            table: ChordLawTable | None = None) -> float:
    """Transform of the total chord length in the typical cell (perimeter-mixed)."""
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        return 1.0
    if table is None:
        table = chord_law_table()
    c, w = _chord_nodes(params, table)
    lap_c = float(np.dot(w, np.exp(-s * c)) / np.sum(w))
    rate = params.lambda_l * (1.0 - lap_c)
    val = integrate(
        lambda u: math.exp(-rate * u) * perimeter_pdf(params.lambda_b, u),
        0.0,
        math.inf,
        cfg,
    )
    return val.value


def laplace_W_typical_disc(params: NetworkParams, s: float,
                           cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Equal-area-disc approximation of the typical-cell transform."""
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        return 1.0
    return integrate(
        lambda r: _disc_conditional_laplace(params, s, r) * typical_disc_radius_pdf(params.lambda_b, r),
        0.0,
        math.inf,
        cfg,
    ).value


def _disc_conditional_laplace(params: NetworkParams, s: float, r: float) -> float:
    t, wt = gauss_legendre_panels([0.0, 0.5 * math.pi], _HALF_PI_NODES)
    cos_t = np.cos(t)
    inner = r * float(np.dot(wt * cos_t, 1.0 - np.exp(-2.0 * s * r * cos_t)))
    return math.exp(-2.0 * math.pi * params.lambda_l * inner)


def laplace_W_zero(params: NetworkParams, s: float,
                   cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                   table: ChordLawTable | None = None) -> float:
    """Transform of the total chord length in the zero cell.

    Factorises as (origin-chord part) * (equal-area-disc part), the two being
    independent.
    """
    if s < 0.0:
        raise ValueError("s must be nonnegative")
    if s == 0.0:
        return 1.0
    if table is None:
        table = chord_law_table()
    c, w = _chord_nodes(params, table)
    w0 = w * c
    lap_c0 = float(np.dot(w0, np.exp(-s * c)) / np.sum(w0))
    lap_c1 = integrate(
        lambda r: _disc_conditional_laplace(params, s, r) * zero_disc_radius_pdf(params.lambda_b, r),
        0.0,
        math.inf,
        cfg,
    ).value
    return lap_c0 * lap_c1


@dataclass(frozen=True)
class TotalChordLaw:
    """Dispatcher over the three total-chord-length transforms."""

    kind: Literal["typical_exact", "typical_disc", "zero_disc"]
    params: NetworkParams

    def laplace(self, s: float, cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
        if self.kind == "typical_exact":
            return laplace_W_typical_exact(self.params, s, cfg)
        if self.kind == "typical_disc":
            return laplace_W_typical_disc(self.params, s, cfg)
        if self.kind == "zero_disc":
            return laplace_W_zero(self.params, s, cfg)
        raise ValueError(f"unknown kind {self.kind!r}")


# ---------------------------------------------------------------------------
# load PMFs
# ---------------------------------------------------------------------------

def _finalize_pmf(probs: np.ndarray, m_max: int) -> Pmf:
    if np.any(probs < -_PROB_TOL):
        worst = int(np.argmin(probs))
        raise ArithmeticError(
            f"load PMF went negative at m={worst}: {probs[worst]!r}; "
            "quadrature grid too coarse for these parameters"
        )
    probs = np.clip(probs, 0.0, None)
    return Pmf(probs=probs, tail_mass=1.0 - float(probs.sum()), m_max=m_max)


def pmf_typical(params: NetworkParams, m_max: int = 64,
                method: Literal["exact", "disc"] = "disc",
                table: ChordLawTable | None = None) -> Pmf:
    """PMF of the number of vehicles in the typical cell.

    ``exact`` mixes the conditional-on-perimeter law over the perimeter fit;
    ``disc`` replaces the cell by the equal-area disc (much lighter, and
    accurate within a few percent total variation).
    """
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    if params.lambda_v == 0.0:
        probs = np.zeros(m_max + 1)
        probs[0] = 1.0
        return Pmf(probs=probs, tail_mass=0.0, m_max=m_max)
    if method == "exact":
        if table is None:
            table = chord_law_table()
        q = _chord_count_probs(params, m_max, table)
        u_max = 12.0 / math.sqrt(params.lambda_b)
        u, wu = gauss_legendre_panels(np.linspace(0.0, u_max, 16), 12)
        mix = wu * perimeter_pdf(params.lambda_b, u)
        lam_u = params.lambda_l * u
        H = lam_u[:, None] * q[None, 1:]
        T0 = np.exp(-lam_u * (1.0 - q[0]))
        T = exp_composition_scaled(H, T0)
        probs = mix @ T
    elif method == "disc":
        probs = _disc_mixture_pmf(
            params, m_max, lambda r: typical_disc_radius_pdf(params.lambda_b, r)
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    return _finalize_pmf(probs, m_max)


def pmf_tagged(params: NetworkParams, m_max: int = 64,
               table: ChordLawTable | None = None) -> Pmf:
    """PMF of the load on the MBS serving the typical vehicular user.

    The served user itself is always counted, so p_0 = 0 and the law is the
    unit shift of (users on the origin chord) + (users on the other chords of
    the zero cell, in its equal-area-disc approximation); the two counts are
    independent, so the shifted law is their discrete convolution.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    probs = np.zeros(m_max + 1)
    if params.lambda_v == 0.0:
        probs[1] = 1.0
        return Pmf(probs=probs, tail_mass=0.0, m_max=m_max)
    if table is None:
        table = chord_law_table()
    origin_counts = _origin_chord_count_probs(params, m_max - 1, table)
    disc_counts = _disc_mixture_pmf(
        params, m_max - 1, lambda r: zero_disc_radius_pdf(params.lambda_b, r)
    )
    probs[1:] = np.convolve(origin_counts, disc_counts)[:m_max]
    return _finalize_pmf(probs, m_max)
