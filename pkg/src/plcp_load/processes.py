"""Seeded samplers: planar PPP, line process on a disc, vehicles on chords.

Every sampler takes an explicit ``numpy.random.Generator``; replication
streams are derived by jump-ahead from a (seed, stream_id) pair so results
are independent of how replications are scheduled across workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

from .geometry import ConvexPolygon, Line, Point2, chord_segment

__all__ = [
    "NetworkParams",
    "RngSeed",
    "replication_rng",
    "replication_rngs",
    "sample_ppp_disc",
    "sample_plp_disc",
    "sample_plp_disc_arrays",
    "sample_vehicles_on_chord",
    "sample_palm_plcp_line",
]


@dataclass(frozen=True)
class NetworkParams:
    """Process intensities and radio constants, in one consistent unit system.

    lambda_b : MBS density, km^-2
    mu_l     : line (road) density, km^-1 of road length per km^2
    lambda_v : vehicle density per line, km^-1
    alpha_pl : path-loss exponent (> 2)
    bandwidth_B : Hz
    tx_power_Pt : transmit power, arbitrary units (cancels in SIR)
    """

    lambda_b: float
    mu_l: float
    lambda_v: float
    alpha_pl: float = 4.0
    bandwidth_B: float = 1e7
    tx_power_Pt: float = 1.0

    def __post_init__(self) -> None:
        if not self.lambda_b > 0.0:
            raise ValueError("lambda_b must be positive")
        if not self.mu_l > 0.0:
            raise ValueError("mu_l must be positive")
        if self.lambda_v < 0.0:
            raise ValueError("lambda_v must be nonnegative")
        if not self.alpha_pl > 2.0:
            raise ValueError("alpha_pl must exceed 2")
        if not self.bandwidth_B > 0.0:
            raise ValueError("bandwidth_B must be positive")

    @property
    def lambda_l(self) -> float:
        """Intensity of the line process in representation space, mu_l / pi."""
        return self.mu_l / math.pi


@dataclass(frozen=True)
class RngSeed:
    """(seed, stream_id) fully determines every replication of a run."""

    seed: int
    stream_id: int = 0


def _base_bitgen(seed: RngSeed) -> PCG64:
    return PCG64(SeedSequence(entropy=(int(seed.seed), int(seed.stream_id))))


def replication_rng(seed: RngSeed, replication: int) -> Generator:
    """Independent generator for one replication, by PCG64 jump-ahead."""
    return Generator(_base_bitgen(seed).jumped(replication))


def replication_rngs(seed: RngSeed, start: int, stop: int) -> Iterator[Generator]:
    """Generators for replications [start, stop); cheap shared-base variant."""
    base = _base_bitgen(seed)
    for rep in range(start, stop):
        yield Generator(base.jumped(rep))


def sample_ppp_disc(density: float, radius: float, center: Point2,
                    rng: Generator) -> np.ndarray:
    """Homogeneous planar PPP restricted to a disc; returns an (n, 2) array."""
    if density < 0.0:
        raise ValueError("density must be nonnegative")
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    n = rng.poisson(density * math.pi * radius * radius)
    r = radius * np.sqrt(rng.random(n))
    ang = 2.0 * math.pi * rng.random(n)
    return np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)])


def sample_plp_disc_arrays(lambda_l: float, radius: float,
                           rng: Generator) -> tuple[np.ndarray, np.ndarray]:
    """(rho, theta) arrays of the lines of a PLP meeting a centred disc.

    The number of lines hitting a disc of radius R is Poisson with mean
    2*pi*lambda_l*R; conditionally rho ~ U(0, R) and theta ~ U[0, 2*pi).
    """
    n = rng.poisson(2.0 * math.pi * lambda_l * radius)
    rho = radius * rng.random(n)
    theta = 2.0 * math.pi * rng.random(n)
    return rho, theta


def sample_plp_disc(params: NetworkParams, radius: float, rng: Generator) -> list[Line]:
    """Lines of the road process meeting the disc B(o, radius)."""
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    rho, theta = sample_plp_disc_arrays(params.lambda_l, radius, rng)
    return [Line(r, t) for r, t in zip(rho, theta)]


def sample_vehicles_on_chord(line: Line, poly: ConvexPolygon, lambda_v: float,
                             rng: Generator) -> np.ndarray:
    """1D PPP of vehicles on the chord ``poly`` cuts out of ``line``.

    Returns an (n, 2) array of points; empty when the line misses the polygon
    or lambda_v is zero.
    """
    if lambda_v < 0.0:
        raise ValueError("lambda_v must be nonnegative")
    seg = chord_segment(poly, line)
    if seg is None:
        return np.empty((0, 2))
    lo, hi = seg
    n = rng.poisson(lambda_v * (hi - lo))
    t = lo + (hi - lo) * rng.random(n)
    fx, fy = line.foot
    dx, dy = line.direction
    return np.column_stack([fx + t * dx, fy + t * dy])


def sample_palm_plcp_line(rng: Generator) -> Line:
    """The typical line through the origin: rho = 0, theta ~ U[0, 2*pi)."""
    return Line(0.0, 2.0 * math.pi * rng.random())
