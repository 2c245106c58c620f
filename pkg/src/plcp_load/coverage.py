"""SIR coverage of the typical receiver and rate coverage under shared bandwidth.

Interference-limited downlink, Rayleigh fading, nearest-MBS association.  The
rate law mixes the SIR coverage over the tagged-cell load PMF, treating load
and SIR as independent; the Monte-Carlo engine measures the correlated truth,
and the small positive gap between the two is expected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .load import Pmf, pmf_tagged
from .numerics import DEFAULT_QUADRATURE, QuadratureConfig, integrate
from .processes import NetworkParams

__all__ = ["RateQuery", "RateCoverageResult", "coverage_probability", "rate_coverage"]

_TAIL_WARN = 1e-3


@dataclass(frozen=True)
class RateQuery:
    """Rate threshold and the radio constants entering the rate law."""

    rate_threshold_T: float
    bandwidth_B: float = 1e7
    pathloss_alpha: float = 4.0
    m_max: int = 64

    def __post_init__(self) -> None:
        if self.rate_threshold_T < 0.0:
            raise ValueError("rate threshold must be nonnegative")
        if not self.bandwidth_B > 0.0:
            raise ValueError("bandwidth must be positive")
        if not self.pathloss_alpha > 2.0:
            raise ValueError("path-loss exponent must exceed 2")
        if self.m_max < 1:
            raise ValueError("m_max must be at least 1")


@dataclass(frozen=True)
class RateCoverageResult:
    value: float
    tail_bound: float
    warning: str | None = None


def coverage_probability(lambda_b: float, alpha: float, beta: float,
                         cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """P(SIR > beta) for the typical receiver of a PPP network.

    Computed as the standard double integral over the serving distance r and
    the interferer distance y; substituting y = r*t makes the inner integral
    independent of r, after which the outer integral is evaluated adaptively.
    The result does not depend on lambda_b (pure SIR scale invariance), which
    is asserted cheap here and verified in the tests.
    """
    if not lambda_b > 0.0:
        raise ValueError("lambda_b must be positive")
    if not alpha > 2.0:
        raise ValueError("alpha must exceed 2")
    if beta < 0.0:
        raise ValueError("beta must be nonnegative")
    if beta == 0.0:
        return 1.0
    # inner: int_r^inf 2*pi*lambda_b*beta*y / (beta + r^-alpha y^alpha) dy
    # with y = r*t becomes 2*pi*lambda_b*r^2*beta*J, J = int_1^inf t/(beta+t^alpha) dt.
    # Rescaling t by beta^(1/alpha) keeps the integrand O(1) for any beta, so
    # the quadrature tolerance applies to the quantity that matters:
    # beta*J = beta^(2/alpha) * int_{beta^(-1/alpha)}^inf u/(1+u^alpha) du.
    lo = math.exp(-math.log(beta) / alpha)
    tail = integrate(lambda u: u / (1.0 + u**alpha), lo, math.inf, cfg).value
    beta_j = math.exp(2.0 * math.log(beta) / alpha) * tail
    A = math.pi * lambda_b * (1.0 + 2.0 * beta_j)

    def outer(r: float) -> float:
        return 2.0 * math.pi * lambda_b * r * math.exp(-A * r * r)

    scale = 1.0 / math.sqrt(lambda_b)
    out_cfg = cfg if cfg.infinite_tail_cut == scale else QuadratureConfig(
        rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
        max_subdivisions=cfg.max_subdivisions, infinite_tail_cut=scale,
    )
    return integrate(outer, 0.0, math.inf, out_cfg).value


def rate_coverage(params: NetworkParams, query: RateQuery,
                  cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                  load_pmf: Pmf | None = None) -> RateCoverageResult:
    """P(rate > T) for the typical vehicular user, rate = (B/M) log2(1 + SIR).

    Sums P(M = m) * P(SIR > 2^(T m / B) - 1) over the tagged-cell load law.
    The PMF's tail mass bounds the neglected contribution (each term is a
    probability <= 1) and is reported; a warning is attached when it exceeds
    a meaningful size.
    """
    if load_pmf is None:
        load_pmf = pmf_tagged(params, m_max=query.m_max)
    acc = 0.0
    ln2 = math.log(2.0)
    for m in range(1, load_pmf.m_max + 1):
        p_m = load_pmf.probs[m]
        if p_m == 0.0:
            continue
        x = query.rate_threshold_T * m / query.bandwidth_B
        if x == 0.0:
            acc += p_m
            continue
        # coverage ~ gamma^(-2/alpha): once log2(gamma) * 2/alpha is large the
        # term is below 1e-19; also guards expm1 against overflow
        if 2.0 * x * ln2 / query.pathloss_alpha > 46.0 or x > 1000.0:
            continue
        gamma = math.expm1(x * ln2)
        acc += p_m * coverage_probability(params.lambda_b, query.pathloss_alpha, gamma, cfg)
    tail = load_pmf.tail_mass
    warning = None
    if tail > _TAIL_WARN:
        warning = (
            f"load PMF tail mass {tail:.3g} exceeds {_TAIL_WARN}; "
            "increase m_max for a tighter rate-coverage value"
        )
    return RateCoverageResult(value=acc, tail_bound=tail, warning=warning)
