"""End-to-end simulation estimators for load and rate coverage.

These are the oracles for every analytic law in the package: each replication
builds the focal Voronoi cell geometrically, throws the line process over it,
and counts vehicles.  Replications use disjoint jump-ahead RNG streams keyed
by replication index, so a run is reproducible for a fixed (seed, stream_id)
no matter how many workers execute it.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .coverage import RateQuery
from .geometry import ConvexPolygon, Point2, chord_lengths_batch
from .load import Pmf
from .processes import (
    NetworkParams,
    RngSeed,
    replication_rngs,
    sample_plp_disc_arrays,
    sample_ppp_disc,
)
from .tessellation import (
    DEFAULT_WINDOW_K,
    _is_truncated,
    _voronoi_cell_verts,
    typical_cell,
    zero_cell,
)

__all__ = [
    "SimReport",
    "simulate_typical_load",
    "simulate_tagged_load",
    "simulate_rate_coverage",
]

_CHUNK = 4096
# For alpha = 4 a window of 15/sqrt(lambda_b) leaves < 0.1% of the mean
# interference outside.
_SIR_WINDOW_K = 15.0


@dataclass(frozen=True)
class SimReport:
    """Per-run record of a Monte-Carlo estimate."""

    n_replications: int
    n_discarded_truncated: int
    empirical_pmf: Pmf
    mean: float
    variance: float
    seed: RngSeed
    loads: np.ndarray
    chord_samples: np.ndarray | None = None
    sir_samples: np.ndarray | None = None
    sir_rate_samples: np.ndarray | None = None

    def rate_coverage_at(self, thresholds: np.ndarray) -> np.ndarray:
        """Empirical P(rate > T) for each threshold, from the rate samples."""
        if self.sir_rate_samples is None:
            raise ValueError("report carries no rate samples")
        t = np.asarray(thresholds, dtype=float)
        return (self.sir_rate_samples[None, :] > t[:, None]).mean(axis=1)

    def dump_csv(self, path: str | Path) -> None:
        """Raw per-replication dump: load only, or sir/load/rate when present."""
        with open(path, "w", encoding="utf-8") as fh:
            if self.sir_rate_samples is None:
                fh.write("replication,load\n")
                for i, m in enumerate(self.loads):
                    fh.write(f"{i},{int(m)}\n")
            else:
                fh.write("replication,sir_db,load,rate_bps\n")
                sir_db = 10.0 * np.log10(self.sir_samples)
                for i, (s, m, r) in enumerate(
                    zip(sir_db, self.loads, self.sir_rate_samples)
                ):
                    fh.write(f"{i},{s!r},{int(m)},{r!r}\n")


def _summarize(params: NetworkParams, loads: np.ndarray, seed: RngSeed,
               n_requested: int, n_discarded: int, m_max: int,
               chords: np.ndarray | None = None,
               sir: np.ndarray | None = None,
               rates: np.ndarray | None = None) -> SimReport:
    return SimReport(
        n_replications=n_requested,
        n_discarded_truncated=n_discarded,
        empirical_pmf=Pmf.from_counts(loads, m_max),
        mean=float(loads.mean()),
        variance=float(loads.var(ddof=1)) if loads.size > 1 else 0.0,
        seed=seed,
        loads=loads,
        chord_samples=chords,
        sir_samples=sir,
        sir_rate_samples=rates,
    )


def _chunk_typical(args):
    params, start, stop, seed, window_k, collect_chords = args
    loads = np.empty(stop - start, dtype=np.int64)
    chords_acc: list[np.ndarray] = []
    n_kept = 0
    n_disc = 0
    for rng in replication_rngs(seed, start, stop):
        sample = typical_cell(params, rng, window_k)
        if sample.truncated:
            n_disc += 1
            continue
        radius = sample.cell.circumradius_about((0.0, 0.0))
        rho, theta = sample_plp_disc_arrays(params.lambda_l, radius, rng)
        lengths = chord_lengths_batch(sample.cell, rho, theta)
        lengths = lengths[lengths > 0.0]
        loads[n_kept] = rng.poisson(params.lambda_v * float(lengths.sum()))
        n_kept += 1
        if collect_chords:
            chords_acc.append(lengths)
    chords = np.concatenate(chords_acc) if chords_acc else np.empty(0)
    return loads[:n_kept], n_disc, chords


def simulate_typical_load(params: NetworkParams, n: int, seed: RngSeed,
                          m_max: int = 64, window_k: float = DEFAULT_WINDOW_K,
                          collect_chords: bool = False, threads: int = 1) -> SimReport:
    """Empirical law of the vehicle count in the typical cell.

    Per replication: build the typical cell, throw the line process over a
    disc covering it, and draw the Poisson vehicle total along the chords.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    specs = [
        (params, lo, min(lo + _CHUNK, n), seed, window_k, collect_chords)
        for lo in range(0, n, _CHUNK)
    ]
    results = _run(_chunk_typical, specs, threads)
    loads = np.concatenate([r[0] for r in results])
    n_disc = sum(r[1] for r in results)
    chords = np.concatenate([r[2] for r in results]) if collect_chords else None
    return _summarize(params, loads, seed, n, n_disc, m_max, chords=chords)


def _chunk_tagged(args):
    params, start, stop, seed, window_k = args
    loads = np.empty(stop - start, dtype=np.int64)
    n_kept = 0
    n_disc = 0
    for rng in replication_rngs(seed, start, stop):
        sample = zero_cell(params, rng, window_k)
        if sample.truncated:
            n_disc += 1
            continue
        radius = sample.cell.circumradius_about((0.0, 0.0))
        rho, theta = sample_plp_disc_arrays(params.lambda_l, radius, rng)
        # the typical user's own line passes through the origin
        rho = np.append(rho, 0.0)
        theta = np.append(theta, 2.0 * math.pi * rng.random())
        lengths = chord_lengths_batch(sample.cell, rho, theta)
        total = float(lengths.sum())
        loads[n_kept] = 1 + rng.poisson(params.lambda_v * total)
        n_kept += 1
    return loads[:n_kept], n_disc


def simulate_tagged_load(params: NetworkParams, n: int, seed: RngSeed,
                         m_max: int = 64, window_k: float = DEFAULT_WINDOW_K,
                         threads: int = 1) -> SimReport:
    """Empirical law of the load on the MBS serving the typical user.

    The origin hosts the user; its cell is the zero cell of the MBS process,
    and the user's own road adds a line through the origin on top of the
    stationary line process.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    specs = [
        (params, lo, min(lo + _CHUNK, n), seed, window_k)
        for lo in range(0, n, _CHUNK)
    ]
    results = _run(_chunk_tagged, specs, threads)
    loads = np.concatenate([r[0] for r in results])
    n_disc = sum(r[1] for r in results)
    return _summarize(params, loads, seed, n, n_disc, m_max)


def _chunk_rate(args):
    params, start, stop, seed, window_k, alpha, bandwidth = args
    loads = np.empty(stop - start, dtype=np.int64)
    sir = np.empty(stop - start)
    n_kept = 0
    n_disc = 0
    r_win = window_k / math.sqrt(params.lambda_b)
    for rng in replication_rngs(seed, start, stop):
        while True:
            pts = sample_ppp_disc(params.lambda_b, r_win, Point2(0.0, 0.0), rng)
            if pts.shape[0] > 0:
                break
        d = np.hypot(pts[:, 0], pts[:, 1])
        i_serv = int(np.argmin(d))
        fading = rng.standard_exponential(pts.shape[0])
        power = fading * d ** (-alpha)
        interference = float(power.sum() - power[i_serv])
        sir_val = float(power[i_serv]) / interference
        nucleus = pts[i_serv]
        others = np.delete(pts, i_serv, axis=0)
        verts = _voronoi_cell_verts(nucleus, others, r_win)
        if _is_truncated(verts, nucleus, r_win):
            n_disc += 1
            continue
        cell = ConvexPolygon(verts, validate=False)
        radius = cell.circumradius_about((0.0, 0.0))
        rho, theta = sample_plp_disc_arrays(params.lambda_l, radius, rng)
        rho = np.append(rho, 0.0)
        theta = np.append(theta, 2.0 * math.pi * rng.random())
        lengths = chord_lengths_batch(cell, rho, theta)
        loads[n_kept] = 1 + rng.poisson(params.lambda_v * float(lengths.sum()))
        sir[n_kept] = sir_val
        n_kept += 1
    return loads[:n_kept], sir[:n_kept], n_disc


def simulate_rate_coverage(params: NetworkParams, query: RateQuery, n: int,
                           seed: RngSeed, window_k: float = _SIR_WINDOW_K,
                           threads: int = 1) -> SimReport:
    """Joint SIR/load simulation of the typical receiver's achievable rate.

    SIR and load come from the same replication, so the empirical rate law
    includes their (negative) correlation that the analytic product form
    ignores.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    specs = [
        (params, lo, min(lo + _CHUNK, n), seed, window_k,
         query.pathloss_alpha, query.bandwidth_B)
        for lo in range(0, n, _CHUNK)
    ]
    results = _run(_chunk_rate, specs, threads)
    loads = np.concatenate([r[0] for r in results])
    sir = np.concatenate([r[1] for r in results])
    n_disc = sum(r[2] for r in results)
    rates = (query.bandwidth_B / loads) * np.log2(1.0 + sir)
    return _summarize(params, loads, seed, n, n_disc, query.m_max,
                      sir=sir, rates=rates)


def _run(worker, specs, threads: int):
    """Execute chunk specs, in order, serially or on a process pool.

    Chunk boundaries are fixed by _CHUNK (not by the worker count) and each
    replication seeds its own stream, so results are identical for any
    ``threads``.
    """
    if threads <= 1 or len(specs) == 1:
        return [worker(s) for s in specs]
    try:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, specs))
    except OSError:
        # restricted environments may forbid subprocess workers
        return [worker(s) for s in specs]
