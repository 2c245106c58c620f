"""Command-line front end: load-PMF tables, rate-coverage tables, validation.

All units are documented in --help: lengths km, densities km^-1 or km^-2,
bandwidth Hz, rate thresholds bits/s.  Tables are CSV with a '#'-prefixed
metadata header (or JSON with the same content) and are byte-stable for a
fixed configuration and seed.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import __version__
from .coverage import RateQuery, coverage_probability, rate_coverage
from .laws import (
    GG_AREA,
    GG_PERIMETER,
    GeneralizedGamma,
    area_pdf,
    chord_law_table,
    chord_origin_pdf,
    chord_pdf,
    perimeter_pdf,
    typical_disc_radius_pdf,
    zero_area_pdf,
    zero_disc_radius_pdf,
)
from .load import Pmf, pmf_tagged, pmf_typical
from .montecarlo import simulate_rate_coverage, simulate_tagged_load, simulate_typical_load
from .numerics import QuadratureError, integrate
from .processes import NetworkParams, RngSeed

__all__ = ["main", "build_parser", "RunConfig", "run_validation"]

_DEFAULT_THRESHOLDS = (2.5e5, 5e5, 1e6, 2e6, 4e6)

_TV_TOL_TYPICAL = 0.02
_TV_TOL_TAGGED = 0.03
_RC_TOL = 0.03


@dataclass(frozen=True)
class RunConfig:
    """Fully validated configuration of one CLI invocation."""

    command: str
    params: NetworkParams
    m_max: int
    n_samples: int
    seed: RngSeed
    threads: int
    thresholds: tuple[float, ...]
    output_path: str | None
    output_format: str
    tolerance: float | None
    include_exact: bool
    validate: bool
    dump_samples: str | None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plcp-load",
        description=(
            "Load PMFs and rate coverage of cellular base stations serving "
            "vehicular users on a random road network. Units: lengths km, "
            "lambda-b km^-2, mu-l km^-1, lambda-v km^-1, bandwidth Hz, "
            "rate thresholds bits/s."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, default_samples: int) -> None:
        p.add_argument("--lambda-b", type=float, default=1.0,
                       help="MBS density, km^-2 (default 1)")
        p.add_argument("--mu-l", type=float, default=5.0,
                       help="road (line) density, km^-1 (default 5)")
        p.add_argument("--lambda-v", type=float, default=2.0,
                       help="vehicle density per road, km^-1 (default 2)")
        p.add_argument("--alpha", type=float, default=4.0,
                       help="path-loss exponent, > 2 (default 4)")
        p.add_argument("--bandwidth", type=float, default=1e7,
                       help="shared bandwidth, Hz (default 1e7)")
        p.add_argument("--m-max", type=int, default=64,
                       help="largest tabulated load (default 64)")
        p.add_argument("--samples", type=int, default=default_samples,
                       help="Monte-Carlo replications; 0 disables the empirical column")
        p.add_argument("--seed", type=int, default=1,
                       help="base seed; fully determines the simulation")
        p.add_argument("--stream-id", type=int, default=0,
                       help="RNG stream id (advanced; default 0)")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                       help="worker processes (results do not depend on this)")
        p.add_argument("--out", type=str, default=None,
                       help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="output format (default csv)")
        p.add_argument("--dump-samples", type=str, default=None,
                       help="write raw per-replication samples to this CSV")

    p_typ = sub.add_parser("pmf-typical", help="PMF of the load on the typical MBS")
    add_common(p_typ, 0)
    p_typ.add_argument("--exact", action="store_true",
                       help="also tabulate the exact (perimeter-mixed) PMF")
    p_typ.add_argument("--validate", action="store_true",
                       help="exit 1 unless TV(analytic, empirical) < tolerance")
    p_typ.add_argument("--tolerance", type=float, default=_TV_TOL_TYPICAL)

    p_tag = sub.add_parser("pmf-tagged", help="PMF of the load on the tagged MBS")
    add_common(p_tag, 0)
    p_tag.add_argument("--validate", action="store_true",
                       help="exit 1 unless TV(analytic, empirical) < tolerance")
    p_tag.add_argument("--tolerance", type=float, default=_TV_TOL_TAGGED)

    p_rate = sub.add_parser("rate-coverage", help="rate coverage of the typical receiver")
    add_common(p_rate, 0)
    p_rate.add_argument("--thresholds", type=str,
                        default=",".join(repr(t) for t in _DEFAULT_THRESHOLDS),
                        help="comma-separated rate thresholds, bits/s")
    p_rate.add_argument("--validate", action="store_true",
                        help="exit 1 unless |analytic - empirical| < tolerance at every threshold")
    p_rate.add_argument("--tolerance", type=float, default=_RC_TOL)

    p_val = sub.add_parser("validate", help="run the analytic-vs-simulation check suite")
    add_common(p_val, 20000)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    params = NetworkParams(
        lambda_b=args.lambda_b,
        mu_l=args.mu_l,
        lambda_v=args.lambda_v,
        alpha_pl=args.alpha,
        bandwidth_B=args.bandwidth,
    )
    if args.m_max < 1:
        raise ValueError("--m-max must be at least 1")
    if args.samples < 0:
        raise ValueError("--samples must be nonnegative")
    if args.threads < 1:
        raise ValueError("--threads must be at least 1")
    thresholds = ()
    if getattr(args, "thresholds", None):
        thresholds = tuple(float(t) for t in str(args.thresholds).split(",") if t != "")
        if any(t < 0.0 for t in thresholds):
            raise ValueError("thresholds must be nonnegative")
        thresholds = tuple(sorted(thresholds))
    return RunConfig(
        command=args.command,
        params=params,
        m_max=args.m_max,
        n_samples=args.samples,
        seed=RngSeed(seed=args.seed, stream_id=args.stream_id),
        threads=args.threads,
        thresholds=thresholds,
        output_path=args.out,
        output_format=args.format,
        tolerance=getattr(args, "tolerance", None),
        include_exact=getattr(args, "exact", False),
        validate=getattr(args, "validate", False),
        dump_samples=args.dump_samples,
    )


# ---------------------------------------------------------------------------
# table rendering
# ---------------------------------------------------------------------------

def _metadata(config: RunConfig) -> dict:
    p = config.params
    return {
        "tool": f"plcp-load {__version__}",
        "command": config.command,
        "lambda_b_km2": p.lambda_b,
        "mu_l_km1": p.mu_l,
        "lambda_v_km1": p.lambda_v,
        "alpha": p.alpha_pl,
        "bandwidth_hz": p.bandwidth_B,
        "m_max": config.m_max,
        "samples": config.n_samples,
        "seed": config.seed.seed,
        "stream_id": config.seed.stream_id,
    }


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _render(headers: Sequence[str], rows: Sequence[Sequence], config: RunConfig) -> str:
    meta = _metadata(config)
    if config.output_format == "json":
        doc = {
            "metadata": meta,
            "columns": list(headers),
            "rows": [[(int(v) if isinstance(v, (int, np.integer)) else float(v)) for v in row]
                     for row in rows],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    lines = [f"# {k} = {_fmt(v) if not isinstance(v, str) else v}" for k, v in meta.items()]
    lines.append(",".join(headers))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def _emit(text: str, config: RunConfig) -> None:
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_pmf(config: RunConfig) -> int:
    """Shared implementation of pmf-typical and pmf-tagged."""
    tagged = config.command == "pmf-tagged"
    if tagged:
        analytic = pmf_tagged(config.params, m_max=config.m_max)
    else:
        analytic = pmf_typical(config.params, m_max=config.m_max, method="disc")
    exact = None
    if config.include_exact and not tagged:
        exact = pmf_typical(config.params, m_max=config.m_max, method="exact")

    report = None
    if config.n_samples > 0:
        sim = simulate_tagged_load if tagged else simulate_typical_load
        report = sim(config.params, config.n_samples, config.seed,
                     m_max=config.m_max, threads=config.threads)
        if config.dump_samples:
            report.dump_csv(config.dump_samples)

    headers = ["m"]
    if exact is not None:
        headers.append("p_analytic_exact")
    headers.append("p_analytic_disc")
    if report is not None:
        headers += ["p_empirical", "abs_diff"]

    if analytic.tail_mass > 1e-4:
        sys.stderr.write(
            f"warning: PMF tail mass {analytic.tail_mass:.3g} at m_max={config.m_max}; "
            "increase --m-max\n"
        )

    n_rows = 1 if config.params.lambda_v == 0.0 and not tagged else config.m_max + 1
    rows = []
    for m in range(n_rows):
        row: list = [m]
        if exact is not None:
            row.append(exact.probs[m])
        row.append(analytic.probs[m])
        if report is not None:
            emp = report.empirical_pmf.probs[m]
            row += [emp, abs(analytic.probs[m] - emp)]
        rows.append(row)
    _emit(_render(headers, rows, config), config)

    if config.validate:
        if report is None:
            raise ValueError("--validate requires --samples > 0")
        tv = analytic.tv_distance(report.empirical_pmf)
        sys.stderr.write(f"tv_distance = {tv!r} (tolerance {config.tolerance!r})\n")
        if not tv < config.tolerance:
            return 1
    return 0


def cmd_rate_coverage(config: RunConfig) -> int:
    if not config.thresholds:
        raise ValueError("rate-coverage needs at least one threshold")
    load_pmf = pmf_tagged(config.params, m_max=config.m_max)
    analytic = []
    for t in config.thresholds:
        query = RateQuery(rate_threshold_T=t, bandwidth_B=config.params.bandwidth_B,
                          pathloss_alpha=config.params.alpha_pl, m_max=config.m_max)
        res = rate_coverage(config.params, query, load_pmf=load_pmf)
        if res.warning:
            sys.stderr.write(f"warning: {res.warning}\n")
        analytic.append(res)

    # thresholds are sorted, so the analytic column must come out nonincreasing
    values = [r.value for r in analytic]
    if any(b > a + 1e-9 for a, b in zip(values, values[1:])):
        raise ArithmeticError("analytic rate coverage is not monotone in T")

    empirical = None
    if config.n_samples > 0:
        query = RateQuery(rate_threshold_T=config.thresholds[0],
                          bandwidth_B=config.params.bandwidth_B,
                          pathloss_alpha=config.params.alpha_pl, m_max=config.m_max)
        report = simulate_rate_coverage(config.params, query, config.n_samples,
                                        config.seed, threads=config.threads)
        empirical = report.rate_coverage_at(np.array(config.thresholds))
        if config.dump_samples:
            report.dump_csv(config.dump_samples)

    headers = ["T_bps", "Rc_analytic"]
    if empirical is not None:
        headers.append("Rc_empirical")
    headers.append("tail_mass")
    rows = []
    for i, t in enumerate(config.thresholds):
        row: list = [t, analytic[i].value]
        if empirical is not None:
            row.append(float(empirical[i]))
        row.append(analytic[i].tail_bound)
        rows.append(row)
    _emit(_render(headers, rows, config), config)

    if config.validate:
        if empirical is None:
            raise ValueError("--validate requires --samples > 0")
        worst = max(abs(a.value - float(e)) for a, e in zip(analytic, empirical))
        sys.stderr.write(f"max |analytic - empirical| = {worst!r} "
                         f"(tolerance {config.tolerance!r})\n")
        if not worst < config.tolerance:
            return 1
    return 0


# ---------------------------------------------------------------------------
# validation suite
# ---------------------------------------------------------------------------

def _check(name: str, measured: float, tolerance: float) -> dict:
    return {
        "name": name,
        "measured": float(measured),
        "tolerance": float(tolerance),
        "passed": bool(measured <= tolerance),
    }


def _ks_distance(samples: np.ndarray, cdf_values: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance between sorted-sample ECDF and a model CDF."""
    n = samples.size
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    return float(np.max(np.maximum(np.abs(ecdf_hi - cdf_values),
                                   np.abs(ecdf_lo - cdf_values))))


def run_validation(params: NetworkParams, n_samples: int, seed: RngSeed,
                   m_max: int = 64, threads: int = 1,
                   fu_fit: GeneralizedGamma = GG_PERIMETER,
                   fz_fit: GeneralizedGamma = GG_AREA) -> dict:
    """Full analytic-vs-oracle check suite; returns a JSON-serialisable report.

    ``fu_fit``/``fz_fit`` exist as a test hook: perturbing the fitted
    constants must make the corresponding checks fail.
    """
    lb = params.lambda_b
    sq = math.sqrt(lb)
    table = chord_law_table()
    checks: list[dict] = []

    # density normalisations (adaptive quadrature over the full support)
    c_max = table.grid[-1] / sq
    norm_specs = [
        ("normalization_f_C", lambda c: chord_pdf(lb, c), 0.0, c_max),
        ("normalization_f_U", lambda u: float(perimeter_pdf(lb, u, fit=fu_fit)), 0.0, math.inf),
        ("normalization_f_Z", lambda z: float(area_pdf(lb, z, fit=fz_fit)), 0.0, math.inf),
        ("normalization_f_C0", lambda c: chord_origin_pdf(lb, c), 0.0, c_max),
        ("normalization_f_Zp", lambda z: float(zero_area_pdf(lb, z)), 0.0, math.inf),
        ("normalization_f_Rt", lambda r: float(typical_disc_radius_pdf(lb, r)), 0.0, math.inf),
        ("normalization_f_Rz", lambda r: float(zero_disc_radius_pdf(lb, r)), 0.0, math.inf),
    ]
    for name, f, lo, hi in norm_specs:
        total = integrate(f, lo, hi).value
        checks.append(_check(name, abs(total - 1.0), 2e-3))

    # first-moment identities
    mean_z = integrate(lambda z: z * float(area_pdf(lb, z, fit=fz_fit)), 0.0, math.inf).value
    checks.append(_check("mean_area_f_Z", abs(mean_z * lb - 1.0), 5e-3))
    mean_u = integrate(lambda u: u * float(perimeter_pdf(lb, u, fit=fu_fit)), 0.0, math.inf).value
    checks.append(_check("mean_perimeter_f_U", abs(mean_u * sq / 4.0 - 1.0), 1e-2))
    mean_c = integrate(lambda c: c * chord_pdf(lb, c), 0.0, c_max).value
    checks.append(_check("mean_chord_f_C", abs(mean_c / (math.pi / (4.0 * sq)) - 1.0), 5e-3))

    # Monte-Carlo cross-validation
    typ = simulate_typical_load(params, n_samples, seed, m_max=m_max,
                                collect_chords=True, threads=threads)
    tag = simulate_tagged_load(params, n_samples,
                               RngSeed(seed.seed, seed.stream_id + 1),
                               m_max=m_max, threads=threads)

    chords = np.sort(typ.chord_samples)
    ks = _ks_distance(chords, np.asarray(table.cdf(chords * sq)))
    checks.append(_check("ks_chord_law", ks, 0.015))

    disc = pmf_typical(params, m_max=m_max, method="disc")
    exact = pmf_typical(params, m_max=m_max, method="exact")
    tagged = pmf_tagged(params, m_max=m_max)
    checks.append(_check("tv_typical_disc_vs_empirical",
                         disc.tv_distance(typ.empirical_pmf), _TV_TOL_TYPICAL))
    checks.append(_check("tv_typical_exact_vs_disc", exact.tv_distance(disc), 0.03))
    checks.append(_check("tv_tagged_vs_empirical",
                         tagged.tv_distance(tag.empirical_pmf), _TV_TOL_TAGGED))

    mean_load = params.lambda_v * params.mu_l / params.lambda_b
    if mean_load > 0.0:
        checks.append(_check("mean_load_analytic",
                             abs(disc.mean() / mean_load - 1.0), 0.02))
        checks.append(_check("mean_load_empirical",
                             abs(typ.mean / mean_load - 1.0), 0.02))

    closed_form = 1.0 / (1.0 + math.pi / 4.0)
    checks.append(_check("coverage_closed_form_alpha4",
                         abs(coverage_probability(lb, 4.0, 1.0) - closed_form), 1e-3))

    return {
        "params": {
            "lambda_b_km2": params.lambda_b,
            "mu_l_km1": params.mu_l,
            "lambda_v_km1": params.lambda_v,
            "alpha": params.alpha_pl,
            "bandwidth_hz": params.bandwidth_B,
        },
        "seed": seed.seed,
        "stream_id": seed.stream_id,
        "n_samples": n_samples,
        "m_max": m_max,
        "checks": checks,
        "all_pass": all(c["passed"] for c in checks),
    }


def cmd_validate(config: RunConfig) -> int:
    report = run_validation(config.params, config.n_samples, config.seed,
                            m_max=config.m_max, threads=config.threads)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    _emit(text, config)
    if not report["all_pass"]:
        failed = [c["name"] for c in report["checks"] if not c["passed"]]
        sys.stderr.write(f"failed checks: {', '.join(failed)}\n")
        return 1
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
    except ValueError as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")
    try:
        if config.command in ("pmf-typical", "pmf-tagged"):
            return cmd_pmf(config)
        if config.command == "rate-coverage":
            return cmd_rate_coverage(config)
        if config.command == "validate":
            return cmd_validate(config)
        raise ValueError(f"unknown command {config.command!r}")
    except ValueError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except (QuadratureError, ArithmeticError, OverflowError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
