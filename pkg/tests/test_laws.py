import math

import numpy as np
import pytest

from plcp_load.laws import (
    GG_AREA,
    GG_PERIMETER,
    ChordLawTable,
    GeneralizedGamma,
    area_pdf,
    biased_laws,
    chord_kernel,
    chord_law_table,
    chord_origin_pdf,
    chord_pdf,
    chord_pdf_direct,
    gen_gamma_pdf,
    perimeter_pdf,
    typical_disc_radius_pdf,
    zero_area_pdf,
    zero_disc_radius_pdf,
)
from plcp_load.numerics import gauss_legendre_panels, integrate
from plcp_load.processes import NetworkParams, RngSeed, replication_rng, sample_plp_disc
from plcp_load.tessellation import cell_chords, typical_cell


@pytest.fixture(scope="module")
def table():
    return chord_law_table()


class TestGeneralizedGamma:
    def test_exponential_special_case(self):
        g = GeneralizedGamma(1.0, 1.0, 1.0)
        assert gen_gamma_pdf(g, 0.5) == pytest.approx(0.60653, abs=5e-6)

    def test_area_fit_normalized(self):
        total = integrate(lambda x: float(GG_AREA.pdf(x)), 0.0, math.inf).value
        assert total == pytest.approx(1.0, abs=1e-7)

    def test_moment_matches_quadrature(self):
        for k in (1, 2):
            quad = integrate(lambda x: x**k * float(GG_PERIMETER.pdf(x)), 0.0, math.inf).value
            assert GG_PERIMETER.moment(k) == pytest.approx(quad, rel=1e-7)

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            GeneralizedGamma(0.0, 1.0, 1.0)


class TestChordKernel:
    def test_derivatives_match_finite_differences(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            tau = rng.uniform(0.05, 4.0)
            alpha = rng.uniform(0.02, math.pi - 0.02)
            c = rng.uniform(0.05, 4.0)
            if abs(tau - c) < 1e-3 and alpha < 0.05:
                continue
            h = 1e-5 * max(1.0, c)
            km, _, _ = chord_kernel(tau, alpha, c - h)
            k0, dk, d2k = chord_kernel(tau, alpha, c)
            kp, _, _ = chord_kernel(tau, alpha, c + h)
            assert (kp - km) / (2 * h) == pytest.approx(float(dk), rel=1e-5, abs=1e-5)
            assert (kp - 2 * k0 + km) / h**2 == pytest.approx(float(d2k), rel=1e-3, abs=1e-3)

    def test_boundary_is_finite(self):
        # the arccos argument drifts past 1 near alpha -> 0, tau -> c
        k, dk, d2k = chord_kernel(1.0, 1e-12, 1.0 + 1e-13)
        assert np.isfinite(k) and np.isfinite(dk) and np.isfinite(d2k)

    def test_positive_exclusion_area(self):
        rng = np.random.default_rng(2)
        tau = rng.uniform(0.05, 4.0, 500)
        alpha = rng.uniform(1e-3, math.pi - 1e-3, 500)
        k, _, _ = chord_kernel(tau, alpha, 0.9)
        assert np.all(k > 0.0)


class TestChordPdfDirect:
    def test_against_independent_adaptive_quadrature(self):
        # same integrand, independent integration strategy (adaptive over tau,
        # dense panels in alpha chosen differently)
        a_nodes, a_w = gauss_legendre_panels(
            np.concatenate([[0.0], np.geomspace(3e-4, math.pi, 40)]), 12
        )

        def alpha_integral(tau, c):
            k, dk, d2k = chord_kernel(tau, a_nodes, c)
            return float(np.dot(a_w, tau * (dk * dk - d2k) * np.exp(-k)))

        for c in (0.05, 0.4, 0.9, 1.7, 3.0):
            res = integrate(lambda t: alpha_integral(t, c), 0.0, c + 5.0)
            want = 0.5 * math.pi * res.value
            assert chord_pdf_direct(c) == pytest.approx(want, rel=1e-6, abs=1e-9)

    def test_density_scale_invariance(self):
        # evaluating the full double integral with the density inside equals
        # the unit-density value rescaled: f(lb; c) = sqrt(lb) f(1; sqrt(lb) c)
        lb = 2.7

        def direct_at_density(c):
            t_nodes, t_w = gauss_legendre_panels(
                np.linspace(0.0, (c + 4.0 / math.sqrt(lb)), 60), 10
            )
            a_nodes, a_w = gauss_legendre_panels(
                np.concatenate([[0.0], np.geomspace(3e-4, math.pi, 40)]), 10
            )
            k, dk, d2k = chord_kernel(t_nodes[:, None], a_nodes[None, :], c)
            integrand = t_nodes[:, None] * (lb * dk * dk - d2k) * np.exp(-lb * k)
            return 0.5 * math.pi * lb**1.5 * float(np.einsum("i,j,ij->", t_w, a_w, integrand))

        for c in (0.3, 0.8, 1.4):
            lhs = direct_at_density(c)
            rhs = math.sqrt(lb) * chord_pdf_direct(math.sqrt(lb) * c)
            assert lhs == pytest.approx(rhs, rel=1e-6)


class TestChordLawTable:
    def test_normalization(self, table):
        assert table.cdf_values[-1] == pytest.approx(1.0, abs=1e-3)

    def test_mean_is_quarter_pi(self, table):
        assert table.mean == pytest.approx(math.pi / 4.0, rel=5e-3)

    def test_cdf_monotone_pdf_nonnegative(self, table):
        assert np.all(table.pdf_values >= 0.0)
        assert np.all(np.diff(table.cdf_values) >= 0.0)

    def test_trapezoid_self_consistency(self, table):
        inc = np.diff(table.cdf_values)
        trapz = np.diff(table.grid) * 0.5 * (table.pdf_values[1:] + table.pdf_values[:-1])
        np.testing.assert_allclose(inc, trapz, atol=1e-15)

    def test_interpolation_accuracy_off_grid(self, table):
        for c in (0.123, 0.777, 1.618, 2.468):
            assert table.pdf(c) == pytest.approx(chord_pdf_direct(c), rel=2e-5, abs=1e-8)

    def test_outside_support(self, table):
        assert table.pdf(-1.0) == 0.0
        assert table.pdf(table.grid[-1] + 1.0) == 0.0
        assert table.cdf(table.grid[-1] + 1.0) == table.cdf_values[-1]

    def test_csv_roundtrip(self, table, tmp_path):
        path = tmp_path / "chords.csv"
        table.to_csv(path)
        back = ChordLawTable.from_csv(path)
        np.testing.assert_array_equal(back.grid, table.grid)
        np.testing.assert_array_equal(back.pdf_values, table.pdf_values)
        assert back.mean == pytest.approx(table.mean, rel=1e-12)

    def test_from_samples_fallback(self, table):
        rng = np.random.default_rng(3)
        u = rng.random(40_000)
        samples = np.interp(u, table.cdf_values / table.cdf_values[-1], table.grid)
        fallback = ChordLawTable.from_samples(samples)
        assert fallback.cdf_values[-1] == pytest.approx(1.0, abs=1e-9)
        assert fallback.mean == pytest.approx(table.mean, rel=0.02)

    def test_scale_law_pointwise(self, table):
        lb = 3.3
        c = np.array([0.1, 0.5, 1.0, 2.0])
        lhs = chord_pdf(lb, c, table)
        rhs = math.sqrt(lb) * np.asarray(table.pdf(math.sqrt(lb) * c))
        np.testing.assert_allclose(lhs, rhs, rtol=1e-6)


class TestDensities:
    @pytest.mark.parametrize("lb", [1.0, 2.5])
    def test_all_normalize(self, lb, table):
        c_max = table.grid[-1] / math.sqrt(lb)
        densities = [
            (lambda c: chord_pdf(lb, c, table), 0.0, c_max),
            (lambda u: float(perimeter_pdf(lb, u)), 0.0, math.inf),
            (lambda z: float(area_pdf(lb, z)), 0.0, math.inf),
            (lambda c: chord_origin_pdf(lb, c, table), 0.0, c_max),
            (lambda z: float(zero_area_pdf(lb, z)), 0.0, math.inf),
            (lambda r: float(typical_disc_radius_pdf(lb, r)), 0.0, math.inf),
            (lambda r: float(zero_disc_radius_pdf(lb, r)), 0.0, math.inf),
        ]
        for f, lo, hi in densities:
            assert integrate(f, lo, hi).value == pytest.approx(1.0, abs=2e-3)

    def test_zero_area_pdf_tightly_normalized(self):
        # size-biased law normalised by the fit's own mean: 1 to quadrature tol
        total = integrate(lambda z: float(zero_area_pdf(1.0, z)), 0.0, math.inf).value
        assert total == pytest.approx(1.0, abs=1e-6)

    def test_mean_area(self):
        for lb in (1.0, 4.0):
            m = integrate(lambda z: z * float(area_pdf(lb, z)), 0.0, math.inf).value
            assert m == pytest.approx(1.0 / lb, rel=5e-3)

    def test_mean_perimeter(self):
        for lb in (1.0, 4.0):
            m = integrate(lambda u: u * float(perimeter_pdf(lb, u)), 0.0, math.inf).value
            assert m == pytest.approx(4.0 / math.sqrt(lb), rel=1e-2)

    def test_mean_chord(self, table):
        for lb in (1.0, 2.0):
            c_max = table.grid[-1] / math.sqrt(lb)
            m = integrate(lambda c: c * chord_pdf(lb, c, table), 0.0, c_max).value
            assert m == pytest.approx(math.pi / (4.0 * math.sqrt(lb)), rel=5e-3)

    def test_origin_chord_dominates_plain_chord(self, table):
        # length-biasing shifts mass right: CDF of f_C0 below CDF of f_C
        grid = np.linspace(0.05, 6.0, 200)
        c_nodes, c_w = gauss_legendre_panels(np.linspace(0.0, 8.0, 65), 8)
        pdf_plain = chord_pdf(1.0, c_nodes, table)
        pdf_biased = chord_origin_pdf(1.0, c_nodes, table)
        for g in grid:
            sel = c_nodes <= g
            cdf_plain = float(np.dot(c_w[sel], pdf_plain[sel]))
            cdf_biased = float(np.dot(c_w[sel], pdf_biased[sel]))
            assert cdf_biased <= cdf_plain + 1e-9

    def test_biased_laws_bundle(self, table):
        laws = biased_laws(1.0, table)
        assert laws.chord_origin(0.9) == pytest.approx(chord_origin_pdf(1.0, 0.9, table))
        assert laws.zero_area(1.1) == pytest.approx(float(zero_area_pdf(1.0, 1.1)))
        assert laws.typical_disc_radius(0.5) == pytest.approx(float(typical_disc_radius_pdf(1.0, 0.5)))
        assert laws.zero_disc_radius(0.5) == pytest.approx(float(zero_disc_radius_pdf(1.0, 0.5)))

    def test_disc_radius_mean_matches_cells(self):
        # E[R_t] from the law vs the mean equivalent-disc radius of simulated cells
        params = NetworkParams(lambda_b=1.0, mu_l=5.0, lambda_v=2.0)
        expected = integrate(lambda r: r * float(typical_disc_radius_pdf(1.0, r)), 0.0, math.inf).value
        radii = np.array([
            math.sqrt(typical_cell(params, replication_rng(RngSeed(31), i)).cell.area() / math.pi)
            for i in range(6000)
        ])
        se = radii.std() / math.sqrt(radii.size)
        assert radii.mean() == pytest.approx(expected, abs=4.0 * se)


class TestEmpiricalChordLaw:
    def test_ks_distance_small(self, table):
        # simulated chords through typical cells against the tabulated law
        params = NetworkParams(lambda_b=1.0, mu_l=5.0, lambda_v=2.0)
        rng = np.random.default_rng(44)
        chords = []
        for i in range(3000):
            s = typical_cell(params, replication_rng(RngSeed(88), i))
            lines = sample_plp_disc(params, s.cell.circumradius_about((0.0, 0.0)), rng)
            chords.append(cell_chords(s, lines))
        chords = np.sort(np.concatenate(chords))
        n = chords.size
        assert n > 10_000
        model = np.asarray(table.cdf(chords))
        ecdf_hi = np.arange(1, n + 1) / n
        ecdf_lo = np.arange(0, n) / n
        ks = max(np.max(np.abs(ecdf_hi - model)), np.max(np.abs(ecdf_lo - model)))
        assert ks < 0.02
