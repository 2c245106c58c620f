import math

import numpy as np
import pytest

from plcp_load.geometry import Line
from plcp_load.laws import zero_area_pdf
from plcp_load.numerics import integrate
from plcp_load.processes import NetworkParams, RngSeed, replication_rng, sample_plp_disc
from plcp_load.tessellation import cell_chords, typical_cell, zero_cell

FIG2 = NetworkParams(lambda_b=1.0, mu_l=5.0, lambda_v=2.0)


def _typical_cells(n, seed=101, params=FIG2):
    return [typical_cell(params, replication_rng(RngSeed(seed), i)) for i in range(n)]


@pytest.fixture(scope="module")
def typical_batch():
    return _typical_cells(4000)


@pytest.fixture(scope="module")
def zero_batch():
    return [zero_cell(FIG2, replication_rng(RngSeed(202), i)) for i in range(4000)]


class TestTypicalCell:
    def test_nucleus_is_origin_and_inside(self, typical_batch):
        for s in typical_batch[:200]:
            assert s.nucleus == (0.0, 0.0)
            assert s.cell.contains((0.0, 0.0))
            assert s.kind == "typical"

    def test_no_truncation_at_default_window(self, typical_batch):
        assert sum(s.truncated for s in typical_batch) == 0

    def test_deterministic(self):
        a = typical_cell(FIG2, replication_rng(RngSeed(7), 3))
        b = typical_cell(FIG2, replication_rng(RngSeed(7), 3))
        np.testing.assert_array_equal(a.cell.vertices, b.cell.vertices)

    def test_mean_area(self, typical_batch):
        # E[area] = 1/lambda_b; sd(area) ~ 0.53 so 4000 cells give ~0.9% noise
        areas = np.array([s.cell.area() for s in typical_batch])
        assert areas.mean() == pytest.approx(1.0, abs=4.0 * areas.std() / math.sqrt(areas.size))

    def test_mean_perimeter(self, typical_batch):
        perims = np.array([s.cell.perimeter() for s in typical_batch])
        assert perims.mean() == pytest.approx(4.0, abs=4.0 * perims.std() / math.sqrt(perims.size))

    def test_density_scaling(self):
        # at lambda_b = 4 the mean area is 1/4
        params = NetworkParams(lambda_b=4.0, mu_l=5.0, lambda_v=2.0)
        areas = np.array([
            typical_cell(params, replication_rng(RngSeed(55), i)).cell.area()
            for i in range(2500)
        ])
        assert areas.mean() == pytest.approx(0.25, rel=0.03)


class TestZeroCell:
    def test_origin_strictly_inside(self, zero_batch):
        for s in zero_batch[:500]:
            assert s.cell.contains((0.0, 0.0))
            assert s.kind == "zero"

    def test_zero_cell_larger_on_average(self, typical_batch, zero_batch):
        typ = np.mean([s.cell.area() for s in typical_batch])
        zer = np.mean([s.cell.area() for s in zero_batch])
        assert zer > typ * 1.15

    def test_mean_area_matches_area_biased_law(self, zero_batch):
        # E[Z'] = integral of z * f_{Z'}(z)
        expected = integrate(lambda z: z * float(zero_area_pdf(1.0, z)), 0.0, math.inf).value
        areas = np.array([s.cell.area() for s in zero_batch])
        se = areas.std() / math.sqrt(areas.size)
        assert areas.mean() == pytest.approx(expected, abs=4.0 * se)

    def test_deterministic(self):
        a = zero_cell(FIG2, replication_rng(RngSeed(9), 1))
        b = zero_cell(FIG2, replication_rng(RngSeed(9), 1))
        np.testing.assert_array_equal(a.cell.vertices, b.cell.vertices)
        assert a.nucleus == b.nucleus


class TestCellChords:
    def test_no_lines_no_chords(self, typical_batch):
        assert cell_chords(typical_batch[0], []).size == 0

    def test_mean_total_chord_length(self, typical_batch):
        # E[W] = mu_l / lambda_b = 5 km
        rng = np.random.default_rng(77)
        totals = []
        for s in typical_batch:
            radius = s.cell.circumradius_about((0.0, 0.0))
            lines = sample_plp_disc(FIG2, radius, rng)
            totals.append(cell_chords(s, lines).sum())
        totals = np.array(totals)
        se = totals.std() / math.sqrt(totals.size)
        assert totals.mean() == pytest.approx(5.0, abs=4.0 * se)

    def test_line_count_conditionally_poisson(self, typical_batch):
        # N | perimeter ~ Poisson(lambda_l * U):
        #   E[N] = lambda_l E[U],  Var(N) = lambda_l E[U] + lambda_l^2 Var(U)
        rng = np.random.default_rng(78)
        perims = []
        counts = []
        for s in typical_batch:
            radius = s.cell.circumradius_about((0.0, 0.0))
            lines = sample_plp_disc(FIG2, radius, rng)
            perims.append(s.cell.perimeter())
            counts.append(cell_chords(s, lines).size)
        perims = np.array(perims)
        counts = np.array(counts, dtype=float)
        lam = FIG2.lambda_l
        assert counts.mean() == pytest.approx(lam * perims.mean(), rel=0.03)
        expected_var = lam * perims.mean() + lam**2 * perims.var()
        assert counts.var() == pytest.approx(expected_var, rel=0.10)
        # conditional variance ~ conditional mean within perimeter bins
        bins = np.quantile(perims, np.linspace(0.0, 1.0, 9))
        idx = np.clip(np.digitize(perims, bins[1:-1]), 0, 7)
        ratios = []
        for b in range(8):
            sel = idx == b
            if sel.sum() > 200:
                resid_var = counts[sel].var() - lam**2 * perims[sel].var()
                ratios.append(resid_var / counts[sel].mean())
        assert np.mean(ratios) == pytest.approx(1.0, abs=0.12)

    def test_zero_length_chords_omitted(self, typical_batch):
        s = typical_batch[1]
        far = [Line(50.0, 0.3), Line(60.0, 1.0)]
        assert cell_chords(s, far).size == 0
