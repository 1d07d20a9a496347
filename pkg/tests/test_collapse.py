import numpy as np
import pytest

from collapse import (
    EmpiricalPdf,
    collapse,
    estimate_pdf,
    gaussian_reference,
    in_units_of,
    regime_pdfs,
    rescale_pdf,
    rice_bins,
)
from conftest import make
from errors import DegenerateDistributionError, DomainError, InsufficientDataError, NoOverlapError
from series import ReturnSet, Series, compute_returns

MICRO = [1, 2, 4, 8]


def sample(values, lag=1):
    return ReturnSet(lag=lag, values=np.asarray(values, dtype=float), origin_length=len(values) + lag)


def flat_pdf(lag, centers):
    centers = np.asarray(centers, dtype=float)
    return EmpiricalPdf(lag, centers, np.full(centers.size, 0.5), 1.0, 1000, 1.0)


def worst_distance(series, alpha):
    pdfs = regime_pdfs([compute_returns(series, lag) for lag in MICRO], alpha)
    return max(d for _, d in collapse(pdfs, alpha).per_lag_distance)


class TestEstimatePdf:
    def test_gaussian_peak(self, rng):
        pdf = estimate_pdf(sample(rng.standard_normal(10 ** 6)))
        assert np.interp(0.0, pdf.bin_centers, pdf.density) == pytest.approx(1 / np.sqrt(2 * np.pi), abs=0.01)

    def test_area_is_one_and_grid_uniform(self, rng):
        pdf = estimate_pdf(sample(rng.standard_t(2, size=5000)))
        assert pdf.area() == pytest.approx(1.0, abs=1e-6)
        assert pdf.coverage == 1.0
        assert np.allclose(np.diff(pdf.bin_centers), pdf.bin_width)

    def test_axis_in_units_of_sigma(self, rng):
        x = 40.0 * rng.standard_normal(20_000)
        pdf = estimate_pdf(sample(x), bin_count=51)
        assert pdf.normalization == pytest.approx(np.std(x))
        assert pdf.bin_centers.size == 51
        assert np.max(np.abs(pdf.bin_centers)) < 6.0

    def test_support_truncates_and_reports_coverage(self, rng):
        pdf = estimate_pdf(sample(rng.standard_normal(50_000)), 41, normalization=1.0, support=(-1.0, 1.0))
        assert pdf.coverage == pytest.approx(0.6827, abs=0.01)
        assert pdf.area() == pytest.approx(pdf.coverage)

    def test_rice_rule_bounds(self):
        assert rice_bins(50) == 25
        assert rice_bins(10_000) == 44
        assert rice_bins(10 ** 9) == 201

    def test_point_mass_is_degenerate(self):
        with pytest.raises(DegenerateDistributionError):
            estimate_pdf(sample(np.ones(100)))

    def test_needs_fifty_samples(self, rng):
        with pytest.raises(InsufficientDataError):
            estimate_pdf(sample(rng.standard_normal(49)))

    def test_needs_eight_bins(self, rng):
        with pytest.raises(InsufficientDataError):
            estimate_pdf(sample(rng.standard_normal(100)), bin_count=7)

    def test_gaussian_reference_is_normalized(self, rng):
        pdf = estimate_pdf(sample(rng.standard_normal(10_000)), normalization=1.0, support=(-8.0, 8.0))
        assert np.sum(gaussian_reference(pdf)) * pdf.bin_width == pytest.approx(1.0, abs=1e-3)


class TestRescale:
    def test_unit_lambda_is_identity(self, rng):
        pdf = estimate_pdf(sample(rng.standard_normal(1000)))
        same = rescale_pdf(pdf, 0.7, 1.0)
        assert np.array_equal(same.bin_centers, pdf.bin_centers)
        assert np.array_equal(same.density, pdf.density)

    def test_group_property_and_area(self, rng):
        pdf = estimate_pdf(sample(rng.standard_normal(1000)))
        twice = rescale_pdf(rescale_pdf(pdf, 0.6, 2.0), 0.6, 3.0)
        once = rescale_pdf(pdf, 0.6, 6.0)
        assert np.allclose(twice.bin_centers, once.bin_centers, rtol=1e-12)
        assert np.allclose(twice.density, once.density, rtol=1e-12)
        assert once.area() == pytest.approx(pdf.area(), rel=1e-12)

    def test_change_of_units_keeps_the_area(self, rng):
        pdf = estimate_pdf(sample(3.0 * rng.standard_normal(5000)))
        moved = in_units_of(pdf, pdf.normalization / 2)
        assert moved.normalization == pytest.approx(pdf.normalization / 2)
        assert np.allclose(moved.bin_centers, 2 * pdf.bin_centers, rtol=1e-12)
        assert moved.area() == pytest.approx(pdf.area(), rel=1e-12)
        with pytest.raises(DomainError):
            in_units_of(pdf, 0.0)

    def test_lambda_must_be_positive(self, rng):
        pdf = estimate_pdf(sample(rng.standard_normal(100)))
        with pytest.raises(DomainError):
            rescale_pdf(pdf, 0.5, 0.0)


class TestCollapse:
    def test_identical_pdfs_with_zero_alpha(self, rng):
        x = rng.standard_normal(5000)
        pdfs = [estimate_pdf(sample(x, lag)) for lag in (1, 2, 3)]
        report = collapse(pdfs, 0.0)
        assert [d for _, d in report.per_lag_distance] == [0.0, 0.0, 0.0]
        assert report.collapsed and report.reference_lag == 1

    def test_brownian_collapses_with_half(self):
        walk = Series.from_values(np.cumsum(np.random.default_rng(7).standard_normal(2 ** 20)))
        pdfs = regime_pdfs([compute_returns(walk, 1), compute_returns(walk, 4)], 0.5)
        report = collapse(pdfs, 0.5)
        assert report.per_lag_distance[0] == (1, 0.0)
        assert report.collapsed

    def test_own_sigma_pdfs_are_brought_into_reference_units(self):
        walk = Series.from_values(np.cumsum(np.random.default_rng(3).standard_normal(2 ** 20)))
        pdfs = [estimate_pdf(compute_returns(walk, lag)) for lag in MICRO]
        assert pdfs[-1].normalization > 2 * pdfs[0].normalization
        report = collapse(pdfs, 0.5)
        assert report.collapsed
        assert max(d for _, d in report.per_lag_distance) <= 0.05

    def test_distance_does_not_depend_on_the_reference(self):
        walk = Series.from_values(np.cumsum(np.random.default_rng(9).standard_normal(2 ** 18)))
        pdfs = regime_pdfs([compute_returns(walk, 1), compute_returns(walk, 4)], 0.5)
        forward = dict(collapse(pdfs, 0.5, reference_lag=1).per_lag_distance)[4]
        backward = dict(collapse(pdfs, 0.5, reference_lag=4).per_lag_distance)[1]
        assert forward > 0
        assert backward == pytest.approx(forward, rel=1e-6)

    def test_stable_flight_collapses_and_cascade_does_not(self):
        alpha = 1.0 / 1.5
        stable = [worst_distance(make("stable_flight", 2 ** 21, seed, mu=1.5), alpha) for seed in range(3)]
        cascade = [worst_distance(make("binomial_cascade", seed=seed, shuffle=True), alpha) for seed in range(3)]
        assert np.median(stable) <= 0.05
        assert np.median(cascade) >= 3 * np.median(stable)

    def test_true_exponent_beats_detuned_ones(self):
        flight = make("stable_flight", 2 ** 20, 11, mu=1.5)
        best = worst_distance(flight, 1.0 / 1.5)
        assert best < worst_distance(flight, 1.0 / 1.5 + 0.2)
        assert best < worst_distance(flight, 1.0 / 1.5 - 0.2)

    def test_disjoint_support(self):
        pdfs = [flat_pdf(1, np.linspace(-1, 1, 11)), flat_pdf(2, np.linspace(50, 60, 11))]
        with pytest.raises(NoOverlapError, match="lag 2"):
            collapse(pdfs, 0.0)

    def test_reference_must_be_present(self):
        pdfs = [flat_pdf(1, np.linspace(-1, 1, 11)), flat_pdf(2, np.linspace(-1, 1, 11))]
        with pytest.raises(DomainError):
            collapse(pdfs, 0.5, reference_lag=4)

    def test_needs_two_pdfs(self):
        with pytest.raises(InsufficientDataError):
            collapse([flat_pdf(1, np.linspace(-1, 1, 11))], 0.5)
