import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.special import gamma as gamma_fn

from collapse import EmpiricalPdf, regime_pdfs
from conftest import make
from errors import DomainError, InsufficientDataError, NonDecayingPeakError, StabilityViolationError
from levy import LevyModel, fit_mu_from_peaks, levy_density, levy_overlay, levy_peak, peak_density
from series import compute_returns

GRID = np.linspace(-10.0, 10.0, 201)
LAGS = range(1, 11)


def density_on(model, xs):
    return np.array([levy_density(model, x) for x in xs])


def peak_pdf(lag, peak):
    centers = np.linspace(-1.0, 1.0, 21)
    return EmpiricalPdf(lag, centers, np.full(21, peak), 1.0, 10_000, 1.0)


class TestModel:
    @pytest.mark.parametrize("mu,gamma", [(0.0, 1.0), (2.5, 1.0), (1.5, 0.0)])
    def test_invalid_parameters(self, mu, gamma):
        with pytest.raises(DomainError):
            LevyModel(mu, gamma)

    def test_cutoff_bounds_the_envelope(self):
        m = LevyModel(1.2, 0.5, 2.0)
        assert np.exp(-m.spread * m.cutoff ** m.mu) == pytest.approx(1e-12)


class TestDensity:
    def test_gaussian_closed_form(self):
        expected = np.exp(-GRID ** 2 / 4.0) / (2.0 * np.sqrt(np.pi))
        assert np.max(np.abs(density_on(LevyModel(2.0, 1.0), GRID) - expected)) <= 1e-8

    def test_cauchy_closed_form(self):
        expected = 1.0 / (np.pi * (1.0 + GRID ** 2))
        assert np.max(np.abs(density_on(LevyModel(1.0, 1.0), GRID) - expected)) <= 1e-8

    def test_gaussian_with_wider_spread(self):
        c = 2.5
        x = np.array([0.0, 1.0, 3.0, 7.0])
        expected = np.exp(-x ** 2 / (4 * c)) / (2 * np.sqrt(np.pi * c))
        assert np.allclose(density_on(LevyModel(2.0, 0.5, 5.0), x), expected, atol=1e-8)

    @pytest.mark.parametrize("mu", [0.8, 1.2, 1.5, 1.92, 2.0])
    @pytest.mark.parametrize("spread", [0.5, 1.0, 2.0])
    def test_peak_consistency(self, mu, spread):
        m = LevyModel(mu, spread)
        assert levy_density(m, 0.0) == pytest.approx(levy_peak(m), abs=1e-6)

    def test_even(self):
        m = LevyModel(1.5, 1.0)
        for x in (0.3, 2.0, 11.0):
            assert levy_density(m, x) == pytest.approx(levy_density(m, -x), abs=1e-10)

    def test_monotone_decay(self):
        values = density_on(LevyModel(1.5, 1.0), np.arange(0.0, 20.0, 0.25))
        assert np.all(np.diff(values) <= 1e-9)

    def test_self_similarity(self):
        mu, c = 1.5, 3.0
        shrink = c ** (-1.0 / mu)
        for x in (0.0, 0.7, 4.0):
            wide = levy_density(LevyModel(mu, 1.0, c), x)
            assert wide == pytest.approx(shrink * levy_density(LevyModel(mu, 1.0, 1.0), x * shrink), abs=1e-8)


class TestPeak:
    def test_cauchy_and_gaussian_peaks(self):
        assert levy_peak(LevyModel(1.0, 1.0)) == pytest.approx(1 / np.pi, abs=1e-7)
        assert levy_peak(LevyModel(2.0, 1.0)) == pytest.approx(0.2820948, abs=1e-7)
        assert levy_peak(LevyModel(1.5, 1.0)) == pytest.approx(gamma_fn(2 / 3) / (1.5 * np.pi))

    def test_doubling_lag(self):
        a, b = LevyModel(1.3, 0.8, 1.0), LevyModel(1.3, 0.8, 2.0)
        assert levy_peak(b) == pytest.approx(levy_peak(a) / 2 ** (1 / 1.3))


class TestOverlay:
    def test_single_point(self):
        m = LevyModel(1.5, 1.0)
        assert levy_overlay(m, [0.0])[0] == pytest.approx(levy_peak(m), abs=1e-6)

    def test_symmetric_and_threaded(self):
        m = LevyModel(1.7, 1.0)
        grid = np.linspace(-5.0, 5.0, 41)
        table = levy_overlay(m, grid, workers=4)
        assert np.allclose(table, table[::-1], atol=1e-10)
        assert np.array_equal(table, levy_overlay(m, grid))

    def test_integrates_to_one(self):
        grid = np.arange(-50.0, 50.0 + 1e-9, 0.1)
        assert trapezoid(levy_overlay(LevyModel(1.5, 1.0), grid), grid) == pytest.approx(1.0, abs=0.01)

    def test_normalized_units(self):
        m, sigma = LevyModel(1.5, 1.0), 2.0
        assert levy_overlay(m, [0.5], normalization=sigma)[0] == pytest.approx(sigma * levy_density(m, 1.0))


class TestPeakFit:
    def test_peak_density_uses_bin_holding_zero(self):
        centers = np.linspace(-1.0, 1.0, 21)
        density = np.arange(21.0)
        pdf = EmpiricalPdf(1, centers, density, 1.0, 100, 1.0)
        assert peak_density(pdf) == 10.0

    def test_stable_increments(self):
        flight = make("stable_flight", 10 ** 6, 3, mu=1.5, gamma=1.0)
        pdfs = regime_pdfs([compute_returns(flight, lag) for lag in LAGS], 0.0)
        fit = fit_mu_from_peaks(pdfs)
        assert fit.mu_hat == pytest.approx(1.5, abs=0.15)
        assert not fit.clamped
        assert [t for t, _ in fit.peak_table] == list(LAGS)
        assert 0.5 < fit.gamma_hat < 2.0

    def test_gaussian_increments(self):
        walk = make("stable_flight", 2 ** 20, 5, mu=2.0)
        pdfs = regime_pdfs([compute_returns(walk, lag) for lag in LAGS], 0.0)
        fit = fit_mu_from_peaks(pdfs)
        assert fit.mu_hat == pytest.approx(2.0, abs=0.1)

    def test_exact_peak_law(self):
        pdfs = [peak_pdf(t, 0.4 * t ** (-1 / 1.2)) for t in LAGS]
        fit = fit_mu_from_peaks(pdfs)
        assert fit.mu_hat == pytest.approx(1.2)
        expected_gamma = (gamma_fn(1 / 1.2) / (np.pi * 1.2 * 0.4)) ** 1.2
        assert fit.gamma_hat == pytest.approx(expected_gamma)

    def test_boundary_clamp(self):
        fit = fit_mu_from_peaks([peak_pdf(t, 0.3 * t ** (-1 / 2.05)) for t in LAGS])
        assert fit.mu_hat == 2.0 and fit.clamped

    def test_beyond_stable_bound(self):
        with pytest.raises(StabilityViolationError) as info:
            fit_mu_from_peaks([peak_pdf(t, 0.3 * t ** (-1 / 3.0)) for t in LAGS])
        assert info.value.raw_slope == pytest.approx(-1 / 3.0)

    def test_rising_peaks(self):
        with pytest.raises(NonDecayingPeakError) as info:
            fit_mu_from_peaks([peak_pdf(t, 0.1 * t) for t in (1, 2, 3)])
        assert info.value.raw_slope == pytest.approx(1.0)

    def test_needs_three_lags(self):
        with pytest.raises(InsufficientDataError):
            fit_mu_from_peaks([peak_pdf(1, 0.3), peak_pdf(2, 0.2)])
