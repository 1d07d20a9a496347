"""
==============================================================================
FILE: levy.py
ROLE: Symmetric Levy-Stable Model
DESCRIPTION:
Density of the symmetric stable law with characteristic function
exp(-gamma * ds * |k|^mu), evaluated by numerical inversion
    L(x) = (1/pi) * integral_0^Q exp(-gamma*ds*k^mu) * cos(k*x) dk,
where Q is the point at which the envelope drops below 1e-12. The cosine is
handled as a quadrature WEIGHT (QUADPACK's oscillatory rule), so large |x|
needs no special panelling. Also the closed-form peak
    P(0) = Gamma(1/mu) / (pi * mu * (gamma*ds)^(1/mu))
and the peak-scaling fit that recovers mu from how P(0) decays with the lag.
==============================================================================
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from errors import (
    DomainError,
    InsufficientDataError,
    NonDecayingPeakError,
    QuadratureError,
    StabilityViolationError,
)
from structure import loglog_fit
from threads import run_parallel

logger = logging.getLogger(__name__)

ENVELOPE_CUTOFF = 1e-12
QUAD_EPS = 1e-11
NEGATIVE_RESIDUE = -1e-10
DEFAULT_BOUNDARY_TOLERANCE = 0.1


@dataclass(frozen=True)
class LevyModel:
    mu: float
    gamma: float
    delta_s: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.mu <= 2.0:
            raise DomainError(f"stability index mu must be in (0, 2], got {self.mu}")
        if self.gamma <= 0:
            raise DomainError(f"scale factor gamma must be > 0, got {self.gamma}")
        if self.delta_s <= 0:
            raise DomainError(f"lag delta_s must be > 0, got {self.delta_s}")

    @property
    def spread(self):
        """The product gamma * delta_s that multiplies |k|^mu."""
        return self.gamma * self.delta_s

    @property
    def cutoff(self):
        """Upper integration limit Q with exp(-spread * Q^mu) = ENVELOPE_CUTOFF."""
        return (-np.log(ENVELOPE_CUTOFF) / self.spread) ** (1.0 / self.mu)


@dataclass(frozen=True)
class LevyFit:
    mu_hat: float
    mu_stderr: float
    gamma_hat: float
    raw_slope: float
    peak_table: tuple
    fit_range: tuple
    clamped: bool = False

    def as_dict(self):
        return {
            "mu_hat": self.mu_hat,
            "mu_stderr": self.mu_stderr,
            "gamma_hat": self.gamma_hat,
            "raw_slope": self.raw_slope,
            "peak_table": [[int(t), float(p)] for t, p in self.peak_table],
            "fit_range": list(self.fit_range),
            "clamped": self.clamped,
        }


def levy_density(model, x):
    """Symmetric stable density at x by quadrature of the inverse Fourier integral."""
    x = abs(float(x))
    c, mu = model.spread, model.mu

    def envelope(k):
        return np.exp(-c * k ** mu)

    if x == 0.0:
        result = integrate.quad(envelope, 0.0, model.cutoff, epsabs=QUAD_EPS, epsrel=QUAD_EPS,
                                limit=500, full_output=1)
    else:
        result = integrate.quad(envelope, 0.0, model.cutoff, weight="cos", wvar=x,
                                epsabs=QUAD_EPS, epsrel=QUAD_EPS, limit=500, full_output=1)

    value, abserr = result[0], result[1]
    # A 4th element means QUADPACK reported a problem
    if len(result) > 3 and abserr > 1e-8:
        raise QuadratureError(
            f"quadrature did not converge at x={x} (mu={mu}): achieved {abserr:.2e}",
            achieved_tolerance=abserr,
        )

    density = value / np.pi
    if density < 0:
        if density < NEGATIVE_RESIDUE:
            raise QuadratureError(f"negative density {density:.3e} at x={x}", achieved_tolerance=abserr)
        density = 0.0
    return float(density)


def levy_peak(model):
    """P(0) in closed form."""
    return float(gamma_fn(1.0 / model.mu) / (np.pi * model.mu * model.spread ** (1.0 / model.mu)))


def levy_overlay(model, grid, normalization=1.0, workers=1):
    """
    Density sampled on a grid for plotting. With a normalization sigma the grid
    is read in units of sigma and the density is returned per unit of sigma.
    """
    grid = np.asarray(grid, dtype=np.float64)
    values = run_parallel(lambda x: levy_density(model, x * normalization), grid,
                          workers=workers, name="Levy")
    return np.asarray(values) * normalization


def peak_density(pdf):
    """Density of the bin containing 0, in the PDF's own (normalized) units."""
    half = pdf.bin_width / 2.0
    lower = pdf.bin_centers - half
    upper = pdf.bin_centers + half
    hit = np.flatnonzero((lower <= 0.0) & (0.0 < upper))
    if hit.size == 0:
        raise DomainError(f"the PDF at lag {pdf.lag} does not cover 0")
    return float(pdf.density[hit[0]])


def fit_mu_from_peaks(pdfs, fit_range=None, boundary_tolerance=DEFAULT_BOUNDARY_TOLERANCE):
    """
    mu from the decay of the peak with the lag, P(0) ~ tau^(-1/mu).
    Peaks are converted to physical units first (density / normalization),
    so the PDFs may be normalized differently. gamma comes from matching the
    closed-form peak at the smallest lag.
    """
    pdfs = sorted(pdfs, key=lambda p: p.lag)
    if len(pdfs) < 3:
        raise InsufficientDataError(f"peak-scaling fit needs at least 3 lags, got {len(pdfs)}")

    lags = np.array([p.lag for p in pdfs], dtype=np.float64)
    peaks = np.array([peak_density(p) / p.normalization for p in pdfs])
    if np.any(peaks <= 0):
        raise InsufficientDataError("an empty central bin leaves P(0) undefined")

    if fit_range is None:
        fit_range = (float(lags.min()), float(lags.max()))
    fit = loglog_fit(lags, peaks, fit_range)

    if fit.slope >= 0:
        raise NonDecayingPeakError(f"P(0) does not decay with the lag (slope {fit.slope:.4f})",
                                   raw_slope=fit.slope)

    mu_hat = -1.0 / fit.slope
    mu_stderr = fit.stderr / fit.slope ** 2
    clamped = False
    if mu_hat > 2.0:
        if mu_hat > 2.0 + boundary_tolerance:
            raise StabilityViolationError(
                f"fitted mu={mu_hat:.4f} exceeds the stable bound 2 (raw slope {fit.slope:.4f})",
                raw_slope=fit.slope, mu_hat=mu_hat,
            )
        logger.warning(f"[Levy] mu_hat={mu_hat:.4f} is within tolerance of 2; clamped to the Gaussian boundary")
        mu_hat, clamped = 2.0, True

    # Invert the closed-form peak at the reference lag for gamma
    ref_lag, ref_peak = lags[0], peaks[0]
    gamma_hat = (gamma_fn(1.0 / mu_hat) / (np.pi * mu_hat * ref_peak)) ** mu_hat / ref_lag

    logger.info(f"[Levy] mu_hat={mu_hat:.4f} +/- {mu_stderr:.4f}, gamma_hat={gamma_hat:.4g} (slope {fit.slope:.4f})")
    return LevyFit(
        mu_hat=float(mu_hat),
        mu_stderr=float(mu_stderr),
        gamma_hat=float(gamma_hat),
        raw_slope=float(fit.slope),
        peak_table=tuple((int(t), float(p)) for t, p in zip(lags, peaks)),
        fit_range=tuple(fit_range),
        clamped=clamped,
    )
