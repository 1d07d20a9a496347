"""
==============================================================================
FILE: collapse.py
ROLE: PDF Estimation & Self-Similarity Collapse
DESCRIPTION:
Histogram PDFs of the returns at several lags, normalized by a standard
deviation, the self-similarity rescaling
    P[dp(tau)] = lam^(-alpha) * P_s[lam^(-alpha) * dp_s],   lam = tau / tau_s
and the collapse-quality check: after rescaling, how far each PDF sits from
the master (reference-lag) PDF in log-density over the central region.
Monoscaling data collapse onto one curve; multiscaling data do not.
==============================================================================
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from errors import DegenerateDistributionError, DomainError, InsufficientDataError, NoOverlapError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 50
MIN_BINS = 8
RICE_MIN, RICE_MAX = 25, 201
DEFAULT_THRESHOLD = 0.05
DEFAULT_CENTRAL_SIGMAS = 3.0
DEFAULT_MIN_COUNT = 10


@dataclass(frozen=True, eq=False)
class EmpiricalPdf:
    """
    `bin_centers` are in units of `normalization`; `density` is per unit of
    `normalization`. `sample_std` is the standard deviation of the raw returns.
    """
    lag: int
    bin_centers: np.ndarray
    density: np.ndarray
    normalization: float
    sample_count: int
    sample_std: float
    coverage: float = 1.0

    @property
    def bin_width(self):
        return float(self.bin_centers[1] - self.bin_centers[0])

    @property
    def counts(self):
        """Samples per bin, recovered from the density."""
        return self.density * self.bin_width * self.sample_count

    def area(self):
        return float(np.sum(self.density) * self.bin_width)


@dataclass(frozen=True)
class CollapseReport:
    alpha: float
    reference_lag: int
    per_lag_distance: tuple
    collapsed: bool
    threshold: float

    def as_dict(self):
        return {
            "alpha": self.alpha,
            "reference_lag": self.reference_lag,
            "per_lag_distance": [[int(t), float(d)] for t, d in self.per_lag_distance],
            "collapsed": self.collapsed,
            "threshold": self.threshold,
        }


def rice_bins(n):
    """ceil(2 * n^(1/3)) clamped to [25, 201]."""
    return int(min(max(math.ceil(2.0 * n ** (1.0 / 3.0)), RICE_MIN), RICE_MAX))


def central_support(returns, quantile=0.99, normalization=None):
    """Symmetric window (normalized units) holding `quantile` of |returns|."""
    values = np.asarray(returns.values, dtype=np.float64)
    sigma = normalization if normalization is not None else float(np.std(values))
    if sigma <= 0:
        raise DegenerateDistributionError(f"zero variance at lag {returns.lag}")
    half = float(np.quantile(np.abs(values), quantile)) / sigma
    return (-half, half)


def estimate_pdf(returns, bin_count=None, normalization=None, support=None):
    """
    Uniform-width histogram of the normalized returns. Without `support` the
    bins span [min, max] and the density integrates to 1. With `support` the
    window is truncated; density is still count / (total * width) and
    `coverage` records the mass inside the window.
    """
    values = np.asarray(returns.values, dtype=np.float64)
    n = values.size
    if n < MIN_SAMPLES:
        raise InsufficientDataError(f"PDF estimation needs at least {MIN_SAMPLES} samples, got {n}")
    bins = rice_bins(n) if bin_count is None else int(bin_count)
    if bins < MIN_BINS:
        raise InsufficientDataError(f"PDF estimation needs at least {MIN_BINS} bins, got {bins}")

    sample_std = float(np.std(values))
    if np.ptp(values) == 0:
        raise DegenerateDistributionError(f"returns at lag {returns.lag} have zero variance")

    sigma = sample_std if normalization is None else float(normalization)
    if sigma <= 0:
        raise DomainError(f"normalization must be > 0, got {sigma}")
    x = values / sigma

    window = (float(x.min()), float(x.max())) if support is None else (float(support[0]), float(support[1]))
    counts, edges = np.histogram(x, bins=bins, range=window)
    width = edges[1] - edges[0]
    # Uniform centers from one origin and width keep the grid exactly regular
    centers = window[0] + (np.arange(bins) + 0.5) * width
    density = counts / (n * width)

    pdf = EmpiricalPdf(
        lag=int(returns.lag),
        bin_centers=centers,
        density=density,
        normalization=sigma,
        sample_count=int(n),
        sample_std=sample_std,
        coverage=float(counts.sum()) / n,
    )
    logger.debug(f"[PDF] lag={pdf.lag}: {bins} bins over {window}, coverage {pdf.coverage:.4f}")
    return pdf


def regime_pdfs(return_sets, alpha, support_quantile=0.99, bin_count=None):
    """
    PDFs of several lags in the units of the smallest lag's sigma. Each lag
    gets the reference window stretched by lam^alpha and the same (odd) bin
    count, so after rescaling every grid coincides with the reference grid
    and one bin is centered on zero.
    """
    return_sets = sorted(return_sets, key=lambda r: r.lag)
    ref = return_sets[0]
    sigma = float(np.std(ref.values))
    lo, hi = central_support(ref, support_quantile, sigma)
    bins = bin_count or rice_bins(len(ref.values))
    bins += 1 - bins % 2

    result = []
    for returns in return_sets:
        stretch = (returns.lag / ref.lag) ** alpha
        result.append(estimate_pdf(returns, bins, sigma, (lo * stretch, hi * stretch)))
    return result


def gaussian_reference(pdf):
    """Gaussian with the sample's own variance, on the PDF grid and units."""
    s = pdf.sample_std / pdf.normalization
    return np.exp(-0.5 * (pdf.bin_centers / s) ** 2) / (s * math.sqrt(2.0 * math.pi))


def in_units_of(pdf, normalization):
    """The same PDF with its axis re-expressed in units of another sigma."""
    if normalization <= 0:
        raise DomainError(f"normalization must be > 0, got {normalization}")
    ratio = pdf.normalization / float(normalization)
    return replace(pdf, bin_centers=pdf.bin_centers * ratio, density=pdf.density / ratio,
                   normalization=float(normalization))


def rescale_pdf(pdf, alpha, lam):
    """
    Axis times lam^(-alpha), density times lam^(alpha); area is preserved.
    `sample_std` follows the axis, so it stays the spread of the plotted variable.
    """
    if lam <= 0:
        raise DomainError(f"rescaling factor lambda must be > 0, got {lam}")
    factor = float(lam) ** (-float(alpha))
    return replace(pdf, bin_centers=pdf.bin_centers * factor, density=pdf.density / factor,
                   sample_std=pdf.sample_std * factor)


def _populated(pdf, min_count):
    return (pdf.density > 0) & (pdf.counts >= min_count - 1e-9)


def collapse_distance(reference, candidate, central_sigmas=DEFAULT_CENTRAL_SIGMAS, min_count=DEFAULT_MIN_COUNT):
    """
    Mean squared difference of ln(density) between two PDFs on the reference
    grid. Only bins populated in BOTH PDFs and inside central_sigmas of the
    narrower of the two spreads are compared, so on matching grids the value
    does not depend on which PDF is the reference. The candidate is
    interpolated (in log-density) onto the reference bin centers.
    """
    if not math.isclose(reference.normalization, candidate.normalization, rel_tol=1e-12):
        candidate = in_units_of(candidate, reference.normalization)

    spread = min(reference.sample_std, candidate.sample_std) / reference.normalization
    x = reference.bin_centers

    positive = candidate.density > 0
    if not np.any(positive):
        raise NoOverlapError(f"PDF at lag {candidate.lag} has no populated bins")
    cx = candidate.bin_centers[positive]
    cy = np.log(candidate.density[positive])
    cand_counts = np.interp(x, candidate.bin_centers, candidate.counts, left=0.0, right=0.0)

    inside = (
        _populated(reference, min_count)
        & (cand_counts >= min_count - 1e-9)
        & (x >= cx.min()) & (x <= cx.max())
        & (np.abs(x) <= central_sigmas * spread)
    )
    if not np.any(inside):
        raise NoOverlapError(
            f"no overlapping central support between lag {reference.lag} and lag {candidate.lag}"
        )

    diff = np.log(reference.density[inside]) - np.interp(x[inside], cx, cy)
    return float(np.mean(diff ** 2))


def collapse(pdfs, alpha, reference_lag=None, threshold=DEFAULT_THRESHOLD,
             central_sigmas=DEFAULT_CENTRAL_SIGMAS, min_count=DEFAULT_MIN_COUNT):
    """
    Rescales every PDF with lam = tau / tau_s and scores it against the master
    PDF. PDFs normalized by different sigmas are first brought into the
    master's units.
    """
    if len(pdfs) < 2:
        raise InsufficientDataError(f"collapse needs at least 2 PDFs, got {len(pdfs)}")
    pdfs = sorted(pdfs, key=lambda p: p.lag)
    if reference_lag is None:
        reference_lag = pdfs[0].lag

    by_lag = {p.lag: p for p in pdfs}
    if reference_lag not in by_lag:
        raise DomainError(f"reference lag {reference_lag} is not among the PDF lags {sorted(by_lag)}")
    reference = by_lag[reference_lag]

    distances = []
    for pdf in pdfs:
        if pdf.lag == reference_lag:
            distances.append((pdf.lag, 0.0))
            continue
        aligned = in_units_of(pdf, reference.normalization)
        rescaled = rescale_pdf(aligned, alpha, pdf.lag / reference_lag)
        distances.append((pdf.lag, collapse_distance(reference, rescaled, central_sigmas, min_count)))

    collapsed = all(d <= threshold for _, d in distances)
    worst = max(d for _, d in distances)
    logger.info(
        f"[Collapse] alpha={alpha:.4f}, reference tau={reference_lag}: worst distance {worst:.4f} "
        f"-> {'COLLAPSED' if collapsed else 'NOT COLLAPSED'} (threshold {threshold})"
    )
    return CollapseReport(float(alpha), int(reference_lag), tuple(distances), collapsed, float(threshold))
