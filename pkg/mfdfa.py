"""
==============================================================================
FILE: mfdfa.py
ROLE: Multifractal Detrended Fluctuation Analysis
DESCRIPTION:
The five steps of MF-DFA:
  1. profile Y(i) = cumulative sum of the mean-removed values
  2. cut Y into N_s = floor(N/s) segments from the start AND from the end
  3. subtract a least-squares polynomial of degree m from each of the
     2*N_s segments and take the residual variance F^2(s, v)
  4. q-th order fluctuation function F_q(s) = {mean [F^2]^(q/2)}^(1/q)
  5. slopes alpha(q) of ln F_q(s) against ln s; H = alpha(2)
plus detection of a knee in the log-log curve (loss of memory at large s).
Scales are independent cells and may be evaluated on worker threads.
==============================================================================
"""

import logging
from dataclasses import dataclass

import numpy as np

from errors import DegenerateSegmentError, DomainError, FitRangeError, InsufficientDataError
from structure import ZetaExponents, loglog_fit
from threads import run_parallel

logger = logging.getLogger(__name__)

DEFAULT_ORDERS = (-4.0, -3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0, 4.0)
DEFAULT_FIT_RANGE = (10, 100)
MIN_SEGMENTS = 4


@dataclass(frozen=True, eq=False)
class Profile:
    values: np.ndarray
    source_length: int


@dataclass(frozen=True, eq=False)
class FluctuationSurface:
    """F_q(s): rows follow `orders`, columns follow `scales`."""
    scales: np.ndarray
    orders: np.ndarray
    f_values: np.ndarray
    segments_per_scale: np.ndarray
    poly_order: int

    def fluctuation(self, q):
        idx = np.flatnonzero(np.isclose(self.orders, q))
        if idx.size == 0:
            raise DomainError(f"order q={q} is not part of this surface")
        return self.f_values[idx[0]]


@dataclass(frozen=True, eq=False)
class ScalingExponents:
    orders: np.ndarray
    alpha: np.ndarray
    stderr: np.ndarray
    fit_range: tuple

    @property
    def hurst(self):
        idx = np.flatnonzero(np.isclose(self.orders, 2.0))
        if idx.size == 0:
            raise DomainError("q=2 was not computed; the Hurst exponent is alpha(2)")
        return float(self.alpha[idx[0]])

    def mass_exponents(self):
        """tau(q) = q * alpha(q) - 1."""
        return self.orders * self.alpha - 1.0


def default_scales(n, count=20, s_min=10):
    """Log-spaced unique integer scales in [s_min, n // 4]."""
    s_max = n // MIN_SEGMENTS
    if s_max < s_min:
        raise InsufficientDataError(
            f"series of length {n} is too short for scales starting at {s_min}"
        )
    grid = np.unique(np.round(np.geomspace(s_min, s_max, count)).astype(np.int64))
    return grid


def build_profile(values):
    """Step 1: Y(i) = sum_{k<=i} (p_k - <p>)."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        raise InsufficientDataError(f"a profile needs at least 2 values, got {x.size}")
    return Profile(np.cumsum(x - x.mean()), int(x.size))


def segment_variances(profile, scale, poly_order=1):
    """
    Steps 2-3: residual variance of each of the 2*N_s segments after removing
    a degree-m least-squares polynomial. Forward segments come first, then the
    segments counted back from the end of the series.
    """
    y = profile.values
    n = y.size
    s = int(scale)
    if s < poly_order + 2:
        raise DomainError(f"scale {s} is too small for polynomial order {poly_order} (need s >= m + 2)")
    n_seg = n // s
    if n_seg < 1:
        raise InsufficientDataError(f"scale {s} exceeds the profile length {n}")

    forward = y[:n_seg * s].reshape(n_seg, s)
    backward = y[n - n_seg * s:].reshape(n_seg, s)[::-1]
    segments = np.vstack([forward, backward]).T

    # Fitting on [-1, 1] instead of 1..s keeps the Vandermonde well conditioned
    x = np.linspace(-1.0, 1.0, s)
    vander = np.vander(x, poly_order + 1)
    coef, *_ = np.linalg.lstsq(vander, segments, rcond=None)
    residual = segments - vander @ coef
    return np.mean(residual ** 2, axis=0)


def fluctuation_function(variances, q, log_mode=False):
    """Step 4: the q-th order power mean of the segment RMS values."""
    v = np.asarray(variances, dtype=np.float64)
    if v.size == 0:
        raise InsufficientDataError("no segment variances")
    if np.any(v < 0):
        raise DomainError("segment variances must be non-negative")
    if q == 0 and not log_mode:
        raise DomainError("q = 0 is excluded unless the logarithmic q=0 mode is enabled")

    if q <= 0:
        zero = np.flatnonzero(v == 0)
        if zero.size:
            raise DegenerateSegmentError(
                f"segment {int(zero[0])} has zero variance, F_q is undefined for q={q}",
                segment=int(zero[0]),
            )

    if q == 0:
        return float(np.exp(0.5 * np.mean(np.log(v))))
    return float(np.mean(v ** (q / 2.0)) ** (1.0 / q))


def mfdfa_surface(values, scales, orders=DEFAULT_ORDERS, poly_order=1, log_mode=False, workers=1):
    """Steps 1-4 on every scale; the full F_q(s) grid."""
    profile = build_profile(values)
    scales = np.asarray(scales, dtype=np.int64)
    orders = np.asarray(orders, dtype=np.float64)

    if scales.size == 0 or orders.size == 0:
        raise DomainError("scale and order grids must be non-empty")
    if np.any(np.diff(scales) <= 0):
        raise DomainError("scales must be strictly increasing")
    too_large = scales[profile.source_length // scales < MIN_SEGMENTS]
    if too_large.size:
        raise DomainError(
            f"scale {int(too_large[0])} leaves fewer than {MIN_SEGMENTS} segments "
            f"in a series of length {profile.source_length}"
        )

    def one_scale(s):
        variances = segment_variances(profile, s, poly_order)
        return [fluctuation_function(variances, q, log_mode) for q in orders]

    columns = run_parallel(one_scale, scales, workers=workers, name="MF-DFA")
    f_values = np.array(columns, dtype=np.float64).T

    logger.info(f"[MF-DFA] F_q(s) computed for {orders.size} orders over {scales.size} scales (m={poly_order})")
    return FluctuationSurface(scales, orders, f_values, profile.source_length // scales, int(poly_order))


def fit_exponents(surface, fit_range=DEFAULT_FIT_RANGE):
    """Step 5: alpha(q) from ln F_q(s) against ln s inside the fit range."""
    lo, hi = fit_range
    inside = np.count_nonzero((surface.scales >= lo) & (surface.scales <= hi))
    if inside < 3:
        raise FitRangeError(f"only {inside} scales inside fit range {tuple(fit_range)}, need 3")

    alpha, stderr = [], []
    for i in range(surface.orders.size):
        fit = loglog_fit(surface.scales, surface.f_values[i], fit_range)
        alpha.append(fit.slope)
        stderr.append(fit.stderr)

    exponents = ScalingExponents(surface.orders, np.array(alpha), np.array(stderr), tuple(fit_range))
    if np.any(np.isclose(surface.orders, 2.0)):
        logger.info(f"[MF-DFA] Hurst exponent H = alpha(2) = {exponents.hurst:.4f}")
    return exponents


def zeta_from_mfdfa(exponents):
    """Packages zeta_q = q * alpha(q) for q > 0 so the linearity test applies."""
    positive = exponents.orders > 0
    orders = exponents.orders[positive]
    return ZetaExponents.from_slopes(
        orders,
        orders * exponents.alpha[positive],
        orders * exponents.stderr[positive],
        exponents.fit_range,
    )


def _line_sse(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    return float(np.sum((y - (slope * x + intercept)) ** 2)), float(slope)


def detect_scaling_break(surface, q=2.0, threshold=0.1, min_points=3):
    """
    Two independent straight lines in log-log space, split at every possible
    knee. Returns the first scale of the right-hand segment for the split with
    the smallest total squared residual, or None when the slopes differ by no
    more than `threshold`.
    """
    n = surface.scales.size
    if n < 8:
        raise InsufficientDataError(f"scaling-break detection needs at least 8 scales, got {n}")

    x = np.log(surface.scales.astype(np.float64))
    y = np.log(surface.fluctuation(q))

    best = None
    for k in range(min_points, n - min_points + 1):
        sse_left, slope_left = _line_sse(x[:k], y[:k])
        sse_right, slope_right = _line_sse(x[k:], y[k:])
        total = sse_left + sse_right
        if best is None or total < best[0]:
            best = (total, k, slope_left, slope_right)

    _, knee, slope_left, slope_right = best
    if abs(slope_left - slope_right) <= threshold:
        logger.info(f"[MF-DFA] No scaling break for q={q} (slopes {slope_left:.3f} / {slope_right:.3f})")
        return None

    knee_scale = int(surface.scales[knee])
    logger.info(
        f"[MF-DFA] Scaling break near s={knee_scale}: slope {slope_left:.3f} -> {slope_right:.3f}"
    )
    return knee_scale
