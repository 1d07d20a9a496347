"""
==============================================================================
FILE: structure.py
ROLE: Structure Functions & Moment Scaling
DESCRIPTION:
Generalized structure functions S^n(tau) = <|dp(tau)|^n> (absolute moments
for every order, so odd orders stay valid), their log-log slopes zeta_n, the
standard-deviation law sigma(tau) ~ tau^alpha, and the mono/multifractal
linearity test. Also home of the shared log-log regression used by every
"straight line on a log-log plot" in the tool.
==============================================================================
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import linregress

from errors import DomainError, FitRangeError, InsufficientDataError
from series import compute_returns

logger = logging.getLogger(__name__)

DEFAULT_ORDERS = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
DEFAULT_FIT_RANGE = (1, 100)


class Verdict(str, Enum):
    MONOFRACTAL = "monofractal"
    MULTIFRACTAL = "multifractal"


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    stderr: float
    n_points: int


@dataclass(frozen=True, eq=False)
class StructureSet:
    """S^n(tau): rows follow `orders`, columns follow `lags`."""
    lags: np.ndarray
    orders: np.ndarray
    s_values: np.ndarray

    def row(self, order):
        idx = np.flatnonzero(np.isclose(self.orders, order))
        if idx.size == 0:
            raise DomainError(f"order {order} is not part of this structure set")
        return self.s_values[idx[0]]


@dataclass(frozen=True, eq=False)
class ZetaExponents:
    orders: np.ndarray
    zeta: np.ndarray
    stderr: np.ndarray
    fit_range: tuple
    linear_alpha: float
    nonlinearity: float

    @classmethod
    def from_slopes(cls, orders, zeta, stderr, fit_range):
        """Adds the constrained line zeta_n = alpha * n and its worst deviation."""
        orders = np.asarray(orders, dtype=np.float64)
        zeta = np.asarray(zeta, dtype=np.float64)
        alpha = float(np.dot(orders, zeta) / np.dot(orders, orders))
        nonlinearity = float(np.max(np.abs(zeta - alpha * orders)))
        return cls(orders, zeta, np.asarray(stderr, dtype=np.float64),
                   tuple(fit_range), alpha, nonlinearity)


@dataclass(frozen=True, eq=False)
class SigmaFit:
    lags: np.ndarray
    sigma: np.ndarray
    alpha: float
    stderr: float
    fit_range: tuple


@dataclass(frozen=True)
class MultifractalityVerdict:
    verdict: Verdict
    nonlinearity: float
    strictly_increasing: bool
    threshold: float


def loglog_fit(xs, ys, fit_range=None):
    """
    Ordinary least squares of ln(y) on ln(x) over the points with
    fit_range[0] <= x <= fit_range[1] (all points when fit_range is None).
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape:
        raise DomainError("xs and ys must have the same length")

    if fit_range is None:
        mask = np.ones(xs.shape, dtype=bool)
    else:
        lo, hi = fit_range
        mask = (xs >= lo) & (xs <= hi)

    x, y = xs[mask], ys[mask]
    if x.size < 3:
        raise FitRangeError(f"need at least 3 points inside fit range {fit_range}, got {x.size}")
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("log-log fit needs strictly positive x and y values")

    # A constant y has zero variance in ln(y); linregress handles it (slope 0)
    res = linregress(np.log(x), np.log(y))
    return LogLogFit(float(res.slope), float(res.intercept), float(res.stderr), int(x.size))


def structure_function(returns, order):
    """Empirical mean of |dp|^n."""
    values = np.asarray(getattr(returns, "values", returns), dtype=np.float64)
    if values.size == 0:
        raise InsufficientDataError("structure function of an empty return set")
    if order <= 0:
        raise DomainError(f"structure-function order must be > 0, got {order}")
    return float(np.mean(np.abs(values) ** order))


def structure_set(series, lags, orders=DEFAULT_ORDERS, overlapping=True):
    """Builds S^n(tau) for every (order, lag) cell."""
    lags = np.asarray(sorted(set(int(l) for l in lags)), dtype=np.int64)
    orders = np.asarray(orders, dtype=np.float64)

    table = np.empty((orders.size, lags.size))
    for j, lag in enumerate(lags):
        returns = compute_returns(series, int(lag), overlapping)
        for i, n in enumerate(orders):
            table[i, j] = structure_function(returns, n)

    logger.info(f"[Structure] S^n(tau) for {orders.size} orders over {lags.size} lags")
    return StructureSet(lags, orders, table)


def fit_zeta(structure, fit_range=DEFAULT_FIT_RANGE):
    """Per-order log-log slopes zeta_n plus the best linear law zeta_n = alpha * n."""
    slopes, errors = [], []
    for i, n in enumerate(structure.orders):
        fit = loglog_fit(structure.lags, structure.s_values[i], fit_range)
        slopes.append(fit.slope)
        errors.append(fit.stderr)

    zeta = ZetaExponents.from_slopes(structure.orders, slopes, errors, fit_range)
    logger.info(
        f"[Structure] zeta fitted over tau in {fit_range}: linear alpha={zeta.linear_alpha:.4f}, "
        f"nonlinearity={zeta.nonlinearity:.4f}"
    )
    return zeta


def sigma_tau(return_sets, fit_range=DEFAULT_FIT_RANGE):
    """sigma(tau) = sqrt(S^2(tau)) and its power-law exponent."""
    return_sets = sorted(return_sets, key=lambda r: r.lag)
    lags = np.array([r.lag for r in return_sets], dtype=np.int64)
    s2 = np.array([structure_function(r, 2.0) for r in return_sets])

    # Fitting 0.5*ln(S^2) keeps the slope exactly half of zeta_2
    fit = loglog_fit(lags, s2, fit_range)
    sigma = np.sqrt(s2)
    logger.info(f"[Structure] sigma(tau) exponent alpha={fit.slope / 2:.4f} +/- {fit.stderr / 2:.4f}")
    return SigmaFit(lags, sigma, fit.slope / 2.0, fit.stderr / 2.0, tuple(fit_range))


def multifractality_test(zeta, threshold=0.05):
    """Monofractal iff the exponents are linear within `threshold` and strictly increasing."""
    if len(zeta.orders) < 3:
        raise InsufficientDataError(f"multifractality test needs at least 3 orders, got {len(zeta.orders)}")

    order = np.argsort(zeta.orders)
    increasing = bool(np.all(np.diff(zeta.zeta[order]) > 0))
    linear = zeta.nonlinearity <= threshold
    verdict = Verdict.MONOFRACTAL if (linear and increasing) else Verdict.MULTIFRACTAL
    return MultifractalityVerdict(verdict, zeta.nonlinearity, increasing, float(threshold))
