"""
==============================================================================
FILE: series.py
ROLE: Series Core
DESCRIPTION:
The basic objects of the analysis: an ordered, timestamped signal (Series),
its increments at a fixed lag (ReturnSet), and descriptive statistics of a
return sample (SummaryStats). Also the moving-window statistics used to show
that prices are non-stationary while their increments are not.
Increments are OVERLAPPING by default (t steps by one sample); lags count
sample positions, not calendar days.
==============================================================================
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.stats import kurtosis, skew

from errors import DegenerateDistributionError, DomainError, InsufficientDataError

# Initialize the logger for this specific module
logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Series:
    """Ordered scalar signal. `timestamps` are ordinal day indices."""
    timestamps: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)

        if vals.ndim != 1 or ts.shape != vals.shape:
            raise DomainError("timestamps and values must be 1-D arrays of equal length")
        if len(vals) < 2:
            raise InsufficientDataError(f"a series needs at least 2 values, got {len(vals)}")
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmax(~np.isfinite(vals)))
            raise DomainError(f"non-finite value at position {bad}")
        if np.any(np.diff(ts) <= 0):
            bad = int(np.argmax(np.diff(ts) <= 0)) + 1
            raise DomainError(f"timestamps must be strictly increasing (position {bad})")

    def __len__(self):
        return len(self.values)

    @classmethod
    def from_values(cls, values, label="", start=0):
        """Builds a series on a consecutive integer index."""
        values = np.asarray(values, dtype=np.float64)
        return cls(np.arange(start, start + len(values)), values, label)


@dataclass(frozen=True, eq=False)
class ReturnSet:
    """Increments dp(t, lag) = p(t + lag) - p(t)."""
    lag: int
    values: np.ndarray
    origin_length: int
    overlapping: bool = True

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std_dev: float
    skewness: float
    kurtosis: float
    count: int

    def as_dict(self):
        return {
            "mean": self.mean,
            "std_dev": self.std_dev,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "count": self.count,
        }


@dataclass(frozen=True)
class WindowStats:
    start: int
    timestamp: int
    mean: float
    variance: float


def compute_returns(series, lag, overlapping=True):
    """
    Increments at a fixed lag, using positional indexing.
    Overlapping mode gives N - lag values. Nonoverlapping mode strides by the
    lag and gives ceil(N / lag) - 1 values.
    """
    n = len(series)
    if not isinstance(lag, (int, np.integer)) or lag < 1 or lag > n - 1:
        raise DomainError(f"lag must be an integer in [1, {n - 1}], got {lag}")
    lag = int(lag)

    p = series.values
    if overlapping:
        values = p[lag:] - p[:-lag]
    else:
        values = np.diff(p[::lag])
    return ReturnSet(lag=lag, values=values, origin_length=n, overlapping=overlapping)


def summary_stats(values):
    """
    Mean, population standard deviation, skewness and raw kurtosis
    (Gaussian = 3). Needs at least 4 points and a nonzero spread.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.size < 4:
        raise InsufficientDataError(f"summary statistics need at least 4 values, got {x.size}")
    if np.ptp(x) == 0:
        raise DegenerateDistributionError("all values are equal; skewness and kurtosis are undefined")

    return SummaryStats(
        mean=float(np.mean(x)),
        std_dev=float(np.std(x)),
        skewness=float(skew(x, bias=True)),
        kurtosis=float(kurtosis(x, fisher=False, bias=True)),
        count=int(x.size),
    )


def rolling_stats(series, window, step=1):
    """Mean and population variance of the signal in a moving window."""
    n = len(series)
    if window < 2 or window > n:
        raise DomainError(f"window must be in [2, {n}], got {window}")
    if step < 1:
        raise DomainError(f"step must be >= 1, got {step}")

    windows = sliding_window_view(series.values, window)[::step]
    starts = np.arange(0, n - window + 1, step)
    means = windows.mean(axis=1)
    variances = windows.var(axis=1)

    logger.debug(f"[Stats] {len(starts)} windows of size {window} (step {step})")
    return [
        WindowStats(int(s), int(series.timestamps[s]), float(m), float(v))
        for s, m, v in zip(starts, means, variances)
    ]


def expanding_variance(series, sizes):
    """Variance of the leading window for each requested window size."""
    n = len(series)
    table = []
    for size in sizes:
        if size < 2 or size > n:
            raise DomainError(f"window size must be in [2, {n}], got {size}")
        table.append((int(size), float(np.var(series.values[:size]))))
    return table
