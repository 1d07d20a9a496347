# ==============================================================================
# FILE: fdetrend.py
# ROLE: Fourier Trend Remover (F-DFA preprocessing)
# DESCRIPTION:
# Removes slow sinusoidal trends before the fluctuation analysis by zeroing the
# lowest nonzero Fourier modes of the signal and transforming back. The real
# FFT of numpy works for any length, so no padding is applied and the mode
# frequencies stay exact.
# ==============================================================================

import logging
from dataclasses import dataclass

import numpy as np

from errors import DomainError, InsufficientDataError
from series import Series

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetrendConfig:
    n_modes_removed: int = 0
    remove_mean: bool = False

    def validate(self, n):
        if self.n_modes_removed < 0:
            raise DomainError(f"n_modes_removed must be >= 0, got {self.n_modes_removed}")
        if self.n_modes_removed > n // 2:
            raise DomainError(
                f"n_modes_removed must be <= floor(N/2) = {n // 2}, got {self.n_modes_removed}"
            )

    @property
    def is_identity(self):
        return self.n_modes_removed == 0 and not self.remove_mean


def fourier_detrend(series, config):
    """
    Returns the series minus its reconstruction from the removed modes.
    Modes 1..n_modes_removed are zeroed (a real FFT keeps one half, so the
    conjugate partner goes with it); mode 0 is zeroed too when remove_mean.
    """
    n = len(series)
    if n < 4:
        raise InsufficientDataError(f"Fourier detrending needs at least 4 values, got {n}")
    config.validate(n)

    if config.is_identity:
        return series

    spectrum = np.fft.rfft(series.values)
    spectrum[1:config.n_modes_removed + 1] = 0.0
    if config.remove_mean:
        spectrum[0] = 0.0
    detrended = np.fft.irfft(spectrum, n=n)

    logger.info(
        f"[F-DFA] Removed {config.n_modes_removed} low-frequency modes"
        f"{' and the mean' if config.remove_mean else ''} from '{series.label or 'series'}'"
    )
    return Series(series.timestamps, detrended, series.label)
