import numpy as np
import pytest

from errors import DomainError, InsufficientDataError
from fdetrend import DetrendConfig, fourier_detrend
from series import Series

N = 1000


def sinusoid(k, amplitude=1.0, n=N):
    t = np.arange(n)
    return amplitude * np.sin(2.0 * np.pi * k * t / n + 0.3)


def test_identity_config_returns_input():
    s = Series.from_values(sinusoid(3))
    assert fourier_detrend(s, DetrendConfig()) is s


@pytest.mark.parametrize("k,removed", [(1, 1), (3, 3), (3, 5)])
def test_sinusoid_is_cancelled(k, removed):
    s = Series.from_values(sinusoid(k, amplitude=4.0))
    out = fourier_detrend(s, DetrendConfig(n_modes_removed=removed))
    assert np.max(np.abs(out.values)) <= 1e-8 * 4.0


def test_mode_above_cutoff_survives():
    x = sinusoid(7)
    out = fourier_detrend(Series.from_values(x), DetrendConfig(n_modes_removed=3))
    assert np.allclose(out.values, x, atol=1e-10)


def test_remove_mean():
    s = Series.from_values(5.0 + sinusoid(2))
    kept = fourier_detrend(s, DetrendConfig(n_modes_removed=2))
    gone = fourier_detrend(s, DetrendConfig(n_modes_removed=2, remove_mean=True))
    assert np.allclose(kept.values, 5.0, atol=1e-10)
    assert np.allclose(gone.values, 0.0, atol=1e-10)


def test_odd_length_keeps_length_and_timestamps():
    s = Series(np.arange(3, 3 + 999) * 2, sinusoid(2, n=999) + 1.0)
    out = fourier_detrend(s, DetrendConfig(n_modes_removed=2))
    assert len(out) == 999
    assert np.array_equal(out.timestamps, s.timestamps)


def test_noise_variance_preserved():
    ratios = []
    for seed in range(20):
        noise = np.random.default_rng(seed).standard_normal(4096)
        x = noise + 3.0 * sinusoid(2, n=4096)
        out = fourier_detrend(Series.from_values(x), DetrendConfig(n_modes_removed=4))
        ratios.append(np.var(out.values) / np.var(noise))
    assert np.mean(ratios) == pytest.approx(1.0, abs=0.05)


def test_idempotent_and_linear(rng):
    cfg = DetrendConfig(n_modes_removed=6)
    x, y = rng.standard_normal(N), rng.standard_normal(N)
    once = fourier_detrend(Series.from_values(x), cfg).values
    twice = fourier_detrend(Series.from_values(once), cfg).values
    assert np.allclose(once, twice, atol=1e-10)

    combined = fourier_detrend(Series.from_values(2.0 * x - 3.0 * y), cfg).values
    separate = 2.0 * once - 3.0 * fourier_detrend(Series.from_values(y), cfg).values
    assert np.allclose(combined, separate, atol=1e-10)


def test_output_orthogonal_to_removed_modes(rng):
    out = fourier_detrend(Series.from_values(rng.standard_normal(N)), DetrendConfig(n_modes_removed=4))
    t = np.arange(N)
    for k in range(1, 5):
        for basis in (np.cos(2 * np.pi * k * t / N), np.sin(2 * np.pi * k * t / N)):
            assert abs(np.dot(out.values, basis)) <= 1e-8 * np.linalg.norm(out.values) * np.linalg.norm(basis)


def test_too_many_modes():
    with pytest.raises(DomainError, match="floor"):
        fourier_detrend(Series.from_values(sinusoid(1, n=10)), DetrendConfig(n_modes_removed=6))


def test_short_series():
    with pytest.raises(InsufficientDataError):
        fourier_detrend(Series.from_values([1.0, 2.0, 3.0]), DetrendConfig(n_modes_removed=1))
