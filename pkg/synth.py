"""
==============================================================================
FILE: synth.py
ROLE: Oracle Factory
DESCRIPTION:
Seeded generators of processes whose scaling is known in closed form. They are
the reference signals every estimator is checked against:
  - gaussian_noise   : i.i.d. N(0, 1), alpha(2) = 0.5
  - fgn              : exact fractional Gaussian noise, alpha(2) = H
  - stable_flight    : cumulative sum of symmetric stable steps, P(0) ~ tau^(-1/mu)
  - binomial_cascade : deterministic multiplicative measure, analytic h(q)
RNG: numpy PCG64 seeded through SeedSequence(seed). A generator that needs
several independent streams takes them from SeedSequence(seed).spawn(k), in a
fixed order, so output is bitwise reproducible on every platform.
==============================================================================
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from errors import DomainError, GeneratorError, InsufficientDataError
from series import Series

logger = logging.getLogger(__name__)

KINDS = ("gaussian_noise", "fgn", "stable_flight", "binomial_cascade")

DEFAULT_PARAMS = {
    "gaussian_noise": {},
    "fgn": {"hurst": 0.7},
    "stable_flight": {"mu": 1.5, "gamma": 1.0},
    "binomial_cascade": {"a": 0.7, "levels": 16, "shuffle": False},
}


PARAM_TYPES = {"hurst": float, "mu": float, "gamma": float, "a": float, "levels": int, "shuffle": bool}


def _cast(name, value):
    cast = PARAM_TYPES[name]
    if cast is bool:
        if not isinstance(value, bool):
            raise DomainError(f"parameter '{name}' must be true or false, got {value!r}")
        return value
    if isinstance(value, bool):
        raise DomainError(f"parameter '{name}' must be a number, got {value!r}")
    try:
        number = cast(value)
    except (TypeError, ValueError):
        raise DomainError(f"parameter '{name}' must be of type {cast.__name__}, got {value!r}")
    if cast is int and number != value:
        raise DomainError(f"parameter '{name}' must be an integer, got {value!r}")
    return number


@dataclass(frozen=True)
class GenSpec:
    kind: str
    length: int
    seed: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown generator kind '{self.kind}', expected one of {', '.join(KINDS)}")
        merged = dict(DEFAULT_PARAMS[self.kind])
        unknown = sorted(set(self.params or {}) - set(merged))
        if unknown:
            raise DomainError(f"unknown parameter(s) for {self.kind}: {', '.join(map(str, unknown))}")
        merged.update(self.params or {})
        object.__setattr__(self, "params", {k: _cast(k, v) for k, v in merged.items()})

        if self.kind == "binomial_cascade" and self.length is None:
            object.__setattr__(self, "length", 2 ** self.params["levels"])
        if self.length is None:
            raise DomainError(f"{self.kind} needs an explicit length")
        if self.seed is None:
            raise DomainError("generator runs need an explicit seed")
        for name in ("length", "seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise DomainError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        self._check_params()

    def _check_params(self):
        p = self.params
        if self.kind == "fgn" and not 0.0 < p["hurst"] < 1.0:
            raise DomainError(f"fgn needs 0 < H < 1, got {p['hurst']}")
        if self.kind == "stable_flight":
            if not 0.0 < p["mu"] <= 2.0:
                raise DomainError(f"stable flight needs 0 < mu <= 2, got {p['mu']}")
            if p["gamma"] <= 0:
                raise DomainError(f"stable flight needs gamma > 0, got {p['gamma']}")
        if self.kind == "binomial_cascade":
            if not 0.5 < p["a"] < 1.0:
                raise DomainError(f"cascade multiplier must satisfy 0.5 < a < 1, got {p['a']}")
            if p["levels"] < 10:
                raise DomainError(f"cascade needs at least 10 levels, got {p['levels']}")
            if self.length != 2 ** p["levels"]:
                raise DomainError(f"cascade length must be 2^levels = {2 ** p['levels']}, got {self.length}")

    def as_dict(self):
        return {"kind": self.kind, "length": int(self.length), "seed": int(self.seed), "params": dict(self.params)}


def _streams(seed, count):
    """Independent PCG64 generators, spawned from one SeedSequence."""
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def gen_gaussian_noise(spec):
    if spec.length < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {spec.length}")
    (rng,) = _streams(spec.seed, 1)
    values = rng.standard_normal(spec.length)
    return Series.from_values(values, label=f"gaussian_noise(seed={spec.seed})")


def fgn_autocovariance(hurst, k):
    """Autocovariance of unit-variance fGn at integer lag k."""
    k = np.abs(np.asarray(k, dtype=np.float64))
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2.0 * k ** h2 + np.abs(k - 1) ** h2)


def gen_fgn(spec):
    """
    Exact fGn by circulant embedding (Davies-Harte). The autocovariance is
    embedded in a circulant of size 2n whose eigenvalues must be non-negative.
    """
    n = spec.length
    hurst = float(spec.params["hurst"])
    if n < 64:
        raise InsufficientDataError(f"fgn needs at least 64 samples, got {n}")

    gamma = fgn_autocovariance(hurst, np.arange(n + 1))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigenvalues = np.fft.fft(row).real

    if np.min(eigenvalues) < -1e-10 * np.max(eigenvalues):
        raise GeneratorError(
            f"circulant embedding is not positive definite for n={n}, H={hurst}; use a larger n"
        )
    eigenvalues = np.clip(eigenvalues, 0.0, None)

    re_stream, im_stream = _streams(spec.seed, 2)
    m = row.size
    w = np.sqrt(eigenvalues / m) * (re_stream.standard_normal(m) + 1j * im_stream.standard_normal(m))
    values = np.fft.fft(w)[:n].real
    return Series.from_values(values, label=f"fgn(H={hurst}, seed={spec.seed})")


def stable_variates(rng, size, mu):
    """
    Standard symmetric stable variates (characteristic function exp(-|k|^mu))
    from a uniform angle and an exponential variate.
    """
    v = rng.uniform(-np.pi / 2.0, np.pi / 2.0, size)
    w = rng.standard_exponential(size)
    if mu == 1.0:
        return np.tan(v)
    return (np.sin(mu * v) / np.cos(v) ** (1.0 / mu)) * (np.cos(v - mu * v) / w) ** ((1.0 - mu) / mu)


def gen_stable_flight(spec):
    """Cumulative sum of symmetric stable steps with scale gamma^(1/mu) per unit lag."""
    mu = float(spec.params["mu"])
    gamma = float(spec.params["gamma"])
    (rng,) = _streams(spec.seed, 1)
    steps = gamma ** (1.0 / mu) * stable_variates(rng, spec.length, mu)
    return Series.from_values(np.cumsum(steps), label=f"stable_flight(mu={mu}, seed={spec.seed})")


def gen_binomial_cascade(spec):
    """
    Binomial multiplicative measure on 2^levels cells. Every refinement hands
    a fraction `a` of a cell's mass to its left half and 1 - a to its right.
    With shuffle, a seeded coin decides per cell which half receives `a`.
    """
    a = float(spec.params["a"])
    levels = int(spec.params["levels"])
    shuffle = bool(spec.params.get("shuffle", False))
    (rng,) = _streams(spec.seed, 1)

    mass = np.ones(1)
    for _ in range(levels):
        left = np.full(mass.size, a)
        if shuffle:
            left = np.where(rng.random(mass.size) < 0.5, a, 1.0 - a)
        refined = np.empty(2 * mass.size)
        refined[0::2] = mass * left
        refined[1::2] = mass * (1.0 - left)
        mass = refined

    return Series.from_values(mass, label=f"binomial_cascade(a={a}, levels={levels})")


GENERATORS = {
    "gaussian_noise": gen_gaussian_noise,
    "fgn": gen_fgn,
    "stable_flight": gen_stable_flight,
    "binomial_cascade": gen_binomial_cascade,
}


def gen_series(spec):
    logger.info(f"[Synth] Generating {spec.kind} with n={spec.length}, seed={spec.seed}, params={spec.params}")
    return GENERATORS[spec.kind](spec)
