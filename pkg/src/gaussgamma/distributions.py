"""Elementary densities used as mixture components.

Gaussians are parameterised by mean and variance, Gammas by shape and rate
(inverse scale), so that

    Ga(x; shape, rate) = rate**shape / Gamma(shape) * x**(shape - 1) * exp(-rate * x)

Everything is evaluated in log space.  The functions accept scalars or numpy
arrays for ``x`` and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import NonPositiveMean

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GaussianParams:
    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ValueError(f"Gaussian parameters must be finite, got {self}")
        if self.variance <= 0:
            raise ValueError(f"variance must be > 0, got {self.variance}")


@dataclass(frozen=True)
class GammaParams:
    shape: float
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and math.isfinite(self.rate)):
            raise ValueError(f"Gamma parameters must be finite, got {self}")
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError(f"shape and rate must be > 0, got {self}")


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance <= 0:
            raise ValueError(f"variance must be > 0, got {self.variance}")


def gaussian_log_pdf(x, p: GaussianParams):
    """Log density of N(mean, variance) at ``x``."""
    x = np.asarray(x, dtype=float)
    out = -0.5 * (_LOG_2PI + math.log(p.variance)) - (x - p.mean) ** 2 / (2.0 * p.variance)
    return out[()] if out.ndim == 0 else out


def gamma_log_pdf(x, p: GammaParams):
    """Log density of Ga(shape, rate) at ``x``.

    Zero density (``-inf``) outside ``x > 0``.  At ``x == 0`` the exponential
    case (shape 1) returns ``log(rate)``; for shape < 1 the divergent density
    is reported as ``-inf`` so that an exact zero cannot dominate a likelihood.
    """
    x = np.asarray(x, dtype=float)
    a, b = p.shape, p.rate
    const = a * math.log(b) - float(gammaln(a))
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    xp = x[pos]
    out[pos] = const + (a - 1.0) * np.log(xp) - b * xp
    if a == 1.0:
        out[x == 0] = math.log(b)
    return out[()] if out.ndim == 0 else out


def moments_to_gamma(m: Moments) -> GammaParams:
    """Shape and rate of the Gamma with the given mean and variance.

    shape = mean**2 / variance, rate = mean / variance.
    """
    if not m.mean > 0:
        raise NonPositiveMean(f"Gamma moment matching needs mean > 0, got {m.mean}")
    rate = m.mean / m.variance
    return GammaParams(shape=m.mean * rate, rate=rate)


def gamma_moments(p: GammaParams) -> Moments:
    mean = p.shape / p.rate
    return Moments(mean=mean, variance=mean / p.rate)


def sample_gaussian(p: GaussianParams, rng: np.random.Generator, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.normal(p.mean, math.sqrt(p.variance), size=n)


def sample_gamma(p: GammaParams, rng: np.random.Generator, n: int) -> np.ndarray:
    # numpy's sampler is exact (Marsaglia-Tsang with the shape < 1 boost)
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.gamma(p.shape, 1.0 / p.rate, size=n)
