"""
Weighted CUSUM single change-point estimation on panel series.

A panel series is an N x d matrix: N positions along a sub-slice, d panels (frames).
The statistic at a candidate break p is

    w(p, N) * sqrt( sum_k | sum_{j<=p} (Y[j,k] - mean_k) |^2 )

with w(p, N) = ((p/N)(1 - p/N))^(-gamma). The estimate is the smallest maximising p.
"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)

MIN_LENGTH = 4


@dataclass(frozen=True)
class Gamma:
    """Weight exponent, 0 <= gamma < 1/2."""

    value: float

    def __post_init__(self) -> None:
        if not (0.0 <= float(self.value) < 0.5):
            raise DomainError(f"gamma must lie in [0, 0.5), got {self.value}")

    def __float__(self) -> float:
        return float(self.value)


GammaLike = Union[Gamma, float]


def as_gamma(gamma: GammaLike) -> Gamma:
    return gamma if isinstance(gamma, Gamma) else Gamma(float(gamma))


@dataclass(frozen=True, eq=False)
class PanelSeries:
    """N x d matrix, entry (j, k) = Y_{j,k}."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DomainError(f"Panel series must be 2-D (N x d), got shape {values.shape}")
        if values.shape[0] < MIN_LENGTH:
            raise DomainError(f"Panel series needs N >= {MIN_LENGTH}, got N={values.shape[0]}")
        if values.shape[1] < 1:
            raise DomainError("Panel series needs at least one panel")
        if not np.all(np.isfinite(values)):
            raise DomainError("Panel series contains non-finite entries")
        object.__setattr__(self, "values", values)

    @property
    def length(self) -> int:
        return int(self.values.shape[0])

    @property
    def panels(self) -> int:
        return int(self.values.shape[1])


def _check_p(p: int, n: int) -> None:
    if not (1 <= p <= n - 1):
        raise DomainError(f"Break position p={p} outside [1, {n - 1}]")


def weight(p: int, N: int, gamma: GammaLike) -> float:
    """w(p, N) = ((p/N)(1 - p/N))^(-gamma)."""
    _check_p(p, N)
    g = float(as_gamma(gamma))
    x = p / N
    return float((x * (1.0 - x)) ** (-g))


def weights(N: int, gamma: GammaLike) -> np.ndarray:
    """w(p, N) for p = 1..N-1."""
    g = float(as_gamma(gamma))
    x = np.arange(1, N, dtype=np.float64) / N
    return (x * (1.0 - x)) ** (-g)


def cusum_profile(values: np.ndarray, gamma: GammaLike) -> np.ndarray:
    """
    Statistic for every break p = 1..N-1.

    ``values`` has shape (..., N, d); the result has shape (..., N-1). Partial sums run
    over positions j first, then the squared sums are aggregated over panels k.
    Series that are constant along j in every panel get an exactly zero profile.
    """
    n = values.shape[-2]
    centered = values - values.mean(axis=-2, keepdims=True)
    partial = np.cumsum(centered, axis=-2)[..., : n - 1, :]
    norms = np.sqrt(np.sum(partial * partial, axis=-1))
    flat = np.all(values == values[..., :1, :], axis=(-2, -1))
    # constant series: exactly zero whatever the rounding in the mean
    return np.where(flat[..., None], 0.0, weights(n, gamma) * norms)


def cusum_statistic(series: PanelSeries, p: int, gamma: GammaLike) -> float:
    """Statistic of ``series`` at break ``p``."""
    _check_p(p, series.length)
    return float(cusum_profile(series.values, gamma)[p - 1])


def estimate_change_point(series: PanelSeries, gamma: GammaLike) -> int:
    """Smallest p in [1, N-1] maximising the weighted CUSUM statistic."""
    profile = cusum_profile(series.values, gamma)
    # np.argmax returns the first maximiser
    return int(np.argmax(profile)) + 1
