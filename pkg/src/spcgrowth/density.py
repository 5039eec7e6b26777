"""Gaussian kernel density estimation and bimodal threshold detection.

The estimate is the plain Gaussian-kernel sum

    rho(x) = 1 / (n h) * sum_i phi((x - x_i) / h)

evaluated on a uniform grid, with phi the standard normal density. The
automatic bandwidth is Scott's rule h = std(x) * n**(-1/5) (sample
standard deviation). The threshold separating the low and high modes of a
bimodal distribution is the grid location of the minimum density strictly
between the two highest local maxima.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateBandwidthError,
    InsufficientDataError,
    ParameterError,
    UnimodalDensityError,
)

logger = logging.getLogger(__name__)

AUTO_BANDWIDTH = "auto"

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class DensityEstimate:
    grid: np.ndarray  # ascending, uniform
    density: np.ndarray  # same length, >= 0
    bandwidth: float
    n_samples: int

    def integral(self) -> float:
        """Trapezoidal mass under the estimate (about 1 when uncropped)."""
        return float(np.trapezoid(self.density, self.grid))


@dataclass(frozen=True)
class BimodalThreshold:
    spc1_0: float
    left_peak: float
    right_peak: float
    peak_densities: tuple[float, float]
    threshold_density: float


def scott_bandwidth(samples: np.ndarray) -> float:
    sd = float(np.std(samples, ddof=1))
    # identical samples land at sd ~ 1e-17 rather than exactly 0
    if sd <= 1e-12 * max(1.0, float(np.max(np.abs(samples)))):
        raise DegenerateBandwidthError("zero sample variance; supply an explicit bandwidth")
    return sd * samples.size ** (-1.0 / 5.0)


def gaussian_kde(
    samples,
    bandwidth: float | str = AUTO_BANDWIDTH,
    grid_size: int = 1024,
    clip: tuple[float, float] | None = None,
    grid: np.ndarray | None = None,
) -> DensityEstimate:
    """Estimate the density of ``samples`` on a uniform grid.

    The grid spans [min - 4h, max + 4h], optionally intersected with
    ``clip``; pass ``grid`` to evaluate on an explicit set of points
    instead (e.g. to compare two estimates pointwise).
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if samples.size < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {samples.size}")
    if not np.all(np.isfinite(samples)):
        raise ParameterError("samples must be finite")

    if bandwidth == AUTO_BANDWIDTH:
        h = scott_bandwidth(samples)
    else:
        h = float(bandwidth)
        if h <= 0:
            raise ParameterError(f"bandwidth must be positive, got {h}")

    if grid is None:
        lo = samples.min() - 4.0 * h
        hi = samples.max() + 4.0 * h
        if clip is not None:
            lo, hi = max(lo, clip[0]), min(hi, clip[1])
            if not lo < hi:
                raise ParameterError("clip range excludes all sample mass")
        if grid_size < 2:
            raise ParameterError("grid_size must be at least 2")
        grid = np.linspace(lo, hi, grid_size)
    else:
        grid = np.asarray(grid, dtype=float)

    z = (grid[:, None] - samples[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (samples.size * h * _SQRT_2PI)
    return DensityEstimate(grid=grid, density=density, bandwidth=h, n_samples=samples.size)


def _local_maxima(density: np.ndarray) -> list[int]:
    """Indices of strict local maxima; equal-value plateau runs collapse to
    their midpoint. Grid endpoints never qualify."""
    n = density.size
    maxima = []
    i = 1
    while i < n - 1:
        j = i
        while j + 1 < n and density[j + 1] == density[i]:
            j += 1
        # run [i, j] of equal values; compare against both flanks
        if density[i - 1] < density[i] and j + 1 < n and density[j + 1] < density[i]:
            maxima.append((i + j) // 2)
        i = j + 1
    return maxima


def find_bimodal_threshold(estimate: DensityEstimate) -> BimodalThreshold:
    """Locate the minimum between the two highest local maxima.

    Raises UnimodalDensityError when fewer than two local maxima exist,
    in which case no low/high threshold is defined and the pipeline must
    abort with a diagnostic.
    """
    density = estimate.density
    grid = estimate.grid
    if grid.size < 3:
        raise ParameterError("need at least 3 grid points")

    maxima = _local_maxima(density)
    if len(maxima) < 2:
        raise UnimodalDensityError(
            f"density has {len(maxima)} local maxima; threshold between two "
            "modes is undefined (try a smaller bandwidth)"
        )
    if len(maxima) > 2:
        logger.info("density has %d local maxima; using the two highest", len(maxima))
    # Two highest; ties broken toward the smaller grid location.
    ranked = sorted(maxima, key=lambda i: (-density[i], grid[i]))
    left, right = sorted(ranked[:2])

    interior = slice(left + 1, right)
    rel = int(np.argmin(density[interior]))  # first occurrence = smallest location
    idx = left + 1 + rel
    return BimodalThreshold(
        spc1_0=float(grid[idx]),
        left_peak=float(grid[left]),
        right_peak=float(grid[right]),
        peak_densities=(float(density[left]), float(density[right])),
        threshold_density=float(density[idx]),
    )
