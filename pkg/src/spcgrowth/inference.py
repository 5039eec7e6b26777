"""Out-of-sample validation, bootstrap, and timescale estimation.

Every stochastic operation here is a pure function of its inputs and an
integer seed: iteration k draws from the k-th child of a seed sequence,
so results are independent of execution order and repeatable bit for bit.

The bootstrap resamples whole regions (with replacement); a region drawn
twice contributes its points twice. Plateau thresholds are conservative
moment bounds over the resulting parameter ensemble,

    th1 = mean(b) + k * sd(b),      th2 = mean(a + b) - k * sd(a + b),

with the population standard deviation (divide by N). The characteristic
growth duration is the mean gap between each curve's crossings of th1
and th2, over the curves whose asymptote interval contains both.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .align import AlignedDataset, CentralSegment, ContinuityMode, central_segments
from .errors import (
    EnsembleError,
    EstimateError,
    FitInfeasibleError,
    InvertedThresholdsError,
    ParameterError,
    SingularityError,
    UndefinedMetricError,
)
from .logistic import (
    FitConfig,
    FitResult,
    LogisticParams,
    coefficient_of_prediction,
    fit_logistic,
    logistic_eval,
    logistic_inverse,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ValidationReport:
    rho2_values: tuple[float, ...]
    mean_rho2: float
    stderr_rho2: float  # standard error of the mean
    std_rho2: float  # sample standard deviation of the repeats
    seed: int
    n_failed: int = 0


@dataclass(frozen=True)
class BootstrapEnsemble:
    n_iter: int
    param_sets: tuple[LogisticParams, ...]
    failed_fits: int
    seed: int

    def lower_plateaus(self) -> np.ndarray:
        return np.array([p.b for p in self.param_sets])

    def upper_plateaus(self) -> np.ndarray:
        return np.array([p.a + p.b for p in self.param_sets])


@dataclass(frozen=True)
class TimescaleEstimate:
    th1: float
    th2: float
    k_sigma: int
    t1_mean: float
    t2_mean: float
    duration_mean: float
    n_crossing_curves: int
    n_excluded_curves: int
    per_curve_durations: tuple[float, ...]


@dataclass(frozen=True)
class RegionDuration:
    nga: str
    tau1: float  # first relative year strictly above th1
    tau2: float  # first relative year strictly above th2
    duration: float


@dataclass(frozen=True)
class EmpiricalDurations:
    per_nga: tuple[RegionDuration, ...]
    excluded: tuple[str, ...]  # regions never exceeding th2
    mean_duration: float
    median_duration: float


def _split_indices(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    perm = rng.permutation(n)
    half = n // 2
    return perm[:half], perm[half:]  # train, test (test gets the odd point)


def out_of_sample_validation(
    aligned: AlignedDataset,
    full_fit: FitResult,
    n_repeats: int = 100,
    seed: int = 0,
    config: FitConfig | None = None,
) -> ValidationReport:
    """Repeated random 50/50 train/test splits of the pooled points.

    Each repeat fits the training half (warm-started from the full fit)
    and scores the prediction on the test half. Repeats whose training
    fit degenerates are excluded and counted.
    """
    t, y = aligned.pooled()
    if t.size < 10:
        raise ParameterError(f"need at least 10 pooled points, got {t.size}")
    if n_repeats < 1:
        raise ParameterError("n_repeats must be >= 1")

    children = np.random.SeedSequence(seed).spawn(n_repeats)
    rho2 = []
    failed = 0
    for child in children:
        rng = np.random.default_rng(child)
        train, test = _split_indices(rng, t.size)
        try:
            fit = fit_logistic(t[train], y[train], init=full_fit.params, config=config)
            predicted = logistic_eval(fit.params, t[test])
            rho2.append(coefficient_of_prediction(predicted, y[test]))
        except (SingularityError, UndefinedMetricError) as exc:
            logger.warning("validation repeat failed: %s", exc)
            failed += 1
    if not rho2:
        raise EnsembleError("every validation repeat failed")
    values = np.array(rho2)
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return ValidationReport(
        rho2_values=tuple(float(v) for v in values),
        mean_rho2=float(values.mean()),
        stderr_rho2=std / float(np.sqrt(values.size)),
        std_rho2=std,
        seed=seed,
        n_failed=failed,
    )


def bootstrap_fits(
    aligned: AlignedDataset,
    full_fit: FitResult,
    n_iter: int = 1000,
    seed: int = 0,
    config: FitConfig | None = None,
) -> BootstrapEnsemble:
    """Region-level bootstrap of the pooled logistic fit.

    Each iteration draws len(regions) region names with replacement,
    pools their points (duplicates contribute duplicate points), and fits
    warm-started from the full fit. Failed fits are dropped, not retried,
    so the drop rate stays visible.
    """
    n_regions = len(aligned.regions)
    if n_regions < 1:
        raise ParameterError("need at least 1 retained region")
    if n_iter < 1:
        raise ParameterError("n_iter must be >= 1")

    region_t = [r.rel_time.astype(float) for r in aligned.regions]
    region_y = [r.scaled for r in aligned.regions]

    children = np.random.SeedSequence(seed).spawn(n_iter)
    params = []
    failed = 0
    for child in children:
        rng = np.random.default_rng(child)
        draw = rng.integers(0, n_regions, size=n_regions)
        t = np.concatenate([region_t[i] for i in draw])
        y = np.concatenate([region_y[i] for i in draw])
        try:
            fit = fit_logistic(t, y, init=full_fit.params, config=config)
            params.append(fit.params)
        except SingularityError as exc:
            logger.warning("bootstrap iteration failed: %s", exc)
            failed += 1
    if not params:
        raise EnsembleError("every bootstrap iteration failed")
    return BootstrapEnsemble(
        n_iter=n_iter, param_sets=tuple(params), failed_fits=failed, seed=seed
    )


def plateau_thresholds(ensemble: BootstrapEnsemble, k_sigma: int) -> tuple[float, float]:
    """Conservative plateau bounds from ensemble moments (population sd)."""
    if k_sigma not in (1, 3):
        raise ParameterError(f"k_sigma must be 1 or 3, got {k_sigma}")
    if not ensemble.param_sets:
        raise ParameterError("ensemble is empty")
    lower = ensemble.lower_plateaus()
    upper = ensemble.upper_plateaus()
    th1 = float(lower.mean() + k_sigma * lower.std())
    th2 = float(upper.mean() - k_sigma * upper.std())
    if th1 >= th2:
        raise InvertedThresholdsError(
            f"thresholds inverted (th1={th1:.6g} >= th2={th2:.6g}); "
            "ensemble spread too large to separate the plateaus"
        )
    return th1, th2


def characteristic_timescale(
    ensemble: BootstrapEnsemble, th1: float, th2: float, k_sigma: int = 3
) -> TimescaleEstimate:
    """Mean relative-time gap between threshold crossings over the ensemble.

    Curves whose open asymptote interval does not strictly contain both
    thresholds never cross them and are excluded (and counted) rather
    than clamped, which would bias the duration toward zero.
    """
    if not th1 < th2:
        raise ParameterError(f"need th1 < th2, got ({th1}, {th2})")
    t1, t2 = [], []
    excluded = 0
    for p in ensemble.param_sets:
        if p.lower < th1 and th2 < p.upper:
            t1.append(logistic_inverse(p, th1))
            t2.append(logistic_inverse(p, th2))
        else:
            excluded += 1
    if not t1:
        raise EstimateError("no bootstrap curve crosses both thresholds")
    t1 = np.array(t1)
    t2 = np.array(t2)
    durations = t2 - t1
    return TimescaleEstimate(
        th1=float(th1),
        th2=float(th2),
        k_sigma=k_sigma,
        t1_mean=float(t1.mean()),
        t2_mean=float(t2.mean()),
        duration_mean=float(durations.mean()),
        n_crossing_curves=int(durations.size),
        n_excluded_curves=excluded,
        per_curve_durations=tuple(float(v) for v in durations),
    )


def empirical_durations(
    aligned: AlignedDataset, th1: float, th2: float
) -> EmpiricalDurations:
    """Observed per-region durations between first crossings of th1/th2.

    tau1/tau2 are the first relative years whose scaled score strictly
    exceeds the respective threshold; regions that never exceed th2 are
    listed as excluded.
    """
    if not th1 < th2:
        raise ParameterError(f"need th1 < th2, got ({th1}, {th2})")
    entries = []
    excluded = []
    for region in aligned.regions:
        scaled = region.scaled
        above2 = np.nonzero(scaled > th2)[0]
        if above2.size == 0:
            excluded.append(region.nga)
            continue
        above1 = np.nonzero(scaled > th1)[0]
        tau1 = float(region.rel_time[int(above1[0])])
        tau2 = float(region.rel_time[int(above2[0])])
        entries.append(RegionDuration(region.nga, tau1, tau2, tau2 - tau1))
    durations = np.array([e.duration for e in entries])
    return EmpiricalDurations(
        per_nga=tuple(entries),
        excluded=tuple(excluded),
        mean_duration=float(durations.mean()) if durations.size else float("nan"),
        median_duration=float(np.median(durations)) if durations.size else float("nan"),
    )


@dataclass(frozen=True)
class ContinuityComparison:
    mode: ContinuityMode
    fit: FitResult
    segments: tuple[CentralSegment, ...]
    skipped: tuple[str, ...]

    @property
    def mean_length(self) -> float:
        return float(np.mean([s.length for s in self.segments]))

    def length_ranking(self) -> list[tuple[str, int]]:
        return sorted(
            ((s.nga, s.length) for s in self.segments), key=lambda x: (-x[1], x[0])
        )


def continuity_comparison(
    aligned: AlignedDataset,
    full_fit: FitResult,
    mode: ContinuityMode,
    config: FitConfig | None = None,
) -> ContinuityComparison:
    """Refit the curve on pooled central segments for one continuity mode."""
    segments, skipped = central_segments(aligned, mode)
    if len(segments) < 2:
        raise FitInfeasibleError(
            f"continuity mode {mode.value}: only {len(segments)} region(s) "
            "have a central segment"
        )
    t = np.concatenate([s.rel_time for s in segments])
    y = np.concatenate([s.scaled for s in segments])
    if t.size < 5:
        raise FitInfeasibleError(
            f"continuity mode {mode.value}: only {t.size} pooled point(s)"
        )
    fit = fit_logistic(t, y, init=full_fit.params, config=config)
    return ContinuityComparison(
        mode=mode, fit=fit, segments=tuple(segments), skipped=tuple(skipped)
    )
