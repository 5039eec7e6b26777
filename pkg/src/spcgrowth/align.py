"""Anchor detection, relative-time alignment, and continuity segments.

Each region is anchored at the first observation whose scaled score
strictly exceeds the low/high threshold; shifting calendar years by the
anchor puts every retained region's crossing at relative year 0 so their
growth phases overlap. Regions that never cross are discarded from the
alignment (they carry little information about growth duration).

A region's central segment for a continuity mode is the maximal
contiguous run of observations labelled continuous for that mode that
contains the anchor observation.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .dataset import (
    CULTURAL_CONTINUITY,
    INSTITUTIONAL_CONTINUITY,
    Dataset,
    Observation,
    RegionSeries,
)
from .errors import NoCentralSegmentError, ParameterError, StateError

logger = logging.getLogger(__name__)


class ContinuityMode(enum.Enum):
    CULTURAL = "cultural"
    INSTITUTIONAL = "institutional"

    @property
    def continuity_label(self) -> str:
        if self is ContinuityMode.CULTURAL:
            return CULTURAL_CONTINUITY
        return INSTITUTIONAL_CONTINUITY

    def label_of(self, obs: Observation) -> str:
        if self is ContinuityMode.CULTURAL:
            return obs.culture_seq
        return obs.institution_seq


@dataclass(frozen=True)
class AnchorResult:
    nga: str
    anchor_year: int | None
    crossed: bool
    threshold_ties: int = 0  # observations exactly at the threshold


@dataclass(frozen=True)
class AlignedRegion:
    """A retained region with per-point relative years (anchor at 0)."""

    series: RegionSeries
    anchor_year: int
    rel_time: np.ndarray

    @property
    def nga(self) -> str:
        return self.series.nga

    @property
    def scaled(self) -> np.ndarray:
        return self.series.scaled


@dataclass(frozen=True)
class AlignedDataset:
    regions: tuple[AlignedRegion, ...]
    threshold: float
    discarded: tuple[str, ...]
    # Per-region anchoring outcomes, retained and discarded alike,
    # alphabetical by region name.
    anchor_results: tuple[AnchorResult, ...] = ()

    def __len__(self) -> int:
        return len(self.regions)

    def pooled(self) -> tuple[np.ndarray, np.ndarray]:
        """All (rel_time, scaled) points concatenated across regions."""
        t = np.concatenate([r.rel_time for r in self.regions])
        y = np.concatenate([r.scaled for r in self.regions])
        return t.astype(float), y

    def region(self, nga: str) -> AlignedRegion:
        for r in self.regions:
            if r.nga == nga:
                return r
        raise KeyError(nga)


@dataclass(frozen=True)
class CentralSegment:
    nga: str
    mode: ContinuityMode
    points: tuple[Observation, ...]
    length: int
    rel_time: np.ndarray
    scaled: np.ndarray


def anchor_time(series: RegionSeries, threshold: float) -> AnchorResult:
    """First calendar year at which the scaled score strictly exceeds
    ``threshold``; ``crossed=False`` when the region never does."""
    if not 0.0 < threshold < 1.0:
        raise ParameterError(f"threshold must be in (0, 1), got {threshold}")
    if series.spc1_scaled is None:
        raise StateError(f"region {series.nga!r} must be scaled before anchoring")
    scaled = series.scaled
    ties = int(np.sum(scaled == threshold))
    if ties:
        logger.warning(
            "region %s: %d observation(s) exactly at threshold %.6g are not "
            "counted as crossings",
            series.nga,
            ties,
            threshold,
        )
    above = np.nonzero(scaled > threshold)[0]
    if above.size == 0:
        return AnchorResult(series.nga, None, False, ties)
    year = int(series.points[int(above[0])].abs_time)
    return AnchorResult(series.nga, year, True, ties)


def shift_to_reltime(dataset: Dataset, threshold: float) -> AlignedDataset:
    """Anchor every region and shift the retained ones to relative years.

    Regions are processed independently and merged alphabetically, so the
    result does not depend on input order.
    """
    retained = []
    discarded = []
    anchors = []
    for series in sorted(dataset.regions, key=lambda s: s.nga):
        anchor = anchor_time(series, threshold)
        anchors.append(anchor)
        if not anchor.crossed:
            discarded.append(series.nga)
            continue
        rel = series.abs_times - anchor.anchor_year
        retained.append(AlignedRegion(series, anchor.anchor_year, rel))
    logger.info(
        "alignment: %d region(s) retained, %d discarded", len(retained), len(discarded)
    )
    return AlignedDataset(
        tuple(retained), float(threshold), tuple(discarded), tuple(anchors)
    )


def extract_central_sequence(
    region: AlignedRegion, mode: ContinuityMode
) -> CentralSegment:
    """Maximal contiguous continuity-labelled run containing rel_time 0.

    Raises NoCentralSegmentError when the anchor observation itself is
    labelled outside the central sequence; such regions are excluded from
    continuity fits but stay in full-data fits.
    """
    idx = np.nonzero(region.rel_time == 0)[0]
    if idx.size == 0:
        raise NoCentralSegmentError(
            f"region {region.nga!r} has no rel_time=0 observation"
        )
    anchor_idx = int(idx[0])
    label = mode.continuity_label
    points = region.series.points
    if mode.label_of(points[anchor_idx]) != label:
        raise NoCentralSegmentError(
            f"region {region.nga!r}: anchor observation is labelled "
            f"{mode.label_of(points[anchor_idx])!r} for mode {mode.value}"
        )
    start = anchor_idx
    while start > 0 and mode.label_of(points[start - 1]) == label:
        start -= 1
    stop = anchor_idx + 1
    while stop < len(points) and mode.label_of(points[stop]) == label:
        stop += 1
    return CentralSegment(
        nga=region.nga,
        mode=mode,
        points=points[start:stop],
        length=stop - start,
        rel_time=region.rel_time[start:stop].astype(float),
        scaled=region.scaled[start:stop],
    )


def central_segments(
    aligned: AlignedDataset, mode: ContinuityMode
) -> tuple[list[CentralSegment], list[str]]:
    """Central segments for every retained region; regions without one are
    returned in the skipped list (and logged)."""
    segments = []
    skipped = []
    for region in aligned.regions:
        try:
            segments.append(extract_central_sequence(region, mode))
        except NoCentralSegmentError as exc:
            logger.warning("continuity %s: %s", mode.value, exc)
            skipped.append(region.nga)
    return segments, skipped
