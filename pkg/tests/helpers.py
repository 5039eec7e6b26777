"""Shared builders for the test suite."""

from dataclasses import replace

import numpy as np

from spcgrowth import (
    CULTURAL_CONTINUITY,
    INSTITUTIONAL_CONTINUITY,
    OUTSIDE_CENTRAL,
    AlignedDataset,
    AlignedRegion,
    Dataset,
    Observation,
    RegionSeries,
    recorded_rel_times,
)

CULT = CULTURAL_CONTINUITY
INST = INSTITUTIONAL_CONTINUITY
OUT = OUTSIDE_CENTRAL

PANEL_HEADER = "NGA,PolID,AbsTime,RelTime,SPC1,Culture.Sequence,Institutions.Sequence"


def make_region(nga, values, start=-1000, step=100, culture=None, institution=None):
    """Century-sampled region from raw values; labels default to continuous."""
    n = len(values)
    culture = culture if culture is not None else [CULT] * n
    institution = institution if institution is not None else [INST] * n
    points = tuple(
        Observation(
            nga=nga,
            pol_id=f"{nga}-P1",
            abs_time=start + step * i,
            spc1_raw=float(values[i]),
            culture_seq=culture[i],
            institution_seq=institution[i],
        )
        for i in range(n)
    )
    return RegionSeries(nga, points)


def scaled_region(nga, values, start=-1000, culture=None, institution=None):
    """Region whose values are taken as already scaled (raw == scaled)."""
    series = make_region(nga, values, start=start, culture=culture, institution=institution)
    return replace(series, spc1_scaled=np.asarray(values, dtype=float))


def aligned_region(series, anchor_year):
    """Aligned view of a scaled series anchored at the given calendar year."""
    return AlignedRegion(series, int(anchor_year), series.abs_times - int(anchor_year))


def aligned_from_synthetic(ds: Dataset, threshold: float = 0.5) -> AlignedDataset:
    """Aligned view of a synthetic panel in the generator's own time frame.

    Generator values are treated as already scaled and the recorded RelTime
    column as the relative-time axis, so inference results can be compared
    against the generating parameters without rescaling effects.
    """
    regions = []
    for s in ds.regions:
        rel = recorded_rel_times(s)
        regions.append(AlignedRegion(replace(s, spc1_scaled=s.raw.copy()), 0, rel))
    return AlignedDataset(tuple(regions), float(threshold), (), ())


def normal_pdf(x, mu, sd):
    return np.exp(-0.5 * ((np.asarray(x, dtype=float) - mu) / sd) ** 2) / (
        sd * np.sqrt(2.0 * np.pi)
    )
