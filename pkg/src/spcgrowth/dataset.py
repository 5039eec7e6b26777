"""Panel time-series data: parsing, validation, scaling, synthesis.

File format
-----------
Comma-separated UTF-8 with exactly this header:

    NGA,PolID,AbsTime,RelTime,SPC1,Culture.Sequence,Institutions.Sequence

- NGA: region name; rows are grouped per region.
- PolID: polity identifier for the row.
- AbsTime: calendar year, integer, negative = BCE. Within one region the
  years are strictly increasing and spaced in multiples of 100; violating
  rows are rejected rather than resampled.
- RelTime: optional integer year offset as present in the source file
  (empty for rows outside the central sequence).
- SPC1: raw social-complexity score (not yet min-max scaled).
- Culture.Sequence: 'cultural.continuity' or 'outside.central'.
- Institutions.Sequence: 'institutional.continuity' or 'outside.central'.

Empty continuity cells are read as 'outside.central'. Serialised output
uses the same columns, plus 'SPC1.scaled' once scaling has been applied.

Values are immutable after construction; scaling returns a new Dataset.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DataFormatError,
    DegenerateScaleError,
    DuplicateTimeError,
    ParameterError,
    RowParseError,
    SpacingError,
)
from .logistic import LogisticParams, logistic_eval, logistic_inverse

logger = logging.getLogger(__name__)

HEADER = (
    "NGA",
    "PolID",
    "AbsTime",
    "RelTime",
    "SPC1",
    "Culture.Sequence",
    "Institutions.Sequence",
)
SCALED_COLUMN = "SPC1.scaled"

CULTURAL_CONTINUITY = "cultural.continuity"
INSTITUTIONAL_CONTINUITY = "institutional.continuity"
OUTSIDE_CENTRAL = "outside.central"

_CULTURE_LABELS = {CULTURAL_CONTINUITY, OUTSIDE_CENTRAL}
_INSTITUTION_LABELS = {INSTITUTIONAL_CONTINUITY, OUTSIDE_CENTRAL}


@dataclass(frozen=True)
class Observation:
    """One century-sampled row of the panel."""

    nga: str
    pol_id: str
    abs_time: int
    spc1_raw: float
    culture_seq: str
    institution_seq: str
    rel_time_recorded: int | None = None


@dataclass(frozen=True)
class RegionSeries:
    """One region's observations, ordered by calendar year.

    ``spc1_scaled`` is None until min-max scaling fills it; scaled values
    align index-for-index with ``points``.
    """

    nga: str
    points: tuple[Observation, ...]
    spc1_scaled: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.points)

    @property
    def abs_times(self) -> np.ndarray:
        return np.array([p.abs_time for p in self.points], dtype=int)

    @property
    def raw(self) -> np.ndarray:
        return np.array([p.spc1_raw for p in self.points], dtype=float)

    @property
    def scaled(self) -> np.ndarray:
        if self.spc1_scaled is None:
            from .errors import StateError

            raise StateError(f"region {self.nga!r} has not been scaled")
        return self.spc1_scaled


@dataclass(frozen=True)
class Dataset:
    """All regions plus the global raw extrema used for scaling."""

    regions: tuple[RegionSeries, ...]
    scale_min: float | None = None
    scale_max: float | None = None

    def __len__(self) -> int:
        return len(self.regions)

    @property
    def is_scaled(self) -> bool:
        return self.scale_min is not None

    def region(self, nga: str) -> RegionSeries:
        for series in self.regions:
            if series.nga == nga:
                return series
        raise KeyError(nga)

    def all_raw(self) -> np.ndarray:
        if not self.regions:
            return np.empty(0)
        return np.concatenate([s.raw for s in self.regions])

    def all_scaled(self) -> np.ndarray:
        return np.concatenate([s.scaled for s in self.regions])

    def n_points(self) -> int:
        return sum(len(s) for s in self.regions)


def _parse_int(text: str, line: int, column: str) -> int:
    """Integer parse that tolerates integral floats like '1200.0'."""
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise RowParseError(line, f"{column} value {text!r} is not a number") from None
    if value != int(value):
        raise RowParseError(line, f"{column} value {text!r} is not an integer year")
    return int(value)


def _parse_label(text: str, allowed: set[str], line: int, column: str) -> str:
    text = text.strip()
    if not text:
        return OUTSIDE_CENTRAL
    if text not in allowed:
        raise RowParseError(
            line, f"{column} label {text!r} not one of {sorted(allowed)}"
        )
    return text


def parse_dataset(source: str | Iterable[str]) -> Dataset:
    """Parse panel CSV text into a Dataset (unscaled).

    Rows are grouped by region in order of first appearance and sorted by
    AbsTime within each region. Duplicate (region, year) pairs and
    non-century spacing are rejected.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)

    try:
        header = next(reader)
    except StopIteration:
        raise DataFormatError("input is empty; expected a header row") from None
    if header and header[0].startswith("﻿"):
        header = [header[0].lstrip("﻿"), *header[1:]]
    header = [h.strip() for h in header]
    expected = list(HEADER)
    if header[: len(expected)] != expected:
        missing = [name for name in expected if name not in header]
        if missing:
            raise DataFormatError(f"header is missing column(s): {', '.join(missing)}")
        raise DataFormatError(
            f"header columns out of order; expected {','.join(expected)}"
        )
    extras = header[len(expected) :]
    if extras and extras != [SCALED_COLUMN]:
        raise DataFormatError(f"unexpected extra column(s): {', '.join(extras)}")

    order: list[str] = []
    rows: dict[str, list[tuple[Observation, int]]] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) < len(expected):
            raise RowParseError(line_no, f"expected {len(expected)} fields, got {len(row)}")
        nga = row[0].strip()
        if not nga:
            raise RowParseError(line_no, "empty NGA name")
        pol_id = row[1].strip()
        abs_time = _parse_int(row[2], line_no, "AbsTime")
        rel_text = row[3].strip()
        rel_time = _parse_int(rel_text, line_no, "RelTime") if rel_text else None
        try:
            spc1 = float(row[4])
        except ValueError:
            raise RowParseError(line_no, f"SPC1 value {row[4]!r} is not a number") from None
        culture = _parse_label(row[5], _CULTURE_LABELS, line_no, "Culture.Sequence")
        institution = _parse_label(
            row[6], _INSTITUTION_LABELS, line_no, "Institutions.Sequence"
        )
        obs = Observation(nga, pol_id, abs_time, spc1, culture, institution, rel_time)
        if nga not in rows:
            rows[nga] = []
            order.append(nga)
        rows[nga].append((obs, line_no))

    regions = []
    for nga in order:
        entries = sorted(rows[nga], key=lambda pair: pair[0].abs_time)
        times = [obs.abs_time for obs, _ in entries]
        for (prev, _), (cur, cur_line) in zip(entries, entries[1:]):
            gap = cur.abs_time - prev.abs_time
            if gap == 0:
                raise DuplicateTimeError(
                    f"region {nga!r}: duplicate AbsTime {cur.abs_time} (line {cur_line})"
                )
            if gap % 100 != 0:
                raise SpacingError(
                    f"region {nga!r}: AbsTime step {prev.abs_time} -> {cur.abs_time} "
                    f"is not a century multiple (line {cur_line})"
                )
        del times
        regions.append(RegionSeries(nga, tuple(obs for obs, _ in entries)))
    return Dataset(tuple(regions))


def load_dataset(path) -> Dataset:
    with open(path, encoding="utf-8", newline="") as handle:
        return parse_dataset(handle)


def serialize_dataset(dataset: Dataset) -> str:
    """Render a Dataset back to CSV; scaled datasets gain SPC1.scaled."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    columns = list(HEADER) + ([SCALED_COLUMN] if dataset.is_scaled else [])
    writer.writerow(columns)
    for series in dataset.regions:
        for i, p in enumerate(series.points):
            row = [
                p.nga,
                p.pol_id,
                str(p.abs_time),
                "" if p.rel_time_recorded is None else str(p.rel_time_recorded),
                repr(float(p.spc1_raw)),
                p.culture_seq,
                p.institution_seq,
            ]
            if dataset.is_scaled:
                row.append(repr(float(series.scaled[i])))
            writer.writerow(row)
    return out.getvalue()


def minmax_scale(dataset: Dataset, extrema: tuple[float, float] | None = None) -> Dataset:
    """Scale every raw value to (raw - min) / (max - min), globally.

    The extrema are taken over all regions in the input (so regions that
    never reach high raw scores never reach high scaled scores), unless an
    explicit ``extrema`` pair overrides them, e.g. to scale held-out data
    with a previously stored range.
    """
    values = dataset.all_raw()
    if extrema is not None:
        lo, hi = float(extrema[0]), float(extrema[1])
        if not lo < hi:
            raise ParameterError(f"extrema must satisfy min < max, got ({lo}, {hi})")
    else:
        if values.size < 2 or np.unique(values).size < 2:
            raise DegenerateScaleError(
                "need at least 2 distinct raw values to derive a scale"
            )
        lo, hi = float(values.min()), float(values.max())
    span = hi - lo
    regions = tuple(
        replace(series, spc1_scaled=(series.raw - lo) / span)
        for series in dataset.regions
    )
    return Dataset(regions, scale_min=lo, scale_max=hi)


def minmax_unscale(scaled, scale_min: float, scale_max: float) -> np.ndarray:
    """Inverse of the scaling map, using stored extrema."""
    return np.asarray(scaled, dtype=float) * (scale_max - scale_min) + scale_min


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator parameters for synthetic panels.

    Each region samples the same logistic curve on a century grid that
    covers the transition (where the curve is within 1/1000 of either
    asymptote) plus ``plateau_points`` genuine plateau samples on each
    side, then is shifted into calendar time by its anchor offset and
    perturbed with iid Gaussian noise of sd ``noise_sigma``.
    """

    n_regions: int
    params: LogisticParams = LogisticParams(*(1.0, 0.0, 0.002, 0.0))
    noise_sigma: float = 0.0
    anchor_offsets: tuple[int, ...] | None = None  # calendar years per region
    plateau_points: tuple[int, int] = (10, 10)


def generate_synthetic(spec: SyntheticSpec, seed: int) -> Dataset:
    """Draw a synthetic panel; bit-identical for a fixed (spec, seed)."""
    if spec.n_regions < 1:
        raise ParameterError("n_regions must be >= 1")
    if spec.noise_sigma < 0:
        raise ParameterError("noise_sigma must be >= 0")
    if spec.params.c <= 0 or spec.params.a <= 0:
        raise ParameterError("generator requires a growth curve (a > 0, c > 0)")
    if spec.anchor_offsets is not None and len(spec.anchor_offsets) != spec.n_regions:
        raise ParameterError("anchor_offsets length must equal n_regions")

    rng = np.random.default_rng(seed)
    if spec.anchor_offsets is not None:
        offsets = [int(v) for v in spec.anchor_offsets]
    else:
        offsets = [int(v) * 100 for v in rng.integers(-25, 26, size=spec.n_regions)]

    p = spec.params
    # Transition half-width: |t - d| beyond which f is within a/1000 of an
    # asymptote, rounded up to whole centuries.
    edge = logistic_inverse(p, p.upper - p.a / 1000.0) - p.d
    half_steps = int(np.ceil(edge / 100.0))
    lo_steps = half_steps + int(spec.plateau_points[0])
    hi_steps = half_steps + int(spec.plateau_points[1])
    # Century grid in the curve's own time frame, centred near the midpoint
    # so that fitting (RelTime, SPC1) recovers d itself.
    mid = int(round(p.d / 100.0)) * 100
    time_grid = mid + np.arange(-lo_steps, hi_steps + 1) * 100

    regions = []
    curve = np.asarray(logistic_eval(p, time_grid))
    for r in range(spec.n_regions):
        noise = rng.normal(0.0, spec.noise_sigma, size=time_grid.size)
        values = curve + noise
        points = tuple(
            Observation(
                nga=f"SYN-{r:02d}",
                pol_id=f"SYN-{r:02d}-P1",
                abs_time=int(u + offsets[r]),
                spc1_raw=float(v),
                culture_seq=CULTURAL_CONTINUITY,
                institution_seq=INSTITUTIONAL_CONTINUITY,
                rel_time_recorded=int(u),
            )
            for u, v in zip(time_grid, values)
        )
        regions.append(RegionSeries(f"SYN-{r:02d}", points))
    return Dataset(tuple(regions))


def recorded_rel_times(series: RegionSeries) -> np.ndarray:
    """RelTime column values; raises if any are missing."""
    rels = [p.rel_time_recorded for p in series.points]
    if any(r is None for r in rels):
        raise ParameterError(f"region {series.nga!r} has rows without RelTime")
    return np.array(rels, dtype=int)


def build_dataset(regions: Sequence[RegionSeries]) -> Dataset:
    """Assemble a Dataset from prebuilt regions (test/fixture helper)."""
    names = [r.nga for r in regions]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise ParameterError(f"duplicate region name(s): {', '.join(dupes)}")
    return Dataset(tuple(regions))
