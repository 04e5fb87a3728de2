"""Cohort impact analysis over the UUK salary-by-age heat map.

Ingests the 31-salary-band by 10-age-band matrix of active USS members,
evaluates a per-cell projection loss at band midpoints, and aggregates
weighted quartiles, means, mode bins, histograms, and global monetary
sums.  The same statistics can be replayed over externally published
loss grids, which isolates the aggregation layer from projection-model
uncertainty.

Conventions
-----------
* Band midpoints: ordinary bands use their arithmetic midpoint; the open
  £150k+ salary band is represented by £200,000 and the open 65+ age
  band by age 65.5.
* Date of birth per cell is 1 October of the year that makes the member
  exactly the band's midpoint age on the rule-change date (1 April 2022).
* Loss sign convention: positive values are cuts.  Published grid files
  carry negative signs; the replay loader flips them.
* Weighted quantile: smallest value whose cumulative weight reaches
  ``q`` times the total weight (lower-value step-CDF convention).
* Mode bins are fixed-width and left-closed: [0, w), [w, 2w), ...
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .projection import (
    Interpolation,
    MemberScenario,
    future_loss,
    one_year_contribution_loss,
    project_comparison,
)
from .scheme import EconomicAssumptions, SchemeRules, load_presets

__all__ = [
    "HeatMap",
    "HeatMapError",
    "CellLoss",
    "CohortDistribution",
    "PERSONAS",
    "CHANGE_DATE",
    "load_heatmap",
    "load_loss_grid",
    "band_midpoints",
    "cohort_losses",
    "replay_losses",
    "weighted_quantile",
    "weighted_mean",
    "mode_bin",
    "global_monetary_loss",
    "filter_cohort",
    "histogram",
    "summarize",
    "global_one_year_loss",
    "persona_check",
    "bundled_heatmap",
    "bundled_loss_grids",
]

#: Date the new benefit structure took effect.
CHANGE_DATE = date(2022, 4, 1)

#: Personas used for the published consistency check: (age, salary).
PERSONAS = {
    "aria": (37, 30_000.0),
    "bryn": (43, 50_000.0),
    "chloe": (51, 70_000.0),
}

_SALARY_LABEL = re.compile(r"^(\d+)-(\d+)k$")
_SALARY_OPEN = re.compile(r"^(\d+)k\+$")
_AGE_RANGE = re.compile(r"^(\d+)-(\d+)$")
_AGE_LE = re.compile(r"^<=(\d+)$")
_AGE_OPEN = re.compile(r"^(\d+)\+$")


class HeatMapError(ValueError):
    """Raised for malformed heat-map or loss-grid files."""


@dataclass(frozen=True)
class HeatMap:
    """Member counts by salary band (rows) and age band (columns)."""

    salary_labels: tuple[str, ...]
    age_labels: tuple[str, ...]
    #: [low, high) in pounds; high is None for the open top band.
    salary_bands: tuple[tuple[float, float | None], ...]
    #: [low, high] in whole years; high is None for the open top band.
    age_bands: tuple[tuple[float, float | None], ...]
    counts: np.ndarray = field(repr=False)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=float)
        if counts.ndim != 2:
            raise HeatMapError("counts must be a 2-D matrix")
        if counts.shape != (len(self.salary_labels), len(self.age_labels)):
            raise HeatMapError("counts shape does not match band labels")
        if (counts < 0).any():
            i, j = np.argwhere(counts < 0)[0]
            raise HeatMapError(
                f"negative count at row {self.salary_labels[i]!r}, "
                f"column {self.age_labels[j]!r}")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class CellLoss:
    """Per-person loss for one heat-map cell (positive = cut)."""

    salary_label: str
    age_label: str
    salary_mid: float
    age_mid: float
    count: float
    percent_loss: float
    monetary_loss: float

    def __post_init__(self) -> None:
        if self.percent_loss > 1.0 + 1e-12:
            raise ValueError("percent_loss cannot exceed 100%")


@dataclass(frozen=True)
class CohortDistribution:
    """Weighted summary of a cohort loss grid."""

    q1: float
    q2: float
    q3: float
    mean: float
    mode_bin: tuple[float, float]
    global_monetary_loss: float
    population: float
    #: (bin lower edges, group labels, counts[bin, group])
    histogram: tuple[tuple[float, ...], tuple[str, ...], np.ndarray]


def _parse_salary_label(label: str, row: int) -> tuple[float, float | None]:
    label = label.strip()
    if m := _SALARY_LABEL.match(label):
        low, high = float(m.group(1)) * 1000.0, float(m.group(2)) * 1000.0
        if high <= low:
            raise HeatMapError(f"row {row}: salary band {label!r} not increasing")
        return low, high
    if m := _SALARY_OPEN.match(label):
        return float(m.group(1)) * 1000.0, None
    raise HeatMapError(f"row {row}: unknown salary band label {label!r}")


def _parse_age_label(label: str, col: int) -> tuple[float, float | None]:
    label = label.strip()
    if m := _AGE_RANGE.match(label):
        low, high = float(m.group(1)), float(m.group(2))
        if high <= low:
            raise HeatMapError(f"column {col}: age band {label!r} not increasing")
        return low, high
    if m := _AGE_LE.match(label):
        # The youngest band has no published lower edge; treat it as the
        # five-year band ending just below the boundary so its midpoint
        # follows the same convention as the others (<=25 -> 22.5).
        return float(m.group(1)) - 5.0, float(m.group(1)) - 1.0
    if m := _AGE_OPEN.match(label):
        return float(m.group(1)), None
    raise HeatMapError(f"column {col}: unknown age band label {label!r}")


def _read_matrix(source) -> tuple[list[str], list[str], list[list[float]]]:
    """Common CSV shape for heat maps and loss grids."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return _read_matrix(fh)
    rows = list(csv.reader(source))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise HeatMapError("empty file")
    header = rows[0]
    if len(header) < 2:
        raise HeatMapError("header must list age bands after the label column")
    age_labels = [c.strip() for c in header[1:]]
    salary_labels: list[str] = []
    values: list[list[float]] = []
    for idx, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise HeatMapError(
                f"row {idx} ({row[0].strip()!r}) has {len(row) - 1} values, "
                f"expected {len(age_labels)}")
        salary_labels.append(row[0].strip())
        parsed = []
        for col, cell in zip(age_labels, row[1:]):
            text = cell.strip().replace(",", "")
            try:
                parsed.append(float(text))
            except ValueError:
                raise HeatMapError(
                    f"row {idx} ({row[0].strip()!r}), column {col!r}: "
                    f"not a number: {cell.strip()!r}") from None
        values.append(parsed)
    return salary_labels, age_labels, values


def load_heatmap(source) -> HeatMap:
    """Parse a heat-map CSV (path, or text stream) into a ``HeatMap``.

    Thousands separators are accepted.  Ragged rows, negative counts and
    unrecognised band labels raise :class:`HeatMapError` naming the row
    and column.
    """
    salary_labels, age_labels, values = _read_matrix(source)
    salary_bands = tuple(_parse_salary_label(lbl, i + 2)
                         for i, lbl in enumerate(salary_labels))
    for i in range(1, len(salary_bands)):
        if salary_bands[i][0] < (salary_bands[i - 1][1] or float("inf")):
            raise HeatMapError(f"salary bands not increasing at "
                               f"{salary_labels[i]!r}")
    age_bands = tuple(_parse_age_label(lbl, j + 2)
                      for j, lbl in enumerate(age_labels))
    for j in range(1, len(age_bands)):
        if age_bands[j][0] <= age_bands[j - 1][0]:
            raise HeatMapError(f"age bands not increasing at {age_labels[j]!r}")
    counts = np.array(values, dtype=float)
    if (counts != np.round(counts)).any():
        raise HeatMapError("heat-map counts must be integers")
    return HeatMap(tuple(salary_labels), tuple(age_labels),
                   salary_bands, age_bands, counts)


def load_loss_grid(source) -> np.ndarray:
    """Parse a published signed loss grid with the heat-map shape.

    Values are stored negative (cuts) in the files; the returned array
    keeps the file's sign.  Callers normally negate to get positive
    losses.
    """
    _, _, values = _read_matrix(source)
    return np.array(values, dtype=float)


# Default representative values for the open bands.
OPEN_SALARY_MIDPOINT = 200_000.0
OPEN_AGE_MIDPOINT = 65.5


def band_midpoints(heatmap: HeatMap) -> tuple[list[float], list[float]]:
    """Representative (salary, age) values per band.

    Closed bands use their midpoint; the open top bands use £200,000 and
    age 65.5.  Age bands are integer-year ranges, so band "35-39" covers
    [35, 40) and has midpoint 37.5.
    """
    salary_mids = [OPEN_SALARY_MIDPOINT if high is None else (low + high) / 2.0
                   for low, high in heatmap.salary_bands]
    age_mids = [OPEN_AGE_MIDPOINT if high is None else (low + high + 1.0) / 2.0
                for low, high in heatmap.age_bands]
    return salary_mids, age_mids


def _dob_for_age(age_mid: float, anchor: date = CHANGE_DATE) -> date:
    """1 October birthday giving age ``age_mid`` on the anchor date.

    Midpoint ages are half-integers and the anchor is 1 April, so the
    October-to-April half year makes the match exact.
    """
    return date(anchor.year - int(age_mid + 0.5), 10, 1)


def cohort_losses(heatmap: HeatMap, rules_old: SchemeRules,
                  rules_new: SchemeRules, assumptions: EconomicAssumptions,
                  method: Interpolation = Interpolation.LINEAR,
                  modeller_rounding: bool = False) -> list[CellLoss]:
    """Evaluate one projection pair per heat-map cell at band midpoints."""
    salary_mids, age_mids = band_midpoints(heatmap)
    cells: list[CellLoss] = []
    # One projection per (salary, age) midpoint pair; results for a given
    # age are independent of the salary loop, so iterate age outermost to
    # reuse the date-of-birth computation.
    for j, age_mid in enumerate(age_mids):
        dob = _dob_for_age(age_mid)
        for i, salary_mid in enumerate(salary_mids):
            scenario = MemberScenario(dob, salary_mid, CHANGE_DATE)
            old, new = project_comparison(scenario, rules_old, rules_new,
                                          assumptions)
            if modeller_rounding:
                old = _round_to_10(old)
                new = _round_to_10(new)
            metrics = future_loss(old, new, method)
            cells.append(CellLoss(
                salary_label=heatmap.salary_labels[i],
                age_label=heatmap.age_labels[j],
                salary_mid=salary_mid,
                age_mid=age_mid,
                count=float(heatmap.counts[i, j]),
                percent_loss=metrics.percent_loss,
                monetary_loss=metrics.monetary_loss,
            ))
    return cells


def _round_to_10(result):
    from dataclasses import replace

    def r10(x: float) -> float:
        return round(x / 10.0) * 10.0

    return replace(result, income_66=r10(result.income_66),
                   income_86=r10(result.income_86))


def replay_losses(heatmap: HeatMap, percent_grid: np.ndarray,
                  money_grid_thousands: np.ndarray) -> list[CellLoss]:
    """Build a cell grid from published loss tables instead of the engine.

    ``percent_grid`` holds signed whole percents, ``money_grid_thousands``
    signed thousands of pounds, both in heat-map orientation (salary rows
    by age columns).  Signs are flipped so cuts come out positive.
    """
    expected = (len(heatmap.salary_labels), len(heatmap.age_labels))
    for name, grid in (("percent", percent_grid),
                       ("money", money_grid_thousands)):
        if np.asarray(grid).shape != expected:
            raise HeatMapError(f"{name} grid shape {np.asarray(grid).shape} "
                               f"does not match heat map {expected}")
    salary_mids, age_mids = band_midpoints(heatmap)
    cells = []
    for i in range(expected[0]):
        for j in range(expected[1]):
            cells.append(CellLoss(
                salary_label=heatmap.salary_labels[i],
                age_label=heatmap.age_labels[j],
                salary_mid=salary_mids[i],
                age_mid=age_mids[j],
                count=float(heatmap.counts[i, j]),
                percent_loss=-float(percent_grid[i][j]) / 100.0,
                monetary_loss=-float(money_grid_thousands[i][j]) * 1000.0,
            ))
    return cells


def weighted_quantile(values: Sequence[float], weights: Sequence[float],
                      q: float) -> float:
    """Smallest value whose cumulative weight reaches ``q`` of the total."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.size == 0 or values.shape != weights.shape:
        raise ValueError("values and weights must be non-empty and congruent")
    if (weights < 0).any():
        raise ValueError("weights must be >= 0")
    total = weights.sum()
    if total <= 0:
        raise ValueError("total weight must be positive")
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    idx = int(np.searchsorted(cum, q * total, side="left"))
    idx = min(idx, values.size - 1)
    return float(values[order][idx])


def weighted_mean(values: Sequence[float], weights: Sequence[float]) -> float:
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.size == 0 or values.shape != weights.shape:
        raise ValueError("values and weights must be non-empty and congruent")
    total = weights.sum()
    if total <= 0:
        raise ValueError("total weight must be positive")
    return float((values * weights).sum() / total)


def mode_bin(values: Sequence[float], weights: Sequence[float],
             bin_width: float) -> tuple[float, float]:
    """Left-closed fixed-width bin [k·w, (k+1)·w) with the largest weight.

    Ties go to the lower bin, matching ascending iteration order.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.size == 0:
        raise ValueError("empty input")
    bins = np.floor(values / bin_width).astype(int)
    totals: dict[int, float] = {}
    for b, w in zip(bins, weights):
        totals[int(b)] = totals.get(int(b), 0.0) + float(w)
    best = max(sorted(totals), key=lambda b: totals[b])
    return best * bin_width, (best + 1) * bin_width


def global_monetary_loss(cells: Iterable[CellLoss]) -> float:
    """Σ count × per-person monetary loss, in pounds."""
    return float(sum(c.count * c.monetary_loss for c in cells))


def filter_cohort(cells: Iterable[CellLoss],
                  age_below: float | None = None,
                  salary_below: float | None = None,
                  predicate: Callable[[CellLoss], bool] | None = None,
                  ) -> list[CellLoss]:
    """Select whole bands whose midpoint falls below the given limits.

    ``age_below=40`` keeps age bands up to 35-39; ``salary_below=40_000``
    keeps salary bands up to £35-40k.  An arbitrary ``predicate`` over
    cells can be combined with either.
    """
    out = []
    for c in cells:
        if age_below is not None and c.age_mid >= age_below:
            continue
        if salary_below is not None and c.salary_mid >= salary_below:
            continue
        if predicate is not None and not predicate(c):
            continue
        out.append(c)
    return out


def histogram(cells: Sequence[CellLoss], bin_width: float,
              group_by: str = "salary", metric: str = "percent",
              ) -> tuple[tuple[float, ...], tuple[str, ...], np.ndarray]:
    """Counts per loss bin, split by salary or age band.

    Every member of a cell is assigned the cell's loss value.  Returns
    (bin lower edges, group labels, counts[bin, group]); the matrix sums
    to the population of ``cells``.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    if group_by not in ("salary", "age"):
        raise ValueError("group_by must be 'salary' or 'age'")
    if metric not in ("percent", "money"):
        raise ValueError("metric must be 'percent' or 'money'")
    if not cells:
        raise ValueError("empty grid")

    def value(c: CellLoss) -> float:
        return c.percent_loss * 100.0 if metric == "percent" else c.monetary_loss

    def group(c: CellLoss) -> str:
        return c.salary_label if group_by == "salary" else c.age_label

    groups = tuple(dict.fromkeys(group(c) for c in cells))
    bins = sorted({int(np.floor(value(c) / bin_width)) for c in cells})
    lo, hi = bins[0], bins[-1]
    edges = tuple(b * bin_width for b in range(lo, hi + 1))
    matrix = np.zeros((len(edges), len(groups)))
    gidx = {g: k for k, g in enumerate(groups)}
    for c in cells:
        b = int(np.floor(value(c) / bin_width)) - lo
        matrix[b, gidx[group(c)]] += c.count
    return edges, groups, matrix


def summarize(cells: Sequence[CellLoss], metric: str = "percent",
              bin_width: float | None = None, group_by: str = "salary",
              ) -> CohortDistribution:
    """Weighted quartiles, mean, mode bin, global sum and histogram."""
    if metric not in ("percent", "money"):
        raise ValueError("metric must be 'percent' or 'money'")
    if not cells:
        raise ValueError("empty grid")
    if bin_width is None:
        bin_width = 5.0 if metric == "percent" else 50_000.0
    values = [c.percent_loss * 100.0 if metric == "percent" else c.monetary_loss
              for c in cells]
    weights = [c.count for c in cells]
    return CohortDistribution(
        q1=weighted_quantile(values, weights, 0.25),
        q2=weighted_quantile(values, weights, 0.50),
        q3=weighted_quantile(values, weights, 0.75),
        mean=weighted_mean(values, weights),
        mode_bin=mode_bin(values, weights, bin_width),
        global_monetary_loss=global_monetary_loss(cells),
        population=float(sum(weights)),
        histogram=histogram(cells, bin_width, group_by, metric),
    )


def global_one_year_loss(heatmap: HeatMap, rules_old: SchemeRules,
                         rules_new: SchemeRules,
                         assumptions: EconomicAssumptions,
                         method: Interpolation = Interpolation.LINEAR) -> float:
    """Heat-map-weighted mean percentage loss from one year's contribution.

    Members with less than one year to retirement (the open 65+ band at
    its 65.5 midpoint) have no full contribution year left and are
    excluded from the weighting.
    """
    salary_mids, age_mids = band_midpoints(heatmap)
    num = den = 0.0
    for j, age_mid in enumerate(age_mids):
        dob = _dob_for_age(age_mid)
        for i, salary_mid in enumerate(salary_mids):
            scenario = MemberScenario(dob, salary_mid, CHANGE_DATE)
            if scenario.years_to_retirement < 1.0:
                continue
            loss = one_year_contribution_loss(scenario, rules_old, rules_new,
                                              assumptions, method)
            w = float(heatmap.counts[i, j])
            num += w * loss
            den += w
    if den <= 0:
        raise ValueError("no members with a full year to retirement")
    return num / den


def persona_check(name: str, assumptions: EconomicAssumptions,
                  rules_old: SchemeRules | None = None,
                  rules_new: SchemeRules | None = None,
                  heatmap: HeatMap | None = None,
                  method: Interpolation = Interpolation.LINEAR) -> float:
    """Percent loss for a named persona, interpolated in salary.

    The persona is placed at the midpoint of their age band and their
    loss is linearly interpolated between the two heat-map salary-band
    midpoints bracketing their salary.
    """
    try:
        age, salary = PERSONAS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown persona {name!r}; "
                         f"expected one of {sorted(PERSONAS)}") from None
    if rules_old is None or rules_new is None:
        presets = load_presets()
        rules_old = rules_old or presets["uss2021"]
        rules_new = rules_new or presets["uuk2021"]
    if heatmap is None:
        heatmap = bundled_heatmap()
    salary_mids, age_mids = band_midpoints(heatmap)
    # Age band containing the persona's age.
    j = next(j for j, (low, high) in enumerate(heatmap.age_bands)
             if age >= low and (high is None or age <= high))
    dob = _dob_for_age(age_mids[j])
    # Bracketing salary midpoints for linear interpolation.
    above = next((i for i, m in enumerate(salary_mids) if m >= salary),
                 len(salary_mids) - 1)
    below = max(0, above - 1) if salary_mids[above] > salary else above
    losses = []
    for i in (below, above):
        scenario = MemberScenario(dob, salary_mids[i], CHANGE_DATE)
        old, new = project_comparison(scenario, rules_old, rules_new,
                                      assumptions)
        losses.append(future_loss(old, new, method).percent_loss)
    if above == below:
        return losses[0]
    span = salary_mids[above] - salary_mids[below]
    t = (salary - salary_mids[below]) / span
    return losses[0] * (1.0 - t) + losses[1] * t


def _data_path(name: str):
    from importlib import resources

    return resources.files("pensionlab.data").joinpath(name)


def bundled_heatmap() -> HeatMap:
    """The UUK heat map shipped with the package."""
    with _data_path("uuk_heatmap.csv").open(newline="") as fh:
        return load_heatmap(fh)


def bundled_loss_grids() -> tuple[np.ndarray, np.ndarray]:
    """The published CPI-2.8% (percent, £k) loss grids, signed as printed."""
    with _data_path("loss_percent_cpi28.csv").open(newline="") as fh:
        pct = load_loss_grid(fh)
    with _data_path("loss_gbp_cpi28.csv").open(newline="") as fh:
        gbp = load_loss_grid(fh)
    return pct, gbp
