"""Scheme rule definitions and indexation-cap arithmetic.

Pure math, no I/O (preset loading reads a bundled config file but touches
nothing outside the package). Everything here is deterministic and
reentrant: safe for concurrent use without synchronization.

All rates are annual effective rates expressed as fractions (0.025 = 2.5%).
The model works in whole years; there is no monthly compounding.
"""

from __future__ import annotations

import configparser
import enum
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

__all__ = [
    "CapKind",
    "CapRule",
    "SchemeRules",
    "EconomicAssumptions",
    "annual_devaluation",
    "implied_adjustment",
    "capped_uplift",
    "erosion_factor",
    "average_retirement_erosion",
    "accrual_only_reduction",
    "monte_carlo_devaluation",
    "real_devaluation",
    "threshold_devaluation",
    "load_presets",
    "FULL_CPI",
]

# Sentinel for a DB/DC threshold that is fully CPI-indexed (constant in
# real terms), as opposed to indexation capped at some fixed rate.
FULL_CPI = "full_cpi"


def _require_finite(**values: float) -> None:
    for name, v in values.items():
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


class CapKind(enum.Enum):
    SOFT = "soft"
    HARD = "hard"


@dataclass(frozen=True)
class CapRule:
    """Annual indexation cap applied to the DB pension value.

    Soft: uplift fully matches CPI up to ``full_match_to``, half-matches the
    excess up to ``half_match_to``, and never exceeds ``max_uplift``.
    Hard: uplift is min(CPI, ``cap``); ``delay_years`` postpones the point
    at which the cap starts to bite after the scheme start date.
    """

    kind: CapKind
    full_match_to: float = 0.05
    half_match_to: float = 0.15
    max_uplift: float = 0.10
    cap: float = 0.025
    delay_years: int = 0

    def __post_init__(self) -> None:
        if self.kind is CapKind.SOFT:
            if not (0.0 <= self.full_match_to <= self.half_match_to):
                raise ValueError("need 0 <= full_match_to <= half_match_to")
            if self.max_uplift < self.full_match_to:
                raise ValueError("max_uplift must be >= full_match_to")
        else:
            if self.cap < 0:
                raise ValueError("hard cap must be >= 0")
            if self.delay_years < 0 or int(self.delay_years) != self.delay_years:
                raise ValueError("delay_years must be a non-negative integer")

    @classmethod
    def soft(cls, full_match_to: float = 0.05, half_match_to: float = 0.15,
             max_uplift: float = 0.10) -> "CapRule":
        return cls(CapKind.SOFT, full_match_to=full_match_to,
                   half_match_to=half_match_to, max_uplift=max_uplift)

    @classmethod
    def hard(cls, cap: float = 0.025, delay_years: int = 0) -> "CapRule":
        return cls(CapKind.HARD, cap=cap, delay_years=delay_years)


@dataclass(frozen=True)
class SchemeRules:
    """One benefit structure: accrual, DB/DC threshold and CPI cap rule.

    Contribution rates are carried as metadata only and must never affect
    benefit projection.
    """

    accrual_denominator: int
    db_dc_threshold: float
    cap_rule: CapRule
    # FULL_CPI or a fixed indexation rate (e.g. 0.025) applied to the
    # DB/DC threshold.
    threshold_indexation: object = FULL_CPI
    member_rate: float = 0.0
    employer_rate: float = 0.0
    name: str = ""

    def __post_init__(self) -> None:
        if self.accrual_denominator <= 0:
            raise ValueError("accrual_denominator must be positive")
        if self.db_dc_threshold < 0:
            raise ValueError("db_dc_threshold must be >= 0")
        for r in (self.member_rate, self.employer_rate):
            if not 0.0 <= r <= 1.0:
                raise ValueError("contribution rates must lie in [0, 1]")
        if self.threshold_indexation != FULL_CPI:
            rate = float(self.threshold_indexation)  # raises if junk
            if rate < 0:
                raise ValueError("threshold indexation rate must be >= 0")


@dataclass(frozen=True)
class EconomicAssumptions:
    """Economic inputs mirroring the USS consultation modeller.

    ``cpi_adjustment`` is the CPI-variance proxy that sets the annual
    devaluation of hard-capped benefits even when mean CPI sits at or
    below the cap.
    """

    cpi_mean: float
    salary_growth: float = 0.04
    dc_growth: float = 0.0477
    annuity_factor: float = 40.0
    cpi_adjustment: float = 0.005
    dc_contribution_rate: float = 0.20
    # Explicit override for the hard-cap annual devaluation; when set it
    # replaces the value derived from cpi_adjustment (UUK quoted a rounded
    # 0.5% where the adjustment formula gives 0.4878% at 2.5% CPI).
    devaluation_override: float | None = None

    def __post_init__(self) -> None:
        _require_finite(cpi_mean=self.cpi_mean, salary_growth=self.salary_growth,
                        dc_growth=self.dc_growth, annuity_factor=self.annuity_factor,
                        cpi_adjustment=self.cpi_adjustment)
        if not 0.0 <= self.cpi_mean <= 0.05:
            raise ValueError("cpi_mean outside the modeller's supported range [0, 0.05]")
        if not 30.0 <= self.annuity_factor <= 50.0:
            raise ValueError("annuity_factor must lie in [30, 50]")
        if not 0.0 <= self.dc_contribution_rate <= 1.0:
            raise ValueError("dc_contribution_rate must lie in [0, 1]")

    @classmethod
    def modeller(cls, cpi_mean: float, devaluation: str = "uss",
                 **overrides) -> "EconomicAssumptions":
        """Assumptions calibrated against the USS consultation modeller.

        The calibration (scripts/calibrate_dc.py) fits the DC valuation so
        that the engine reproduces the published CPI-2.8% loss grids:
        the best fit grows the DC pot at CPI + 0.5% with an annuity
        factor of 48.  ``devaluation`` selects the CPI-variance
        adjustment: "uss" (0.59%) or "uuk" (0.5%).
        """
        adjustment = {"uuk": 0.005, "uss": 0.0059}[devaluation]
        params = dict(cpi_mean=cpi_mean,
                      dc_growth=(1.0 + cpi_mean) * 1.005 - 1.0,
                      annuity_factor=48.0,
                      cpi_adjustment=adjustment)
        params.update(overrides)
        return cls(**params)

    @classmethod
    def published(cls, cpi_mean: float, devaluation: str = "uuk",
                  **overrides) -> "EconomicAssumptions":
        """Assumptions at the published values, without grid calibration.

        DC growth is CPI + 1.9% with the headline annuity factor of 40.
        Used for the single-contribution sensitivity analysis, where no
        grid fit is involved.
        """
        adjustment = {"uuk": 0.005, "uss": 0.0059}[devaluation]
        params = dict(cpi_mean=cpi_mean,
                      dc_growth=(1.0 + cpi_mean) * 1.019 - 1.0,
                      annuity_factor=40.0,
                      cpi_adjustment=adjustment)
        params.update(overrides)
        return cls(**params)


def annual_devaluation(h: float, a: float, c: float) -> float:
    """Annual real-terms devaluation of a benefit hard-capped at ``h``.

    d = 1 - (1 + h - a) / (1 + c), where ``a`` is the CPI-variance
    adjustment and ``c`` the mean CPI.  May be negative when c < h - a;
    callers clamp to zero where the value is applied as erosion.
    """
    _require_finite(h=h, a=a, c=c)
    if 1.0 + c <= 0.0:
        raise ValueError("need 1 + c > 0")
    return 1.0 - (1.0 + h - a) / (1.0 + c)


def implied_adjustment(h: float, d: float, c: float) -> float:
    """Inverse of :func:`annual_devaluation`: a = 1 + h - (1 - d)(1 + c)."""
    _require_finite(h=h, d=d, c=c)
    if d >= 1.0:
        raise ValueError("need d < 1")
    return 1.0 + h - (1.0 - d) * (1.0 + c)


def capped_uplift(cpi: float, rule: CapRule) -> float:
    """Nominal annual uplift granted for observed CPI under a cap rule.

    Negative CPI never reduces the pension: the uplift is floored at 0
    under both rules (standard pension practice).
    """
    _require_finite(cpi=cpi)
    if cpi < -1.0:
        raise ValueError("cpi must be >= -1")
    if cpi <= 0.0:
        return 0.0
    if rule.kind is CapKind.HARD:
        return min(cpi, rule.cap)
    if cpi <= rule.full_match_to:
        uplift = cpi
    else:
        matched = min(cpi, rule.half_match_to)
        uplift = rule.full_match_to + 0.5 * (matched - rule.full_match_to)
    return min(uplift, rule.max_uplift)


def erosion_factor(d: float, n: float) -> float:
    """Real-terms value factor after ``n`` years of annual devaluation ``d``."""
    _require_finite(d=d, n=n)
    if d >= 1.0:
        raise ValueError("need d < 1")
    if n < 0:
        raise ValueError("need n >= 0")
    return (1.0 - d) ** n


def average_retirement_erosion(d: float, career_years: int = 40,
                               retirement_years: int = 20) -> float:
    """Average loss over a retirement following a full career.

    Arithmetic mean of the yearly value factors at horizons
    career_years .. career_years + retirement_years (inclusive, so 21
    factors for the 40/20 default), returned as a loss fraction.
    """
    if career_years < 0 or retirement_years < 0:
        raise ValueError("years must be >= 0")
    horizons = range(career_years, career_years + retirement_years + 1)
    mean_factor = sum(erosion_factor(d, n) for n in horizons) / len(horizons)
    return 1.0 - mean_factor


def accrual_only_reduction(old_denom: float, new_denom: float) -> float:
    """Benefit reduction attributable to the accrual change alone."""
    if old_denom <= 0 or new_denom <= 0:
        raise ValueError("denominators must be positive")
    return 1.0 - old_denom / new_denom


def monte_carlo_devaluation(h: float, c: float, sigma: float, years: int,
                            paths: int, seed: int = 0) -> float:
    """Empirical annual devaluation under i.i.d. Normal(c, sigma) CPI.

    Validation oracle for the closed-form devaluation: each year draws a
    CPI, grants the hard-capped uplift (floored at 0) and accumulates the
    real value factor (1 + uplift) / (1 + cpi).  Returns one minus the
    geometric-mean yearly factor.  Deterministic for a fixed seed.
    """
    _require_finite(h=h, c=c, sigma=sigma)
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if years < 1 or paths < 1:
        raise ValueError("years and paths must be >= 1")
    rng = np.random.default_rng(seed)
    cpi = rng.normal(c, sigma, size=(paths, years))
    uplift = np.clip(cpi, 0.0, h)
    log_factor = np.log1p(uplift) - np.log1p(cpi)
    return 1.0 - float(np.exp(log_factor.mean()))


def real_devaluation(rule: CapRule, assumptions: EconomicAssumptions) -> float:
    """Effective annual devaluation of DB value under a cap rule, >= 0.

    Hard cap: the closed-form devaluation with the CPI-variance
    adjustment, clamped at zero (the modeller represents variance losses,
    never gains).  Soft cap: zero variance devaluation; erosion appears
    only if mean CPI exceeds what the soft rule matches (never for
    CPI <= 5%).
    """
    c = assumptions.cpi_mean
    if rule.kind is CapKind.HARD:
        if assumptions.devaluation_override is not None:
            return max(0.0, assumptions.devaluation_override)
        return max(0.0, annual_devaluation(rule.cap, assumptions.cpi_adjustment, c))
    uplift = capped_uplift(c, rule)
    return max(0.0, 1.0 - (1.0 + uplift) / (1.0 + c))


def threshold_devaluation(rules: SchemeRules,
                          assumptions: EconomicAssumptions) -> float:
    """Annual real-terms shrinkage of the DB/DC threshold, >= 0.

    A fully CPI-indexed threshold is constant in real terms.  A threshold
    indexed at a fixed cap rate behaves like a hard-capped benefit and
    carries the same CPI-variance adjustment.
    """
    if rules.threshold_indexation == FULL_CPI:
        return 0.0
    rate = float(rules.threshold_indexation)
    a = assumptions.cpi_adjustment
    if assumptions.devaluation_override is not None and rules.cap_rule.kind is CapKind.HARD:
        # Keep the threshold consistent with an explicitly overridden DB
        # devaluation when the indexation rate equals the DB cap.
        if rate == rules.cap_rule.cap:
            return max(0.0, assumptions.devaluation_override)
    return max(0.0, annual_devaluation(rate, a, assumptions.cpi_mean))


def load_presets() -> dict[str, SchemeRules]:
    """Rule presets bundled with the package (uss2021, acas2018, uuk2021,
    uuk2022_adjusted)."""
    parser = configparser.ConfigParser()
    text = resources.files("pensionlab.data").joinpath("presets.ini").read_text()
    parser.read_string(text)
    presets: dict[str, SchemeRules] = {}
    for name in parser.sections():
        sec = parser[name]
        kind = sec["cap_kind"]
        if kind == "soft":
            cap = CapRule.soft(full_match_to=sec.getfloat("full_match_to"),
                               half_match_to=sec.getfloat("half_match_to"),
                               max_uplift=sec.getfloat("max_uplift"))
        else:
            cap = CapRule.hard(cap=sec.getfloat("cap"),
                               delay_years=sec.getint("delay_years"))
        indexation = sec["threshold_indexation"]
        presets[name] = SchemeRules(
            accrual_denominator=sec.getint("accrual_denominator"),
            db_dc_threshold=sec.getfloat("db_dc_threshold"),
            cap_rule=cap,
            threshold_indexation=FULL_CPI if indexation == FULL_CPI else float(indexation),
            member_rate=sec.getfloat("member_rate"),
            employer_rate=sec.getfloat("employer_rate"),
            name=name,
        )
    return presets
