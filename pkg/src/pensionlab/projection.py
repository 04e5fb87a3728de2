"""Single-member future-service pension projection.

Projects benefits earned between a start date (default 1 April 2022) and
retirement at 66 under a given rule set, entirely in today's money:
nominal quantities are deflated by the assumed mean CPI.  Stateless and
deterministic; scenarios can be evaluated in parallel.

Conventions (documented because the USS modeller internals are
unpublished):

* Annual time steps; the final fractional year is pro-rated.
* DB accrual earned during year [t, t+1) is revalued from the end of
  that year (standard career-average practice), so under a hard cap it
  erodes for (years_to_retirement - t - 1) years to age 66, and never
  before the cap delay has elapsed.
* DC contributions are spread through the year, represented as a single
  mid-year payment.
* DC contributions are converted to an annuity at retirement
  (pot / annuity_factor) which is CPI-indexed, i.e. constant in real
  terms through retirement.
* Retirement income totals are 20 annual payments at ages 66..85,
  interpolated on the [66, 86] span.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from datetime import date

from .scheme import (
    CapKind,
    EconomicAssumptions,
    SchemeRules,
    real_devaluation,
    threshold_devaluation,
)

__all__ = [
    "DcOption",
    "Interpolation",
    "MemberScenario",
    "ProjectionResult",
    "LossMetrics",
    "project_member",
    "retirement_income_total",
    "future_loss",
    "project_comparison",
    "one_year_contribution_loss",
    "age_at",
    "RETIREMENT_PAYMENTS",
]

RETIREMENT_PAYMENTS = 20

# A DB tranche earned during year [t, t+1) is revalued (and so starts
# eroding under a cap) from the end of that year.
REVALUATION_LAG = 1.0

# DC contributions arrive through the year; modelled as one mid-year payment.
CONTRIBUTION_TIMING = 0.5


class DcOption(enum.Enum):
    ANNUITY = "annuity"
    DRAWDOWN = "drawdown"
    CASH = "cash"


class Interpolation(enum.Enum):
    LINEAR = "linear"
    GEOMETRIC = "geometric"


def age_at(dob: date, when: date) -> float:
    """Age in years, with months/days contributing fractionally.

    Whole months count as 1/12 so that the modeller's 1 October birthday
    convention yields exact half-year ages on 1 April.
    """
    return ((when.year - dob.year)
            + (when.month - dob.month) / 12.0
            + (when.day - dob.day) / 365.25)


@dataclass(frozen=True)
class MemberScenario:
    date_of_birth: date
    salary: float
    start_date: date = date(2022, 4, 1)
    retirement_age: float = 66.0
    dc_option: DcOption = DcOption.ANNUITY

    def __post_init__(self) -> None:
        if self.salary < 0:
            raise ValueError("salary must be >= 0")
        if self.retirement_age <= 0:
            raise ValueError("retirement_age must be positive")
        if self.dc_option is not DcOption.ANNUITY:
            raise ValueError(f"dc_option {self.dc_option.value!r} is not supported; "
                             "only the annuity option is implemented")

    @property
    def age_at_start(self) -> float:
        return age_at(self.date_of_birth, self.start_date)

    @property
    def years_to_retirement(self) -> float:
        return self.retirement_age - self.age_at_start


@dataclass(frozen=True)
class ProjectionResult:
    """Today's-money annual income at 66 and 86 with the DB/DC split.

    ``db_devaluation`` and ``erosion_start`` (years after retirement at
    which the cap starts to bite, nonzero only when the cap delay outlasts
    the remaining service) allow income at any retirement age to be
    reconstructed.
    """

    income_66: float
    income_86: float
    db_66: float
    dc_66: float
    rules_id: str = ""
    assumptions_id: str = ""
    db_devaluation: float = 0.0
    erosion_start: float = 0.0
    # DB income still subject to the cap after retirement; differs from
    # db_66 only for spliced projections that carry uncapped DB from an
    # earlier structure.
    db_66_eroding: float | None = None

    def income_at(self, age: float) -> float:
        """Modelled annual income (today's money) at a retirement age."""
        if age < 66.0:
            raise ValueError("income_at is defined for ages >= 66")
        eroding_db = self.db_66 if self.db_66_eroding is None else self.db_66_eroding
        eroding = max(0.0, (age - 66.0) - self.erosion_start)
        flat = self.income_66 - eroding_db
        return eroding_db * (1.0 - self.db_devaluation) ** eroding + flat


@dataclass(frozen=True)
class LossMetrics:
    percent_loss: float
    monetary_loss: float
    interpolation: Interpolation = Interpolation.LINEAR
    geometric_fallback: bool = False


def _assumptions_id(a: EconomicAssumptions) -> str:
    return f"cpi={a.cpi_mean:.4f},a={a.cpi_adjustment:.4f}"


def project_member(scenario: MemberScenario, rules: SchemeRules,
                   assumptions: EconomicAssumptions,
                   service_years: float | None = None) -> ProjectionResult:
    """Annual-step projection of future-service DB and DC benefits.

    A member with no future service (already past retirement age at the
    start date) gets an all-zero result rather than an error.
    ``service_years`` optionally stops accrual after that many years while
    still valuing the benefit at retirement (used to splice projections
    across a rule change).
    """
    if assumptions.annuity_factor <= 0:
        raise ValueError("annuity_factor must be positive")
    years = scenario.years_to_retirement
    meta = dict(rules_id=rules.name, assumptions_id=_assumptions_id(assumptions))
    if years <= 0:
        return ProjectionResult(0.0, 0.0, 0.0, 0.0, **meta)
    accrual_years = years if service_years is None else min(years, service_years)

    c = assumptions.cpi_mean
    d = real_devaluation(rules.cap_rule, assumptions)
    d_thr = threshold_devaluation(rules, assumptions)
    real_growth = (1.0 + assumptions.salary_growth) / (1.0 + c)
    real_dc_growth = (1.0 + assumptions.dc_growth) / (1.0 + c)
    delay = rules.cap_rule.delay_years if rules.cap_rule.kind is CapKind.HARD else 0

    db_66 = 0.0
    pot = 0.0
    full_years = math.floor(accrual_years)
    for t in range(full_years + 1):
        weight = 1.0 if t < full_years else accrual_years - full_years
        if weight <= 0.0:
            break
        salary_t = scenario.salary * real_growth ** t
        thr_t = rules.db_dc_threshold * (1.0 - d_thr) ** t
        accrual = weight * min(salary_t, thr_t) / rules.accrual_denominator
        exposure = max(0.0, years - max(t + REVALUATION_LAG, float(delay)))
        db_66 += accrual * (1.0 - d) ** exposure
        excess = max(0.0, salary_t - thr_t)
        contribution = weight * assumptions.dc_contribution_rate * excess
        pot += contribution * real_dc_growth ** max(0.0, years - (t + CONTRIBUTION_TIMING))

    dc_66 = pot / assumptions.annuity_factor
    # After retirement every DB tranche erodes uniformly, except while a
    # cap delay is still running for a member who retired inside it.
    erosion_start = max(0.0, delay - years)
    db_86 = db_66 * (1.0 - d) ** max(0.0, 20.0 - erosion_start)
    return ProjectionResult(income_66=db_66 + dc_66, income_86=db_86 + dc_66,
                            db_66=db_66, dc_66=dc_66,
                            db_devaluation=d, erosion_start=erosion_start, **meta)


def retirement_income_total(income_66: float, income_86: float,
                            method: Interpolation = Interpolation.LINEAR,
                            ) -> tuple[float, bool]:
    """Total of 20 annual payments at ages 66..85.

    Payments interpolate between the incomes at 66 and 86 on the [66, 86]
    span.  Geometric interpolation with a zero income at 86 falls back to
    linear; the flag in the returned tuple records that.
    """
    if income_66 < 0 or income_86 < 0:
        raise ValueError("incomes must be >= 0")
    fallback = False
    if method is Interpolation.GEOMETRIC and (income_66 <= 0 or income_86 <= 0):
        method = Interpolation.LINEAR
        fallback = income_66 > 0  # zero-zero is trivially linear anyway
    if method is Interpolation.LINEAR:
        total = sum(income_66 + (income_86 - income_66) * k / 20.0
                    for k in range(RETIREMENT_PAYMENTS))
    else:
        ratio = income_86 / income_66
        total = sum(income_66 * ratio ** (k / 20.0)
                    for k in range(RETIREMENT_PAYMENTS))
    return total, fallback


def future_loss(old: ProjectionResult, new: ProjectionResult,
                method: Interpolation = Interpolation.LINEAR) -> LossMetrics:
    """Loss in total retirement income between two rule sets.

    Both results must come from the same scenario and assumptions.  A
    member with no future service under the old rules loses nothing.
    """
    if old.assumptions_id != new.assumptions_id:
        raise ValueError("projection results use different assumptions: "
                         f"{old.assumptions_id!r} vs {new.assumptions_id!r}")
    old_total, fb_old = retirement_income_total(old.income_66, old.income_86, method)
    new_total, fb_new = retirement_income_total(new.income_66, new.income_86, method)
    if old_total <= 0.0:
        return LossMetrics(0.0, 0.0, method)
    monetary = old_total - new_total
    return LossMetrics(percent_loss=monetary / old_total, monetary_loss=monetary,
                       interpolation=method, geometric_fallback=fb_old or fb_new)


def project_comparison(scenario: MemberScenario, rules_old: SchemeRules,
                       rules_new: SchemeRules, assumptions: EconomicAssumptions,
                       transition_years: float = 1.0,
                       ) -> tuple[ProjectionResult, ProjectionResult]:
    """Old-vs-new projection pair as the consultation modeller framed it.

    The modeller valued benefits from one year before the rule change
    (the April 2021 valuation, with the cuts taking effect April 2022),
    so the first ``transition_years`` of service accrue under the
    outgoing structure in *both* branches.  The scenario's start date and
    salary refer to the rule-change date; the shared transition service
    is reconstructed behind it at the assumed salary growth.

    With ``transition_years=0`` this is just ``project_member`` under
    each rule set.
    """
    if transition_years < 0:
        raise ValueError("transition_years must be >= 0")
    new_core = project_member(scenario, rules_new, assumptions)
    if transition_years == 0:
        return project_member(scenario, rules_old, assumptions), new_core

    whole = math.ceil(transition_years)
    salary_before = scenario.salary / (1.0 + assumptions.salary_growth) ** whole
    start_before = date(scenario.start_date.year - whole, scenario.start_date.month,
                        scenario.start_date.day)
    early = MemberScenario(scenario.date_of_birth, salary_before, start_before,
                           scenario.retirement_age, scenario.dc_option)
    # The shared transition tranche comes out in money of the earlier
    # start date; rescale so both branches are stated in money of the
    # change date.  From the change date on, each branch is an ordinary
    # projection under its own rules, so identical rule sets give
    # identical results.
    deflator = (1.0 + assumptions.cpi_mean) ** whole
    shared = _rescaled(project_member(early, rules_old, assumptions,
                                      service_years=transition_years), deflator)
    old_core = project_member(scenario, rules_old, assumptions)
    return _spliced(shared, old_core), _spliced(shared, new_core)


def _rescaled(result: ProjectionResult, factor: float) -> ProjectionResult:
    return replace(result,
                   income_66=result.income_66 * factor,
                   income_86=result.income_86 * factor,
                   db_66=result.db_66 * factor,
                   dc_66=result.dc_66 * factor)


def _spliced(shared: ProjectionResult, core: ProjectionResult) -> ProjectionResult:
    """Combine the shared transition tranche with a post-change core.

    Only the core's DB keeps eroding after retirement; the shared
    tranche accrued under the outgoing (soft-cap) structure.
    """
    return ProjectionResult(
        income_66=shared.income_66 + core.income_66,
        income_86=shared.income_86 + core.income_86,
        db_66=shared.db_66 + core.db_66,
        dc_66=shared.dc_66 + core.dc_66,
        rules_id=core.rules_id,
        assumptions_id=core.assumptions_id,
        db_devaluation=core.db_devaluation,
        erosion_start=core.erosion_start,
        db_66_eroding=core.db_66,
    )


def _one_year_result(scenario: MemberScenario, rules: SchemeRules,
                     assumptions: EconomicAssumptions) -> ProjectionResult:
    """Projection restricted to the single year of accrual at the start date.

    The year's benefit is treated as a tranche credited at the start
    date, eroding from then (subject to the cap delay); the matching DC
    contribution is paid mid-year.
    """
    years = scenario.years_to_retirement
    d = real_devaluation(rules.cap_rule, assumptions)
    delay = rules.cap_rule.delay_years if rules.cap_rule.kind is CapKind.HARD else 0
    thr = rules.db_dc_threshold
    accrual = min(scenario.salary, thr) / rules.accrual_denominator
    exposure = max(0.0, years - float(delay))
    db_66 = accrual * (1.0 - d) ** exposure
    c = assumptions.cpi_mean
    real_dc_growth = (1.0 + assumptions.dc_growth) / (1.0 + c)
    excess = max(0.0, scenario.salary - thr)
    pot = assumptions.dc_contribution_rate * excess \
        * real_dc_growth ** max(0.0, years - CONTRIBUTION_TIMING)
    dc_66 = pot / assumptions.annuity_factor
    erosion_start = max(0.0, delay - years)
    db_86 = db_66 * (1.0 - d) ** max(0.0, 20.0 - erosion_start)
    return ProjectionResult(income_66=db_66 + dc_66, income_86=db_86 + dc_66,
                            db_66=db_66, dc_66=dc_66, rules_id=rules.name,
                            assumptions_id=_assumptions_id(assumptions),
                            db_devaluation=d, erosion_start=erosion_start)


def one_year_contribution_loss(scenario: MemberScenario, rules_old: SchemeRules,
                               rules_new: SchemeRules,
                               assumptions: EconomicAssumptions,
                               method: Interpolation = Interpolation.LINEAR,
                               ) -> float:
    """Loss in retirement income from the first year's accrual alone."""
    if scenario.years_to_retirement < 1.0:
        raise ValueError("need at least one year to retirement")
    old = _one_year_result(scenario, rules_old, assumptions)
    new = _one_year_result(scenario, rules_new, assumptions)
    return future_loss(old, new, method).percent_loss
