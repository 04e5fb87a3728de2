"""Pension-scheme projection engine and cohort impact analyzer for the
April 2022 USS benefit changes."""

from .scheme import (
    CapKind,
    CapRule,
    EconomicAssumptions,
    SchemeRules,
    accrual_only_reduction,
    annual_devaluation,
    average_retirement_erosion,
    capped_uplift,
    erosion_factor,
    implied_adjustment,
    load_presets,
    monte_carlo_devaluation,
)
from .projection import (
    DcOption,
    Interpolation,
    LossMetrics,
    MemberScenario,
    ProjectionResult,
    future_loss,
    one_year_contribution_loss,
    project_comparison,
    project_member,
    retirement_income_total,
)
from .cohort import (
    CellLoss,
    CohortDistribution,
    HeatMap,
    HeatMapError,
    band_midpoints,
    bundled_heatmap,
    bundled_loss_grids,
    cohort_losses,
    filter_cohort,
    global_monetary_loss,
    global_one_year_loss,
    histogram,
    load_heatmap,
    load_loss_grid,
    mode_bin,
    persona_check,
    replay_losses,
    summarize,
    weighted_mean,
    weighted_quantile,
)

__version__ = "0.1.0"
