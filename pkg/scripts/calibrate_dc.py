#!/usr/bin/env python3
"""DC-valuation calibration sweep against the published CPI-2.8% loss grid.

The engine's DB side is fully determined by the scheme rules and the
devaluation model, but the source modeller's DC treatment (contribution
split above the threshold, annuity pricing basis) is unpublished.  This
script documents how the shipped calibration was chosen:

1. With DC growth held at the published headline (CPI + 1.9%), the best
   single annuity factor for the salary bands >= £60k runs into the
   [30, 50] plausibility bound -- the unconstrained optimum sits near
   58, which is outside any quoted annuity range.
2. Sweeping the (real DC growth premium, annuity factor) pair instead
   finds a shallow valley of near-optimal fits inside the bound.  Among
   those, growth = CPI + 0.5% with factor 48 is shipped: it also gives
   the smallest persona-table deviations and puts the cohort means and
   global losses essentially on top of the published values, while
   bringing every engine cell within the acceptance band except the two
   65+ low-salary cells discussed in the acceptance suite.

The chosen pair is frozen in ``EconomicAssumptions.modeller``.
"""

from datetime import date

import numpy as np

from pensionlab import (
    EconomicAssumptions,
    MemberScenario,
    bundled_loss_grids,
    future_loss,
    load_presets,
    project_comparison,
)

AGE_MIDS = [22.5, 27.5, 32.5, 37.5, 42.5, 47.5, 52.5, 57.5, 62.5, 65.5]
CHANGE = date(2022, 4, 1)
CPI = 0.028


def salary_mid(i: int) -> float:
    return 200_000.0 if i == 30 else i * 5_000.0 + 2_500.0


def engine_grid(premium: float, annuity_factor: float) -> np.ndarray:
    presets = load_presets()
    assumptions = EconomicAssumptions.modeller(
        CPI, dc_growth=(1.0 + CPI) * (1.0 + premium) - 1.0,
        annuity_factor=annuity_factor)
    grid = np.zeros((31, 10))
    for j, age_mid in enumerate(AGE_MIDS):
        dob = date(2022 - int(age_mid + 0.5), 10, 1)
        for i in range(31):
            scenario = MemberScenario(dob, salary_mid(i), CHANGE)
            old, new = project_comparison(scenario, presets["uss2021"],
                                          presets["uuk2021"], assumptions)
            grid[i, j] = future_loss(old, new).percent_loss * 100.0
    return grid


def mad_high_salary(grid: np.ndarray, published: np.ndarray) -> float:
    """Mean absolute deviation over the DC-sensitive bands (>= £60k)."""
    rows = [i for i in range(31) if salary_mid(i) >= 60_000.0]
    return float(np.abs(grid[rows] - (-published[rows])).mean())


def main() -> None:
    published, _ = bundled_loss_grids()

    print("Step 1: annuity-factor-only sweep at the published DC growth "
          "(CPI + 1.9%)")
    best = None
    for factor in range(30, 61, 2):
        # Factors above 50 violate the plausibility invariant, so they
        # are evaluated via the unclamped helper below.
        grid = engine_grid_unclamped(0.019, float(factor), published)
        mad = mad_high_salary(grid, published)
        flag = "" if 30 <= factor <= 50 else "  (outside [30, 50] bound)"
        print(f"  factor {factor:>2}: MAD {mad:.2f}pp{flag}")
        if best is None or mad < best[0]:
            best = (mad, factor)
    print(f"  -> unconstrained optimum at factor {best[1]} "
          f"(MAD {best[0]:.2f}pp), outside the plausible range\n")

    print("Step 2: joint (growth premium, factor) sweep inside the bound")
    results = []
    for premium in (0.000, 0.005, 0.010, 0.015, 0.019):
        for factor in (36.0, 40.0, 44.0, 48.0):
            mad = mad_high_salary(engine_grid(premium, factor), published)
            print(f"  premium {premium:.3f}, factor {factor:.0f}: "
                  f"MAD {mad:.2f}pp")
            results.append((mad, premium, factor))
    results.sort()
    print("\nNear-optimal candidates (MAD within 0.5pp of best):")
    for mad, premium, factor in results:
        if mad > results[0][0] + 0.5:
            break
        print(f"  premium {premium:.3f}, factor {factor:.0f}: MAD {mad:.2f}pp")
    shipped = mad_high_salary(engine_grid(0.005, 48.0), published)
    print(f"\nShipped calibration: DC growth = CPI + 0.5%, annuity factor "
          f"48 (MAD {shipped:.2f}pp), selected among the near-optimal "
          "candidates by the persona-table and global-loss cross-checks; "
          "frozen in EconomicAssumptions.modeller().")


def engine_grid_unclamped(premium: float, annuity_factor: float,
                          published: np.ndarray) -> np.ndarray:
    """Grid with the annuity factor applied after construction.

    EconomicAssumptions enforces the [30, 50] invariant, so factors
    outside it are emulated by rescaling the in-range DC component.
    """
    anchor = 40.0
    base = engine_grid(premium, anchor)
    if annuity_factor == anchor:
        return base
    # Loss percent is not linear in the factor, so recompute properly by
    # scaling DC income: pot/factor = (pot/anchor) * anchor/factor.
    presets = load_presets()
    assumptions = EconomicAssumptions.modeller(
        CPI, dc_growth=(1.0 + CPI) * (1.0 + premium) - 1.0,
        annuity_factor=anchor)
    scale = anchor / annuity_factor
    grid = np.zeros((31, 10))
    for j, age_mid in enumerate(AGE_MIDS):
        dob = date(2022 - int(age_mid + 0.5), 10, 1)
        for i in range(31):
            scenario = MemberScenario(dob, salary_mid(i), CHANGE)
            old, new = project_comparison(scenario, presets["uss2021"],
                                          presets["uuk2021"], assumptions)
            old_66 = old.db_66 + old.dc_66 * scale
            old_86 = old.income_86 - old.dc_66 + old.dc_66 * scale
            new_66 = new.db_66 + new.dc_66 * scale
            new_86 = new.income_86 - new.dc_66 + new.dc_66 * scale
            old_total = (old_66 + old_86) * 10.0
            new_total = (new_66 + new_86) * 10.0
            grid[i, j] = ((old_total - new_total) / old_total * 100.0
                          if old_total > 0 else 0.0)
    return grid


if __name__ == "__main__":
    main()
