"""Single-member projection engine: oracles, grid spot checks, properties."""

from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pensionlab import (
    CapRule,
    DcOption,
    EconomicAssumptions,
    Interpolation,
    MemberScenario,
    future_loss,
    load_presets,
    one_year_contribution_loss,
    project_comparison,
    project_member,
    retirement_income_total,
)
from pensionlab.projection import age_at

PRESETS = load_presets()
USS, UUK = PRESETS["uss2021"], PRESETS["uuk2021"]
CHANGE = date(2022, 4, 1)

# a = h - c makes the hard-cap devaluation exactly zero.
NO_VARIANCE = EconomicAssumptions(cpi_mean=0.025, cpi_adjustment=0.0)


class TestAgeConventions:
    def test_october_birthday_gives_half_years(self):
        assert age_at(date(1956, 10, 1), CHANGE) == pytest.approx(65.5)
        assert age_at(date(1985, 10, 1), CHANGE) == pytest.approx(36.5)

    def test_scenario_years_to_retirement(self):
        s = MemberScenario(date(1957, 4, 1), 37_500.0, CHANGE)
        assert s.years_to_retirement == pytest.approx(1.0)

    def test_scenario_validation(self):
        with pytest.raises(ValueError):
            MemberScenario(date(1980, 1, 1), -5.0)
        with pytest.raises(ValueError):
            MemberScenario(date(1980, 1, 1), 30_000.0, retirement_age=0.0)

    def test_unsupported_dc_options_rejected(self):
        for option in (DcOption.DRAWDOWN, DcOption.CASH):
            with pytest.raises(ValueError, match="not supported"):
                MemberScenario(date(1980, 1, 1), 30_000.0, dc_option=option)


class TestSingleYearOracle:
    """Member exactly one year from retirement; hand-checkable arithmetic."""

    def scenario(self):
        return MemberScenario(date(1957, 4, 1), 37_500.0, CHANGE)

    def test_old_rules_single_tranche(self):
        result = project_member(self.scenario(), USS, NO_VARIANCE)
        assert result.income_66 == pytest.approx(500.0, abs=1e-9)
        assert result.db_66 == pytest.approx(500.0, abs=1e-9)
        assert result.dc_66 == 0.0

    def test_new_rules_single_tranche(self):
        result = project_member(self.scenario(), UUK, NO_VARIANCE)
        assert result.income_66 == pytest.approx(37_500.0 / 85.0, abs=1e-9)

    def test_accrual_headline_loss(self):
        # With no variance devaluation the loss is purely the accrual
        # change, 1 - 75/85 = 11.76% -- the headline the 12% claim
        # rounds to.
        old = project_member(self.scenario(), USS, NO_VARIANCE)
        new = project_member(self.scenario(), UUK, NO_VARIANCE)
        loss = future_loss(old, new)
        assert loss.percent_loss == pytest.approx(1.0 - 75.0 / 85.0, abs=1e-9)

    def test_past_retirement_all_zero(self):
        member = MemberScenario(date(1954, 10, 1), 50_000.0, CHANGE)
        assert age_at(member.date_of_birth, CHANGE) == pytest.approx(67.5)
        old = project_member(member, USS, NO_VARIANCE)
        new = project_member(member, UUK, NO_VARIANCE)
        assert old.income_66 == old.income_86 == 0.0
        assert future_loss(old, new).percent_loss == 0.0


class TestRetirementIncomeTotal:
    def test_constant_income(self):
        total, fallback = retirement_income_total(1000.0, 1000.0,
                                                  Interpolation.LINEAR)
        assert total == pytest.approx(20_000.0)
        assert not fallback

    def test_linear_series(self):
        total, _ = retirement_income_total(1000.0, 500.0, Interpolation.LINEAR)
        assert total == pytest.approx(15_250.0)

    def test_geometric_series(self):
        # Frozen 20-term oracle: sum of 1000 * 0.5^(k/20), k = 0..19.
        total, fallback = retirement_income_total(1000.0, 500.0,
                                                  Interpolation.GEOMETRIC)
        assert total == pytest.approx(14_678.39, abs=1.0)
        assert not fallback

    def test_geometric_fallback_on_zero_income(self):
        geo, fallback = retirement_income_total(1000.0, 0.0,
                                                Interpolation.GEOMETRIC)
        lin, _ = retirement_income_total(1000.0, 0.0, Interpolation.LINEAR)
        assert fallback
        assert geo == pytest.approx(lin)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            retirement_income_total(-1.0, 0.0, Interpolation.LINEAR)

    @given(i66=st.floats(min_value=1e-3, max_value=1e6),
           ratio=st.floats(min_value=1e-6, max_value=1.0))
    def test_linear_dominates_geometric(self, i66, ratio):
        i86 = i66 * ratio
        lin, _ = retirement_income_total(i66, i86, Interpolation.LINEAR)
        geo, _ = retirement_income_total(i66, i86, Interpolation.GEOMETRIC)
        assert lin >= geo - 1e-9 * i66


class TestGridSpotChecks:
    """Engine vs published CPI-2.8% grid cells (model-uncertainty band)."""

    def cell_loss(self, age_mid, salary_mid, cpi=0.028):
        dob = date(2022 - int(age_mid + 0.5), 10, 1)
        scenario = MemberScenario(dob, salary_mid, CHANGE)
        assumptions = EconomicAssumptions.modeller(cpi)
        old, new = project_comparison(scenario, USS, UUK, assumptions)
        return future_loss(old, new).percent_loss

    def test_pink_cell(self):
        # Published -27% at (35-39, £25-30k).
        assert self.cell_loss(37.5, 27_500.0) * 100 == pytest.approx(27, abs=3)

    def test_green_cell(self):
        # Published -40% at (40-44, £50-55k).
        assert self.cell_loss(42.5, 52_500.0) * 100 == pytest.approx(40, abs=3)

    def test_aria_equivalent(self):
        dob = date(1985, 10, 1)
        scenario = MemberScenario(dob, 30_000.0, CHANGE)
        old, new = project_comparison(scenario, USS, UUK,
                                      EconomicAssumptions.modeller(0.028))
        assert future_loss(old, new).percent_loss * 100 == pytest.approx(
            29, abs=3)


class TestOneYearContribution:
    def test_reduces_to_accrual_ratio_without_devaluation(self):
        scenario = MemberScenario(date(1982, 4, 1), 30_000.0, CHANGE)
        loss = one_year_contribution_loss(scenario, USS, UUK, NO_VARIANCE)
        assert loss == pytest.approx(1.0 - 75.0 / 85.0, abs=1e-9)

    def test_forty_year_old_near_global_figure(self):
        scenario = MemberScenario(date(1982, 4, 1), 40_000.0, CHANGE)
        assumptions = EconomicAssumptions.published(0.025, devaluation="uuk")
        loss = one_year_contribution_loss(scenario, USS, UUK, assumptions)
        # Frozen hand oracle 25.74%; near the published global 27.2%.
        assert loss * 100 == pytest.approx(25.74, abs=0.01)
        assert loss * 100 == pytest.approx(27.2, abs=1.5)

    def test_two_year_delay_reduces_loss_slightly(self):
        scenario = MemberScenario(date(1982, 4, 1), 40_000.0, CHANGE)
        assumptions = EconomicAssumptions.published(0.025, devaluation="uuk")
        base = one_year_contribution_loss(scenario, USS, UUK, assumptions)
        delayed = one_year_contribution_loss(
            scenario, USS, PRESETS["uuk2022_adjusted"], assumptions)
        assert 0.003 <= base - delayed <= 0.010

    def test_rejects_less_than_one_year(self):
        scenario = MemberScenario(date(1956, 10, 1), 40_000.0, CHANGE)
        with pytest.raises(ValueError):
            one_year_contribution_loss(scenario, USS, UUK, NO_VARIANCE)


ages = st.sampled_from([22.5, 27.5, 32.5, 37.5, 42.5, 47.5, 52.5, 57.5, 62.5])
salaries = st.floats(min_value=1_000.0, max_value=250_000.0)


def _scenario(age_mid: float, salary: float) -> MemberScenario:
    return MemberScenario(date(2022 - int(age_mid + 0.5), 10, 1), salary,
                          CHANGE)


class TestProperties:
    @given(age=ages, salary=salaries)
    def test_identity_rules_zero_loss(self, age, salary):
        scenario = _scenario(age, salary)
        assumptions = EconomicAssumptions.modeller(0.028)
        twice = [project_member(scenario, USS, assumptions) for _ in range(2)]
        assert future_loss(*twice).percent_loss == 0.0
        assert future_loss(*twice).monetary_loss == 0.0
        # The comparison framing shares the transition tranche between
        # branches, so identical rules give identical results exactly.
        old, new = project_comparison(scenario, USS, USS, assumptions)
        assert future_loss(old, new).percent_loss == 0.0

    @given(age=ages, salary=salaries)
    def test_income_split_consistent(self, age, salary):
        result = project_member(_scenario(age, salary), UUK,
                                EconomicAssumptions.modeller(0.028))
        assert result.income_66 == pytest.approx(result.db_66 + result.dc_66,
                                                 rel=1e-12)
        assert result.income_66 >= 0 and result.income_86 >= 0

    @given(age=ages, salary=salaries)
    def test_soft_cap_holds_real_value(self, age, salary):
        result = project_member(_scenario(age, salary), USS,
                                EconomicAssumptions.modeller(0.028))
        assert result.income_86 == pytest.approx(result.income_66, abs=1e-9)

    @given(age=ages, salary=salaries)
    def test_hard_cap_erodes(self, age, salary):
        result = project_member(_scenario(age, salary), UUK,
                                EconomicAssumptions.modeller(0.028))
        assert result.income_86 <= result.income_66 + 1e-9

    @given(age=ages, salary=salaries)
    def test_cap_delay_dominance(self, age, salary):
        scenario = _scenario(age, salary)
        assumptions = EconomicAssumptions.modeller(0.028)
        old_none, new_none = project_comparison(scenario, USS, UUK, assumptions)
        old_delay, new_delay = project_comparison(
            scenario, USS, PRESETS["uuk2022_adjusted"], assumptions)
        loss_none = future_loss(old_none, new_none).percent_loss
        loss_delay = future_loss(old_delay, new_delay).percent_loss
        assert loss_delay <= loss_none + 1e-9

    @given(age=ages, salary=salaries)
    @settings(max_examples=25)
    def test_monotone_in_cpi(self, age, salary):
        scenario = _scenario(age, salary)
        losses = []
        for i in range(6):
            cpi = 0.025 + i * 0.001
            old, new = project_comparison(scenario, USS, UUK,
                                          EconomicAssumptions.modeller(cpi))
            losses.append(future_loss(old, new).percent_loss)
        assert all(b >= a - 1e-9 for a, b in zip(losses, losses[1:]))

    @given(salary=st.floats(min_value=1_000.0, max_value=39_000.0), age=ages)
    @settings(max_examples=25)
    def test_interpolation_gap_small_below_40k(self, salary, age):
        scenario = _scenario(age, salary)
        assumptions = EconomicAssumptions.modeller(0.028)
        old, new = project_comparison(scenario, USS, UUK, assumptions)
        lin = future_loss(old, new, Interpolation.LINEAR).percent_loss
        geo = future_loss(old, new, Interpolation.GEOMETRIC).percent_loss
        assert abs(lin - geo) < 0.002

    @given(salary=salaries, age=ages,
           dc_growth=st.floats(min_value=0.0, max_value=0.08),
           annuity_factor=st.floats(min_value=30.0, max_value=50.0))
    @settings(max_examples=25)
    def test_threshold_irrelevance(self, salary, age, dc_growth,
                                   annuity_factor):
        # A threshold above every projected salary makes the projection
        # independent of the DC parameters.
        import dataclasses

        scenario = _scenario(age, salary)
        rules = dataclasses.replace(UUK, db_dc_threshold=1e9)
        base = project_member(scenario, rules,
                              EconomicAssumptions.modeller(0.028))
        varied = project_member(
            scenario, rules,
            EconomicAssumptions.modeller(0.028, dc_growth=dc_growth,
                                         annuity_factor=annuity_factor))
        assert varied.income_66 == pytest.approx(base.income_66, rel=1e-12)
        assert varied.income_86 == pytest.approx(base.income_86, rel=1e-12)

    def test_age_monotonicity_per_salary_band(self):
        # Percent loss is non-increasing in age across the heat-map age
        # midpoints, matching every row of the published grid.
        assumptions = EconomicAssumptions.modeller(0.028)
        age_mids = [22.5, 27.5, 32.5, 37.5, 42.5, 47.5, 52.5, 57.5, 62.5, 65.5]
        for salary in (2_500.0, 27_500.0, 52_500.0, 87_500.0, 200_000.0):
            losses = []
            for age in age_mids:
                old, new = project_comparison(_scenario(age, salary), USS, UUK,
                                              assumptions)
                losses.append(future_loss(old, new).percent_loss)
            # Tolerance of 0.1pp: the published grid rounds to whole
            # percents, and DC-dominated cells can wobble below that.
            assert all(b <= a + 1e-3 for a, b in zip(losses, losses[1:]))

    def test_mismatched_assumptions_rejected(self):
        scenario = _scenario(42.5, 30_000.0)
        a28 = project_member(scenario, USS, EconomicAssumptions.modeller(0.028))
        a25 = project_member(scenario, UUK, EconomicAssumptions.modeller(0.025))
        with pytest.raises(ValueError):
            future_loss(a28, a25)
