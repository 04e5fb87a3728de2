"""Heat-map ingestion, weighted statistics, replay and cohort checks."""

import io
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pensionlab import (
    EconomicAssumptions,
    HeatMapError,
    MemberScenario,
    band_midpoints,
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
from pensionlab.cohort import CellLoss, _dob_for_age


def mini_csv(body: str) -> io.StringIO:
    return io.StringIO(body)


class TestLoadHeatmap:
    def test_bundled_total(self, heatmap):
        # The published matrix sums to 195,557, quoted as 196,000.
        assert heatmap.total == 195_557
        assert heatmap.counts.shape == (31, 10)

    def test_under_40k_count(self, heatmap):
        below = heatmap.counts[:8].sum()
        # Quoted as "84,000 of 196,000".
        assert below == 84_075

    def test_under_40_count(self, heatmap):
        under = heatmap.counts[:, :4].sum()
        # Quoted as 71,000 staff below 40.
        assert under == 70_709

    def test_thousands_separators(self):
        hm = load_heatmap(mini_csv(
            'salary_band,<=25,25-29\n0-5k,"1,292",10\n5-10k,3,4\n'))
        assert hm.total == 1309

    def test_empty_file_rejected(self):
        with pytest.raises(HeatMapError, match="empty"):
            load_heatmap(mini_csv(""))

    def test_ragged_row_rejected(self):
        with pytest.raises(HeatMapError, match="0-5k"):
            load_heatmap(mini_csv("salary_band,<=25,25-29\n0-5k,1\n"))

    def test_negative_count_rejected(self):
        with pytest.raises(HeatMapError, match="25-29"):
            load_heatmap(mini_csv("salary_band,<=25,25-29\n0-5k,1,-2\n"))

    def test_unknown_band_label_rejected(self):
        with pytest.raises(HeatMapError, match="bogus"):
            load_heatmap(mini_csv("salary_band,<=25,bogus\n0-5k,1,2\n"))
        with pytest.raises(HeatMapError, match="weird"):
            load_heatmap(mini_csv("salary_band,<=25\nweird,1\n"))

    def test_non_numeric_cell_names_row_and_column(self):
        with pytest.raises(HeatMapError, match="'0-5k'.*'25-29'"):
            load_heatmap(mini_csv("salary_band,<=25,25-29\n0-5k,1,x\n"))


class TestBandMidpoints:
    def test_bundled_midpoints(self, heatmap):
        salary_mids, age_mids = band_midpoints(heatmap)
        assert salary_mids[10] == 52_500.0     # £50-55k
        assert salary_mids[-1] == 200_000.0    # £150k+
        assert age_mids[0] == 22.5             # <=25
        assert age_mids[3] == 37.5             # 35-39
        assert age_mids[-1] == 65.5            # 65+

    def test_dob_anchoring(self):
        from pensionlab.projection import age_at

        for mid in (22.5, 37.5, 65.5):
            dob = _dob_for_age(mid)
            assert age_at(dob, date(2022, 4, 1)) == pytest.approx(mid)


class TestWeightedStatistics:
    def test_median_of_three(self):
        assert weighted_quantile([1, 2, 3], [1, 1, 1], 0.5) == 2

    def test_weight_dominance(self):
        assert weighted_quantile([1, 2, 3], [1, 10, 1], 0.25) == 2
        assert weighted_quantile([1, 2, 3], [1, 10, 1], 0.75) == 2

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            weighted_quantile([], [], 0.5)
        with pytest.raises(ValueError):
            weighted_quantile([1], [1], 0.0)
        with pytest.raises(ValueError):
            weighted_quantile([1, 2], [0, 0], 0.5)
        with pytest.raises(ValueError):
            weighted_mean([], [])

    @given(values=st.lists(st.floats(min_value=-100, max_value=100),
                           min_size=1, max_size=30),
           seed=st.integers(min_value=0, max_value=2**31))
    def test_quantile_ordering(self, values, seed):
        rng = np.random.default_rng(seed)
        weights = rng.uniform(0.1, 5.0, size=len(values))
        qs = [weighted_quantile(values, weights, q)
              for q in (0.25, 0.5, 0.75)]
        assert min(values) <= qs[0] <= qs[1] <= qs[2] <= max(values)

    def test_mode_bin_left_closed(self):
        assert mode_bin([5.0, 5.0, 4.9], [1, 1, 1], 5.0) == (5.0, 10.0)
        assert mode_bin([4.9, 4.8], [1, 1], 5.0) == (0.0, 5.0)

    def test_mode_bin_tie_goes_low(self):
        assert mode_bin([2.0, 7.0], [1, 1], 5.0) == (0.0, 5.0)


def _cell(salary_label, age_label, count, percent, money,
          salary_mid=30_000.0, age_mid=42.5):
    return CellLoss(salary_label, age_label, salary_mid, age_mid,
                    count, percent, money)


class TestGridAggregation:
    def test_zero_grid(self):
        cells = [_cell("0-5k", "<=25", 10, 0.0, 0.0)]
        assert global_monetary_loss(cells) == 0.0

    def test_weighted_sum(self):
        cells = [_cell("0-5k", "<=25", 10, 0.1, 1000.0),
                 _cell("5-10k", "<=25", 5, 0.2, 2000.0)]
        assert global_monetary_loss(cells) == pytest.approx(20_000.0)

    def test_aggregation_linearity(self, heatmap, published_grids):
        cells = replay_losses(heatmap, *published_grids)
        under = filter_cohort(cells, age_below=40.0)
        over = filter_cohort(cells, predicate=lambda c: c.age_mid >= 40.0)
        assert global_monetary_loss(under) + global_monetary_loss(over) == \
            pytest.approx(global_monetary_loss(cells))

    def test_filters_select_whole_bands(self, heatmap, published_grids):
        cells = replay_losses(heatmap, *published_grids)
        under_40 = filter_cohort(cells, age_below=40.0)
        assert {c.age_label for c in under_40} == {"<=25", "25-29", "30-34",
                                                   "35-39"}
        under_40k = filter_cohort(cells, salary_below=40_000.0)
        assert len({c.salary_label for c in under_40k}) == 8

    def test_histogram_sums_to_population(self, heatmap, published_grids):
        cells = replay_losses(heatmap, *published_grids)
        _, _, matrix = histogram(cells, 5.0)
        assert matrix.sum() == pytest.approx(heatmap.total)

    def test_single_cell_histogram(self):
        cells = [_cell("0-5k", "<=25", 7, 0.27, 50_000.0)]
        edges, groups, matrix = histogram(cells, 5.0)
        assert groups == ("0-5k",)
        assert matrix.sum() == 7
        assert (matrix > 0).sum() == 1


class TestReplay:
    """The statistics layer on the published grids, engine bypassed."""

    def test_percent_quartiles(self, heatmap, published_grids):
        cells = replay_losses(heatmap, *published_grids)
        dist = summarize(cells, "percent")
        assert dist.q1 == pytest.approx(26, abs=1)
        assert dist.q2 == pytest.approx(33, abs=1)
        assert dist.q3 == pytest.approx(37, abs=1)
        assert dist.mean == pytest.approx(31, abs=1)
        assert dist.mode_bin == (35.0, 40.0)

    def test_global_monetary(self, heatmap, published_grids):
        cells = replay_losses(heatmap, *published_grids)
        assert global_monetary_loss(cells) == pytest.approx(17.6e9, abs=0.3e9)

    def test_under_40_money(self, heatmap, published_grids):
        cells = filter_cohort(replay_losses(heatmap, *published_grids),
                              age_below=40.0)
        dist = summarize(cells, "money")
        assert dist.global_monetary_loss == pytest.approx(9.4e9, abs=0.2e9)
        assert dist.mean == pytest.approx(133_000.0, abs=3_000.0)
        assert dist.mode_bin == (150_000.0, 200_000.0)

    def test_under_40_share_exceeds_half(self, heatmap, published_grids):
        cells = replay_losses(heatmap, *published_grids)
        under = filter_cohort(cells, age_below=40.0)
        share = global_monetary_loss(under) / global_monetary_loss(cells)
        assert share > 0.50

    def test_shape_mismatch_rejected(self, heatmap, published_grids):
        pct, _ = published_grids
        with pytest.raises(HeatMapError, match="shape"):
            replay_losses(heatmap, pct[:5], pct)

    def test_loss_grid_loader_signs(self, published_grids):
        pct, gbp = published_grids
        # Published grids are signed negative (cuts).
        assert pct.max() <= 0
        assert gbp.max() <= 0


class TestEngineCohort:
    def test_identical_rules_zero_grid(self, heatmap, presets):
        cells = cohort_losses(heatmap, presets["uss2021"], presets["uss2021"],
                              EconomicAssumptions.modeller(0.028))
        assert all(c.percent_loss == 0.0 and c.monetary_loss == 0.0
                   for c in cells)

    def test_pink_cell(self, heatmap, presets):
        cells = cohort_losses(heatmap, presets["uss2021"], presets["uuk2021"],
                              EconomicAssumptions.modeller(0.028))
        cell = next(c for c in cells
                    if c.salary_label == "25-30k" and c.age_label == "35-39")
        assert cell.percent_loss * 100 == pytest.approx(27, abs=3)

    def test_monetary_cell(self, heatmap, presets):
        cells = cohort_losses(heatmap, presets["uss2021"], presets["uuk2021"],
                              EconomicAssumptions.modeller(0.028))
        cell = next(c for c in cells
                    if c.salary_label == "65-70k" and c.age_label == "50-54")
        assert cell.monetary_loss == pytest.approx(85_000.0, rel=0.15)


class TestOneYearGlobal:
    def test_published_cells(self, heatmap, presets):
        old, new = presets["uss2021"], presets["uuk2021"]
        got = global_one_year_loss(heatmap, old, new,
                                   EconomicAssumptions.published(0.025))
        assert got * 100 == pytest.approx(27.2, abs=1.0)
        delayed = global_one_year_loss(
            heatmap, old, presets["uuk2022_adjusted"],
            EconomicAssumptions.published(0.025, devaluation="uss"))
        assert delayed * 100 == pytest.approx(28.0, abs=1.0)

    def test_identical_rules_zero(self, heatmap, presets):
        got = global_one_year_loss(heatmap, presets["uss2021"],
                                   presets["uss2021"],
                                   EconomicAssumptions.published(0.025))
        assert got == 0.0


class TestPersonas:
    def test_aria(self):
        got = persona_check("aria", EconomicAssumptions.modeller(0.028))
        assert got * 100 == pytest.approx(29, abs=2)

    def test_bryn(self):
        got = persona_check("bryn", EconomicAssumptions.modeller(0.025))
        assert got * 100 == pytest.approx(35, abs=2)

    def test_chloe(self):
        got = persona_check("chloe", EconomicAssumptions.modeller(0.030))
        assert got * 100 == pytest.approx(36, abs=2)

    def test_unknown_persona_rejected(self):
        with pytest.raises(ValueError, match="unknown persona"):
            persona_check("dora", EconomicAssumptions.modeller(0.028))


class TestHistogramHeadlines:
    def test_under_40k_fraction_above_15_percent(self, heatmap, presets):
        cells = cohort_losses(heatmap, presets["uss2021"], presets["uuk2021"],
                              EconomicAssumptions.modeller(0.025))
        low = filter_cohort(cells, salary_below=40_000.0)
        total = sum(c.count for c in low)
        above = sum(c.count for c in low if c.percent_loss > 0.15)
        # Quoted as "90% (76,800 out of 84,000)".
        assert above / total == pytest.approx(0.90, abs=0.02)
