"""Command-line interface: projections, cohort runs, reference tables, server.

Subcommands
-----------
project   Single-member what-if projection (old vs new rules).
cohort    Full heat-map run: per-cell loss grids, summaries, histograms.
tables    Reproduce the published reference tables with computed values,
          the published targets and the deltas.
serve     Start the stateless HTTP JSON API.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import sys
from datetime import date, datetime
from pathlib import Path

import click

from . import __version__
from .cohort import (
    CellLoss,
    HeatMapError,
    PERSONAS,
    bundled_heatmap,
    bundled_loss_grids,
    cohort_losses,
    filter_cohort,
    global_one_year_loss,
    load_heatmap,
    persona_check,
    replay_losses,
    summarize,
)
from .projection import (
    Interpolation,
    MemberScenario,
    future_loss,
    project_comparison,
)
from .scheme import (
    CapKind,
    CapRule,
    EconomicAssumptions,
    annual_devaluation,
    average_retirement_erosion,
    erosion_factor,
    load_presets,
)

DEFAULT_RULES = "uss2021:uuk2021"
DEFAULT_CPIS = "0.025,0.028,0.030"


def _parse_rules(value: str):
    presets = load_presets()
    parts = value.split(":")
    if len(parts) != 2:
        raise click.UsageError(f"--rules must be OLD:NEW, got {value!r}")
    try:
        return presets[parts[0]], presets[parts[1]]
    except KeyError as exc:
        raise click.UsageError(
            f"unknown rule set {exc.args[0]!r}; "
            f"available: {', '.join(sorted(presets))}") from None


def _parse_cpis(value: str) -> list[float]:
    try:
        cpis = [float(x) for x in value.split(",") if x.strip()]
    except ValueError:
        raise click.UsageError(f"--cpi must be a comma list of rates, got {value!r}")
    if not cpis:
        raise click.UsageError("--cpi list is empty")
    for c in cpis:
        if not 0.0 <= c <= 0.05:
            raise click.UsageError(
                f"cpi {c} outside the modeller's supported range [0, 0.05]")
    return cpis


def _assumptions(cpi: float, devaluation: str, **overrides) -> EconomicAssumptions:
    try:
        return EconomicAssumptions.modeller(cpi, devaluation=devaluation,
                                            **overrides)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None


def _with_delay(rules, delay_years: int | None):
    if delay_years is None:
        return rules
    if rules.cap_rule.kind is not CapKind.HARD:
        raise click.UsageError("--delay-years applies only to hard-cap rules")
    cap = CapRule.hard(rules.cap_rule.cap, delay_years)
    return dataclasses.replace(rules, cap_rule=cap)


def _round_result(result):
    def r10(x: float) -> float:
        return round(x / 10.0) * 10.0

    return dataclasses.replace(result, income_66=r10(result.income_66),
                               income_86=r10(result.income_86))


def _result_dict(result) -> dict:
    return {
        "income_66": round(result.income_66, 2),
        "income_86": round(result.income_86, 2),
        "db_66": round(result.db_66, 2),
        "dc_66": round(result.dc_66, 2),
        "rules": result.rules_id,
    }


@click.group()
@click.version_option(__version__, prog_name="pensionlab")
def cli() -> None:
    """USS pension projection engine and cohort impact analyzer."""


@cli.command()
@click.option("--dob", required=True, type=click.DateTime(["%Y-%m-%d"]),
              help="Date of birth (YYYY-MM-DD).")
@click.option("--salary", required=True, type=float, help="Current salary, £/year.")
@click.option("--cpi", required=True, type=float,
              help="Mean CPI assumption (fraction, 0-0.05).")
@click.option("--rules", default=DEFAULT_RULES, show_default=True,
              help="Rule-set pair OLD:NEW from the preset registry.")
@click.option("--retirement-age", default=66.0, show_default=True, type=float)
@click.option("--salary-growth", default=None, type=float,
              help="Override nominal salary growth (default 0.04).")
@click.option("--annuity-factor", default=None, type=float,
              help="Override the annuity factor (default: calibrated 48).")
@click.option("--devaluation", type=click.Choice(["uuk", "uss"]), default="uss",
              show_default=True, help="CPI-variance adjustment source.")
@click.option("--delay-years", default=None, type=int,
              help="Override the new rules' hard-cap delay.")
@click.option("--interp", type=click.Choice(["linear", "geometric"]),
              default="linear", show_default=True)
@click.option("--modeller-rounding", is_flag=True,
              help="Round incomes to the nearest £10 like the USS modeller.")
@click.option("--format", "fmt", type=click.Choice(["json", "text"]),
              default="json", show_default=True)
def project(dob: datetime, salary: float, cpi: float, rules: str,
            retirement_age: float, salary_growth: float | None,
            annuity_factor: float | None, devaluation: str,
            delay_years: int | None, interp: str, modeller_rounding: bool,
            fmt: str) -> None:
    """Project one member under an old/new rule-set pair."""
    rules_old, rules_new = _parse_rules(rules)
    rules_new = _with_delay(rules_new, delay_years)
    overrides = {}
    if salary_growth is not None:
        overrides["salary_growth"] = salary_growth
    if annuity_factor is not None:
        overrides["annuity_factor"] = annuity_factor
    assumptions = _assumptions(cpi, devaluation, **overrides)
    try:
        scenario = MemberScenario(dob.date(), salary,
                                  retirement_age=retirement_age)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None
    old, new = project_comparison(scenario, rules_old, rules_new, assumptions)
    if modeller_rounding:
        old, new = _round_result(old), _round_result(new)
    method = Interpolation(interp)
    loss = future_loss(old, new, method)
    payload = {
        "scenario": {"dob": scenario.date_of_birth.isoformat(),
                     "salary": salary, "cpi": cpi,
                     "retirement_age": retirement_age},
        "old": _result_dict(old),
        "new": _result_dict(new),
        "loss": {"interpolation": interp,
                 "percent_loss": round(loss.percent_loss, 6),
                 "monetary_loss": round(loss.monetary_loss, 2)},
    }
    if fmt == "json":
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        click.echo(f"Old rules ({old.rules_id}):  £{old.income_66:,.0f} at 66, "
                   f"£{old.income_86:,.0f} at 86")
        click.echo(f"New rules ({new.rules_id}):  £{new.income_66:,.0f} at 66, "
                   f"£{new.income_86:,.0f} at 86")
        click.echo(f"Future-pension loss ({interp}): "
                   f"{loss.percent_loss * 100:.1f}%  "
                   f"(£{loss.monetary_loss:,.0f} over 20 years of retirement)")


def _grid_rows(cells: list[CellLoss], attr: str, scale: float):
    """Cells back into heat-map orientation with the published sign."""
    salary_labels = list(dict.fromkeys(c.salary_label for c in cells))
    age_labels = list(dict.fromkeys(c.age_label for c in cells))
    table = {(c.salary_label, c.age_label): -getattr(c, attr) * scale
             for c in cells}
    yield ["salary_band", *age_labels]
    for s in salary_labels:
        yield [s, *[f"{table[s, a]:.1f}" for a in age_labels]]


def _summary_dict(dist) -> dict:
    return {
        "q1": round(dist.q1, 3), "q2": round(dist.q2, 3),
        "q3": round(dist.q3, 3), "mean": round(dist.mean, 3),
        "mode_bin": list(dist.mode_bin),
        "global_monetary_loss": round(dist.global_monetary_loss, 2),
        "population": dist.population,
    }


def _cohort_report(cells: list[CellLoss]) -> dict:
    report = {}
    for label, group in (("all", cells),
                         ("under_40", filter_cohort(cells, age_below=40.0)),
                         ("under_40k", filter_cohort(cells,
                                                     salary_below=40_000.0))):
        report[label] = {
            "percent": _summary_dict(summarize(group, "percent")),
            "money": _summary_dict(summarize(group, "money")),
        }
    return report


def _write_rows(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


@cli.command()
@click.option("--heatmap", "heatmap_path", type=click.Path(), default=None,
              help="Heat-map CSV (default: bundled UUK heat map).")
@click.option("--rules", default=DEFAULT_RULES, show_default=True)
@click.option("--cpi", default=DEFAULT_CPIS, show_default=True,
              help="Comma list of CPI assumptions.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default="cohort_out", show_default=True)
@click.option("--interp", type=click.Choice(["linear", "geometric"]),
              default="linear", show_default=True)
@click.option("--devaluation", type=click.Choice(["uuk", "uss"]),
              default="uss", show_default=True)
@click.option("--modeller-rounding", is_flag=True)
@click.option("--replay", is_flag=True,
              help="Aggregate the bundled published CPI-2.8% loss grids "
                   "instead of running the engine.")
def cohort(heatmap_path: str | None, rules: str, cpi: str, out_dir: str,
           interp: str, devaluation: str, modeller_rounding: bool,
           replay: bool) -> None:
    """Run the cohort analysis and write grids, summaries and histograms."""
    rules_old, rules_new = _parse_rules(rules)
    cpis = _parse_cpis(cpi)
    method = Interpolation(interp)
    try:
        heatmap = (load_heatmap(heatmap_path) if heatmap_path
                   else bundled_heatmap())
    except (HeatMapError, OSError) as exc:
        raise click.ClickException(
            f"cannot load heat map {heatmap_path or '(bundled)'}: {exc}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if replay:
            pct, gbp = bundled_loss_grids()
            cells = replay_losses(heatmap, pct, gbp)
            report = _cohort_report(cells)
            with open(out / "summary_replay.json", "w") as fh:
                json.dump(report, fh, indent=2, sort_keys=True)
            g = report["all"]["money"]["global_monetary_loss"]
            click.echo(f"replay (published CPI-2.8% grids): "
                       f"mean {report['all']['percent']['mean']:.1f}%  "
                       f"global £{g / 1e9:.2f}bn -> {out / 'summary_replay.json'}")
            return
        for c in cpis:
            assumptions = _assumptions(c, devaluation)
            cells = cohort_losses(heatmap, rules_old, rules_new, assumptions,
                                  method, modeller_rounding)
            tag = f"cpi{c * 1000:.0f}"
            _write_rows(out / f"loss_percent_{tag}.csv",
                        _grid_rows(cells, "percent_loss", 100.0))
            _write_rows(out / f"loss_gbp_thousands_{tag}.csv",
                        _grid_rows(cells, "monetary_loss", 1e-3))
            report = _cohort_report(cells)
            with open(out / f"summary_{tag}.json", "w") as fh:
                json.dump(report, fh, indent=2, sort_keys=True)
            dist = summarize(cells, "percent")
            edges, groups, matrix = dist.histogram
            rows = [["loss_bin_low", *groups]]
            rows += [[f"{e:.0f}", *[f"{v:.0f}" for v in row]]
                     for e, row in zip(edges, matrix)]
            _write_rows(out / f"histogram_percent_{tag}.csv", rows)
            click.echo(f"cpi {c:.3f}: mean {dist.mean:.1f}%  "
                       f"Q {dist.q1:.0f}/{dist.q2:.0f}/{dist.q3:.0f}  global "
                       f"£{report['all']['money']['global_monetary_loss'] / 1e9:.2f}bn"
                       f" -> {out}")
    except OSError as exc:
        raise click.ClickException(f"cannot write to {out}: {exc}")


def _table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(r[i])) for r in [headers, *rows])
              for i in range(len(headers))]
    lines = ["  ".join(str(h).ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines)


# Published reference values (whole-percent rounding as printed).
_EROSION_COLUMNS = [
    # label, devaluation (None = derive from a and c), a, c, refs for
    # (d%, 20y, 40y, 60y, average 66-86)
    ("2020 USS c=2.1%", 0.004, None, 0.021, (0.4, -8, -15, -21, -18)),
    ("2021 UUK c=2.5%", None, 0.005, 0.025, (0.5, -10, -18, -26, -22)),
    ("2021 USS c=2.5%", 0.0058, None, 0.025, (0.58, -11, -21, -29, -25)),
    ("2022 UUK c=2.8%", None, 0.005, 0.028, (0.8, -15, -27, -38, -33)),
    ("2022 USS c=2.8%", None, 0.0059, 0.028, (0.87, -15, -29, -41, -35)),
]

_ONEYEAR_REFS = {  # (cpi, devaluation, delay) -> published percent
    (0.025, "uuk", 0): 27.2, (0.025, "uuk", 2): 26.6,
    (0.025, "uss", 0): 28.7, (0.025, "uss", 2): 28.0,
    (0.028, "uuk", 0): 32.0, (0.028, "uuk", 2): 31.1,
    (0.028, "uss", 0): 33.4, (0.028, "uss", 2): 32.4,
    (0.030, "uuk", 0): 35.0, (0.030, "uuk", 2): 33.9,
    (0.030, "uss", 0): 36.3, (0.030, "uss", 2): 35.1,
}

_QUARTILE_REFS = {  # (group, cpi) -> (q1, q2, q3, mean)
    ("all", 0.025): (22, 29, 33, 27), ("all", 0.028): (26, 33, 37, 31),
    ("all", 0.030): (28, 35, 40, 33),
    ("under_40", 0.025): (26, 32, 35, 30), ("under_40", 0.028): (30, 37, 40, 35),
    ("under_40", 0.030): (33, 39, 43, 38),
}

_PERSONA_REFS = {  # (persona, cpi) -> published "our value" percent
    ("aria", 0.025): 25, ("aria", 0.028): 29, ("aria", 0.030): 33,
    ("bryn", 0.025): 35, ("bryn", 0.028): 39, ("bryn", 0.030): 41,
    ("chloe", 0.025): 31, ("chloe", 0.028): 34, ("chloe", 0.030): 36,
}


def _tables_erosion() -> str:
    rows = []
    for label, d_direct, a, c, refs in _EROSION_COLUMNS:
        d = d_direct if d_direct is not None else annual_devaluation(0.025, a, c)
        computed = [d * 100,
                    (erosion_factor(d, 20) - 1) * 100,
                    (erosion_factor(d, 40) - 1) * 100,
                    (erosion_factor(d, 60) - 1) * 100,
                    -average_retirement_erosion(d) * 100]
        rows.append([label] + [f"{v:.2f} (pub {r}, {v - r:+.2f})"
                               for v, r in zip(computed, refs)])
    headers = ["assumptions", "d %", "20y %", "40y %", "60y %", "avg 66-86 %"]
    return _table(headers, rows)


def _tables_oneyear() -> str:
    heatmap = bundled_heatmap()
    presets = load_presets()
    rows = []
    for cpi in (0.025, 0.028, 0.030):
        for dev in ("uuk", "uss"):
            for delay, new_id in ((0, "uuk2021"), (2, "uuk2022_adjusted")):
                assumptions = EconomicAssumptions.published(cpi, devaluation=dev)
                got = global_one_year_loss(heatmap, presets["uss2021"],
                                           presets[new_id], assumptions) * 100
                ref = _ONEYEAR_REFS[(cpi, dev, delay)]
                rows.append([f"{cpi * 100:.1f}%", dev, delay,
                             f"{got:.1f}", f"{ref:.1f}", f"{got - ref:+.2f}"])
    return _table(["CPI", "devaluation", "delay", "computed %", "published %",
                   "delta pp"], rows)


def _tables_quartiles() -> str:
    heatmap = bundled_heatmap()
    presets = load_presets()
    rows = []
    for cpi in (0.025, 0.028, 0.030):
        cells = cohort_losses(heatmap, presets["uss2021"], presets["uuk2021"],
                              EconomicAssumptions.modeller(cpi))
        for group, sel in (("all", cells),
                           ("under_40", filter_cohort(cells, age_below=40.0))):
            d = summarize(sel, "percent")
            q1, q2, q3, mean = _QUARTILE_REFS[(group, cpi)]
            rows.append([f"{cpi * 100:.1f}%", group,
                         f"{d.q1:.0f}/{d.q2:.0f}/{d.q3:.0f} mean {d.mean:.1f}",
                         f"{q1}/{q2}/{q3} mean {mean}",
                         f"{d.mean - mean:+.2f}"])
    return _table(["CPI", "group", "computed Q1/Q2/Q3", "published",
                   "mean delta pp"], rows)


def _tables_personas() -> str:
    rows = []
    for name in PERSONAS:
        for cpi in (0.025, 0.028, 0.030):
            got = persona_check(name, EconomicAssumptions.modeller(cpi)) * 100
            ref = _PERSONA_REFS[(name, cpi)]
            rows.append([name.capitalize(), f"{cpi * 100:.1f}%", f"{got:.1f}",
                         f"{ref}", f"{got - ref:+.2f}"])
    return _table(["persona", "CPI", "computed %", "published %", "delta pp"],
                  rows)


@cli.command()
@click.argument("name", type=click.Choice(["erosion", "oneyear", "quartiles",
                                           "personas"]))
def tables(name: str) -> None:
    """Reproduce a published reference table with computed values and deltas."""
    emit = {"erosion": _tables_erosion, "oneyear": _tables_oneyear,
            "quartiles": _tables_quartiles, "personas": _tables_personas}[name]
    click.echo(emit())


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=None, type=int,
              help="Port (default: $PENSIONLAB_PORT or 8080).")
def serve(host: str, port: int | None) -> None:
    """Start the stateless projection API."""
    import uvicorn

    from .service import app

    if port is None:
        port = int(os.environ.get("PENSIONLAB_PORT", "8080"))
    uvicorn.run(app, host=host, port=port)


def main() -> None:  # pragma: no cover - console-script shim
    try:
        cli.main(standalone_mode=True)
    except HeatMapError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":  # pragma: no cover
    main()
