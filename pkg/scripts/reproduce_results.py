#!/usr/bin/env python3
"""End-to-end reproduction of the published analysis.

Writes per-cell loss grids, distribution summaries and histograms for
CPI 2.5/2.8/3.0% to ``reproduction_out/``, then prints the four
reference tables (erosion, one-year contribution loss, quartiles,
personas) with computed-vs-published deltas.

Equivalent CLI: ``pensionlab cohort --out reproduction_out`` followed by
``pensionlab tables <name>`` for each table.
"""

import subprocess
import sys

OUT = "reproduction_out"


def run(*args: str) -> None:
    print(f"\n$ pensionlab {' '.join(args)}")
    subprocess.run([sys.executable, "-m", "pensionlab.cli", *args],
                   check=True)


def main() -> None:
    run("cohort", "--out", OUT)
    run("cohort", "--replay", "--out", OUT)
    for table in ("erosion", "oneyear", "quartiles", "personas"):
        run("tables", table)
    print(f"\nGrids, summaries and histograms written to {OUT}/")


if __name__ == "__main__":
    main()
