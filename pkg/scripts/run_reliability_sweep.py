#!/usr/bin/env python3
"""Run the shipped reliability-ratio sweep and print the summary.

Writes results/reliability_sweep.csv and results/reliability_sweep_summary.csv.
"""

import io
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from mrpr.experiment import (load_config, run_sweep, save_csv, summarize,
                             write_summary_csv)


def main() -> None:
    config = load_config(REPO / "configs" / "reliability_sweep.cfg")
    result = run_sweep(config, measure_walltime=True)
    outdir = REPO / "results"
    outdir.mkdir(exist_ok=True)
    save_csv(result, outdir / "reliability_sweep.csv")
    summary = summarize(result)
    with open(outdir / "reliability_sweep_summary.csv", "w", newline="") as fh:
        write_summary_csv(summary, fh)
    buf = io.StringIO()
    write_summary_csv(summary, buf)
    print(buf.getvalue())
    print(f"rows: {len(result.rows)} -> {outdir / 'reliability_sweep.csv'}")


if __name__ == "__main__":
    main()
