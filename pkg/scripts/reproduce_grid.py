"""Remaining entropy and failure rate over every (offset, repetitions) configuration."""
import argparse
from pathlib import Path

import numpy as np

from srampuf.analysis import reliability, reports
from srampuf.fuzzy_extractor import FuzzyConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bias", type=float, default=0.596)
    ap.add_argument("--pe", type=float, default=0.03, help="i.i.d. per-cell error probability")
    ap.add_argument("--measure", choices=("shannon", "min"), default="shannon")
    ap.add_argument("--mc-trials", type=int, default=0, help="Monte Carlo trials per cell (0 = skip)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/grid.csv"))
    args = ap.parse_args()

    rows = reliability.assess_grid(args.bias, args.pe, measure=args.measure)
    if args.mc_trials:
        rng = np.random.default_rng(args.seed)
        rows = [reliability.ExtractorAssessment(**{**a.to_dict(), "empirical_failure_rate": reliability.simulate_failures(
            FuzzyConfig(a.offset_len_bytes, a.repetitions), args.mc_trials, rng, p_e=args.pe).rate}) for a in rows]
    reports.write_csv(args.out, "srampuf.assessment/1", reports.ASSESS_HEADER, reports.assessment_rows(rows))
    print(f"{'offset':>6} {'r':>3} {'sram bits':>9} {'H_rem':>7} {'P_fail':>10}")
    for a in rows:
        print(f"{a.offset_len_bytes:6d} {a.repetitions:3d} {a.sram_bits:9d} {a.remaining_entropy_bits:7.1f} "
              f"{a.analytic_failure_rate:10.3e}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
