"""Min-entropy estimator convergence: empirical averages vs. the expected estimator."""
import argparse
from pathlib import Path

import numpy as np

from srampuf.analysis import entropy, reports


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, nargs="+", default=[0.5, 0.596, 0.7])
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 50, 100, 200, 400, 700, 1000, 5000])
    ap.add_argument("--populations", type=int, default=30)
    ap.add_argument("--positions", type=int, default=4096)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/convergence.csv"))
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    rows = []
    for p in args.p:
        for n in args.sizes:
            ones = rng.binomial(n, p, size=(args.populations, args.positions))
            per_bit = entropy.empirical_min_entropy(ones, n)
            rows.append((p, n, entropy.expected_estimator(p, n), per_bit.mean(), per_bit[:, 0].std(ddof=1),
                         entropy.estimator_std_error(n)))
            print(f"p={p:.3f} n={n:5d} expected={rows[-1][2]:.4f} empirical={rows[-1][3]:.4f} "
                  f"per-bit sd={rows[-1][4]:.4f} 1/sqrt(n)={rows[-1][5]:.4f}")
    reports.write_csv(args.out, "srampuf.convergence_study/1",
                      ("p", "n", "expected", "empirical_mean", "per_bit_sd", "inv_sqrt_n"), rows)


if __name__ == "__main__":
    main()
