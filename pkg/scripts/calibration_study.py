"""Population statistics of the simulator next to the reference measurements."""
import argparse

import numpy as np

from srampuf import sram_model as sm
from srampuf.analysis import metrics, reliability
from srampuf.fuzzy_extractor import FuzzyConfig

TARGETS = {
    "mean hamming weight (aged)": 0.508,
    "inter-device distance": 0.48,
    "inter-device min-entropy": 0.75,
    "intra-device distance": 0.06,
    "intra-device min-entropy": 0.068,
    "max per-bit error": 0.086,
    "heavy - light weight": 0.0025,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--devices", type=int, default=700)
    ap.add_argument("--bits", type=int, default=16384)
    ap.add_argument("--readouts", type=int, default=700, help="repeated readouts of device 0")
    args = ap.parse_args()

    pop = sm.calibrated_population(args.seed, args.devices, args.bits, aged=True)
    firsts = np.stack([sm.sample_region(pop, d, [0], 0, pop.n_bits)[0] for d in range(pop.n_devices)])
    rs = sm.sample_region(pop, 0, range(args.readouts), 0, pop.n_bits)
    inter, intra = metrics.inter_stats(firsts), metrics.intra_stats(rs)
    heavy = pop.heavy_use()
    got = {
        "mean hamming weight (aged)": firsts.mean(),
        "inter-device distance": inter.mean_distance,
        "inter-device min-entropy": inter.hmin_hat,
        "intra-device distance": intra.mean_distance,
        "intra-device min-entropy": intra.hmin_hat,
        "max per-bit error": metrics.max_bit_error(rs, pop.device_pattern(0)).maximum,
        "heavy - light weight": firsts[heavy].mean() - firsts[~heavy].mean(),
    }
    for k, target in TARGETS.items():
        print(f"{k:28s} simulated {got[k]:.4f}   reference {target:.4f}")
    counts, _ = np.histogram(metrics.bit_alias(firsts), bins=20, range=(0, 1))
    print("bit-alias histogram (20 bins):", " ".join(map(str, counts)))
    corr = metrics.correlation_matrix(firsts[:100]).matrix
    print(f"median pairwise correlation (100 devices): {np.median(corr[np.triu_indices(100, 1)]):.4f}")
    cfg = FuzzyConfig(24, 5)
    rates = [reliability.heterogeneous_failure_rate(pop.flip_probs(d)[:cfg.sram_len_bits], cfg) for d in range(50)]
    print(f"(24 B, r=5) heterogeneous failure rate over 50 devices: median {np.median(rates):.2e}, max {max(rates):.2e}")


if __name__ == "__main__":
    main()
