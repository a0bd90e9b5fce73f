#!/usr/bin/env python3
"""Headline experiment: conductance versus chain length.

Sweeps the block count at fixed block dimension, fits the log-log slope
of the ensemble-mean conductance (expected -1), and the slopes of its
decomposition: the kernel double sum (expected 0) and the partition sum
(expected +1).
"""

import argparse

from heatchain.experiments import ExperimentConfig, emit_outputs, run_scaling_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--realizations", type=int, default=50)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--seed", type=int, default=20260810)
    ap.add_argument("--out-dir", default=None)
    args = ap.parse_args()

    config = ExperimentConfig(
        experiment="scaling",
        k_list=(2, 3, 4, 6, 8),
        n=args.n,
        n_realizations=args.realizations,
        seed=args.seed,
        out_dir=args.out_dir,
    )
    record = run_scaling_experiment(config)
    paths = emit_outputs(record, config.formats, config.resolved_out_dir())
    f = record.fits
    print(f"slope C         = {f['slope_C']:+.4f} +- {f['slope_C_stderr']:.4f}   (expected -1)")
    print(f"slope numerator = {f['slope_numerator']:+.4f} +- {f['slope_numerator_stderr']:.4f}   (expected 0)")
    print(f"slope Z         = {f['slope_Z']:+.4f} +- {f['slope_Z_stderr']:.4f}   (expected +1)")
    for p in paths:
        print("wrote", p)


if __name__ == "__main__":
    main()
