#!/usr/bin/env python3
"""Spectral comparison: ensemble Monte Carlo against the self-consistent
Green functions (level density and surface strength function on one grid)."""

import argparse

from heatchain.experiments import ExperimentConfig, emit_outputs, run_spectral_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--realizations", type=int, default=20)
    ap.add_argument("--seed", type=int, default=20260810)
    ap.add_argument("--out-dir", default=None)
    args = ap.parse_args()

    config = ExperimentConfig(
        experiment="spectral",
        k=args.k,
        n=args.n,
        w=0.25,
        v=(0.5 / args.n) ** 0.5,
        n_realizations=args.realizations,
        seed=args.seed,
        out_dir=args.out_dir,
    )
    record = run_spectral_experiment(config)
    paths = emit_outputs(record, config.formats, config.resolved_out_dir())
    agg = record.aggregates
    print(f"bulk density max relative deviation = {agg['bulk_density_max_rel_dev']:.4f}")
    print(f"strength width: ensemble {agg['sf_width_mc']:.4f} vs analytic {agg['sf_width_analytic']:.4f}")
    for p in paths:
        print("wrote", p)


if __name__ == "__main__":
    main()
