#!/usr/bin/env python3
"""Order-in-dT experiment: apparent deviations from equilibrium.

Runs the dT sweep three times on a small chain: equal couplings, similar
couplings (bath-1 strength 3x) with the class reference temperature, and
the same similar fixture with the deliberately wrong arithmetic-mean
reference.  The first two deviations are second order; the wrong choice
degrades to first order.
"""

import argparse

from heatchain.experiments import ExperimentConfig, emit_outputs, run_equilibrium_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--seed", type=int, default=20260810)
    ap.add_argument("--out-dir", default=None)
    args = ap.parse_args()

    cases = [
        ("equal couplings", dict(a0_1=1.0, a0_2=1.0), "class"),
        ("similar (a=3), class t0", dict(a0_1=3.0, a0_2=1.0), "class"),
        ("similar (a=3), WRONG mean t0", dict(a0_1=3.0, a0_2=1.0), "mean"),
    ]
    for label, strengths, convention in cases:
        config = ExperimentConfig(
            experiment="equilibrium",
            k=args.k,
            n=args.n,
            v=0.25,
            t0_convention=convention,
            n_realizations=1,
            seed=args.seed,
            out_dir=args.out_dir,
            **{k: v / 6.2831853071795864769 for k, v in strengths.items()},
        )
        record = run_equilibrium_experiment(config)
        print(f"{label}: slope exact-vs-gibbs = {record.fits['slope_exact_vs_gibbs']:.3f}, "
              f"slope pert-vs-exact = {record.fits['slope_pert_vs_exact']:.3f}")
        if convention == "class" and strengths["a0_1"] == 1.0:
            emit_outputs(record, config.formats, config.resolved_out_dir())


if __name__ == "__main__":
    main()
