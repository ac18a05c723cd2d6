"""Lattice-denoised TBMA MSE for several resource counts N."""

import argparse

import numpy as np

from tbma_aircomp.experiment import Scheme, SweepSpec, run_sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, nargs="+", default=[16, 32, 64, 128])
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--max-trials", type=int, default=200_000)
    args = ap.parse_args()

    rows = {}
    for N in args.N:
        spec = SweepSpec(N=N, trials=args.trials, max_trials=args.max_trials,
                         schemes=[Scheme.TBMA_NAIVE, Scheme.TBMA_LATTICE])
        rows[N] = run_sweep(spec)
    print("snr_db," + ",".join(f"lattice_N{N},naive_N{N}" for N in args.N))
    for snr in SweepSpec().snr_points_db:
        vals = []
        for N in args.N:
            vals += [rows[N].point(Scheme.TBMA_LATTICE, snr).mse_empirical, rows[N].point(Scheme.TBMA_NAIVE, snr).mse_empirical]
        print(f"{snr:g}," + ",".join(f"{v:.6e}" for v in vals))
    for a, b in zip(args.N, args.N[1:]):
        ratio = rows[b].point(Scheme.TBMA_NAIVE, 10.0).mse_empirical / rows[a].point(Scheme.TBMA_NAIVE, 10.0).mse_empirical
        print(f"# naive MSE N={b} vs N={a} at 10 dB: {10 * np.log10(ratio):.2f} dB")


if __name__ == "__main__":
    main()
