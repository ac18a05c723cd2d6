"""MSE vs E/N0 for DA and both TBMA receivers at N=64, K=1000.

Writes a CSV (and a PNG if matplotlib is available) next to ``--out``.
"""

import argparse
import sys

from tbma_aircomp.cli import emit_curves
from tbma_aircomp.experiment import Scheme, SweepSpec, crossover_search, empirical_crossover, run_sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--max-trials", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="fig3.csv")
    args = ap.parse_args()

    spec = SweepSpec(trials=args.trials, max_trials=args.max_trials, base_seed=args.seed)
    curve = run_sweep(spec, progress=lambda p: print(f"{p.scheme.value:>12} {p.snr_db:5.1f} dB {p.mse_empirical:.3e}", file=sys.stderr))
    emit_curves(curve, "csv", args.out, {"trials": args.trials, "max_trials": args.max_trials, "base_seed": args.seed})
    print(f"theory crossover DA/lattice: {crossover_search(spec, Scheme.DA, Scheme.TBMA_LATTICE):.2f} dB")
    print(f"empirical crossover DA/lattice: {empirical_crossover(curve, Scheme.DA, Scheme.TBMA_LATTICE):.2f} dB")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots()
    for scheme in spec.schemes:
        snr, mse = curve.series(scheme)
        theory = [curve.point(scheme, s).mse_theory for s in snr]
        (line,) = ax.semilogy(snr, mse, "o", label=f"{scheme.value} sim")
        ax.semilogy(snr, theory, "-", color=line.get_color(), label=f"{scheme.value} theory")
    ax.set_ylim(1e-9, 1)
    ax.set_xlabel("E/N0 (dB)")
    ax.set_ylabel("MSE")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.savefig(args.out.rsplit(".", 1)[0] + ".png", dpi=150)


if __name__ == "__main__":
    main()
