"""Delay benchmark: DROP against quadrature-Gramian balanced truncation.

Writes per-frequency relative errors of both methods for each order.

    python3 scripts/delay_comparison.py --n 500 --orders 8 10 12 14 --out results/delay
"""
import argparse
import csv
import time
import warnings
from pathlib import Path

import numpy as np

from dropmor import delay_system, drop_reduce, log_freq_grid, make_samples, projection_pair
from dropmor.analysis import bt_compare, gramian_quadrature, sweep_error


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--orders", type=int, nargs="+", default=[12])
    ap.add_argument("--nsamples", type=int, default=1000)
    ap.add_argument("--nodes", type=int, default=1000, help="quadrature nodes for the Gramians")
    ap.add_argument("--real-bases", action="store_true", help="realify V and W before DROP")
    ap.add_argument("--out", default="results/delay")
    args = ap.parse_args()
    warnings.simplefilter("ignore", RuntimeWarning)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    sys = delay_system(args.n)
    grid = log_freq_grid(1e-2, 1e4, 1000)
    t0 = time.perf_counter()
    pair = projection_pair(sys, make_samples((1e-2, 1e4), args.nsamples),
                           realify_bases=args.real_bases)
    t_bases = time.perf_counter() - t0
    t0 = time.perf_counter()
    gram = gramian_quadrature(sys, np.logspace(-2, 4, args.nodes))
    t_gram = time.perf_counter() - t0
    print(f"bases {t_bases:.1f}s, Gramians {t_gram:.1f}s")

    with open(out / "summary.csv", "w", newline="") as fh:
        summary = csv.writer(fh)
        summary.writerow(["r", "drop_max_rel", "bt_max_rel", "ratio"])
        for r in args.orders:
            drop = sweep_error(sys, drop_reduce(sys, pair, order=r), grid)
            bt_red, _ = bt_compare(sys, r, None, gramians=gram)
            bt = sweep_error(sys, bt_red, grid)
            summary.writerow([r, repr(drop.max_rel), repr(bt.max_rel), repr(drop.max_rel / bt.max_rel)])
            with open(out / f"error_r{r}.csv", "w", newline="") as g:
                w = csv.writer(g)
                w.writerow(["omega", "H_norm", "drop_rel_err", "bt_rel_err"])
                for i, om in enumerate(drop.omegas):
                    w.writerow([repr(om), repr(drop.H_norm[i, 0]), repr(drop.rel_err[i, 0]),
                                repr(bt.rel_err[i, 0])])
            print(f"r={r:3d}  DROP {drop.max_rel:.3e}  BT {bt.max_rel:.3e}  "
                  f"ratio {drop.max_rel / bt.max_rel:.1e}")


if __name__ == "__main__":
    main()
