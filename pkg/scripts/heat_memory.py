"""Heat equation with fading memory: order chosen by tolerance, error over frequency.

    python3 scripts/heat_memory.py --grid 32 --tols 1e-4 1e-6 1e-8 --out results/heat
"""
import argparse
import csv
import warnings
from pathlib import Path

from dropmor import drop_reduce, heat_fading_memory, log_freq_grid, make_samples, projection_pair
from dropmor.analysis import sweep_error


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", type=int, default=32)
    ap.add_argument("--nsamples", type=int, default=100)
    ap.add_argument("--tols", type=float, nargs="+", default=[1e-4, 1e-6, 1e-8])
    ap.add_argument("--out", default="results/heat")
    args = ap.parse_args()
    warnings.simplefilter("ignore", RuntimeWarning)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    sys = heat_fading_memory(args.grid)
    pair = projection_pair(sys, make_samples((1e-2, 1e2), args.nsamples))
    grid = log_freq_grid(1e-2, 1e2, 200)
    with open(out / "summary.csv", "w", newline="") as fh:
        summary = csv.writer(fh)
        summary.writerow(["rel_tol", "r", "max_abs", "max_rel", "l2_err"])
        for tol in args.tols:
            red = drop_reduce(sys, pair, rel_tol=tol)
            err = sweep_error(sys, red, grid)
            summary.writerow([repr(tol), red.n, repr(err.max_abs), repr(err.max_rel),
                              repr(err.l2_err)])
            with open(out / f"error_tol{tol:g}.csv", "w", newline="") as g:
                w = csv.writer(g)
                w.writerow(["omega", "H_norm", "abs_err", "rel_err"])
                for i, om in enumerate(err.omegas):
                    w.writerow([repr(om), repr(err.H_norm[i, 0]), repr(err.abs_err[i, 0]),
                                repr(err.rel_err[i, 0])])
            print(f"n={sys.n} rel_tol={tol:g}: r={red.n} max_rel={err.max_rel:.3e} "
                  f"l2={err.l2_err:.3e}")


if __name__ == "__main__":
    main()
