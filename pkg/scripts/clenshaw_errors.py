"""Relative errors of the Chebyshev/Clenshaw solve against the forward solve and
the nonlinear reference for several (kappa, degree) pairs on the 8x8 channel.

    python3 scripts/clenshaw_errors.py --out clenshaw_errors.csv
"""
import argparse
import csv
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from qlbm.chebsolver import clenshaw_solve, inverse_poly, poly_sup_error  # noqa: E402
from qlbm.reference import rest_state, run_nonlinear  # noqa: E402
from qlbm.timesystem import extract_block, forward_solve, relative_error  # noqa: E402
from _common import channel  # noqa: E402

ROWS = [(3500, 35001), (3000, 15001), (3500, 17501), (3000, 30001)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", type=int, default=8)
    ap.add_argument("--nt", type=int, default=32)
    ap.add_argument("--alpha", type=float, default=32.0)
    ap.add_argument("--out", default="clenshaw_errors.csv")
    args = ap.parse_args()
    geom, params, sys_ = channel(args.nx, args.nt)
    y = forward_solve(sys_)
    nl = run_nonlinear(rest_state(geom), geom, params)[-1]
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kappa", "degree", "poly_sup_error", "rel_err_vs_linear", "rel_err_final_vs_nonlinear"])
        for kappa, d in ROWS:
            t0 = time.time()
            p = inverse_poly(kappa, d)
            yq = clenshaw_solve(sys_, args.alpha, p)
            e_lin = relative_error(yq, y)
            e_nl = relative_error(extract_block(yq, args.nt, sys=sys_), nl)
            w.writerow([kappa, d, f"{poly_sup_error(p):.17g}", f"{e_lin:.17g}", f"{e_nl:.17g}"])
            print(f"kappa={kappa} d={d}: vs linear {e_lin:.3e}, final vs nonlinear {e_nl:.3e} "
                  f"({time.time() - t0:.1f} s)", flush=True)
    print(args.out)


if __name__ == "__main__":
    main()
