"""Fault-tolerant T-gate estimates for one inverse-polynomial solve.

    python3 scripts/tgate_estimates.py --nx 16 256 65536 --T 128 256 512 1024 --out tgates.csv

U_L is counted at nt = T / h rounded up to a power of two.
"""
import argparse
import csv

from qlbm.circuits import build_UL
from qlbm.circuits.lowering import count_gates
from qlbm.circuits.resources import estimate_tgates, steps_for
from qlbm.lattice import Geometry
from qlbm.reference import FlowParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", type=int, nargs="+", default=[2**4, 2**8, 2**16, 2**32, 2**53])
    ap.add_argument("--T", type=float, nargs="+", default=[128, 256, 512, 1024])
    ap.add_argument("--h", type=float, default=0.5)
    ap.add_argument("--eps-base", type=float, default=0.01)
    ap.add_argument("--c", type=float, default=10.0)
    ap.add_argument("--out", default="tgates.csv")
    args = ap.parse_args()
    # tau depends on ny; the counts only use it through rotation angles, so the 8x8 value is kept
    params = FlowParams.for_geometry(Geometry(8, 8))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["nx", "T", "kappa_fit", "degree", "t_count"])
        for nx in args.nx:
            for T in args.T:
                nt = steps_for(T, args.h)
                counts = count_gates(build_UL(Geometry(nx, nx), params, nt))
                e = estimate_tgates(counts, T, args.eps_base, args.c)
                w.writerow([nx, f"{T:.17g}", f"{e.kappa_fit:.17g}", f"{e.degree:.17g}", f"{e.t_count:.17g}"])
                print(f"nx=2^{nx.bit_length() - 1:<3d} T={T:7.1f} N_T={e.t_count:.3e}", flush=True)
    print(args.out)


if __name__ == "__main__":
    main()
