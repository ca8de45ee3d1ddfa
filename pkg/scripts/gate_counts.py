"""Lowered gate counts and qubit totals of the U_L block encoding.

    python3 scripts/gate_counts.py --nx 8 16 32 64 --nt 64 128 256 --out gate_counts.csv
"""
import argparse
import csv

from qlbm.circuits import build_UL
from qlbm.circuits.lowering import count_gates
from qlbm.lattice import Geometry
from qlbm.reference import FlowParams

COLUMNS = ["nx", "ny", "nt", "toffoli", "cnot", "ry", "h", "x", "swap", "qubits_total", "qubits_ancilla"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", type=int, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--nt", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--W", type=int, default=1)
    ap.add_argument("--out", default="gate_counts.csv")
    args = ap.parse_args()
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for nx in args.nx:
            geom = Geometry.with_default_obstacle(nx, nx) if nx >= 8 else Geometry(nx, nx)
            params = FlowParams.for_geometry(geom, w_idle=args.W)
            for nt in args.nt:
                c = count_gates(build_UL(geom, params, nt, args.W))
                w.writerow([nx, nx, nt, c.toffoli, c.cnot, c.ry, c.h, c.x, c.swap, c.qubits_total, c.qubits_ancilla])
                print(f"nx={nx:4d} nt={nt:4d} toffoli={c.toffoli:6d} ry={c.ry} qubits={c.qubits_total}", flush=True)
    print(args.out)


if __name__ == "__main__":
    main()
