"""1/sigma_min and kappa of the global system as functions of the simulated time T.

    python3 scripts/spectral_sweep.py --nx 8 16 --T 8 16 32 64 --out spectral_sweep.csv
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from qlbm import spectral  # noqa: E402
from _common import channel  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nx", type=int, nargs="+", default=[8, 16])
    ap.add_argument("--T", type=float, nargs="+", default=[8, 16, 32, 64])
    ap.add_argument("--h", type=float, default=0.5)
    ap.add_argument("--out", default="spectral_sweep.csv")
    args = ap.parse_args()
    reports = []
    for nx in args.nx:
        inv = []
        for T in args.T:
            nt = int(round(T / args.h))
            r = spectral.report(channel(nx, nt)[2], nx, nx)
            reports.append(r)
            inv.append(1.0 / r.sigma_min)
            print(f"nx={nx:3d} T={T:6.1f} 1/sigma_min={1 / r.sigma_min:9.3f} "
                  f"sigma_max={r.sigma_max:.4f} kappa={r.kappa:9.2f}", flush=True)
        if len(args.T) > 1:
            print(f"nx={nx}: log-log slope of 1/sigma_min vs T = {spectral.loglog_slope(args.T, inv):.3f}")
    spectral.write_csv(args.out, reports)
    print(args.out)


if __name__ == "__main__":
    main()
