"""Command-line entry point.

    qlbm reference    --config cfg.json
    qlbm build-matrix --config cfg.json
    qlbm spectral     --config cfg.json --nt 8 16 32 64 [--nx 8 16]
    qlbm solve        --config cfg.json [--check --max-error 5e-4]
    qlbm circuit verify|count --config cfg.json
    qlbm resources    --config cfg.json --T 128 256 512 1024 --nx 16 256

Exit codes: 0 success, 2 configuration error, 3 failed --check.
"""
from __future__ import annotations

import os

_threads = os.environ.get("QLBM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import csv
from dataclasses import dataclass, asdict, field, fields
import json
import logging
from pathlib import Path
import sys

import numpy as np

from . import carleman, chebsolver, spectral, statevec, timesystem
from .circuits import build_UA, build_UL
from .circuits.lowering import count_gates
from .circuits.resources import estimate_tgates, steps_for
from .lattice import Geometry, GeometryError, Obstacle
from .reference import FlowParams, macroscopics, rest_state, run_linear, run_nonlinear

log = logging.getLogger("qlbm")

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    nx: int = 8
    ny: int | None = None
    nt: int = 32
    h: float = 0.5
    re: float = 1.0
    ma: float = 0.01
    tau: float | None = None
    W: int = 1
    obstacle: object = "default"
    kappa: float | None = None
    degree: int | None = None
    alpha: object = None
    mode: str = "physical"
    circuit: str = "UA"
    out_dir: str = "out"

    def __post_init__(self):
        if self.ny is None:
            self.ny = self.nx
        for name in ("nx", "ny", "nt", "W"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"{name} must be an integer, got {v!r}")
        if self.mode not in carleman.MODES:
            raise ConfigError(f"mode must be one of {carleman.MODES}")
        if self.circuit not in ("UA", "UL"):
            raise ConfigError("circuit must be 'UA' or 'UL'")
        ob = self.obstacle
        if not (ob in ("default", "none", None) or (isinstance(ob, dict) and set(ob) == {"x0", "y0", "wx", "wy"})):
            raise ConfigError("obstacle must be 'default', 'none' or {x0, y0, wx, wy}")
        if self.degree is not None and (self.degree < 1 or self.degree % 2 == 0):
            raise ConfigError("degree must be a positive odd integer")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc}") from exc

    def geometry(self, nx: int | None = None, ny: int | None = None) -> Geometry:
        nx = self.nx if nx is None else nx
        ny = (self.ny if nx == self.nx else nx) if ny is None else ny
        try:
            if self.obstacle == "default":
                return Geometry.with_default_obstacle(nx, ny)
            if self.obstacle in ("none", None):
                return Geometry(nx, ny)
            return Geometry(nx, ny, Obstacle(**self.obstacle))
        except GeometryError as exc:
            raise ConfigError(str(exc)) from exc

    def params(self, geom: Geometry, nt: int | None = None) -> FlowParams:
        nt = self.nt if nt is None else nt
        try:
            if self.tau is not None:
                return FlowParams(self.re, self.ma, self.tau, self.h, nt, self.W)
            return FlowParams.for_geometry(geom, re=self.re, ma=self.ma, h=self.h, nt=nt, w_idle=self.W)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def out(self) -> Path:
        p = Path(self.out_dir)
        p.mkdir(parents=True, exist_ok=True)
        return p


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _system(cfg: RunConfig, geom: Geometry, params: FlowParams, mode: str | None = None):
    mode = cfg.mode if mode is None else mode
    At = carleman.build_A_tilde(geom, params, mode)
    b = carleman.build_forcing(geom, params, mode)
    y0 = rest_state(geom)
    if mode == "padded":
        y0 = carleman.embed(y0, geom)
    return timesystem.assemble(At, b, y0, params.nt, cfg.W, params.h, mode)


def _physical_block(sys, y, k, geom):
    blk = timesystem.extract_block(y, k, sys=sys)
    return carleman.project(blk, geom) if sys.mode == "padded" else blk


# ---- commands ------------------------------------------------------------

def cmd_reference(cfg: RunConfig) -> list[Path]:
    """Nonlinear and linear references from rest; per-step fields and divergence."""
    geom = cfg.geometry()
    params = cfg.params(geom)
    f0 = rest_state(geom)
    nl = run_nonlinear(f0, geom, params)
    At = carleman.build_A_tilde(geom, params)
    lin = run_linear(f0, At, carleman.build_forcing(geom, params), params.nt, params.h)
    out = cfg.out()
    files = []
    for name, traj in (("nonlinear", nl), ("linear", lin)):
        rows = []
        for k, f in enumerate(traj):
            m = macroscopics(f, geom)
            for x in range(geom.nx):
                for y in range(geom.ny):
                    rows.append((k, k * params.h, x, y, m.rho[x, y], m.u[x, y, 0], m.u[x, y, 1]))
        p = out / f"fields_{name}.csv"
        write_csv(p, ("step", "t", "x", "y", "rho", "ux", "uy"), rows)
        files.append(p)
    rows = [(k, k * params.h, timesystem.relative_error(lin[k], nl[k])) for k in range(params.nt + 1)]
    p = out / "error_linear_vs_nonlinear.csv"
    write_csv(p, ("step", "t", "rel_err_linear_vs_nonlinear"), rows)
    files.append(p)
    return files


def cmd_build_matrix(cfg: RunConfig) -> list[Path]:
    geom = cfg.geometry()
    params = cfg.params(geom)
    out = cfg.out()
    m = cfg.mode
    S = carleman.build_S(geom, m)
    A = carleman.build_A(geom, params, m)
    At = carleman.interpolate(A, params.h)
    sys = _system(cfg, geom, params)
    files = []
    for name, M in (("S", S), ("A", A), ("A_tilde", At)):
        p = out / f"{name}_{m}.mtx"
        carleman.write_matrix_market(p, M)
        files.append(p)
    p = out / f"L_{m}.mtx"
    timesystem.write_system_mm(p, sys)
    files.append(p)
    for name, v in (("b", carleman.build_forcing(geom, params, m)), ("b_L", sys.b_L)):
        p = out / f"{name}_{m}.csv"
        timesystem.write_vector_csv(p, v)
        files.append(p)
    return files


def cmd_spectral(cfg: RunConfig, nt_list, nx_list=None) -> tuple[Path, list]:
    nx_list = nx_list or [cfg.nx]
    grid = [(nx, nx if nx != cfg.nx else cfg.ny, nt) for nx in nx_list for nt in nt_list]

    def factory(nx, ny, nt):
        g = cfg.geometry(nx, ny)
        return _system(cfg, g, cfg.params(g, nt))

    reports = spectral.sweep(grid, factory)
    p = cfg.out() / "spectral.csv"
    spectral.write_csv(p, reports)
    return p, reports


def _default_alpha(cfg: RunConfig, sys, params) -> float:
    a = cfg.alpha
    if isinstance(a, (int, float)) and not isinstance(a, bool):
        return float(a)
    table = carleman.collision_table(params.tau)
    from .circuits.oracles import alpha_L
    if a == "alpha_L" or (a is None and cfg.mode == "padded"):
        return alpha_L(table, params.h)
    if a == "sigma_max" or a is None:
        return spectral.sigma_max(sys) + 1e-6
    raise ConfigError(f"alpha must be a number, 'alpha_L' or 'sigma_max', got {a!r}")


def cmd_solve(cfg: RunConfig) -> tuple[list[Path], dict]:
    if cfg.kappa is None or cfg.degree is None:
        raise ConfigError("solve needs kappa and degree in the configuration")
    geom = cfg.geometry()
    params = cfg.params(geom)
    sys = _system(cfg, geom, params)
    alpha = _default_alpha(cfg, sys, params)
    poly = chebsolver.inverse_poly(cfg.kappa, cfg.degree)
    y_lin = timesystem.forward_solve(sys)
    y_q = chebsolver.clenshaw_solve(sys, alpha, poly)
    nl = run_nonlinear(rest_state(geom), geom, params)
    err = timesystem.relative_error(y_q, y_lin)
    out = cfg.out()
    rows = []
    for k in range(params.nt + 1):
        q = _physical_block(sys, y_q, k, geom)
        lin = _physical_block(sys, y_lin, k, geom)
        rows.append((k * params.h, timesystem.relative_error(q, lin), timesystem.relative_error(q, nl[k])))
    files = [out / "error_vs_time.csv"]
    write_csv(files[0], ("t", "rel_err_vs_linear", "rel_err_vs_nonlinear"), rows)
    for k in sorted({params.nt // 2, params.nt}):
        vel_rows = []
        fields_ = {"clenshaw": _physical_block(sys, y_q, k, geom),
                   "linear": _physical_block(sys, y_lin, k, geom), "nonlinear": nl[k]}
        us = {n: macroscopics(f, geom).u for n, f in fields_.items()}
        for x in range(geom.nx):
            for y in range(geom.ny):
                vel_rows.append((x, y, *(us[n][x, y, i] for n in fields_ for i in (0, 1))))
        p = out / f"velocity_step{k}.csv"
        write_csv(p, ("x", "y", "ux_clenshaw", "uy_clenshaw", "ux_linear", "uy_linear",
                      "ux_nonlinear", "uy_nonlinear"), vel_rows)
        files.append(p)
    summary = {"kappa": cfg.kappa, "degree": cfg.degree, "alpha": alpha, "mode": cfg.mode,
               "rel_err_vs_forward_solve": err, "poly_sup_error": chebsolver.poly_sup_error(poly)}
    p = out / "solve_summary.json"
    p.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    files.append(p)
    return files, summary


def _circuit_for(cfg: RunConfig, geom, params):
    return build_UA(geom, params) if cfg.circuit == "UA" else build_UL(geom, params)


def cmd_circuit(cfg: RunConfig, action: str, nx_list=None, nt_list=None, export: bool = False):
    out = cfg.out()
    if action == "verify":
        geom = cfg.geometry()
        params = cfg.params(geom)
        circ = _circuit_for(cfg, geom, params)
        if cfg.circuit == "UA":
            target = carleman.build_A(geom, params, "padded")
        else:
            target = _system(cfg, geom, params, "padded").matrix()
        rep = statevec.verify(circ, target)
        p = out / f"verify_{cfg.circuit}.json"
        p.write_text(rep.to_json() + "\n")
        files = [p]
        if export:
            t = out / f"{cfg.circuit}.txt"
            t.write_text(circ.to_text())
            files.append(t)
        return files, rep
    if action == "count":
        rows = []
        for nx in nx_list or [cfg.nx]:
            for nt in nt_list or [cfg.nt]:
                geom = cfg.geometry(nx, nx if nx != cfg.nx else cfg.ny)
                params = cfg.params(geom, nt)
                c = count_gates(_circuit_for(cfg, geom, params))
                rows.append((geom.nx, geom.ny, nt, c.toffoli, c.cnot, c.ry, c.h, c.x, c.swap,
                             c.qubits_total, c.qubits_ancilla))
        p = out / f"counts_{cfg.circuit}.csv"
        write_csv(p, ("nx", "ny", "nt", "toffoli", "cnot", "ry", "h", "x", "swap",
                      "qubits_total", "qubits_ancilla"), rows)
        return [p], rows
    raise ConfigError(f"unknown circuit action {action!r}")


def cmd_resources(cfg: RunConfig, T_list, nx_list=None, eps_base=0.01, c=10.0):
    rows = []
    for nx in nx_list or [cfg.nx]:
        geom = cfg.geometry(nx, nx)
        for T in T_list:
            # U_L is counted at the power-of-two step count that reaches T
            nt = steps_for(T, cfg.h)
            counts = count_gates(build_UL(geom, cfg.params(geom, nt), nt))
            est = estimate_tgates(counts, T, eps_base, c)
            rows.append((nx, T, est.kappa_fit, est.degree, est.t_count))
    p = cfg.out() / "resources.csv"
    write_csv(p, ("nx", "T", "kappa_fit", "degree", "t_count"), rows)
    return p, rows


# ---- argument parsing ----------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qlbm", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output directory (overrides out_dir)")
        p.add_argument("--check", action="store_true", help="exit 3 if the numerical check fails")
        return p

    add("reference")
    add("build-matrix")
    p = add("spectral")
    p.add_argument("--nt", type=int, nargs="+", required=True)
    p.add_argument("--nx", type=int, nargs="+")
    p.add_argument("--inv-sigma-min-range", type=float, nargs=2, metavar=("LO", "HI"))
    p = add("solve")
    p.add_argument("--max-error", type=float)
    p.add_argument("--min-error", type=float)
    p = add("circuit")
    p.add_argument("action", choices=("verify", "count"))
    p.add_argument("--nx", type=int, nargs="+")
    p.add_argument("--nt", type=int, nargs="+")
    p.add_argument("--export", action="store_true", help="also write the gate list as text")
    p.add_argument("--tol", type=float, default=1e-10)
    p = add("resources")
    p.add_argument("--T", type=float, nargs="+", required=True)
    p.add_argument("--nx", type=int, nargs="+")
    p.add_argument("--eps-base", type=float, default=0.01)
    p.add_argument("--c", type=float, default=10.0)
    p.add_argument("--t-range", type=float, nargs=2, default=(1e10, 1e12), metavar=("LO", "HI"))
    return ap


def _run(args) -> int:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    if args.out:
        cfg.out_dir = args.out
    ok = True
    cmd = args.command
    if cmd == "reference":
        files = cmd_reference(cfg)
    elif cmd == "build-matrix":
        files = cmd_build_matrix(cfg)
    elif cmd == "spectral":
        path, reports = cmd_spectral(cfg, args.nt, args.nx)
        files = [path]
        if args.inv_sigma_min_range:
            lo, hi = args.inv_sigma_min_range
            ok = all(lo <= 1.0 / r.sigma_min <= hi for r in reports)
    elif cmd == "solve":
        files, summary = cmd_solve(cfg)
        e = summary["rel_err_vs_forward_solve"]
        print(f"relative error vs forward solve: {e:.6e}")
        ok = (args.max_error is None or e <= args.max_error) and (args.min_error is None or e >= args.min_error)
    elif cmd == "circuit":
        files, res = cmd_circuit(cfg, args.action, args.nx, args.nt, args.export)
        if args.action == "verify":
            print(res.to_json())
            ok = res.max_abs_err <= args.tol
    else:
        path, rows = cmd_resources(cfg, args.T, args.nx, args.eps_base, args.c)
        files = [path]
        lo, hi = args.t_range
        ok = all(lo <= r[-1] <= hi for r in rows)
    for f in files:
        print(f)
    if args.check and not ok:
        print("check failed", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return _run(args)
    except (ConfigError, GeometryError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
