"""Shared set-up for the experiment scripts."""
from qlbm import carleman
from qlbm.lattice import Geometry
from qlbm.reference import FlowParams, rest_state
from qlbm.timesystem import assemble


def channel(nx: int, nt: int = 32, W: int = 1, obstacle: bool = True, mode: str = "physical"):
    geom = Geometry.with_default_obstacle(nx, nx) if obstacle else Geometry(nx, nx)
    params = FlowParams.for_geometry(geom, nt=nt, w_idle=W)
    y0 = rest_state(geom)
    if mode == "padded":
        y0 = carleman.embed(y0, geom)
    sys = assemble(carleman.build_A_tilde(geom, params, mode), carleman.build_forcing(geom, params, mode),
                   y0, nt, W, params.h, mode)
    return geom, params, sys
