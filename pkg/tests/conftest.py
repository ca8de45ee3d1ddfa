import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qlbm import carleman
from qlbm.lattice import Geometry
from qlbm.reference import FlowParams, rest_state
from qlbm.timesystem import assemble

settings.register_profile("qlbm", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qlbm")


@functools.lru_cache(maxsize=None)
def channel(nx: int, obstacle: bool = True, nt: int = 32, W: int = 1, h: float = 0.5, ma: float = 0.01):
    geom = Geometry.with_default_obstacle(nx, nx) if obstacle else Geometry(nx, nx)
    params = FlowParams.for_geometry(geom, ma=ma, h=h, nt=nt, w_idle=W)
    return geom, params


@functools.lru_cache(maxsize=None)
def system(nx: int, obstacle: bool = True, nt: int = 32, W: int = 1, mode: str = "physical"):
    geom, params = channel(nx, obstacle, nt, W)
    y0 = rest_state(geom)
    if mode == "padded":
        y0 = carleman.embed(y0, geom)
    return assemble(carleman.build_A_tilde(geom, params, mode), carleman.build_forcing(geom, params, mode),
                    y0, nt, W, params.h, mode)


@pytest.fixture
def geom8():
    return channel(8)[0]


@pytest.fixture
def params8():
    return channel(8)[1]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
