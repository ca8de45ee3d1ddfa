from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlbm.lattice import (
    CS2, D2Q9, DL, DR, L, NONPHYSICAL, PHYSICAL, R, REST, U, UL, UR, D, BCType, Geometry,
    GeometryError, InvalidVelocityError, Obstacle, bc_out_table, bc_table, classify_bc,
    classify_bc_out, decode_velocity, encode_velocity, is_physical, opposite, routing_table,
)

components = st.sampled_from((-1, 0, 1))


def test_encode_examples():
    assert encode_velocity((-1, 1)) == 9
    assert encode_velocity((0, 0)) == 0
    assert encode_velocity((1, -1)) == 6


def test_encode_rejects_large_component():
    with pytest.raises(InvalidVelocityError):
        encode_velocity((2, 0))


def test_named_velocities():
    assert [decode_velocity(q) for q in (REST, L, R, D, DL, DR, U, UL, UR)] == [
        (0, 0), (-1, 0), (1, 0), (0, -1), (-1, -1), (1, -1), (0, 1), (-1, 1), (1, 1)]
    assert set(PHYSICAL) | set(NONPHYSICAL) == set(range(16))


@given(components, components)
def test_encode_decode_roundtrip(cx, cy):
    q = encode_velocity((cx, cy))
    assert is_physical(q)
    assert decode_velocity(q) == (cx, cy)


def test_opposite_examples():
    assert opposite(6) == 9
    assert opposite(0) == 0
    assert opposite(2) == 1
    with pytest.raises(InvalidVelocityError):
        opposite(3)


@given(st.sampled_from(PHYSICAL))
def test_opposite_negates_and_is_involution(q):
    cx, cy = decode_velocity(q)
    assert decode_velocity(opposite(q)) == (-cx, -cy)
    assert opposite(opposite(q)) == q


def test_moment_identities_exact():
    w, c = D2Q9.weights, D2Q9.velocities
    assert sum(w) == 1
    for a in range(2):
        assert sum(wi * ci[a] for wi, ci in zip(w, c)) == 0
        for b in range(2):
            second = sum(wi * ci[a] * ci[b] for wi, ci in zip(w, c))
            assert second == (CS2 if a == b else Fraction(0))


def test_default_obstacle_placement():
    g = Geometry.with_default_obstacle(8, 8)
    assert g.obstacle == Obstacle(x0=2, y0=3, wx=1, wy=2)
    g = Geometry.with_default_obstacle(32, 16)
    assert g.obstacle == Obstacle(x0=8, y0=6, wx=4, wy=4)


def test_geometry_validation():
    with pytest.raises(GeometryError):
        Geometry(6, 8)
    with pytest.raises(GeometryError):
        Geometry(8, 8, Obstacle(0, 2, 1, 1))
    with pytest.raises(GeometryError):
        Geometry.with_default_obstacle(4, 4)


def test_classify_bc_examples(geom8):
    assert classify_bc((1, 3), 2, geom8) == BCType.BOUNCE_BACK
    assert classify_bc((7, 5), 2, geom8) == BCType.OUTFLOW
    assert classify_bc((3, 3), 8, geom8) == BCType.INTERIOR
    assert classify_bc((7, 2), 3, geom8) == BCType.OUTFLOW
    assert classify_bc((0, 4), L, geom8) == BCType.BOUNCE_BACK


def test_classify_bc_out_examples(geom8):
    assert classify_bc_out((0, 4), 2, geom8) == BCType.BOUNCE_BACK
    assert classify_bc_out((7, 4), 1, geom8) == BCType.OUTFLOW
    assert classify_bc_out((7, 0), 9, geom8) == BCType.BOUNCE_BACK


def test_codes_never_01(geom8):
    for table in (bc_table(geom8), bc_out_table(geom8)):
        assert set(np.unique(table)) <= {0b00, 0b10, 0b11}


def test_corner_precedence_prefers_walls(geom8):
    assert classify_bc((7, 7), UR, geom8) == BCType.BOUNCE_BACK
    assert classify_bc((7, 0), DR, geom8) == BCType.BOUNCE_BACK


def test_obstacle_sealed_in_both_directions(geom8):
    # obstacle occupies x = 2, y in {3, 4}
    assert classify_bc((2, 3), L, geom8) == BCType.BOUNCE_BACK
    assert classify_bc((2, 4), R, geom8) == BCType.BOUNCE_BACK
    assert classify_bc((2, 3), U, geom8) == BCType.INTERIOR


@pytest.mark.parametrize("nx,ny,obstacle", [(4, 4, False), (8, 8, True), (16, 8, True), (16, 16, True)])
def test_roundtrip_classification_exhaustive(nx, ny, obstacle):
    geom = Geometry.with_default_obstacle(nx, ny) if obstacle else Geometry(nx, ny)
    bc = bc_table(geom)
    xo, yo, qo = routing_table(geom)
    recovered = bc_out_table(geom)[xo, yo, qo]
    assert np.array_equal(recovered, bc)


@pytest.mark.parametrize("nx,ny", [(8, 8), (16, 16)])
def test_routing_is_a_permutation(nx, ny):
    geom = Geometry.with_default_obstacle(nx, ny)
    xo, yo, qo = routing_table(geom)
    flat = (xo * ny + yo) * 16 + qo
    assert np.unique(flat).size == flat.size


def test_output_signatures_disjoint(geom8):
    # every output slot is reached from exactly one source, so its bc value is determined
    bc = bc_table(geom8)
    xo, yo, qo = routing_table(geom8)
    seen = {}
    for idx in np.ndindex(bc.shape):
        key = (xo[idx], yo[idx], qo[idx])
        assert key not in seen
        seen[key] = bc[idx]
