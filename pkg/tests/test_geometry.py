import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mwgi.errors import DomainError
from mwgi.geometry import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    Scene,
    TargetSpec,
    build_square_array,
    default_targets,
    delay_table,
    paint_targets,
    pixel_center,
    pixel_centers,
    two_way_delay,
)
from mwgi.io import load_scene, save_scene


def test_square_array_reference_layout():
    g = build_square_array(4, 4.0, 1.0)
    assert sorted(map(tuple, g.tx_positions)) == sorted(
        [(2.0, 2.0, 1.0), (-2.0, 2.0, 1.0), (-2.0, -2.0, 1.0), (2.0, -2.0, 1.0)]
    )
    np.testing.assert_array_equal(g.rx_position, [0.0, 0.0, 1.0])
    assert g.standoff == 1.0 and g.array_side == 4.0


def test_square_array_diagonal():
    s = 0.7
    g = build_square_array(4, 2 * s, 1.0)
    d = np.linalg.norm(g.tx_positions[0] - g.tx_positions[2])
    assert d == pytest.approx(2 * s * math.sqrt(2))


def test_single_tx_at_center():
    g = build_square_array(1, 3.0, 2.0)
    np.testing.assert_array_equal(g.tx_positions, [[0.0, 0.0, 2.0]])


def test_general_tx_count_on_perimeter():
    g = build_square_array(8, 2.0, 1.0)
    xy = g.tx_positions[:, :2]
    assert np.allclose(np.abs(xy).max(axis=1), 1.0)
    assert len({tuple(p) for p in np.round(xy, 12)}) == 8


@pytest.mark.parametrize("args", [(4, 0.0, 1.0), (4, 1.0, -1.0), (0, 1.0, 1.0)])
def test_square_array_errors(args):
    with pytest.raises(DomainError):
        build_square_array(*args)


def test_array_must_be_coplanar():
    with pytest.raises(DomainError):
        ArrayGeometry([[0, 0, 1.0], [1, 0, 1.5]], [0, 0, 1.0], 1.0, 1.0)


def test_pixel_center_examples():
    s = Scene.empty(1, 1, 0.015, origin=(-0.0075, -0.0075, 0.0))
    np.testing.assert_allclose(pixel_center(s, 0, 0), [0.0, 0.0, 0.0], atol=1e-15)
    s = Scene.empty(32, 32, 0.015, origin=(0.0, 0.0, 0.0))
    np.testing.assert_allclose(pixel_center(s, 10, 10), [0.1575, 0.1575, 0.0])
    assert pixel_center(s, 3, 5)[0] - pixel_center(s, 2, 5)[0] == pytest.approx(0.015)
    assert pixel_center(s, 3, 5)[1] - pixel_center(s, 3, 4)[1] == pytest.approx(0.015)
    with pytest.raises(IndexError):
        pixel_center(s, 32, 0)


def test_default_scene_is_centered():
    s = Scene.empty(32, 32, 0.015)
    np.testing.assert_allclose(pixel_centers(s).mean(axis=0), 0.0, atol=1e-15)


def test_pixel_centers_row_major():
    s = Scene.empty(3, 4, 0.1)
    pts = pixel_centers(s)
    np.testing.assert_allclose(pts[1 * 4 + 2], pixel_center(s, 1, 2))


def test_two_way_delay_examples():
    assert two_way_delay([1, 2, 3], [1, 2, 3], [1, 2, 3]) == 0.0
    d = two_way_delay([0, 0, 1], [0, 0, 0], [0, 0, 1])
    assert d == 2 / SPEED_OF_LIGHT
    assert d == pytest.approx(6.6713e-9, rel=1e-4)
    assert two_way_delay([1, 0, 1], [0.2, 0.1, 0], [0, 0, 1]) == two_way_delay([0, 0, 1], [0.2, 0.1, 0], [1, 0, 1])


# micrometre grid: avoids denormal separations that underflow the norm
coord = st.integers(-10_000_000, 10_000_000).map(lambda k: k * 1e-6)
point = st.tuples(coord, coord, coord)


@settings(max_examples=50)
@given(tx=point, px=point, rx=point, off=point)
def test_delay_translation_invariance(tx, px, rx, off):
    off = np.array(off)
    d0 = two_way_delay(tx, px, rx)
    d1 = two_way_delay(np.add(tx, off), np.add(px, off), np.add(rx, off))
    assert d1 == pytest.approx(d0, rel=1e-9, abs=1e-15)


@settings(max_examples=50)
@given(tx=point, px=point, rx=point)
def test_delay_positive_off_coincidence(tx, px, rx):
    if tx != px or rx != px:
        assert two_way_delay(tx, px, rx) > 0


def test_delay_table_matches_scalar():
    g = build_square_array(4, 1.0, 1.0)
    s = Scene.empty(3, 3, 0.05)
    table = delay_table(g, pixel_centers(s))
    for i in range(4):
        for k, p in enumerate(pixel_centers(s)):
            assert table[i, k] == pytest.approx(two_way_delay(g.tx_positions[i], p, g.rx_position), rel=1e-14)


def test_paint_targets_examples():
    s = Scene.empty(8, 8, 0.01)
    assert np.all(paint_targets(s, []).coefficients == 0)
    assert np.all(paint_targets(s, [TargetSpec(0, 8, 0, 8, 1.0)]).coefficients == 1)
    two = paint_targets(s, [TargetSpec(0, 4, 0, 4), TargetSpec(4, 8, 4, 8)])
    assert np.count_nonzero(two.coefficients) == 32


def test_paint_targets_overlap_and_bounds():
    s = Scene.empty(8, 8, 0.01)
    out = paint_targets(s, [TargetSpec(0, 4, 0, 4, 1.0), TargetSpec(2, 6, 2, 6, 0.5)])
    assert out.coefficients[3, 3] == 0.5 and out.coefficients[0, 0] == 1.0
    with pytest.raises(DomainError):
        paint_targets(s, [TargetSpec(5, 9, 0, 2)])


def test_default_targets():
    s = paint_targets(Scene.empty(32, 32, 0.015), default_targets())
    assert np.count_nonzero(s.coefficients) == 72
    np.testing.assert_array_equal(s.coefficients, s.coefficients[:, ::-1])


def test_scene_validation():
    with pytest.raises(DomainError):
        Scene(np.array([[1.0, -0.1]]), 0.01)
    with pytest.raises(DomainError):
        Scene(np.ones((2, 2)), 0.0)
    with pytest.raises(DomainError):
        TargetSpec(0, 1, 0, 1, -1.0)


def test_scene_round_trip(tmp_path, rng):
    s = Scene(rng.uniform(0, 1, (5, 7)) * 10 ** rng.uniform(-5, 5, (5, 7)), 0.0123)
    save_scene(s, tmp_path / "scene.csv")
    back = load_scene(tmp_path / "scene.csv")
    assert back == s


@given(rows=st.integers(1, 64), cols=st.integers(1, 64))
def test_default_targets_fit_and_mirror(rows, cols):
    s = paint_targets(Scene.empty(rows, cols, 0.01), default_targets(rows, cols))
    assert s.coefficients.any()
    np.testing.assert_array_equal(s.coefficients, s.coefficients[:, ::-1])
