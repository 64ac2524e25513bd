import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from instrument_directivity.geometry import (
    SphericalGrid,
    SphericalPoint,
    area_weights,
    central_angle,
    equiangular_step,
    make_equiangular_grid,
    rotation_matrix,
    spherical_cap,
    to_cartesian,
    to_spherical,
)

azimuths = st.floats(0, 359.999, allow_nan=False)
colatitudes = st.floats(0.001, 179.999, allow_nan=False)


@pytest.mark.parametrize("step, count", [(5, 35 * 72 + 2), (10, 17 * 36 + 2), (30, 5 * 12 + 2), (90, 1 * 4 + 2)])
def test_equiangular_counts(step, count):
    assert len(make_equiangular_grid(step)) == count


def test_five_degree_grid_has_2522_points():
    g = make_equiangular_grid(5)
    assert len(g) == 2522
    assert equiangular_step(g) == 5.0


@pytest.mark.parametrize("step", [7, 0, -5, 25])
def test_invalid_step_lists_choices(step):
    with pytest.raises(ValueError, match="divide"):
        make_equiangular_grid(step)


def test_equiangular_weights_integrate_polynomials():
    # exact band areas: mean of cos^2 over the sphere is 1/3
    g = make_equiangular_grid(5)
    z = np.cos(np.deg2rad(g.colatitude))
    assert abs(np.sum(g.weights * z**2) - 1 / 3) < 1e-3
    assert abs(np.sum(g.weights * z)) < 1e-12


def test_pentakis_layout(array_grid):
    assert len(array_grid) == 32
    np.testing.assert_allclose(array_grid.radius, 1.05)
    assert abs(array_grid.weights.sum() - 1) < 1e-12
    assert np.all((array_grid.weights > 0.02) & (array_grid.weights < 0.05))
    # twelve pentagonal and twenty hexagonal cells
    w = np.sort(array_grid.weights)
    np.testing.assert_allclose(w[:12], w[0], rtol=1e-9)
    np.testing.assert_allclose(w[12:], w[-1], rtol=1e-9)


def test_pentakis_weights_monte_carlo(array_grid):
    # independent oracle: nearest-node assignment of uniform samples
    rng = np.random.default_rng(7)
    n = 2_000_000
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    nodes = array_grid.unit_vectors()
    hits = np.zeros(len(nodes))
    for chunk in np.array_split(v, 20):
        np.add.at(hits, np.argmax(chunk @ nodes.T, axis=1), 1)
    frac = hits / n
    sigma = np.sqrt(array_grid.weights * (1 - array_grid.weights) / n)
    assert np.all(np.abs(frac - array_grid.weights) < 5 * sigma)


@given(azimuths, colatitudes, st.floats(0.1, 10))
def test_cartesian_round_trip(az, col, r):
    a, c, rr = to_spherical(to_cartesian(az, col, r))
    assert abs(float(rr) - r) < 1e-9 * r
    assert abs(float(c) - col) < 1e-7
    d = abs((float(a) - az + 180) % 360 - 180)
    assert d < 1e-6


def test_axes_convention():
    np.testing.assert_allclose(to_cartesian(0, 90), [1, 0, 0], atol=1e-15)
    np.testing.assert_allclose(to_cartesian(90, 90), [0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(to_cartesian(0, 0), [0, 0, 1], atol=1e-15)


def test_pole_azimuth_collapses():
    assert SphericalPoint(123.0, 0.0).azimuth == 0.0
    assert SphericalPoint(-90.0, 45.0).azimuth == 270.0


@given(azimuths, colatitudes, azimuths, colatitudes)
def test_central_angle_symmetric_and_bounded(a1, c1, a2, c2):
    p, q = SphericalPoint(a1, c1), SphericalPoint(a2, c2)
    ang = central_angle(p, q)
    assert 0 <= ang <= np.pi + 1e-12
    assert abs(ang - central_angle(q, p)) < 1e-12


def test_central_angle_small_separation():
    # atan2 form keeps precision where arccos of the dot product would not
    assert abs(central_angle(SphericalPoint(0, 90), SphericalPoint(1e-7, 90)) - np.deg2rad(1e-7)) < 1e-18


@given(st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_rotation_is_orthonormal(y, p, r):
    m = rotation_matrix(y, p, r)
    np.testing.assert_allclose(m @ m.T, np.eye(3), atol=1e-12)
    assert abs(np.linalg.det(m) - 1) < 1e-12


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError, match="sum"):
        SphericalGrid([0, 90, 180, 270], [90, 90, 90, 0], 1.0, [0.25, 0.25, 0.25, 0.3])
    with pytest.raises(ValueError, match="duplicate"):
        SphericalGrid([0, 0, 180, 270], [90, 90, 90, 0], 1.0, [0.25] * 4)
    with pytest.raises(ValueError, match="positive"):
        SphericalGrid([0, 90, 180, 270], [90, 90, 90, 0], 1.0, [0.5, 0.5, 0.0, 0.0])


def test_area_weights_degenerate_sets():
    with pytest.raises(ValueError, match="at least 4"):
        area_weights([SphericalPoint(0, 90), SphericalPoint(90, 90), SphericalPoint(0, 0)])
    ring = [SphericalPoint(a, 90) for a in range(0, 360, 45)]
    with pytest.raises(ValueError, match="plane"):
        area_weights(ring)


def test_index_of(array_grid):
    for i, p in enumerate(array_grid.points):
        assert array_grid.index_of(p) == i
    with pytest.raises(KeyError):
        array_grid.index_of(SphericalPoint(1.234, 56.7))


def test_table_round_trip(array_grid):
    assert SphericalGrid.from_table(array_grid.to_table()) == array_grid


def test_cap_renormalizes(dense_grid):
    cap = spherical_cap(dense_grid, SphericalPoint(0, 90), 47)
    assert 0 < len(cap) < len(dense_grid)
    assert abs(cap.weights.sum() - 1) < 1e-12
    # fraction of the sphere in a 47 degree cap is (1 - cos 47) / 2
    frac = dense_grid.weights[[dense_grid.index_of(p) for p in cap.points]].sum()
    assert abs(frac - (1 - np.cos(np.deg2rad(47))) / 2) < 0.01


def test_random_grid_weights_sum_to_one(rng):
    xyz = rng.standard_normal((60, 3))
    az, col, _ = to_spherical(xyz)
    g = SphericalGrid.from_points([SphericalPoint(a, c) for a, c in zip(az, col)])
    assert abs(g.weights.sum() - 1) < 1e-12
