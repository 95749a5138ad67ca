import numpy as np
import pytest

from turan_domains.candidate import candidate_gap, candidate_value, grid_allowance, turan_candidate
from turan_domains.geometry.ConvexBody import Ball, Box, regular_hexagon
from turan_domains.torus.GridFunction import min_spectrum, rasterize
from turan_domains.torus.TorusGrid import TorusGrid


@pytest.mark.parametrize('body, grid', [
    (Box([1.0]), TorusGrid(1, 64, 4.0)),
    (Box([1.0, 1.0]), TorusGrid(2, 32, 4.0)),
    (Ball(1.0, 2), TorusGrid(2, 32, 4.0)),
    (regular_hexagon(1.0), TorusGrid(2, 32, 4.0)),
])
def test_candidate_is_feasible(body, grid):
    f = turan_candidate(body, grid)
    assert f.at_origin == 1.0
    assert f.is_symmetric()
    assert min_spectrum(f)[0] >= -1e-9
    inside = rasterize(body, grid, strict=True).values > 0
    assert not np.any(f.values[~inside])
    assert np.all(f.values <= 1.0)


@pytest.mark.parametrize('N, integral', [(64, 1.0), (256, 1.0), (60, 14 / 15), (124, 30 / 31)])
def test_interval_candidate_integral(interval, N, integral):
    grid = TorusGrid(1, N, 4.0)
    f = turan_candidate(interval, grid)
    assert f.integral == pytest.approx(integral, rel=1e-12)
    assert candidate_gap(interval, grid) == pytest.approx(1.0 - integral, abs=1e-12)


def test_interval_candidate_support_is_the_node_set(interval):
    grid = TorusGrid(1, 64, 4.0)
    f = turan_candidate(interval, grid)
    assert np.array_equal(f.values > 0, rasterize(interval, grid, strict=True).values > 0)


def test_candidate_gap_shrinks(interval):
    gaps = [candidate_gap(interval, TorusGrid(1, N, 4.0)) for N in (60, 124, 252)]
    assert gaps == pytest.approx([1 / 15, 1 / 31, 1 / 63], abs=1e-12)


def test_candidate_without_cell_centres_is_a_unit_mass(caplog):
    grid = TorusGrid(2, 16, 4.0)
    f = turan_candidate(Ball(0.05, 2), grid)
    assert f.at_origin == 1.0
    assert np.count_nonzero(f.values) == 1
    assert f.integral == pytest.approx(grid.cell_volume)
    assert 'unit mass' in caplog.text


def test_candidate_rejects_large_body():
    with pytest.raises(ValueError):
        turan_candidate(Box([2.0]), TorusGrid(1, 64, 4.0))


@pytest.mark.parametrize('body, value', [
    (Box([1.0]), 1.0),
    (Box([1.0, 1.0]), 1.0),
    (Ball(1.0, 2), np.pi / 4),
    (regular_hexagon(1.0), 3 * np.sqrt(3) / 8),
])
def test_candidate_value(body, value):
    assert candidate_value(body) == pytest.approx(value, rel=1e-12)


def test_grid_allowance(interval, unit_cube):
    assert grid_allowance(interval, TorusGrid(1, 64, 4.0)) == pytest.approx(1 / 16)
    grid = TorusGrid(2, 32, 32 / 14)
    assert grid_allowance(unit_cube, grid) == pytest.approx((8 / 7) ** 2 - 1)


@pytest.mark.parametrize('body', [Box([1.0]), Box([1.0, 0.5]), Ball(1.0, 2), Ball(1.0, 3), regular_hexagon(1.0)])
@pytest.mark.parametrize('t', [0.25, 0.5, 2.0, 3.0])
def test_candidate_value_scales_with_the_volume(body, t):
    scaled = candidate_value(body.scale(t))
    assert scaled == pytest.approx(t ** body.dimension * candidate_value(body), rel=1e-12)
