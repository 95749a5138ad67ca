import numpy as np
import pytest

from turan_domains.candidate import turan_candidate
from turan_domains.geometry.ConvexBody import Ball, Box, random_symmetric_polygon, regular_hexagon
from turan_domains.radial import ball_turan_check, chain_check, radialize
from turan_domains.torus.GridFunction import GridFunction, min_spectrum, rasterize
from turan_domains.torus.TorusGrid import TorusGrid


def test_gaussian_is_a_fixed_point():
    grid = TorusGrid(2, 128, 3.0)
    x = grid.nodes()
    f = GridFunction(grid, np.exp(-np.pi * np.sum(x ** 2, axis=1)))
    radial = radialize(f, n_angles=64)
    assert radial.at_origin == f.at_origin
    # bilinear interpolation of the Gaussian is off by about h^2
    assert np.max(np.abs(radial.values - f.values)) <= 1e-3


def test_radialize_is_idempotent():
    grid = TorusGrid(2, 128, 4.0)
    x = grid.nodes()
    f = GridFunction(grid, np.exp(-np.pi * (x[:, 0] ** 2 + 4 * x[:, 1] ** 2)))
    once = radialize(f)
    twice = radialize(once)
    assert np.max(np.abs(twice.values - once.values)) <= 4 * np.pi * grid.h ** 2


@pytest.mark.parametrize('body', [Ball(1.0, 2), Box([1.0, 1.0]), regular_hexagon(1.0)])
def test_radialize_keeps_positive_definite_functions(body):
    grid = TorusGrid(2, 128, 4.0)
    candidate = turan_candidate(body, grid)
    assert min_spectrum(radialize(candidate))[0] >= -1e-9


def test_radialized_square_is_invariant_under_quarter_turns(square):
    grid = TorusGrid(2, 32, 4.0)
    f = rasterize(square, grid)
    radial = radialize(f, n_angles=64)
    c = grid.N // 2
    for k in range(1, 10):
        assert radial.values[c + k, c] == pytest.approx(radial.values[c, c + k], abs=1e-12)
        assert radial.values[c + k, c] == pytest.approx(radial.values[c - k, c], abs=1e-12)
    assert radial.is_symmetric()
    assert radial.at_origin == 1.0


def test_radialize_smooths_corners(square):
    grid = TorusGrid(2, 32, 4.0)
    f = rasterize(square, grid)
    radial = radialize(f)
    c = grid.N // 2
    # the corner node (1, 1) leaves the square under most rotations
    assert radial.values[c + 8, c + 8] < 0.5
    assert radial.values[c + 4, c + 4] == pytest.approx(1.0)


@pytest.mark.parametrize('grid, values, domain', [
    (TorusGrid(1, 16, 4.0), np.ones(16), 'space'),
    (TorusGrid(2, 16, 4.0), np.ones((16, 16)), 'frequency'),
])
def test_radialize_rejects_bad_input(grid, values, domain):
    with pytest.raises(ValueError):
        radialize(GridFunction(grid, values, domain))


def test_radialize_rejects_asymmetric(rng):
    grid = TorusGrid(2, 16, 4.0)
    with pytest.raises(ValueError):
        radialize(GridFunction(grid, rng.normal(size=grid.shape)))
    with pytest.raises(ValueError):
        radialize(GridFunction(grid, np.ones(grid.shape)), n_angles=0)


@pytest.mark.parametrize('K', [Ball(1.0, 2), Box([1.0, 0.5]), regular_hexagon(1.0)])
def test_chain_for_the_half_body_indicator(K):
    grid = TorusGrid(2, 32, 4.0)
    g = rasterize(K.scale(0.5), grid)
    report = chain_check(g, K)
    assert report.holds
    assert report.identity_error <= 1e-9 * report.identity
    assert report.A <= report.B
    assert report.C == pytest.approx(report.B, rel=1e-12)
    assert report.difference_body_grid_volume >= report.body_grid_volume


def test_chain_for_a_spike(disk):
    grid = TorusGrid(2, 32, 4.0)
    values = np.zeros(grid.shape)
    values[grid.center] = 1.0
    report = chain_check(GridFunction(grid, values), disk)
    assert report.holds
    assert report.A == pytest.approx(grid.cell_volume ** 2)
    assert report.B == pytest.approx(disk.grid_volume(grid) * grid.cell_volume)


def test_chain_for_random_functions(disk):
    rng = np.random.default_rng(0)
    grid = TorusGrid(2, 32, 4.0)
    bodies = [disk, Box([1.0, 0.5])] + [random_symmetric_polygon(rng) for _ in range(8)]
    for trial in range(200):
        K = bodies[trial % len(bodies)]
        inside = rasterize(K, grid).values
        g = GridFunction(grid, inside * rng.normal(size=grid.shape))
        if trial % 2:
            g = g.with_values(np.abs(g.values))
        report = chain_check(g, K)
        assert report.holds
        assert report.A <= report.B * (1 + 1e-12)


def test_chain_rejects_support_violation(disk):
    grid = TorusGrid(2, 32, 4.0)
    g = rasterize(Ball(1.5, 2), grid)
    with pytest.raises(ValueError):
        chain_check(g, disk)


def test_ball_report_on_a_coarse_grid():
    report = ball_turan_check(L=4.0, N=32, n_angles=32)
    assert report.solution.certified
    assert report.pd_ok and report.support_ok
    assert report.solution.f.grid == TorusGrid(2, 32, 4.0)
    assert report.grid_ratio >= 1 - 1e-8
    assert report.radialized_value_change >= 0
    assert np.isfinite(report.candidate_radial_deviation)
    flags = report.to_report()
    assert {'pd_ok', 'support_ok', 'value_ok'} <= set(flags)
    assert flags['solution']['status'] == report.solution.status


@pytest.mark.slow
def test_ball_report_on_the_default_grid():
    report = ball_turan_check()
    assert report.solution.certified
    assert report.ratio == pytest.approx(1.0, abs=0.05)
    assert report.grid_ratio >= 1 - 1e-8
    assert report.pd_ok and report.support_ok and report.value_ok
