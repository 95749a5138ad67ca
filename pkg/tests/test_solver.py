import dataclasses

import numpy as np
import pytest

from turan_domains.candidate import turan_candidate
from turan_domains.geometry.ConvexBody import Ball, Box, random_symmetric_polygon
from turan_domains.geometry.Lattice import Lattice
from turan_domains.solver import (STATUSES, TuranProblem, TuranSolution, TuranSolver, dense_oracle,
                                  lattice_upper_bound, refine_study, solve_turan, verify_solution)
from turan_domains.torus.GridFunction import rasterize
from turan_domains.torus.TorusGrid import TorusGrid


def _problem(body, N, L, **kwargs):
    return TuranProblem(body, TorusGrid(body.dimension, N, L), **kwargs)


def test_problem_validation(interval, square):
    with pytest.raises(ValueError):
        _problem(Box([1.5]), 64, 4.0)
    with pytest.raises(ValueError):
        TuranProblem(interval, TorusGrid(2, 16, 4.0))
    with pytest.raises(ValueError):
        _problem(interval, 64, 4.0, tol_pd=0.0)
    with pytest.raises(ValueError):
        _problem(square, 16, 4.0, max_cuts=2)
    with pytest.raises(ValueError):
        _problem(interval, 64, 4.0, cuts_per_round=0)
    assert _problem(interval, 64, 4.0).max_cuts == 400


def test_single_node_support():
    solution = solve_turan(_problem(Ball(0.05, 2), 16, 4.0))
    assert solution.status == 'certified'
    assert solution.value == pytest.approx(1 / 16, rel=1e-12)
    assert solution.f.values.sum() == 1.0


# boxes of halfwidth w on grids where the first lattice spacing s >= w with no
# interior node beyond it divides the period: the optimum is s^d
@pytest.mark.parametrize('body, N, L, value', [
    (Box([1.0]), 64, 4.0, 1.0),
    (Box([1.0]), 28, 4.0, 1.0),
    (Box([1.0]), 40, 16 / 3, 16 / 15),
    (Box([1.0, 1.0]), 24, 4.0, 1.0),
    (Box([1.0, 1.0]), 20, 40 / 9, 100 / 81),
    (Box([0.5]), 192, 3.0, 0.5),
])
def test_discrete_optimum_on_divisible_grids(body, N, L, value):
    problem = _problem(body, N, L)
    solution = solve_turan(problem)
    assert solution.status == 'certified'
    assert solution.value == pytest.approx(value, abs=1e-6)
    assert verify_solution(solution, problem).passed


@pytest.mark.slow
def test_square_optimum_on_finer_grid(square):
    solution = solve_turan(_problem(square, 40, 80 / 19))
    assert solution.status == 'certified'
    assert solution.value == pytest.approx(400 / 361, abs=1e-6)


@pytest.mark.parametrize('body, N, L, spacing', [
    (Box([1.0]), 40, 16 / 3, 16 / 15),
    (Box([1.0, 1.0]), 20, 40 / 9, 10 / 9),
    (Box([1.0, 1.0]), 24, 4.0, 1.0),
])
def test_lattice_upper_bound_is_attained(body, N, L, spacing):
    problem = _problem(body, N, L)
    bound = lattice_upper_bound(problem, Lattice.integer(body.dimension, spacing))
    assert bound == pytest.approx(spacing ** body.dimension, rel=1e-12)
    assert solve_turan(problem).value <= bound + 1e-6


def test_lattice_upper_bound_rejects_lattice_on_support(interval):
    problem = _problem(interval, 64, 4.0)
    with pytest.raises(ValueError):
        lattice_upper_bound(problem, Lattice([[0.5]]))


def test_value_is_sandwiched(interval):
    problem = _problem(interval, 64, 4.0)
    solution = solve_turan(problem)
    candidate = turan_candidate(interval, problem.grid).integral
    assert solution.certified
    assert candidate - 1e-8 <= solution.value <= lattice_upper_bound(problem, Lattice([[1.0]])) + 1e-6
    assert solution.candidate_integral == pytest.approx(1.0, rel=1e-12)
    assert solution.value == pytest.approx(1.0, abs=1e-6)
    assert solution.grid_ratio >= 1 - 1e-8


def test_round_values_never_increase(interval):
    solution = solve_turan(_problem(interval, 64, 4.0, cuts_per_round=2))
    assert solution.rounds == len(solution.round_values) > 1
    assert np.all(np.diff(solution.round_values) <= 1e-9)
    assert solution.monotone
    assert solution.to_report()['monotone'] is True


def test_increasing_round_values_are_flagged(monkeypatch, caplog, interval):
    monkeypatch.setattr(TuranSolver, '_value', lambda self, y: float(len(self.round_values)))
    solution = solve_turan(_problem(interval, 64, 4.0, cuts_per_round=2))
    assert solution.rounds > 1
    assert not solution.monotone
    assert not solution.to_report()['monotone']
    assert 'increased' in caplog.text


def test_solution_is_symmetric_and_supported(disk):
    problem = _problem(disk, 32, 4.0)
    solution = solve_turan(problem)
    assert solution.status in STATUSES
    assert solution.f.at_origin == 1.0
    assert solution.f.is_symmetric()
    inside = disk.contains_points(problem.grid.nodes(), strict=True).reshape(problem.grid.shape)
    assert np.array_equal(inside.ravel(), problem.support())
    assert not np.any(solution.f.values[~inside])
    assert np.all(np.abs(solution.f.values) <= 1.0)
    assert len(solution.dual_weights) == len(solution.active_frequencies)


def test_matches_dense_oracle_in_one_dimension(interval):
    problem = _problem(interval, 32, 4.0)
    assert solve_turan(problem).value == pytest.approx(dense_oracle(problem).value, abs=1e-6)


@pytest.mark.parametrize('seed', range(3))
def test_matches_dense_oracle_on_random_polygons(seed):
    polygon = random_symmetric_polygon(np.random.default_rng(seed))
    problem = _problem(polygon, 16, 4.0)
    cutting_plane = solve_turan(problem)
    dense = dense_oracle(problem)
    assert cutting_plane.certified and dense.certified
    assert cutting_plane.value == pytest.approx(dense.value, abs=1e-6)


def test_dense_oracle_size_limit(square):
    with pytest.raises(ValueError):
        dense_oracle(_problem(square, 128, 4.0))


@pytest.mark.parametrize('t', [0.5, 2.0])
def test_scaling(interval, t):
    base = solve_turan(_problem(interval, 64, 4.0)).value
    scaled = solve_turan(_problem(interval.scale(t), 64, 4.0 * t)).value
    assert scaled == pytest.approx(t * base, rel=1e-7)


def test_cut_budget_exhausted(interval):
    solution = solve_turan(_problem(interval, 64, 4.0, max_cuts=2))
    assert solution.status == 'cut_budget_exhausted'
    assert solution.active_frequencies == [(0,), (1,)]
    assert solution.worst_violation > 0


def test_verify_solution_detects_corruption(interval):
    problem = _problem(interval, 64, 4.0)
    solution = solve_turan(problem)
    assert verify_solution(solution, problem).passed

    values = solution.f.values.copy()
    values[0] = 0.1
    leaked = dataclasses.replace(solution, f=solution.f.with_values(values))
    report = verify_solution(leaked, problem)
    assert not report.support_ok and not report.passed

    indicator = rasterize(interval, problem.grid, strict=True)
    report = verify_solution(dataclasses.replace(solution, f=indicator, value=indicator.integral), problem)
    assert report.support_ok and report.origin_ok and report.value_ok
    assert not report.pd_ok

    report = verify_solution(dataclasses.replace(solution, value=solution.value + 0.1), problem)
    assert not report.value_ok


def test_refine_study_trend(interval):
    # halfwidth N/4 - 1/2 cells: the optimum N/(N - 2) tends to 1
    pairs = [(4 * N / (N - 2), N) for N in (32, 64, 128)]
    frame = refine_study(interval, pairs)
    assert frame['value'].tolist() == pytest.approx([16 / 15, 32 / 31, 64 / 63], abs=1e-6)
    assert frame['error'].isna().all()
    assert frame.attrs['ratio_trend'] == 'toward_one'


def test_refine_study_records_errors(interval):
    frame = refine_study(interval, [(3.0, 64), (4.0, 32)])
    assert frame.loc[0, 'error'] is not None
    assert np.isnan(frame.loc[0, 'value'])
    assert frame.loc[1, 'status'] == 'certified'


@pytest.mark.slow
def test_refine_study_in_parallel(interval):
    pairs = [(4 * N / (N - 2), N) for N in (32, 64, 128, 256)]
    frame = refine_study(interval, pairs, n_jobs=2)
    assert frame['value'].tolist() == pytest.approx([16 / 15, 32 / 31, 64 / 63, 128 / 127], abs=1e-6)
    assert frame.attrs['ratio_trend'] == 'toward_one'


def test_solution_persistence(tmp_path, interval):
    solution = solve_turan(_problem(interval, 32, 4.0))
    file = str(tmp_path / 'solution.pkl')
    solution.save(file)
    loaded = TuranSolution.load(file)
    assert loaded.value == solution.value
    assert np.array_equal(loaded.f.values, solution.f.values)
    assert loaded.to_report() == solution.to_report()


def test_solver_model_persistence(tmp_path, interval):
    solver = TuranSolver(_problem(interval, 32, 4.0))
    solver.solve()
    file = solver.save_model(str(tmp_path / 'model'), checkpoint_overwrite=True)
    assert file.endswith('model.turan')
    loaded = TuranSolver.load_model(file)
    assert loaded.status == solver.status
    assert loaded.solution.value == solver.solution.value
    assert (tmp_path / 'model.turan.metadata.json').exists()
    assert (tmp_path / 'model.turan.summary.csv').exists()


@pytest.mark.parametrize('body, N, L', [
    (Box([1.0]), 64, 4.0),
    (Box([0.5, 0.5]), 32, 32 / 14),
    (Ball(1.0, 2), 32, 4.0),
])
def test_solutions_are_bounded_by_their_value_at_the_origin(body, N, L):
    solution = solve_turan(_problem(body, N, L))
    assert solution.certified
    assert np.max(np.abs(solution.f.values)) <= solution.f.at_origin + 1e-9


def test_restricted_lps_of_the_unit_square_stay_feasible(unit_cube):
    # the dual simplex used to report these warm-started restricted LPs as infeasible
    problem = _problem(unit_cube, 32, 32 / 14)
    solver = TuranSolver(problem)
    solution = solver.solve()
    assert solution.status == 'certified'
    assert solution.rounds > 1
    assert solution.duality_gap <= problem.tol_lp
    assert verify_solution(solution, problem).passed
    # 7 cells of halfwidth: the tensor Fejér kernel is feasible, 8 cells of lattice spacing bound it
    assert (7 * problem.grid.h) ** 2 - 1e-8 <= solution.value
    assert solution.value <= lattice_upper_bound(problem, Lattice.integer(2, 8 * problem.grid.h)) + 1e-8
