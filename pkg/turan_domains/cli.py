import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from turan_domains.candidate import candidate_gap, candidate_value, grid_allowance, turan_candidate
from turan_domains.config import ConfigError, load_body, load_lattice
from turan_domains.geometry.ConvexBody import Ball, ConvexBody, distance_lemma_residual, random_symmetric_polygon
from turan_domains.radial import ball_turan_check, chain_check, radialize
from turan_domains.solver.TuranProblem import TuranProblem
from turan_domains.solver.TuranSolver import TuranSolver, dense_oracle, refine_study, verify_solution
from turan_domains.tiling import fuglede_pipeline, lattice_tiling_check, spectral_pair_check, support_condition_check
from turan_domains.torus.GridFunction import GridFunction, rasterize
from turan_domains.torus.TorusGrid import TorusGrid
from turan_domains.utils import SCHEMA_VERSION, to_report_value

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2


def _grid_pair(text: str) -> Tuple[float, int]:
    try:
        L, N = text.split(':')
        return float(L), int(N)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected L:N, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='turan_domains',
        description="Discretized Turán problem for symmetric convex bodies, with tiling and spectral checks.")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-v', '--verbose', action='count', default=0, help="-v info, -vv debug")
    common.add_argument('--seed', type=int, default=0, help="seed of every randomized step")
    common.add_argument('--out', default=None, help="write the JSON report to this file")
    common.add_argument('--csv', action='store_true', help="also dump grid functions next to --out")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument('--body', required=True, help="JSON body configuration")
    problem.add_argument('--L', type=float, required=True, help="period of the torus")
    problem.add_argument('--N', type=int, required=True, help="grid points per axis")

    lattice = argparse.ArgumentParser(add_help=False)
    lattice.add_argument('--body', required=True, help="JSON body configuration")
    lattice.add_argument('--lattice', required=True, help="JSON lattice configuration")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument('--tol-pd', type=float, default=1e-8)
    solver.add_argument('--tol-lp', type=float, default=1e-9)
    solver.add_argument('--max-cuts', type=int, default=None)
    solver.add_argument('--cuts-per-round', type=int, default=16)

    subparsers = parser.add_subparsers(dest='command', required=True)

    solve = subparsers.add_parser('solve', parents=[common, problem, solver], help="solve the Turán LP")
    solve.add_argument('--dense', action='store_true', help="all frequency constraints up front")
    solve.add_argument('--save', default=None, help="save the solver model to this path")

    subparsers.add_parser('candidate', parents=[common, problem], help="the autocorrelation candidate")

    tiling = subparsers.add_parser('tiling', parents=[common, lattice], help="lattice tiling check")
    tiling.add_argument('--N', type=int, default=64)
    tiling.add_argument('--L', type=float, default=None, help="period (default: 4 times the largest halfwidth)")
    tiling.add_argument('--threshold', type=float, default=0.95)

    spectrum = subparsers.add_parser('spectrum', parents=[common, lattice], help="spectral pair check")
    spectrum.add_argument('--radius', type=int, default=40, help="truncation radius in lattice coefficients")
    spectrum.add_argument('--samples', type=int, default=16)
    spectrum.add_argument('--tolerance', type=float, default=2e-4)

    subparsers.add_parser('support', parents=[common, lattice], help="Fourier support condition")

    radial = subparsers.add_parser('radial-demo', parents=[common, solver], help="radial reduction on the disk")
    radial.add_argument('--L', type=float, default=6.0)
    radial.add_argument('--N', type=int, default=64)
    radial.add_argument('--n-angles', type=int, default=64)

    study = subparsers.add_parser('study', parents=[common, solver], help="solve on a sequence of grids")
    study.add_argument('--body', required=True, help="JSON body configuration")
    study.add_argument('--grid', type=_grid_pair, action='append', required=True, help="L:N, repeatable")
    study.add_argument('--n-jobs', type=int, default=1)

    lemma = subparsers.add_parser('lemma-check', parents=[common], help="distance lemma on random polygons")
    lemma.add_argument('--trials', type=int, default=20)
    lemma.add_argument('--N', type=int, default=160)
    lemma.add_argument('--L', type=float, default=5.0, help="period; beta*Ω must fit for beta up to 2")

    fuglede = subparsers.add_parser('fuglede', parents=[common, lattice], help="tiling, spectrum and support together")
    fuglede.add_argument('--N', type=int, default=64)
    fuglede.add_argument('--L', type=float, default=None)
    fuglede.add_argument('--radius', type=int, default=40)

    return parser


def _problem_options(args: argparse.Namespace) -> Dict[str, Any]:
    return {'tol_pd': args.tol_pd, 'tol_lp': args.tol_lp, 'max_cuts': args.max_cuts,
            'cuts_per_round': args.cuts_per_round}


def _default_period(body: ConvexBody, L: float) -> float:
    return L if L is not None else 4.0 * float(np.max(body.bounding_halfwidths))


def _csv_path(args: argparse.Namespace, name: str) -> str:
    stem = os.path.splitext(args.out)[0]
    return f"{stem}.{name}.csv"


def _solve(args: argparse.Namespace) -> Tuple[Dict, int, str]:
    body = load_body(args.body)
    problem = TuranProblem(body, TorusGrid(body.dimension, args.N, args.L), **_problem_options(args))
    if args.dense:
        solution = dense_oracle(problem)
    else:
        solver = TuranSolver(problem, verbose=args.verbose)
        solution = solver.solve()
        if args.save:
            solver.save_model(args.save, checkpoint_overwrite=True)
    verification = verify_solution(solution, problem)
    if args.csv:
        solution.f.to_csv(_csv_path(args, 'f'))

    report = {'solution': solution.to_report(), 'verification': verification.to_report()}
    code = EXIT_OK if solution.certified and verification.passed else EXIT_CHECK_FAILED
    summary = f"value {solution.value:.12g}, ratio {solution.ratio:.6f}, {solution.status} after {solution.rounds} rounds"
    return report, code, summary


def _candidate(args: argparse.Namespace) -> Tuple[Dict, int, str]:
    body = load_body(args.body)
    grid = TorusGrid(body.dimension, args.N, args.L)
    f = turan_candidate(body, grid)
    if args.csv:
        f.to_csv(_csv_path(args, 'candidate'))
    report = {'grid': grid.to_dict(),
              'integral': f.integral,
              'candidate_value': candidate_value(body, grid),
              'candidate_gap': candidate_gap(body, grid),
              'grid_allowance': grid_allowance(body, grid)}
    return report, EXIT_OK, f"candidate integral {f.integral:.12g}"


def _tiling(args: argparse.Namespace) -> Tuple[Dict, int, str]:
    body, lat = load_body(args.body), load_lattice(args.lattice)
    grid = TorusGrid(body.dimension, args.N, _default_period(body, args.L))
    coverage = lattice_tiling_check(body, lat, grid, threshold=args.threshold)
    code = EXIT_OK if coverage.passed else EXIT_CHECK_FAILED
    return coverage.to_report(), code, f"fraction covered once {coverage.fraction_exactly_one:.4f} ({coverage.method})"


def _spectrum(args: argparse.Namespace) -> Tuple[Dict, int, str]:
    body, lat = load_body(args.body), load_lattice(args.lattice)
    report = spectral_pair_check(body, lat, radius=args.radius, n_samples=args.samples, seed=args.seed,
                                 tolerance=args.tolerance)
    code = EXIT_OK if report.spectral else EXIT_CHECK_FAILED
    return report.to_report(), code, f"{report.status}: off-diagonal {report.max_offdiagonal:.3e}, level error {report.parseval_level_error:.3e}"


def _support(args: argparse.Namespace) -> Tuple[Dict, int, str]:
    body, lat = load_body(args.body), load_lattice(args.lattice)
    report = support_condition_check(body, lat)
    code = EXIT_OK if report.holds else EXIT_CHECK_FAILED
    return report.to_report(), code, f"support condition {report.verdict}, witness {report.witness}"


def _radial_demo(args: argparse.Namespace) -> Tuple[Dict, int, str]:
    grid = TorusGrid(2, args.N, args.L)
    x = grid.nodes()
    gaussian = np.exp(-np.pi * np.sum(x ** 2, axis=1))
    f = GridFunction(grid, gaussian)
    fixed_point = float(np.max(np.abs(radialize(f, args.n_angles).values - f.values)))

    g = rasterize(Ball(0.5, 2), grid)
    chain = chain_check(g, Ball(1.0, 2))
    ball = ball_turan_check(args.L, args.N, args.n_angles, **_problem_options(args))
    if args.csv:
        ball.solution.f.to_csv(_csv_path(args, 'disk'))

    report = {'radial_fixed_point_deviation': fixed_point,
              'chain': chain.to_report(),
              'ball': ball.to_report()}
    ok = chain.holds and ball.pd_ok and ball.support_ok and ball.value_ok
    return report, EXIT_OK if ok else EXIT_CHECK_FAILED, f"disk ratio {ball.ratio:.6f}, chain {'holds' if chain.holds else 'fails'}"


def _study(args: argparse.Namespace) -> Tuple[Dict, int, str]:
    body = load_body(args.body)
    frame = refine_study(body, args.grid, n_jobs=args.n_jobs, **_problem_options(args))
    if args.csv:
        frame.to_csv(_csv_path(args, 'study'), index=False)
    rows = frame.drop(columns=['wall_time']).to_dict(orient='records')
    report = {'rows': rows, 'ratio_trend': frame.attrs['ratio_trend']}
    code = EXIT_OK if frame['error'].isna().all() else EXIT_CHECK_FAILED
    return report, code, frame.to_string(index=False)


def _lemma_check(args: argparse.Namespace) -> Tuple[Dict, int, str]:
    rng = np.random.default_rng(args.seed)
    grid = TorusGrid(2, args.N, args.L)
    threshold = 2 * np.sqrt(grid.dimension) * grid.h
    trials = list()
    for _ in range(args.trials):
        polygon = random_symmetric_polygon(rng)
        alpha, beta = (float(t) for t in np.sort(rng.uniform(0.0, 2.0, 2)))
        trials.append({'alpha': alpha, 'beta': beta,
                       'residual': distance_lemma_residual(polygon, alpha, beta, grid)})
    worst = max(t['residual'] for t in trials)
    report = {'trials': trials, 'max_residual': worst, 'threshold': threshold}
    return report, EXIT_OK if worst <= threshold else EXIT_CHECK_FAILED, f"max residual {worst:.3e} (threshold {threshold:.3e})"


def _fuglede(args: argparse.Namespace) -> Tuple[Dict, int, str]:
    body, lat = load_body(args.body), load_lattice(args.lattice)
    grid = TorusGrid(body.dimension, args.N, _default_period(body, args.L))
    report = fuglede_pipeline(body, lat, grid, radius=args.radius, seed=args.seed)
    code = EXIT_OK if report.consistent else EXIT_CHECK_FAILED
    return report.to_report(), code, f"tiles {report.tiles}, {report.spectral.status}, support {report.support.verdict}"


COMMANDS = {
    'solve': _solve,
    'candidate': _candidate,
    'tiling': _tiling,
    'spectrum': _spectrum,
    'support': _support,
    'radial-demo': _radial_demo,
    'study': _study,
    'lemma-check': _lemma_check,
    'fuglede': _fuglede,
}


def _emit(report: Dict, args: argparse.Namespace, summary: str) -> None:
    document = to_report_value({'schema_version': SCHEMA_VERSION, 'command': args.command, **report})
    text = json.dumps(document, sort_keys=True, indent=2)
    if args.out:
        directory = os.path.dirname(args.out)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
        with open(args.out, 'w') as f:
            f.write(text + '\n')
        print(summary)
    else:
        print(text)


def run(argv: Sequence[str] = None) -> int:
    """ Execute one subcommand; 0 success, 1 failed check, 2 input error """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.csv and not args.out:
            parser.error("--csv requires --out")
    except SystemExit as e:
        return EXIT_INPUT_ERROR if e.code else EXIT_OK

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format='%(levelname)s %(message)s')

    try:
        report, code, summary = COMMANDS[args.command](args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    _emit(report, args, summary)
    return code


def main() -> None:
    sys.exit(run())
