import copy
import json
import logging
import os
import time
import traceback
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import cloudpickle
import numpy as np
import pandas as pd
from loky import get_reusable_executor

from turan_domains.callbacks.CallbackBase import TuranCallbackBase
from turan_domains.candidate import candidate_value, turan_candidate
from turan_domains.geometry.ConvexBody import ConvexBody
from turan_domains.geometry.Lattice import Lattice
from turan_domains.solver.simplex import DenseSimplex, SimplexError, SimplexResult
from turan_domains.solver.TuranProblem import TuranProblem, TuranSolution
from turan_domains.torus.GridFunction import GridFunction, dft, lattice_shifts
from turan_domains.torus.TorusGrid import TorusGrid
from turan_domains.utils import compress, decompress, to_report_value

# dense_oracle materializes every frequency constraint
DENSE_ORACLE_LIMIT = 4096


class TuranSolver:

    def __init__(self, problem: TuranProblem, callbacks: List[TuranCallbackBase] = list(), verbose: int = 0) -> None:
        """ Cutting-plane solver of a discretized Turán problem

        The unknowns are the values of f on one representative of every orbit
        {x, -x} of grid nodes strictly inside Ω, the origin excluded since f(0) = 1. They
        are written y = y0 + p - q around the candidate y0 with p, q >= 0, so
        the candidate is the starting vertex of the simplex and every restricted
        LP has a non negative right-hand side. The box constraints |f| <= 1 keep
        every restricted LP bounded; frequency constraints are added in rounds.

        Args:
            - problem: TuranProblem
                the discretized problem
            - callbacks: List[TuranCallbackBase] (default: list())
                hooks executed during the solve
            - verbose: int (default: 0)
                0 silent, 1 one line per round, 2 also the added cuts

        Returns:
            - None
        """
        if not isinstance(problem, TuranProblem):
            raise TypeError(f"Expected a TuranProblem, got {type(problem)}")

        self.problem: TuranProblem = problem
        self.verbose: int = verbose

        self.round: int = 0
        self.status: str = 'initialized'
        self.f: GridFunction = None
        self.solution: TuranSolution = None
        self.pool: List[int] = list()
        self.round_values: List[float] = list()
        self.monotone: bool = True
        self.last_result: SimplexResult = None
        self.spectrum: np.ndarray = None
        self.total_time: float = 0.0

        self.times: pd.DataFrame = pd.DataFrame(
            columns=['value',
                     'min_spectrum',
                     'duality_gap',
                     'n_cuts',
                     'pivots',
                     'time_lp',
                     'time_spectrum',
                     'time_round_total',]
        )

        self._setup()

        self._callbacks: List[TuranCallbackBase] = list()
        self.callbacks: List[TuranCallbackBase] = callbacks
        self._callback_terminate: bool = False

    def _setup(self) -> None:
        grid = self.problem.grid
        negated = grid.negated_positions()
        support = self.problem.support()
        origin = grid.center_flat

        positions = np.flatnonzero(support)
        positions = positions[(positions != origin) & (positions <= negated[positions])]
        self.orbit_positions: np.ndarray = positions
        self.orbit_weights: np.ndarray = np.where(negated[positions] == positions, 1.0, 2.0)
        self.orbit_indices: np.ndarray = grid.index_vectors()[positions]
        self.support: np.ndarray = support

        everything = np.arange(grid.size)
        self.frequency_positions: np.ndarray = everything[everything <= negated]

        self.candidate: GridFunction = turan_candidate(self.problem.body, grid)
        outside = np.flatnonzero((self.candidate.values.ravel() != 0) & ~support)
        if outside.size:
            logging.warning(f"The candidate is nonzero on {outside.size} nodes outside Ω: they are dropped")
        self.y0: np.ndarray = self.candidate.values.ravel()[positions]

        logging.debug(
            f"{self.problem!r}: {positions.size} orbit variables, {self.frequency_positions.size} frequency orbits")

    @property
    def callbacks(self):
        if hasattr(self, '_callbacks'):
            return self._callbacks
        else:
            return list()

    @callbacks.setter
    def callbacks(self, callbacks: List[TuranCallbackBase]):
        if not isinstance(callbacks, List):
            raise TypeError(
                f"Expected a list of TuranCallbackBase, got {type(callbacks)}")
        self._callbacks = callbacks
        for c in self._callbacks:
            c.solver = self
            try:
                c.on_callback_set_init()
            except Exception:
                logging.warning(
                    f"Callback {c.__class__.__name__} raised an exception on callback set init")
                logging.warning(traceback.format_exc())

    @property
    def callback_terminate(self) -> bool:
        return self._callback_terminate

    @callback_terminate.setter
    def callback_terminate(self, value: bool) -> None:
        self._callback_terminate = bool(value)

    def _run_callbacks(self, hook: str, **kwargs) -> None:
        for c in self.callbacks:
            try:
                getattr(c, hook)(**kwargs)
            except Exception:
                logging.warning(
                    f"Callback {c.__class__.__name__} raised an exception on {hook}")
                logging.warning(traceback.format_exc())

    @property
    def n_orbits(self) -> int:
        return self.orbit_positions.size

    def _cut_rows(self, frequency_positions: Sequence[int]) -> np.ndarray:
        """ sum_o w_o cos(2 pi m . k_o / N) for every frequency m, one row each """
        grid = self.problem.grid
        m = grid.index_vectors()[np.asarray(frequency_positions, dtype=int)]
        phases = 2 * np.pi * (m @ self.orbit_indices.T) / grid.N
        return np.cos(phases) * self.orbit_weights

    def _cut_constraints(self, frequency_positions: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
        A = self._cut_rows(frequency_positions)
        return np.hstack([-A, A]), np.maximum(1.0 + A @ self.y0, 0.0)

    def _build_lp(self, frequency_positions: Sequence[int]) -> DenseSimplex:
        n = self.n_orbits
        h_d = self.problem.grid.cell_volume
        c = h_d * np.concatenate([self.orbit_weights, -self.orbit_weights])

        box = np.eye(2 * n)
        box_rhs = np.concatenate([1.0 - self.y0, 1.0 + self.y0])
        A_cuts, b_cuts = self._cut_constraints(frequency_positions)

        return DenseSimplex(c,
                            np.vstack([box, A_cuts]),
                            np.concatenate([box_rhs, b_cuts]),
                            max_iterations=self.problem.max_iterations)

    def _embed(self, y: np.ndarray) -> GridFunction:
        grid = self.problem.grid
        negated = grid.negated_positions()
        values = np.zeros(grid.size)
        values[grid.center_flat] = 1.0
        values[self.orbit_positions] = y
        values[negated[self.orbit_positions]] = y
        return GridFunction(grid, values, 'space')

    def _value(self, y: np.ndarray) -> float:
        return float(self.problem.grid.cell_volume * (1.0 + self.orbit_weights @ y))

    def _initial_pool(self) -> List[int]:
        grid = self.problem.grid
        pool = [grid.center_flat]
        for j in range(grid.dimension):
            unit = np.array(grid.center)
            unit[j] += 1
            pool.append(int(np.ravel_multi_index(tuple(unit), grid.shape)))
        return pool

    def _select_cuts(self, spectrum: np.ndarray) -> np.ndarray:
        """ Violated frequency orbits outside the pool, most negative first,
        ties in lexicographic index order """
        candidates = self.frequency_positions[~np.isin(self.frequency_positions, self.pool)]
        values = spectrum[candidates]
        violated = values < -self.problem.tol_pd
        candidates, values = candidates[violated], values[violated]
        order = np.lexsort((candidates, values))
        return candidates[order]

    def solve(self, dense: bool = False) -> TuranSolution:
        """ Run the cutting-plane rounds until certification, budget
        exhaustion, numerical failure or a callback request

        Args:
            - dense: bool (default: False)
                start from every frequency orbit and solve a single LP

        Returns:
            - TuranSolution
        """
        start = time.perf_counter()
        try:
            self._solve(dense=dense)
        except KeyboardInterrupt:
            self.status = 'terminated'
            logging.warning(f"Solve terminated by a KeyboardInterrupt")
        self.total_time += time.perf_counter() - start

        self.solution = self._solution()
        self._run_callbacks('on_solve_completed', solution=self.solution)
        return self.solution

    def _solve(self, dense: bool = False) -> None:
        problem = self.problem
        grid = problem.grid

        self.round = 0
        self.status = 'running'
        self._callback_terminate = False
        self.pool = list(self.frequency_positions) if dense else self._initial_pool()
        self.y = self.y0.copy()
        self.f = self._embed(self.y)
        self.round_values = list()
        self.monotone = True
        self.last_result = None
        self.spectrum = dft(self.f).values.ravel()

        simplex = self._build_lp(self.pool)
        self._run_callbacks('on_solve_start')

        while True:
            self.round += 1
            round_start = time.perf_counter()
            self._run_callbacks('on_round_start')

            before = time.perf_counter()
            try:
                result = simplex.solve()
            except SimplexError as e:
                logging.warning(f"Restricted LP of round {self.round} failed: {e}")
                self.status = 'infeasible_numerics'
                self.round -= 1
                break
            self.times.loc[self.round, 'time_lp'] = time.perf_counter() - before

            n = self.n_orbits
            self.last_result = result
            self.y = np.clip(self.y0 + result.x[:n] - result.x[n:], -1.0, 1.0)
            self.f = self._embed(self.y)
            value = self._value(self.y)
            if self.round_values and value > self.round_values[-1] + 1e-9 * max(1.0, abs(self.round_values[-1])):
                self.monotone = False
                logging.warning(
                    f"Restricted optimum increased from {self.round_values[-1]:.12g} to {value:.12g} in round {self.round}")
            self.round_values.append(value)

            before = time.perf_counter()
            self.spectrum = dft(self.f).values.ravel()
            minimum = float(self.spectrum.min())
            self.times.loc[self.round, 'time_spectrum'] = time.perf_counter() - before

            self.times.loc[self.round, 'value'] = value
            self.times.loc[self.round, 'min_spectrum'] = minimum
            self.times.loc[self.round, 'duality_gap'] = result.duality_gap
            self.times.loc[self.round, 'n_cuts'] = len(self.pool)
            self.times.loc[self.round, 'pivots'] = result.iterations

            if self.verbose > 0:
                print(f"Round {self.round}: value {value:.10g}, min spectrum {minimum:.3e}, "
                      f"{len(self.pool)} cuts, {result.iterations} pivots")

            self._run_callbacks('on_round_end', spectrum=self.spectrum, value=value)
            self.times.loc[self.round, 'time_round_total'] = time.perf_counter() - round_start

            if minimum >= -problem.tol_pd and result.duality_gap <= problem.tol_lp:
                self.status = 'certified'
                break
            if self._callback_terminate:
                self.status = 'terminated'
                if self.verbose > 0:
                    print("Solve terminated by callback")
                break

            new_cuts = self._select_cuts(self.spectrum)
            if new_cuts.size == 0:
                logging.warning(
                    f"No new violated frequency in round {self.round} although the iterate is not certified "
                    f"(min spectrum {minimum:.3e}, duality gap {result.duality_gap:.3e})")
                self.status = 'infeasible_numerics'
                break
            room = problem.max_cuts - len(self.pool)
            if room <= 0:
                logging.info(f"Cut budget of {problem.max_cuts} frequencies exhausted in round {self.round}")
                self.status = 'cut_budget_exhausted'
                break

            new_cuts = new_cuts[:min(problem.cuts_per_round, room)]
            simplex.add_rows(*self._cut_constraints(new_cuts))
            self.pool.extend(int(q) for q in new_cuts)

            if self.verbose > 1:
                added = grid.index_vectors()[new_cuts]
                print(f"Added frequencies {[tuple(int(k) for k in m) for m in added]}")
            self._run_callbacks('on_cuts_added', frequencies=new_cuts)

    def _solution(self) -> TuranSolution:
        problem = self.problem
        grid = problem.grid
        f = self.f if self.f is not None else self.candidate
        value = f.integral
        index_vectors = grid.index_vectors()
        spectrum = self.spectrum if self.spectrum is not None else dft(f).values.ravel()

        if self.last_result is not None:
            dual_weights = [float(w) for w in self.last_result.duals[2 * self.n_orbits:]]
            # cuts added after the last solved LP carry no dual yet
            dual_weights += [0.0] * (len(self.pool) - len(dual_weights))
            duality_gap = self.last_result.duality_gap
            pivots = self.last_result.iterations
        else:
            dual_weights = [0.0] * len(self.pool)
            duality_gap = float('nan')
            pivots = 0

        return TuranSolution(f=f,
                             value=value,
                             ratio=value / candidate_value(problem.body, grid),
                             grid_ratio=value / self.candidate.integral,
                             candidate_integral=self.candidate.integral,
                             worst_violation=max(0.0, -float(spectrum.min())),
                             rounds=self.round,
                             active_frequencies=[tuple(int(k) for k in index_vectors[q]) for q in self.pool],
                             dual_weights=dual_weights,
                             duality_gap=duality_gap,
                             status=self.status,
                             round_values=list(self.round_values),
                             pivots=pivots,
                             monotone=self.monotone)

    @property
    def summary(self) -> pd.DataFrame:
        return self.times.copy()

    @property
    def metadata(self) -> Dict[str, Any]:
        metadata = {
            **self.problem.metadata,
            'n_orbits': int(self.n_orbits),
            'n_cuts': len(self.pool),
            'round': self.round,
            'status': self.status,
            'total_time': self.total_time,
            'value': self.f.integral if self.f is not None else None,
        }
        return to_report_value(metadata)

    def save_model(self, file: str, checkpoint_overwrite: bool = None):
        if not checkpoint_overwrite:
            file = file + f".round{str(self.round).zfill(4)}.turan"
        else:
            file = file + ".turan"

        directory = os.path.dirname(file)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)

        with open(file, "wb") as f:
            self_copy = copy.copy(self)
            self_copy._callbacks = list()
            cloudpickle.dump(compress(self_copy), f)

        with open(file + ".metadata.json", "w") as f:
            json.dump(self.metadata, f, sort_keys=True)

        with open(file + ".summary.csv", "w") as f:
            self.summary.to_csv(f)

        return file

    @staticmethod
    def load_model(file: str) -> 'TuranSolver':
        with open(file, "rb") as f:
            solver: TuranSolver = cloudpickle.load(f)

        try:
            solver = decompress(solver)
            logging.debug(f"Loaded compressed model from {file}")
        except TypeError:
            pass

        return solver

    def __repr__(self) -> str:
        return f"TuranSolver({self.problem!r}, status={self.status}, round={self.round})"


def solve_turan(p: TuranProblem, callbacks: List[TuranCallbackBase] = None, verbose: int = 0) -> TuranSolution:
    return TuranSolver(p, callbacks=callbacks or list(), verbose=verbose).solve()


def dense_oracle(p: TuranProblem) -> TuranSolution:
    """ The same LP with every frequency constraint present from the start """
    if p.grid.size > DENSE_ORACLE_LIMIT:
        raise ValueError(
            f"dense_oracle needs N^d <= {DENSE_ORACLE_LIMIT}, got {p.grid.size} for {p.grid!r}")
    return TuranSolver(p).solve(dense=True)


@dataclass
class VerificationReport:
    support_ok: bool
    origin_ok: bool
    pd_ok: bool
    value_ok: bool
    min_spectrum: float
    value: float

    @property
    def passed(self) -> bool:
        return self.support_ok and self.origin_ok and self.pd_ok and self.value_ok

    def to_report(self) -> Dict[str, Any]:
        return to_report_value({**self.__dict__, 'passed': self.passed})


def verify_solution(s: TuranSolution, p: TuranProblem) -> VerificationReport:
    """ Independent feasibility check of a solution against its problem """
    f = s.f
    support = p.support()
    support_ok = bool(not np.any(f.values.ravel()[~support] != 0)) and f.grid == p.grid

    try:
        minimum = float(dft(f).values.min())
    except ValueError:
        # not symmetric: the spectrum is not real
        minimum = float('-inf')

    value = f.integral
    return VerificationReport(support_ok=support_ok,
                              origin_ok=f.at_origin == 1.0,
                              pd_ok=minimum >= -p.tol_pd,
                              value_ok=abs(value - s.value) <= 1e-12 * max(1.0, abs(value)),
                              min_spectrum=minimum,
                              value=value)


def lattice_upper_bound(problem: TuranProblem, lat: Lattice) -> float:
    """ Upper bound |det G| on h^d sum f for every feasible f

    Summing f over the subgroup of shifts of a commensurate lattice leaves only
    f(0) when no other lattice point meets the support, while the same sum is
    |H| N^-d times the sum of the non negative spectrum over the annihilator of
    H, frequency 0 included.
    """
    grid = problem.grid
    shifts = lattice_shifts(lat, grid)
    shifts = shifts[np.any(shifts != 0, axis=1)]
    support = problem.support().reshape(grid.shape)
    positions = tuple(((shifts + grid.N // 2) % grid.N).T)
    hits = support[positions]
    if np.any(hits):
        hit = shifts[np.argmax(hits)]
        raise ValueError(f"The lattice point with index shift {hit.tolist()} lies on a support node of {problem.body!r}")
    return float(grid.cell_volume * grid.size / (shifts.shape[0] + 1))


def _study_row(body: ConvexBody, L: float, N: int, kwargs: Dict[str, Any]) -> Dict[str, Any]:
    row = {'L': float(L), 'N': int(N)}
    start = time.perf_counter()
    try:
        problem = TuranProblem(body, TorusGrid(body.dimension, N, L), **kwargs)
        solution = solve_turan(problem)
        row.update(value=solution.value,
                   ratio=solution.ratio,
                   grid_ratio=solution.grid_ratio,
                   worst_violation=solution.worst_violation,
                   rounds=solution.rounds,
                   status=solution.status,
                   error=None)
    except (ValueError, SimplexError) as e:
        logging.warning(f"Study row L={L}, N={N} failed: {e}")
        row.update(value=np.nan, ratio=np.nan, grid_ratio=np.nan, worst_violation=np.nan,
                   rounds=0, status=None, error=str(e))
    row['wall_time'] = time.perf_counter() - start
    return row


def refine_study(body: ConvexBody, pairs: Sequence[Tuple[float, int]], n_jobs: int = 1, **kwargs) -> pd.DataFrame:
    """ Solve the problem of one body on a sequence of grids

    Args:
        - body: ConvexBody
            the body Ω
        - pairs: Sequence[Tuple[float, int]]
            (L, N) per row
        - n_jobs: int (default: 1)
            rows solved in parallel on a loky pool; -1 uses every core
        - kwargs
            forwarded to TuranProblem

    Returns:
        - pd.DataFrame
            one row per pair; frame.attrs['ratio_trend'] is 'toward_one' when
            |ratio - 1| never grows along the successful rows, else 'not_monotone'
    """
    pairs = [(float(L), int(N)) for L, N in pairs]
    if n_jobs == 1:
        rows = [_study_row(body, L, N, kwargs) for L, N in pairs]
    else:
        jobs = n_jobs if n_jobs > 0 else os.cpu_count()
        executor = get_reusable_executor(max_workers=jobs, timeout=100)
        rows = list(executor.map(lambda pair: _study_row(body, pair[0], pair[1], kwargs), pairs))

    frame = pd.DataFrame(rows, columns=['L', 'N', 'value', 'ratio', 'grid_ratio', 'worst_violation',
                                        'rounds', 'status', 'wall_time', 'error'])
    distances = np.abs(frame['ratio'].dropna().to_numpy(dtype=float) - 1.0)
    toward_one = bool(np.all(np.diff(distances) <= 1e-12))
    frame.attrs['ratio_trend'] = 'toward_one' if toward_one else 'not_monotone'
    logging.info(f"refine_study on {body!r}: ratio trend {frame.attrs['ratio_trend']}")
    return frame
