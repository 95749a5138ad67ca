import os

import numpy as np
import pytest

from turan_domains.callbacks import (TuranCallbackBase, TuranCallbackSaveCheckpoint, TuranHistory,
                                     TuranRoundStatistics)
from turan_domains.geometry.ConvexBody import Box
from turan_domains.solver import TuranProblem, TuranSolver
from turan_domains.torus.TorusGrid import TorusGrid
from turan_domains.utils import decompress


class StopAfterFirstRound(TuranCallbackBase):

    def on_round_end(self, **kwargs):
        self.solver.callback_terminate = True


class RecordHooks(TuranCallbackBase):

    def on_callback_set_init(self, **kwargs):
        self.calls = ['on_callback_set_init']

    def on_solve_start(self, **kwargs):
        self.calls.append('on_solve_start')

    def on_round_end(self, **kwargs):
        self.calls.append('on_round_end')
        self.values = getattr(self, 'values', list()) + [kwargs['value']]

    def on_cuts_added(self, **kwargs):
        self.calls.append('on_cuts_added')
        self.added = getattr(self, 'added', 0) + len(kwargs['frequencies'])

    def on_solve_completed(self, **kwargs):
        self.calls.append('on_solve_completed')
        self.solution = kwargs['solution']


class Broken(TuranCallbackBase):

    def on_round_end(self, **kwargs):
        raise RuntimeError('broken callback')


@pytest.fixture
def problem():
    return TuranProblem(Box([1.0]), TorusGrid(1, 64, 4.0), cuts_per_round=4)


def test_callback_terminates_the_solve(problem):
    solution = TuranSolver(problem, callbacks=[StopAfterFirstRound()]).solve()
    assert solution.status == 'terminated'
    assert solution.rounds == 1


def test_hooks_are_called_in_order(problem):
    recorder = RecordHooks()
    solver = TuranSolver(problem, callbacks=[recorder])
    solution = solver.solve()
    assert recorder.solver is solver
    assert recorder.calls[:3] == ['on_callback_set_init', 'on_solve_start', 'on_round_end']
    assert recorder.calls[-1] == 'on_solve_completed'
    assert recorder.calls.count('on_round_end') == solution.rounds
    assert recorder.added == len(solution.active_frequencies) - 2
    assert recorder.values == solution.round_values
    assert recorder.solution is solution


def test_broken_callback_does_not_stop_the_solve(problem):
    solution = TuranSolver(problem, callbacks=[Broken()]).solve()
    assert solution.status == 'certified'


def test_callbacks_must_be_a_list(problem):
    with pytest.raises(TypeError):
        TuranSolver(problem, callbacks=RecordHooks())


def test_round_statistics(problem):
    solver = TuranSolver(problem, callbacks=[TuranRoundStatistics()])
    solution = solver.solve()
    summary = solver.summary
    assert len(summary) == solution.rounds
    assert summary['count_violated_frequencies'].iloc[-1] == 0
    assert summary['count_violated_frequencies'].iloc[0] > 0
    assert np.all(summary['negative_spectral_mass'].to_numpy(dtype=float) >= 0)


def test_history(problem):
    solver = TuranSolver(problem, callbacks=[TuranHistory(history_frequency=1)])
    solution = solver.solve()
    assert sorted(solver.history) == list(range(1, solution.rounds + 1))
    final = decompress(solver.history[solution.rounds])
    assert np.array_equal(final.values, solution.f.values)


def test_checkpoints(tmp_path, problem):
    stem = str(tmp_path / 'checkpoints' / 'interval')
    callback = TuranCallbackSaveCheckpoint(checkpoint_file=stem, checkpoint_frequency=1, checkpoint_overwrite=False)
    solver = TuranSolver(problem, callbacks=[callback])
    solution = solver.solve()

    first = stem + '.round0001.turan'
    last = stem + f'.round{str(solution.rounds).zfill(4)}.turan'
    assert os.path.exists(first)
    assert os.path.exists(first + '.metadata.json')
    loaded = TuranSolver.load_model(last)
    assert loaded.status == 'certified'
    assert loaded.round == solution.rounds
    assert loaded.callbacks == list()
    assert callback.saved_files[-1] == last


def test_checkpoint_on_completion_only(tmp_path, problem):
    stem = str(tmp_path / 'final')
    solver = TuranSolver(problem, callbacks=[TuranCallbackSaveCheckpoint(checkpoint_file=stem)])
    solver.solve()
    assert os.path.exists(stem + '.turan')
    assert TuranSolver.load_model(stem + '.turan').solution.value == solver.solution.value
