import time

import numpy as np

from turan_domains.callbacks.CallbackBase import TuranCallbackBase
from turan_domains.utils import compress


class TuranRoundStatistics(TuranCallbackBase):
    """ Spectrum statistics of every iterate, written into solver.times """

    def __init__(self, **kwargs):
        super().__init__(**kwargs)

        self.statistics_computation_frequency = kwargs.get(
            'statistics_computation_frequency', 1)

    def on_round_end(self, **kwargs):
        spectrum = kwargs.get('spectrum', None)
        if spectrum is None:
            return
        if self.statistics_computation_frequency > 1 and self.solver.round % self.statistics_computation_frequency != 0:
            return

        before = time.perf_counter()
        tol = self.solver.problem.tol_pd
        negative = spectrum[spectrum < -tol]
        self.solver.times.loc[self.solver.round, 'count_violated_frequencies'] = negative.size
        self.solver.times.loc[self.solver.round, 'negative_spectral_mass'] = float(-np.sum(negative))
        self.solver.times.loc[self.solver.round, 'time_statistics'] = time.perf_counter() - before


class TuranHistory(TuranCallbackBase):
    """ Compressed snapshots of the iterate, every history_frequency rounds
    (-1: only the final one) """

    def __init__(self, **kwargs):
        super().__init__(**kwargs)

        self.history_frequency = kwargs.get('history_frequency', -1)

    def on_callback_set_init(self, **kwargs):
        self.solver.history = dict()

    def on_round_end(self, **kwargs):
        if self.history_frequency > 0 and self.solver.round % self.history_frequency == 0:
            if self.solver.verbose > 1:
                print(f'Saving iterate history for round {self.solver.round}')
            self.solver.history[self.solver.round] = compress(self.solver.f)

    def on_solve_completed(self, **kwargs):
        self.solver.history[self.solver.round] = compress(self.solver.f)
