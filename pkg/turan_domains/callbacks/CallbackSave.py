import logging
from typing import List

from turan_domains.callbacks.CallbackBase import TuranCallbackBase


class TuranCallbackSaveCheckpoint(TuranCallbackBase):

    def __init__(self, checkpoint_file: str, checkpoint_frequency: int = -1, checkpoint_overwrite: bool = True, **kwargs):
        """ Save the solver every checkpoint_frequency rounds and once the solve ends

        A frequency of -1 (or 0) only saves on completion. Without overwrite every
        checkpoint gets its own file, suffixed with the round number.
        """
        super().__init__(**kwargs)

        self.checkpoint_file: str = checkpoint_file
        self.checkpoint_frequency: int = checkpoint_frequency
        self.checkpoint_overwrite: bool = checkpoint_overwrite
        self.saved_files: List[str] = list()

    def _checkpoint(self, reason: str) -> None:
        file = self.solver.save_model(file=self.checkpoint_file, checkpoint_overwrite=self.checkpoint_overwrite)
        self.saved_files.append(file)
        logging.debug(f"Checkpoint {file} ({reason}, status {self.solver.status})")
        if self.solver.verbose > 1:
            print(f'Saved {reason} checkpoint of round {self.solver.round} to {file}')

    def on_round_end(self, **kwargs):
        if self.checkpoint_frequency in (None, 0, -1):
            return

        if self.solver.round % self.checkpoint_frequency == 0:
            self._checkpoint('periodic')

    def on_solve_completed(self, **kwargs):
        # the last round may already be on disk but its status was not final yet
        self._checkpoint('final')
