from abc import abstractmethod


class TuranCallbackBase:
    """ Hooks called by TuranSolver during a solve

    Attaching a callback to a solver sets `self.solver`. Subclasses override the
    hooks they need; a callback that raises is logged and skipped.
    """

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)

    def __repr__(self):
        return f"{self.__class__.__name__}({ {k: v for k, v in self.__dict__.items() if k != 'solver'} })"

    @abstractmethod
    def on_callback_set_init(self, **kwargs):
        pass

    @abstractmethod
    def on_solve_start(self, **kwargs):
        pass

    @abstractmethod
    def on_round_start(self, **kwargs):
        pass

    @abstractmethod
    def on_round_end(self, **kwargs):
        """ kwargs: spectrum (the DFT of the current iterate), value (restricted LP optimum) """
        pass

    @abstractmethod
    def on_cuts_added(self, **kwargs):
        """ kwargs: frequencies (flat positions of the orbits just added) """
        pass

    @abstractmethod
    def on_solve_completed(self, **kwargs):
        """ kwargs: solution (the TuranSolution) """
        pass
