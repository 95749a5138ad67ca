import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import cloudpickle
import numpy as np

from turan_domains.geometry.ConvexBody import ConvexBody
from turan_domains.torus.GridFunction import GridFunction
from turan_domains.torus.TorusGrid import TorusGrid
from turan_domains.utils import SCHEMA_VERSION, compress, decompress, to_report_value

STATUSES = ('certified', 'cut_budget_exhausted', 'infeasible_numerics', 'terminated')


class TuranProblem:

    def __init__(self, body: ConvexBody, grid: TorusGrid, tol_pd: float = 1e-8, tol_lp: float = 1e-9, max_cuts: int = None, cuts_per_round: int = 16, max_iterations: int = 200000) -> None:
        """ The discretized Turán problem: maximize h^d sum f over symmetric grid
        functions supported on the nodes strictly inside Ω, with f(0) = 1 and
        nonnegative discrete spectrum

        Args:
            - body: ConvexBody
                the symmetric convex body Ω
            - grid: TorusGrid
                the discretization; 2Ω must lie in the closed period cube
            - tol_pd: float (default: 1e-8)
                accepted spectral violation for certification
            - tol_lp: float (default: 1e-9)
                accepted duality gap of the restricted LP for certification
            - max_cuts: int (default: 50 * N^(d/2))
                cap on the number of frequency constraints in the pool
            - cuts_per_round: int (default: 16)
                frequencies added per cutting-plane round
            - max_iterations: int (default: 200000)
                cap on simplex pivots over the whole solve

        Returns:
            - None
        """
        if body.dimension != grid.dimension:
            raise ValueError(f"Body of dimension {body.dimension} on a grid of dimension {grid.dimension}")
        if not grid.fits(body.scale(2.0), strict=False):
            raise ValueError(f"2Ω must lie in the period cube of {grid!r}; {body!r} is too large")
        if tol_pd <= 0 or tol_lp <= 0:
            raise ValueError(f"Tolerances must be positive, got tol_pd={tol_pd}, tol_lp={tol_lp}")
        if max_cuts is None:
            max_cuts = int(50 * grid.N ** (grid.dimension / 2))
        if max_cuts < grid.dimension + 1:
            raise ValueError(f"max_cuts must leave room for the {grid.dimension + 1} initial frequencies, got {max_cuts}")
        if cuts_per_round < 1:
            raise ValueError(f"cuts_per_round must be positive, got {cuts_per_round}")

        self.body: ConvexBody = body
        self.grid: TorusGrid = grid
        self.tol_pd: float = float(tol_pd)
        self.tol_lp: float = float(tol_lp)
        self.max_cuts: int = int(max_cuts)
        self.cuts_per_round: int = int(cuts_per_round)
        self.max_iterations: int = int(max_iterations)

    def support(self) -> np.ndarray:
        """ Flat mask of the admissible support: nodes in the interior of Ω

        Nodes on the boundary are excluded, so a box of halfwidth Mh carries
        2M - 1 nodes per axis.
        """
        return self.body.contains_points(self.grid.nodes(), strict=True)

    @property
    def metadata(self) -> Dict[str, Any]:
        return {
            'body': self.body.to_config(),
            'grid': self.grid.to_dict(),
            'tol_pd': self.tol_pd,
            'tol_lp': self.tol_lp,
            'max_cuts': self.max_cuts,
            'cuts_per_round': self.cuts_per_round,
            'max_iterations': self.max_iterations,
        }

    def __repr__(self) -> str:
        return f"TuranProblem({self.body!r}, {self.grid!r})"


@dataclass
class TuranSolution:
    f: GridFunction
    value: float
    ratio: float
    grid_ratio: float
    candidate_integral: float
    worst_violation: float
    rounds: int
    active_frequencies: List[Tuple[int, ...]]
    dual_weights: List[float]
    duality_gap: float
    status: str
    round_values: List[float] = field(default_factory=list)
    pivots: int = 0
    monotone: bool = True

    @property
    def certified(self) -> bool:
        return self.status == 'certified'

    def to_report(self) -> Dict[str, Any]:
        """ Machine-readable report of everything but the grid values """
        return to_report_value({
            'schema_version': SCHEMA_VERSION,
            'grid': self.f.grid.to_dict(),
            'value': self.value,
            'ratio': self.ratio,
            'grid_ratio': self.grid_ratio,
            'candidate_integral': self.candidate_integral,
            'worst_violation': self.worst_violation,
            'rounds': self.rounds,
            'active_frequencies': [list(m) for m in self.active_frequencies],
            'dual_weights': self.dual_weights,
            'duality_gap': self.duality_gap,
            'status': self.status,
            'round_values': self.round_values,
            'pivots': self.pivots,
            'monotone': self.monotone,
        })

    def save(self, file: str) -> None:
        directory = os.path.dirname(file)
        if directory and not os.path.exists(directory):
            os.makedirs(directory)
        with open(file, 'wb') as f:
            cloudpickle.dump(compress(self), f)

    @staticmethod
    def load(file: str) -> 'TuranSolution':
        with open(file, 'rb') as f:
            solution = cloudpickle.load(f)
        try:
            solution = decompress(solution)
            logging.debug(f"Loaded compressed solution from {file}")
        except TypeError:
            pass
        return solution
