import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from scipy import ndimage

from turan_domains.candidate import turan_candidate
from turan_domains.geometry.ConvexBody import Ball, ConvexBody, minkowski_difference
from turan_domains.solver.TuranProblem import TuranProblem, TuranSolution
from turan_domains.solver.TuranSolver import solve_turan
from turan_domains.torus.GridFunction import GridFunction, autocorrelate, min_spectrum
from turan_domains.torus.TorusGrid import TorusGrid, reflect_array
from turan_domains.utils import to_report_value


def radialize(f: GridFunction, n_angles: int = 64) -> GridFunction:
    """ Average of f over n_angles rotations by 2 pi k / n_angles

    Rotated copies are read off the grid by bilinear interpolation, with zero
    outside the period square. The average is symmetrized and keeps f(0)
    exactly.

    Args:
        - f: GridFunction
            symmetric space domain function on a 2D grid
        - n_angles: int (default: 64)
            number of sampled rotations

    Returns:
        - GridFunction
    """
    grid = f.grid
    if grid.dimension != 2:
        raise ValueError(f"radialize is only defined in dimension 2, got {grid.dimension}")
    if f.domain != 'space':
        raise ValueError("radialize expects a space domain function")
    if n_angles < 1:
        raise ValueError(f"n_angles must be positive, got {n_angles}")
    if not f.is_symmetric(1e-9):
        raise ValueError("radialize expects a symmetric function")

    indices = grid.index_vectors().astype(float)
    total = np.zeros(grid.size)
    for theta in 2 * np.pi * np.arange(n_angles) / n_angles:
        rotation = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        coordinates = (indices @ rotation.T + grid.N // 2).T
        total += ndimage.map_coordinates(f.values, coordinates, order=1, mode='constant', cval=0.0)

    average = total.reshape(grid.shape) / n_angles
    average = 0.5 * (average + reflect_array(average))
    average[grid.center] = f.at_origin
    return f.with_values(average)


@dataclass
class ChainReport:
    A: float
    identity: float
    identity_error: float
    B: float
    C: float
    body_grid_volume: float
    difference_body_grid_volume: float

    @property
    def holds(self) -> bool:
        scale = max(1.0, abs(self.identity))
        return (self.identity_error <= 1e-9 * scale
                and self.A <= self.B * (1 + 1e-12) + 1e-15
                and self.B <= self.C * (1 + 1e-12) + 1e-15)

    def to_report(self) -> Dict[str, Any]:
        return to_report_value({**self.__dict__, 'holds': self.holds})


def chain_check(g: GridFunction, K: ConvexBody) -> ChainReport:
    """ The chain int g*g~ = |int g|^2 <= |K| int g^2 = 2^-d |K - K| int g^2

    for g supported in K. The difference body volume uses K - K = 2K, so the
    last step is an equality; the grid volume of 2K is reported next to it.

    Args:
        - g: GridFunction
            space domain function supported in K
        - K: ConvexBody
            symmetric convex body of the grid dimension

    Returns:
        - ChainReport
    """
    grid = g.grid
    if g.domain != 'space':
        raise ValueError("chain_check expects a space domain function")
    if K.dimension != grid.dimension:
        raise ValueError(f"Body of dimension {K.dimension} on a grid of dimension {grid.dimension}")
    inside = K.contains_points(grid.nodes()).reshape(grid.shape)
    if np.any(g.values[~inside] != 0):
        raise ValueError(f"g is nonzero on {np.count_nonzero(g.values[~inside])} nodes outside {K!r}")

    h_d = grid.cell_volume
    integral = h_d * float(np.sum(g.values))
    energy = h_d * float(np.sum(g.values ** 2))
    body_volume = K.grid_volume(grid)

    A = autocorrelate(g).integral
    identity = integral ** 2
    B = body_volume * energy
    C = 2.0 ** (-grid.dimension) * (2.0 ** grid.dimension * body_volume) * energy
    return ChainReport(A=A,
                       identity=identity,
                       identity_error=abs(A - identity),
                       B=B,
                       C=C,
                       body_grid_volume=body_volume,
                       difference_body_grid_volume=minkowski_difference(K).grid_volume(grid))


@dataclass
class BallReport:
    solution: TuranSolution
    ratio: float
    grid_ratio: float
    radialized_value_change: float
    radialized_min_spectrum: float
    support_leak: int
    candidate_radial_deviation: float

    @property
    def pd_ok(self) -> bool:
        return self.radialized_min_spectrum >= -1e-6

    @property
    def support_ok(self) -> bool:
        return self.support_leak == 0

    @property
    def value_ok(self) -> bool:
        return self.radialized_value_change <= 0.01

    def to_report(self) -> Dict[str, Any]:
        report = {key: value for key, value in self.__dict__.items() if key != 'solution'}
        report.update(solution=self.solution.to_report(),
                      pd_ok=self.pd_ok,
                      support_ok=self.support_ok,
                      value_ok=self.value_ok)
        return to_report_value(report)


def ball_turan_check(L: float = 6.0, N: int = 64, n_angles: int = 64, radius: float = 1.0, **kwargs) -> BallReport:
    """ Solve the disk problem and test the radial reduction on its optimum

    The solver optimum is radialized; the result should stay positive definite,
    stay within one grid cell of the disk and keep its value. The flags of the
    report carry the verdicts.

    Args:
        - L: float (default: 6.0)
            period
        - N: int (default: 64)
            points per axis
        - n_angles: int (default: 64)
            rotations of the radial average
        - radius: float (default: 1.0)
            disk radius
        - kwargs
            forwarded to TuranProblem

    Returns:
        - BallReport
    """
    disk = Ball(radius, 2)
    grid = TorusGrid(2, N, L)
    solution = solve_turan(TuranProblem(disk, grid, **kwargs))

    radial = radialize(solution.f, n_angles)
    change = abs(radial.integral - solution.value) / abs(solution.value)
    neighbourhood = Ball(radius + np.sqrt(2) * grid.h, 2).contains_points(grid.nodes())
    leak = int(np.count_nonzero(np.abs(radial.values.ravel()[~neighbourhood]) > 1e-12))

    candidate = turan_candidate(disk, grid)
    deviation = float(np.max(np.abs(radialize(candidate, n_angles).values - candidate.values)))

    report = BallReport(solution=solution,
                        ratio=solution.ratio,
                        grid_ratio=solution.grid_ratio,
                        radialized_value_change=change,
                        radialized_min_spectrum=min_spectrum(radial)[0],
                        support_leak=leak,
                        candidate_radial_deviation=deviation)
    logging.info(f"Disk L={L}, N={N}: ratio {report.ratio:.6f}, radialized value change {change:.2e}")
    return report
