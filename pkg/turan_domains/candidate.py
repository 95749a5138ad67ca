import logging

import numpy as np

from turan_domains.geometry.ConvexBody import ConvexBody
from turan_domains.torus.GridFunction import GridFunction, autocorrelate, rasterize
from turan_domains.torus.TorusGrid import TorusGrid


def turan_candidate(body: ConvexBody, grid: TorusGrid) -> GridFunction:
    """ Normalized autocorrelation of the indicator of Ω/2

    Ω/2 is sampled at the cell centres (k + 1/2) h of its interior. The grid
    autocorrelation of an indicator is h^d times an integer pair count, so the
    counts are rounded back to integers and divided by the count at the origin:
    f(0) = 1 holds exactly, and the support is the difference set of the
    sampled centres. Those differences are nodes in the interior of Ω, which
    is the support the solver admits.

    When no cell centre lies inside Ω/2 the candidate is the unit mass at the
    origin.

    Args:
        - body: ConvexBody
            the symmetric convex body Ω; it must fit in the period cube
        - grid: TorusGrid
            the discretization

    Returns:
        - GridFunction
            the candidate extremizer
    """
    if not grid.fits(body, strict=True):
        raise ValueError(f"{body!r} does not fit in the period cube of {grid!r}")
    half = rasterize(body.scale(0.5), grid, offset=0.5, strict=True)
    if not np.any(half.values):
        logging.warning(f"Ω/2 contains no cell centre of {grid!r}: the candidate is the unit mass at the origin")
        values = np.zeros(grid.shape)
        values[grid.center] = 1.0
        return GridFunction(grid, values, 'space')

    counts = np.rint(autocorrelate(half).values / grid.cell_volume)
    return GridFunction(grid, counts / counts[grid.center], 'space')


def candidate_value(body: ConvexBody, grid: TorusGrid = None) -> float:
    """ 2^-d |Ω|, the value attained by the candidate in the continuum """
    report = body.volume(grid)
    if report.estimate_only:
        logging.warning(f"No exact volume for {body!r}: the candidate value uses the grid estimate")
    return 2.0 ** (-body.dimension) * report.best


def candidate_gap(body: ConvexBody, grid: TorusGrid) -> float:
    return abs(turan_candidate(body, grid).integral - candidate_value(body, grid))


def grid_allowance(body: ConvexBody, grid: TorusGrid) -> float:
    """ Relative excess the grid can add to the torus optimum, (1 + h/r)^d - 1

    A box of halfwidth (M + 1/2)h has 2M + 1 interior nodes per axis, and the
    discrete optimum on such supports is ((M + 1)h)^d instead of ((M + 1/2)h)^d.
    """
    return (1.0 + grid.h / body.inradius) ** body.dimension - 1.0
