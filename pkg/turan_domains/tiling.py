import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma, jv, zeta

from turan_domains.geometry.ConvexBody import Ball, Box, ConvexBody, HPolytope
from turan_domains.geometry.Lattice import Lattice, lattice_density
from turan_domains.torus.GridFunction import lattice_shifts, periodize, rasterize
from turan_domains.torus.TorusGrid import TorusGrid
from turan_domains.utils import to_report_value

SPECTRAL_STATUSES = ('spectral', 'not_spectral', 'inconclusive')
SUPPORT_VERDICTS = ('clear', 'boundary', 'violated')

# a truncation tail above this fraction of the level makes a Parseval check inconclusive
TAIL_FRACTION_LIMIT = 0.05


def _sinc(x: np.ndarray) -> np.ndarray:
    """ sin(pi x) / (pi x), exactly 0 at the nonzero integers """
    x = np.asarray(x, dtype=float)
    values = np.sinc(x)
    return np.where((x == np.round(x)) & (x != 0), 0.0, values)


def _ft_box(halfwidths: np.ndarray, xi: np.ndarray) -> np.ndarray:
    return np.prod(2 * halfwidths * _sinc(2 * halfwidths * xi), axis=1).astype(complex)


def _ft_ball(radius: float, dimension: int, xi: np.ndarray) -> np.ndarray:
    rho = np.linalg.norm(xi, axis=1)
    volume = np.pi ** (dimension / 2) * radius ** dimension / gamma(dimension / 2 + 1)
    values = np.full(rho.shape, volume, dtype=complex)
    nonzero = rho > 0
    nu = dimension / 2
    values[nonzero] = radius ** nu * jv(nu, 2 * np.pi * radius * rho[nonzero]) / rho[nonzero] ** nu
    return values


def _ft_polygon(vertices: np.ndarray, area: float, xi: np.ndarray) -> np.ndarray:
    """ Divergence theorem over the edges of a counter-clockwise polygon """
    start = vertices
    end = np.roll(vertices, -1, axis=0)
    lengths = np.linalg.norm(end - start, axis=1)
    tangents = (end - start) / lengths[:, None]
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=1)
    midpoints = (start + end) / 2

    squared = np.sum(xi ** 2, axis=1)
    values = np.full(squared.shape, area, dtype=complex)
    small = squared < 1e-12
    xi = xi[~small]
    edge_terms = ((xi @ normals.T) * lengths
                  * np.exp(-2j * np.pi * (xi @ midpoints.T))
                  * _sinc(lengths * (xi @ tangents.T)))
    values[~small] = 1j / (2 * np.pi * squared[~small]) * np.sum(edge_terms, axis=1)
    return values


def _ft_quadrature(body: ConvexBody, xi: np.ndarray, grid: TorusGrid) -> np.ndarray:
    nodes = grid.nodes()[rasterize(body, grid).values.ravel() > 0]
    return grid.cell_volume * np.exp(-2j * np.pi * (xi @ nodes.T)).sum(axis=1)


def ft_indicator(body: ConvexBody, xi, grid: TorusGrid = None):
    """ Fourier transform of the indicator of a body, int_Ω exp(-2 pi i xi . x) dx

    Closed forms for boxes, balls, intervals and 2D polygons; other bodies are
    integrated by the grid Riemann sum on the nodes of Ω, whose error is of
    order h times the surface of Ω.

    Args:
        - body: ConvexBody
            the body Ω
        - xi: array-like (d,) or (n, d)
            frequency vectors
        - grid: TorusGrid (default: None)
            quadrature grid, required for polytopes of dimension 3 or more

    Returns:
        - complex or np.ndarray (n,)
    """
    points = np.asarray(xi, dtype=float)
    single = points.ndim <= 1
    points = np.atleast_2d(points).reshape(-1, body.dimension)

    if isinstance(body, Box):
        values = _ft_box(body.halfwidths, points)
    elif isinstance(body, Ball):
        values = _ft_ball(body.radius, body.dimension, points)
    elif body.dimension == 1:
        values = _ft_box(body.bounding_halfwidths, points)
    elif isinstance(body, HPolytope) and body.dimension == 2:
        values = _ft_polygon(body.vertices(), body.exact_volume, points)
    else:
        if grid is None:
            raise ValueError(f"No closed form transform for {body!r}: a quadrature grid is required")
        values = _ft_quadrature(body, points, grid)

    return complex(values[0]) if single else values


@dataclass
class CoverageReport:
    min_multiplicity: int
    max_multiplicity: int
    fraction_exactly_one: float
    offending: List[Tuple[float, ...]]
    method: str
    threshold: float = 0.95

    @property
    def passed(self) -> bool:
        return self.fraction_exactly_one >= self.threshold

    def to_report(self) -> Dict[str, Any]:
        return to_report_value({**self.__dict__, 'passed': self.passed})


def _multiplicity_enumerate(body: ConvexBody, lat: Lattice, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """ Number of translates Ω + λ covering each cell centre of a fundamental domain """
    axis = (np.arange(N) + 0.5) / N
    coefficients = np.array(list(itertools.product(axis, repeat=lat.dimension)))
    samples = coefficients @ lat.generator.T

    reach = np.max(np.abs(samples), axis=0) + body.circumradius
    counts = np.zeros(samples.shape[0], dtype=int)
    for point in lat.points_in_box(reach):
        counts += body.contains_points(samples - point)
    return counts, samples


def lattice_tiling_check(body: ConvexBody, lat: Lattice, grid: TorusGrid, threshold: float = 0.95) -> CoverageReport:
    """ Multiplicity of the lattice translates of Ω, sampled at cell centres

    A lattice commensurate with the grid is handled by periodizing the cell
    centre rasterization of Ω over the torus; any other lattice by counting the
    translates over N^d cell centres of its own fundamental domain.

    Args:
        - body: ConvexBody
            the body Ω; it must fit in the period cube of grid
        - lat: Lattice
            the translation set
        - grid: TorusGrid
            the sampling grid
        - threshold: float (default: 0.95)
            fraction of samples covered exactly once for the check to pass

    Returns:
        - CoverageReport
    """
    if lat.dimension != body.dimension:
        raise ValueError(f"Lattice of dimension {lat.dimension} for a body of dimension {body.dimension}")

    try:
        lattice_shifts(lat, grid)
        commensurate = True
    except ValueError as e:
        logging.info(f"Counting translates directly: {e}")
        commensurate = False

    if commensurate:
        covering = periodize(rasterize(body, grid, offset=0.5), lat)
        counts = np.rint(covering.values.ravel()).astype(int)
        samples = grid.nodes(offset=0.5)
        method = 'periodize'
    else:
        counts, samples = _multiplicity_enumerate(body, lat, grid.N)
        method = 'enumerate'

    off = np.flatnonzero(counts != 1)
    report = CoverageReport(min_multiplicity=int(counts.min()),
                            max_multiplicity=int(counts.max()),
                            fraction_exactly_one=float(np.mean(counts == 1)),
                            offending=[tuple(float(c) for c in samples[i]) for i in off[:10]],
                            method=method,
                            threshold=threshold)
    logging.debug(f"Tiling of {body!r} by {lat!r}: multiplicities in [{report.min_multiplicity}, "
                  f"{report.max_multiplicity}], fraction exactly one {report.fraction_exactly_one:.4f}")
    return report


@dataclass
class SpectralReport:
    max_offdiagonal: float
    parseval_level_error: float
    pairs_tested: int
    lambdas_used: int
    tail_estimate: float
    decay_exponent: float
    truncation_radius: int
    level: float
    status: str
    tolerance: float

    @property
    def spectral(self) -> bool:
        return self.status == 'spectral'

    def to_report(self) -> Dict[str, Any]:
        return to_report_value(self.__dict__)


def _shell_tail(shell_before: np.ndarray, shell_last: np.ndarray, radius: int) -> Tuple[np.ndarray, np.ndarray]:
    """ Tail of sum_r S_r beyond the last shell for S_r ~ C r^-p, with p fitted
    on the two outermost shells """
    with np.errstate(divide='ignore', invalid='ignore'):
        exponent = np.log(shell_before / shell_last) / np.log(radius / (radius - 1))
        tail = shell_last * radius ** exponent * zeta(exponent, radius + 1)
    tail = np.where(shell_last > 0, tail, 0.0)
    exponent = np.where(shell_last > 0, exponent, np.inf)
    return tail, exponent


def spectral_pair_check(body: ConvexBody, spectrum: Lattice, radius: int = 40, n_samples: int = 16, seed: int = 0,
                        tolerance: float = 2e-4, grid: TorusGrid = None) -> SpectralReport:
    """ Test whether the exponentials of a lattice form an orthogonal basis of L^2(Ω)

    Orthogonality: the transform of the indicator vanishes on every nonzero
    difference of spectrum points with coefficients in [-2R, 2R]^d. Completeness:
    sum over the spectrum of |transform(x - λ)|^2 equals |Ω|^2 at seeded random
    points x; the sum is truncated to coefficients in [-R, R]^d and corrected by
    a power-law tail estimated from the two outermost shells.

    Args:
        - body: ConvexBody
            the body Ω
        - spectrum: Lattice
            the candidate spectrum
        - radius: int (default: 40)
            truncation radius R, in lattice coefficients
        - n_samples: int (default: 16)
            points x of the Parseval test
        - seed: int (default: 0)
            seed of the sample points
        - tolerance: float (default: 2e-4)
            accepted off-diagonal magnitude and level error, relative to |Ω| and |Ω|^2
        - grid: TorusGrid (default: None)
            quadrature grid for bodies without a closed form transform

    Returns:
        - SpectralReport
    """
    if spectrum.dimension != body.dimension:
        raise ValueError(f"Spectrum of dimension {spectrum.dimension} for a body of dimension {body.dimension}")
    if radius < 2:
        raise ValueError(f"The truncation radius must be at least 2, got {radius}")

    volume = body.volume(grid).best
    level = volume ** 2

    differences, coefficients = spectrum.coefficient_box(2 * radius)
    nonzero = np.any(coefficients != 0, axis=1)
    max_offdiagonal = float(np.max(np.abs(ft_indicator(body, differences[nonzero], grid))))

    points, coefficients = spectrum.coefficient_box(radius)
    shells = np.max(np.abs(coefficients), axis=1)
    rng = np.random.default_rng(seed)
    samples = rng.uniform(0.0, 1.0, size=(n_samples, body.dimension)) @ spectrum.generator.T

    totals, before, last = np.empty(n_samples), np.empty(n_samples), np.empty(n_samples)
    for i, x in enumerate(samples):
        terms = np.abs(ft_indicator(body, x - points, grid)) ** 2
        totals[i] = terms.sum()
        before[i] = terms[shells == radius - 1].sum()
        last[i] = terms[shells == radius].sum()
    tail, exponent = _shell_tail(before, last, radius)
    parseval_level_error = float(np.max(np.abs(totals + tail - level)))

    tail_estimate = float(np.max(tail))
    decay_exponent = float(np.min(exponent))
    if max_offdiagonal > tolerance * volume:
        status = 'not_spectral'
    elif not np.isfinite(tail_estimate) or decay_exponent <= 1 or tail_estimate > TAIL_FRACTION_LIMIT * level:
        status = 'inconclusive'
    elif parseval_level_error <= tolerance * level:
        status = 'spectral'
    else:
        status = 'not_spectral'

    n = points.shape[0]
    report = SpectralReport(max_offdiagonal=max_offdiagonal,
                            parseval_level_error=parseval_level_error,
                            pairs_tested=n * (n - 1),
                            lambdas_used=n,
                            tail_estimate=tail_estimate,
                            decay_exponent=decay_exponent,
                            truncation_radius=radius,
                            level=level,
                            status=status,
                            tolerance=tolerance)
    logging.debug(f"Spectral check of {body!r} with {spectrum!r}: {status}")
    return report


@dataclass
class SupportReport:
    holds: bool
    verdict: str
    witness: Optional[Tuple[float, ...]]
    points_tested: int

    def to_report(self) -> Dict[str, Any]:
        return to_report_value(self.__dict__)


def _smallest_witness(points: np.ndarray) -> Tuple[float, ...]:
    """ Smallest norm, ties broken toward the lexicographically largest point """
    norms = np.round(np.linalg.norm(points, axis=1), 9)
    keys = [-points[:, j] for j in reversed(range(points.shape[1]))] + [norms]
    return tuple(float(c) for c in points[np.lexsort(keys)[0]])


def support_condition_check(body: ConvexBody, spectrum: Lattice) -> SupportReport:
    """ The dual lattice of the spectrum must avoid 2Ω away from the origin

    A nonzero dual point in the open body 2Ω violates the condition; dual
    points on the boundary of 2Ω give the 'boundary' verdict and the condition
    holds.
    """
    if spectrum.dimension != body.dimension:
        raise ValueError(f"Spectrum of dimension {spectrum.dimension} for a body of dimension {body.dimension}")
    doubled = body.scale(2.0)
    points = spectrum.dual().points_in_box(doubled.bounding_halfwidths)
    points = points[np.any(np.abs(points) > 1e-12, axis=1)]

    inside = doubled.contains_points(points, strict=True)
    closed = doubled.contains_points(points, strict=False)
    if np.any(inside):
        verdict, witness = 'violated', _smallest_witness(points[inside])
    elif np.any(closed):
        verdict, witness = 'boundary', _smallest_witness(points[closed])
    else:
        verdict, witness = 'clear', None

    return SupportReport(holds=verdict != 'violated',
                         verdict=verdict,
                         witness=witness,
                         points_tested=int(points.shape[0]))


@dataclass
class DensityEstimate:
    mean: float
    spread: float
    samples: List[float] = field(default_factory=list)

    def to_report(self) -> Dict[str, Any]:
        return to_report_value(self.__dict__)


def density_estimate(points, centers, radii: Sequence[float]) -> DensityEstimate:
    """ Point counts per ball volume over every (center, radius) window

    Args:
        - points: array-like (n, d)
            the finite point set
        - centers: array-like (k, d)
            window centres
        - radii: Sequence[float]
            window radii, each larger than 1

    Returns:
        - DensityEstimate
            mean and max - min of the window densities
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    radii = [float(r) for r in np.atleast_1d(radii)]
    if points.size == 0 or centers.size == 0 or not radii:
        raise ValueError("density_estimate needs points and at least one window")
    if any(r <= 1 for r in radii):
        raise ValueError(f"Window radii must exceed 1, got {radii}")

    dimension = points.shape[1]
    tree = cKDTree(points)
    densities = list()
    for center, r in itertools.product(centers, radii):
        count = tree.query_ball_point(center, r, return_length=True)
        densities.append(count / (np.pi ** (dimension / 2) * r ** dimension / gamma(dimension / 2 + 1)))

    densities = np.array(densities)
    return DensityEstimate(mean=float(densities.mean()),
                           spread=float(densities.max() - densities.min()),
                           samples=densities.tolist())


def at_zero_mass(lat: Lattice) -> float:
    """ Mass of the transform of the lattice point measure at the origin

    By Poisson summation the transform is the dual lattice measure scaled by
    1/|det G|, whose atom at 0 is the density of the lattice.
    """
    return lattice_density(lat)


@dataclass
class FugledeReport:
    coverage: CoverageReport
    spectral: SpectralReport
    support: SupportReport

    @property
    def tiles(self) -> bool:
        return self.coverage.passed

    @property
    def consistent(self) -> bool:
        """ tile => spectral => support condition """
        return (not self.tiles or self.spectral.spectral) and (not self.spectral.spectral or self.support.holds)

    def to_report(self) -> Dict[str, Any]:
        return to_report_value({'coverage': self.coverage.to_report(),
                                'spectral': self.spectral.to_report(),
                                'support': self.support.to_report(),
                                'tiles': self.tiles,
                                'consistent': self.consistent})


def fuglede_pipeline(body: ConvexBody, translations: Lattice, grid: TorusGrid, **spectral_options) -> FugledeReport:
    """ Tiling by a lattice, spectrality of its dual, and the support condition
    for that spectrum """
    spectrum = translations.dual()
    report = FugledeReport(coverage=lattice_tiling_check(body, translations, grid),
                           spectral=spectral_pair_check(body, spectrum, grid=grid, **spectral_options),
                           support=support_condition_check(body, spectrum))
    if not report.consistent:
        logging.warning(f"Inconsistent tiling/spectral/support verdicts for {body!r} with {translations!r}")
    return report
