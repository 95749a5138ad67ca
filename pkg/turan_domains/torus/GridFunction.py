import logging
from typing import Tuple

import numpy as np
import pandas as pd

from turan_domains.geometry.ConvexBody import ConvexBody
from turan_domains.geometry.Lattice import Lattice
from turan_domains.torus.TorusGrid import TorusGrid, reflect_array

DOMAINS = ('space', 'frequency')


class GridFunction:

    def __init__(self, grid: TorusGrid, values, domain: str = 'space') -> None:
        """ Real values on the nodes (domain='space') or on the dual frequencies
        (domain='frequency') of a torus grid

        Args:
            - grid: TorusGrid
                the space grid; frequency functions keep the space grid and use
                spacing 1/L and period N/L
            - values: array-like
                N^d real values in centered storage order
            - domain: str (default: 'space')
                'space' or 'frequency'

        Returns:
            - None
        """
        if not isinstance(grid, TorusGrid):
            raise TypeError(f"Expected a TorusGrid, got {type(grid)}")
        if domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}, got {domain}")
        if np.iscomplexobj(values):
            raise TypeError("GridFunction values must be real")
        values = np.array(values, dtype=float)
        if values.size != grid.size:
            raise ValueError(f"Expected {grid.size} values for {grid!r}, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError("GridFunction values must be finite")
        values = values.reshape(grid.shape)
        values.setflags(write=False)

        self.grid: TorusGrid = grid
        self.values: np.ndarray = values
        self.domain: str = domain

    @property
    def spacing(self) -> float:
        return self.grid.h if self.domain == 'space' else 1.0 / self.grid.L

    @property
    def period(self) -> float:
        return self.grid.L if self.domain == 'space' else self.grid.N / self.grid.L

    @property
    def weight(self) -> float:
        return self.spacing ** self.grid.dimension

    @property
    def integral(self) -> float:
        """ Riemann sum spacing^d * sum(values) """
        return float(self.weight * np.sum(self.values))

    @property
    def at_origin(self) -> float:
        return float(self.values[self.grid.center])

    def coordinates(self) -> np.ndarray:
        return self.grid.index_vectors() * self.spacing

    def reflected(self) -> 'GridFunction':
        return GridFunction(self.grid, reflect_array(self.values), self.domain)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.values))))
        return bool(np.max(np.abs(self.values - reflect_array(self.values))) <= tol * scale)

    def with_values(self, values) -> 'GridFunction':
        return GridFunction(self.grid, values, self.domain)

    def support_mask(self) -> np.ndarray:
        return self.values != 0

    def to_frame(self) -> pd.DataFrame:
        """ One row per node: integer index, coordinates, value """
        index_name, coordinate_name = ('k', 'x') if self.domain == 'space' else ('m', 'xi')
        indices = self.grid.index_vectors()
        coordinates = indices * self.spacing
        frame = pd.DataFrame({f'{index_name}_{j}': indices[:, j] for j in range(self.grid.dimension)})
        for j in range(self.grid.dimension):
            frame[f'{coordinate_name}_{j}'] = coordinates[:, j]
        frame['value'] = self.values.ravel()
        return frame

    def to_csv(self, file: str) -> None:
        self.to_frame().to_csv(file, index=False, float_format='%.17g')

    def to_binary(self, file: str) -> None:
        """ Dimension, N, L, then the values in index order, all little-endian float64 """
        header = np.array([self.grid.dimension, self.grid.N, self.grid.L], dtype='<f8')
        with open(file, 'wb') as f:
            f.write(header.tobytes())
            f.write(np.ascontiguousarray(self.values, dtype='<f8').tobytes())

    @classmethod
    def from_binary(cls, file: str, domain: str = 'space') -> 'GridFunction':
        data = np.fromfile(file, dtype='<f8')
        if data.size < 3:
            raise ValueError(f"{file} is too short to hold a grid function header")
        dimension, N, L = int(data[0]), int(data[1]), float(data[2])
        grid = TorusGrid(dimension, N, L)
        if data.size != 3 + grid.size:
            raise ValueError(f"{file} holds {data.size - 3} values, expected {grid.size}")
        return cls(grid, data[3:], domain)

    def __repr__(self) -> str:
        return f"GridFunction({self.grid!r}, domain={self.domain})"


def _forward(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(values))) * grid.cell_volume


def _backward(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    return np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(values))) * (grid.N / grid.L) ** grid.dimension


def _real_part(values: np.ndarray, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(values))))
    if np.max(np.abs(values.imag)) > 1e-9 * scale:
        raise ValueError(f"The {what} is not real: the input is not symmetric")
    return values.real


def dft(f: GridFunction) -> GridFunction:
    """ f^(xi) = h^d sum_k f(x_k) exp(-2 pi i xi . x_k) for a real symmetric f """
    if f.domain != 'space':
        raise ValueError("dft expects a space domain function")
    return GridFunction(f.grid, _real_part(_forward(f.values, f.grid), 'transform'), 'frequency')


def idft(F: GridFunction) -> GridFunction:
    """ f(x) = L^-d sum_m F(xi_m) exp(2 pi i xi_m . x) for a real symmetric F """
    if F.domain != 'frequency':
        raise ValueError("idft expects a frequency domain function")
    return GridFunction(F.grid, _real_part(_backward(F.values, F.grid), 'inverse transform'), 'space')


def power_spectrum(g: GridFunction) -> GridFunction:
    """ |dft(g)|^2 for any real g """
    if g.domain != 'space':
        raise ValueError("power_spectrum expects a space domain function")
    return GridFunction(g.grid, np.abs(_forward(g.values, g.grid)) ** 2, 'frequency')


def rasterize(body: ConvexBody, grid: TorusGrid, offset: float = 0.0, strict: bool = False) -> GridFunction:
    """ Indicator of the body sampled at the nodes (k + offset) h

    offset=0 gives the symmetric node rasterization; offset=0.5 samples at cell
    centres. The closed body is used unless strict=True, which keeps only
    points of the interior.
    """
    if body.dimension != grid.dimension:
        raise ValueError(f"Body of dimension {body.dimension} on a grid of dimension {grid.dimension}")
    if not grid.fits(body, strict=True):
        raise ValueError(f"{body!r} exceeds the period cube of {grid!r}")
    mask = body.contains_points(grid.nodes(offset), strict=strict)
    return GridFunction(grid, mask.astype(float), 'space')


def autocorrelate(g: GridFunction) -> GridFunction:
    """ g * g~ computed as idft(|dft g|^2); positive definite by construction

    A warning is logged when the support of g leaves the half period cube, in
    which case the result is the torus autocorrelation.
    """
    if g.domain != 'space':
        raise ValueError("autocorrelate expects a space domain function")
    grid = g.grid
    support = grid.index_vectors()[g.values.ravel() != 0]
    if support.size and np.max(np.abs(support)) >= grid.N / 4:
        logging.warning(
            f"Support of g leaves the half period cube of {grid!r}: the autocorrelation wraps around the torus")
    power = np.abs(_forward(g.values, grid)) ** 2
    return GridFunction(grid, _backward(power, grid).real, 'space')


def min_spectrum(f: GridFunction) -> Tuple[float, Tuple[int, ...]]:
    """ Minimum of dft(f) and the (first, lexicographic) frequency index attaining it """
    F = dft(f)
    position = int(np.argmin(F.values))
    index = np.array(np.unravel_index(position, f.grid.shape)) - f.grid.N // 2
    return float(F.values.flat[position]), tuple(int(k) for k in index)


def is_positive_definite(f: GridFunction, tol: float = 1e-8) -> bool:
    return min_spectrum(f)[0] >= -tol


def lattice_shifts(lat: Lattice, grid: TorusGrid, domain: str = 'space') -> np.ndarray:
    """ Index shifts of the lattice points modulo the torus

    The lattice must be commensurate: every generator column is an integer
    multiple of the grid spacing and every period vector is a lattice vector.

    Returns:
        - shifts: np.ndarray (n, d)
            distinct shifts in {0, ..., N-1}^d, lexicographically sorted
    """
    if lat.dimension != grid.dimension:
        raise ValueError(f"Lattice of dimension {lat.dimension} on a grid of dimension {grid.dimension}")
    spacing = grid.h if domain == 'space' else 1.0 / grid.L
    period = grid.L if domain == 'space' else grid.N / grid.L

    columns = lat.generator / spacing
    integer_columns = np.round(columns)
    for j in range(lat.dimension):
        if not np.allclose(columns[:, j], integer_columns[:, j], rtol=0, atol=1e-9 * max(1.0, np.max(np.abs(columns[:, j])))):
            raise ValueError(
                f"Lattice column {j} = {lat.generator[:, j].tolist()} is not an integer multiple of the grid spacing {spacing}")
    periods = lat.coordinates(period * np.eye(lat.dimension))
    for j in range(lat.dimension):
        if not np.allclose(periods[j], np.round(periods[j]), rtol=0, atol=1e-9 * max(1.0, np.max(np.abs(periods[j])))):
            raise ValueError(
                f"The period vector along axis {j} is not a lattice vector: the lattice is incommensurate with the torus")

    N = grid.N
    shifts = np.zeros((1, grid.dimension), dtype=np.int64)
    for column in integer_columns.T.astype(np.int64):
        order = N // np.gcd.reduce(np.append(column % N, N))
        steps = (np.arange(order)[:, None] * column[None, :]) % N
        shifts = np.unique(((shifts[:, None, :] + steps[None, :, :]) % N).reshape(-1, grid.dimension), axis=0)
    return shifts


def periodize(f: GridFunction, lat: Lattice) -> GridFunction:
    """ sum over lattice points of f(x - lambda), taken modulo the torus """
    axes = tuple(range(f.grid.dimension))
    total = np.zeros(f.grid.shape)
    for shift in lattice_shifts(lat, f.grid, f.domain):
        total += np.roll(f.values, shift=tuple(int(s) for s in shift), axis=axes)
    return f.with_values(total)
