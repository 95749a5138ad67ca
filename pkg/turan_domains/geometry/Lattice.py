import itertools
from typing import Dict, Tuple

import numpy as np

# |det G| below this fraction of the product of column norms is treated as singular
SINGULARITY_THRESHOLD = 1e-12


class Lattice:

    def __init__(self, generator) -> None:
        """ Full rank lattice G Z^d, the columns of G being the basis vectors

        Args:
            - generator: array-like (d, d)
                the generator matrix, one basis vector per column

        Returns:
            - None
        """
        G = np.atleast_2d(np.array(generator, dtype=float))
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError(f"Lattice generator must be a square matrix, got shape {G.shape}")
        if not np.all(np.isfinite(G)):
            raise ValueError("Lattice generator must be finite")
        determinant = abs(float(np.linalg.det(G)))
        scale = float(np.prod(np.linalg.norm(G, axis=0)))
        if scale == 0 or determinant <= SINGULARITY_THRESHOLD * scale:
            raise ValueError(f"Lattice generator is numerically singular (|det| = {determinant:.3e})")

        G.setflags(write=False)
        self.generator: np.ndarray = G
        self.determinant: float = determinant

    @classmethod
    def integer(cls, dimension: int, spacing: float = 1.0) -> 'Lattice':
        return cls(spacing * np.eye(dimension))

    @classmethod
    def hexagonal_tiling(cls, circumradius: float = 1.0) -> 'Lattice':
        """ Translation lattice of the regular hexagon with vertices at angles 0, 60, ... degrees """
        R = circumradius
        return cls([[1.5 * R, 0.0], [np.sqrt(3) / 2 * R, np.sqrt(3) * R]])

    @property
    def dimension(self) -> int:
        return self.generator.shape[0]

    @property
    def density(self) -> float:
        return 1.0 / self.determinant

    def dual(self) -> 'Lattice':
        """ The lattice of points with integer pairing against every lattice point """
        return Lattice(np.linalg.inv(self.generator).T)

    def scale(self, t: float) -> 'Lattice':
        if t <= 0:
            raise ValueError(f"Lattice scale factor must be positive, got {t}")
        return Lattice(self.generator * t)

    def coordinates(self, points) -> np.ndarray:
        """ Coefficients c with G c = x, one row per point """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.solve(self.generator, points.T).T

    def same_point_set(self, other: 'Lattice', tol: float = 1e-9) -> bool:
        """ Two generators span the same lattice iff each basis has integer
        coordinates in the other """
        if other.dimension != self.dimension:
            return False
        forward = self.coordinates(other.generator.T)
        backward = other.coordinates(self.generator.T)
        return bool(np.allclose(forward, np.round(forward), atol=tol) and np.allclose(backward, np.round(backward), atol=tol))

    def points_in_box(self, halfwidths) -> np.ndarray:
        """ All lattice points x with |x_j| <= halfwidths_j, lexicographically sorted """
        w = np.broadcast_to(np.asarray(halfwidths, dtype=float), (self.dimension,))
        inverse = np.linalg.inv(self.generator)
        bounds = np.floor(np.abs(inverse) @ w + 1e-9).astype(int)
        ranges = [np.arange(-b, b + 1) for b in bounds]
        coefficients = np.array(list(itertools.product(*ranges)), dtype=float)
        points = coefficients @ self.generator.T
        mask = np.all(np.abs(points) <= w * (1 + 1e-12) + 1e-12, axis=1)
        points = points[mask]
        return points[np.lexsort(points.T[::-1])]

    def points_in_ball(self, center, radius: float) -> np.ndarray:
        center = np.asarray(center, dtype=float)
        box = self.points_in_box(np.abs(center) + radius)
        return box[np.linalg.norm(box - center, axis=1) <= radius]

    def coefficient_box(self, radius: int) -> Tuple[np.ndarray, np.ndarray]:
        """ Lattice points G c with integer |c|_inf <= radius, one row each """
        axis = np.arange(-radius, radius + 1)
        grids = np.meshgrid(*([axis] * self.dimension), indexing='ij')
        coefficients = np.stack([g.ravel() for g in grids], axis=1)
        return coefficients @ self.generator.T, coefficients

    def to_config(self) -> Dict:
        return {'kind': 'lattice', 'generator': self.generator.T.tolist()}

    def __repr__(self) -> str:
        return f"Lattice(generator={self.generator.tolist()})"


def dual_lattice(lat: Lattice) -> Lattice:
    return lat.dual()


def lattice_density(lat: Lattice) -> float:
    return lat.density
