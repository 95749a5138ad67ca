import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection, cKDTree
from scipy.special import gamma

if TYPE_CHECKING:
    from turan_domains.torus.TorusGrid import TorusGrid

# Relative slack of closure membership; boundary nodes computed in floating
# point must count as members.
REL_TOL = 1e-9


@dataclass(frozen=True)
class VolumeReport:
    exact: Optional[float]
    grid_estimate: float
    estimate_only: bool

    @property
    def best(self) -> float:
        return self.exact if self.exact is not None else self.grid_estimate


class ConvexBody:
    """ Symmetric convex body with the origin in its interior

    Subclasses implement membership, scaling and the elementary metric
    quantities; everything here is immutable after construction.
    """
    kind: str = None

    def __init__(self, dimension: int) -> None:
        if dimension < 1:
            raise ValueError(f"dimension must be positive, got {dimension}")
        self._dimension: int = int(dimension)

    @property
    def dimension(self) -> int:
        return self._dimension

    def _as_points(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[None, :]
        if points.ndim != 2 or points.shape[1] != self._dimension:
            raise ValueError(
                f"Expected points of dimension {self._dimension}, got shape {points.shape}")
        return points

    def contains(self, x, strict: bool = False) -> bool:
        """ Membership of a single point in the closed body (or the open one with strict=True) """
        x = np.asarray(x, dtype=float)
        if x.shape != (self._dimension,):
            raise ValueError(
                f"Point of shape {x.shape} does not match dimension {self._dimension}")
        return bool(self.contains_points(x[None, :], strict=strict)[0])

    def contains_points(self, points, strict: bool = False) -> np.ndarray:
        return self._contains(self._as_points(points), strict)

    def _contains(self, points: np.ndarray, strict: bool) -> np.ndarray:
        raise NotImplementedError

    def scale(self, t: float) -> 'ConvexBody':
        """ The body tΩ; t = 0 gives the one-point body {0} """
        if not np.isfinite(t) or t < 0:
            raise ValueError(f"Scale factor must be finite and non negative, got {t}")
        return self._scaled(float(t))

    def _scaled(self, t: float) -> 'ConvexBody':
        raise NotImplementedError

    @property
    def inradius(self) -> float:
        raise NotImplementedError

    @property
    def circumradius(self) -> float:
        raise NotImplementedError

    @property
    def bounding_halfwidths(self) -> np.ndarray:
        """ Halfwidths of the smallest axis-aligned box containing the body """
        raise NotImplementedError

    @property
    def exact_volume(self) -> Optional[float]:
        return None

    def grid_volume(self, grid: 'TorusGrid') -> float:
        """ (number of grid nodes in the body) * h^d """
        if grid.dimension != self._dimension:
            raise ValueError(
                f"Grid of dimension {grid.dimension} for a body of dimension {self._dimension}")
        count = np.count_nonzero(self.contains_points(grid.nodes()))
        return float(count * grid.cell_volume)

    def volume(self, grid: 'TorusGrid' = None) -> VolumeReport:
        """ Exact volume where a formula exists, and a grid estimate

        Args:
            - grid: TorusGrid (default: None)
                grid for the counting estimate. When absent, a grid of 64 points
                per axis over the circumscribing box is used.

        Returns:
            - VolumeReport
                with estimate_only set when no exact formula is available
        """
        if grid is None:
            from turan_domains.torus.TorusGrid import TorusGrid
            L = 2.2 * float(np.max(self.bounding_halfwidths))
            grid = TorusGrid(self._dimension, 64, L if L > 0 else 1.0)
        elif not grid.fits(self):
            raise ValueError(f"{self!r} does not fit in the period cube of {grid!r}")

        exact = self.exact_volume
        if exact is None:
            logging.debug(f"No exact volume for {self!r}, reporting the grid estimate only")
        return VolumeReport(exact=exact, grid_estimate=self.grid_volume(grid), estimate_only=exact is None)

    def to_config(self) -> Dict:
        raise NotImplementedError


class Box(ConvexBody):
    kind = 'box'

    def __init__(self, halfwidths: Sequence[float], validate: bool = True) -> None:
        w = np.array(halfwidths, dtype=float).ravel()
        if w.size == 0:
            raise ValueError("A box needs at least one halfwidth")
        if validate and (not np.all(np.isfinite(w)) or np.any(w <= 0)):
            raise ValueError(f"Box halfwidths must be positive and finite, got {w.tolist()}")
        super().__init__(w.size)
        w.setflags(write=False)
        self.halfwidths: np.ndarray = w

    def _contains(self, points, strict):
        if strict:
            return np.all(np.abs(points) < self.halfwidths * (1 - REL_TOL), axis=1)
        return np.all(np.abs(points) <= self.halfwidths * (1 + REL_TOL), axis=1)

    def _scaled(self, t):
        return Box(self.halfwidths * t, validate=False)

    @property
    def inradius(self):
        return float(np.min(self.halfwidths))

    @property
    def circumradius(self):
        return float(np.linalg.norm(self.halfwidths))

    @property
    def bounding_halfwidths(self):
        return self.halfwidths.copy()

    @property
    def exact_volume(self):
        return float(np.prod(2 * self.halfwidths))

    def to_config(self):
        return {'kind': self.kind, 'halfwidths': self.halfwidths.tolist()}

    def __repr__(self):
        return f"Box(halfwidths={self.halfwidths.tolist()})"


class Ball(ConvexBody):
    kind = 'ball'

    def __init__(self, radius: float, dimension: int = 2, validate: bool = True) -> None:
        if validate and (not np.isfinite(radius) or radius <= 0):
            raise ValueError(f"Ball radius must be positive and finite, got {radius}")
        super().__init__(dimension)
        self.radius: float = float(radius)

    def _contains(self, points, strict):
        squared = np.sum(points ** 2, axis=1)
        if strict:
            return squared < self.radius ** 2 * (1 - 2 * REL_TOL)
        return squared <= self.radius ** 2 * (1 + 2 * REL_TOL)

    def _scaled(self, t):
        return Ball(self.radius * t, self._dimension, validate=False)

    @property
    def inradius(self):
        return self.radius

    @property
    def circumradius(self):
        return self.radius

    @property
    def bounding_halfwidths(self):
        return np.full(self._dimension, self.radius)

    @property
    def exact_volume(self):
        d = self._dimension
        return float(np.pi ** (d / 2) / gamma(d / 2 + 1) * self.radius ** d)

    def to_config(self):
        return {'kind': self.kind, 'radius': self.radius, 'dimension': self._dimension}

    def __repr__(self):
        return f"Ball(radius={self.radius}, dimension={self._dimension})"


class HPolytope(ConvexBody):
    kind = 'hpolytope'

    def __init__(self, normals, offsets, validate: bool = True) -> None:
        """ Symmetric polytope {x : |a_i . x| <= b_i}

        Only one row of every (a, b), (-a, b) pair is stored; the partner is
        implied. A row repeated in either orientation with the same distance
        b/|a| is merged. Opposite rows at different distances describe a body
        that is not symmetric and raise ValueError; parallel rows at different
        distances keep the tighter one.

        Args:
            - normals: array-like (m, d)
                one normal a_i per row pair
            - offsets: array-like (m,)
                the offsets b_i, all strictly positive
            - validate: bool (default: True)
                check offsets and boundedness; scaling skips it

        Returns:
            - None
        """
        A = np.atleast_2d(np.array(normals, dtype=float))
        b = np.array(offsets, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise ValueError(f"Got {A.shape[0]} normals and {b.size} offsets")
        if b.size == 0:
            raise ValueError("A polytope needs at least one row")
        super().__init__(A.shape[1])

        if validate:
            if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
                raise ValueError("Polytope rows must be finite")
            if np.any(b <= 0):
                raise ValueError(
                    f"All offsets must be positive so that 0 is interior, got {b.tolist()}")
            if np.any(np.linalg.norm(A, axis=1) == 0):
                raise ValueError("Polytope normals must be nonzero")
            A, b = self._merge_pairs(A, b)

        A.setflags(write=False)
        b.setflags(write=False)
        self.normals: np.ndarray = A
        self.offsets: np.ndarray = b
        self._bounding: np.ndarray = self._solve_bounds() if validate else None

    @classmethod
    def from_rows(cls, rows) -> 'HPolytope':
        """ Build from rows [a_1, ..., a_d, b] """
        rows = np.atleast_2d(np.array(rows, dtype=float))
        if rows.shape[1] < 2:
            raise ValueError("Each row needs at least one normal entry and an offset")
        return cls(rows[:, :-1], rows[:, -1])

    @staticmethod
    def _merge_pairs(A, b):
        norms = np.linalg.norm(A, axis=1)
        directions = A / norms[:, None]
        distances = b / norms
        keep: List[int] = list()
        for i in range(len(b)):
            partner = None
            for j in keep:
                if np.allclose(directions[i], directions[j], atol=1e-9):
                    partner, sign = j, 1
                elif np.allclose(directions[i], -directions[j], atol=1e-9):
                    partner, sign = j, -1
                if partner is not None:
                    break
            if partner is None:
                keep.append(i)
                continue
            if np.isclose(distances[i], distances[partner], rtol=1e-9, atol=0.0):
                continue
            if sign < 0:
                raise ValueError(
                    f"Rows {partner} and {i} bound opposite directions at distances {distances[partner]:.12g} and "
                    f"{distances[i]:.12g}: the polytope would not be symmetric")
            logging.warning(f"Rows {partner} and {i} share a direction: keeping the tighter offset")
            if distances[i] < distances[partner]:
                keep[keep.index(partner)] = i
        return A[keep].copy(), b[keep].copy()

    @property
    def halfspaces(self):
        """ All rows with the ± partners materialized: (A, b) with A x <= b """
        return np.vstack([self.normals, -self.normals]), np.concatenate([self.offsets, self.offsets])

    def _solve_bounds(self) -> np.ndarray:
        A, b = self.halfspaces
        d = self._dimension
        extent = np.zeros(d)
        for j in range(d):
            c = np.zeros(d)
            c[j] = -1.0
            res = linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * d, method='highs')
            if res.status == 3:
                raise ValueError(
                    f"Polytope is unbounded along axis {j}: the normals do not span space")
            if res.status != 0:
                raise ValueError(f"Boundedness LP failed along axis {j}: {res.message}")
            extent[j] = -res.fun
        return extent

    def _contains(self, points, strict):
        values = np.abs(points @ self.normals.T)
        if strict:
            return np.all(values < self.offsets * (1 - REL_TOL), axis=1)
        return np.all(values <= self.offsets * (1 + REL_TOL), axis=1)

    def _scaled(self, t):
        scaled = HPolytope(self.normals, self.offsets * t, validate=False)
        scaled._bounding = self.bounding_halfwidths * t
        return scaled

    @property
    def inradius(self):
        return float(np.min(self.offsets / np.linalg.norm(self.normals, axis=1)))

    @property
    def bounding_halfwidths(self):
        return self._bounding.copy()

    def vertices(self) -> np.ndarray:
        """ Vertices of the polytope; counter-clockwise in 2D """
        d = self._dimension
        if np.all(self.offsets == 0):
            return np.zeros((1, d))
        if d == 1:
            r = self.inradius
            return np.array([[-r], [r]])
        A, b = self.halfspaces
        hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), np.zeros(d))
        vertices = np.unique(np.round(hs.intersections, 12), axis=0)
        if d == 2:
            angles = np.arctan2(vertices[:, 1], vertices[:, 0])
            vertices = vertices[np.argsort(angles)]
        return vertices

    @property
    def circumradius(self):
        return float(np.max(np.linalg.norm(self.vertices(), axis=1)))

    @property
    def exact_volume(self):
        if self._dimension == 1:
            return 2 * self.inradius
        if self._dimension == 2:
            v = self.vertices()
            x, y = v[:, 0], v[:, 1]
            return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
        return None

    def to_config(self):
        rows = np.hstack([self.normals, self.offsets[:, None]])
        return {'kind': self.kind, 'rows': rows.tolist()}

    def __repr__(self):
        return f"HPolytope(rows={len(self.offsets)}, dimension={self._dimension})"


def regular_hexagon(circumradius: float = 1.0) -> HPolytope:
    """ Regular hexagon with vertices at angles 0, 60, ..., 300 degrees """
    angles = np.deg2rad([30.0, 90.0, 150.0])
    normals = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return HPolytope(normals, np.full(3, circumradius * np.sqrt(3) / 2))


def random_symmetric_polygon(rng: np.random.Generator, n_pairs: int = None, circumradius: float = 1.0) -> HPolytope:
    """ Random symmetric polygon scaled to the given circumradius

    Normal directions are stratified over [0, pi) so that at least two of them
    differ and the polygon is bounded.
    """
    if n_pairs is None:
        n_pairs = int(rng.integers(2, 7))
    if n_pairs < 2:
        raise ValueError(f"A bounded symmetric polygon needs at least 2 row pairs, got {n_pairs}")
    angles = (np.arange(n_pairs) + rng.uniform(0.1, 0.9, n_pairs)) * np.pi / n_pairs
    normals = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    polygon = HPolytope(normals, rng.uniform(0.5, 1.0, n_pairs))
    return polygon.scale(circumradius / polygon.circumradius)


def minkowski_difference(body: ConvexBody) -> ConvexBody:
    """ The difference body Ω - Ω """
    if isinstance(body, (Box, Ball)) or body.dimension == 1:
        return body.scale(2.0)
    if not isinstance(body, HPolytope):
        raise TypeError(f"Unsupported body {type(body)}")
    v = body.vertices()
    differences = (v[:, None, :] - v[None, :, :]).reshape(-1, body.dimension)
    hull = ConvexHull(differences)
    return HPolytope(hull.equations[:, :-1], -hull.equations[:, -1])


def distance_lemma_residual(body: ConvexBody, alpha: float, beta: float, grid: 'TorusGrid') -> float:
    """ |dist(αΩ, (βΩ)^c) - r(β - α)| measured on grid nodes

    The nearest pair is searched between nodes inside αΩ and nodes outside βΩ
    lying in a shell of width 3*sqrt(d)*h around βΩ.

    Args:
        - body: ConvexBody
            the body Ω
        - alpha: float
            inner scale, 0 <= alpha <= beta
        - beta: float
            outer scale; βΩ must fit in the period cube
        - grid: TorusGrid
            the grid providing the nodes

    Returns:
        - residual: float
    """
    if alpha < 0 or beta < alpha:
        raise ValueError(f"Need 0 <= alpha <= beta, got alpha={alpha}, beta={beta}")
    outer = body.scale(beta)
    if not grid.fits(outer):
        raise ValueError(f"The scaled body {beta}*Ω does not fit in the period cube of {grid!r}")

    nodes = grid.nodes()
    r = body.inradius
    inner_nodes = nodes[body.scale(alpha).contains_points(nodes)]
    margin = 3 * np.sqrt(grid.dimension) * grid.h / r
    shell = ~outer.contains_points(nodes) & body.scale(beta + margin).contains_points(nodes)
    if not np.any(shell):
        raise ValueError("No grid node found outside βΩ inside the period cube")

    distances, _ = cKDTree(inner_nodes).query(nodes[shell], k=1)
    return float(abs(np.min(distances) - r * (beta - alpha)))
