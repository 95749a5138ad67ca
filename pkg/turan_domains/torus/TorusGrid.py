from typing import TYPE_CHECKING, Dict, Tuple

import numpy as np

if TYPE_CHECKING:
    from turan_domains.geometry.ConvexBody import ConvexBody


def reflect_array(values: np.ndarray) -> np.ndarray:
    """ Return v(-k mod N) for an array stored in centered index order.

    Position p holds the multi-index k = p - N/2, so -k mod N sits at
    position (N - p) mod N: a flip followed by a unit roll on every axis.
    """
    axes = tuple(range(values.ndim))
    return np.roll(np.flip(values, axis=axes), shift=(1,) * values.ndim, axis=axes)


class TorusGrid:

    def __init__(self, dimension: int, N: int, L: float) -> None:
        """ Uniform grid on the torus [-L/2, L/2)^d with N points per axis

        Node k sits at k*h with h = L/N and k in {-N/2, ..., N/2 - 1}^d; the
        frequency with the same index is k/L. Arrays indexed by nodes or by
        frequencies are stored in centered order, position p <-> index p - N/2.

        Args:
            - dimension: int
                the dimension d of the torus
            - N: int
                the number of points per axis; must be even and at least 4
            - L: float
                the period length

        Returns:
            - None
        """
        if isinstance(dimension, bool) or not isinstance(dimension, (int, np.integer)) or dimension < 1:
            raise ValueError(f"dimension must be a positive integer, got {dimension}")
        if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
            raise TypeError(f"N must be an integer, got {type(N)}")
        if N < 4 or N % 2:
            raise ValueError(f"N must be even and at least 4, got {N}")
        if not np.isfinite(L) or L <= 0:
            raise ValueError(f"L must be positive and finite, got {L}")

        self._dimension: int = int(dimension)
        self._N: int = int(N)
        self._L: float = float(L)

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def N(self) -> int:
        return self._N

    @property
    def L(self) -> float:
        return self._L

    @property
    def h(self) -> float:
        return self._L / self._N

    @property
    def cell_volume(self) -> float:
        return self.h ** self._dimension

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self._N,) * self._dimension

    @property
    def size(self) -> int:
        return self._N ** self._dimension

    @property
    def center(self) -> Tuple[int, ...]:
        """ Array position of the node (and frequency) with index 0 """
        return (self._N // 2,) * self._dimension

    @property
    def center_flat(self) -> int:
        return int(np.ravel_multi_index(self.center, self.shape))

    def indices(self) -> np.ndarray:
        return np.arange(-self._N // 2, self._N // 2)

    def coordinates(self, offset: float = 0.0) -> np.ndarray:
        return (self.indices() + offset) * self.h

    def mesh(self, offset: float = 0.0) -> Tuple[np.ndarray, ...]:
        axis = self.coordinates(offset)
        return tuple(np.meshgrid(*([axis] * self._dimension), indexing='ij'))

    def nodes(self, offset: float = 0.0) -> np.ndarray:
        """ All node coordinates as a (N^d, d) array in storage order """
        return np.stack([m.ravel() for m in self.mesh(offset)], axis=1)

    def index_vectors(self) -> np.ndarray:
        """ Centered integer multi-indices as a (N^d, d) array in storage order """
        axis = self.indices()
        grids = np.meshgrid(*([axis] * self._dimension), indexing='ij')
        return np.stack([g.ravel() for g in grids], axis=1)

    def frequencies(self) -> np.ndarray:
        return self.index_vectors() / self._L

    def negated_positions(self) -> np.ndarray:
        """ For every flat position p, the flat position holding -k mod N """
        positions = np.arange(self.size).reshape(self.shape)
        return reflect_array(positions).ravel()

    def fits(self, body: 'ConvexBody', strict: bool = True) -> bool:
        """ Whether the body lies inside the period cube

        With strict=True the body must be inside the open cube (-L/2, L/2)^d,
        otherwise the closed cube is accepted.
        """
        if body.dimension != self._dimension:
            raise ValueError(
                f"Body of dimension {body.dimension} on a grid of dimension {self._dimension}")
        extent = np.max(body.bounding_halfwidths)
        limit = self._L / 2
        if strict:
            return bool(extent < limit * (1 - 1e-12))
        return bool(extent <= limit * (1 + 1e-12))

    def to_dict(self) -> Dict:
        return {'dimension': self._dimension, 'N': self._N, 'L': self._L}

    def __eq__(self, other) -> bool:
        if not isinstance(other, TorusGrid):
            return NotImplemented
        return self._dimension == other._dimension and self._N == other._N and np.isclose(self._L, other._L, rtol=1e-14, atol=0)

    def __hash__(self):
        return hash((self._dimension, self._N, round(self._L, 12)))

    def __repr__(self) -> str:
        return f"TorusGrid(dimension={self._dimension}, N={self._N}, L={self._L})"
