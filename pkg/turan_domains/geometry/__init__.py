from turan_domains.geometry.ConvexBody import (Ball, Box, ConvexBody, HPolytope, VolumeReport,
                                               distance_lemma_residual, minkowski_difference,
                                               random_symmetric_polygon, regular_hexagon)
from turan_domains.geometry.Lattice import Lattice, dual_lattice, lattice_density
