from turan_domains.torus.TorusGrid import TorusGrid, reflect_array
from turan_domains.torus.GridFunction import (GridFunction, autocorrelate, dft, idft, is_positive_definite,
                                              lattice_shifts, min_spectrum, periodize, power_spectrum,
                                              rasterize)
