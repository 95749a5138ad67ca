from turan_domains.candidate import candidate_gap, candidate_value, grid_allowance, turan_candidate
from turan_domains.geometry import Ball, Box, ConvexBody, HPolytope, Lattice
from turan_domains.solver import (TuranProblem, TuranSolution, TuranSolver, dense_oracle, lattice_upper_bound,
                                  refine_study, solve_turan, verify_solution)
from turan_domains.torus import GridFunction, TorusGrid
