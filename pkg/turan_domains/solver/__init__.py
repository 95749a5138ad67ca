from turan_domains.solver.simplex import (DenseSimplex, InfeasibleError, IterationLimitError, SimplexError,
                                          SimplexResult, UnboundedError)
from turan_domains.solver.TuranProblem import STATUSES, TuranProblem, TuranSolution
from turan_domains.solver.TuranSolver import (TuranSolver, VerificationReport, dense_oracle, lattice_upper_bound,
                                              refine_study, solve_turan, verify_solution)
