import logging
from dataclasses import dataclass

import numpy as np

# consecutive degenerate pivots before the largest-coefficient rule gives way to Bland's rule
STALL_LIMIT = 50


class SimplexError(Exception):
    pass


class UnboundedError(SimplexError):
    pass


class InfeasibleError(SimplexError):
    pass


class IterationLimitError(SimplexError):
    pass


@dataclass
class SimplexResult:
    x: np.ndarray
    objective: float
    duals: np.ndarray
    dual_objective: float
    basis: np.ndarray
    iterations: int

    @property
    def duality_gap(self) -> float:
        return abs(self.objective - self.dual_objective)


class DenseSimplex:

    def __init__(self, c, A, b, tol: float = 1e-9, max_iterations: int = 200000, refactor_every: int = 2000) -> None:
        """ Dense tableau simplex for  max c.x  s.t.  A x <= b, x >= 0

        The right-hand side must be non negative, so the slack basis is feasible
        and no first phase is needed. The tableau is kept between solves: rows
        added later are rewritten in the current basis and the next solve
        restores feasibility with dual simplex pivots from the previous optimal
        basis. Both loops price with the largest coefficient and switch to
        Bland's rule after STALL_LIMIT degenerate pivots in a row.

        Should the dual pivots fail, the tableau is rebuilt from the basis and
        the solve retried; failing again, the solve restarts the primal loop
        from the slack basis, which is feasible as long as every right-hand side
        is non negative.

        Args:
            - c: array-like (n,)
                objective coefficients
            - A: array-like (m, n)
                constraint matrix
            - b: array-like (m,)
                right-hand side, b >= 0
            - tol: float (default: 1e-9)
                pivot and optimality tolerance; feasibility is tested relative
                to the largest right-hand side
            - max_iterations: int (default: 200000)
                cap on the total number of pivots over all solves
            - refactor_every: int (default: 2000)
                pivots between two rebuilds of the tableau from the basis

        Returns:
            - None
        """
        c = np.array(c, dtype=float).ravel()
        b = np.array(b, dtype=float).ravel()
        A = np.array(A, dtype=float)
        if A.size != b.size * c.size:
            raise ValueError(f"Constraint matrix of shape {A.shape} does not match {b.size} rows and {c.size} variables")
        A = A.reshape(b.size, c.size)
        if np.any(b < -tol):
            raise ValueError("The initial right-hand side must be non negative")

        self.c: np.ndarray = c
        self.A: np.ndarray = A
        self.b: np.ndarray = np.maximum(b, 0.0)
        self.tol: float = tol
        self.max_iterations: int = max_iterations
        self.refactor_every: int = refactor_every
        self.basis: np.ndarray = np.arange(c.size, c.size + b.size)
        self.iterations: int = 0
        self.restarts: int = 0
        self._since_refactor: int = 0
        self.T: np.ndarray = self._slack_tableau()

    @property
    def n_variables(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.b.size

    @property
    def feasibility_tol(self) -> float:
        return self.tol * max(1.0, float(np.max(np.abs(self.b), initial=0.0)))

    def add_rows(self, A_new, b_new) -> None:
        """ Append constraints; their slacks enter the basis """
        b_new = np.array(b_new, dtype=float).ravel()
        A_new = np.array(A_new, dtype=float)
        if A_new.size != b_new.size * self.n_variables:
            raise ValueError(f"New rows of shape {A_new.shape} do not match {b_new.size} right-hand sides")
        A_new = A_new.reshape(b_new.size, self.n_variables)
        n, m, k = self.n_variables, self.n_rows, b_new.size

        T = np.hstack([self.T[:, :-1], np.zeros((m + 1, k)), self.T[:, -1:]])
        rows = np.zeros((k, n + m + k + 1))
        rows[:, :n] = A_new
        rows[:, n + m:n + m + k] = np.eye(k)
        rows[:, -1] = b_new
        # basic columns are unit vectors of T: eliminate them from the new rows
        rows -= rows[:, self.basis] @ T[:m]

        self.T = np.vstack([T[:m], rows, T[m:]])
        self.A = np.vstack([self.A, A_new])
        self.b = np.concatenate([self.b, b_new])
        self.basis = np.concatenate([self.basis, np.arange(n + m, n + m + k)])

    def _full_matrix(self) -> np.ndarray:
        return np.hstack([self.A, np.eye(self.n_rows)])

    def _full_costs(self) -> np.ndarray:
        return np.concatenate([self.c, np.zeros(self.n_rows)])

    def _slack_tableau(self) -> np.ndarray:
        m, n = self.n_rows, self.n_variables
        T = np.zeros((m + 1, n + m + 1))
        T[:m, :n] = self.A
        T[:m, n:n + m] = np.eye(m)
        T[:m, -1] = self.b
        T[m, :n] = -self.c
        return T

    def refactor(self) -> None:
        """ Rebuild the tableau from the current basis """
        m = self.n_rows
        M = self._full_matrix()
        B = M[:, self.basis]
        c_full = self._full_costs()

        T = np.empty((m + 1, M.shape[1] + 1))
        try:
            T[:m, :-1] = np.linalg.solve(B, M)
            T[:m, -1] = np.linalg.solve(B, self.b)
        except np.linalg.LinAlgError:
            logging.warning("Singular basis: restarting from the slack basis")
            self.restart()
            return
        # objective row holds c_B B^-1 M - c; non negative entries mean optimal
        T[m, :-1] = c_full[self.basis] @ T[:m, :-1] - c_full
        T[m, -1] = c_full[self.basis] @ T[:m, -1]
        self.T = T
        self._since_refactor = 0

    def restart(self) -> None:
        """ Return to the slack basis, primal feasible when b >= 0 """
        self.basis = np.arange(self.n_variables, self.n_variables + self.n_rows)
        self.T = self._slack_tableau()
        self._since_refactor = 0
        self.restarts += 1

    def _pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        column = T[:, col].copy()
        column[row] = 0.0
        touched = np.flatnonzero(column)
        T[touched] -= np.outer(column[touched], T[row])
        self.basis[row] = col
        self.iterations += 1
        self._since_refactor += 1
        if self.iterations > self.max_iterations:
            raise IterationLimitError(f"Simplex exceeded {self.max_iterations} pivots")

    @staticmethod
    def _ties(ratios: np.ndarray) -> np.ndarray:
        best = ratios.min()
        return np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))

    def _primal(self) -> None:
        T, m = self.T, self.n_rows
        stalled = 0
        while True:
            if self._since_refactor >= self.refactor_every:
                self.refactor()
                T = self.T
            costs = T[m, :-1]
            entering = np.flatnonzero(costs < -self.tol)
            if entering.size == 0:
                return
            bland = stalled >= STALL_LIMIT
            col = entering[0] if bland else entering[np.argmin(costs[entering])]

            column = T[:m, col]
            rows = np.flatnonzero(column > self.tol)
            if rows.size == 0:
                raise UnboundedError(f"Column {col} can increase without bound")
            ratios = np.maximum(T[rows, -1], 0.0) / column[rows]
            ties = rows[self._ties(ratios)]
            row = ties[np.argmin(self.basis[ties])] if bland else ties[np.argmax(column[ties])]

            stalled = stalled + 1 if ratios.min() <= self.feasibility_tol else 0
            self._pivot(row, col)

    def _dual(self) -> None:
        T, m = self.T, self.n_rows
        stalled = 0
        while True:
            if self._since_refactor >= self.refactor_every:
                self.refactor()
                T = self.T
            rhs = T[:m, -1]
            infeasible = np.flatnonzero(rhs < -self.feasibility_tol)
            if infeasible.size == 0:
                return
            bland = stalled >= STALL_LIMIT
            row = infeasible[np.argmin(self.basis[infeasible])] if bland else infeasible[np.argmin(rhs[infeasible])]

            coefficients = T[row, :-1]
            cols = np.flatnonzero(coefficients < -self.tol)
            if cols.size == 0:
                raise InfeasibleError(f"Row {row} cannot be satisfied (right-hand side {rhs[row]:.3e})")
            ratios = np.maximum(T[m, cols], 0.0) / -coefficients[cols]
            ties = cols[self._ties(ratios)]
            col = ties[0] if bland else ties[np.argmin(coefficients[ties])]

            stalled = stalled + 1 if ratios.min() <= self.tol else 0
            self._pivot(row, col)

    def _needs_dual(self) -> bool:
        m = self.n_rows
        return bool(np.any(self.T[:m, -1] < -self.feasibility_tol))

    def solve(self) -> SimplexResult:
        if self._since_refactor >= self.refactor_every:
            self.refactor()
        if self._needs_dual():
            if np.any(self.T[self.n_rows, :-1] < -self.tol):
                logging.debug("Basis neither primal nor dual feasible: rebuilding the tableau")
                self.refactor()
            try:
                self._dual()
            except InfeasibleError as e:
                logging.debug(f"Dual simplex failed ({e}): rebuilding the tableau")
                self.refactor()
                try:
                    self._dual()
                except InfeasibleError as e:
                    if np.any(self.b < -self.feasibility_tol):
                        raise
                    logging.warning(f"Dual simplex failed twice ({e}): restarting from the slack basis")
                    self.restart()
        self._primal()
        result = self._result()
        logging.debug(f"Simplex optimal after {self.iterations} pivots, objective {result.objective:.12g}")
        return result

    def _result(self) -> SimplexResult:
        """ Primal and dual solutions read off the optimal tableau """
        n, m = self.n_variables, self.n_rows
        x_full = np.zeros(n + m)
        x_full[self.basis] = self.T[:m, -1]
        x = x_full[:n]
        # reduced costs of the slacks are the row duals
        duals = self.T[m, n:n + m].copy()
        return SimplexResult(x=x,
                             objective=float(self.c @ x),
                             duals=duals,
                             dual_objective=float(self.b @ duals),
                             basis=self.basis.copy(),
                             iterations=self.iterations)
