"""
Dense two-phase simplex solver with Bland's anti-cycling rule.

Solves
    minimize    c^T x
    subject to  A_eq x = b_eq,  A_ub x <= b_ub,  lo <= x <= hi
using a full tableau. Sized for the few hundred variables of the robust
sensing programs, not for large sparse problems.
"""

import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from sensing.errors import Infeasible, NumericFailure, Unbounded

logger = logging.getLogger(__name__)

OPTIMALITY_TOLERANCE = 1e-9
PIVOT_TOLERANCE = 1e-11
FEASIBILITY_TOLERANCE = 1e-9

Bound = Tuple[Optional[float], Optional[float]]


class LPResult(BaseModel):
    """Optimal basic feasible solution and its certificate."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: np.ndarray
    fun: float
    iterations: int
    reduced_costs: np.ndarray


class _StandardForm:
    """
    Rewrites a general LP as min c'z, M z = r, z >= 0, r >= 0.

    Original variables are recovered as x = shift + transform @ z[:n_struct].
    """

    def __init__(self, c, A_eq, b_eq, A_ub, b_ub, bounds):
        c = np.asarray(c, dtype=float)
        n = c.shape[0]
        A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
        b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).reshape(-1)
        A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
        b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).reshape(-1)
        if A_eq.shape != (b_eq.shape[0], n) or A_ub.shape != (b_ub.shape[0], n):
            raise ValueError("constraint dimensions do not match the cost vector")

        bounds = self._expand_bounds(bounds, n)
        shift = np.zeros(n)
        columns = []
        caps = []
        for i, (lo, hi) in enumerate(bounds):
            unit = np.zeros(n)
            unit[i] = 1.0
            if lo is not None and np.isfinite(lo):
                shift[i] = lo
                columns.append(unit)
                if hi is not None and np.isfinite(hi):
                    caps.append((len(columns) - 1, hi - lo))
            elif hi is not None and np.isfinite(hi):
                shift[i] = hi
                columns.append(-unit)
            else:
                columns.extend([unit, -unit])
        self.transform = np.array(columns).T
        self.shift = shift
        n_struct = self.transform.shape[1]

        eq_rows = A_eq @ self.transform
        eq_rhs = b_eq - A_eq @ shift
        ub_rows = A_ub @ self.transform
        ub_rhs = b_ub - A_ub @ shift
        if caps:
            cap_rows = np.zeros((len(caps), n_struct))
            for row, (column, width) in enumerate(caps):
                cap_rows[row, column] = 1.0
            ub_rows = np.vstack([ub_rows, cap_rows])
            ub_rhs = np.concatenate([ub_rhs, [width for _, width in caps]])

        n_eq, n_ub = eq_rows.shape[0], ub_rows.shape[0]
        self.matrix = np.zeros((n_eq + n_ub, n_struct + n_ub))
        self.matrix[:n_eq, :n_struct] = eq_rows
        self.matrix[n_eq:, :n_struct] = ub_rows
        self.matrix[n_eq:, n_struct:] = np.eye(n_ub)
        self.rhs = np.concatenate([eq_rhs, ub_rhs])
        self.cost = np.concatenate([self.transform.T @ c, np.zeros(n_ub)])
        self.offset = float(c @ shift)
        self.n_struct = n_struct

        # rows whose own slack can start in the basis
        self.slack_basis = np.full(n_eq + n_ub, -1)
        for row in range(n_eq, n_eq + n_ub):
            if self.rhs[row] >= 0.0:
                self.slack_basis[row] = n_struct + row - n_eq
        negative = self.rhs < 0.0
        self.matrix[negative] *= -1.0
        self.rhs[negative] *= -1.0

    @staticmethod
    def _expand_bounds(bounds, n):
        if bounds is None:
            return [(0.0, None)] * n
        if len(bounds) == 2 and not isinstance(bounds[0], (tuple, list)):
            return [tuple(bounds)] * n
        if len(bounds) != n:
            raise ValueError(f"expected {n} bounds, got {len(bounds)}")
        return [tuple(b) for b in bounds]

    def recover(self, z: np.ndarray) -> np.ndarray:
        return self.shift + self.transform @ z[:self.n_struct]


class DenseSimplex:
    """
    Tableau simplex over a problem in standard form.

    Entering and leaving variables follow Bland's rule (lowest index),
    which guarantees termination on degenerate vertices.
    """

    def __init__(self, matrix: np.ndarray, rhs: np.ndarray, cost: np.ndarray,
                 slack_basis: np.ndarray, max_iter: int = 50_000):
        self.m, self.n = matrix.shape
        self.cost = cost
        self.max_iter = max_iter
        self.iterations = 0

        needs_artificial = np.flatnonzero(slack_basis < 0)
        self.n_artificial = needs_artificial.shape[0]
        self.tableau = np.zeros((self.m, self.n + self.n_artificial + 1))
        self.tableau[:, :self.n] = matrix
        self.tableau[needs_artificial, self.n + np.arange(self.n_artificial)] = 1.0
        self.tableau[:, -1] = rhs
        self.basis = slack_basis.copy()
        self.basis[needs_artificial] = self.n + np.arange(self.n_artificial)

    @property
    def rhs(self) -> np.ndarray:
        return self.tableau[:, -1]

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        width = cost.shape[0]
        return cost - cost[self.basis] @ self.tableau[:, :width]

    def _find_pivot_column(self, reduced: np.ndarray) -> Optional[int]:
        candidates = np.flatnonzero(reduced < -OPTIMALITY_TOLERANCE)
        return int(candidates[0]) if candidates.size else None

    def _find_pivot_row(self, column: int) -> Optional[int]:
        entries = self.tableau[:, column]
        rows = np.flatnonzero(entries > PIVOT_TOLERANCE)
        if rows.size == 0:
            return None
        ratios = np.maximum(self.rhs[rows], 0.0) / entries[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        return int(tied[np.argmin(self.basis[tied])])

    def _pivot(self, row: int, column: int) -> None:
        self.tableau[row] /= self.tableau[row, column]
        factors = self.tableau[:, column].copy()
        factors[row] = 0.0
        self.tableau -= np.outer(factors, self.tableau[row])
        self.basis[row] = column

    def _iterate(self, cost: np.ndarray) -> None:
        while True:
            if self.iterations >= self.max_iter:
                raise NumericFailure(f"simplex did not converge in {self.max_iter} pivots")
            reduced = self._reduced_costs(cost)
            column = self._find_pivot_column(reduced)
            if column is None:
                return
            row = self._find_pivot_row(column)
            if row is None:
                raise Unbounded("objective decreases without bound along an extreme ray")
            self._pivot(row, column)
            self.iterations += 1

    def _phase_one(self) -> None:
        if self.n_artificial == 0:
            return
        width = self.n + self.n_artificial
        cost = np.zeros(width)
        cost[self.n:] = 1.0
        self._iterate(cost)
        residual = float(cost[self.basis] @ self.rhs)
        if residual > FEASIBILITY_TOLERANCE * max(1.0, float(np.abs(self.rhs).max(initial=0.0))):
            raise Infeasible(f"no feasible point; phase-one residual {residual:.3e}")

        # drive remaining zero-level artificials out of the basis, dropping redundant rows
        keep = []
        for row in range(self.m):
            if self.basis[row] < self.n:
                keep.append(row)
                continue
            candidates = np.flatnonzero(np.abs(self.tableau[row, :self.n]) > PIVOT_TOLERANCE)
            if candidates.size:
                self._pivot(row, int(candidates[0]))
                keep.append(row)
        self.tableau = np.delete(self.tableau, np.s_[self.n:self.n + self.n_artificial], axis=1)[keep]
        self.basis = self.basis[keep]
        self.m = len(keep)
        self.n_artificial = 0

    def solve(self) -> Tuple[np.ndarray, np.ndarray]:
        """Run both phases; returns the standard-form solution and reduced costs."""
        self._phase_one()
        self._iterate(self.cost)
        z = np.zeros(self.n)
        z[self.basis] = self.rhs
        return z, self._reduced_costs(self.cost)


def lp_solve(
    c: Sequence[float],
    A_eq: Optional[np.ndarray] = None,
    b_eq: Optional[Sequence[float]] = None,
    bounds: Union[None, Bound, Sequence[Bound]] = None,
    A_ub: Optional[np.ndarray] = None,
    b_ub: Optional[Sequence[float]] = None,
    max_iter: int = 50_000,
) -> LPResult:
    """
    Solve a linear program with the dense simplex.

    Args:
        c: Cost vector
        A_eq: Equality constraint matrix
        b_eq: Equality right-hand side
        bounds: One (lo, hi) pair for all variables or one per variable; None is unbounded
        A_ub: Inequality constraint matrix (A_ub x <= b_ub)
        b_ub: Inequality right-hand side
        max_iter: Pivot limit across both phases

    Returns:
        LPResult with an optimal vertex; reduced costs are >= -1e-9

    Raises:
        Infeasible: the constraints admit no point
        Unbounded: the objective has no finite minimum
        NumericFailure: the pivot limit was reached
    """
    form = _StandardForm(c, A_eq, b_eq, A_ub, b_ub, bounds)
    solver = DenseSimplex(form.matrix, form.rhs, form.cost, form.slack_basis, max_iter=max_iter)
    z, reduced = solver.solve()
    x = form.recover(z)
    fun = float(np.dot(np.asarray(c, dtype=float), x))
    logger.debug(
        f"LP solved: {form.matrix.shape[0]} rows, {form.matrix.shape[1]} columns, "
        f"{solver.iterations} pivots, objective {fun:.12g}"
    )
    return LPResult(x=x, fun=fun, iterations=solver.iterations, reduced_costs=reduced)
