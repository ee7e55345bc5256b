"""Linear program container and solution record."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

LE, GE, EQ = "<=", ">=", "="
_RELATIONS = (LE, GE, EQ)


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    FAILED = "failed"


class LpError(ValueError):
    """Raised for malformed programs."""


class OracleSizeError(LpError):
    """Raised when the enumeration oracle is handed an instance it refuses."""


class LinearProgram:
    """Minimise ``c @ x`` subject to sparse rows ``a_i @ x (<=|>=|=) b_i`` and box bounds.

    Rows are accumulated with :meth:`add_constraint` and frozen into a CSR
    matrix on first access to :attr:`A`.
    """

    def __init__(self, n_vars, objective=None, lower=0.0, upper=np.inf, names=None):
        if n_vars < 0:
            raise LpError("variable count must be non-negative")
        self.n_vars = int(n_vars)
        self.c = np.zeros(self.n_vars) if objective is None else np.asarray(objective, dtype=float).copy()
        self.lower = np.broadcast_to(np.asarray(lower, dtype=float), (self.n_vars,)).copy()
        self.upper = np.broadcast_to(np.asarray(upper, dtype=float), (self.n_vars,)).copy()
        self.names = list(names) if names is not None else None
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []
        self.relations: list[str] = []
        self._rhs: list[float] = []
        self._A = None

    @property
    def n_constraints(self) -> int:
        return len(self.relations)

    def add_constraint(self, indices, coefs, relation, rhs) -> int:
        """Append one row; returns its index."""
        if relation not in _RELATIONS:
            raise LpError(f"unknown relation {relation!r}")
        idx = np.asarray(indices, dtype=np.int64).ravel()
        val = np.asarray(coefs, dtype=float).ravel()
        if idx.shape != val.shape:
            raise LpError("indices and coefficients differ in length")
        row = len(self.relations)
        self._rows.append(np.full(idx.shape, row, dtype=np.int64))
        self._cols.append(idx)
        self._vals.append(val)
        self.relations.append(relation)
        self._rhs.append(float(rhs))
        self._A = None
        return row

    @property
    def A(self) -> sp.csr_matrix:
        if self._A is None:
            m = self.n_constraints
            if m:
                rows = np.concatenate(self._rows)
                cols = np.concatenate(self._cols)
                vals = np.concatenate(self._vals)
            else:
                rows = cols = np.zeros(0, dtype=np.int64)
                vals = np.zeros(0)
            self._A = sp.csr_matrix((vals, (rows, cols)), shape=(m, self.n_vars))
            self._A.sum_duplicates()
        return self._A

    @property
    def rhs(self) -> np.ndarray:
        return np.asarray(self._rhs, dtype=float)

    def validate(self) -> None:
        if self.c.shape != (self.n_vars,):
            raise LpError("objective length does not match variable count")
        if np.any(self.lower > self.upper):
            j = int(np.argmax(self.lower > self.upper))
            raise LpError(f"variable {j}: lower bound exceeds upper bound")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise LpError("NaN bound")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise LpError("bounds exclude every finite value")
        for cols in self._cols:
            if cols.size and (cols.min() < 0 or cols.max() >= self.n_vars):
                raise LpError("constraint references a variable index out of range")
        if not np.all(np.isfinite(self.c)):
            raise LpError("non-finite objective coefficient")
        if not np.all(np.isfinite(self.A.data)) or not np.all(np.isfinite(self.rhs)):
            raise LpError("non-finite constraint coefficient or right-hand side")

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Activity bounds per row, i.e. ``lo_i <= a_i @ x <= hi_i``."""
        b = self.rhs
        rel = np.asarray(self.relations, dtype=object)
        lo = np.where(rel == LE, -np.inf, b)
        hi = np.where(rel == GE, np.inf, b)
        return lo.astype(float), hi.astype(float)

    def max_violation(self, x) -> tuple[float, float]:
        """(worst row violation on max-abs normalised rows, worst bound violation)."""
        x = np.asarray(x, dtype=float)
        bound_viol = float(max(np.max(self.lower - x, initial=0.0), np.max(x - self.upper, initial=0.0)))
        if not self.n_constraints:
            return 0.0, bound_viol
        A = self.A
        act = A @ x
        lo, hi = self.row_bounds()
        viol = np.maximum(lo - act, act - hi)
        viol = np.maximum(viol, 0.0)
        norm = np.asarray(abs(A).max(axis=1).todense()).ravel()
        norm[norm == 0] = 1.0
        return float(np.max(viol / norm, initial=0.0)), bound_viol


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective_value: float = float("nan")
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL
