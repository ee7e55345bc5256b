"""Self-contained linear programming: model container, dual simplex, enumeration oracle."""

from .brute import brute_force_solve
from .lpformat import write_lp
from .model import EQ, GE, LE, LinearProgram, LpError, LpSolution, LpStatus, OracleSizeError
from .simplex import solve

__all__ = [
    "EQ",
    "GE",
    "LE",
    "LinearProgram",
    "LpError",
    "LpSolution",
    "LpStatus",
    "OracleSizeError",
    "brute_force_solve",
    "solve",
    "write_lp",
]
