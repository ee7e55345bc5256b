"""Vertex-enumeration oracle for tiny linear programs.

Shares nothing with the simplex beyond the :class:`LinearProgram` container:
every ``n``-subset of the constraint and bound hyperplanes is intersected
densely, feasible intersections are scored, and boundedness is settled by a
second enumeration over the recession cone.
"""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from .model import EQ, GE, LE, LinearProgram, LpSolution, LpStatus, OracleSizeError

MAX_SUBSETS = 300_000
BOX = 1e6
FEAS_TOL = 1e-9
_CHUNK = 20_000


def _hyperplanes(A, rel, b, lower, upper):
    """Rows as (normal, offset, relation) with exact duplicates dropped."""
    n = A.shape[1]
    planes, seen = [], set()
    for a, r, rhs in zip(A, rel, b):
        scale = np.max(np.abs(a))
        if scale == 0:
            continue
        key = (tuple(np.round(a / scale, 12)), round(rhs / scale, 12), r)
        if key in seen:
            continue
        seen.add(key)
        planes.append((a, rhs, r))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        planes.append((e, lower[j], GE))
        planes.append((e, upper[j], LE))
    return planes


def _feasible(X, A, rel, b, lower, upper):
    act = X @ A.T
    scale = np.maximum(np.max(np.abs(A), axis=1), 1.0) if A.size else np.zeros(0)
    ok = np.all(X >= lower - FEAS_TOL * np.maximum(1.0, np.abs(lower)), axis=1)
    ok &= np.all(X <= upper + FEAS_TOL * np.maximum(1.0, np.abs(upper)), axis=1)
    for i, r in enumerate(rel):
        tol = FEAS_TOL * max(1.0, abs(b[i])) * scale[i]
        if r == LE:
            ok &= act[:, i] <= b[i] + tol
        elif r == GE:
            ok &= act[:, i] >= b[i] - tol
        else:
            ok &= np.abs(act[:, i] - b[i]) <= tol
    return ok


def _independent(rows, planes):
    """Greedy maximal subset of ``rows`` with linearly independent normals.

    Dependent equalities add no vertex; ``_feasible`` still checks them all.
    """
    keep, basis = [], None
    for k in rows:
        a = planes[k][0] / np.linalg.norm(planes[k][0])
        trial = a[None, :] if basis is None else np.vstack([basis, a])
        if np.linalg.matrix_rank(trial, tol=1e-9) == trial.shape[0]:
            keep.append(k)
            basis = trial
    return keep


def _enumerate(c, A, rel, b, lower, upper):
    """Best feasible vertex as (objective, x), or None when there is none."""
    n = c.size
    planes = _hyperplanes(A, rel, b, lower, upper)
    forced = _independent([k for k, p in enumerate(planes) if p[2] == EQ], planes)
    free = [k for k, p in enumerate(planes) if p[2] != EQ]
    need = n - len(forced)
    if need < 0:
        forced_sets = list(combinations(forced, n))
        subsets = iter(forced_sets)
    else:
        subsets = (tuple(forced) + s for s in combinations(free, need))
    normals = np.array([p[0] for p in planes])
    offsets = np.array([p[1] for p in planes])
    # substitute y = d * x and normalise rows so the determinant test is scale-free
    d = np.maximum(np.max(np.abs(normals), axis=0), 1e-300)
    normals = normals / d
    rnorm = np.linalg.norm(normals, axis=1)
    normals = normals / rnorm[:, None]
    offsets = offsets / rnorm
    best = None
    while True:
        chunk = [s for _, s in zip(range(_CHUNK), subsets)]
        if not chunk:
            break
        idx = np.array(chunk, dtype=np.int64)
        M = normals[idx]
        rhs = offsets[idx]
        good = np.abs(np.linalg.det(M)) > 1e-10
        if not good.any():
            continue
        X = np.linalg.solve(M[good], rhs[good][..., None])[..., 0] / d
        X = X[_feasible(X, A, rel, b, lower, upper)]
        if X.shape[0] == 0:
            continue
        obj = X @ c
        k = int(np.argmin(obj))
        if best is None or obj[k] < best[0] - 1e-12:
            best = (float(obj[k]), X[k])
    return best


def subset_count(lp: LinearProgram) -> int:
    """Number of hyperplane subsets the oracle would visit for ``lp``."""
    n = lp.n_vars
    m_eq = sum(r == EQ for r in lp.relations)
    m_other = lp.n_constraints - m_eq
    return comb(m_other + 2 * n, max(n - m_eq, 0)) if n >= m_eq else comb(m_eq, n)


def brute_force_solve(lp: LinearProgram, max_subsets: int = MAX_SUBSETS) -> LpSolution:
    """Exact optimum of a tiny LP by enumerating basic solutions.

    Raises :class:`OracleSizeError` when the number of hyperplane subsets
    would exceed ``max_subsets``.
    """
    lp.validate()
    n = lp.n_vars
    if subset_count(lp) > max_subsets:
        raise OracleSizeError(f"instance too large for enumeration ({subset_count(lp)} subsets)")
    A = lp.A.toarray()
    rel = list(lp.relations)
    b = lp.rhs
    c = lp.c
    if n == 0:
        ok = all(
            (r == LE and 0 <= v) or (r == GE and 0 >= v) or (r == EQ and v == 0)
            for r, v in zip(rel, b)
        )
        return LpSolution(LpStatus.OPTIMAL if ok else LpStatus.INFEASIBLE, np.zeros(0), 0.0)

    finite = np.concatenate([np.abs(b), np.abs(lp.lower[np.isfinite(lp.lower)]),
                             np.abs(lp.upper[np.isfinite(lp.upper)])])
    box = BOX * max(1.0, np.max(finite, initial=0.0))
    lower = np.where(np.isfinite(lp.lower), lp.lower, -box)
    upper = np.where(np.isfinite(lp.upper), lp.upper, box)
    best = _enumerate(c, A, rel, b, lower, upper)
    if best is None:
        return LpSolution(LpStatus.INFEASIBLE)

    # recession directions: homogeneous system, unit box, infinite sides only
    rec_lower = np.where(np.isfinite(lp.lower), 0.0, -1.0)
    rec_upper = np.where(np.isfinite(lp.upper), 0.0, 1.0)
    if np.any(rec_lower < rec_upper):
        ray = _enumerate(c, A, rel, np.zeros_like(b), rec_lower, rec_upper)
        if ray is not None and ray[0] < -1e-9 * max(1.0, np.max(np.abs(c))):
            return LpSolution(LpStatus.UNBOUNDED)
    obj, x = best
    return LpSolution(LpStatus.OPTIMAL, x, float(c @ x))
