"""Bounded dual simplex over a sparse LU-factored basis.

Every row gets a logical variable ``w_i = a_i @ x`` carrying the row's
activity bounds, so the working system is ``[A  -I] [x; w] = 0`` with the
all-logical basis as the starting point. Infinite bounds are replaced by an
artificial box, which makes any bound assignment dual feasible; a solution
that leans on the box is re-solved with a larger box before a verdict of
unbounded (or infeasible) is returned.
"""

from __future__ import annotations

import logging
import math

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import LinearProgram, LpSolution, LpStatus

log = logging.getLogger(__name__)

PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
ROW_TOL = 1e-7
REFACTOR_EVERY = 100
STALL_LIMIT = 300
DENSE_LIMIT = 400

_AT_LOWER, _AT_UPPER, _BASIC = 0, 1, 2


def _pow2(v):
    return np.exp2(np.round(np.log2(v)))


def _absmax(M, axis):
    if M.shape[axis] == 0 or M.shape[1 - axis] == 0:
        return np.zeros(M.shape[1 - axis])
    return np.asarray(abs(M).max(axis=axis).todense()).ravel()


class _Factor:
    """LU of the basis matrix plus a product-form eta file."""

    def __init__(self, B):
        m = B.shape[0]
        self.m = m
        if m <= DENSE_LIMIT:
            self._dense = sla.lu_factor(B.toarray(), check_finite=False)
            piv = np.abs(np.diag(self._dense[0]))
            if m and piv.min() <= 1e-13 * max(1.0, piv.max()):
                raise np.linalg.LinAlgError("singular basis")
            self._lu = None
        else:
            self._dense = None
            self._lu = spla.splu(B.tocsc())
        self.etas: list[tuple[int, np.ndarray]] = []

    def _solve(self, v, trans=False):
        if self._dense is not None:
            return sla.lu_solve(self._dense, v, trans=1 if trans else 0, check_finite=False)
        return self._lu.solve(v, trans="T" if trans else "N")

    def ftran(self, a):
        v = self._solve(a)
        for r, eta in self.etas:
            vr = v[r] / eta[r]
            if vr != 0.0:
                v -= eta * vr
            v[r] = vr
        return v

    def btran(self, e):
        u = np.array(e, dtype=float)
        for r, eta in reversed(self.etas):
            ur = u[r]
            u[r] = (ur - (u @ eta - ur * eta[r])) / eta[r]
        return self._solve(u, trans=True)

    def update(self, r, alpha_q):
        self.etas.append((r, alpha_q.copy()))


class _DualSimplex:
    def __init__(self, lp: LinearProgram, box: float, max_iter: int | None):
        A = lp.A.tocsc().astype(float)
        m, n = A.shape
        self.m, self.n = m, n

        # power-of-two equilibration: rows, then columns
        rmax = _absmax(A, 1)
        rscale = np.where(rmax > 0, 1.0 / _pow2(np.where(rmax > 0, rmax, 1.0)), 1.0)
        A = sp.diags(rscale) @ A
        cmax = _absmax(A, 0)
        cscale = np.where(cmax > 0, 1.0 / _pow2(np.where(cmax > 0, cmax, 1.0)), 1.0)
        A = (A @ sp.diags(cscale)).tocsc()
        self.rscale, self.cscale = rscale, cscale
        self.A = A
        self.At = A.T.tocsr()

        c = lp.c * cscale
        cmag = np.max(np.abs(c), initial=0.0)
        self.cost_scale = _pow2(cmag) if cmag > 0 else 1.0
        c = c / self.cost_scale

        rlo, rhi = lp.row_bounds()
        lo = np.concatenate([lp.lower / cscale, rlo * rscale])
        hi = np.concatenate([lp.upper / cscale, rhi * rscale])
        finite = np.concatenate([lo[np.isfinite(lo)], hi[np.isfinite(hi)]])
        self.box = box * max(1.0, np.max(np.abs(finite), initial=0.0))
        self.art_lo = ~np.isfinite(lo)
        self.art_hi = ~np.isfinite(hi)
        lo[self.art_lo] = -self.box
        hi[self.art_hi] = self.box
        self.lo, self.hi = lo, hi
        self.fixed = lo == hi
        self.c = np.concatenate([c, np.zeros(m)])
        N = n + m
        self.N = N
        self.max_iter = max_iter if max_iter is not None else 50 * N + 10_000

        self.state = np.empty(N, dtype=np.int8)
        self.x = np.zeros(N)
        struct_c = self.c[:n]
        at_upper = (struct_c < 0) | ((struct_c == 0) & self.art_lo[:n] & ~self.art_hi[:n])
        self.state[:n] = np.where(at_upper, _AT_UPPER, _AT_LOWER)
        self.x[:n] = np.where(at_upper, hi[:n], lo[:n])
        self.state[n:] = _BASIC
        self.basic = np.arange(n, N, dtype=np.int64)
        self.iterations = 0

    # linear algebra helpers

    def _column(self, j):
        if j < self.n:
            col = np.zeros(self.m)
            s, e = self.A.indptr[j], self.A.indptr[j + 1]
            col[self.A.indices[s:e]] = self.A.data[s:e]
            return col
        col = np.zeros(self.m)
        col[j - self.n] = -1.0
        return col

    def _refactor(self):
        struct_pos = np.flatnonzero(self.basic < self.n)
        log_pos = np.flatnonzero(self.basic >= self.n)
        S = self.A[:, self.basic[struct_pos]].tocoo()
        rows = np.concatenate([S.row, self.basic[log_pos] - self.n])
        cols = np.concatenate([struct_pos[S.col], log_pos])
        vals = np.concatenate([S.data, -np.ones(log_pos.size)])
        B = sp.csc_matrix((vals, (rows, cols)), shape=(self.m, self.m))
        self.factor = _Factor(B)
        self._recompute()

    def _recompute(self):
        n = self.n
        xs = self.x[:n].copy()
        xs[self.basic[self.basic < n]] = 0.0
        rhs = -(self.A @ xs)
        nb_log = np.flatnonzero(self.state[n:] != _BASIC)
        rhs[nb_log] += self.x[n + nb_log]
        self.x[self.basic] = self.factor.ftran(rhs)
        y = self.factor.btran(self.c[self.basic])
        self.d = np.concatenate([self.c[:n] - self.At @ y, y])
        self.d[self.basic] = 0.0

    def _restore_dual_feasibility(self):
        """Flip nonbasic variables whose reduced cost has drifted to the wrong sign."""
        nb = self.state != _BASIC
        bad_lo = nb & (self.state == _AT_LOWER) & (self.d < -DUAL_TOL) & ~self.fixed
        bad_hi = nb & (self.state == _AT_UPPER) & (self.d > DUAL_TOL) & ~self.fixed
        flips = np.flatnonzero(bad_lo | bad_hi)
        if flips.size == 0:
            return False
        self.state[bad_lo] = _AT_UPPER
        self.x[bad_lo] = self.hi[bad_lo]
        self.state[bad_hi] = _AT_LOWER
        self.x[bad_hi] = self.lo[bad_hi]
        self._recompute()
        return True

    def _objective(self):
        return float(self.c @ self.x)

    # main loop

    def run(self):
        try:
            return self._iterate()
        except (RuntimeError, np.linalg.LinAlgError) as exc:
            # singular refactorisation; the caller reports FAILED, never a wrong answer
            return LpStatus.FAILED, {"reason": f"factorisation: {exc}"}

    def _iterate(self):
        self._refactor()
        self._restore_dual_feasibility()
        best_obj = self._objective()
        stalled = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                return LpStatus.FAILED, {"reason": "iteration limit"}
            xb = self.x[self.basic]
            lb = self.lo[self.basic]
            ub = self.hi[self.basic]
            below = lb - xb
            above = xb - ub
            infeas = np.maximum(below, above)
            cand = infeas > PRIMAL_TOL
            if not cand.any():
                # confirm on a fresh factorisation before declaring optimality
                if self.factor.etas:
                    self._refactor()
                    self._restore_dual_feasibility()
                    continue
                if self._restore_dual_feasibility():
                    continue
                return LpStatus.OPTIMAL, {}
            if bland:
                idx = np.flatnonzero(cand)
                r = int(idx[np.argmin(self.basic[idx])])
            else:
                r = int(np.argmax(np.where(cand, infeas, -np.inf)))
            p = int(self.basic[r])
            to_upper = above[r] > below[r]
            sgn = 1.0 if to_upper else -1.0

            e = np.zeros(self.m)
            e[r] = 1.0
            rho = self.factor.btran(e)
            alpha = np.concatenate([self.At @ rho, -rho])
            ahat = sgn * alpha
            st = self.state
            elig = (st != _BASIC) & ~self.fixed & (
                ((st == _AT_LOWER) & (ahat > PIVOT_TOL)) | ((st == _AT_UPPER) & (ahat < -PIVOT_TOL))
            )
            elig_idx = np.flatnonzero(elig)
            if elig_idx.size == 0:
                if self.factor.etas:
                    self._refactor()
                    continue
                art = (st != _BASIC) & (np.abs(alpha) > PIVOT_TOL) & (
                    ((st == _AT_LOWER) & self.art_lo) | ((st == _AT_UPPER) & self.art_hi)
                )
                return LpStatus.INFEASIBLE, {"box_limited": bool(art.any())}
            g = np.abs(ahat[elig_idx])
            slack = np.where(st[elig_idx] == _AT_LOWER, self.d[elig_idx], -self.d[elig_idx])
            slack = np.maximum(slack, 0.0)
            if bland:
                ratios = slack / g
                k = int(np.argmin(ratios))
            else:
                # Harris two-pass: relaxed bound, then the largest pivot inside it
                tmax = np.min((slack + DUAL_TOL) / g)
                within = slack / g <= tmax
                k = int(np.argmax(np.where(within, g, -1.0)))
            q = int(elig_idx[k])
            t_dual = slack[k] / g[k]

            alpha_q = self.factor.ftran(self._column(q))
            piv = alpha_q[r]
            if abs(piv - alpha[q]) > 1e-7 * (1.0 + abs(piv)) or abs(piv) < PIVOT_TOL:
                if self.factor.etas:
                    self._refactor()
                    continue
                return LpStatus.FAILED, {"reason": "unstable pivot"}

            theta = sgn * t_dual
            nb = st != _BASIC
            self.d[nb] -= theta * alpha[nb]
            self.d[q] = 0.0
            self.d[p] = -theta

            bound = ub[r] if to_upper else lb[r]
            tp = (xb[r] - bound) / piv
            self.x[self.basic] -= tp * alpha_q
            self.x[q] += tp
            self.x[p] = bound
            st[p] = _AT_UPPER if to_upper else _AT_LOWER
            st[q] = _BASIC
            self.basic[r] = q
            self.iterations += 1

            if len(self.factor.etas) + 1 >= REFACTOR_EVERY:
                self._refactor()
            else:
                self.factor.update(r, alpha_q)

            obj = self._objective()
            if obj > best_obj + 1e-12 * (1.0 + abs(best_obj)):
                best_obj = obj
                stalled = 0
                bland = False
            else:
                stalled += 1
                if stalled >= STALL_LIMIT:
                    bland = True

    def leans_on_box(self) -> bool:
        """True if some nonbasic variable sits on an artificial bound with a non-zero reduced cost."""
        st = self.state
        on_lo = (st == _AT_LOWER) & self.art_lo
        on_hi = (st == _AT_UPPER) & self.art_hi
        return bool(np.any((on_lo | on_hi) & (np.abs(self.d) > DUAL_TOL)))

    def structural_solution(self, lp: LinearProgram) -> np.ndarray:
        x = self.x[: self.n] * self.cscale
        return np.clip(x, lp.lower, lp.upper)


def solve(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    """Solve ``lp`` to a verified optimum or report why not.

    The returned point is clipped onto the variable bounds and re-checked
    against every row on the original (unscaled) data; a point that fails
    the check is reported as ``FAILED`` rather than ``OPTIMAL``.
    """
    lp.validate()
    if lp.n_vars == 0 and lp.n_constraints == 0:
        return LpSolution(LpStatus.OPTIMAL, np.zeros(0), 0.0)
    box = 1e6
    total_iter = 0
    while True:
        ds = _DualSimplex(lp, box, max_iter)
        status, info = ds.run()
        total_iter += ds.iterations
        retry = box < 1e12 and (
            (status is LpStatus.OPTIMAL and ds.leans_on_box())
            or (status is LpStatus.INFEASIBLE and info.get("box_limited"))
        )
        if retry:
            box *= 1e3
            continue
        break

    if status is LpStatus.OPTIMAL and ds.leans_on_box():
        return LpSolution(LpStatus.UNBOUNDED, iterations=total_iter)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, iterations=total_iter, info=info)

    x = ds.structural_solution(lp)
    row_viol, bound_viol = lp.max_violation(x)
    info = {"row_violation": row_viol, "bound_violation": bound_viol}
    if row_viol > ROW_TOL or bound_viol > 1e-9:
        log.warning("simplex point failed verification: %s", info)
        return LpSolution(LpStatus.FAILED, x, float(lp.c @ x), total_iter, info)
    obj = float(lp.c @ x)
    if not math.isfinite(obj):
        return LpSolution(LpStatus.FAILED, x, obj, total_iter, info)
    return LpSolution(LpStatus.OPTIMAL, x, obj, total_iter, info)
