"""CPLEX LP text dump, for cross-checking instances against external solvers."""

from __future__ import annotations

import numpy as np

from .model import EQ, GE, LinearProgram


def _num(v):
    # shortest text that round-trips to the same double
    return repr(float(v))


def _name(lp, j):
    return lp.names[j] if lp.names else f"x{j}"


def _terms(lp, idx, vals):
    parts = []
    for j, v in zip(idx, vals):
        if v == 0:
            continue
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {_num(abs(v))} {_name(lp, j)}")
    if not parts:
        return "0 " + _name(lp, 0) if lp.n_vars else "0"
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else s


def write_lp(lp: LinearProgram, path) -> None:
    A = lp.A
    nz = np.flatnonzero(lp.c)
    lines = ["\\ generated by pregwa", "Minimize", " obj: " + _terms(lp, nz, lp.c[nz]), "Subject To"]
    ops = {EQ: "=", GE: ">="}
    for i, (rel, b) in enumerate(zip(lp.relations, lp.rhs)):
        s, e = A.indptr[i], A.indptr[i + 1]
        lhs = _terms(lp, A.indices[s:e], A.data[s:e])
        lines.append(f" c{i}: {lhs} {ops.get(rel, '<=')} {_num(b)}")
    lines.append("Bounds")
    for j in range(lp.n_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        name = _name(lp, j)
        if lo == -np.inf and hi == np.inf:
            lines.append(f" {name} free")
        else:
            lo_s = "-inf" if lo == -np.inf else _num(lo)
            hi_s = "+inf" if hi == np.inf else _num(hi)
            lines.append(f" {lo_s} <= {name} <= {hi_s}")
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
