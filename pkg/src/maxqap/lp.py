"""LP relaxations for list-restricted MaxQAP (LP1) and dup-MaxQbAP (LP2).

Both relaxations share one shape, parameterized by a capacity ``b``
(``b = 1`` for LP1) and a mask of admissible ``x`` columns::

    max   sum_{u,v,p,q} w_G(u,v) w_H(p,q) y[u,p,v,q]
    s.t.  sum_p x[u,p] <= b                      for every u
          sum_u x[u,p] <= b                      for every p
          sum_p y[u,p,v,q] <= b x[v,q]           for every u, v, q
          sum_u y[u,p,v,q] <= b x[v,q]           for every v, p, q
          y[u,p,v,q] = y[v,q,u,p],  0 <= x, y <= 1

Symmetry is enforced by storage: ``y[u,p,v,q]`` and ``y[v,q,u,p]`` share
one column, named by the lexicographically smaller orientation.  Columns
for inadmissible pairs (and every ``y`` touching them) are left out of the
model instead of being pinned to zero.  ``y[u,p,u,p]`` carries no objective
weight and is dropped as well.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from scipy import sparse

from .instances import BInstance, ListInstance
from .simplex import simplex_max

XKey = tuple[str, int, int]
YKey = tuple[str, int, int, int, int]

DEFAULT_TOL = 1e-9


def canonical(u: int, p: int, v: int, q: int) -> tuple[int, int, int, int]:
    """Orientation under which a merged ``y`` column is stored."""
    return (u, p, v, q) if (u, p) <= (v, q) else (v, q, u, p)


@dataclass
class LPModel:
    """A ``<=``/``=`` constrained LP over box-bounded columns ``0 <= z <= upper``."""

    n: int
    b: int
    columns: list
    objective: np.ndarray
    A: sparse.csr_matrix
    senses: list[str]
    rhs: np.ndarray
    row_names: list[str]
    upper: np.ndarray
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {key: j for j, key in enumerate(self.columns)}

    @property
    def num_vars(self) -> int:
        return len(self.columns)

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def x_columns(self) -> list[XKey]:
        return [c for c in self.columns if c[0] == "x"]

    def y_columns(self) -> list[YKey]:
        return [c for c in self.columns if c[0] == "y"]


@dataclass
class FractionalSolution:
    """LP point: ``x`` as an n x n matrix, ``y`` stored once per merged pair."""

    n: int
    x: np.ndarray
    y: dict
    objective_value: float
    _dense: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def y_value(self, u: int, p: int, v: int, q: int) -> float:
        return self.y.get(canonical(u, p, v, q), 0.0)

    @property
    def Y(self) -> np.ndarray:
        """Dense symmetric tensor ``Y[u, p, v, q]`` (read-only, cached)."""
        if self._dense is None:
            Y = np.zeros((self.n,) * 4)
            for (u, p, v, q), val in self.y.items():
                Y[u, p, v, q] = val
                Y[v, q, u, p] = val
            Y.setflags(write=False)
            self._dense = Y
        return self._dense


def _build(g, h, allowed: np.ndarray, b: int) -> LPModel:
    n = g.n
    pairs = [(u, p) for u in range(n) for p in range(n) if allowed[u, p]]
    columns: list = [("x", u, p) for u, p in pairs]
    obj = [0.0] * len(columns)
    for i, (u, p) in enumerate(pairs):
        for v, q in pairs[i + 1:]:
            columns.append(("y", u, p, v, q))
            obj.append(2.0 * g.w[u, v] * h.w[p, q])
    index = {key: j for j, key in enumerate(columns)}

    def ycol(u, p, v, q):
        return index.get(("y",) + canonical(u, p, v, q))

    rows, cols, vals = [], [], []
    senses, rhs, names = [], [], []

    def add_row(entries, bound, name):
        r = len(rhs)
        for j, a in entries:
            rows.append(r)
            cols.append(j)
            vals.append(a)
        senses.append("<=")
        rhs.append(bound)
        names.append(name)

    for u in range(n):
        entries = [(index[("x", u, p)], 1.0) for p in range(n) if allowed[u, p]]
        if entries:
            add_row(entries, float(b), f"deg_g_{u}")
    for p in range(n):
        entries = [(index[("x", u, p)], 1.0) for u in range(n) if allowed[u, p]]
        if entries:
            add_row(entries, float(b), f"deg_h_{p}")
    # Coupling rows; a row whose y terms were all eliminated reads 0 <= b x
    # and is pruned.
    for u in range(n):
        for v in range(n):
            for q in range(n):
                ys = [j for p in range(n) if (u, p) != (v, q) and (j := ycol(u, p, v, q)) is not None]
                if ys:
                    add_row([(j, 1.0) for j in ys] + [(index[("x", v, q)], -float(b))], 0.0,
                            f"sum_p_y_{u}_{v}_{q}")
    for v in range(n):
        for p in range(n):
            for q in range(n):
                ys = [j for u in range(n) if (u, p) != (v, q) and (j := ycol(u, p, v, q)) is not None]
                if ys:
                    add_row([(j, 1.0) for j in ys] + [(index[("x", v, q)], -float(b))], 0.0,
                            f"sum_u_y_{v}_{p}_{q}")

    A = sparse.csr_matrix((vals, (rows, cols)), shape=(len(rhs), len(columns)))
    return LPModel(
        n=n, b=b, columns=columns, objective=np.asarray(obj), A=A, senses=senses,
        rhs=np.asarray(rhs, dtype=np.float64), row_names=names, upper=np.ones(len(columns)),
    )


def build_lp1(inst: ListInstance) -> LPModel:
    return _build(inst.g, inst.h, inst.allowed(), 1)


def build_lp2(inst: BInstance) -> LPModel:
    return _build(inst.g, inst.h, np.ones((inst.n, inst.n), dtype=bool), inst.b)


def build_lp(inst) -> LPModel:
    return build_lp2(inst) if isinstance(inst, BInstance) else build_lp1(inst)


def _to_solution(model: LPModel, z: np.ndarray, tol: float) -> FractionalSolution:
    z = np.where(z < tol, 0.0, np.minimum(z, model.upper))
    x = np.zeros((model.n, model.n))
    y = {}
    for key, val in zip(model.columns, z):
        if key[0] == "x":
            x[key[1], key[2]] = val
        elif val > 0.0:
            y[key[1:]] = float(val)
    return FractionalSolution(n=model.n, x=x, y=y, objective_value=float(model.objective @ z))


def solve(model: LPModel, tol: float = DEFAULT_TOL, *, backend: str = "simplex",
          rule: str = "auto", max_iter: int = 10**6) -> FractionalSolution:
    """Optimal LP point.

    ``backend="simplex"`` (default) uses the built-in revised simplex;
    ``backend="highs"`` hands the same model to ``scipy.optimize.linprog``.
    """
    if model.num_vars == 0:
        return FractionalSolution(n=model.n, x=np.zeros((model.n, model.n)), y={}, objective_value=0.0)
    if backend == "simplex":
        res = simplex_max(model.objective, model.A, model.senses, model.rhs, model.upper,
                          tol=tol, max_iter=max_iter, rule=rule)
        z = res.x
    elif backend == "highs":
        from scipy.optimize import linprog

        eq = np.array([s == "=" for s in model.senses])
        A = model.A.tocsr()
        out = linprog(
            -model.objective,
            A_ub=A[~eq] if (~eq).any() else None, b_ub=model.rhs[~eq] if (~eq).any() else None,
            A_eq=A[eq] if eq.any() else None, b_eq=model.rhs[eq] if eq.any() else None,
            bounds=list(zip(np.zeros(model.num_vars), model.upper)), method="highs",
        )
        if out.status != 0:
            raise RuntimeError(f"HiGHS failed: {out.message}")
        z = np.clip(out.x, 0.0, model.upper)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return _to_solution(model, z, tol)


def solve_instance(inst, tol: float = DEFAULT_TOL, **kwargs) -> FractionalSolution:
    return solve(build_lp(inst), tol, **kwargs)


# --- feasibility ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    row: str
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def solution_vector(model: LPModel, sol: FractionalSolution) -> np.ndarray:
    return np.array([
        sol.x[key[1], key[2]] if key[0] == "x" else sol.y.get(key[1:], 0.0)
        for key in model.columns
    ])


def check_feasible(model: LPModel, sol: FractionalSolution, tol: float = 1e-7) -> list[Violation]:
    """Every constraint of ``model`` that ``sol`` violates by more than ``tol``.

    Besides the model rows this also checks the box bounds, nonzero values on
    eliminated columns, and ``y`` entries that have no column in the model.
    """
    if sol.n != model.n or sol.x.shape != (model.n, model.n):
        raise ValueError(f"solution is for n={sol.n}, model has n={model.n}")
    z = solution_vector(model, sol)
    out = []
    lhs = model.A @ z
    for name, sense, a, r in zip(model.row_names, model.senses, lhs, model.rhs):
        if a > r + tol or (sense == "=" and a < r - tol):
            out.append(Violation(name, float(a), float(r)))
    for key, val, ub in zip(model.columns, z, model.upper):
        name = "_".join(map(str, key))
        if val < -tol:
            out.append(Violation(f"lb_{name}", float(-val), 0.0))
        if val > ub + tol:
            out.append(Violation(f"ub_{name}", float(val), float(ub)))
    for u, p in zip(*np.nonzero(np.abs(sol.x) > tol)):
        if ("x", u, p) not in model.index:
            out.append(Violation(f"eliminated_x_{u}_{p}", float(sol.x[u, p]), 0.0))
    for key, val in sol.y.items():
        if abs(val) > tol and ("y",) + tuple(key) not in model.index:
            out.append(Violation("eliminated_y_" + "_".join(map(str, key)), float(val), 0.0))
    return out


# --- text export ------------------------------------------------------------


def var_name(key) -> str:
    return "_".join(str(k) for k in key)


def _terms(coefs: Iterator[tuple[float, str]]) -> str:
    return " ".join(f"{c:+.17g}*{name}" for c, name in coefs) or "0"


def dump_lp(model: LPModel) -> str:
    """Plain-text export: objective line, one line per row, one per bound."""
    names = [var_name(k) for k in model.columns]
    lines = ["max: " + _terms((c, names[j]) for j, c in enumerate(model.objective) if c != 0.0)]
    A = model.A.tocsr()
    for i, (name, sense, r) in enumerate(zip(model.row_names, model.senses, model.rhs)):
        start, end = A.indptr[i], A.indptr[i + 1]
        body = _terms((A.data[k], names[A.indices[k]]) for k in range(start, end))
        lines.append(f"{name}: {body} {sense} {r:.17g}")
    for name, ub in zip(names, model.upper):
        lines.append(f"bound: 1*{name} <= {ub:.17g}")
    return "\n".join(lines) + "\n"
