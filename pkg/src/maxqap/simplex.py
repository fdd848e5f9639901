"""Dense revised simplex for ``max c.x  s.t.  A x (<=|=) b,  0 <= x <= upper``.

The basis inverse is kept explicitly and updated by rank-one pivots, with a
fresh inversion every ``REFACTOR_EVERY`` pivots.  Reduced costs are updated
from the pivot row rather than recomputed.  Upper bounds are handled by the
bounded-variable ratio tests, so they never become rows.

When every profitable column is bounded, the default is a dual simplex
started from the slack basis with those columns at their upper bounds
(dual steepest-edge pricing, bound-flipping ratio test).  Otherwise a
two-phase primal simplex runs.

Pricing rules:

``"bland"``
    smallest eligible index enters (primal) or leaves (dual); ties in the
    ratio test go to the smallest basic index.
``"dantzig"``
    largest reduced cost (primal) or steepest-edge infeasibility (dual).
``"auto"`` (default)
    ``"dantzig"``, switching to Bland after ``DEGENERATE_STREAK`` consecutive
    degenerate pivots and back once the objective strictly improves.  Cycling
    can only happen inside a degenerate stretch, where Bland's rule is in
    force, so termination is guaranteed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg.blas import dger

REFACTOR_EVERY = 100
PIVOT_EPS = 1e-7
DEGENERATE_STREAK = 200


class SimplexError(RuntimeError):
    pass


class IterationLimit(SimplexError):
    pass


class Infeasible(SimplexError):
    pass


class Unbounded(SimplexError):
    pass


@dataclass
class SimplexResult:
    x: np.ndarray
    value: float
    iterations: int


def _basis_inverse(B: sparse.csc_matrix) -> np.ndarray:
    """Dense inverse of a sparse basis, inverting only its non-singleton block.

    Singleton columns (slacks, and anything else with one nonzero) are
    pivoted on their own row, leaving a smaller block ``K`` over the other
    columns and uncovered rows: ``B^-1[S, T] = K^-1`` and the singleton rows
    follow by back-substitution.
    """
    m = B.shape[0]
    nnz = np.diff(B.indptr)
    unit_pos, unit_row, unit_val = [], [], []
    covered = np.zeros(m, dtype=bool)
    for k in np.flatnonzero(nnz == 1):
        i = B.indices[B.indptr[k]]
        if not covered[i]:
            covered[i] = True
            unit_pos.append(k)
            unit_row.append(i)
            unit_val.append(B.data[B.indptr[k]])
    unit_pos = np.asarray(unit_pos, dtype=int)
    unit_row = np.asarray(unit_row, dtype=int)
    is_unit = np.zeros(m, dtype=bool)
    is_unit[unit_pos] = True
    S = np.flatnonzero(~is_unit)
    T = np.flatnonzero(~covered)
    binv = np.zeros((m, m), order="F")
    if S.size:
        BS = B[:, S].tocsr()
        Kinv = np.linalg.inv(BS[T].toarray())
        binv[np.ix_(S, T)] = Kinv
        binv[np.ix_(unit_pos, T)] = -(BS[unit_row] @ Kinv) / np.asarray(unit_val)[:, None]
    binv[unit_pos, unit_row] = 1.0 / np.asarray(unit_val)
    return binv


def _long_step(idx, ratios, weights, upper, infeas, tol):
    """Bound-flipping dual ratio test.

    Breakpoints are passed in order while the dual objective keeps
    improving; its slope starts at the primal infeasibility of the leaving
    row and drops by ``|alpha_j| * upper_j`` at each passed breakpoint.
    Returns the entering column, its ratio and the columns to flip.
    """
    order = np.argsort(ratios, kind="stable")
    slope = infeas
    k = 0
    while True:
        t = ratios[order[k]]
        end = k
        while end < order.size and ratios[order[end]] <= t + tol:
            end += 1
        group = order[k:end]
        drop = np.sum(weights[group] * upper[group])
        if end == order.size or not slope - drop > tol:
            best = group[np.argmax(weights[group])]
            return int(idx[best]), float(t), idx[order[:k]]
        slope -= drop
        k = end


class _Tableau:
    def __init__(self, A: sparse.csc_matrix, b: np.ndarray, upper: np.ndarray, basis: np.ndarray,
                 tol: float, at_upper: np.ndarray | None = None):
        self.A = A
        self.At = A.T.tocsr()
        self.b = b
        self.upper = upper
        self.tol = tol
        self.m, ncols = A.shape
        self.basis = basis
        self.is_basic = np.zeros(ncols, dtype=bool)
        self.is_basic[basis] = True
        self.at_upper = np.zeros(ncols, dtype=bool) if at_upper is None else at_upper.copy()
        self.at_upper[basis] = False
        self.x = np.zeros(ncols)
        self.cost = np.zeros(ncols)
        self.refactor()

    def refactor(self) -> None:
        self.binv = _basis_inverse(self.A[:, self.basis].tocsc())
        xn = np.where(self.at_upper & ~self.is_basic, self.upper, 0.0)
        self.x = xn
        self.x[self.basis] = self.binv @ (self.b - self.A @ xn)
        self.row_norms = np.einsum("ij,ij->i", self.binv, self.binv)
        self.since_refactor = 0
        self.reprice()

    def reprice(self) -> None:
        pi = self.cost[self.basis] @ self.binv
        self.d = self.cost - self.At @ pi
        self.d[self.basis] = 0.0

    def run_dual(self, cost: np.ndarray, rule: str, max_iter: int) -> int:
        """Dual simplex from a dual-feasible basis until primal feasibility.

        A basic column below 0 or above its upper bound leaves; the entering
        column keeps every reduced cost on the correct side of zero.
        """
        self.cost = cost
        self.reprice()
        tol = self.tol
        A = self.A
        it = 0
        streak = 0
        while True:
            xb = self.x[self.basis]
            ub = self.upper[self.basis]
            below = -xb
            above = xb - ub
            infeas = np.maximum(below, above)
            rows = np.flatnonzero(infeas > tol)
            if rows.size == 0:
                if self.since_refactor:
                    self.refactor()
                    continue
                return it
            it += 1
            if it > max_iter:
                raise IterationLimit(f"dual simplex exceeded {max_iter} iterations")
            bland = rule == "bland" or (rule == "auto" and streak >= DEGENERATE_STREAK)
            if bland:
                r = int(rows[np.argmin(self.basis[rows])])
            else:
                # dual steepest edge: infeasibility scaled by the row norm of B^-1
                r = int(rows[np.argmax(infeas[rows] ** 2 / self.row_norms[rows])])
            to_upper = above[r] > below[r]
            bound = ub[r] if to_upper else 0.0
            rho = self.At @ self.binv[r]  # pivot row over all columns
            side = np.where(self.at_upper, -1.0, 1.0)
            s = 1.0 if to_upper else -1.0
            movable = ~self.is_basic & (self.upper > 0)
            cand = movable & (s * side * rho > PIVOT_EPS)
            if not cand.any():
                raise Infeasible(f"row {r} cannot be made feasible")
            idx = np.flatnonzero(cand)
            ratios = np.abs(self.d[idx]) / np.abs(rho[idx])
            if bland:
                tmin = ratios.min()
                j = int(idx[ratios <= tmin + tol][0])
                flips = idx[:0]
            else:
                j, tmin, flips = _long_step(idx, ratios, np.abs(rho[idx]), self.upper[idx],
                                            infeas[r], tol)
            streak = streak + 1 if tmin <= tol else 0
            if flips.size:
                # boxed columns passed by the long step jump to their other bound
                shift = np.where(self.at_upper[flips], -self.upper[flips], self.upper[flips])
                move = np.zeros(A.shape[1])
                move[flips] = shift
                self.x[self.basis] = xb - self.binv @ (A @ move)
                self.x[flips] += shift
                self.at_upper[flips] = ~self.at_upper[flips]
                xb = self.x[self.basis]
            lo, hi = A.indptr[j], A.indptr[j + 1]
            alpha = self.binv[:, A.indices[lo:hi]] @ A.data[lo:hi]
            step = (xb[r] - bound) / alpha[r]
            leaving = self.basis[r]
            self.x[self.basis] = xb - step * alpha
            self.x[j] += step
            self.x[leaving] = bound
            self.at_upper[leaving] = bool(to_upper)
            self.at_upper[j] = False
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            self.basis[r] = j

            self.d -= (self.d[j] / alpha[r]) * rho
            self.d[j] = 0.0
            pivot_row = self.binv[r] / alpha[r]
            ratio = alpha / alpha[r]
            cross = self.binv @ self.binv[r]
            wr = self.row_norms[r]
            self.row_norms += ratio * (ratio * wr - 2.0 * cross)
            np.maximum(self.row_norms, 1e-12, out=self.row_norms)
            self.row_norms[r] = wr / alpha[r] ** 2
            self.binv = dger(-1.0, alpha, pivot_row, a=self.binv, overwrite_a=1)
            self.binv[r] = pivot_row
            self.since_refactor += 1
            if self.since_refactor >= REFACTOR_EVERY:
                self.refactor()

    def run(self, cost: np.ndarray, rule: str, max_iter: int, start: int = 0) -> int:
        self.cost = cost
        self.reprice()
        tol = self.tol
        A = self.A
        it = start
        streak = 0
        while True:
            d = self.d
            can_up = ~self.is_basic & ~self.at_upper & (self.upper > tol) & (d > tol)
            can_down = ~self.is_basic & self.at_upper & (d < -tol)
            eligible = can_up | can_down
            if not eligible.any():
                # confirm with exact reduced costs before declaring optimality
                if self.since_refactor:
                    self.refactor()
                    continue
                return it
            it += 1
            if it > max_iter:
                raise IterationLimit(f"simplex exceeded {max_iter} iterations")
            bland = rule == "bland" or (rule == "auto" and streak >= DEGENERATE_STREAK)
            if bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                j = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
            direction = 1.0 if can_up[j] else -1.0
            lo, hi = A.indptr[j], A.indptr[j + 1]
            alpha = self.binv[:, A.indices[lo:hi]] @ A.data[lo:hi]
            delta = -direction * alpha  # change of basic values per unit step
            xb = self.x[self.basis]
            ub = self.upper[self.basis]
            ratios = np.full(self.m, np.inf)
            dec = delta < -PIVOT_EPS
            ratios[dec] = np.maximum(xb[dec], 0.0) / -delta[dec]
            inc = (delta > PIVOT_EPS) & np.isfinite(ub)
            ratios[inc] = np.maximum(ub[inc] - xb[inc], 0.0) / delta[inc]
            tmax = ratios.min() if self.m else np.inf
            flip = self.upper[j]
            if not np.isfinite(tmax) and not np.isfinite(flip):
                raise Unbounded(f"column {j} can increase without bound")
            if flip <= tmax:
                self.x[self.basis] = xb + flip * delta
                self.at_upper[j] = not self.at_upper[j]
                self.x[j] = flip if self.at_upper[j] else 0.0
                streak = 0
                continue
            ties = np.flatnonzero(ratios <= tmax + tol)
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            t = ratios[r]
            streak = streak + 1 if t <= tol else 0
            leaving = self.basis[r]
            leaves_upper = delta[r] > 0
            self.x[self.basis] = xb + t * delta
            self.x[j] = (self.upper[j] - t) if self.at_upper[j] else t
            self.x[leaving] = self.upper[leaving] if leaves_upper else 0.0
            self.at_upper[leaving] = leaves_upper
            self.at_upper[j] = False
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            self.basis[r] = j

            pivot_row = self.binv[r] / alpha[r]
            rho = self.At @ self.binv[r]
            self.d -= (d[j] / alpha[r]) * rho
            self.d[j] = 0.0
            self.binv = dger(-1.0, alpha, pivot_row, a=self.binv, overwrite_a=1)
            self.binv[r] = pivot_row
            self.since_refactor += 1
            if self.since_refactor >= REFACTOR_EVERY:
                self.refactor()


def _presolve(c, A: sparse.csc_matrix, senses, b, upper):
    """Fix dominated columns at zero and drop rows every ``z >= 0`` satisfies.

    A column is dominated when it has no objective gain and only nonnegative
    coefficients in ``<=`` rows: raising it can only tighten constraints.
    """
    is_le = np.array([s == "<=" for s in senses], dtype=bool)
    rows_eq = ~is_le
    keep_col = np.ones(A.shape[1], dtype=bool)
    for j in range(A.shape[1]):
        lo, hi = A.indptr[j], A.indptr[j + 1]
        rows, vals = A.indices[lo:hi], A.data[lo:hi]
        if c[j] <= 0 and np.all(vals >= 0) and not rows_eq[rows].any():
            keep_col[j] = False
    A2 = A[:, keep_col].tocsr()
    keep_row = np.ones(A.shape[0], dtype=bool)
    for i in range(A2.shape[0]):
        vals = A2.data[A2.indptr[i]:A2.indptr[i + 1]]
        if is_le[i] and b[i] >= 0 and np.all(vals <= 0):
            keep_row[i] = False
    return keep_col, keep_row


def _solve_dual(c, A, senses, b, upper, tol, max_iter, rule):
    m, nr = A.shape
    # one unit column per row: a slack for <= rows, a column fixed at 0 for = rows
    ub_extra = np.array([np.inf if s == "<=" else 0.0 for s in senses])
    full = sparse.hstack([A, sparse.identity(m, format="csc")]).tocsc()
    ub = np.concatenate([upper, ub_extra])
    at_upper = np.concatenate([c > 0, np.zeros(m, dtype=bool)])
    tab = _Tableau(full, b, ub, np.arange(nr, nr + m), tol, at_upper)
    it = tab.run_dual(np.concatenate([c, np.zeros(m)]), rule, max_iter)
    # the dual loop ends primal feasible; primal pricing only confirms optimality
    it = tab.run(np.concatenate([c, np.zeros(m)]), rule, max_iter, start=it)
    return tab.x[:nr], it


def simplex_max(
    c: np.ndarray,
    A,
    senses: list[str],
    b: np.ndarray,
    upper: np.ndarray | None = None,
    tol: float = 1e-9,
    max_iter: int = 10**6,
    rule: str = "auto",
    presolve: bool = True,
    method: str = "auto",
) -> SimplexResult:
    """Maximize ``c @ x`` subject to the rows of ``A`` and box bounds.

    ``senses`` holds ``"<="`` or ``"="`` per row.

    ``method="dual"`` starts from the slack basis with every profitable
    column at its upper bound, which is dual feasible whenever those bounds
    are finite, and runs the dual simplex.  ``method="primal"`` negates rows
    with a negative right-hand side and runs a two-phase primal simplex.
    ``"auto"`` picks the dual method when it applies.
    """
    if rule not in ("bland", "dantzig", "auto"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    if method not in ("auto", "dual", "primal"):
        raise ValueError(f"unknown method {method!r}")
    A = sparse.csc_matrix(A, dtype=np.float64)
    m, n = A.shape
    c = np.asarray(c, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64).copy()
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=np.float64)
    if len(senses) != m or b.shape != (m,) or c.shape != (n,) or upper.shape != (n,):
        raise ValueError("dimension mismatch between c, A, senses, b and upper")
    if np.any(upper < 0):
        raise Infeasible("negative upper bound")
    for s in senses:
        if s not in ("<=", "="):
            raise ValueError(f"unsupported relation {s!r}")

    x_full = np.zeros(n)
    if presolve:
        keep_col, keep_row = _presolve(c, A, senses, b, upper)
        A = A[np.flatnonzero(keep_row)][:, keep_col].tocsc()
        c_r, upper_r = c[keep_col], upper[keep_col]
        b = b[keep_row]
        senses = [s for s, k in zip(senses, keep_row) if k]
    else:
        keep_col = np.ones(n, dtype=bool)
        c_r, upper_r = c, upper
    m, nr = A.shape

    dual_ok = not np.any((c_r > 0) & ~np.isfinite(upper_r))
    if method == "dual" and not dual_ok:
        raise ValueError("dual method needs finite upper bounds on columns with positive cost")
    if m and dual_ok and method != "primal":
        xr, it = _solve_dual(c_r, A, senses, b, upper_r, tol, max_iter, rule)
        x_full[keep_col] = xr
        x = np.clip(x_full, 0.0, upper)
        return SimplexResult(x=x, value=float(c @ x), iterations=it)

    flip = b < 0
    sign = np.where(flip, -1.0, 1.0)
    A = (sparse.diags(sign) @ A).tocsc()
    b = b * sign
    # <= rows with b >= 0 start with their slack basic; every other row gets
    # an artificial (a negated <= row is a >= row whose slack is a surplus).
    slack_rows = [i for i, s in enumerate(senses) if s == "<="]
    slack_sign = [-1.0 if flip[i] else 1.0 for i in slack_rows]
    art_rows = [i for i, s in enumerate(senses) if s == "=" or flip[i]]
    ns, na = len(slack_rows), len(art_rows)
    S = sparse.csc_matrix((slack_sign, (slack_rows, range(ns))), shape=(m, ns))
    R = sparse.csc_matrix((np.ones(na), (art_rows, range(na))), shape=(m, na))
    full = sparse.hstack([A, S, R]).tocsc()
    ub = np.concatenate([upper_r, np.full(ns, np.inf), np.full(na, np.inf)])

    basis = np.empty(m, dtype=int)
    art_set = set(art_rows)
    for k, i in enumerate(slack_rows):
        if i not in art_set:
            basis[i] = nr + k
    for k, i in enumerate(art_rows):
        basis[i] = nr + ns + k

    it = 0
    if m:
        tab = _Tableau(full, b, ub, basis, tol)
        if na:
            phase1 = np.zeros(nr + ns + na)
            phase1[nr + ns:] = -1.0
            it = tab.run(phase1, rule, max_iter)
            infeas = tab.x[nr + ns:].sum()
            if infeas > tol * max(1.0, np.abs(b).max(initial=0.0)):
                raise Infeasible(f"phase one ended with infeasibility {infeas:.3g}")
            tab.upper[nr + ns:] = 0.0
            tab.at_upper[nr + ns:] = False
        cost = np.concatenate([c_r, np.zeros(ns + na)])
        it = tab.run(cost, rule, max_iter, start=it)
        xr = tab.x[:nr]
    else:
        # no rows left: every column sits at whichever bound its cost prefers
        if np.any((c_r > 0) & ~np.isfinite(upper_r)):
            raise Unbounded("unbounded column with no constraints")
        xr = np.where(c_r > 0, upper_r, 0.0)
    x_full[keep_col] = xr
    x = np.clip(x_full, 0.0, upper)
    return SimplexResult(x=x, value=float(c @ x), iterations=it)
