"""Bipartite matching subroutines used by the rounding algorithms.

All functions take explicit row/column node labels and return edge sets
``frozenset[(row_label, col_label)]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instances import Matching

ZERO_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Nonnegative weights between ``rows`` and ``cols``."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64).reshape(len(self.rows), len(self.cols))
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and nonnegative")
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        object.__setattr__(self, "w", w)

    @classmethod
    def from_array(cls, w) -> "WeightMatrix":
        w = np.asarray(w, dtype=np.float64)
        return cls(tuple(range(w.shape[0])), tuple(range(w.shape[1])), w)

    def value(self, edges) -> float:
        ri = {r: i for i, r in enumerate(self.rows)}
        ci = {c: j for j, c in enumerate(self.cols)}
        return float(sum(self.w[ri[r], ci[c]] for r, c in edges))


def _hungarian_min(cost: np.ndarray) -> np.ndarray:
    """Minimum-cost perfect assignment on a square matrix; returns row -> col.

    Shortest augmenting paths with row/column potentials, O(N^3).
    """
    N = cost.shape[0]
    u = np.zeros(N + 1)
    v = np.zeros(N + 1)
    owner = np.zeros(N + 1, dtype=int)  # owner[j] = 1-based row holding column j
    way = np.zeros(N + 1, dtype=int)
    for i in range(1, N + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(N + 1, np.inf)
        used = np.zeros(N + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1  # first minimum: lowest column wins ties
            delta = cand[j1 - 1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    assign = np.empty(N, dtype=int)
    for j in range(1, N + 1):
        assign[owner[j] - 1] = j - 1
    return assign


def max_weight_matching(wm: WeightMatrix) -> Matching:
    """Maximum-weight matching; zero-weight edges are never returned."""
    r, c = wm.w.shape
    if r == 0 or c == 0:
        return frozenset()
    N = max(r, c)
    padded = np.zeros((N, N))
    padded[:r, :c] = wm.w
    assign = _hungarian_min(-padded)
    return frozenset(
        (wm.rows[i], wm.cols[assign[i]])
        for i in range(r)
        if assign[i] < c and wm.w[i, assign[i]] > 0
    )


def max_weight_bmatching(wm: WeightMatrix, b: int) -> Matching:
    """Maximum-weight b-matching (unit edge capacities) via min-cost flow.

    Successive shortest paths from source to sink with costs ``-w``; flow is
    pushed one unit at a time while the cheapest path has negative cost,
    so only weight-improving augmentations are made.
    """
    if b < 1:
        raise ValueError(f"b must be positive, got {b}")
    R, C = wm.w.shape
    src, snk = 0, R + C + 1
    n_nodes = R + C + 2
    # residual edges stored as parallel lists; edge e and e ^ 1 are a pair
    head, cap, cost, tail = [], [], [], []

    def add(a, z, capacity, c):
        tail.extend((a, z))
        head.extend((z, a))
        cap.extend((capacity, 0))
        cost.extend((c, -c))

    for i in range(R):
        add(src, 1 + i, b, 0.0)
    mid = {}
    for i in range(R):
        for j in range(C):
            if wm.w[i, j] > 0:
                mid[len(tail)] = (i, j)
                add(1 + i, 1 + R + j, 1, -wm.w[i, j])
    for j in range(C):
        add(1 + R + j, snk, b, 0.0)

    while True:
        dist = [np.inf] * n_nodes
        pred = [-1] * n_nodes
        dist[src] = 0.0
        for _ in range(n_nodes - 1):
            changed = False
            for e in range(len(tail)):
                a = tail[e]
                if cap[e] > 0 and dist[a] + cost[e] < dist[head[e]] - 1e-12:
                    dist[head[e]] = dist[a] + cost[e]
                    pred[head[e]] = e
                    changed = True
            if not changed:
                break
        if not dist[snk] < -1e-12:
            break
        node = snk
        while node != src:
            e = pred[node]
            cap[e] -= 1
            cap[e ^ 1] += 1
            node = tail[e]
    return frozenset((wm.rows[i], wm.cols[j]) for e, (i, j) in mid.items() if cap[e] == 0)


def random_perfect_matching(left: Sequence[int], right: Sequence[int], rng: np.random.Generator) -> Matching:
    """Uniformly random perfect matching between two equal-size node lists."""
    if len(left) != len(right):
        raise ValueError(f"size mismatch: {len(left)} vs {len(right)}")
    perm = rng.permutation(len(right))
    return frozenset((left[i], right[perm[i]]) for i in range(len(left)))


# --- Birkhoff decomposition ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class FractionalMatching:
    """Doubly substochastic matrix ``z`` between ``rows`` and ``cols``."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    z: np.ndarray

    def __post_init__(self):
        z = np.array(self.z, dtype=np.float64).reshape(len(self.rows), len(self.cols))
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        object.__setattr__(self, "z", z)

    def is_substochastic(self, tol: float = 1e-9) -> bool:
        z = self.z
        return bool(
            np.all(z >= -tol)
            and np.all(z.sum(axis=1) <= 1 + tol)
            and np.all(z.sum(axis=0) <= 1 + tol)
        )


@dataclass(frozen=True)
class Decomposition:
    """``z ~= sum(alpha * incidence(matching))`` with ``sum(alpha) <= 1``."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    terms: tuple[tuple[float, Matching], ...]

    @property
    def total(self) -> float:
        return float(sum(a for a, _ in self.terms))

    def reconstruct(self) -> np.ndarray:
        ri = {r: i for i, r in enumerate(self.rows)}
        ci = {c: j for j, c in enumerate(self.cols)}
        out = np.zeros((len(self.rows), len(self.cols)))
        for alpha, m in self.terms:
            for r, c in m:
                out[ri[r], ci[c]] += alpha
        return out


class DecompositionError(ValueError):
    pass


def _perfect_matching(support: np.ndarray) -> list[int] | None:
    """Kuhn's augmenting paths on a square boolean support; row -> col."""
    N = support.shape[0]
    match_col = [-1] * N
    adj = [np.flatnonzero(support[i]).tolist() for i in range(N)]

    def augment(i, seen):
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_col[j] < 0 or augment(match_col[j], seen):
                    match_col[j] = i
                    return True
        return False

    for i in range(N):
        if not augment(i, [False] * N):
            return None
    out = [0] * N
    for j, i in enumerate(match_col):
        out[i] = j
    return out


def _caratheodory(terms: list[tuple[float, tuple]], shape) -> list[tuple[float, tuple]]:
    """Drop terms until the incidence vectors are linearly independent.

    Moving along a null-space direction keeps the reconstruction fixed; the
    sign is chosen so the total weight does not increase.
    """
    while len(terms) > 1:
        V = np.zeros((len(terms), shape[0] * shape[1]))
        for k, (_, edges) in enumerate(terms):
            for i, j in edges:
                V[k, i * shape[1] + j] = 1.0
        if np.linalg.matrix_rank(V) == len(terms):
            break
        lam = np.linalg.svd(V.T)[2][-1]  # V.T @ lam ~= 0
        if lam.sum() < 0 or (abs(lam.sum()) < 1e-12 and lam.max() <= 0):
            lam = -lam
        alphas = np.array([a for a, _ in terms])
        pos = lam > 1e-12
        t = np.min(alphas[pos] / lam[pos])
        alphas = alphas - t * lam
        terms = [(float(a), e) for a, (_, e) in zip(alphas, terms) if a > 1e-14]
    return terms


def birkhoff_decompose(fm: FractionalMatching, eps: float = ZERO_EPS) -> Decomposition:
    """Write a substochastic ``z`` as a sub-convex combination of matchings.

    ``z`` (r x c) is embedded in the doubly stochastic ``(r+c) x (r+c)``
    matrix ``[[z, diag(1 - rowsums)], [diag(1 - colsums), z.T]]``; perfect
    matchings on the positive support are peeled off by their minimum entry
    and restricted back to the real block.  Restrictions that come out
    empty are the "no edge" remainder and are not recorded.
    """
    z = np.where(fm.z > eps, fm.z, 0.0)
    r, c = z.shape
    if r == 0 or c == 0 or not z.any():
        return Decomposition(fm.rows, fm.cols, ())
    if not fm.is_substochastic(1e-7):
        raise DecompositionError("matrix is not doubly substochastic")
    N = r + c
    D = np.zeros((N, N))
    D[:r, :c] = z
    D[:r, c:] = np.diag(np.maximum(1.0 - z.sum(axis=1), 0.0))
    D[r:, :c] = np.diag(np.maximum(1.0 - z.sum(axis=0), 0.0))
    D[r:, c:] = z.T
    D[D <= eps] = 0.0

    merged: dict[tuple, float] = {}
    order: list[tuple] = []
    while D[:r, :c].max() > eps:
        perm = _perfect_matching(D > eps)
        if perm is None:
            raise DecompositionError("no perfect matching on the residual support")
        entries = D[np.arange(N), perm]
        alpha = entries.min()
        D[np.arange(N), perm] -= alpha
        D[D <= eps] = 0.0
        edges = tuple((i, perm[i]) for i in range(r) if perm[i] < c)
        if edges:
            if edges not in merged:
                merged[edges] = 0.0
                order.append(edges)
            merged[edges] += alpha
    terms = [(merged[e], e) for e in order]
    nnz = int(np.count_nonzero(z))
    if len(terms) > nnz:
        terms = _caratheodory(terms, z.shape)
    return Decomposition(
        fm.rows, fm.cols,
        tuple((float(a), frozenset((fm.rows[i], fm.cols[j]) for i, j in e)) for a, e in terms),
    )


def sample_from_decomposition(dec: Decomposition, rng: np.random.Generator) -> Matching:
    """Term ``M`` with probability ``alpha_M``; the empty matching otherwise."""
    if not dec.terms:
        return frozenset()
    u = rng.random()
    acc = 0.0
    for alpha, m in dec.terms:
        acc += alpha
        if u < acc:
            return m
    return frozenset()
