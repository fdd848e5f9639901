"""Exhaustive solvers for small instances and the pairs/indicator relation.

Weights are nonnegative, so adding an edge never lowers either objective and
only maximal feasible edge sets need to be scored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .instances import BInstance, ListInstance, Matching, WeightedGraph, obj_indicator, obj_pairs

MAX_LIST_N = 7
MAX_B_N = 4
MAX_B = 2


class OracleLimitError(ValueError):
    """Instance exceeds the size guard of an exhaustive solver."""


@dataclass(frozen=True)
class ExactResult:
    value: float
    witness: Matching


def exact_list_maxqap(inst: ListInstance) -> ExactResult:
    """Best compatible matching under ``obj_pairs``, by depth-first enumeration."""
    n = inst.n
    if n > MAX_LIST_N:
        raise OracleLimitError(f"n={n} exceeds the exhaustive limit {MAX_LIST_N}")
    wg, wh = inst.g.w, inst.h.w
    lists = [sorted(lst) for lst in inst.lists]
    used = [False] * n
    chosen: list[tuple[int, int]] = []
    best = [-1.0, frozenset()]

    def maximal() -> bool:
        matched = {u for u, _ in chosen}
        return all(u in matched or all(used[p] for p in lists[u]) for u in range(n))

    def dfs(u: int, value: float) -> None:
        if u == n:
            if value > best[0] and maximal():
                best[0] = value
                best[1] = frozenset(chosen)
            return
        for p in lists[u]:
            if not used[p]:
                gain = 2.0 * sum(wg[u, v] * wh[p, q] for v, q in chosen)
                used[p] = True
                chosen.append((u, p))
                dfs(u + 1, value + gain)
                chosen.pop()
                used[p] = False
        dfs(u + 1, value)

    dfs(0, 0.0)
    witness = best[1]
    return ExactResult(obj_pairs(inst.g, inst.h, witness), witness)


def _best_bmatching(inst: BInstance, objective) -> ExactResult:
    n, b = inst.n, inst.b
    if n > MAX_B_N or b > MAX_B:
        raise OracleLimitError(f"(n={n}, b={b}) exceeds the exhaustive limit (n<={MAX_B_N}, b<={MAX_B})")
    edges = [(u, p) for u in range(n) for p in range(n)]
    deg_u = [0] * n
    deg_p = [0] * n
    chosen: list[tuple[int, int]] = []
    best = [-1.0, frozenset()]

    def dfs(i: int) -> None:
        if i == len(edges):
            # maximal: every excluded edge is blocked by a saturated endpoint
            if all(deg_u[u] >= b or deg_p[p] >= b for u, p in edges if (u, p) not in chosen_set):
                value = objective(inst.g, inst.h, chosen)
                if value > best[0]:
                    best[0] = value
                    best[1] = frozenset(chosen)
            return
        u, p = edges[i]
        if deg_u[u] < b and deg_p[p] < b:
            deg_u[u] += 1
            deg_p[p] += 1
            chosen.append((u, p))
            chosen_set.add((u, p))
            dfs(i + 1)
            chosen_set.discard((u, p))
            chosen.pop()
            deg_u[u] -= 1
            deg_p[p] -= 1
        dfs(i + 1)

    chosen_set: set = set()
    dfs(0)
    witness = best[1]
    return ExactResult(objective(inst.g, inst.h, witness), witness)


def exact_dup_maxqbap(inst: BInstance) -> ExactResult:
    """Best b-matching under ``obj_pairs`` (each edge pair counted per ordering)."""
    return _best_bmatching(inst, obj_pairs)


def exact_maxqbap(inst: BInstance) -> ExactResult:
    """Best b-matching under ``obj_indicator``."""
    return _best_bmatching(inst, obj_indicator)


class HalvingCheck(NamedTuple):
    ok: bool
    pairs: float
    indicator: float


def verify_halving(g: WeightedGraph, h: WeightedGraph, bm) -> HalvingCheck:
    """Check ``obj_pairs >= obj_indicator >= obj_pairs / 2`` on a b-matching."""
    pairs = obj_pairs(g, h, bm)
    ind = obj_indicator(g, h, bm)
    integral = np.all(g.w == np.round(g.w)) and np.all(h.w == np.round(h.w))
    tol = 0.0 if integral else 1e-12 * max(1.0, pairs)
    return HalvingCheck(pairs + tol >= ind and ind + tol >= pairs / 2, pairs, ind)
