"""Randomized rounding of LP optima into matchings and b-matchings.

Both algorithms split the node sets into a left and a right block, round
the LP's ``x`` values on the left blocks, and then answer with a best
response on the right blocks.  The analysis-side constructions (random and
star-set right matchings) live here too so their probability bounds can
be tested directly.

Unmatched targets are represented by ``None`` in assignment maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bipartite import (
    Decomposition,
    FractionalMatching,
    WeightMatrix,
    birkhoff_decompose,
    max_weight_bmatching,
    max_weight_matching,
    random_perfect_matching,
    sample_from_decomposition,
)
from .instances import BInstance, ListInstance, Matching, WeightedGraph, is_matching
from .lp import FractionalSolution, build_lp1, build_lp2, solve

MASS_TOL = 1e-9
INPUT_TOL = 1e-7

AssignmentMap = dict  # p -> u or None


@dataclass(frozen=True)
class Partition:
    """Left/right blocks of both node sets; left blocks get the extra node."""

    g_left: tuple[int, ...]
    g_right: tuple[int, ...]
    h_left: tuple[int, ...]
    h_right: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.g_left) + len(self.g_right)


def partition(n: int, rng: np.random.Generator) -> Partition:
    """Uniform split with ``ceil(n/2)`` nodes on the left, drawn for G then H."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    half = (n + 1) // 2
    g = rng.permutation(n)
    h = rng.permutation(n)
    return Partition(
        tuple(sorted(int(i) for i in g[:half])), tuple(sorted(int(i) for i in g[half:])),
        tuple(sorted(int(i) for i in h[:half])), tuple(sorted(int(i) for i in h[half:])),
    )


def sample_assignment(x: np.ndarray, part: Partition, scale: float,
                      rng: np.random.Generator) -> AssignmentMap:
    """Each left H node independently picks a left G node ``u`` w.p. ``scale * x[u, p]``.

    The leftover mass ``1 - sum(scale * x[g_left, p])`` maps to ``None``.
    Zero-mass targets are never drawn.
    """
    gl = np.asarray(part.g_left, dtype=int)
    out: AssignmentMap = {}
    for p in part.h_left:
        probs = np.maximum(scale * np.asarray(x)[gl, p], 0.0)
        cum = np.cumsum(probs)
        if cum.size and cum[-1] > 1.0 + MASS_TOL:
            raise ValueError(f"assignment mass {cum[-1]:.12g} for node {p} exceeds 1")
        i = int(np.searchsorted(cum, rng.random(), side="right"))
        out[p] = int(gl[i]) if i < gl.size else None
    return out


def resolve_to_matching(pi: AssignmentMap, rng: np.random.Generator) -> Matching:
    """Keep one uniformly chosen preimage for every node that was picked."""
    chosen: dict[int, list[int]] = {}
    for p in sorted(pi):
        if pi[p] is not None:
            chosen.setdefault(pi[p], []).append(p)
    return frozenset((u, ps[int(rng.integers(len(ps)))]) for u, ps in sorted(chosen.items()))


def heavy_set(h: WeightedGraph, p: int, size: int) -> frozenset[int]:
    """The ``size`` nodes with the largest ``w_H(p, .)``, lowest index first on ties."""
    n = h.n
    if not 1 <= size <= n:
        raise ValueError(f"size must be in [1, {n}], got {size}")
    order = sorted(range(n), key=lambda q: (-h.w[p, q], q))
    return frozenset(order[:size])


def heavy_size_list(n: int, k: int) -> int:
    """``ceil(sqrt(n) + k)`` capped at ``n``."""
    return min(n, math.ceil(math.sqrt(n) + k))


def heavy_size_b(n: int, b: int) -> int:
    """``ceil(sqrt(n / b))`` capped at ``n``."""
    return min(n, math.ceil(math.sqrt(n / b)))


def _cross_weights(g: WeightedGraph, h: WeightedGraph, left: Matching, part: Partition) -> np.ndarray:
    """``w(v, q) = sum over (u, p) in left of w_G(u, v) w_H(p, q)`` on the right blocks."""
    gr, hr = list(part.g_right), list(part.h_right)
    if not left:
        return np.zeros((len(gr), len(hr)))
    us = [u for u, _ in sorted(left)]
    ps = [p for _, p in sorted(left)]
    return g.w[np.ix_(us, gr)].T @ h.w[np.ix_(ps, hr)]


def algorithm1(inst: ListInstance, rng: np.random.Generator,
               sol: Optional[FractionalSolution] = None) -> Matching:
    """Round an LP1 optimum into a compatible matching.

    ``sol`` may carry a precomputed optimum so repeated runs skip the solve.
    """
    if sol is None:
        sol = solve(build_lp1(inst))
    part = partition(inst.n, rng)
    left = resolve_to_matching(sample_assignment(sol.x, part, 1.0, rng), rng)
    w = _cross_weights(inst.g, inst.h, left, part)
    w *= inst.allowed()[np.ix_(part.g_right, part.h_right)]
    right = max_weight_matching(WeightMatrix(part.g_right, part.h_right, w))
    return left | right


def complete_to_perfect(m: Matching, part: Partition, rng: np.random.Generator) -> Matching:
    """Extend a left-block matching by a uniformly random matching of the leftovers."""
    if len(part.g_left) != len(part.h_left):
        raise ValueError("left blocks differ in size")
    gl, hl = set(part.g_left), set(part.h_left)
    if not is_matching(m) or any(u not in gl or p not in hl for u, p in m):
        raise ValueError("not a matching inside the left blocks")
    used_u = {u for u, _ in m}
    used_p = {p for _, p in m}
    free_u = [u for u in part.g_left if u not in used_u]
    free_p = [p for p in part.h_left if p not in used_p]
    return m | random_perfect_matching(free_u, free_p, rng)


def algorithm2(inst: BInstance, rng: np.random.Generator,
               sol: Optional[FractionalSolution] = None) -> Matching:
    """Round an LP2 optimum into a b-matching.

    ``b`` rounds each produce a perfect matching of the left blocks; their
    union is answered by a maximum-weight b-matching on the right blocks.
    """
    if sol is None:
        sol = solve(build_lp2(inst))
    b = inst.b
    part = partition(inst.n, rng)
    left: set = set()
    for _ in range(b):
        pi = sample_assignment(sol.x, part, 1.0 / b, rng)
        left |= complete_to_perfect(resolve_to_matching(pi, rng), part, rng)
    left = frozenset(left)
    w = _cross_weights(inst.g, inst.h, left, part)
    right = max_weight_bmatching(WeightMatrix(part.g_right, part.h_right, w), b)
    return left | right


# --- star sets and star rounding --------------------------------------------


def compute_l(Y: np.ndarray, g: WeightedGraph, h: WeightedGraph) -> tuple[int, ...]:
    """For each ``q``, the ``p`` maximizing ``sum_{u,v} w_G(u,v) w_H(p,q) Y[u,p,v,q]``.

    Ties go to the lowest ``p``.
    """
    scores = h.w * np.einsum("uv,upvq->pq", g.w, Y)
    return tuple(int(i) for i in np.argmax(scores, axis=0))


@dataclass(frozen=True)
class StarStructure:
    """The map ``l`` and, per left H node ``p``, its star set ``l^-1(p)`` within ``h_right``."""

    l: tuple[int, ...]
    sets: dict

    def owner(self, q: int) -> Optional[int]:
        for p, s in self.sets.items():
            if q in s:
                return p
        return None


def star_sets(l, part: Partition) -> StarStructure:
    return StarStructure(
        tuple(l),
        {p: tuple(q for q in part.h_right if l[q] == p) for p in part.h_left},
    )


def z_matrix(pi: AssignmentMap, p: int, x: np.ndarray, Y: np.ndarray,
             star: StarStructure, part: Partition) -> FractionalMatching:
    """``z[v, q] = Y[pi(p), p, v, q] / x[pi(p), p]`` over ``g_right`` x star set of ``p``."""
    cols = star.sets.get(p, ())
    rows = part.g_right
    u = pi.get(p)
    if u is None or not cols:
        return FractionalMatching(rows, cols, np.zeros((len(rows), len(cols))))
    if not x[u, p] > 0:
        raise ValueError(f"x[{u}, {p}] = {x[u, p]} but {p} was assigned to {u}")
    z = Y[u, p][np.ix_(list(rows), list(cols))] / x[u, p]
    return FractionalMatching(rows, cols, z)


def algorithm_b(part: Partition, x: np.ndarray, rng: np.random.Generator) -> tuple[Matching, Matching]:
    """Left matching from the rounded ``x`` plus an independent uniform right matching."""
    left = resolve_to_matching(sample_assignment(x, part, 1.0, rng), rng)
    return left, random_perfect_matching(part.g_right, part.h_right, rng)


def check_star_inputs(part: Partition, x: np.ndarray, Y: np.ndarray, tol: float = INPUT_TOL) -> None:
    """Raise ``ValueError`` unless ``x, Y`` satisfy the star-rounding input inequalities."""
    gl, hl, gr, hr = (list(s) for s in (part.g_left, part.h_left, part.g_right, part.h_right))
    x = np.asarray(x)
    for rows, cols, name in ((gl, hl, "left"), (gr, hr, "right")):
        block = x[np.ix_(rows, cols)]
        if block.size and (block.sum(axis=0).max() > 1 + tol or block.sum(axis=1).max() > 1 + tol):
            raise ValueError(f"x is not substochastic on the {name} blocks")
    yb = Y[np.ix_(gl, hl, gr, hr)]  # [u, p, v, q]
    if yb.size == 0:
        return
    x_left = x[np.ix_(gl, hl)][:, :, None]
    x_right = x[np.ix_(gr, hr)][None, :, :]
    checks = (
        (yb.sum(axis=0), x_right, "sum over u"),  # [p, v, q]
        (yb.sum(axis=1), x_right, "sum over p"),  # [u, v, q]
        (yb.sum(axis=2), x_left, "sum over v"),  # [u, p, q]
        (yb.sum(axis=3), x_left, "sum over q"),  # [u, p, v]
    )
    for total, bound, name in checks:
        excess = total - bound
        if excess.max() > tol:
            raise ValueError(f"y violates the {name} inequality by {excess.max():.3g}")


def algorithm_c(part: Partition, star: StarStructure, x: np.ndarray, Y: np.ndarray,
                rng: np.random.Generator, cache: Optional[dict] = None,
                check_inputs: bool = True) -> tuple[Matching, Matching]:
    """Left matching from the rounded ``x`` plus the star-set right matching.

    Each left H node ``p`` assigned to ``u`` samples a matching between
    ``g_right`` and its star set from the decomposition of ``Y[u, p] / x[u, p]``;
    the sampled edges are glued together and every right G node keeps one
    uniformly chosen partner.  ``cache`` (a dict) memoizes decompositions
    across calls with the same ``x, Y`` and blocks.
    """
    if check_inputs:
        check_star_inputs(part, x, Y)
    pi = sample_assignment(x, part, 1.0, rng)
    left = resolve_to_matching(pi, rng)
    tau: dict[int, int] = {}
    for p in part.h_left:
        u = pi[p]
        if u is None or not star.sets.get(p):
            continue
        key = (u, p)
        dec: Optional[Decomposition] = None if cache is None else cache.get(key)
        if dec is None:
            dec = birkhoff_decompose(z_matrix(pi, p, x, Y, star, part))
            if cache is not None:
                cache[key] = dec
        for v, q in sample_from_decomposition(dec, rng):
            tau[q] = v
    pre: dict[int, list[int]] = {}
    for q in sorted(tau):
        pre.setdefault(tau[q], []).append(q)
    star_match = frozenset((v, qs[int(rng.integers(len(qs)))]) for v, qs in sorted(pre.items()))
    return left, star_match
