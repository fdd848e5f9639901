"""Instance types, objective functions and the JSON instance format.

Objectives follow the ordered-pair convention: a pair of distinct edges
``(u, p), (v, q)`` contributes ``w_G(u, v) * w_H(p, q)`` once for each
ordering, so symmetric contributions are counted twice.  This is the same
convention as the LP objective, which keeps LP values and objective values
directly comparable.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

Edge = tuple[int, int]
Matching = frozenset[Edge]


class InstanceError(ValueError):
    """Raised for malformed instance data; the message starts with the field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Complete graph on ``n`` nodes with a symmetric nonnegative weight matrix."""

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=np.float64)
        _validate_weights(w, "w")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def __eq__(self, other):
        return isinstance(other, WeightedGraph) and np.array_equal(self.w, other.w)

    def __hash__(self):
        return hash(self.w.tobytes())


def _validate_weights(w: np.ndarray, path: str) -> None:
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
        raise InstanceError(path, f"expected a nonempty square matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        i, j = np.argwhere(~np.isfinite(w))[0]
        raise InstanceError(f"{path}[{i}][{j}]", "non-finite weight")
    if np.any(w < 0):
        i, j = np.argwhere(w < 0)[0]
        raise InstanceError(f"{path}[{i}][{j}]", "negative weight")
    if np.any(np.diag(w) != 0):
        i = int(np.flatnonzero(np.diag(w))[0])
        raise InstanceError(f"{path}[{i}][{i}]", "diagonal weight must be 0")
    if not np.array_equal(w, w.T):
        i, j = np.argwhere(w != w.T)[0]
        raise InstanceError(f"{path}[{i}][{j}]", "asymmetric weight matrix")


@dataclass(frozen=True)
class ListInstance:
    """List-restricted MaxQAP: node ``u`` of G may only be matched into ``lists[u]``."""

    g: WeightedGraph
    h: WeightedGraph
    lists: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.g.n != self.h.n:
            raise InstanceError("wH", f"size {self.h.n} differs from wG size {self.g.n}")
        lists = tuple(frozenset(int(p) for p in lst) for lst in self.lists)
        if len(lists) != self.n:
            raise InstanceError("lists", f"expected {self.n} lists, got {len(lists)}")
        for u, lst in enumerate(lists):
            if not lst:
                raise InstanceError(f"lists[{u}]", "empty list")
            bad = [p for p in lst if not 0 <= p < self.n]
            if bad:
                raise InstanceError(f"lists[{u}]", f"node {bad[0]} out of range")
        object.__setattr__(self, "lists", lists)

    @property
    def n(self) -> int:
        return self.g.n

    @property
    def k(self) -> int:
        return max(self.n - len(lst) for lst in self.lists)

    def allowed(self) -> np.ndarray:
        """Boolean n x n mask of the admissible edges E_GH."""
        mask = np.zeros((self.n, self.n), dtype=bool)
        for u, lst in enumerate(self.lists):
            mask[u, sorted(lst)] = True
        return mask

    @classmethod
    def full(cls, g: WeightedGraph, h: WeightedGraph) -> "ListInstance":
        return cls(g, h, tuple(frozenset(range(g.n)) for _ in range(g.n)))


@dataclass(frozen=True)
class BInstance:
    """MaxQbAP instance: every node may be matched at most ``b`` times."""

    g: WeightedGraph
    h: WeightedGraph
    b: int

    def __post_init__(self):
        if self.g.n != self.h.n:
            raise InstanceError("wH", f"size {self.h.n} differs from wG size {self.g.n}")
        if isinstance(self.b, bool) or int(self.b) != self.b or not 1 <= self.b <= self.n:
            raise InstanceError("b", f"b must be an integer in [1, {self.n}], got {self.b!r}")
        object.__setattr__(self, "b", int(self.b))

    @property
    def n(self) -> int:
        return self.g.n


Instance = Union[ListInstance, BInstance]


# --- edge-set validation ------------------------------------------------------


def degrees(edges: Iterable[Edge]) -> tuple[Counter, Counter]:
    left, right = Counter(), Counter()
    for u, p in edges:
        left[u] += 1
        right[p] += 1
    return left, right


def is_bmatching(edges: Iterable[Edge], b: int) -> bool:
    edges = list(edges)
    if len(set(edges)) != len(edges):
        return False
    left, right = degrees(edges)
    return all(d <= b for d in left.values()) and all(d <= b for d in right.values())


def is_matching(edges: Iterable[Edge]) -> bool:
    return is_bmatching(edges, 1)


def is_compatible(edges: Iterable[Edge], inst: ListInstance) -> bool:
    """True iff ``edges`` is a matching that only uses admissible edges."""
    edges = list(edges)
    return is_matching(edges) and all(p in inst.lists[u] for u, p in edges)


def _edge_arrays(edges: Iterable[Edge], n: int) -> tuple[np.ndarray, np.ndarray]:
    pairs = sorted(set(edges))
    if not pairs:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    arr = np.asarray(pairs, dtype=int)
    if arr.min() < 0 or arr.max() >= n:
        raise IndexError(f"edge index out of range for n={n}: {pairs}")
    return arr[:, 0], arr[:, 1]


# --- objectives -------------------------------------------------------------


def obj_pairs(g: WeightedGraph, h: WeightedGraph, edges: Iterable[Edge]) -> float:
    """Sum of ``w_G(u,v) w_H(p,q)`` over ordered pairs of distinct edges.

    This is ``Obj`` for matchings and ``Obj_dup`` for b-matchings.  The
    self-pair terms are zero because both diagonals are zero.
    """
    us, ps = _edge_arrays(edges, g.n)
    if us.size < 2:
        return 0.0
    return float(np.sum(g.w[np.ix_(us, us)] * h.w[np.ix_(ps, ps)]))


def obj_indicator(g: WeightedGraph, h: WeightedGraph, edges: Iterable[Edge]) -> float:
    """MaxQbAP objective: each node pair mapped onto an edge pair counts once.

    Returned as twice the sum over unordered ``{u, v}`` and ``{p, q}`` so it is
    on the same scale as :func:`obj_pairs`.
    """
    n = g.n
    us, ps = _edge_arrays(edges, n)
    if us.size < 2:
        return 0.0
    a = np.zeros((n, n))
    a[us, ps] = 1.0
    # hit[u, p, v, q] = 1 if (u,p),(v,q) in M, or (u,q),(v,p) in M
    t = np.einsum("up,vq->upvq", a, a)
    hit = np.maximum(t, t.transpose(0, 3, 2, 1))
    # Each unordered {u,v},{p,q} appears four times in the ordered sum.
    total = np.einsum("uv,pq,upvq->", g.w, h.w, hit)
    return float(total) / 2.0


def obj_cross(g: WeightedGraph, h: WeightedGraph, left: Iterable[Edge], right: Iterable[Edge]) -> float:
    """``Obj'``: sum over ``(u,p)`` in ``left`` and ``(v,q)`` in ``right``."""
    lu, lp = _edge_arrays(left, g.n)
    ru, rp = _edge_arrays(right, g.n)
    if lu.size == 0 or ru.size == 0:
        return 0.0
    return float(np.sum(g.w[np.ix_(lu, ru)] * h.w[np.ix_(lp, rp)]))


# --- JSON I/O ---------------------------------------------------------------


def _matrix(data, path: str, n: int) -> np.ndarray:
    if not isinstance(data, list) or len(data) != n:
        raise InstanceError(path, f"expected a list of {n} rows")
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != n:
            raise InstanceError(f"{path}[{i}]", f"expected {n} numbers")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InstanceError(f"{path}[{i}][{j}]", f"not a number: {v!r}")
    w = np.array(data, dtype=np.float64)
    _validate_weights(w, path)
    return w


def parse_instance(obj: dict) -> Instance:
    if not isinstance(obj, dict):
        raise InstanceError("$", "expected a JSON object")
    n = obj.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InstanceError("n", f"expected a positive integer, got {n!r}")
    for key in ("wG", "wH"):
        if key not in obj:
            raise InstanceError(key, "missing")
    g = WeightedGraph(_matrix(obj["wG"], "wG", n))
    h = WeightedGraph(_matrix(obj["wH"], "wH", n))
    if "lists" in obj and "b" in obj:
        raise InstanceError("$", "'lists' and 'b' are mutually exclusive")
    if "b" in obj:
        b = obj["b"]
        if isinstance(b, bool) or not isinstance(b, int):
            raise InstanceError("b", f"expected an integer, got {b!r}")
        return BInstance(g, h, b)
    if "lists" not in obj:
        return ListInstance.full(g, h)
    lists = obj["lists"]
    if not isinstance(lists, list):
        raise InstanceError("lists", "expected a list of lists")
    for u, lst in enumerate(lists):
        if not isinstance(lst, list):
            raise InstanceError(f"lists[{u}]", "expected a list of node indices")
        for i, p in enumerate(lst):
            if isinstance(p, bool) or not isinstance(p, int):
                raise InstanceError(f"lists[{u}][{i}]", f"not a node index: {p!r}")
    return ListInstance(g, h, tuple(frozenset(lst) for lst in lists))


def load_instance(data: Union[bytes, str]) -> Instance:
    """Parse and validate a serialized instance."""
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InstanceError("$", f"parse error: {exc}") from exc
    return parse_instance(obj)


def _plain(w: np.ndarray) -> list:
    # integers round-trip as JSON ints
    if np.all(w == np.round(w)):
        return [[int(v) for v in row] for row in w]
    return w.tolist()


def instance_to_dict(inst: Instance) -> dict:
    out = {"n": inst.n, "wG": _plain(inst.g.w), "wH": _plain(inst.h.w)}
    if isinstance(inst, BInstance):
        out["b"] = inst.b
    else:
        out["lists"] = [sorted(lst) for lst in inst.lists]
    return out


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst))
