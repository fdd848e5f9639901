"""Instance generation, ratio experiments and Monte Carlo checks of the rounding bounds."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .instances import BInstance, ListInstance, WeightedGraph, obj_pairs
from .lp import FractionalSolution, build_lp, solve
from .oracle import MAX_B, MAX_B_N, MAX_LIST_N, exact_dup_maxqbap, exact_list_maxqap
from .rounding import (
    Partition,
    StarStructure,
    algorithm1,
    algorithm2,
    algorithm_b,
    algorithm_c,
    check_star_inputs,
    heavy_set,
    heavy_size_b,
    heavy_size_list,
)

LIST_MODELS = ("full", "random-drop", "diagonal-band")
CSV_COLUMNS = ("variant", "n", "k", "b", "seed", "lp", "lp1", "lp2", "alg", "opt", "ratio_lp", "ratio_opt", "ms")
GATE_MASS = 0.05


# --- instance generation ------------------------------------------------------


def parse_weights(spec: str) -> tuple[str, int]:
    """``"uint:W"`` (integers in ``[0, W]``) or ``"real"`` (uniform in ``[0, 1)``)."""
    if spec == "real":
        return "real", 0
    kind, _, hi = spec.partition(":")
    if kind == "uint" and hi.isdigit():
        return "uint", int(hi)
    raise ValueError(f"weight spec must be 'uint:W' or 'real', got {spec!r}")


def _random_graph(n: int, weights: str, rng: np.random.Generator) -> WeightedGraph:
    kind, hi = parse_weights(weights)
    if kind == "uint":
        w = rng.integers(0, hi + 1, size=(n, n)).astype(np.float64)
    else:
        w = rng.random((n, n))
    w = np.triu(w, 1)
    return WeightedGraph(w + w.T)


def band_lists(n: int, k: int) -> tuple[frozenset[int], ...]:
    """Cyclic band of ``n - k`` consecutive images around each node."""
    width = n - k
    lo = (width - 1) // 2
    return tuple(frozenset((u + j) % n for j in range(-lo, width - lo)) for u in range(n))


def gen_instance(n: int, variant: str = "list", *, k: int = 0, b: int = 1, lists: str = "full",
                 weights: str = "uint:9", seed: int = 0):
    """Seeded random instance; ``lists`` picks the list model for the list variant."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    parse_weights(weights)
    rng = np.random.default_rng(seed)
    g = _random_graph(n, weights, rng)
    h = _random_graph(n, weights, rng)
    if variant == "bmatch":
        return BInstance(g, h, b)
    if variant != "list":
        raise ValueError(f"variant must be 'list' or 'bmatch', got {variant!r}")
    if lists not in LIST_MODELS:
        raise ValueError(f"list model must be one of {LIST_MODELS}, got {lists!r}")
    if lists == "full":
        if k:
            raise ValueError("the full list model has k = 0")
        return ListInstance.full(g, h)
    if not 0 <= k < n:
        raise ValueError(f"k must be in [0, {n - 1}], got {k}")
    if lists == "diagonal-band":
        return ListInstance(g, h, band_lists(n, k))
    drops = [set(rng.choice(n, size=k, replace=False).tolist()) for _ in range(n)]
    return ListInstance(g, h, tuple(frozenset(range(n)) - d for d in drops))


# --- LP split and ratio experiments ---------------------------------------------


def heavy_light_split(inst, sol: FractionalSolution) -> tuple[float, float]:
    """LP value restricted to ``q`` in the heavy set of ``p``, and the remainder."""
    n = inst.n
    contrib = inst.h.w * np.einsum("uv,upvq->pq", inst.g.w, sol.Y)
    size = heavy_size_b(n, inst.b) if isinstance(inst, BInstance) else heavy_size_list(n, inst.k)
    mask = np.zeros((n, n), dtype=bool)
    for p in range(n):
        mask[p, sorted(heavy_set(inst.h, p, size))] = True
    heavy = float(contrib[mask].sum())
    return heavy, float(contrib[~mask].sum())


@dataclass
class ExperimentConfig:
    variant: str = "list"
    n: Sequence[int] = (4,)
    k: int = 0
    lists: str = "full"
    b: int = 1
    weights: str = "uint:9"
    instances: int = 1
    instance_seed: int = 0
    seeds: int = 10
    seed: int = 0
    exact: bool = True
    timing: bool = False

    def __post_init__(self):
        if isinstance(self.n, int):
            self.n = (self.n,)
        self.n = tuple(int(v) for v in self.n)
        if self.instances < 1 or self.seeds < 1:
            raise ValueError("instance and seed counts must be at least 1")
        if self.variant not in ("list", "bmatch"):
            raise ValueError(f"variant must be 'list' or 'bmatch', got {self.variant!r}")
        parse_weights(self.weights)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)


def _exact_value(inst) -> Optional[float]:
    if isinstance(inst, BInstance):
        if inst.n <= MAX_B_N and inst.b <= MAX_B:
            return exact_dup_maxqbap(inst).value
        return None
    if inst.n <= MAX_LIST_N:
        return exact_list_maxqap(inst).value
    return None


def _ratio(num: float, den: float) -> float:
    if den > 0:
        return num / den
    return 1.0 if num <= 0 else math.inf


def run_ratio_experiment(cfg: ExperimentConfig) -> list[dict]:
    """One row per (instance, seed) with LP, split, algorithm and exact values."""
    rows = []
    for n in cfg.n:
        for i in range(cfg.instances):
            iseed = cfg.instance_seed + 1000 * n + i
            inst = gen_instance(n, cfg.variant, k=cfg.k, b=cfg.b, lists=cfg.lists,
                                weights=cfg.weights, seed=iseed)
            sol = solve(build_lp(inst))
            lp1, lp2 = heavy_light_split(inst, sol)
            opt = _exact_value(inst) if cfg.exact else None
            run = algorithm2 if cfg.variant == "bmatch" else algorithm1
            for s in range(cfg.seeds):
                seed = cfg.seed + s
                t0 = time.perf_counter()
                m = run(inst, np.random.default_rng(seed), sol)
                ms = (time.perf_counter() - t0) * 1e3
                alg = obj_pairs(inst.g, inst.h, m)
                rows.append({
                    "variant": cfg.variant, "n": n,
                    "k": inst.k if isinstance(inst, ListInstance) else 0,
                    "b": inst.b if isinstance(inst, BInstance) else 1,
                    "seed": seed, "lp": sol.objective_value, "lp1": lp1, "lp2": lp2,
                    "alg": alg, "opt": opt,
                    "ratio_lp": _ratio(sol.objective_value, alg),
                    "ratio_opt": None if opt is None else _ratio(opt, alg),
                    "ms": ms if cfg.timing else None,
                })
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(round(v, 9)) if math.isfinite(v) else str(v)
    return str(v)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def summarize(rows: list[dict]) -> dict:
    """Mean/min/max of ``alg``, ``ratio_lp`` and ``ratio_opt`` per ``n``."""
    out = {}
    for n in sorted({r["n"] for r in rows}):
        sel = [r for r in rows if r["n"] == n]
        stats = {}
        for key in ("alg", "ratio_lp", "ratio_opt"):
            vals = np.array([r[key] for r in sel if r[key] is not None], dtype=float)
            if vals.size:
                stats[key] = {"mean": float(vals.mean()), "min": float(vals.min()), "max": float(vals.max())}
        out[n] = stats
    return out


# --- block membership ---------------------------------------------------------


def split_probability(n: int) -> Fraction:
    """``(floor(n/2) ceil(n/2) / n^2)^2``, the chance that independently uniform
    nodes ``u, p`` land in the left blocks and ``v, q`` in the right blocks."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    return Fraction((n // 2) * ((n + 1) // 2), n * n) ** 2


def fixed_split_probability(n: int) -> Fraction:
    """Same event for fixed distinct ``u != v`` and ``p != q``."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    return Fraction((n // 2) * ((n + 1) // 2), n * (n - 1)) ** 2


def block_membership_frequency(n: int, trials: int, seed: int,
                               nodes: Optional[tuple[int, int, int, int]] = None) -> float:
    """Monte Carlo frequency of ``u, p`` left and ``v, q`` right over random partitions.

    With ``nodes=None`` the four nodes are drawn uniformly and independently
    per trial; otherwise the fixed ``(u, v, p, q)`` is tracked.
    """
    rng = np.random.default_rng(seed)
    half = (n + 1) // 2
    # rank of each node in a uniform permutation; rank < half means left block
    g_rank = rng.random((trials, n)).argsort(axis=1).argsort(axis=1)
    h_rank = rng.random((trials, n)).argsort(axis=1).argsort(axis=1)
    if nodes is None:
        u, v, p, q = (rng.integers(n, size=trials) for _ in range(4))
    else:
        u, v, p, q = (np.full(trials, i) for i in nodes)
    t = np.arange(trials)
    hit = (g_rank[t, u] < half) & (g_rank[t, v] >= half) & (h_rank[t, p] < half) & (h_rank[t, q] >= half)
    return float(hit.mean())


# --- lemma reports ------------------------------------------------------------


@dataclass
class LemmaEvent:
    label: str
    bound: float
    frequency: float
    stderr: float
    gated: bool

    @property
    def passed(self) -> bool:
        return self.frequency >= self.bound - 3.0 * self.stderr


@dataclass
class LemmaReport:
    name: str
    trials: int
    events: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.events if e.gated)

    @property
    def failures(self) -> list:
        return [e for e in self.events if e.gated and not e.passed]

    def add(self, label: str, bound: float, count: int, gated: bool) -> None:
        f = count / self.trials
        self.events.append(LemmaEvent(label, float(bound), f, math.sqrt(f * (1 - f) / self.trials), gated))

    def to_dict(self) -> dict:
        return {
            "name": self.name, "trials": self.trials, "passed": self.passed,
            "gated": sum(e.gated for e in self.events),
            "events": [dict(asdict(e), passed=e.passed) for e in self.events],
        }


def _indicator(n: int, edges) -> np.ndarray:
    a = np.zeros((n, n))
    for u, p in edges:
        a[u, p] = 1.0
    return a


def verify_lemma_b1(x: np.ndarray, part: Partition, trials: int, seed: int,
                    gate: float = GATE_MASS) -> LemmaReport:
    """Frequencies of ``(u,p)`` in the left matching (bound ``x/2``) and of it
    jointly with ``(v,q)`` in the random right matching (bound ``x/(2|G_R|)``).

    Trial ``t`` uses seed ``seed + t``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    n = part.n
    x = np.asarray(x)
    gl, hl, gr, hr = part.g_left, part.h_left, part.g_right, part.h_right
    left_count = np.zeros((n, n))
    joint = np.zeros((n, n, n, n))
    for t in range(trials):
        ml, mr = algorithm_b(part, x, np.random.default_rng(seed + t))
        a, r = _indicator(n, ml), _indicator(n, mr)
        left_count += a
        joint += np.multiply.outer(a, r)
    report = LemmaReport("left-rounding", trials)
    size_r = max(len(gr), 1)
    for u in gl:
        for p in hl:
            if x[u, p] <= 0:
                continue
            gated = bool(x[u, p] >= gate)
            report.add(f"({u},{p}) in left", x[u, p] / 2, int(left_count[u, p]), gated)
            for v in gr:
                for q in hr:
                    report.add(f"({u},{p}) in left and ({v},{q}) in random", x[u, p] / (2 * size_r),
                               int(joint[u, p, v, q]), gated)
    return report


def verify_lemma_c3(x: np.ndarray, Y: np.ndarray, part: Partition, star: StarStructure,
                    trials: int, seed: int, gate: float = GATE_MASS) -> LemmaReport:
    """Joint frequency of ``(u,p)`` left and ``(v,q)`` in the star matching
    against ``Y[u,p,v,q]/4`` for every ``q`` in the star set of ``p``."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    check_star_inputs(part, x, Y)
    tracked = [
        (u, p, v, q)
        for p in part.h_left for q in star.sets.get(p, ())
        for u in part.g_left for v in part.g_right
        if Y[u, p, v, q] > 0
    ]
    counts = np.zeros(len(tracked), dtype=int)
    cache: dict = {}
    for t in range(trials):
        ml, ms = algorithm_c(part, star, x, Y, np.random.default_rng(seed + t), cache, check_inputs=False)
        if not ml or not ms:
            continue
        for i, (u, p, v, q) in enumerate(tracked):
            if (u, p) in ml and (v, q) in ms:
                counts[i] += 1
    report = LemmaReport("star-rounding", trials)
    for (u, p, v, q), c in zip(tracked, counts):
        y = Y[u, p, v, q]
        report.add(f"({u},{p}) in left and ({v},{q}) in star", y / 4, int(c), bool(y >= gate))
    return report


def reports_to_json(reports: Sequence[LemmaReport]) -> str:
    return json.dumps({"passed": all(r.passed for r in reports),
                       "reports": [r.to_dict() for r in reports]}, indent=2)
