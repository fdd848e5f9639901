"""Command-line entry point: ``maxqap <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .harness import (
    LIST_MODELS,
    ExperimentConfig,
    reports_to_json,
    rows_to_csv,
    run_ratio_experiment,
    summarize,
    verify_lemma_b1,
    verify_lemma_c3,
)
from .instances import BInstance, InstanceError, ListInstance, dump_instance, load_instance, obj_pairs
from .lp import build_lp, dump_lp, solve
from .oracle import OracleLimitError, exact_dup_maxqbap, exact_list_maxqap
from .rounding import algorithm1, algorithm2, compute_l, partition, star_sets


def _n_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="maxqap", description="LP rounding for list-restricted MaxQAP and MaxQbAP.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def gen_flags(p, n_required=False):
        p.add_argument("--n", type=_n_list, required=n_required, help="node count (comma list for ratio)")
        p.add_argument("--variant", choices=("list", "bmatch"), default="list")
        p.add_argument("--k", type=int, default=0, help="list deficiency (list variant)")
        p.add_argument("--b", type=int, default=1, help="degree bound (bmatch variant)")
        p.add_argument("--lists", choices=LIST_MODELS, default=None,
                       help="list model; defaults to full when k=0, random-drop otherwise")
        p.add_argument("--weights", default="uint:9", help="uint:W or real")
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen", help="write a random instance as JSON")
    gen_flags(p, n_required=True)
    p.add_argument("--out")

    for name, text in (("solve-lp", "solve the LP relaxation"), ("round", "run the rounding algorithm"),
                       ("exact", "exhaustive optimum (small n)")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--instance", required=True, help="instance JSON file")
        p.add_argument("--out")
        if name == "solve-lp":
            p.add_argument("--dump-lp", action="store_true", help="write the model as text instead of solving")
        if name == "round":
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--trials", type=int, default=1, help="runs with seeds seed, seed+1, ...")

    p = sub.add_parser("ratio", help="ratio experiment, results as CSV")
    gen_flags(p)
    p.add_argument("--config", help="JSON experiment config; flags are ignored when given")
    p.add_argument("--trials", type=int, default=10, help="algorithm seeds per instance")
    p.add_argument("--timing", action="store_true", help="fill the ms column (output no longer reproducible)")
    p.add_argument("--out")

    p = sub.add_parser("verify-lemmas", help="Monte Carlo check of the rounding probability bounds")
    p.add_argument("--instance", required=True)
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    return ap


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read(path: str):
    return load_instance(Path(path).read_bytes())


def _edges(m) -> list:
    return [list(e) for e in sorted(m)]


def _cmd_gen(args) -> int:
    from .harness import gen_instance

    lists = args.lists or ("full" if args.k == 0 else "random-drop")
    inst = gen_instance(args.n[0], args.variant, k=args.k, b=args.b, lists=lists,
                        weights=args.weights, seed=args.seed)
    _emit(dump_instance(inst) + "\n", args.out)
    return 0


def _cmd_solve(args) -> int:
    model = build_lp(_read(args.instance))
    if args.dump_lp:
        _emit(dump_lp(model), args.out)
        return 0
    sol = solve(model)
    _emit(json.dumps({"objective": sol.objective_value, "x": sol.x.tolist(),
                      "y": [[*k, v] for k, v in sorted(sol.y.items())]}) + "\n", args.out)
    return 0


def _cmd_round(args) -> int:
    inst = _read(args.instance)
    sol = solve(build_lp(inst))
    run = algorithm2 if isinstance(inst, BInstance) else algorithm1
    results = []
    for s in range(args.seed, args.seed + args.trials):
        m = run(inst, np.random.default_rng(s), sol)
        results.append({"seed": s, "value": obj_pairs(inst.g, inst.h, m), "edges": _edges(m)})
    _emit(json.dumps({"lp": sol.objective_value, "runs": results}) + "\n", args.out)
    return 0


def _cmd_exact(args) -> int:
    inst = _read(args.instance)
    res = exact_dup_maxqbap(inst) if isinstance(inst, BInstance) else exact_list_maxqap(inst)
    _emit(json.dumps({"value": res.value, "witness": _edges(res.witness)}) + "\n", args.out)
    return 0


def _cmd_ratio(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
    else:
        if not args.n:
            raise SystemExit("ratio: give --config or --n")
        cfg = ExperimentConfig(
            variant=args.variant, n=args.n, k=args.k, b=args.b,
            lists=args.lists or ("full" if args.k == 0 else "random-drop"),
            weights=args.weights, seed=args.seed, seeds=args.trials, timing=args.timing,
        )
    if args.timing:
        cfg.timing = True
    rows = run_ratio_experiment(cfg)
    _emit(rows_to_csv(rows), args.out)
    summary = summarize(rows)
    for n, stats in summary.items():
        parts = [f"{key} mean {s['mean']:.4g} min {s['min']:.4g} max {s['max']:.4g}" for key, s in stats.items()]
        print(f"n={n}: " + "; ".join(parts), file=sys.stderr)
    return 0


def _cmd_verify(args) -> int:
    inst = _read(args.instance)
    sol = solve(build_lp(inst))
    x, Y = sol.x, sol.Y
    if isinstance(inst, BInstance) and inst.b > 1:
        # scaled copies satisfy the unit-capacity inequalities
        x, Y = x / inst.b, Y / inst.b**2
    part = partition(inst.n, np.random.default_rng(args.seed))
    star = star_sets(compute_l(Y, inst.g, inst.h), part)
    reports = [
        verify_lemma_b1(x, part, args.trials, args.seed + 1),
        verify_lemma_c3(x, Y, part, star, args.trials, args.seed + 1),
    ]
    _emit(reports_to_json(reports) + "\n", args.out)
    for r in reports:
        gated = sum(e.gated for e in r.events)
        print(f"{r.name}: {'pass' if r.passed else 'FAIL'} ({gated} gated events, "
              f"{len(r.failures)} failures)", file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 1


COMMANDS = {
    "gen": _cmd_gen, "solve-lp": _cmd_solve, "round": _cmd_round, "exact": _cmd_exact,
    "ratio": _cmd_ratio, "verify-lemmas": _cmd_verify,
}


def cli(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (InstanceError, OracleLimitError, ValueError, OSError) as exc:
        print(f"maxqap {args.command}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
