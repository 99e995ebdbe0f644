"""Command-line entry point.

Subcommands: validate, min-lambda, max-loss, select, gen, sweep. Exit codes:
0 success, 1 validation or domain error (single `ERROR <code>: <message>`
line on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import bench, lossmax, minthroughput, nodeselect
from .model import (
    AttackProblem,
    load_problem,
    problem_to_json,
    validate,
)


def _err(code: str, message: str) -> None:
    print(f"ERROR {code}: {message}", file=sys.stderr)


def _jsonable(x):
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        seq = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_jsonable(v) for v in seq]
    return x


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _load_any(path: str):
    """Problem JSON or single-hop instance JSON, told apart by their keys."""
    with open(path) as fh:
        doc = json.load(fh)
    if "ingress" in doc:
        return lossmax.singlehop_from_json(doc)
    from .model import problem_from_json

    return problem_from_json(doc)


def _rows_doc(rows) -> dict:
    return {str(i): {str(j): x for j, x in sorted(row.items())} for i, row in sorted(rows.items())}


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args) -> int:
    problem = load_problem(args.input)
    issues = validate(problem)
    if issues:
        _err("invalid-problem", issues[0])
        return 1
    _emit({"ok": True}, args.out)
    return 0


def _load_bounds(path: str) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    doc = doc.get("bounds", doc)
    out = {}
    for key, (lo, hi) in doc.items():
        i, j = (int(t) for t in key.split(","))
        out[(i, j)] = (float(lo), float(hi))
    return out


def _cmd_min_lambda(args) -> int:
    problem = load_problem(args.input)
    if args.bounds:
        from dataclasses import replace

        problem = replace(problem, dispatch_bounds=_load_bounds(args.bounds))
    issues = validate(problem)
    if issues:
        _err("invalid-problem", issues[0])
        return 1
    if args.algo == "exact":
        res = minthroughput.exact_min_lambda(problem)
    elif args.algo == "brute":
        res = minthroughput.brute_force_min_lambda(problem)
    elif args.algo == "approx2":
        view = minthroughput.measure_downstream(problem)
        res = minthroughput.approx2_min_lambda(view, problem.adversaries, problem)
    elif args.algo == "distributed":
        res = minthroughput.distributed_heuristic(problem)
    else:
        res = minthroughput.local_min_capacity_attack(problem)
    _emit(
        {
            "algo": res.algo,
            "lambda_star": res.lambda_star,
            "saturated_link": list(res.saturated_link) if res.saturated_link else None,
            "rows": _rows_doc(res.rows),
        },
        args.out,
    )
    return 0


def _cmd_max_loss(args) -> int:
    obj = _load_any(args.input)
    multihop = isinstance(obj, AttackProblem)
    if multihop and args.algo not in ("brute", "add"):
        _err("usage", f"algorithm {args.algo!r} needs a single-hop instance")
        return 1
    if args.algo == "brute":
        res = lossmax.brute_force_max_loss(obj, args.arrival)
    elif args.algo == "mul":
        res = lossmax.maxloss_multiplicative(obj)
    elif args.algo == "add":
        res = lossmax.maxloss_additive(obj, args.arrival)
    elif args.algo == "minmu":
        res = lossmax.minmu_baseline(obj)
    else:
        res = lossmax.rand_baseline(obj, args.seed)
    doc = {
        "algo": res.algo,
        "loss": res.loss,
        "overloads": list(res.overloads),
        "rows": _rows_doc(res.rows),
    }
    if args.algo == "rand":
        doc["seed"] = args.seed
    _emit(doc, args.out)
    return 0


def _cmd_select(args) -> int:
    base = _load_any(args.input)
    candidates = frozenset(int(v) for v in args.candidates.split(","))
    problem = nodeselect.SelectionProblem(
        base=base,
        candidates=candidates,
        budget=args.k,
        objective=args.objective,
        arrival=args.arrival,
    )
    if args.algo == "brute":
        res = nodeselect.brute_force_select(problem)
    elif args.algo == "parallel":
        res = nodeselect.select_parallel_min_lambda(problem)
    else:
        res = nodeselect.select_singlehop_maxloss(problem)
    _emit(
        {
            "algo": res.algo,
            "chosen": sorted(res.chosen),
            "value": res.value,
            "rows": _rows_doc(res.rows),
        },
        args.out,
    )
    return 0


def _cmd_gen(args) -> int:
    if args.mode == "setcover":
        instance, _ = bench.gen_setcover(args.m, args.n_sets, seed=args.seed)
        doc = lossmax.singlehop_to_json(instance)
    else:
        config = bench.GenConfig(
            mode=args.mode,
            n=args.n,
            n_ingress=args.n_ingress,
            n_egress=args.n_egress,
            density=args.density,
            ratio=args.ratio,
            uniformity=args.uniformity,
            policy=args.policy,
            adv_count=args.adv_count,
            seed=args.seed,
        )
        if args.mode == "multihop":
            doc = problem_to_json(bench.gen_multihop(config))
        else:
            doc = lossmax.singlehop_to_json(bench.gen_singlehop(config))
    doc["seed"] = args.seed
    _emit(doc, args.out)
    return 0


def _load_config(path: str) -> bench.GenConfig:
    if path.endswith(".toml"):
        import tomllib

        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    else:
        with open(path) as fh:
            doc = json.load(fh)
    return bench.config_from_dict(doc)


def _cmd_sweep(args) -> int:
    config = _load_config(args.config)
    algorithms = (
        args.algos.split(",")
        if args.algos
        else list(
            bench.MULTIHOP_ALGOS if config.mode == "multihop" else bench.SINGLEHOP_ALGOS
        )
    )
    stats = bench.run_sweep(config, algorithms, out_prefix=args.out)
    meta = {
        "seed": config.seed,
        "mode": config.mode,
        "algorithms": algorithms,
        "outputs": [args.out + ext for ext in (".csv", ".summary.json", ".cdf.csv")],
        "summary": {
            algo: {metric: st.summary() for metric, st in metrics.items()}
            for algo, metrics in stats.items()
        },
    }
    sys.stdout.write(json.dumps(_jsonable(meta), indent=2, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netoverload",
        description="Worst-case network overload under routing attacks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a problem file's invariants")
    p.add_argument("--input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("min-lambda", help="attack minimizing the no-loss throughput")
    p.add_argument("--input", required=True)
    p.add_argument(
        "--algo",
        choices=["exact", "brute", "approx2", "distributed", "local"],
        default="exact",
    )
    p.add_argument("--bounds", help="JSON with per-link dispatch ratio limits")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_min_lambda)

    p = sub.add_parser("max-loss", help="attack maximizing loss at a given arrival")
    p.add_argument("--input", required=True)
    p.add_argument("--lambda", dest="arrival", type=float)
    p.add_argument(
        "--algo", choices=["brute", "mul", "add", "minmu", "rand"], default="brute"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_max_loss)

    p = sub.add_parser("select", help="choose nodes to hijack under a budget")
    p.add_argument("--input", required=True)
    p.add_argument("--candidates", required=True, help="comma-separated node ids")
    p.add_argument("--k", type=int, required=True)
    p.add_argument(
        "--objective", choices=["min-lambda", "max-loss"], default="min-lambda"
    )
    p.add_argument("--lambda", dest="arrival", type=float)
    p.add_argument(
        "--algo", choices=["brute", "parallel", "heuristic"], default="brute"
    )
    p.add_argument("--out")
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--mode", choices=["multihop", "singlehop", "setcover"], required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--n-ingress", type=int, default=8)
    p.add_argument("--n-egress", type=int, default=8)
    p.add_argument("--density", type=float, default=0.4)
    p.add_argument("--ratio", type=float, default=2.0)
    p.add_argument("--uniformity", choices=["hetero", "homo"], default="hetero")
    p.add_argument("--policy", choices=list(bench.POLICIES), default="uniform")
    p.add_argument("--adv-count", type=int, default=4)
    p.add_argument("--m", type=int, default=4, help="elements (setcover mode)")
    p.add_argument("--n-sets", type=int, default=3, help="sets (setcover mode)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("sweep", help="run a Monte-Carlo sweep from a config file")
    p.add_argument("--config", required=True, help="JSON or TOML GenConfig")
    p.add_argument("--algos", help="comma-separated algorithm names")
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument("--jobs", type=int, default=1, help="parallelism hint")
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        _err("io", str(exc))
        return 1
    except json.JSONDecodeError as exc:
        _err("parse", str(exc))
        return 1
    except (ValueError, RuntimeError, KeyError, TypeError) as exc:
        _err("domain", str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
