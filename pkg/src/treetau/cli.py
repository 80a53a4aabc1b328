"""``treetau`` command line.

Every JSON report is wrapped in an envelope carrying the schema version, tool
version, a SHA-256 of the canonicalised inputs and the seed (null for
deterministic commands). Wall time is added only with ``--timing`` so that
identical inputs and seed give identical bytes.

Exit codes: 0 success, 1 precondition violation, 2 I/O, parse or usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import secrets
import sys
import time
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from treetau import __version__
from treetau.asymptotics import (
    DEFAULT_BAND_CONSTANT,
    expected_tau_asymptotic,
    expected_tau_for_tree_degrees,
    expected_tau_near_two,
)
from treetau.concentration import PhiSpec, lemma_phi, tree_concentration_experiment
from treetau.degseq import (
    DegreeSequence,
    eta_branches,
    is_graphical,
    is_tree_degree_sequence,
    theorem_condition_holds,
)
from treetau.errors import CapExceeded, ConditionError, DomainError, RetryLimitExceeded
from treetau.experiments import compare, mc_expected_tau, run_oracle_suite
from treetau.formats import format_edge_list, parse_int_list, read_graph
from treetau.graphs import sample_simple_graph, spanning_tree_count, spanning_tree_count_log
from treetau.trees import count_trees_with_degrees, sample_tree

SCHEMA_VERSION = 1
SEED_ENV = "TREETAU_SEED"

EXIT_OK = 0
EXIT_PRECONDITION = 1
EXIT_INPUT = 2


class InputError(Exception):
    pass


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, allow_nan=False)


def _input_hash(inputs: dict) -> str:
    return hashlib.sha256(_dumps(inputs).encode()).hexdigest()


def resolve_seed(cli_seed: int | None) -> int:
    """``--seed`` beats ``TREETAU_SEED``; otherwise a fresh 64-bit seed."""
    if cli_seed is not None:
        return cli_seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return secrets.randbits(64)


def _read_text(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(str(exc)) from exc


def _parse_ints(text: str, what: str) -> list[int]:
    try:
        return parse_int_list(text)
    except ValueError as exc:
        raise InputError(f"cannot parse {what}: {exc}") from exc


def _raw_degrees(args) -> list[int]:
    if getattr(args, "degrees_inline", None) is not None:
        return _parse_ints(args.degrees_inline, "--degrees-inline")
    if getattr(args, "degrees", None) is not None:
        return _parse_ints(_read_text(args.degrees), args.degrees)
    raise InputError("give --degrees FILE or --degrees-inline LIST")


def _degrees(args) -> DegreeSequence:
    raw = _raw_degrees(args)
    try:
        return DegreeSequence(tuple(raw))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _tree_degrees(text: str) -> tuple[int, ...]:
    x = tuple(_parse_ints(text, "--tree-degrees"))
    if not is_tree_degree_sequence(x):
        raise InputError(f"{x} is not a tree degree sequence")
    return x


def _stats_dict(d: DegreeSequence) -> dict:
    return {
        "n": d.n,
        "m": d.m,
        "d_bar": float(d.d_bar),
        "d_bar_exact": d.d_bar,
        "d_hat_log": d.d_hat_log,
        "R": float(d.R),
        "R_exact": d.R,
        "d_max": d.d_max,
    }


def _emit_json(args, command: str, inputs: dict, result: dict, seed: int | None, started: float) -> None:
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": "treetau",
        "version": __version__,
        "command": command,
        "input_hash": _input_hash({"command": command, **inputs}),
        "seed": seed,
        "result": result,
    }
    if getattr(args, "timing", False):
        report["wall_time_s"] = time.perf_counter() - started
    print(_dumps(report))


def _csv_row(values: Sequence) -> str:
    return ",".join("" if v is None else str(_jsonable(v)) for v in values)


# --- subcommands ---


def cmd_validate(args, started):
    raw = _raw_degrees(args)
    positive = all(v > 0 for v in raw)
    even = sum(raw) % 2 == 0
    result = {
        "n": len(raw),
        "positive": positive,
        "even_sum": even,
        "graphical": even and positive and is_graphical(DegreeSequence(tuple(raw))),
        "tree_degree_sequence": is_tree_degree_sequence(raw),
    }
    if positive and even:
        result["theorem_condition"] = theorem_condition_holds(DegreeSequence(tuple(raw)))
    _emit_json(args, "validate", {"degrees": raw}, result, None, started)
    return EXIT_OK


def cmd_stats(args, started):
    d = _degrees(args)
    result = _stats_dict(d)
    result["theorem_condition"] = theorem_condition_holds(d)
    result["graphical"] = is_graphical(d)
    if d.excess > 0:
        branches = eta_branches(d)
        result["eta"] = min(branches)
        result["eta_branches"] = list(branches)
    _emit_json(args, "stats", {"degrees": list(d.degrees)}, result, None, started)
    return EXIT_OK


def cmd_count_trees(args, started):
    x = _tree_degrees(args.tree_degrees)
    count = count_trees_with_degrees(x)
    if args.format == "json":
        _emit_json(args, "count-trees", {"tree_degrees": list(x)}, {"count": str(count)}, None, started)
    else:
        print(count)
    return EXIT_OK


def cmd_sample_tree(args, started):
    x = _tree_degrees(args.tree_degrees)
    seed = resolve_seed(args.seed)
    tree = sample_tree(x, np.random.default_rng(seed))
    sys.stdout.write(f"# seed {seed}\n" + format_edge_list(tree.n, tree.edges))
    return EXIT_OK


def cmd_sample_graph(args, started):
    d = _degrees(args)
    seed = resolve_seed(args.seed)
    g = sample_simple_graph(d, np.random.default_rng(seed), max_tries=args.max_tries)
    sys.stdout.write(f"# seed {seed}\n" + format_edge_list(g.n, g.edges))
    return EXIT_OK


def cmd_tau_exact(args, started):
    text = _read_text(args.graph)
    try:
        g = read_graph(text)
    except ValueError as exc:
        raise InputError(f"cannot parse {args.graph}: {exc}") from exc
    tau = spanning_tree_count(g)
    result = {"n": g.n, "edges": len(g.edges), "tau": str(tau), "log_tau": math.log(tau) if tau else -math.inf}
    if tau:
        result["log_tau_float"] = spanning_tree_count_log(g)
    inputs = {"n": g.n, "edges": [list(e) for e in g.edges]}
    _emit_json(args, "tau-exact", inputs, result, None, started)
    return EXIT_OK


def _emit_estimate(args, command, inputs, d, est, started):
    if args.format == "csv":
        cols = ["log_value", "value", "error_exponent", "condition_ok", "n", "d_bar", "R", "d_max"]
        print(",".join(cols))
        print(_csv_row([est.log_value, est.value, est.error_exponent, est.condition_ok, d.n, float(d.d_bar), float(d.R), d.d_max]))
    else:
        result = est.to_dict()
        result["stats"] = _stats_dict(d)
        _emit_json(args, command, inputs, result, None, started)


def cmd_estimate(args, started):
    d = _degrees(args)
    est = expected_tau_asymptotic(d, strict=args.mode == "strict")
    _emit_estimate(args, "estimate", {"degrees": list(d.degrees), "mode": args.mode}, d, est, started)
    return EXIT_OK


def cmd_estimate_x(args, started):
    d = _degrees(args)
    x = _tree_degrees(args.tree_degrees)
    try:
        est = expected_tau_for_tree_degrees(d, x, strict=args.mode == "strict")
    except DomainError:
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    inputs = {"degrees": list(d.degrees), "tree_degrees": list(x), "mode": args.mode}
    _emit_estimate(args, "estimate-x", inputs, d, est, started)
    return EXIT_OK


def cmd_near_two(args, started):
    d = _degrees(args)
    try:
        est = expected_tau_near_two(d, args.x, strict=args.mode == "strict")
    except (DomainError, ConditionError):
        raise
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    inputs = {"degrees": list(d.degrees), "x": args.x, "mode": args.mode}
    _emit_estimate(args, "near-two", inputs, d, est, started)
    return EXIT_OK


def cmd_mc(args, started):
    d = _degrees(args)
    seed = resolve_seed(args.seed)
    est = mc_expected_tau(d, args.samples, seed, args.workers)
    result = est.to_dict()
    result["stats"] = _stats_dict(d)
    inputs = {"degrees": list(d.degrees), "samples": args.samples, "workers": args.workers}
    _emit_json(args, "mc", inputs, result, seed, started)
    return EXIT_OK


def cmd_compare(args, started):
    d = _degrees(args)
    seed = resolve_seed(args.seed) if args.mode == "mc" else None
    rep = compare(d, args.mode, args.samples, seed or 0, args.workers, args.constant)
    inputs = {"degrees": list(d.degrees), "mode": args.mode, "constant": args.constant}
    if args.mode == "mc":
        inputs.update(samples=args.samples, workers=args.workers)
    _emit_json(args, "compare", inputs, rep.to_dict(), seed, started)
    return EXIT_OK


def cmd_verify(args, started):
    checks = run_oracle_suite(args.max_n)
    passed = all(c["passed"] for c in checks)
    _emit_json(args, "verify", {"max_n": args.max_n}, {"passed": passed, "checks": checks}, None, started)
    return EXIT_OK if passed else EXIT_PRECONDITION


def cmd_concentration(args, started):
    x = _tree_degrees(args.tree_degrees)
    if args.phi is not None:
        vals = [float(v) for v in args.phi.replace(",", " ").split()]
        if len(vals) != len(x):
            raise InputError("--phi needs one value per vertex")
        phi = PhiSpec.from_values(vals, args.a, args.b)
    elif args.degrees is not None or args.degrees_inline is not None:
        d = _degrees(args)
        if d.n != len(x):
            raise InputError("degree sequence and tree degrees disagree on n")
        phi = lemma_phi(d, x)
    else:
        raise InputError("give --phi or a degree sequence")
    seed = resolve_seed(args.seed)
    exhaustive = {"auto": None, "yes": True, "no": False}[args.exhaustive]
    rep = tree_concentration_experiment(
        x, phi, xi=args.xi, samples=args.samples, rng=np.random.default_rng(seed), exhaustive=exhaustive
    )
    if args.format == "csv":
        sys.stdout.write(rep.tail_csv())
    else:
        inputs = {"tree_degrees": list(x), "phi": list(phi.values), "a": phi.a, "b": phi.b, "xi": args.xi}
        if not rep.exhaustive:
            inputs["samples"] = args.samples
        _emit_json(args, "concentration", inputs, rep.to_dict(), None if rep.exhaustive else seed, started)
    return EXIT_OK


# --- parser ---


def _add_degrees(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--degrees", metavar="FILE", help="degree-sequence file ('-' for stdin)")
    g.add_argument("--degrees-inline", metavar="LIST", help='comma-separated degrees, e.g. "3,3,3,3"')


def _add_mode(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--mode", choices=("strict", "permissive"), default=default)


def _add_seed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help=f"64-bit seed (default: ${SEED_ENV} or random)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treetau", description="Expected spanning-tree counts of random graphs.")
    parser.add_argument("--version", action="version", version=f"treetau {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--timing", action="store_true", help="include wall time in JSON reports")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", parents=[common], help="check a degree sequence")
    _add_degrees(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", parents=[common], help="summary statistics of a degree sequence")
    _add_degrees(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("count-trees", parents=[common], help="number of labelled trees with given degrees")
    p.add_argument("--tree-degrees", required=True, metavar="LIST")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_count_trees)

    p = sub.add_parser("sample-tree", parents=[common], help="uniform tree with given degrees (edge list)")
    p.add_argument("--tree-degrees", required=True, metavar="LIST")
    _add_seed(p)
    p.set_defaults(func=cmd_sample_tree)

    p = sub.add_parser("sample-graph", parents=[common], help="uniform simple graph with given degrees (edge list)")
    _add_degrees(p)
    _add_seed(p)
    p.add_argument("--max-tries", type=int, default=10**6)
    p.set_defaults(func=cmd_sample_graph)

    p = sub.add_parser("tau-exact", parents=[common], help="exact spanning-tree count of a graph")
    p.add_argument("--graph", required=True, metavar="FILE")
    p.set_defaults(func=cmd_tau_exact)

    p = sub.add_parser("estimate", parents=[common], help="asymptotic ln E tau")
    _add_degrees(p)
    _add_mode(p, "strict")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("estimate-x", parents=[common], help="asymptotic ln E tau restricted to tree degrees x")
    _add_degrees(p)
    p.add_argument("--tree-degrees", required=True, metavar="LIST")
    _add_mode(p, "permissive")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_estimate_x)

    p = sub.add_parser("near-two", parents=[common], help="estimate for mean degree just above 2")
    _add_degrees(p)
    p.add_argument("--x", type=float, help="excess parameter; defaults to the value implied by the degrees")
    _add_mode(p, "permissive")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_near_two)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo ln E tau")
    _add_degrees(p)
    p.add_argument("--samples", type=int, default=1000)
    _add_seed(p)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("compare", parents=[common], help="estimate against brute force or Monte Carlo")
    _add_degrees(p)
    p.add_argument("--mode", choices=("brute", "mc"), default="brute")
    p.add_argument("--samples", type=int, default=1000)
    _add_seed(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--constant", type=float, default=DEFAULT_BAND_CONSTANT)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", parents=[common], help="run the exact oracle suite")
    p.add_argument("--max-n", type=int, default=7)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("concentration", parents=[common], help="tail table of an edge functional over random trees")
    p.add_argument("--tree-degrees", required=True, metavar="LIST")
    p.add_argument("--phi", metavar="LIST", help="vertex weights; default derives them from the degree sequence")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    _add_degrees(p, required=False)
    p.add_argument("--xi", type=int, choices=(-1, 1), default=1)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--exhaustive", choices=("auto", "yes", "no"), default="auto")
    _add_seed(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_concentration)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.perf_counter()
    try:
        return args.func(args, started)
    except (ConditionError, DomainError) as exc:
        print(f"treetau: precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (InputError, CapExceeded, RetryLimitExceeded) as exc:
        print(f"treetau: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"treetau: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
