"""Command-line entry point: ``fairscope <subcommand> FILE [options]``.

Exit codes: 0 success, 1 error, 2 infeasible (cannot be fair, or no beta
meets a cap), 64 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .audit import (
    beta_sensitivity,
    bound_under_error_cap,
    bound_under_unfairness_cap,
    fair_error_lower_bound,
    pareto_curve,
    solve_discrepancy,
)
from .core import condition_onesided
from .csvio import emit_pareto, parse_confusions_csv, parse_inputs_csv, write_atomic
from .errors import FairscopeError, InfeasibleCap
from .unfairness import unfairness_multiclass_bounds

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64

SCHEMA_VERSION = 1

MODES = {
    "validate": "Validate",
    "fair-error-lb": "FairErrorLB",
    "unfairness": "UnfairnessKnown",
    "mindisc": "Mindisc",
    "pareto": "Pareto",
    "beta-sweep": "BetaSweep",
    "cap-bound": "CapBound",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class AuditReport:
    mode: str
    inputs_digest: str
    parameters: dict
    results: dict
    status: str = "ok"
    tool_version: str = __version__
    schema_version: int = SCHEMA_VERSION

    def to_json(self, indent: int | None = 2) -> str:
        body = {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "mode": self.mode,
            "status": self.status,
            "inputs_digest": self.inputs_digest,
            "parameters": self.parameters,
            "results": self.results,
        }
        return json.dumps(body, indent=indent, allow_nan=False) + "\n"


def _digest(path: str) -> str:
    try:
        return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as e:
        raise FairscopeError(f"cannot read {path}: {e.strerror}") from None


def _matrix(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def _solution_dict(s) -> dict:
    return {
        "beta": s.beta,
        "value": s.value,
        "lower": s.lower,
        "exact": s.exact,
        "unfairness_part": s.unfairness_part,
        "error_part": s.error_part,
        "baseline": _matrix(s.baseline),
        "witness": _matrix(s.witness.matrices),
        "group_ids": [str(g) for g in s.witness.inputs().group_ids],
    }


def _probability(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def _positive(kind):
    def parse(text: str):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {text!r}") from None
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {v}")
        return v

    return parse


def _nonnegative(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized baseline orderings")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print the JSON report to stdout even when --out is given")
    no_out = _Parser(add_help=False, parents=[common])
    no_out.add_argument("--out", default=argparse.SUPPRESS, help="write the JSON report to this file")

    p = _Parser(prog="fairscope", description="Fairness and error bounds from aggregate statistics.")
    p.add_argument("--version", action="version", version=f"fairscope {__version__}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true", default=False)
    p.add_argument("--out", default=None, help="write the JSON report to this file")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[no_out], help="check an inputs or confusions CSV")
    s.add_argument("file")

    s = sub.add_parser("fair-error-lb", parents=[no_out], help="minimum error of a perfectly fair classifier")
    s.add_argument("file")
    s.add_argument("--margin", type=_nonnegative, default=0.0)

    s = sub.add_parser("unfairness", parents=[no_out], help="unfairness of known confusion matrices")
    s.add_argument("file")
    s.add_argument("--orderings", type=_positive(int), default=10)
    s.add_argument("--max-iter", type=_positive(int), default=100)
    s.add_argument("--eps-stop", type=_positive(float), default=1e-7)

    s = sub.add_parser("mindisc", parents=[no_out], help="minimum discrepancy at one beta")
    s.add_argument("file")
    s.add_argument("--beta", type=_probability, required=True)
    s.add_argument("--tol", type=_positive(float), default=1e-6)

    s = sub.add_parser("pareto", parents=[common], help="lower-bound Pareto curve; --out names the CSV")
    s.add_argument("file")
    s.add_argument("--points", type=_positive(int), default=10)
    s.add_argument("--refine", type=_nonnegative_int, default=10)
    s.add_argument("--out", dest="csv_out", default=None, help="write the curve CSV to this file")
    s.add_argument("--tol", type=_positive(float), default=1e-6)

    s = sub.add_parser("beta-sweep", parents=[no_out], help="solution plateaus over a beta grid")
    s.add_argument("file")
    s.add_argument("--tol", type=_positive(float), default=1e-6)
    s.add_argument("--step", type=_positive(float), default=0.01)

    s = sub.add_parser("cap-bound", parents=[no_out], help="bound one quantity given a cap on the other")
    s.add_argument("file")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--error-cap", type=_probability)
    g.add_argument("--unfairness-cap", type=_probability)
    s.add_argument("--tol", type=_positive(float), default=1e-6)
    return p


def _nonnegative_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {v}")
    return v


def _looks_like_confusions(path: str) -> bool:
    try:
        with open(path, encoding="utf-8-sig") as f:
            head = f.readline()
    except OSError:
        return False
    return "true_label" in head.split(",")


def _run_command(args) -> tuple[dict, dict, str]:
    """Returns (parameters, results, status)."""
    cmd = args.command
    if cmd == "validate":
        if _looks_like_confusions(args.file):
            cs = parse_confusions_csv(args.file)
            return {"kind": "confusions"}, {"valid": True, "k": cs.k, "n_groups": cs.n_groups}, "ok"
        inputs = parse_inputs_csv(args.file)
        res = {"valid": True, "k": inputs.k, "n_groups": inputs.n_groups}
        if inputs.k == 2:
            cond = condition_onesided(inputs)
            res["onesided"] = cond.kind.value
            res["onesided_equality"] = cond.equality
        return {"kind": "inputs"}, res, "ok"
    if cmd == "unfairness":
        cs = parse_confusions_csv(args.file)
        r = unfairness_multiclass_bounds(cs, n_orderings=args.orderings, max_iter=args.max_iter,
                                         eps_stop=args.eps_stop, seed=args.seed)
        params = {"orderings": args.orderings, "max_iter": args.max_iter, "eps_stop": args.eps_stop, "seed": args.seed}
        return params, {
            "lower": r.lower,
            "upper": r.upper,
            "exact": r.exact,
            "baseline": _matrix(r.baseline_witness.entries),
            "per_label": [list(x) for x in r.per_label],
            "per_group_eta": _matrix(r.per_group_eta),
            "group_ids": [str(g) for g in cs.inputs().group_ids],
        }, "ok"

    inputs = parse_inputs_csv(args.file)
    if cmd == "fair-error-lb":
        r = fair_error_lower_bound(inputs, args.margin)
        res = {"feasible": r.feasible, "min_error": r.min_error,
               "witness": _matrix(r.witness.entries) if r.witness is not None else None}
        return {"margin": args.margin}, res, "ok" if r.feasible else "infeasible"
    if cmd == "mindisc":
        s = solve_discrepancy(inputs, args.beta, args.tol, args.seed)
        return {"beta": args.beta, "tol": args.tol, "seed": args.seed}, _solution_dict(s), "ok"
    if cmd == "pareto":
        curve = pareto_curve(inputs, n_init=max(args.points, 2), gamma=args.tol, refine_budget=args.refine, seed=args.seed)
        if args.csv_out:
            write_atomic(args.csv_out, emit_pareto(curve))
        params = {"points": args.points, "refine": args.refine, "tol": args.tol, "seed": args.seed, "csv": args.csv_out}
        pts = [{"beta": q.beta, "unfairness_lb": q.unfairness_lb, "error_lb": q.error_lb,
                "mindisc": q.mindisc, "mindisc_lower": q.mindisc_lower} for q in curve.points]
        return params, {"exact": inputs.k == 2, "points": pts}, "ok"
    if cmd == "beta-sweep":
        iv = beta_sensitivity(inputs, gamma=args.tol, step=args.step, seed=args.seed)
        res = {"intervals": [{"beta_lo": i.beta_lo, "beta_hi": i.beta_hi, "unfairness": i.unfairness,
                              "error": i.error} for i in iv], "beta_affects_solution": len(iv) > 1}
        return {"tol": args.tol, "step": args.step, "seed": args.seed}, res, "ok"
    if cmd == "cap-bound":
        params = {"error_cap": args.error_cap, "unfairness_cap": args.unfairness_cap, "tol": args.tol, "seed": args.seed}
        try:
            if args.error_cap is not None:
                r = bound_under_error_cap(inputs, args.error_cap, args.tol, args.seed)
                res = {"bounded": "unfairness", "unfairness_lb": r.bound}
            else:
                r = bound_under_unfairness_cap(inputs, args.unfairness_cap, args.tol, args.seed)
                res = {"bounded": "error", "error_lb": r.bound}
        except InfeasibleCap as e:
            return params, {"feasible": False, "message": str(e)}, "infeasible"
        res.update({"feasible": True, "beta": r.beta, "certified": r.certified, "solution": _solution_dict(r.solution)})
        return params, res, "ok"
    raise UsageError(f"unknown command {cmd!r}")


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(str(e), file=stderr)
        print(parser.format_usage().rstrip(), file=stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help and --version
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        digest = _digest(args.file)
        params, results, status = _run_command(args)
    except UsageError as e:
        print(str(e), file=stderr)
        return EXIT_USAGE
    except (FairscopeError, ValueError) as e:
        print(f"error: {e}", file=stderr)
        return EXIT_ERROR
    params = {"command": args.command, "file": args.file, **params}
    report = AuditReport(MODES[args.command], digest, params, results, status)
    text = report.to_json()
    try:
        if args.out:
            write_atomic(args.out, text)
        if args.json or not args.out:
            stdout.write(text)
        else:
            stdout.write(f"{report.mode}: {status}; report written to {args.out}\n")
    except OSError as e:
        print(f"error: cannot write output: {e}", file=stderr)
        return EXIT_ERROR
    return EXIT_INFEASIBLE if status == "infeasible" else EXIT_OK


def main() -> None:
    sys.exit(run())
