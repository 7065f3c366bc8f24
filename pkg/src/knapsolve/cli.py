"""Command-line front end: solve and verify exponent equations.

    knapsolve solve  --group g.json --expr "(a b)^x c"
    knapsolve verify --group g.json --expr "(a b)^x c" --result out.json --box 10

Group files hold a constructor-tagged description tree (see
groups.build_backend); expressions use the textual syntax of
expr.parse_expr.  solve prints {"vars", "components", "diagnostics"}
and exits 0, or 2 when a search budget was exhausted, or 1 on bad
input.  verify compares a saved result against brute force on a box.
"""

import argparse
import json
import sys

from .errors import BudgetExceededError, InputError
from .expr import parse_expr
from .finite_ext import FiniteExtBackend, solve_exponent_finite_ext
from .gp_solver import GraphProductBackend, solve_exponent_graph_product
from .groups import build_backend, solve_exponent
from .hnn import (
    AmalgamBackend,
    HnnBackend,
    solve_exponent_amalgam,
    solve_exponent_hnn,
)
from .oracle import compare
from .semilinear import SemilinearSet

#: --fast trades completeness for speed by shrinking the refinement budget
FAST_PIECES_BUDGET = 6


def _load_group(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            desc = json.load(handle)
    except OSError as exc:
        raise InputError(f"cannot read group file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"group file is not valid JSON: {exc}") from exc
    return build_backend(desc)


def _dispatch_solve(backend, e, pieces_budget, states_budget, diagnostics):
    if isinstance(backend, GraphProductBackend):
        kwargs = {"pieces_budget": pieces_budget, "diagnostics": diagnostics}
        if states_budget is not None:
            kwargs["states_budget"] = states_budget
        return solve_exponent_graph_product(backend, e, **kwargs)
    if isinstance(backend, HnnBackend):
        kwargs = {"pieces_budget": pieces_budget, "diagnostics": diagnostics}
        if states_budget is not None:
            kwargs["states_budget"] = states_budget
        return solve_exponent_hnn(backend, e, **kwargs)
    if isinstance(backend, AmalgamBackend):
        kwargs = {"pieces_budget": pieces_budget, "diagnostics": diagnostics}
        if states_budget is not None:
            kwargs["states_budget"] = states_budget
        return solve_exponent_amalgam(backend, e, **kwargs)
    if isinstance(backend, FiniteExtBackend):
        return solve_exponent_finite_ext(backend, e, diagnostics=diagnostics)
    return solve_exponent(backend, e)


def _sorted_result(sols, diagnostics):
    data = sols.to_json_dict()
    data["components"].sort(key=lambda c: (c["base"], c["periods"]))
    data["diagnostics"] = diagnostics
    return data


def cmd_solve(args):
    backend = _load_group(args.group)
    e = parse_expr(args.expr)
    pieces_budget = args.budget_refinement
    if args.fast:
        print(
            "warning: --fast lowers search budgets; the result may miss "
            "solutions",
            file=sys.stderr,
        )
        if pieces_budget is None or pieces_budget > FAST_PIECES_BUDGET:
            pieces_budget = FAST_PIECES_BUDGET
    diagnostics = {}
    sols = _dispatch_solve(
        backend, e, pieces_budget, args.budget_automata, diagnostics
    )
    data = _sorted_result(sols, diagnostics)
    print(json.dumps(data, indent=args.json_indent))
    return 0


def cmd_verify(args):
    backend = _load_group(args.group)
    e = parse_expr(args.expr)
    try:
        with open(args.result, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read result file: {exc}") from exc
    sols = SemilinearSet.from_json_dict(data)
    if set(sols.vars) != set(e.variables):
        raise InputError(
            f"result variables {list(sols.vars)} do not match "
            f"expression variables {list(e.variables)}"
        )
    report = compare(backend, e, sols, args.box)
    print(json.dumps(report, indent=args.json_indent))
    return 0 if report["ok"] else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="knapsolve",
        description="solve exponent equations over compositionally "
        "described groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve e = 1 and print the set")
    solve.add_argument("--group", required=True, help="group description JSON")
    solve.add_argument("--expr", required=True, help="exponent expression")
    solve.add_argument(
        "--budget-refinement", type=int, default=None,
        help="cap on refinement pieces in the reduction search",
    )
    solve.add_argument(
        "--budget-automata", type=int, default=None,
        help="cap on search states and automata trajectories",
    )
    solve.add_argument(
        "--fast", action="store_true",
        help="lower budgets for speed; may miss solutions",
    )
    solve.add_argument("--json-indent", type=int, default=None)
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser(
        "verify", help="check a saved result against brute force"
    )
    verify.add_argument("--group", required=True)
    verify.add_argument("--expr", required=True)
    verify.add_argument("--result", required=True, help="solve output JSON")
    verify.add_argument("--box", type=int, default=10)
    verify.add_argument("--json-indent", type=int, default=None)
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
