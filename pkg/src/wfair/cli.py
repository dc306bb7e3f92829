"""Batch command-line front door over a JSON instance format.

Subcommands::

    allocate --alg {envy-cycle|icyc|approx-wefx|chore-rr} --in FILE [--out FILE]
    verify   --criterion {wef|wef1|1wef|wefx|xwef} --in FILE --alloc FILE
    search   {exists|best-factor} [--criterion C] --in FILE [--budget N] [--jobs N]
    repro    --case {wefx-n2|wefx-n3|xwef-n2|xwef-n3} [--alpha RAT] [--jobs N]
    sweep    --case ID --grid "a,b,c" [--jobs N]

Results go to stdout as JSON (byte-stable for identical inputs);
diagnostics go to stderr.  Exit codes: 0 success/satisfied/exists,
1 usage error, 2 input or validation error, 3 criterion violated or
nonexistence confirmed, 4 enumeration budget exceeded, 5 a procedure's
guarantee failed at runtime (a reportable counterexample).

Instance file schema (exact value grammar from the arithmetic layer)::

    {
      "kind": "goods" | "chores",
      "agents": [{"id": "1", "weight": "11/25"}, ...],
      "items": ["a1", ...],
      "values": [["0", "1", "1/2+1/2*sqrt5", ...], ...]   # one row per agent
    }

Allocation files are ``{"owner": {"item-id": "agent-id", ...}}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import algorithms, corpus, fairness, model, oracle
from .algorithms import GuaranteeViolation
from .exact import POS_INF, Value, parse_ratio_or_decimal, parse_value
from .fairness import Criterion
from .model import Allocation, InputError, Instance
from .oracle import BudgetExceededError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NEGATIVE = 3
EXIT_BUDGET = 4
EXIT_GUARANTEE = 5


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# -- JSON instance schema ----------------------------------------------------


def _require_keys(obj: dict, allowed: set[str], required: set[str], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise InputError(f"{path}: unknown key {key!r}")
    for key in required:
        if key not in obj:
            raise InputError(f"{path}: missing key {key!r}")


def _parse_value_at(text, path: str) -> Value:
    if not isinstance(text, str):
        raise InputError(f"{path}: expected a value string, got {type(text).__name__}")
    try:
        return parse_value(text)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def parse_instance_obj(obj) -> Instance:
    if not isinstance(obj, dict):
        raise InputError("$: expected a JSON object")
    _require_keys(obj, {"kind", "agents", "items", "values"},
                  {"kind", "agents", "items", "values"}, "$")
    kind = obj["kind"]
    if kind not in (model.GOODS, model.CHORES):
        raise InputError(f"$.kind: must be 'goods' or 'chores', got {kind!r}")
    agents = obj["agents"]
    if not isinstance(agents, list) or not agents:
        raise InputError("$.agents: expected a non-empty array")
    agent_ids = []
    weights = []
    for idx, entry in enumerate(agents):
        path = f"$.agents[{idx}]"
        if not isinstance(entry, dict):
            raise InputError(f"{path}: expected an object")
        _require_keys(entry, {"id", "weight"}, {"id", "weight"}, path)
        if not isinstance(entry["id"], str):
            raise InputError(f"{path}.id: expected a string")
        agent_ids.append(entry["id"])
        weights.append(_parse_value_at(entry["weight"], f"{path}.weight"))
    items = obj["items"]
    if not isinstance(items, list) or any(not isinstance(i, str) for i in items):
        raise InputError("$.items: expected an array of strings")
    rows_in = obj["values"]
    if not isinstance(rows_in, list):
        raise InputError("$.values: expected an array of arrays")
    rows = []
    for idx, row in enumerate(rows_in):
        if not isinstance(row, list):
            raise InputError(f"$.values[{idx}]: expected an array")
        rows.append(
            tuple(
                _parse_value_at(v, f"$.values[{idx}][{jdx}]") for jdx, v in enumerate(row)
            )
        )
    instance = Instance(
        kind=kind,
        agent_ids=tuple(agent_ids),
        weights=tuple(weights),
        item_ids=tuple(items),
        values=tuple(rows),
    )
    violations = model.validate(instance)
    if violations:
        raise InputError("; ".join(violations))
    return instance


def parse_instance(text: str) -> Instance:
    """Parse and validate an instance from JSON text."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from None
    return parse_instance_obj(obj)


def instance_to_obj(instance: Instance) -> dict:
    return {
        "kind": instance.kind,
        "agents": [
            {"id": aid, "weight": w.render_exact()}
            for aid, w in zip(instance.agent_ids, instance.weights)
        ],
        "items": list(instance.item_ids),
        "values": [[v.render_exact() for v in row] for row in instance.values],
    }


def allocation_to_obj(instance: Instance, allocation: Allocation) -> dict:
    return {
        "owner": {
            instance.item_ids[g]: instance.agent_ids[o]
            for g, o in enumerate(allocation.owners)
        }
    }


def parse_allocation(text: str, instance: Instance) -> Allocation:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError("$: expected a JSON object")
    _require_keys(obj, {"owner"}, {"owner"}, "$")
    owner = obj["owner"]
    if not isinstance(owner, dict):
        raise InputError("$.owner: expected an object")
    item_index = {iid: g for g, iid in enumerate(instance.item_ids)}
    agent_index = {aid: i for i, aid in enumerate(instance.agent_ids)}
    owners = [-1] * instance.m
    for iid, aid in owner.items():
        if iid not in item_index:
            raise InputError(f"$.owner: unknown item id {iid!r}")
        if not isinstance(aid, str) or aid not in agent_index:
            raise InputError(f"$.owner[{iid!r}]: unknown agent id {aid!r}")
        owners[item_index[iid]] = agent_index[aid]
    missing = [instance.item_ids[g] for g, o in enumerate(owners) if o == -1]
    if missing:
        raise InputError(f"$.owner: items without an owner: {missing}")
    return Allocation(n_agents=instance.n, owners=tuple(owners))


# -- argument parsing ---------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="wfair", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_alloc = sub.add_parser("allocate", help="run an allocation procedure")
    p_alloc.add_argument("--alg", required=True,
                         choices=["envy-cycle", "icyc", "approx-wefx", "chore-rr"])
    p_alloc.add_argument("--in", dest="infile", required=True)
    p_alloc.add_argument("--out", dest="outfile")
    p_alloc.add_argument("--mode",
                         choices=["identical-cardinal", "identical-ordinal"],
                         help="envy-cycle preference mode (default: auto-detect)")

    p_verify = sub.add_parser("verify", help="verify a criterion on an allocation")
    p_verify.add_argument("--criterion", required=True,
                          choices=["wef", "wef1", "1wef", "wefx", "xwef"])
    p_verify.add_argument("--in", dest="infile", required=True)
    p_verify.add_argument("--alloc", dest="allocfile", required=True)

    p_search = sub.add_parser("search", help="exhaustive search over all allocations")
    p_search.add_argument("objective", choices=["exists", "best-factor"])
    p_search.add_argument("--criterion",
                          choices=["wef", "wef1", "1wef", "wefx", "xwef"])
    p_search.add_argument("--in", dest="infile", required=True)
    p_search.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    p_search.add_argument("--jobs", type=int, default=1)

    p_repro = sub.add_parser("repro", help="re-derive a built-in counterexample case")
    p_repro.add_argument("--case", required=True, choices=list(corpus.CASE_IDS))
    p_repro.add_argument("--alpha", help="weight split for the two-agent cases")
    p_repro.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    p_repro.add_argument("--jobs", type=int, default=1)

    p_sweep = sub.add_parser("sweep", help="best factor across a weight grid")
    p_sweep.add_argument("--case", required=True, choices=list(corpus.CASE_IDS))
    p_sweep.add_argument("--grid", required=True,
                         help="comma-separated weight splits, e.g. '0.40,0.44,0.48'")
    p_sweep.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    p_sweep.add_argument("--jobs", type=int, default=1)

    return parser


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _factor_fields(prefix: str, factor) -> dict:
    return {
        f"{prefix}_exact": factor.render_exact(),
        f"{prefix}_decimal": factor.render_decimal(6),
    }


# -- subcommand implementations ----------------------------------------------


def _cmd_allocate(args) -> int:
    instance = parse_instance(_read(args.infile))
    extra: dict = {}
    if args.alg == "envy-cycle":
        if instance.kind != model.GOODS:
            raise InputError("algorithm requires goods")
        if args.mode:
            mode = args.mode.replace("-", "_")
        else:
            first = instance.values[0]
            identical = all(row == first for row in instance.values)
            mode = (
                algorithms.MODE_IDENTICAL_CARDINAL
                if identical
                else algorithms.MODE_IDENTICAL_ORDINAL
            )
        allocation = algorithms.envy_cycle_weighted(instance, mode)
        extra["mode"] = mode.replace("_", "-")
    elif args.alg == "icyc":
        allocation = algorithms.icyc_integer_wefx(instance)
    elif args.alg == "approx-wefx":
        allocation, trace = algorithms.approx_wefx(instance)
        extra["trace"] = {
            "chosen_case": trace.chosen_case,
            "k": trace.k,
            "reindexed": trace.reindexed,
            "beta_exact": trace.beta.render_exact(),
            "lead_weight_exact": trace.lead_weight.render_exact(),
        }
    else:  # chore-rr
        if instance.kind != model.CHORES:
            raise InputError("algorithm requires chores")
        allocation, _trace = algorithms.chore_round_robin(instance)

    out = {"algorithm": args.alg, **allocation_to_obj(instance, allocation), **extra}
    _emit(out)
    if args.outfile:
        with open(args.outfile, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(allocation_to_obj(instance, allocation), indent=2) + "\n")
    return EXIT_OK


def _cmd_verify(args) -> int:
    instance = parse_instance(_read(args.infile))
    allocation = parse_allocation(_read(args.allocfile), instance)
    criterion = Criterion.from_text(args.criterion)
    report = fairness.verify(instance, allocation, criterion)
    _emit(report.to_json(instance))
    return EXIT_OK if report.satisfied else EXIT_NEGATIVE


def _cmd_search(args) -> int:
    instance = parse_instance(_read(args.infile))
    if args.objective == "exists":
        if not args.criterion:
            raise _UsageError("search exists requires --criterion")
        criterion = Criterion.from_text(args.criterion)
        res = oracle.exists_exact(
            instance, criterion, budget=args.budget, jobs=args.jobs
        )
        out = {
            "objective": "exists",
            "criterion": criterion.value,
            "exists": res.exists,
            "witness": (
                allocation_to_obj(instance, res.witness)["owner"]
                if res.witness is not None
                else None
            ),
            "allocations_scanned": res.allocations_scanned,
        }
        _emit(out)
        return EXIT_OK if res.exists else EXIT_NEGATIVE
    if args.criterion:
        raise _UsageError("search best-factor takes no --criterion")
    res = oracle.best_factor(instance, budget=args.budget, jobs=args.jobs)
    out = {
        "objective": "best-factor",
        **_factor_fields("best_factor", res.best_factor),
        "argbest": allocation_to_obj(instance, res.argbest)["owner"],
        "allocations_scanned": res.allocations_scanned,
    }
    _emit(out)
    return EXIT_OK


def _cmd_repro(args) -> int:
    info = corpus.case_info(args.case)
    alpha: Optional[Value] = None
    if args.alpha is not None:
        try:
            alpha = parse_ratio_or_decimal(args.alpha)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    instance = corpus.get_case(args.case, alpha=alpha)
    res_exists = oracle.exists_exact(
        instance, info.criterion, budget=args.budget, jobs=args.jobs
    )
    res_best = oracle.best_factor(instance, budget=args.budget, jobs=args.jobs)
    out = {
        "case": args.case,
        "criterion": info.criterion.value,
        "instance": instance_to_obj(instance),
        "exists": res_exists.exists,
        "allocations_scanned": res_exists.allocations_scanned,
        **_factor_fields("best_factor", res_best.best_factor),
        "argbest": allocation_to_obj(instance, res_best.argbest)["owner"],
    }
    _emit(out)
    return EXIT_OK if res_exists.exists else EXIT_NEGATIVE


def _cmd_sweep(args) -> int:
    tokens = [t for t in args.grid.split(",") if t.strip()]
    if not tokens:
        raise _UsageError("empty --grid")
    try:
        grid = [parse_ratio_or_decimal(t.strip()) for t in tokens]
    except ValueError as exc:
        raise InputError(str(exc)) from None
    points = oracle.weight_sweep(args.case, grid, budget=args.budget, jobs=args.jobs)
    out = {
        "case": args.case,
        "points": [
            {
                "alpha_exact": alpha.render_exact(),
                "alpha_decimal": alpha.render_decimal(6),
                **_factor_fields("best_factor", factor),
            }
            for alpha, factor in points
        ],
    }
    _emit(out)
    return EXIT_OK


def run(argv=None) -> int:
    """Parse argv, execute, and return the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    try:
        if args.command == "allocate":
            return _cmd_allocate(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "search":
            return _cmd_search(args)
        if args.command == "repro":
            return _cmd_repro(args)
        return _cmd_sweep(args)
    except _UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except BudgetExceededError as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except GuaranteeViolation as exc:
        diagnostic = {
            "error": "guarantee-violation",
            "message": exc.message,
            "instance": instance_to_obj(exc.instance),
            "details": exc.details,
        }
        sys.stderr.write(json.dumps(diagnostic, indent=2) + "\n")
        return EXIT_GUARANTEE
    except InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
