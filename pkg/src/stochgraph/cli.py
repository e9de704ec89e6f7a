"""Command-line interface.

Subcommands: validate, gen, solve, exact, estimate {mst|mpm|cc}, compare.
Exit codes: 0 success, 2 validation failure, 3 budget/cap refusal,
4 internal assertion.  Output is deterministic for a fixed configuration and
seed; timing is only emitted when --with-timing is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .campaign import ESTIMATORS, run_campaign, run_estimator
from .errors import (
    DomainError,
    EnumerationCapError,
    InternalAssertionError,
    StochgraphError,
    ValidationError,
)
from .generate import KINDS, gen_instance
from .model import (
    EventSpec,
    Realization,
    instance_from_dict,
    load_instance,
)
from .oracle import DEFAULT_CAP, Functional, enumerate_term, FunctionalEvaluator
from .model import event_probability

EXIT_VALIDATION = 2
EXIT_REFUSAL = 3
EXIT_INTERNAL = 4


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("STOCHGRAPH_THREADS", "1")))
    except ValueError:
        return 1


def _emit(doc, path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_event(spec: str | None) -> EventSpec:
    if not spec:
        return EventSpec()
    if spec.startswith("@"):
        with open(spec[1:], "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.loads(spec)
    return EventSpec(
        allowed=doc.get("allowed", {}),
        allow_absent=doc.get("allow_absent", {}),
    )


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", help="write JSON here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochgraph",
        description="expected MST / perfect matching / cycle cover lengths "
        "on stochastic graphs, estimated or enumerated exactly",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("instance")
    _add_common(p)

    p = sub.add_parser("gen", help="generate an instance file")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)

    p = sub.add_parser("solve", help="evaluate a functional on one realization")
    p.add_argument("instance")
    p.add_argument("--functional", required=True,
                   choices=[f.value for f in Functional])
    p.add_argument("--realization", required=True,
                   help='JSON {"node": "point", ...} or @file')
    _add_common(p)

    p = sub.add_parser("exact", help="exact expectation by enumeration")
    p.add_argument("instance")
    p.add_argument("--functional", required=True,
                   choices=[f.value for f in Functional])
    p.add_argument("--event", help='JSON {"allowed": {...}} or @file')
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    _add_common(p)

    p = sub.add_parser("estimate", help="run an FPRAS estimator")
    p.add_argument("target", choices=["mst", "mpm", "cc"])
    p.add_argument("instance")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--method", choices=["home", "dp"], default="home",
                   help="mst only: decomposition to use")
    p.add_argument("--budget-scale", type=float, default=1.0)
    p.add_argument("--budget-cap", type=int, default=None,
                   help="hard per-term sample cap")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--dump-homes", action="store_true",
                   help="include the home structure in the report")
    p.add_argument("--with-timing", action="store_true")
    p.add_argument("--format", choices=["json", "csv"], default="json",
                   help="csv emits the term table (per-pair table for cc)")
    _add_common(p)

    p = sub.add_parser("compare", help="estimators vs oracle over seeds")
    p.add_argument("instances", nargs="+")
    p.add_argument("--estimators", default=",".join(ESTIMATORS),
                   help="comma list from: " + ",".join(ESTIMATORS))
    p.add_argument("--seeds", type=int, default=20, help="number of seeds (0..k-1)")
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--budget-scale", type=float, default=1.0)
    p.add_argument("--budget-cap", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _add_common(p)

    return parser


def _cmd_validate(args) -> int:
    g = load_instance(args.instance)
    _emit(
        {
            "valid": True,
            "nodes": g.n,
            "points": g.m,
            "presence_mode": g.presence_mode,
        },
        args.output,
    )
    return 0


def _cmd_gen(args) -> int:
    doc = gen_instance(args.kind, args.n, args.m, args.seed)
    instance_from_dict(doc)  # self-check before writing
    _emit(doc, args.output)
    return 0


def _cmd_solve(args) -> int:
    g = load_instance(args.instance)
    spec = args.realization
    if spec.startswith("@"):
        with open(spec[1:], "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.loads(spec)
    r = Realization.from_mapping(g, doc)
    value = FunctionalEvaluator(g.space, Functional(args.functional)).value_of_assignment(
        r.indices
    )
    _emit({"functional": args.functional, "value": value}, args.output)
    return 0


def _cmd_exact(args) -> int:
    g = load_instance(args.instance)
    event = _load_event(args.event)
    term, count = enumerate_term(g, Functional(args.functional), event, cap=args.cap)
    prob = event_probability(g, event)
    if prob <= 0.0:
        raise DomainError("conditioning event has zero probability")
    _emit(
        {
            "functional": args.functional,
            "value": term / prob,
            "term": term,
            "probability": prob,
            "count": count,
            "event": event.to_json_dict(g),
        },
        args.output,
    )
    return 0


def _cmd_estimate(args) -> int:
    g = load_instance(args.instance)
    threads = args.threads if args.threads is not None else _default_threads()
    if args.budget_scale < 1.0:
        print(
            f"WARNING: budget-scale {args.budget_scale} < 1 voids the FPRAS "
            "guarantee; results are exploratory",
            file=sys.stderr,
        )
    name = args.target if args.target != "mst" else (
        "mst-home" if args.method == "home" else "mst-dp"
    )
    report = run_estimator(
        name,
        g,
        args.epsilon,
        args.seed,
        budget_scale=args.budget_scale,
        budget_cap=args.budget_cap,
        threads=threads,
    )
    if args.format == "csv":
        text = _report_csv(report)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    doc = report.to_dict(include_timing=args.with_timing)
    if not args.dump_homes:
        doc.get("extras", {}).pop("home", None)
        doc.get("extras", {}).pop("homes", None)
    _emit(doc, args.output)
    return 0


def _report_csv(report) -> str:
    lines = []
    pairs = report.extras.get("pairs")
    if pairs:  # cycle-cover runs: the per-pair conditioned sub-terms
        lines.append(
            "schema_version,s,t,node_s,node_t,kind,prob,estimate,samples,indicator_hits"
        )
        for p in pairs:
            lines.append(
                "1,{s},{t},{node_s},{node_t},{kind},{prob!r},{estimate!r},"
                "{samples},{indicator_hits}".format(**p)
            )
    else:
        lines.append("schema_version,name,method,value,probability,mean,samples,full_budget")
        for t in report.terms:
            lines.append(
                f"1,{t.name},{t.method},{t.value!r},"
                f"{'' if t.probability is None else repr(t.probability)},"
                f"{'' if t.mean is None else repr(t.mean)},"
                f"{t.samples},{'' if t.full_budget is None else t.full_budget}"
            )
    return "\n".join(lines) + "\n"


def _cmd_compare(args) -> int:
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
    for e in estimators:
        if e not in ESTIMATORS:
            raise ValidationError(f"unknown estimator {e!r}")
    threads = args.threads if args.threads is not None else _default_threads()
    if args.budget_scale < 1.0:
        print(
            f"WARNING: budget-scale {args.budget_scale} < 1 voids the FPRAS "
            "guarantee; results are exploratory",
            file=sys.stderr,
        )
    instances = [(path, load_instance(path)) for path in args.instances]
    result = run_campaign(
        instances,
        estimators,
        [args.seed_base + k for k in range(args.seeds)],
        args.epsilon,
        budget_scale=args.budget_scale,
        budget_cap=args.budget_cap,
        threads=threads,
        cap=args.cap,
    )
    if args.format == "csv":
        text = result.to_csv()
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(result.to_dict(), args.output)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "exact": _cmd_exact,
    "estimate": _cmd_estimate,
    "compare": _cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except EnumerationCapError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSAL
    except (ValidationError, DomainError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InternalAssertionError as exc:
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except StochgraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
