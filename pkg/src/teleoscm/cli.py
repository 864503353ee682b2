"""Command-line interface.

Exit codes: 0 success / consistent, 1 usage error, 2 invalid model or data,
3 agent detected or Markov violation.
"""

from __future__ import annotations

import argparse
import os
import sys

from .dsep import d_separated, implied_independencies
from .expr import ExprError
from .io import (
    SchemaError,
    dumps_csv,
    dumps_dot,
    dumps_report,
    emit_dot,
    read_csv,
    read_model,
    read_spec,
    write_csv,
    write_model,
)
from .operators import Intentional, TwinModel, apply_spec, star
from .repro import StageError, run_repro_heating, run_repro_smoking
from .sampling import SamplingError, sample_dataset
from .scm import ModelError, induce_dag, induce_full_graph, validate_model
from .stats import DegenerateInput
from .teleo import (
    SimulatedAgent,
    detect_agent,
    discover_intention,
    markov_check,
    unstar_columns,
    verify_sfm_hypothesis,
)

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_FLAGGED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return value


def _count(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("TELEO_SEED")
    if env is None:
        return 0
    try:
        return _count(env)
    except (ValueError, argparse.ArgumentTypeError):
        raise SchemaError("", f"TELEO_SEED must be a non-negative integer, got {env!r}") from None


def _emit(text: str, path=None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_valid(path):
    model = read_model(path)
    problems = validate_model(model)
    if problems:
        raise ModelError("invalid model: " + "; ".join(map(str, problems)))
    return model


def cmd_validate(args) -> int:
    problems = validate_model(read_model(args.model))
    for p in problems:
        print(p)
    if problems:
        return EXIT_INVALID
    print("valid")
    return EXIT_OK


def cmd_graph(args) -> int:
    model = _load_valid(args.model)
    if args.output is None:
        sys.stdout.write(dumps_dot(model))
    else:
        emit_dot(model, args.output)
    return EXIT_OK


def cmd_sample(args) -> int:
    model = _load_valid(args.model)
    data = sample_dataset(model, args.n, _seed(args))
    if args.observed_only:
        if not isinstance(model, TwinModel):
            raise ModelError("--observed-only needs a twin model")
        data = data.select(model.observed)
    if args.output is None:
        sys.stdout.write(dumps_csv(data))
    else:
        write_csv(data, args.output)
    return EXIT_OK


def cmd_dsep(args) -> int:
    model = _load_valid(args.model)
    sep = d_separated(induce_full_graph(model), args.x, args.y, _csv_list(args.given or ""))
    print("true" if sep else "false")
    return EXIT_OK


def _graph_and_observed(model):
    if isinstance(model, TwinModel):
        return induce_full_graph(model), list(model.observed)
    return induce_dag(model), list(model.endogenous_names)


def cmd_independencies(args) -> int:
    model = _load_valid(args.model)
    graph, observed = _graph_and_observed(model)
    for st in implied_independencies(graph, observed, args.max_cond):
        print(st)
    return EXIT_OK


def cmd_apply(args) -> int:
    model = _load_valid(args.model)
    out = apply_spec(model, read_spec(args.op))
    write_model(out, args.output)
    return EXIT_OK


def _data_for(model, path):
    """Read a CSV whose header may use base or ``_star`` names of ``model``."""
    names = set(model.endogenous_names)
    names |= {star(n) for n in names}
    return read_csv(path, allowed=names)


def cmd_markov_check(args) -> int:
    model = _load_valid(args.model)
    data = _data_for(model, args.data)
    if isinstance(model, TwinModel):
        report = verify_sfm_hypothesis(model, data, args.alpha, args.max_cond)
    else:
        data = unstar_columns(data, model.endogenous_names)
        report = markov_check(induce_dag(model), data, model.endogenous_names, args.alpha, args.max_cond)
    sys.stdout.write(dumps_report(report.to_json()))
    return EXIT_FLAGGED if report.verdict == "violated" else EXIT_OK


def cmd_detect_agent(args) -> int:
    model = _load_valid(args.model)
    report = detect_agent(model, _data_for(model, args.data), args.alpha, args.max_cond)
    sys.stdout.write(dumps_report(report.to_json()))
    return EXIT_FLAGGED if report.detected else EXIT_OK


def cmd_discover_intention(args) -> int:
    model = _load_valid(args.model)
    policy = read_spec(args.policy)
    if not isinstance(policy, Intentional):
        raise SchemaError("/op", "the hidden policy must be an 'intentional' operator")
    if policy.target != args.target:
        raise ModelError(f"policy acts on {policy.target!r}, not on --target {args.target!r}")
    pairs = {}
    for item in args.pair or []:
        name, _, rest = item.partition("=")
        lo, _, hi = rest.partition(":")
        try:
            pairs[name] = (float(lo), float(hi))
        except ValueError:
            raise SchemaError("", f"bad --pair {item!r}; expected NAME=LOW:HIGH") from None
    report = discover_intention(
        model, SimulatedAgent(model, policy), args.target, _csv_list(args.candidates),
        n=args.n, alpha=args.alpha, seed=_seed(args), value_pairs=pairs,
    )
    sys.stdout.write(dumps_report(report.to_json()))
    return EXIT_OK


def cmd_repro(args) -> int:
    run = run_repro_heating if args.experiment == "heating" else run_repro_smoking
    report = run(_seed(args), args.output)
    if args.output is None:
        sys.stdout.write(dumps_report(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="teleoscm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("graph", help="emit the model graph")
    p.add_argument("model")
    p.add_argument("--format", choices=["dot"], default="dot")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("sample", help="draw a dataset")
    p.add_argument("model")
    p.add_argument("-n", type=_count, required=True)
    p.add_argument("--seed", type=_count)
    p.add_argument("-o", "--output")
    p.add_argument("--observed-only", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("dsep", help="d-separation query")
    p.add_argument("model")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--given")
    p.set_defaults(func=cmd_dsep)

    p = sub.add_parser("independencies", help="list graph-implied independencies")
    p.add_argument("model")
    p.add_argument("--max-cond", type=_count, default=1)
    p.set_defaults(func=cmd_independencies)

    p = sub.add_parser("apply", help="apply an operator file to a model")
    p.add_argument("model")
    p.add_argument("op")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_apply)

    for name, func in (("markov-check", cmd_markov_check), ("detect-agent", cmd_detect_agent)):
        p = sub.add_parser(name)
        p.add_argument("model")
        p.add_argument("data")
        p.add_argument("--alpha", type=_probability, default=0.05)
        p.add_argument("--max-cond", type=_count, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("discover-intention", help="find the variables an agent listens to")
    p.add_argument("model")
    p.add_argument("--policy", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("-n", type=_count, default=10_000)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--seed", type=_count)
    p.add_argument("--pair", action="append", metavar="NAME=LOW:HIGH")
    p.set_defaults(func=cmd_discover_intention)

    p = sub.add_parser("repro", help="rerun a reference simulation")
    p.add_argument("experiment", choices=["heating", "smoking"])
    p.add_argument("--seed", type=_count)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (ModelError, SchemaError, ExprError, SamplingError, DegenerateInput, KeyError, StageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
