"""Entry point of the gcmdp command.

Exit codes: 0 success, 1 input/validation/precondition error, 2 a condition
is violated (or a reproduction mismatches, or no optimal stationary policy
exists), 3 an iteration cap was reached before a verdict.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from gcmdp import __version__
from gcmdp.analysis.gc import check_gc
from gcmdp.cli.output import open_output, write_json, write_trace_csv
from gcmdp.conditions.bridging import check_bridging, check_fixed_point_bridging
from gcmdp.conditions.discounted import check_ud_corollaries
from gcmdp.conditions.reports import J_STAR, BridgingCondition, ConditionReport
from gcmdp.conditions.sequences import extended_difference
from gcmdp.conditions.tails import check_tail_condition, check_van_hee
from gcmdp.config import (
    DEFAULT_HORIZON,
    DEFAULT_MAX_ITER,
    DEFAULT_TOLERANCE,
    DEFAULT_WINDOW,
    RunConfig,
)
from gcmdp.errors import (
    CapReached,
    ConditionViolated,
    GcViolation,
    HorizonCapExceeded,
    TailDiverges,
    ValidationError,
)
from gcmdp.gallery.examples import get_entry, list_entries
from gcmdp.gallery.random_models import generate_random_gc
from gcmdp.gallery.reproduce import reproduce
from gcmdp.models.mdp import Mdp
from gcmdp.models.policy import NoOptimalCertificate
from gcmdp.models.serialization import load_mdp, load_policy, load_value_fn, save_mdp
from gcmdp.models.value import ValueFn, encode_number
from gcmdp.solvers.evaluation import brute_force_j_star, evaluate_policy, evaluate_semi_markov
from gcmdp.solvers.policies import construct_epsilon_optimal, extract_optimal_stationary
from gcmdp.solvers.trace import ConvergenceTrace, Regime
from gcmdp.solvers.value_iteration import (
    solve_from_above,
    transfinite_surrogate,
    vi_from,
    vi_tilde,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2
EXIT_CAP = 3

GALLERY_PREFIX = "gallery:"


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                        help=f"convergence tolerance (default: {DEFAULT_TOLERANCE:g})")
    common.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER,
                        help=f"iteration cap (default: {DEFAULT_MAX_ITER})")
    common.add_argument("--window", type=int, default=DEFAULT_WINDOW,
                        help=f"trailing window for cycle detection (default: {DEFAULT_WINDOW})")
    common.add_argument("--horizon", type=int, default=None,
                        help=f"horizon for lazy models and liminf/limsup estimation "
                             f"(default: {DEFAULT_HORIZON}; gallery entries use their own)")
    common.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="output format (default: json)")
    common.add_argument("--seed", type=int, default=0, help="seed for the random generator")
    common.add_argument("--full-trace", action="store_true",
                        help="keep every iterate instead of every 10th")
    common.add_argument("--renormalize", action="store_true",
                        help="rescale probability lists that sum to 1 within 1e-6")
    common.add_argument("--verbose", "-v", action="count", default=0,
                        help="log progress (-vv for debug output)")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with all subcommands."""
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="gcmdp",
        description="Value iteration and convergence checks for total-cost MDPs under GC",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    model_help = f"model file, or {GALLERY_PREFIX}<entry> for a gallery model"

    check = commands.add_parser("check", help="check GC or a convergence condition")
    conditions = check.add_subparsers(dest="condition", required=True)
    for name, text in (
        ("gc", "general convergence condition"),
        ("van-hee", "convergence sets from sup-expectations of J*"),
        ("tail", "convergence sets from the n-tail sup values"),
        ("ud", "global convergence checks for discounted models"),
    ):
        sub = conditions.add_parser(name, parents=[common], help=text)
        sub.add_argument("model", help=model_help)
        sub.set_defaults(handler=cmd_check)
    bridging = conditions.add_parser("bridging", parents=[common],
                                     help="bridging condition T^nbar(0) >= alpha*R + phi")
    bridging.add_argument("model", help=model_help)
    bridging.add_argument("--nbar", type=int, default=0, help="number of backups (default: 0)")
    bridging.add_argument("--alpha", type=float, default=1.0, help="weight in (0, 1] (default: 1)")
    bridging.add_argument("--phi-file", required=True, help="JSON value function phi")
    bridging.add_argument("--policy-file", default=None,
                          help="JSON stationary policy whose cost replaces J* as reference")
    bridging.add_argument("--fixed-point", action="store_true",
                          help="check the limit of T^n(0) instead of T^nbar(0)")
    bridging.set_defaults(handler=cmd_check)

    solve = commands.add_parser("solve", parents=[common], help="run a value iteration")
    solve.add_argument("model", help=model_help)
    solve.add_argument("--method", required=True,
                       choices=("from-above", "vi0", "tilde", "transfinite", "brute-force"))
    solve.add_argument("--start", choices=("plus", "plus_minus"), default="plus",
                       help="start of from-above iteration (default: plus)")
    solve.add_argument("--start-state", default=None,
                       help="vi0 only: classify the sequence at this state "
                            "and cap iterations at --horizon")
    solve.add_argument("--trace", default=None,
                       help="trace CSV path (default: next to --output)")
    solve.add_argument("--summary", default=None,
                       help="JSON summary path with --format csv (default: next to --output)")
    solve.set_defaults(handler=cmd_solve)

    policy = commands.add_parser("policy", help="construct a policy")
    kinds = policy.add_subparsers(dest="kind", required=True)
    stationary = kinds.add_parser("stationary", parents=[common],
                                  help="optimal stationary policy for J* >= 0")
    stationary.add_argument("model", help=model_help)
    stationary.set_defaults(handler=cmd_policy)
    epsilon = kinds.add_parser("epsilon-optimal", parents=[common],
                               help="semi-Markov policy within eps of J*")
    epsilon.add_argument("model", help=model_help)
    epsilon.add_argument("--eps", type=float, required=True, help="positive slack")
    epsilon.set_defaults(handler=cmd_policy)

    gallery = commands.add_parser("gallery", help="built-in and random models")
    actions = gallery.add_subparsers(dest="action", required=True)
    listing = actions.add_parser("list", parents=[common], help="list built-in entries")
    listing.set_defaults(handler=cmd_gallery)
    export = actions.add_parser("export", parents=[common],
                                help="write an entry (or its horizon slice) as a model file")
    export.add_argument("entry")
    export.add_argument("path")
    export.set_defaults(handler=cmd_gallery)
    random = actions.add_parser("random", parents=[common],
                                help="write a random model satisfying GC (uses --seed)")
    random.add_argument("path")
    random.add_argument("--states", type=int, default=5)
    random.add_argument("--actions", type=int, default=3)
    random.add_argument("--discount", type=float, default=1.0)
    random.add_argument("--sign-mix", type=float, default=0.5)
    random.set_defaults(handler=cmd_gallery)

    repro = commands.add_parser("reproduce", parents=[common],
                                help="recompute the known values of gallery entries")
    repro.add_argument("entries", nargs="+", help="entry identifiers, or 'all'")
    repro.set_defaults(handler=cmd_reproduce)
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from parsed arguments."""
    return RunConfig(
        tolerance=args.tol,
        max_iter=args.max_iter,
        window=args.window,
        horizon=DEFAULT_HORIZON if args.horizon is None else args.horizon,
        output=args.output,
        format=args.format,
        seed=args.seed,
        full_trace=args.full_trace,
    )


def load_model(args: argparse.Namespace) -> Mdp:
    """Load the model argument: a file, or a gallery entry sliced at --horizon.

    Raises:
        KeyError: If a gallery entry is unknown
    """
    if args.model.startswith(GALLERY_PREFIX):
        entry = get_entry(args.model[len(GALLERY_PREFIX):], args.horizon)
        return entry.materialize()
    return load_mdp(args.model, renormalize=args.renormalize)


def _labelled(mdp: Mdp, fn: Optional[ValueFn]) -> Optional[Dict[str, Any]]:
    if fn is None:
        return None
    return {label: encode_number(v) for label, v in zip(mdp.state_ids, fn.values)}


def _emit(config: RunConfig, data: Any) -> None:
    with open_output(config.output) as stream:
        write_json(data, stream)


def _j_star(mdp: Mdp, config: RunConfig) -> ValueFn:
    value, _ = solve_from_above(
        mdp, tol=config.tolerance, max_iter=config.max_iter, window=config.window
    )
    return value


def cmd_check(args: argparse.Namespace, config: RunConfig) -> int:
    """Run one of the checks and write its report."""
    mdp = load_model(args)
    if args.condition == "gc":
        gc_report = check_gc(mdp)
        _emit(config, ConditionReport.from_gc_report(mdp, gc_report).to_dict(mdp))
        if not gc_report.holds:
            logger.warning("GC fails at %d state-action pairs", len(gc_report.witnesses))
            return EXIT_VIOLATION
        return EXIT_OK

    try:
        if args.condition == "van-hee":
            report = check_van_hee(mdp, _j_star(mdp, config), config.horizon, config.window)
        elif args.condition == "tail":
            report = check_tail_condition(mdp, config.horizon, config.window)
        elif args.condition == "ud":
            report = check_ud_corollaries(mdp, _j_star(mdp, config))
        else:
            report = _check_bridging(args, config, mdp)
    except (ConditionViolated, TailDiverges) as e:
        logger.warning("%s", e)
        _emit(config, e.report.to_dict(mdp))
        return EXIT_VIOLATION

    _emit(config, report.to_dict(mdp))
    holds = getattr(report, "condition_holds", getattr(report, "holds", False))
    return EXIT_OK if holds else EXIT_VIOLATION


def _check_bridging(args: argparse.Namespace, config: RunConfig, mdp: Mdp):
    j_star = _j_star(mdp, config)
    reference = J_STAR if args.policy_file is None else load_policy(args.policy_file, mdp)
    cond = BridgingCondition(args.nbar, args.alpha, load_value_fn(args.phi_file, mdp), reference)
    if not args.fixed_point:
        return check_bridging(mdp, cond, j_star, config.horizon, config.window)
    trace = vi_from(
        mdp, ValueFn.zeros(mdp.n_states), config.max_iter, config.tolerance, config.window
    )
    j_infinity = trace.limit if trace.regime is Regime.CONVERGED else None
    return check_fixed_point_bridging(
        mdp, cond, j_infinity, j_star, config.horizon, config.window, config.tolerance
    )


def _companion_path(config: RunConfig, mdp: Mdp, suffix: str) -> str:
    """Path next to --output (or in the working directory) for the second output."""
    if config.output is None:
        return f"{mdp.name}{suffix}"
    stem, _ = os.path.splitext(config.output)
    return f"{stem}{suffix}"


def _write_trace(
    args: argparse.Namespace, config: RunConfig, mdp: Mdp, trace: ConvergenceTrace,
    summary: Dict[str, Any],
) -> None:
    """Write the trace CSV and the JSON summary; --format picks which goes to --output."""
    if config.format == "csv":
        trace_path = config.output
        summary_path = args.summary or _companion_path(config, mdp, ".summary.json")
    else:
        trace_path = args.trace or _companion_path(config, mdp, ".trace.csv")
        summary_path = config.output
    with open_output(trace_path) as stream:
        write_trace_csv(trace, mdp, stream)
    with open_output(summary_path) as stream:
        write_json(summary, stream)
    if args.trace is not None and args.trace != trace_path:
        with open_output(args.trace) as stream:
            write_trace_csv(trace, mdp, stream)
    logger.info("trace written to %s", trace_path or "stdout")
    logger.info("summary written to %s", summary_path or "stdout")


def cmd_solve(args: argparse.Namespace, config: RunConfig) -> int:
    """Run the chosen iteration and write its trace and summary."""
    mdp = load_model(args)
    max_iter = config.max_iter
    watch = None
    if args.start_state is not None and args.method == "vi0":
        watch = mdp.index_of(args.start_state)
        max_iter = min(max_iter, config.horizon)

    method = args.method
    if method == "brute-force":
        value, policy = brute_force_j_star(mdp)
        _emit(config, {"j_star": _labelled(mdp, value), "policy": policy.to_labels(mdp)})
        return EXIT_OK
    if method == "transfinite":
        try:
            value, passes = transfinite_surrogate(
                mdp, tol=config.tolerance, max_iter=max_iter
            )
        except CapReached as e:
            logger.error("%s", e)
            _emit(config, {"regime": Regime.CAP_REACHED.value, "last": _labelled(mdp, e.value)})
            return EXIT_CAP
        _emit(config, {"regime": Regime.CONVERGED.value, "passes": passes,
                       "limit": _labelled(mdp, value)})
        return EXIT_OK

    common = dict(tol=config.tolerance, window=config.window, keep_every=config.keep_every)
    if method == "from-above":
        try:
            _, trace = solve_from_above(mdp, args.start, max_iter=max_iter, **common)
        except CapReached as e:
            logger.error("%s", e)
            _write_trace(args, config, mdp, e.trace, e.trace.summary(mdp))
            return EXIT_CAP
    elif method == "vi0":
        trace = vi_from(mdp, ValueFn.zeros(mdp.n_states), max_iter, watch=watch, **common)
    else:
        trace = vi_tilde(mdp, max_iter, **common)

    _write_trace(args, config, mdp, trace, trace.summary(mdp))
    if trace.regime is Regime.CAP_REACHED:
        logger.error("no convergence or cycle within %d iterations", trace.iterations_used)
        return EXIT_CAP
    return EXIT_OK


def cmd_policy(args: argparse.Namespace, config: RunConfig) -> int:
    """Construct a policy and report its cost against J*."""
    mdp = load_model(args)
    j_star = _j_star(mdp, config)
    if args.kind == "stationary":
        result = extract_optimal_stationary(mdp, j_star)
        if isinstance(result, NoOptimalCertificate):
            logger.warning("%s", result.reason)
            _emit(config, result.to_dict(mdp))
            return EXIT_VIOLATION
        evaluated, _, _ = evaluate_policy(mdp, result)
        document: Dict[str, Any] = {"policy": result.to_labels(mdp)}
    else:
        policy = construct_epsilon_optimal(mdp, args.eps, j_star=j_star)
        evaluated = evaluate_semi_markov(mdp, policy)
        document = {"policy": policy.to_dict(mdp)}
    slack = extended_difference(evaluated.values, j_star.values)
    document.update(
        evaluated=_labelled(mdp, evaluated),
        j_star=_labelled(mdp, j_star),
        max_slack=encode_number(float(np.max(slack, initial=0.0))),
    )
    _emit(config, document)
    return EXIT_OK


def cmd_gallery(args: argparse.Namespace, config: RunConfig) -> int:
    """List, export or generate models."""
    if args.action == "list":
        listing: List[Dict[str, Any]] = []
        for entry_id in list_entries():
            entry = get_entry(entry_id)
            listing.append({
                "id": entry.id,
                "description": entry.description,
                "lazy": entry.is_lazy,
                "expectations": sorted(entry.expected),
            })
        _emit(config, listing)
        return EXIT_OK
    if args.action == "export":
        mdp = get_entry(args.entry, args.horizon).materialize()
    else:
        mdp = generate_random_gc(
            config.seed, args.states, args.actions, args.discount, args.sign_mix
        )
    save_mdp(mdp, args.path)
    logger.info("wrote %s (%d states) to %s", mdp.name, mdp.n_states, args.path)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace, config: RunConfig) -> int:
    """Recompute gallery expectations; exit 2 on any mismatch."""
    results = reproduce(args.entries)
    for result in results:
        for outcome in result.failures():
            print(f"{result.entry_id}/{outcome.name} ({outcome.provenance}):", file=sys.stderr)
            for line in outcome.differences:
                print(f"  {line}", file=sys.stderr)
    _emit(config, [result.to_dict() for result in results])
    return EXIT_OK if all(result.passed for result in results) else EXIT_VIOLATION


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the command line and return the exit code."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        config = run_config(args)
        return args.handler(args, config)
    except (CapReached, HorizonCapExceeded) as e:
        logger.error("%s", e)
        return EXIT_CAP
    except GcViolation as e:
        logger.error("%s", e)
        return EXIT_ERROR
    except ValidationError as e:
        logger.error("%s", e)
        for issue in e.issues:
            logger.error("  %s", issue)
        return EXIT_ERROR
    except KeyError as e:
        logger.error("%s", e.args[0] if e.args else e)
        return EXIT_ERROR
    except (OSError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
