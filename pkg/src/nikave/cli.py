"""Command-line front end: `nikave estimate|sweep|verify|oracle|probe`.

Stdout carries only records and summaries; diagnostics go to stderr.
Bad flags and malformed plans exit 2, failures while computing exit 1.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any

from .errors import NikaveError
from .estimators import (
    EstimatorTask,
    MomentRatio,
    Nikolskii,
    NormMoment,
    RecipSupMoment,
    parse_statistic,
    run_estimator,
)
from .oracles import (
    OracleValue,
    TailBounds,
    c_q,
    chi_moment,
    expected_abs_max,
    expected_qq_norm,
    expected_recip_abs_max,
    gaussian_tail,
    moment_ratio_factor,
    recip_moment_factor,
    stirling_ratio_check,
)
from .poly import BasisKind, default_basis, fejer_poly
from .quadrature import DEFAULT_QUAD, NormSpec, QuadConfig
from .records import (
    EstimateRecord,
    dumps,
    estimate_to_dict,
    format_float,
    match_records,
    match_to_dict,
    plans_from_json,
    poly_to_json,
    sweep_records,
    sweep_to_dict,
    write_csv,
)
from .report import format_dimension_match, format_probe, format_sweep
from .sampling import Law, RandomSpec, parse_seed
from .suites import SUITE_NAMES, run_suite
from .sweep import SweepPlan, dimension_match, run_sweep, worst_case_probe

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from .estimators import Statistic
    from .poly import BasisSpec
    from .sweep import Middleware

logger = logging.getLogger(__name__)

DEFAULT_PROBE_DEGREES = (16, 32, 64, 128, 256, 512)


# --- argument types -----------------------------------------------------------
def _exponent(text: str) -> NormSpec:
    try:
        return NormSpec.parse(text)
    except NikaveError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _seed(text: str) -> int:
    try:
        return parse_seed(text)
    except NikaveError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as e:
        msg = f"expected a positive integer, provided {text!r}"
        raise argparse.ArgumentTypeError(msg) from e
    if value < 1:
        msg = f"expected a positive integer, provided {text!r}"
        raise argparse.ArgumentTypeError(msg)
    return value


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as e:
        msg = f"expected comma-separated integers, provided {text!r}"
        raise argparse.ArgumentTypeError(msg) from e


# --- configuration ------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class RunConfig:
    """Parsed `estimate` invocation."""

    command: str
    statistic: Statistic
    basis: BasisSpec
    samples: int
    random: RandomSpec
    quad: QuadConfig = DEFAULT_QUAD
    output_format: str = "csv"
    output: Path | None = None
    workers: int | None = None

    def task(self) -> EstimatorTask:
        return EstimatorTask(self.basis, self.random, self.statistic, self.samples, self.quad)


def _missing(name: str, *flags: str) -> argparse.ArgumentTypeError:
    msg = f"{name} needs {', '.join(flags)}"
    return argparse.ArgumentTypeError(msg)


def _statistic_from_args(args: argparse.Namespace) -> Statistic:
    """From --statistic plus its parameter flags, or a full descriptor."""
    name: str = args.statistic
    if "(" in name:
        return parse_statistic(name)
    match name:
        case "nikolskii":
            if args.p is None or args.q is None:
                raise _missing(name, "--p", "--q")
            return Nikolskii(args.p, args.q)
        case "moment_ratio":
            if args.q is None or args.k is None or args.l is None:
                raise _missing(name, "--q", "--k", "--l")
            return MomentRatio(args.q, args.k, args.l)
        case "norm_moment":
            if args.q is None or args.s is None:
                raise _missing(name, "--q", "--s")
            return NormMoment(args.q, args.s)
        case "recip_sup_moment":
            if args.r is None:
                raise _missing(name, "--r")
            return RecipSupMoment(args.r)
        case _:
            return parse_statistic(name)


def _quad_from_args(args: argparse.Namespace) -> QuadConfig:
    return QuadConfig(
        oversample=args.oversample,
        rel_tol=args.rel_tol,
        max_doublings=args.max_doublings,
        max_grid_points=args.max_grid_points,
    )


def estimate_config(args: argparse.Namespace) -> RunConfig:
    kind = BasisKind(args.basis) if args.basis else None
    return RunConfig(
        command="estimate",
        statistic=_statistic_from_args(args),
        basis=default_basis(args.d, args.n, kind),
        samples=args.samples,
        random=RandomSpec(Law(args.law), args.sigma, args.seed),
        quad=_quad_from_args(args),
        output_format=args.format,
        output=args.output,
        workers=args.workers,
    )


def _write(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _fail(error: Exception) -> int:
    print(f"nikave: error: {error}", file=sys.stderr)
    return 1


def _csv_text(records: Sequence[EstimateRecord]) -> str:
    buffer = io.StringIO()
    write_csv(records, buffer)
    return buffer.getvalue()


# --- commands -----------------------------------------------------------------
def cmd_estimate(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    try:
        config = estimate_config(args)
        task = config.task()
    except (NikaveError, argparse.ArgumentTypeError) as e:
        parser.error(str(e))
    try:
        estimate = run_estimator(task, workers=config.workers)
    except NikaveError as e:
        return _fail(e)
    record = EstimateRecord(config.basis, config.random, config.statistic, estimate)
    if config.output_format == "json":
        _write(dumps(estimate_to_dict(record)), config.output)
    else:
        _write(_csv_text([record]), config.output)
    return 0


def _sweep_middleware(parser: argparse.ArgumentParser, *, traced: bool) -> tuple[Middleware, ...]:
    if not traced:
        return ()
    try:
        from .middleware.otel import otel
    except ImportError as e:
        parser.error(str(e))
    return (otel(),)


def cmd_sweep(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    try:
        plans = plans_from_json(args.plan.read_text(encoding="utf-8"))
    except OSError as e:
        parser.error(f"cannot read plan file: {e}")
    except NikaveError as e:
        parser.error(str(e))
    middleware = _sweep_middleware(parser, traced=args.otel)

    summaries: list[str] = []
    records: list[EstimateRecord] = []
    documents: list[dict[str, Any]] = []
    failed = False
    for plan in plans:
        try:
            if isinstance(plan, SweepPlan):
                result = run_sweep(
                    plan,
                    workers=args.workers,
                    point_workers=args.point_workers,
                    middleware=middleware,
                )
                summaries.append(format_sweep(result, markdown=args.markdown))
                records.extend(sweep_records(result))
                documents.append(sweep_to_dict(result))
                failed = failed or result.passed is False
            else:
                match = dimension_match(
                    plan.statistic,
                    plan.N,
                    plan.samples,
                    plan.seed,
                    random=plan.random_spec,
                    kind=plan.kind,
                    quad=plan.quad,
                    workers=args.workers,
                    point_workers=args.point_workers,
                    middleware=middleware,
                )
                summaries.append(
                    format_dimension_match(match, max_ratio=plan.max_ratio, markdown=args.markdown)
                )
                records.extend(match_records(match, plan))
                documents.append(match_to_dict(match, plan))
                failed = failed or (plan.max_ratio is not None and match.ratio > plan.max_ratio)
        except NikaveError as e:
            return _fail(e)

    sys.stdout.write("\n\n".join(summaries) + "\n")
    if args.output is not None:
        if args.format == "json":
            _write(dumps({"results": documents}), args.output)
        else:
            _write(_csv_text(records), args.output)
    return 1 if failed else 0


def cmd_verify(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    try:
        checks = run_suite(args.suite, workers=args.workers)
    except NikaveError as e:
        return _fail(e)
    for check in checks:
        verdict = "PASS" if check.passed else "FAIL"
        line = f"{verdict}  {check.name}"
        if check.detail:
            line += f": {check.detail}"
        print(line)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


type OracleFn = Callable[..., float | OracleValue | TailBounds]

# name -> (argument parsers, function); argument order follows the function
_ORACLES: dict[str, tuple[tuple[Callable[[str], Any], ...], OracleFn]] = {
    "cq": ((float,), c_q),
    "factor26": ((int, int, int), moment_ratio_factor),
    "moment-ratio": ((int, int, int), moment_ratio_factor),
    "factor24": ((int, int, int), recip_moment_factor),
    "recip-ratio": ((int, int, int), recip_moment_factor),
    "chi": ((int, float), chi_moment),
    "tail": ((float,), gaussian_tail),
    "stirling": ((float,), stirling_ratio_check),
    "eqq": ((float, int), expected_qq_norm),
    "absmax": ((int,), expected_abs_max),
    "recip-absmax": ((int, float), expected_recip_abs_max),
}

_ORACLE_USAGE = {
    "cq": "q",
    "factor26": "k l N",
    "moment-ratio": "k l N",
    "factor24": "k l N",
    "recip-ratio": "k l N",
    "chi": "N k",
    "tail": "t",
    "stirling": "x",
    "eqq": "q N",
    "absmax": "N",
    "recip-absmax": "N r",
}


def format_oracle(result: float | OracleValue | TailBounds) -> str:
    """Oracle output at 17 significant digits.

    >>> print(format_oracle(1.0))
    1.0000000000000000
    """
    if isinstance(result, OracleValue):
        lines = [format_float(result.value), f"log_scale {format_float(result.log_scale)}"]
        if result.overflow:
            lines.append("overflow")
        return "\n".join(lines)
    if isinstance(result, TailBounds):
        return "\n".join(f"{name} {format_float(value)}" for name, value in result._asdict().items())
    return format_float(result)


def cmd_oracle(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    converters, fn = _ORACLES[args.name]
    if len(args.args) != len(converters):
        parser.error(f"oracle {args.name} takes {_ORACLE_USAGE[args.name]}")
    try:
        values = [convert(text) for convert, text in zip(converters, args.args, strict=True)]
    except ValueError as e:
        parser.error(f"oracle {args.name} takes {_ORACLE_USAGE[args.name]}: {e}")
    try:
        result = fn(*values)
    except NikaveError as e:
        return _fail(e)
    print(format_oracle(result))
    return 0


def cmd_probe(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    try:
        quad = _quad_from_args(args)
        result = worst_case_probe(args.p, args.q, args.degrees, dimension=args.d, quad=quad)
    except NikaveError as e:
        parser.error(str(e))
    print(format_probe(result, markdown=args.markdown))
    if args.kernels is not None:
        lines = [poly_to_json(fejer_poly(n, args.d)) for n in args.degrees]
        _write("\n".join(lines) + "\n", args.kernels)
    return 0


# --- parser -------------------------------------------------------------------
def _add_quad_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--oversample", type=_positive_int, default=DEFAULT_QUAD.oversample)
    parser.add_argument("--rel-tol", type=float, default=DEFAULT_QUAD.rel_tol)
    parser.add_argument("--max-doublings", type=int, default=DEFAULT_QUAD.max_doublings)
    parser.add_argument(
        "--max-grid-points", type=_positive_int, default=DEFAULT_QUAD.max_grid_points
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--workers",
        type=_positive_int,
        default=None,
        help="sample worker threads (default: machine parallelism); never changes results",
    )
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=("csv", "json"), default="csv")
    output.add_argument("--output", type=Path, default=None, help="record file (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="nikave",
        description="Average Nikolskii factors of random trigonometric polynomials.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    estimate = commands.add_parser(
        "estimate", parents=[common, output], help="Monte Carlo estimate at one (d, n)"
    )
    estimate.add_argument(
        "--statistic",
        default="nikolskii",
        help="nikolskii, moment_ratio, norm_moment, recip_sup_moment, or a full descriptor",
    )
    estimate.add_argument("--p", type=_exponent, help="decimal >= 1 or inf")
    estimate.add_argument("--q", type=_exponent, help="decimal >= 1 or inf")
    estimate.add_argument("--k", type=int)
    estimate.add_argument("--l", type=int)
    estimate.add_argument("--s", type=float)
    estimate.add_argument("--r", type=float)
    estimate.add_argument("--d", type=_positive_int, default=1)
    estimate.add_argument("--n", type=int, required=True)
    estimate.add_argument("--basis", choices=[k.value for k in BasisKind], default=None)
    estimate.add_argument("--samples", type=int, default=1000)
    estimate.add_argument("--seed", type=_seed, default=0, help="decimal or 0x-hex")
    estimate.add_argument("--sigma", type=float, default=1.0)
    estimate.add_argument("--law", choices=[law.value for law in Law], default="gaussian")
    _add_quad_flags(estimate)
    estimate.set_defaults(handler=cmd_estimate)

    sweep = commands.add_parser(
        "sweep", parents=[common, output], help="run the sweeps in a JSON plan file"
    )
    sweep.add_argument("plan", type=Path)
    sweep.add_argument("--markdown", action="store_true")
    sweep.add_argument("--otel", action="store_true", help="trace sweep points with OpenTelemetry")
    sweep.add_argument(
        "--point-workers",
        type=_positive_int,
        default=1,
        help="sweep points run at once (default: 1); never changes results",
    )
    sweep.set_defaults(handler=cmd_sweep)

    verify = commands.add_parser("verify", parents=[common], help="run an invariant suite")
    verify.add_argument("suite", choices=(*SUITE_NAMES, "all"))
    verify.set_defaults(handler=cmd_verify)

    oracle = commands.add_parser("oracle", parents=[common], help="evaluate a closed form")
    oracle.add_argument("name", choices=tuple(_ORACLES))
    oracle.add_argument("args", nargs="*")
    oracle.set_defaults(handler=cmd_oracle)

    probe = commands.add_parser("probe", parents=[common], help="Fejer kernel worst-case probe")
    probe.add_argument("--p", type=_exponent, required=True)
    probe.add_argument("--q", type=_exponent, required=True)
    probe.add_argument("--degrees", type=_int_list, default=DEFAULT_PROBE_DEGREES)
    probe.add_argument("--d", type=_positive_int, default=1)
    probe.add_argument("--markdown", action="store_true")
    probe.add_argument("--kernels", type=Path, default=None, help="write the kernels as JSON lines")
    _add_quad_flags(probe)
    probe.set_defaults(handler=cmd_probe)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    logger.debug("command: %s", args.command)
    return args.handler(parser, args)
