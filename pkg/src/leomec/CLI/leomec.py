import argparse
import os
import sys
from typing import List, Optional

from leomec.Core.Exception import ConfigError, ValidationFailed, exit_code_for
from leomec.Core.Types import NetworkMode, RunMode, SweepVariable, normalize_sweep_values
from leomec.network import COLUMNS, LeoMec, SweepSpec, csv_text


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-c",
        "--config",
        help="TOML scenario file, if not set, will use the built-in defaults",
        required=False,
    )
    parser.add_argument(
        "--set",
        help="Override one config value, e.g. --set link.tau_db=3. Can be repeated",
        action="append",
        default=[],
        metavar="KEY=VALUE",
    )
    parser.add_argument(
        "-o",
        "--out",
        help="CSV output path, if not set, rows are printed to stdout",
        required=False,
    )
    parser.add_argument("--seed", help="Monte Carlo master seed", type=int, required=False)
    parser.add_argument("--trials", help="Monte Carlo trials per task class", type=int, required=False)
    parser.add_argument(
        "--workers",
        help="Points evaluated at the same time, also used for Monte Carlo chunks. Defaults to 1",
        type=int,
        default=1,
    )
    parser.add_argument("--debug", help="Enable debug logging", action="store_true")


def _sweep_args(parser: argparse.ArgumentParser, with_dump: bool) -> None:
    parser.add_argument(
        "--sweep",
        help="Variable to sweep",
        choices=[v.value for v in SweepVariable],
        required=False,
    )
    parser.add_argument("--values", help="Comma separated, strictly increasing sweep values", required=False)
    parser.add_argument(
        "--series",
        help="Second variable; one curve per series value",
        choices=[v.value for v in SweepVariable],
        required=False,
    )
    parser.add_argument("--series-values", help="Comma separated series values", required=False)
    if with_dump:
        parser.add_argument("--dump", help="Per-trial CSV path, single point only", required=False)
    else:
        parser.add_argument(
            "--mode",
            help="Network mode, default is integrated",
            choices=[m.value for m in NetworkMode],
            default=NetworkMode.INTEGRATED.value,
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leomec",
        description="Coverage, association and delay of LEO satellite assisted edge computing networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analytic = sub.add_parser("analytic", help="Evaluate the analytical model")
    _common(analytic)
    _sweep_args(analytic, with_dump=False)

    for name, text in (("simulate", "Run the Monte Carlo simulator"),
                       ("compare", "Analytical model next to the simulator, with gaps")):
        p = sub.add_parser(name, help=text)
        _common(p)
        _sweep_args(p, with_dump=True)

    preset = sub.add_parser("preset", help="Evaluate published constellations")
    _common(preset)
    preset.add_argument("--name", help='Point like "starlink-1584", a family like "oneweb", or "all"', required=True)
    preset.add_argument(
        "--run",
        help="analytic, simulate or compare, default is analytic",
        choices=[m.value for m in RunMode],
        default=RunMode.ANALYTIC.value,
    )

    baselines = sub.add_parser("baselines", help="Integrated network against CS-only and SAT-only")
    _common(baselines)
    baselines.add_argument("--values", help="Comma separated N_s grid", required=False)

    validate = sub.add_parser("validate", help="Run the acceptance checks and print pass/fail")
    _common(validate)
    validate.add_argument("--no-trends", help="Skip the recorded delay trend checks", action="store_true")
    return parser


def _runner(args) -> LeoMec:
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"sim.seed={args.seed}")
    if args.trials is not None:
        overrides.append(f"sim.trials={args.trials}")
    return LeoMec(config=args.config, overrides=overrides, workers=args.workers, debug=args.debug)


def _emit(rows, mode: RunMode, out: Optional[str]) -> None:
    if out:
        print(f"Save to: {os.path.abspath(out)}")
    else:
        sys.stdout.write(csv_text(COLUMNS[mode], rows))


def _run(args) -> None:
    if args.command == "validate":
        from leomec.validation import run_validation

        results = run_validation(_runner(args), trends=not args.no_trends)
        for result in results:
            print(result.render())
        return

    runner = _runner(args)
    if args.command == "preset":
        mode = RunMode(args.run)
        _emit(runner.run_preset(args.name, mode, args.out), mode, args.out)
        return
    if args.command == "baselines":
        try:
            values = normalize_sweep_values(args.values) if args.values else None
        except ValueError as e:
            raise ConfigError("--values", str(e)) from None
        _emit(runner.run_baseline_comparison(values, args.out), RunMode.ANALYTIC, args.out)
        return

    mode = RunMode(args.command)
    if args.values and not args.sweep:
        raise ConfigError("--sweep", "--values needs --sweep")
    if args.series and not args.sweep:
        raise ConfigError("--series", "--series needs --sweep")
    if not args.sweep:
        rows = runner.run_point(mode, args.out, getattr(args, "dump", None))
        _emit(rows, mode, args.out)
        return
    if getattr(args, "dump", None):
        raise ConfigError("--dump", "per-trial dumps are only written for a single point")
    if args.values is None:
        raise ConfigError("--values", "sweep values must not be empty")
    spec = SweepSpec(
        variable=args.sweep,
        values=args.values,
        mode=mode,
        output_path=args.out,
        series=args.series,
        series_values=args.series_values or "",
        network_mode=getattr(args, "mode", None),
    )
    _emit(runner.run_sweep(spec), mode, args.out)


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the command and return the exit code.

    0 success, 1 configuration error, 2 numerical failure, 3 validation failure.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if not e.code else 1
    try:
        _run(args)
    except ValidationFailed as e:
        print(f"Validation failed: {e}", file=sys.stderr)
        return exit_code_for(e)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        return exit_code_for(e)
    except (ArithmeticError, RuntimeError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return exit_code_for(e)
    return 0


def main():
    raise SystemExit(run_cli())


if __name__ == "__main__":
    main()
