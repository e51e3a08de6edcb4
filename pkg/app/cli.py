"""
Command-line entry point.

    relaxometer run --preset fig2 --out fig2.csv
    relaxometer run --preset fig4 --format json
    relaxometer run --preset fig2 --sweep beta --values 20,5,1,0.1 --jobs 4
    relaxometer run --config scenario.env --set kappa=0.02
    relaxometer export --dir out/
    relaxometer presets
    relaxometer serve --port 8000

Exit codes: 0 success, 2 configuration error, 3 relaxation not converged in a JSON report.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from app.core.config import settings
from app.core.errors import ConfigError, RelaxometerError, UnknownPresetError
from app.core.logging import configure_logging
from app.models.schemas import SweepAxis
from app.services.scenarios import (
    build_config,
    get_preset,
    list_presets,
    parse_overrides,
    report_document,
    run_scenario,
    run_sweep,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

COMMANDS = ("run", "export", "presets", "serve")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relaxometer",
        description="Secular Bloch-Redfield dynamics of two Ising-coupled qubits in ohmic baths",
    )
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="Run a scenario, a sweep or a JSON report")
    run.add_argument("--preset", help="Figure preset name (see `relaxometer presets`)")
    run.add_argument("--config", help="Flat key=value scenario file")
    run.add_argument(
        "--set",
        action="append",
        dest="overrides",
        metavar="KEY=VALUE",
        help="Override one scenario key (repeatable)",
    )
    run.add_argument("--out", help="Output file (default: stdout)")
    run.add_argument("--sweep", choices=["beta", "kappa", "delta"], help="Axis to sweep")
    run.add_argument("--values", help="Comma-separated sweep values")
    run.add_argument("--format", choices=["csv", "json"], default="csv", dest="output_format")
    run.add_argument(
        "--jobs", type=int, default=settings.jobs, help="Parallel sweep points (RELAXOMETER_JOBS)"
    )

    export = sub.add_parser("export", help="Write CSV and JSON for every figure preset")
    export.add_argument("--dir", default="out", dest="out_dir", help="Output directory")
    export.add_argument("--jobs", type=int, default=settings.jobs)

    sub.add_parser("presets", help="List figure presets as JSON")

    serve = sub.add_parser("serve", help="Serve the HTTP API with uvicorn")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _parse_values(text: str | None) -> list[float]:
    if text is None:
        raise ConfigError("--sweep needs --values", field="values")
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"values: {e}", field="values") from e
    if not values:
        raise ConfigError("sweep needs at least one value", field="values")
    return values


def _resolve_sweep(args: argparse.Namespace) -> tuple[SweepAxis, list[float]] | None:
    """Explicit --sweep wins; otherwise a sweeping preset brings its own axis."""
    if args.sweep is not None:
        return args.sweep, _parse_values(args.values)
    if args.values is not None:
        raise ConfigError("--values needs --sweep", field="sweep")
    if args.preset is not None and get_preset(args.preset).sweep is not None:
        axis, values = get_preset(args.preset).sweep  # type: ignore[misc]
        return axis, list(values)
    return None


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info("Wrote %s", path)


def cmd_run(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1", field="jobs")
    config = build_config(args.preset, args.config, parse_overrides(args.overrides))
    sweep = _resolve_sweep(args)

    if args.output_format == "json":
        text, converged = report_document(config, sweep, jobs=args.jobs)
        _write(text, args.out)
        if not converged:
            logger.warning("Relaxation did not converge within the time grid")
            return EXIT_NOT_CONVERGED
        return EXIT_OK

    if sweep is not None:
        text = run_sweep(config, sweep[0], sweep[1], jobs=args.jobs)
    else:
        text = run_scenario(config)
    _write(text, args.out)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    from app.jobs.export_figures_job import run_figure_export

    summary = run_figure_export(args.out_dir, jobs=args.jobs)
    return EXIT_OK if not summary["failed"] else EXIT_FAILURE


def cmd_presets(args: argparse.Namespace) -> int:
    sys.stdout.write(json.dumps(list_presets(), indent=2) + "\n")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port, log_level=args.log_level.lower())
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    raw = list(sys.argv[1:] if argv is None else argv)
    # `run` is the default subcommand; it goes after any leading --log-level
    index = 0
    while index < len(raw) and raw[index].startswith("--log-level"):
        index += 1 if "=" in raw[index] else 2
    index = min(index, len(raw))
    if index == len(raw) or raw[index] not in (*COMMANDS, "-h", "--help"):
        raw.insert(index, "run")

    args = build_parser().parse_args(raw)
    configure_logging(args.log_level)

    handlers = {
        "run": cmd_run,
        "export": cmd_export,
        "presets": cmd_presets,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, UnknownPresetError) as e:
        field = getattr(e, "field", None)
        print(f"error: {e}" if field is None else f"error [{field}]: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except RelaxometerError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
