"""Command-line client.

Thin by design: parses flags and the config file, hands a RunConfig to
the runner, writes the returned artifacts, and maps outcomes onto the
exit-code contract:

    0  success, all checks passed
    1  a verification check failed
    2  configuration error
    3  numerical failure
    4  blow-up guard tripped

``dwlab serve`` starts the HTTP service wrapping the same runner.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import io
from .config import RunConfig, parse_config_text
from .errors import BlowUpError, ConfigError, DwlabError
from .runner import RunResult, run_analyze, run_evolve, run_spectrum, run_verify

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_BLOWUP = 4


def _add_common(parser: argparse.ArgumentParser, config_required: bool) -> None:
    parser.add_argument("--config", required=config_required, metavar="PATH",
                        help="run configuration file")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--seed", type=int, metavar="N", help="RNG seed (default 42)")
    parser.add_argument("--threads", type=int, metavar="N",
                        help="worker threads for sweeps (default: DWLAB_THREADS or 1)")
    parser.add_argument("--format", choices=("csv", "json", "both"),
                        help="artifact formats to write")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dwlab",
        description="Numerical laboratory for strongly damped wave systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="assemble a model and verify its constants")
    _add_common(p, config_required=True)

    p = sub.add_parser("spectrum", help="generator spectrum and resolvent sweep")
    _add_common(p, config_required=True)

    p = sub.add_parser("evolve", help="propagate a configured problem in time")
    _add_common(p, config_required=True)

    p = sub.add_parser("verify", help="run the full verification suite")
    _add_common(p, config_required=False)
    p.add_argument("--force-fail", metavar="CHECK",
                   help="mark one named check as failed (negative control)")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as handle:
                cfg = parse_config_text(handle.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
    else:
        cfg = RunConfig()
    threads = args.threads
    if threads is None:
        env = os.environ.get("DWLAB_THREADS")
        if env is not None:
            try:
                threads = int(env)
            except ValueError as exc:
                raise ConfigError(f"DWLAB_THREADS must be an integer, got {env!r}") from exc
    return cfg.with_overrides(seed=args.seed, threads=threads, out=args.out,
                              fmt=args.format)


def _write_artifacts(result: RunResult, cfg: RunConfig) -> None:
    fmt = cfg.output.format
    for name, text in result.artifacts.items():
        if fmt == "csv" and not name.endswith(".csv"):
            continue
        if fmt == "json" and not name.endswith(".json"):
            continue
        io.write_text_atomic(os.path.join(cfg.output.directory, name), text)


def _print_report(result: RunResult) -> None:
    for check in result.report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status}  {check.name}")
    if result.report.checks:
        overall = "PASS" if result.report.passed else "FAIL"
        print(f"overall: {overall}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    try:
        cfg = _load_config(args)
        if args.command == "analyze":
            result = run_analyze(cfg)
        elif args.command == "spectrum":
            result = run_spectrum(cfg)
        elif args.command == "evolve":
            result = run_evolve(cfg)
        else:
            result = run_verify(cfg, force_fail=args.force_fail)
    except ConfigError as exc:
        location = f" (line {exc.line})" if exc.line else ""
        key = f" [{exc.key}]" if exc.key else ""
        print(f"config error{location}{key}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowUpError as exc:
        print(f"blow-up guard: {exc}; last finite time t = {exc.last_time:.6g}",
              file=sys.stderr)
        return EXIT_BLOWUP
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DwlabError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    _write_artifacts(result, cfg)
    _print_report(result)
    if result.report.checks and not result.report.passed:
        failing = ", ".join(result.report.failing())
        print(f"failed checks: {failing}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
