"""
Command-line front end.

    python run_solver.py <spectrum|lindstedt|kam-run|validate|uniqueness> [flags]

Exit codes: 0 success, 2 validation failure, 3 numerical failure, 4 config error.
"""
import argparse
import asyncio
import logging
import sys
from typing import Any, Dict, List, Optional

from config import apply_settings
from utils.config_file import build_settings, load_settings, render_defaults
from utils.errors import SolverError
from workflows import run_kam, run_lindstedt, run_spectrum, run_uniqueness, run_validate

logger = logging.getLogger("solver")

COMMANDS = ("spectrum", "lindstedt", "kam-run", "validate", "uniqueness")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_solver.py",
        description="Whiskered quasi-periodic tori of the Boussinesq equation and system.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="workflow to run")
    parser.add_argument("--config", metavar="PATH", help="sectioned TOML config file")
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides out_dir)")
    parser.add_argument("--threads", type=int, metavar="N", help="worker thread cap")
    parser.add_argument("--force", action="store_true", help="run kam-run even when the precheck fails")
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    parser.add_argument("--print-config", action="store_true", help="print the effective config and exit")
    parser.add_argument("--resume", metavar="PATH", help="kam-run: continue from a dumped state")
    parser.add_argument("--torus", metavar="PATH", help="validate: torus file; kam-run: seed torus file")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    if args.out:
        values["OUT_DIR"] = args.out
    if args.threads is not None:
        values["THREADS"] = args.threads
    if args.force:
        values["FORCE"] = True
    return values


def _emit(message: str) -> None:
    logger.info(message)


async def dispatch(command: str, args: argparse.Namespace) -> None:
    if command == "spectrum":
        await run_spectrum(emit=_emit)
    elif command == "lindstedt":
        await run_lindstedt(emit=_emit)
    elif command == "kam-run":
        await run_kam(seed_path=args.torus, resume=args.resume, emit=_emit)
    elif command == "validate":
        await run_validate(torus_path=args.torus, emit=_emit)
    elif command == "uniqueness":
        await run_uniqueness(emit=_emit)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        overrides = _overrides(args)
        settings = load_settings(args.config, overrides) if args.config else build_settings(overrides)
        if args.print_config:
            print(render_defaults(settings), end="")
            return 0
        if args.command is None:
            parser.error("a command is required unless --print-config is given")
        apply_settings(settings)
        asyncio.run(dispatch(args.command, args))
    except SolverError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
