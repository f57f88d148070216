import asyncio
import contextlib
import os
import signal
import sys
import logging

from argparse import ArgumentParser
from typing import Sequence

# Allows us to not set the Python path
sys.path.append(os.getcwd())

from spotvol.harness import Harness # noqa: E402
from spotvol.utils.config import as_bool, as_int, coerce_option, load_config_file # noqa: E402

# Setup SpotVol level logging
logger = logging.getLogger("SpotVol")
logger.setLevel(logging.INFO)
ch = logging.StreamHandler()
formatter = logging.Formatter('[%(asctime)s %(name)s:%(levelname)s]: %(message)s', "%Y-%m-%d %H:%M:%S")
ch.setFormatter(formatter)
logger.addHandler(ch)

def build_parser(harness: Harness) -> ArgumentParser:
    """Returns the argument parser with one subcommand per loaded command."""
    common = ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="specifies a key = value file, or a manifest.json to repeat a run")
    common.add_argument("-j", "--jobs", type=int, help="number of worker processes for path-level work")
    common.add_argument("-o", "--out", help="output directory, defaults to $SPOTVOL_OUTPUT_DIR or ./output")
    common.add_argument("--debug", action="store_true", default=None, help="log at DEBUG level and print tracebacks")
    common.add_argument("--quiet", action="store_true", default=None, help="only log warnings and errors")

    arg_parser = ArgumentParser(prog="spotvol", description="Fourier spot volatility estimation experiments")
    arg_parser.add_argument("--version", action="version", version=f"spotvol {harness.full_version}")
    subparsers = arg_parser.add_subparsers(dest="command", metavar="command", required=True)
    for name, command in harness.commands.items():
        parser = subparsers.add_parser(name, parents=[common], help=command.help, description=command.help)
        command.add_arguments(parser)
    return arg_parser

def set_log_level(debugging: bool, quiet: bool) -> None:
    if debugging:
        logger.setLevel(logging.DEBUG)
    elif quiet:
        logger.setLevel(logging.WARNING)
    else:
        logger.setLevel(logging.INFO)

async def main(argv: Sequence[str] | None = None) -> int:  # noqa: C901
    harness = Harness()
    await harness.load_all_extensions()

    arg_parser = build_parser(harness)
    args = arg_parser.parse_args(argv)

    try:
        file_values: dict[str, str] = {}
        if args.config:
            file_values = load_config_file(args.config)
        debugging = bool(args.debug) or coerce_option("debug", file_values.get("debug", False), as_bool)
        quiet = bool(args.quiet) or coerce_option("quiet", file_values.get("quiet", False), as_bool)
        set_log_level(debugging, quiet)
        jobs = args.jobs if args.jobs is not None else coerce_option("jobs", file_values.get("jobs", 1), as_int)

        config: dict[str, object] = dict(file_values)
        config.update({key: value for key, value in vars(args).items() if value is not None})
        harness.configure(config, jobs=jobs, debugging=debugging)
        logger.debug(f"spotvol {harness.full_version} with configuration {harness.config}")
    except Exception as e:
        return harness.dispatch_error(e)

    # Cancel the running command on SIGTERM
    task = asyncio.current_task()
    loop = asyncio.get_running_loop()
    if task is not None:
        with contextlib.suppress(NotImplementedError, RuntimeError):
            loop.add_signal_handler(signal.SIGTERM, task.cancel)

    try:
        await harness.run(args.command)
    except asyncio.CancelledError as e:
        logger.warning(f"{args.command} was cancelled")
        return harness.dispatch_error(e)
    except Exception as e:
        return harness.dispatch_error(e)
    finally:
        with contextlib.suppress(NotImplementedError, RuntimeError):
            loop.remove_signal_handler(signal.SIGTERM)
        await harness.close()
    return 0

def run() -> None:
    """Console entry point."""
    try:
        code = asyncio.run(main())
    except KeyboardInterrupt:
        code = 1
    sys.exit(code)

if __name__ == "__main__":
    run()
