from __future__ import annotations

import argparse
import asyncio
import importlib
import logging
import os
import pandas as pd

from concurrent.futures import ProcessPoolExecutor
from typing import TYPE_CHECKING, Any, Callable, Iterable, Mapping, NamedTuple, TypeVar

from spotvol.models.exceptions import ConfigurationError
from spotvol.models.manifest import RunManifest
from spotvol.utils import run_in_executor
from spotvol.utils.config import coerce_option, normalize_key
from spotvol.utils.file import resolve_output_directory, write_table
from spotvol.utils.time import Stopwatch

if TYPE_CHECKING:
    from spotvol.services.error_handler import ErrorHandlingService

logger = logging.getLogger("SpotVol")

T = TypeVar("T")

class VersionInfo(NamedTuple):
    major: int
    minor: int
    micro: int
    commit_id: str


__VERSION__ = VersionInfo(major=1, minor=0, micro=0, commit_id=os.environ.get('GIT_COMMIT', ''))

# Keys that steer the harness itself and never reach a manifest
_RUNTIME_KEYS = ("config", "jobs", "debug", "quiet", "command")

class Command:
    """Base class of a command extension.

    Subclasses set name and help, declare their flags in add_arguments and do
    their work in run, reading options through the harness."""
    name: str = ""
    help: str = ""

    def __init__(self, harness: Harness):
        super().__init__()
        self.harness = harness

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        pass

    async def run(self) -> None:
        raise NotImplementedError

class Harness:
    """This class represents the runtime of one spotvol invocation."""

    def __init__(self):
        # Command extensions, each module exposes an async setup(harness)
        self._extensions_to_load = [
            'commands.simulate',
            'commands.estimate',
            'commands.select',
            'commands.benchmark',
            'commands.compare',
            'commands.empirical',
            'commands.clt',
            'commands.rate',
            'commands.kernel_check',

            # Load the error handler last
            'services.error_handler',
        ]

        self.version_info = __VERSION__
        self.commands: dict[str, Command] = {}
        self.error_handler: ErrorHandlingService | None = None

        self.config: dict[str, Any] = {}
        self.resolved: dict[str, Any] = {}
        self.jobs = 1
        self.debugging = False

        self.__executor: ProcessPoolExecutor | None = None
        self.__manifest: RunManifest | None = None
        self.__output_dir: str | None = None

    @property
    def version(self) -> str:
        """Returns a short version string."""
        return f"{self.version_info.major}.{self.version_info.minor}.{self.version_info.micro}"

    @property
    def full_version(self) -> str:
        """Returns the version string with the commit it was built from, if known."""
        if self.version_info.commit_id:
            return f"{self.version} ({self.version_info.commit_id[:7]})"
        return self.version

    def add_command(self, command: Command) -> None:
        if command.name in self.commands:
            raise ConfigurationError(f"command {command.name!r} is registered twice")
        self.commands[command.name] = command

    async def load_all_extensions(self):
        """Attempts to load all extensions as defined in harness object."""
        for ext in self._extensions_to_load:
            logger.debug(f"Loading {ext}.")
            try:
                module = importlib.import_module(f"spotvol.{ext}")
                await module.setup(self)
                logger.debug(f"Successfully loaded {ext}.")
            except Exception:
                logger.exception(f"Failed to load {ext}.")

    def configure(self, config: Mapping[str, Any], *, jobs: int = 1, debugging: bool = False) -> None:
        """Sets the merged file and flag values; flags set to None do not override the file."""
        self.config = {normalize_key(k): v for k, v in config.items() if v is not None and normalize_key(k) not in _RUNTIME_KEYS}
        if jobs < 1:
            raise ConfigurationError(f"jobs must be at least 1, got {jobs}")
        self.jobs = jobs
        self.debugging = debugging
        self.resolved = {}
        self.__output_dir = None

    def option(self, name: str, coerce: Callable[[Any], T], default: T | None = None, *, required: bool = False) -> T:
        """Returns the resolved value of an option and records it for the manifest."""
        key = normalize_key(name)
        if key in self.config and self.config[key] != "":
            value = coerce_option(key, self.config[key], coerce)
        elif required:
            raise ConfigurationError(f"option --{key.replace('_', '-')} is required")
        else:
            value = default
        self.resolved[key] = value
        return value  # type: ignore[return-value]

    def unused_options(self) -> list[str]:
        return sorted(set(self.config) - set(self.resolved) - {"out"})

    @property
    def output_dir(self) -> str:
        if self.__output_dir is None:
            # Not recorded, so replaying a manifest writes where it is told to
            self.__output_dir = resolve_output_directory(self.config.get("out") or None)
        return self.__output_dir

    def output_path(self, name: str) -> str:
        path = os.path.join(self.output_dir, name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        return path

    @property
    def manifest(self) -> RunManifest:
        if self.__manifest is None:
            raise RuntimeError("no command is running")
        return self.__manifest

    def record_file(self, name: str) -> None:
        """Adds the digest of an output file to the manifest."""
        self.manifest.record(self.output_dir, name)

    def write_table(self, name: str, frame: pd.DataFrame, header: Mapping[str, object] | None = None) -> str:
        """Writes a result table with the run's configuration in its header block."""
        block: dict[str, object] = {"command": self.manifest.command, "version": self.version}
        block.update(sorted(self.resolved.items()))
        block.update(header or {})
        path = write_table(self.output_path(name), frame, block)
        self.record_file(name)
        return path

    def _get_executor(self) -> ProcessPoolExecutor:
        if self.__executor is None:
            self.__executor = ProcessPoolExecutor(max_workers=self.jobs)
        return self.__executor

    async def map(self, func: Callable[..., T], items: Iterable[tuple[Any, ...]], *, label: str = "paths") -> list[T]:
        """Calls func on every argument tuple and returns the results in input order.

        Runs inline with one job, otherwise in a pool of worker processes, in
        which case func must be a module level function."""
        tasks = list(items)
        total = len(tasks)
        step = max(total // 10, 1)
        done = 0

        def progress():
            nonlocal done
            done += 1
            if done % step == 0 or done == total:
                logger.info(f"Finished {done} of {total} {label}")

        if self.jobs == 1 or total < 2:
            results: list[T] = []
            for args in tasks:
                results.append(func(*args))
                progress()
                # Lets a pending cancellation land between tasks
                await asyncio.sleep(0)
            return results

        executor = self._get_executor()

        async def run_one(args: tuple[Any, ...]) -> T:
            result = await run_in_executor(func, *args, executor=executor)
            progress()
            return result

        return list(await asyncio.gather(*(run_one(args) for args in tasks)))

    async def run(self, name: str) -> RunManifest:
        """Runs one command and writes its manifest next to its outputs."""
        try:
            command = self.commands[name]
        except KeyError:
            raise ConfigurationError(f"unknown command {name!r}, expected one of {', '.join(sorted(self.commands))}")

        self.__manifest = RunManifest(command=name, config={}, seed=None, version=self.full_version)
        stopwatch = Stopwatch()
        logger.info(f"Running {name} with {self.jobs} job(s)")
        await command.run()

        unused = self.unused_options()
        if unused:
            logger.warning(f"Ignored options not used by {name}: {', '.join(unused)}")
        manifest = self.manifest
        manifest.config = dict(sorted(self.resolved.items()))
        manifest.seed = self.resolved.get("seed")
        manifest.write(self.output_dir)
        logger.info(f"Finished {name} in {stopwatch.humanized()}, {len(manifest.files)} file(s) in {self.output_dir}")
        return manifest

    def dispatch_error(self, error: BaseException) -> int:
        """Reports an error through the error handling service and returns the exit code."""
        if self.error_handler is None:
            logger.error(f"{error.__class__.__name__}: {error}")
            return 1
        return self.error_handler.handle(error)

    async def close(self) -> None:
        if self.__executor is not None:
            self.__executor.shutdown(wait=True, cancel_futures=True)
            self.__executor = None
