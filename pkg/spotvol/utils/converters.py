"""Converters from harness options to the domain objects shared by several commands."""
from __future__ import annotations

import argparse
import datetime
import numpy as np

from typing import TYPE_CHECKING

from spotvol.constants import DEFAULT_GRID_STEP, SESSION_CLOSE, SESSION_OPEN, SESSION_SECONDS
from spotvol.models.exceptions import ConfigurationError
from spotvol.models.paths import PricePath
from spotvol.models.ticks import SessionSpec
from spotvol.utils.config import as_float, as_str, list_of
from spotvol.utils.fourier import interior_grid, validate_grid
from spotvol.utils.plugins import PLUGIN_KEYS, parse_overrides

if TYPE_CHECKING:
    from spotvol.harness import Harness

def add_session_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--session-open", help=f"opening time of tick files, defaults to {SESSION_OPEN}")
    parser.add_argument("--session-close", help=f"closing time of tick files, defaults to {SESSION_CLOSE}")

def add_plugin_arguments(parser: argparse.ArgumentParser) -> None:
    for key in PLUGIN_KEYS:
        parser.add_argument(f"--{key}", type=float, help=f"use this value instead of the {key} plug-in estimate")

def session_option(harness: Harness) -> SessionSpec:
    """Converts the session options into the tick file clock."""
    try:
        return SessionSpec(
            open=datetime.time.fromisoformat(harness.option("session_open", as_str, SESSION_OPEN)),
            close=datetime.time.fromisoformat(harness.option("session_close", as_str, SESSION_CLOSE)),
        )
    except ValueError as e:
        raise ConfigurationError(f"session times must look like HH:MM:SS, {e}")

def plugin_overrides(harness: Harness) -> dict[str, float]:
    return parse_overrides({key: harness.option(key, as_float, None) for key in PLUGIN_KEYS})

def evaluation_grid(harness: Harness, path: PricePath) -> np.ndarray:
    """Returns the explicit --grid points, or every --grid-step seconds inside the session."""
    explicit = harness.option("grid", list_of(as_float), None)
    if explicit:
        return validate_grid(explicit, path.horizon)
    step = harness.option("grid_step", as_float, DEFAULT_GRID_STEP)
    return interior_grid(path.horizon, step * path.day_length / SESSION_SECONDS)
