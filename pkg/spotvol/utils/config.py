"""Plain text `key = value` configuration files and value coercion."""
from __future__ import annotations

import datetime
import json
import logging
import os

from dateutil.rrule import DAILY, FR, MO, TH, TU, WE, rrule
from typing import Any, Callable, TypeVar

from spotvol.models.dynamics import ModelParams, model_params
from spotvol.models.exceptions import ConfigurationError

logger = logging.getLogger("SpotVol")

T = TypeVar("T")

TRUE_VALUES = ("1", "true", "yes", "on")
FALSE_VALUES = ("0", "false", "no", "off")

def normalize_key(key: str) -> str:
    """Returns the key in the attribute form used by argparse, dashes become underscores.

    Keys are case sensitive, N and n are different options."""
    return key.strip().replace("-", "_")

def _load_manifest_config(path: str | os.PathLike[str]) -> dict[str, str]:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{os.fspath(path)!r} is not a valid manifest: {e}")
    config = data.get("config") if isinstance(data, dict) else None
    if not isinstance(config, dict):
        raise ConfigurationError(f"{os.fspath(path)!r} holds no resolved configuration")
    return {normalize_key(str(key)): format_value(value) for key, value in config.items()}

def load_config_file(path: str | os.PathLike[str]) -> dict[str, str]:
    """Loads configuration values from the specified file.

    Lines look like `key = value`; blank lines and text after # are ignored. A
    run manifest in JSON form is accepted too, its resolved configuration is
    returned so the run can be repeated."""
    if not os.path.isfile(path):
        raise ConfigurationError(f"configuration file {os.fspath(path)!r} does not exist")
    if os.fspath(path).endswith(".json"):
        logger.info(f"Loading configuration from manifest {os.fspath(path)}")
        return _load_manifest_config(path)

    logger.info(f"Loading configuration from {os.fspath(path)} file")
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, sep, value = text.partition("=")
            if not sep or not key.strip():
                raise ConfigurationError(f"line {number} of {os.fspath(path)!r} is not of the form key = value")
            name = normalize_key(key)
            if name in values:
                logger.warning(f"Configuration key {name!r} is set twice, line {number} wins")
            values[name] = value.strip()
    return values

def format_value(value: object) -> str:
    """Renders a resolved value back into the file syntax."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(v) for v in value)
    if value is None:
        return ""
    return str(value)

# Coercers turn raw file strings and already-typed CLI values into one type

def as_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in TRUE_VALUES:
        return True
    if text in FALSE_VALUES:
        return False
    raise ValueError(f"{value!r} is not a boolean")

def as_int(value: Any) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    number = float(str(value).strip())
    if not number.is_integer():
        raise ValueError(f"{value!r} is not an integer")
    return int(number)

def as_float(value: Any) -> float:
    return float(str(value).strip()) if not isinstance(value, (int, float)) else float(value)

def as_str(value: Any) -> str:
    return str(value).strip()

def list_of(coerce: Callable[[Any], T]) -> Callable[[Any], list[T]]:
    """Returns a coercer of comma separated lists."""
    def parse(value: Any) -> list[T]:
        if isinstance(value, (list, tuple)):
            items = list(value)
        else:
            items = [item for item in str(value).split(",") if item.strip()]
        return [coerce(item) for item in items]
    return parse

def as_range(value: Any) -> list[float]:
    """Parses `start:stop:step` into its inclusive points, or a comma separated list."""
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    text = str(value).strip()
    if ":" not in text:
        return list_of(as_float)(text)
    parts = [float(part) for part in text.split(":")]
    if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
        raise ValueError(f"{value!r} is not a range start:stop:step")
    start, stop, step = parts
    count = int((stop - start) / step + 1e-9) + 1
    return [round(start + i * step, 12) for i in range(count)]

def coerce_option(name: str, value: Any, coerce: Callable[[Any], T]) -> T:
    """Applies a coercer, turning failures into ConfigurationError."""
    try:
        return coerce(value)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"option {name.replace('_', '-')!r} got {value!r}: {e}")

def load_model_params(model: str, path: str | None = None) -> ModelParams:
    """Returns the parameters of a model, overridden by a key = value file when given."""
    overrides = load_config_file(path) if path else {}
    return model_params(model, overrides)

def business_days(start: datetime.date, count: int) -> list[datetime.date]:
    """Returns count weekdays from start onwards."""
    rule = rrule(DAILY, dtstart=datetime.datetime.combine(start, datetime.time()), byweekday=(MO, TU, WE, TH, FR), count=count)
    return [day.date() for day in rule]
