import hashlib
import logging
import os
import pandas as pd

from typing import Mapping

from spotvol.constants import DEFAULT_OUTPUT_PATH, OUTPUT_DIR_ENV
from spotvol.models.exceptions import OutputDirectoryError
from spotvol.utils.config import format_value

logger = logging.getLogger("SpotVol")

HEADER_PREFIX = "# "

def resolve_output_directory(path: str | None = None) -> str:
    """Returns the output directory, creating it when missing.

    Falls back to the SPOTVOL_OUTPUT_DIR environment variable and then to ./output."""
    directory = path or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_PATH
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as e:
        raise OutputDirectoryError(directory, e.strerror)
    if not os.access(directory, os.W_OK):
        raise OutputDirectoryError(directory)
    return os.path.abspath(directory)

def write_table(
    path: str, frame: pd.DataFrame, header: Mapping[str, object] | None = None, *, float_format: str = "%.10g"
) -> str:
    """Writes a CSV preceded by `# key: value` lines and returns the path."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            for key, value in (header or {}).items():
                f.write(f"{HEADER_PREFIX}{key}: {format_value(value)}\n")
            frame.to_csv(f, index=False, float_format=float_format)
    except OSError as e:
        raise OutputDirectoryError(os.path.dirname(path) or ".", e.strerror)
    logger.debug(f"Wrote {len(frame)} rows to {path}")
    return path

def read_header(path: str) -> dict[str, str]:
    """Returns the `# key: value` block at the top of a file written by write_table."""
    header: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith(HEADER_PREFIX.strip()):
                break
            key, sep, value = line[1:].partition(":")
            if sep:
                header[key.strip()] = value.strip()
    return header

def file_digest(path: str) -> str:
    """Returns the SHA-256 hex digest of a file."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
