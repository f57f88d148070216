from __future__ import annotations

import json
import os

from dataclasses import dataclass, field
from typing import Any

from spotvol.constants import MANIFEST_FILE_NAME
from spotvol.models.exceptions import ConfigurationError
from spotvol.utils.file import file_digest

@dataclass
class RunManifest:
    """Everything needed to repeat one command run and check its outputs.

    files maps each output file name, relative to the output directory, to its
    SHA-256 digest. details holds per-path facts such as derived noise variances."""
    command: str
    config: dict[str, Any]
    seed: int | None
    version: str
    files: dict[str, str] = field(default_factory=dict)
    details: dict[str, Any] = field(default_factory=dict)

    def record(self, directory: str, name: str) -> None:
        self.files[name] = file_digest(os.path.join(directory, name))

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "files": dict(sorted(self.files.items())),
            "details": self.details,
        }

    def write(self, directory: str) -> str:
        path = os.path.join(directory, MANIFEST_FILE_NAME)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True, default=str)
            f.write("\n")
        return path

    @classmethod
    def from_file(cls, path: str) -> RunManifest:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
        try:
            return cls(
                command=data["command"], config=data["config"], seed=data["seed"],
                version=data["version"], files=data.get("files", {}), details=data.get("details", {})
            )
        except (KeyError, TypeError):
            raise ConfigurationError(f"{path!r} is not a run manifest")

    def verify(self, directory: str) -> list[str]:
        """Returns the names of recorded files whose digest no longer matches."""
        mismatched: list[str] = []
        for name, digest in self.files.items():
            target = os.path.join(directory, name)
            if not os.path.isfile(target) or file_digest(target) != digest:
                mismatched.append(name)
        return mismatched
