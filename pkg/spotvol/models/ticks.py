from __future__ import annotations

import datetime
import numpy as np

from dataclasses import dataclass, field

from spotvol.constants import SESSION_CLOSE, SESSION_OPEN
from spotvol.models.exceptions import InvalidParameter, MalformedTickData

def _clock_seconds(value: datetime.time) -> float:
    return value.hour * 3600 + value.minute * 60 + value.second + value.microsecond / 1e6

@dataclass(frozen=True)
class RejectedRow:
    line: int
    reason: str

@dataclass(frozen=True)
class TickRecords:
    """Trades of one session, in seconds since the open and raw price levels."""
    timestamps: np.ndarray
    prices: np.ndarray
    rejected: tuple[RejectedRow, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.timestamps.shape != self.prices.shape or self.timestamps.ndim != 1:
            raise MalformedTickData("timestamps and prices must be one-dimensional arrays of equal length")
        if np.any(self.prices <= 0):
            raise MalformedTickData("tick prices must be positive")

    def __len__(self) -> int:
        return self.timestamps.size

@dataclass(frozen=True)
class SessionSpec:
    """Trading session clock and sampling step in seconds."""
    open: datetime.time = datetime.time.fromisoformat(SESSION_OPEN)
    close: datetime.time = datetime.time.fromisoformat(SESSION_CLOSE)
    step: float = 1.0

    def __post_init__(self):
        if not self.close > self.open:
            raise InvalidParameter("close", self.close.isoformat(), f"must be after the open {self.open.isoformat()}")
        if not self.step > 0:
            raise InvalidParameter("step", self.step, "must be positive")

    @property
    def seconds(self) -> float:
        """Returns the session length in seconds."""
        return _clock_seconds(self.close) - _clock_seconds(self.open)

    @property
    def open_seconds(self) -> float:
        """Returns the open as seconds since midnight."""
        return _clock_seconds(self.open)

    @property
    def expected_n(self) -> int:
        """Returns the number of increments of the sampling grid."""
        return int(round(self.seconds / self.step))

    def grid(self) -> np.ndarray:
        """Returns the sampling grid 0, step, ..., seconds."""
        return self.step * np.arange(self.expected_n + 1)
