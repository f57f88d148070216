import time

from dateutil.relativedelta import relativedelta

UNITS = ("days", "hours", "minutes", "seconds")

def _stringify_time_unit(value: float, unit: str) -> str:
    """
    Returns a string to represent a value and time unit, ensuring that it uses the right plural form of the unit.
    >>> _stringify_time_unit(1, "seconds")
    "1 second"
    >>> _stringify_time_unit(2.5, "seconds")
    "2.5 seconds"
    """
    if value == 1:
        return f"1 {unit[:-1]}"
    return f"{value:g} {unit}"

def humanize(seconds: float, max_units: int = 2) -> str:
    """Returns a human-readable version of a duration in seconds.

    Durations under a minute keep one decimal. Longer ones are split into whole
    days, hours, minutes and seconds, of which the max_units largest nonzero
    ones are shown."""
    if max_units <= 0:
        raise ValueError("max_units must be positive")

    seconds = abs(float(seconds))
    if seconds < 60:
        return _stringify_time_unit(round(seconds, 1), "seconds")

    delta = relativedelta(seconds=int(seconds)).normalized()
    parts = [_stringify_time_unit(getattr(delta, unit), unit) for unit in UNITS if getattr(delta, unit)]
    parts = parts[:max_units]
    if len(parts) > 1:
        return f"{', '.join(parts[:-1])} and {parts[-1]}"
    return parts[0]

class Stopwatch:
    """Measures the wall time of a command run."""

    def __init__(self) -> None:
        self.__started = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.__started

    def humanized(self) -> str:
        return humanize(self.elapsed)
