from __future__ import annotations

import numpy as np

from dataclasses import dataclass
from typing import TYPE_CHECKING

from spotvol.models.exceptions import InvalidGrid, InvalidPricePath, NonFiniteResult

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    FloatArray = NDArray[np.float64]
    ComplexArray = NDArray[np.complex128]

def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array

class PricePath:
    """Observation times and log-prices of one session.

    Times are measured from the session open in any unit; the horizon is the
    length of the session in that same unit, and day_length says how many of
    those units make up one day."""

    if TYPE_CHECKING:
        __timestamps: FloatArray
        __logprices: FloatArray
        __horizon: float
        __day_length: float

    def __init__(
        self,
        timestamps: ArrayLike,
        logprices: ArrayLike,
        horizon: float | None = None,
        *,
        day_length: float | None = None
    ) -> None:
        times = np.array(timestamps, dtype=float)
        prices = np.array(logprices, dtype=float)

        if times.ndim != 1 or prices.ndim != 1:
            raise InvalidPricePath("timestamps and log-prices must be one-dimensional")
        if times.size != prices.size:
            raise InvalidPricePath(
                f"got {times.size} timestamps but {prices.size} log-prices"
            )
        if times.size < 2:
            raise InvalidPricePath("a price path needs at least two observations")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(prices))):
            raise InvalidPricePath("timestamps and log-prices must be finite")
        if times[0] != 0:
            raise InvalidPricePath(f"first timestamp must be 0, got {times[0]:g}")
        if np.any(np.diff(times) <= 0):
            first = int(np.argmax(np.diff(times) <= 0)) + 1
            raise InvalidPricePath(f"timestamps must be strictly increasing, offending index {first}")

        if horizon is None:
            horizon = float(times[-1])
        if not horizon > 0:
            raise InvalidPricePath(f"horizon must be positive, got {horizon:g}")
        if times[-1] > horizon * (1 + 1e-12):
            raise InvalidPricePath(
                f"last timestamp {times[-1]:g} lies beyond the horizon {horizon:g}"
            )
        if day_length is None:
            day_length = horizon
        if not day_length > 0:
            raise InvalidPricePath(f"day length must be positive, got {day_length:g}")

        self.__timestamps = _frozen(times)
        self.__logprices = _frozen(prices)
        self.__horizon = float(horizon)
        self.__day_length = float(day_length)

    def __repr__(self) -> str:
        return f"<PricePath n={self.n} horizon={self.__horizon:g}>"

    @property
    def timestamps(self) -> FloatArray:
        """Returns the observation times."""
        return self.__timestamps

    @property
    def logprices(self) -> FloatArray:
        """Returns the log-prices."""
        return self.__logprices

    @property
    def horizon(self) -> float:
        """Returns the session length in time units."""
        return self.__horizon

    @property
    def day_length(self) -> float:
        """Returns the number of time units in one day."""
        return self.__day_length

    @property
    def horizon_days(self) -> float:
        """Returns the session length in days."""
        return self.__horizon / self.__day_length

    @property
    def n(self) -> int:
        """Returns the number of increments."""
        return self.__timestamps.size - 1

    @property
    def increments(self) -> FloatArray:
        """Returns the log-price increments."""
        return np.diff(self.__logprices)

    def is_equispaced(self, rtol: float = 1e-9) -> bool:
        """Returns true if the observations sit on the uniform grid spanning the horizon."""
        expected = np.linspace(0.0, self.__horizon, self.n + 1)
        return bool(np.allclose(self.__timestamps, expected, rtol=0.0, atol=rtol * self.__horizon))

    def with_logprices(self, logprices: ArrayLike) -> PricePath:
        """Returns a path on the same times carrying different log-prices."""
        return PricePath(self.__timestamps, logprices, self.__horizon, day_length=self.__day_length)

class FourierCoeffs:
    """Complex coefficients indexed by integer frequencies -order..order."""

    def __init__(self, order: int, values: ArrayLike) -> None:
        coefficients = np.array(values, dtype=complex)
        if order < 0:
            raise InvalidGrid(f"coefficient order must be nonnegative, got {order}")
        if coefficients.shape != (2 * order + 1,):
            raise InvalidGrid(
                f"order {order} needs {2 * order + 1} coefficients, got {coefficients.shape}"
            )
        if not np.all(np.isfinite(coefficients)):
            raise NonFiniteResult("Fourier coefficients")
        self.__order = order
        self.__values = _frozen(coefficients)

    def __repr__(self) -> str:
        return f"<FourierCoeffs order={self.__order}>"

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.__order:
            raise IndexError(f"frequency {k} is outside -{self.__order}..{self.__order}")
        return complex(self.__values[k + self.__order])

    @property
    def order(self) -> int:
        """Returns the largest frequency held."""
        return self.__order

    @property
    def values(self) -> ComplexArray:
        """Returns the coefficients ordered from -order to order."""
        return self.__values

    @property
    def frequencies(self) -> NDArray[np.int64]:
        """Returns the integer frequencies matching values."""
        return np.arange(-self.__order, self.__order + 1)

    def truncated(self, order: int) -> FourierCoeffs:
        """Returns the coefficients up to the given order."""
        if order > self.__order:
            raise InvalidGrid(f"cannot truncate order {self.__order} coefficients to order {order}")
        start = self.__order - order
        return FourierCoeffs(order, self.__values[start:start + 2 * order + 1])

    def asymmetry(self) -> float:
        """Returns the largest deviation from conjugate symmetry."""
        return float(np.max(np.abs(self.__values - np.conj(self.__values[::-1]))))

class SpotVolPath:
    """Spot variance values on an evaluation grid, in variance per day.

    Negative values are kept as computed; see negative_mask and truncated."""

    def __init__(
        self,
        grid: ArrayLike,
        values: ArrayLike,
        horizon: float,
        *,
        day_length: float | None = None
    ) -> None:
        points = np.array(grid, dtype=float)
        estimates = np.array(values, dtype=float)
        if points.ndim != 1 or points.shape != estimates.shape:
            raise InvalidGrid("grid and values must be one-dimensional arrays of equal length")
        if points.size == 0:
            raise InvalidGrid("spot variance path has an empty grid")
        if np.any(np.diff(points) <= 0):
            raise InvalidGrid("grid must be strictly increasing")
        if points[0] < 0 or points[-1] > horizon:
            raise InvalidGrid(f"grid must lie inside [0, {horizon:g}]")
        if not np.all(np.isfinite(estimates)):
            raise NonFiniteResult("spot variance path")
        self.__grid = _frozen(points)
        self.__values = _frozen(estimates)
        self.__horizon = float(horizon)
        self.__day_length = float(day_length if day_length is not None else horizon)

    def __repr__(self) -> str:
        return f"<SpotVolPath points={self.__grid.size} horizon={self.__horizon:g}>"

    def __len__(self) -> int:
        return self.__grid.size

    @property
    def grid(self) -> FloatArray:
        return self.__grid

    @property
    def values(self) -> FloatArray:
        return self.__values

    @property
    def horizon(self) -> float:
        return self.__horizon

    @property
    def day_length(self) -> float:
        return self.__day_length

    @property
    def horizon_days(self) -> float:
        return self.__horizon / self.__day_length

    @property
    def negative_mask(self) -> np.ndarray:
        """Returns a boolean mask of the negative estimates."""
        return self.__values < 0

    def truncated(self) -> SpotVolPath:
        """Returns a copy with negative estimates replaced by 0."""
        return SpotVolPath(
            self.__grid, np.maximum(self.__values, 0.0), self.__horizon, day_length=self.__day_length
        )

    def sample(self, grid: ArrayLike) -> SpotVolPath:
        """Returns the path linearly interpolated onto another grid."""
        points = np.asarray(grid, dtype=float)
        if points.size and (points[0] < self.__grid[0] or points[-1] > self.__grid[-1]):
            raise InvalidGrid("cannot sample a spot variance path outside of its grid")
        return SpotVolPath(
            points, np.interp(points, self.__grid, self.__values),
            self.__horizon, day_length=self.__day_length
        )

@dataclass(frozen=True)
class SimulatedPath:
    """One simulated session: clean and noisy prices with the true spot variance."""
    model: str
    prices: PricePath
    noisy_prices: PricePath
    true_var: SpotVolPath
    seed: int
    zeta: float = 0.0
    xi: float = 0.0
    truncated_share: float = 0.0

    def __post_init__(self):
        if not np.array_equal(self.prices.timestamps, self.noisy_prices.timestamps):
            raise InvalidPricePath("clean and noisy prices must share timestamps")
        if not np.array_equal(self.prices.timestamps, self.true_var.grid):
            raise InvalidPricePath("true variance must live on the price timestamps")
