"""Rescaled Dirichlet and Fejér kernels and their derivatives."""
from __future__ import annotations

import math
import numpy as np

from typing import TYPE_CHECKING, overload

from spotvol.constants import SINGULAR_THRESHOLD
from spotvol.models.exceptions import InvalidParameter

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

# Rows of the frequency by point table built per chunk
_CHUNK = 4096

def check_order(order: int, name: str = "order") -> int:
    """Returns the order as an int, raising if it is not a nonnegative integer."""
    if int(order) != order or order < 0:
        raise InvalidParameter(name, order, "must be a nonnegative integer")
    return int(order)

def _cosine_series(x: NDArray[np.float64], weights: NDArray[np.float64], derivative: int) -> NDArray[np.float64]:
    """Returns the derivative of sum_k weights[k-1] cos(k x), k = 1..len(weights)."""
    out = np.zeros_like(x)
    if weights.size == 0 or x.size == 0:
        return out
    k = np.arange(1, weights.size + 1, dtype=float)
    scaled = weights * k ** derivative
    flat = x.ravel()
    result = out.ravel()
    for start in range(0, flat.size, _CHUNK):
        phase = np.multiply.outer(flat[start:start + _CHUNK], k)
        if derivative % 2 == 0:
            basis = np.cos(phase)
        else:
            basis = np.sin(phase)
        result[start:start + _CHUNK] = basis @ scaled
    # d/dx cos = -sin, d2/dx2 cos = -cos, d3/dx3 cos = sin, d4/dx4 cos = cos
    sign = (1.0, -1.0, -1.0, 1.0)[derivative % 4]
    return sign * result.reshape(x.shape)

def _fejer_weights_positive(M: int) -> NDArray[np.float64]:
    return 1.0 - np.arange(1, M + 1) / (M + 1)

def fejer_weights(M: int) -> NDArray[np.float64]:
    """Returns the triangular weights 1 - |k|/(M+1) for k = -M..M."""
    M = check_order(M, "M")
    return 1.0 - np.abs(np.arange(-M, M + 1)) / (M + 1)

@overload
def dirichlet(N: int, x: float) -> float: ...
@overload
def dirichlet(N: int, x: ArrayLike) -> NDArray[np.float64]: ...
def dirichlet(N: int, x: ArrayLike) -> float | NDArray[np.float64]:
    """Returns the rescaled Dirichlet kernel (1/(2N+1)) sum_{|k|<=N} exp(ikx).

    >>> round(dirichlet(1, math.pi), 6)
    -0.333333
    """
    N = check_order(N, "N")
    points = np.asarray(x, dtype=float)
    width = 2 * N + 1
    half = np.sin(points / 2)
    regular = np.abs(half) > SINGULAR_THRESHOLD
    out = np.empty_like(points)
    out[regular] = np.sin(width * points[regular] / 2) / (width * half[regular])
    if not np.all(regular):
        near = points[~regular]
        out[~regular] = (1.0 + 2.0 * _cosine_series(near, np.ones(N), 0)) / width
    if points.ndim == 0:
        return float(out)
    return out

@overload
def fejer(M: int, x: float) -> float: ...
@overload
def fejer(M: int, x: ArrayLike) -> NDArray[np.float64]: ...
def fejer(M: int, x: ArrayLike) -> float | NDArray[np.float64]:
    """Returns the Fejér kernel sum_{|k|<=M} (1 - |k|/(M+1)) exp(ikx)."""
    M = check_order(M, "M")
    points = np.asarray(x, dtype=float)
    half = np.sin(points / 2)
    regular = np.abs(half) > SINGULAR_THRESHOLD
    out = np.empty_like(points)
    out[regular] = np.sin((M + 1) * points[regular] / 2) ** 2 / ((M + 1) * half[regular] ** 2)
    if not np.all(regular):
        near = points[~regular]
        out[~regular] = 1.0 + 2.0 * _cosine_series(near, _fejer_weights_positive(M), 0)
    if points.ndim == 0:
        return float(out)
    return out

def fejer_derivatives(M: int, x: ArrayLike) -> tuple[float | NDArray[np.float64], float | NDArray[np.float64]]:
    """Returns (F'_M(x), F''_M(x)) from the termwise differentiated sum."""
    M = check_order(M, "M")
    points = np.asarray(x, dtype=float)
    weights = _fejer_weights_positive(M)
    first = 2.0 * _cosine_series(points, weights, 1)
    second = 2.0 * _cosine_series(points, weights, 2)
    if points.ndim == 0:
        return float(first), float(second)
    return first, second

def dirichlet_derivatives(N: int, x: ArrayLike) -> tuple[float | NDArray[np.float64], float | NDArray[np.float64]]:
    """Returns (D'_N(x), D''_N(x)) from the termwise differentiated sum."""
    N = check_order(N, "N")
    points = np.asarray(x, dtype=float)
    weights = np.full(N, 2.0 / (2 * N + 1))
    first = _cosine_series(points, weights, 1)
    second = _cosine_series(points, weights, 2)
    if points.ndim == 0:
        return float(first), float(second)
    return first, second

def k_constant(c: float) -> float:
    """Returns K(c) = r(1 - r)/(2c^2) with r the fractional part of c."""
    if not c > 0:
        raise InvalidParameter("c", c, "must be positive")
    r = c - math.floor(c)
    return r * (1 - r) / (2 * c * c)
