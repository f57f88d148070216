"""Numerical checks of the limit identities of the Dirichlet and Fejér kernels.

Each row evaluates one normalized integral at increasing orders and compares it
with its limit. Periodic integrands over a full period use the trapezoid rule,
which is exact for trigonometric polynomials of degree below the number of
points; integrals over part of a period use Simpson's rule.
"""
from __future__ import annotations

import logging
import math
import numpy as np

from dataclasses import dataclass
from functools import cache
from scipy import integrate, special
from typing import Callable, Sequence

from spotvol.constants import QUADRATURE_POINTS
from spotvol.models.configs import floor_int
from spotvol.models.exceptions import InvalidParameter
from spotvol.models.results import LemmaReport, LemmaRow
from spotvol.utils.kernels import (
    dirichlet, dirichlet_derivatives, fejer, fejer_derivatives, k_constant
)

logger = logging.getLogger("SpotVol")

DEFAULT_ORDERS = (16, 32, 64, 128, 256, 512)
DEFAULT_TOLERANCE_SCALE = 10.0
# Rows whose errors all fall below this hold exactly
EXACT_ERROR = 1e-10

TAIL_CUTOFF = math.pi / 2
LOCALIZATION_POINT = 1.0
FAR_POINT = math.pi
FAR_GAP = 0.5
DISCRETE_CONSTANTS = (0.5, 0.75, 1.0)

@cache
def _periodic_nodes() -> np.ndarray:
    return -math.pi + 2 * math.pi * np.arange(QUADRATURE_POINTS) / QUADRATURE_POINTS

def periodic_integral(values: np.ndarray) -> float:
    """Returns the trapezoid integral over one period of values sampled at the periodic nodes."""
    return float(2 * math.pi * np.mean(values))

def simpson_integral(func: Callable[[np.ndarray], np.ndarray], lower: float, upper: float) -> float:
    x = np.linspace(lower, upper, QUADRATURE_POINTS + 1)
    return float(integrate.simpson(func(x), x=x))

def _fejer_mass(M: int) -> float:
    return periodic_integral(fejer(M, _periodic_nodes()))

def _fejer_square(M: int) -> float:
    return periodic_integral(fejer(M, _periodic_nodes()) ** 2) / M

def _fejer_first_derivative(M: int) -> float:
    first, _ = fejer_derivatives(M, _periodic_nodes())
    return periodic_integral(np.asarray(first) ** 2) / M ** 3

def _fejer_second_derivative(M: int) -> float:
    _, second = fejer_derivatives(M, _periodic_nodes())
    return periodic_integral(np.asarray(second) ** 2) / M ** 5

def _dirichlet_first_derivative(N: int) -> float:
    first, _ = dirichlet_derivatives(N, _periodic_nodes())
    return periodic_integral(np.asarray(first) ** 2) / N

def _dirichlet_second_derivative(N: int) -> float:
    _, second = dirichlet_derivatives(N, _periodic_nodes())
    return periodic_integral(np.asarray(second) ** 2) / N ** 3

def _dirichlet_half_mass(N: int) -> float:
    # N int_0^x D_N^2(x - y) dy = N int_0^x D_N^2(u) du
    return N * simpson_integral(lambda u: dirichlet(N, u) ** 2, 0.0, LOCALIZATION_POINT)

def _fejer_tail_fixed(M: int) -> float:
    return M * simpson_integral(lambda x: fejer(M, x), TAIL_CUTOFF, math.pi)

def _fejer_tail_first_zero(M: int) -> float:
    return simpson_integral(lambda x: fejer(M, x), 2 * math.pi / (M + 1), math.pi)

def _localization(M: int) -> float:
    y = _periodic_nodes()
    weight = 2 + np.sin(y)
    return periodic_integral(fejer(M, LOCALIZATION_POINT - y) ** 2 * weight) / M

def _far_point(n: int) -> float:
    N = floor_int(0.5 * n)
    # n int_0^{x - eps} D_N^2(x - y) dy = n int_eps^x D_N^2(u) du
    return n * simpson_integral(lambda u: dirichlet(N, u) ** 2, FAR_GAP, FAR_POINT)

def _discrete_dirichlet(c: float, n: int) -> float:
    """Returns n int_0^x D_N^2(phi(x) - phi(y)) dy on the grid 2pi j/n with N = floor(c n).

    phi snaps to the grid point at or below; x is the midpoint of the cell after pi."""
    N = floor_int(c * n)
    m = np.arange(1, n // 2 + 1)
    return math.pi + 2 * math.pi * float(np.sum(dirichlet(N, 2 * math.pi * m / n) ** 2))

def _identity_gap(N: int) -> float:
    rng = np.random.default_rng(N)
    x = rng.uniform(-math.pi, math.pi, 1000)
    scaled = (2 * N + 1) * dirichlet(N, x) ** 2
    return float(np.max(np.abs(scaled - fejer(2 * N, x)) / np.maximum(1.0, np.abs(fejer(2 * N, x)))))

@dataclass(frozen=True)
class Lemma:
    name: str
    target: float
    evaluate: Callable[[int], float]
    absolute: bool = False

def lemmas() -> list[Lemma]:
    """Returns every limit identity checked by the suite."""
    rows = [
        Lemma("fejer_mass", 2 * math.pi, _fejer_mass),
        Lemma("fejer_square", 4 * math.pi / 3, _fejer_square),
        Lemma("fejer_tail_fixed_cutoff", 1 / math.tan(TAIL_CUTOFF / 2), _fejer_tail_fixed),
        Lemma("fejer_tail_first_zero", math.pi - 2 * float(special.sici(2 * math.pi)[0]), _fejer_tail_first_zero),
        Lemma("fejer_first_derivative", 2 * math.pi / 15, _fejer_first_derivative),
        Lemma("fejer_second_derivative", 4 * math.pi / 105, _fejer_second_derivative),
        Lemma("fejer_localization", 4 * math.pi / 3 * (2 + math.sin(LOCALIZATION_POINT)), _localization),
        Lemma("dirichlet_first_derivative", math.pi / 3, _dirichlet_first_derivative),
        Lemma("dirichlet_second_derivative", math.pi / 5, _dirichlet_second_derivative),
        Lemma("dirichlet_half_mass", math.pi / 2, _dirichlet_half_mass),
        Lemma("dirichlet_far_point", 0.0, _far_point, absolute=True),
        Lemma("dirichlet_fejer_identity", 0.0, _identity_gap, absolute=True),
    ]
    for c in DISCRETE_CONSTANTS:
        rows.append(Lemma(
            f"discrete_dirichlet_c{c:g}",
            math.pi * (1 + 2 * k_constant(2 * c)),
            lambda n, c=c: _discrete_dirichlet(c, n),
        ))
    return rows

def _slope(orders: Sequence[int], errors: Sequence[float]) -> float:
    """Returns the convergence order, minus the log-log slope of error against order."""
    err = np.maximum(np.asarray(errors, dtype=float), np.finfo(float).tiny)
    slope, _ = np.polyfit(np.log(np.asarray(orders, dtype=float)), np.log(err), 1)
    return float(-slope)

def evaluate_lemma(lemma: Lemma, orders: Sequence[int], scale: float = DEFAULT_TOLERANCE_SCALE) -> LemmaRow:
    """Evaluates one identity at each order against the tolerance scale/order.

    A row passes when every error is below EXACT_ERROR, or when the final
    error meets its tolerance, the error at the largest order is below the one
    at the smallest and the fitted convergence order is positive."""
    observed = tuple(lemma.evaluate(order) for order in orders)
    if lemma.absolute:
        errors = tuple(abs(value - lemma.target) for value in observed)
    else:
        errors = tuple(abs(value - lemma.target) / abs(lemma.target) for value in observed)
    tolerances = tuple(scale / order for order in orders)
    slope = _slope(orders, errors)
    if max(errors) < EXACT_ERROR:
        passed = True
    else:
        passed = errors[-1] <= tolerances[-1] and errors[-1] < errors[0] and slope > 0
    if not passed:
        logger.warning(f"Kernel identity {lemma.name} failed with error {errors[-1]:.3e} at order {orders[-1]}")
    return LemmaRow(
        name=lemma.name, target=lemma.target, orders=tuple(orders), observed=observed,
        errors=errors, tolerances=tolerances, slope=slope, passed=passed, absolute=lemma.absolute
    )

def check_orders(orders: Sequence[int]) -> tuple[int, ...]:
    if len(orders) < 2:
        raise InvalidParameter("orders", list(orders), "need at least two orders")
    result = tuple(sorted(int(order) for order in orders))
    if result[0] < 4:
        raise InvalidParameter("orders", list(orders), "every order must be at least 4")
    return result

def run_lemma_suite(orders: Sequence[int] = DEFAULT_ORDERS, scale: float = DEFAULT_TOLERANCE_SCALE) -> LemmaReport:
    """Evaluates every kernel identity at the given orders."""
    checked = check_orders(orders)
    if not scale > 0:
        raise InvalidParameter("scale", scale, "must be positive")
    return LemmaReport(tuple(evaluate_lemma(lemma, checked, scale) for lemma in lemmas()))

def evaluate_named(name: str, orders: Sequence[int], scale: float = DEFAULT_TOLERANCE_SCALE) -> LemmaRow:
    """Evaluates the identity called name; usable from worker processes."""
    for lemma in lemmas():
        if lemma.name == name:
            return evaluate_lemma(lemma, check_orders(orders), scale)
    raise InvalidParameter("lemma", name, f"expected one of {', '.join(l.name for l in lemmas())}")
