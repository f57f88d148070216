"""Selection of the cut-off frequencies (N, M) by minimizing the c-AMISE.

The objective is Psi(N, M) = M f(N) + B/M with f(N) = A/N + C N + D N^3, where
A = 2 IQ / 3, B = T IVV / 3, C = T xi IV / (9 n) and D = T^3 xi^2 / (15 n^2).
"""
from __future__ import annotations

import logging
import math
import numpy as np

from typing import NamedTuple

from spotvol.constants import MAX_BACKTRACKS
from spotvol.models.configs import AmiseInputs, SelectorBox, SelectorOptions, SelectorResult
from spotvol.models.exceptions import InvalidParameter, NonFiniteResult

logger = logging.getLogger("SpotVol")

class AmiseTerms(NamedTuple):
    A: float
    B: float
    C: float
    D: float

def amise_terms(inputs: AmiseInputs) -> AmiseTerms:
    T, n = inputs.T, inputs.n
    return AmiseTerms(
        A=2 / 3 * inputs.iq,
        B=T * inputs.ivv / 3,
        C=T * inputs.xi * inputs.iv / (9 * n),
        D=T ** 3 * inputs.xi ** 2 / (15 * n ** 2),
    )

def _check_point(N: float, M: float) -> None:
    if not N > 0:
        raise InvalidParameter("N", N, "must be positive")
    if not M > 0:
        raise InvalidParameter("M", M, "must be positive")

def _objective(terms: AmiseTerms, N: float, M: float) -> float:
    A, B, C, D = terms
    return M * (A / N + C * N + D * N ** 3) + B / M

def _gradient(terms: AmiseTerms, N: float, M: float) -> tuple[float, float]:
    A, B, C, D = terms
    return (
        M * (-A / N ** 2 + C + 3 * D * N ** 2),
        A / N + C * N + D * N ** 3 - B / M ** 2,
    )

def c_amise(inputs: AmiseInputs, N: float, M: float) -> float:
    """Returns the conditional asymptotic MISE at (N, M)."""
    _check_point(N, M)
    return _objective(amise_terms(inputs), N, M)

def c_amise_gradient(inputs: AmiseInputs, N: float, M: float) -> tuple[float, float]:
    """Returns the partial derivatives of c_amise in N and M."""
    _check_point(N, M)
    return _gradient(amise_terms(inputs), N, M)

def learning_rate(xi: float, c_lambda: float, box: SelectorBox) -> float:
    """Returns c_lambda / xi, or N_hi when xi is zero."""
    if xi <= 0:
        return float(box.N_hi)
    return c_lambda / xi

def _grid_search(terms: AmiseTerms, candidates_N: np.ndarray, candidates_M: np.ndarray) -> tuple[int, int, float]:
    """Returns the admissible integer pair with the lowest objective."""
    N = candidates_N[:, None].astype(float)
    M = candidates_M[None, :].astype(float)
    values = M * (terms.A / N + terms.C * N + terms.D * N ** 3) + terms.B / M
    values = np.where(M < N, values, np.inf)
    i, j = np.unravel_index(int(np.argmin(values)), values.shape)
    return int(candidates_N[i]), int(candidates_M[j]), float(values[i, j])

def grid_search(inputs: AmiseInputs, box: SelectorBox | None = None) -> tuple[int, int, float]:
    """Returns the best integer (N, M) with M < N < n in the box by exhaustive search."""
    box = box or SelectorBox.default(inputs.n)
    N = np.arange(math.ceil(box.N_lo), min(math.floor(box.N_hi), inputs.n - 1) + 1)
    M = np.arange(math.ceil(box.M_lo), math.floor(box.M_hi) + 1)
    if N.size == 0 or M.size == 0:
        raise InvalidParameter("box", box, "holds no admissible integer pair")
    return _grid_search(amise_terms(inputs), N, M)

def _round_result(terms: AmiseTerms, N: float, M: float, box: SelectorBox, n: int) -> tuple[int, int]:
    """Rounds a continuous solution, keeping the best admissible integer neighbour."""
    N_lo, N_hi = math.ceil(box.N_lo), min(math.floor(box.N_hi), n - 1)
    M_lo, M_hi = max(math.ceil(box.M_lo), 1), math.floor(box.M_hi)
    N_r = min(max(round(N), N_lo), N_hi)
    M_r = min(max(round(M), M_lo), M_hi)
    candidates_N = np.arange(max(N_r - 1, N_lo), min(N_r + 1, N_hi) + 1)
    candidates_M = np.arange(max(M_r - 1, M_lo), min(M_r + 1, M_hi) + 1)
    if candidates_N.size and candidates_M.size and candidates_M.min() < candidates_N.max():
        N_star, M_star, _ = _grid_search(terms, candidates_N, candidates_M)
    else:
        N_star, M_star = N_r, M_r
    while M_star >= N_star and M_star > 1:
        M_star -= 1
    return N_star, M_star

def select_params(inputs: AmiseInputs, n: int | None = None, opts: SelectorOptions | None = None) -> SelectorResult:
    """Minimizes the c-AMISE over the box by projected gradient descent.

    The descent starts at (N_lo, M_lo) and moves both coordinates by lambda
    times the gradient at the previous iterate, projected back onto the box.
    A step that raises the objective is halved for that iteration until it does
    not, and dropped after MAX_BACKTRACKS halvings. The descent stops at the
    first step whose relative change of the objective is below the threshold,
    or after max_iters steps."""
    opts = opts or SelectorOptions()
    n = inputs.n if n is None else n
    if n < 3:
        raise InvalidParameter("n", n, "selection needs at least three increments")
    box = opts.box or SelectorBox.default(n)
    terms = amise_terms(inputs)
    rate = opts.learning_rate if opts.learning_rate is not None else learning_rate(inputs.xi, opts.c_lambda, box)

    N, M = float(box.N_lo), float(box.M_lo)
    value = _objective(terms, N, M)
    trace = [value]
    N_path, M_path = [N], [M]
    converged = stalled = False
    backtracks = 0
    iterations = 0

    for iterations in range(1, opts.max_iters + 1):
        grad_N, grad_M = _gradient(terms, N, M)
        if not (math.isfinite(grad_N) and math.isfinite(grad_M)):
            raise NonFiniteResult("c-AMISE gradient")

        factor = 1.0
        for _ in range(MAX_BACKTRACKS + 1):
            cand_N, cand_M = box.clip(N - factor * rate * grad_N, M - factor * rate * grad_M)
            cand_value = _objective(terms, cand_N, cand_M)
            if cand_value <= value:
                break
            factor *= 0.5
            backtracks += 1
        else:
            cand_N, cand_M, cand_value = N, M, value

        assert box.contains(cand_N, cand_M)
        if iterations == 1 and cand_N == N and cand_M == M:
            stalled = True
            logger.debug(f"Selection stalled at the starting corner ({N:g}, {M:g})")
            break

        change = abs(cand_value - value) / value if value > 0 else 0.0
        N, M, value = cand_N, cand_M, cand_value
        trace.append(value)
        N_path.append(N)
        M_path.append(M)
        if change < opts.threshold:
            converged = True
            break

    N_star, M_star = _round_result(terms, N, M, box, n)
    if not converged and not stalled:
        logger.debug(f"Selection stopped after {iterations} steps without meeting the threshold")
    return SelectorResult(
        N_star=N_star, M_star=M_star, iterations=iterations, converged=converged,
        objective_trace=np.array(trace), N_path=np.array(N_path), M_path=np.array(M_path),
        learning_rate=rate, backtracks=backtracks, stalled=stalled
    )
