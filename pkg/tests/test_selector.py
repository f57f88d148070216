import numpy as np
import pytest

from spotvol.constants import MAX_BACKTRACKS
from spotvol.models.configs import AmiseInputs, SelectorBox, SelectorOptions
from spotvol.models.exceptions import InvalidParameter
from spotvol.utils.selector import amise_terms, c_amise, c_amise_gradient, grid_search, learning_rate, select_params

INPUTS = AmiseInputs(iv=1.0, iq=1.0, ivv=1.0, xi=0.5, n=23400)

def test_default_box():
    box = SelectorBox.default(23400)
    assert (box.N_lo, box.N_hi, box.M_lo, box.M_hi) == (76, 1529, 1, 24)
    with pytest.raises(InvalidParameter):
        SelectorBox(N_lo=10, N_hi=5, M_lo=1, M_hi=2)

def test_amise_terms_and_objective():
    terms = amise_terms(INPUTS)
    assert terms.A == pytest.approx(2 / 3)
    assert terms.B == pytest.approx(1 / 3)
    assert terms.C == pytest.approx(0.5 / (9 * 23400))
    assert terms.D == pytest.approx(0.25 / (15 * 23400 ** 2))
    N, M = 300.0, 10.0
    expected = M * (terms.A / N + terms.C * N + terms.D * N ** 3) + terms.B / M
    assert c_amise(INPUTS, N, M) == pytest.approx(expected)
    with pytest.raises(InvalidParameter):
        c_amise(INPUTS, 0.0, 1.0)

def test_gradient_matches_finite_differences():
    N, M, step = 250.0, 8.0, 1e-4
    dN, dM = c_amise_gradient(INPUTS, N, M)
    assert dN == pytest.approx((c_amise(INPUTS, N + step, M) - c_amise(INPUTS, N - step, M)) / (2 * step), rel=1e-5)
    assert dM == pytest.approx((c_amise(INPUTS, N, M + step) - c_amise(INPUTS, N, M - step)) / (2 * step), rel=1e-5)

def test_learning_rate():
    box = SelectorBox.default(23400)
    assert learning_rate(0.5, 500.0, box) == pytest.approx(1000.0)
    assert learning_rate(0.0, 500.0, box) == 1529

def random_inputs(seed: int) -> AmiseInputs:
    rng = np.random.default_rng(seed)
    iv = rng.uniform(0.5, 1.5)
    return AmiseInputs(
        iv=iv, iq=iv ** 2 * rng.uniform(1.0, 1.5), ivv=rng.uniform(0.5, 2.0), xi=rng.uniform(0.3, 1.0), n=23400
    )

def test_fixed_step_follows_gradient_at_previous_iterate():
    result = select_params(INPUTS, opts=SelectorOptions(learning_rate=1.0, threshold=1e-12, max_iters=5))
    box = SelectorBox.default(INPUTS.n)
    assert result.backtracks == 0
    assert result.iterations == 5
    assert not result.converged
    for k in range(1, result.N_path.size):
        grad_N, grad_M = c_amise_gradient(INPUTS, result.N_path[k - 1], result.M_path[k - 1])
        N, M = box.clip(result.N_path[k - 1] - 1.0 * grad_N, result.M_path[k - 1] - 1.0 * grad_M)
        assert result.N_path[k] == pytest.approx(N, rel=1e-12)
        assert result.M_path[k] == pytest.approx(M, rel=1e-12)

def test_halving_only_applies_to_its_iteration():
    result = select_params(INPUTS, opts=SelectorOptions(threshold=1e-12, max_iters=30))
    box = SelectorBox.default(INPUTS.n)
    rate = result.learning_rate
    assert rate == pytest.approx(1000.0)
    N, M = float(box.N_lo), float(box.M_lo)
    backtracks = 0
    for k in range(1, result.N_path.size):
        value = c_amise(INPUTS, N, M)
        grad_N, grad_M = c_amise_gradient(INPUTS, N, M)
        factor = 1.0
        for _ in range(MAX_BACKTRACKS + 1):
            cand_N, cand_M = box.clip(N - factor * rate * grad_N, M - factor * rate * grad_M)
            if c_amise(INPUTS, cand_N, cand_M) <= value:
                break
            factor *= 0.5
            backtracks += 1
        N, M = cand_N, cand_M
        assert result.N_path[k] == pytest.approx(N)
        assert result.M_path[k] == pytest.approx(M)
    assert result.backtracks == backtracks > 0
    assert np.all(np.diff(result.objective_trace) <= 0)

def test_descent_stops_at_first_small_change():
    result = select_params(INPUTS)
    changes = np.abs(np.diff(result.objective_trace)) / result.objective_trace[:-1]
    assert result.converged
    assert not result.stalled
    assert result.iterations == changes.size
    assert changes[-1] < 1e-3
    assert np.all(changes[:-1] >= 1e-3)
    assert result.M_star < result.N_star < INPUTS.n
    assert result.config.N == result.N_star

    # A small learning rate moves less than the threshold on the first step
    slow = select_params(INPUTS, opts=SelectorOptions(learning_rate=1e-3))
    assert slow.iterations == 1
    assert slow.converged
    assert not slow.stalled

@pytest.mark.parametrize("seed", range(20))
def test_selection_matches_grid_search(seed):
    inputs = random_inputs(seed)
    result = select_params(inputs, opts=SelectorOptions(threshold=1e-10))
    _, _, best = grid_search(inputs)
    assert c_amise(inputs, result.N_star, result.M_star) <= 1.01 * best
    assert result.M_star < result.N_star < inputs.n
    assert np.all(np.diff(result.objective_trace) <= 0)

@pytest.mark.parametrize("xi", [1e-10, 1e-8, 1e-6, 1e-4])
def test_learning_rate_scales_with_noise(xi):
    inputs = AmiseInputs(iv=1e-4, iq=2e-8, ivv=1e-9, xi=xi, n=23400)
    result = select_params(inputs, opts=SelectorOptions(max_iters=5000))
    box = SelectorBox.default(inputs.n)
    assert result.learning_rate == pytest.approx(500 / xi)
    assert np.all(np.isfinite(result.objective_trace))
    assert np.all((result.N_path >= box.N_lo) & (result.N_path <= box.N_hi))
    assert np.all((result.M_path >= box.M_lo) & (result.M_path <= box.M_hi))
    assert result.M_star < result.N_star < inputs.n

def test_iterates_stay_in_box():
    box = SelectorBox(N_lo=50, N_hi=120, M_lo=2, M_hi=6)
    result = select_params(INPUTS, opts=SelectorOptions(box=box, threshold=1e-10))
    assert np.all((result.N_path >= 50) & (result.N_path <= 120))
    assert np.all((result.M_path >= 2) & (result.M_path <= 6))
    # The unconstrained optimum lies above N_hi
    assert result.N_star == 120

def test_tiny_learning_rate_stalls_at_corner():
    result = select_params(INPUTS, opts=SelectorOptions(learning_rate=1e-30))
    assert result.stalled
    assert not result.converged
    assert result.iterations == 1
    assert result.objective_trace.size == 1

def test_noiseless_objective_pushes_N_to_the_box():
    inputs = AmiseInputs(iv=1.0, iq=1.0, ivv=0.0, xi=0.0, n=23400)
    assert select_params(inputs).learning_rate == 1529
    result = select_params(inputs, opts=SelectorOptions(learning_rate=1e8))
    assert result.converged
    assert (result.N_star, result.M_star) == (1529, 1)

def test_selector_options_validation():
    with pytest.raises(InvalidParameter):
        SelectorOptions(threshold=0)
    with pytest.raises(InvalidParameter):
        SelectorOptions(learning_rate=-1.0)
    with pytest.raises(InvalidParameter):
        SelectorOptions(max_iters=0)
    with pytest.raises(InvalidParameter):
        select_params(AmiseInputs(iv=1.0, iq=1.0, ivv=1.0, xi=0.5, n=2))
