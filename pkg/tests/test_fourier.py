import numpy as np
import pytest

from spotvol.models.configs import EstimatorConfig
from spotvol.models.dynamics import ConstantVolParams
from spotvol.models.exceptions import InvalidGrid, InvalidParameter
from spotvol.models.paths import PricePath
from spotvol.utils.fourier import (
    TWO_PI, default_grid, estimate_path, interior_grid, invert, price_coeffs,
    realized_fejer_spot, rescale_time, validate_grid, vol_coeffs
)
from spotvol.utils.kernels import dirichlet
from spotvol.utils.simulation import simulate_constant

def random_path(n: int, seed: int = 1, horizon: float = 23400.0) -> PricePath:
    rng = np.random.default_rng(seed)
    prices = np.concatenate(([0.0], np.cumsum(rng.normal(0, 0.001, n))))
    return PricePath(np.linspace(0, horizon, n + 1), prices, horizon)

def test_rescale_time():
    path = rescale_time(random_path(10))
    assert path.horizon == pytest.approx(TWO_PI)
    assert path.timestamps[-1] == pytest.approx(TWO_PI)
    assert path.horizon_days == pytest.approx(1.0)

@pytest.mark.parametrize("n", [63, 255, 1023])
def test_nyquist_identity_recovers_realized_variance(n: int):
    path = random_path(n, seed=n)
    N = n // 2
    vc = vol_coeffs(price_coeffs(rescale_time(path), N), N, 0)
    realized = float(path.increments @ path.increments)
    assert TWO_PI * vc[0].real == pytest.approx(realized, rel=1e-12)

def test_fft_and_direct_sums_agree():
    rescaled = rescale_time(random_path(500, seed=3))
    fft = price_coeffs(rescaled, 120, use_fft=True)
    direct = price_coeffs(rescaled, 120, use_fft=False)
    np.testing.assert_allclose(fft.values, direct.values, atol=1e-10)

def test_irregular_grid_uses_direct_sums():
    rng = np.random.default_rng(5)
    times = np.concatenate(([0.0], np.sort(rng.uniform(0, 1000, 200)), [1000.0]))
    path = PricePath(times, np.cumsum(rng.normal(0, 0.01, times.size)), 1000.0)
    assert not path.is_equispaced()
    pc = price_coeffs(rescale_time(path), 30)
    assert pc.asymmetry() < 1e-12
    assert pc[0].real == pytest.approx((path.logprices[-1] - path.logprices[0]) / TWO_PI)

def test_vol_coeffs_symmetry_and_order():
    pc = price_coeffs(rescale_time(random_path(400)), 60)
    vc = vol_coeffs(pc, 50, 10)
    assert vc.order == 10
    assert vc.asymmetry() < 1e-12
    with pytest.raises(InvalidParameter):
        vol_coeffs(pc, 55, 10)

def test_invert_rejects_endpoints():
    vc = vol_coeffs(price_coeffs(rescale_time(random_path(100)), 30), 20, 5)
    with pytest.raises(InvalidGrid):
        invert(vc, 0.0)
    with pytest.raises(InvalidGrid):
        invert(vc, [1.0, TWO_PI])
    assert isinstance(invert(vc, 1.0), float)

def test_interior_grid():
    assert interior_grid(300.0, 60.0).tolist() == [60.0, 120.0, 180.0, 240.0]
    assert interior_grid(301.0, 60.0).tolist() == [60.0, 120.0, 180.0, 240.0, 300.0]
    assert len(default_grid(random_path(10))) == 389
    with pytest.raises(InvalidParameter):
        interior_grid(300.0, 0.0)

def test_validate_grid():
    with pytest.raises(InvalidGrid):
        validate_grid([], 10.0)
    with pytest.raises(InvalidGrid):
        validate_grid([2.0, 1.0], 10.0)
    with pytest.raises(InvalidGrid):
        validate_grid([0.0, 1.0], 10.0)

def test_estimate_path_requires_ordered_cutoffs():
    path = random_path(100)
    with pytest.raises(InvalidParameter):
        estimate_path(path, EstimatorConfig(N=10, M=10))
    with pytest.raises(InvalidParameter):
        estimate_path(path, EstimatorConfig(N=100, M=5))

def test_constant_volatility_estimate_is_unbiased():
    sigma2 = 0.002
    simulated = simulate_constant(ConstantVolParams(sigma2=sigma2), 23400, seed=11)
    estimate = estimate_path(simulated.prices, EstimatorConfig(N=11700, M=150))
    assert len(estimate) == 389
    assert estimate.values.mean() == pytest.approx(sigma2, rel=0.05)
    assert estimate.day_length == simulated.prices.day_length

def test_realized_fejer_spot_on_flat_squares():
    n, square = 1000, 1e-7
    increments = np.sqrt(square) * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    path = PricePath(np.linspace(0, 23400, n + 1), np.concatenate(([0.0], np.cumsum(increments))), 23400.0)
    estimate = realized_fejer_spot(path, 20, [600.0, 11700.0, 22800.0])
    np.testing.assert_allclose(estimate.values, n * square, rtol=1e-9)
    with pytest.raises(InvalidParameter):
        realized_fejer_spot(path, 0)

def test_units_follow_day_length():
    path = random_path(2000, seed=8)
    cfg = EstimatorConfig(N=1000, M=40)
    per_session = estimate_path(path, cfg, [11700.0])
    two_sessions = PricePath(path.timestamps, path.logprices, path.horizon, day_length=2 * path.horizon)
    per_day = estimate_path(two_sessions, cfg, [11700.0])
    assert per_day.values[0] == pytest.approx(2 * per_session.values[0])

def double_kernel_coeffs(path: PricePath, N: int, M: int) -> np.ndarray:
    """Returns sum_{i,j} D_N(t_j - t_i) exp(-ikt_j) delta_i delta_j / 2pi for |k| <= M."""
    t = path.timestamps[:-1]
    delta = path.increments
    kernel = dirichlet(N, t[None, :] - t[:, None])
    weights = kernel * np.outer(delta, delta)
    return np.array([np.sum(weights * np.exp(-1j * k * t)[None, :]) for k in range(-M, M + 1)]) / TWO_PI

@pytest.mark.parametrize("n, N, M", [(8, 3, 1), (16, 5, 2), (32, 12, 4)])
def test_convolution_matches_double_kernel_sum(n, N, M):
    rescaled = rescale_time(random_path(n, seed=n))
    vc = vol_coeffs(price_coeffs(rescaled, N + M), N, M)
    np.testing.assert_allclose(vc.values, double_kernel_coeffs(rescaled, N, M), rtol=1e-10, atol=1e-20)

def test_convolution_matches_double_kernel_sum_on_irregular_times():
    rng = np.random.default_rng(12)
    times = np.concatenate(([0.0], np.sort(rng.uniform(0, TWO_PI, 30)), [TWO_PI]))
    path = PricePath(times, np.cumsum(rng.normal(0, 0.001, times.size)), TWO_PI)
    vc = vol_coeffs(price_coeffs(path, 12), 9, 3)
    np.testing.assert_allclose(vc.values, double_kernel_coeffs(path, 9, 3), rtol=1e-10, atol=1e-20)

def test_shifting_log_prices_leaves_estimates_unchanged():
    path = random_path(2000, seed=4)
    shifted = PricePath(path.timestamps, path.logprices + 5.0, path.horizon)
    cfg = EstimatorConfig(N=1000, M=40)
    grid = [600.0, 11700.0, 22800.0]
    np.testing.assert_allclose(estimate_path(shifted, cfg, grid).values, estimate_path(path, cfg, grid).values, rtol=1e-12)
    np.testing.assert_allclose(
        realized_fejer_spot(shifted, 40, grid).values, realized_fejer_spot(path, 40, grid).values, rtol=1e-12
    )
