import math

import numpy as np
import pytest

from spotvol.constants import NORMAL_Q975
from spotvol.models.configs import EstimatorConfig
from spotvol.models.dynamics import ConstantVolParams, HestonParams, Sv1fParams
from spotvol.models.exceptions import InvalidGrid, InvalidParameter
from spotvol.models.paths import PricePath, SpotVolPath
from spotvol.models.results import CltSpec, PathError, Regime
from spotvol.utils.metrics import (
    asymptotic_variance, check_clt_inputs, clt_check, jarque_bera, ks_normal, log_log_slope,
    path_error, return_midpoints, sample_moments, spot_volvol, standardized_returns,
    summarize_clt, summarize_errors
)

def test_path_error():
    grid = np.linspace(0.1, 0.9, 9)
    truth = SpotVolPath(grid, np.ones(9), 1.0)
    assert path_error(truth, truth) == PathError(0.0, 0.0)

    shifted = SpotVolPath(grid, np.ones(9) + 0.1, 1.0)
    error = path_error(shifted, truth)
    assert error.ise == pytest.approx(0.01)
    assert error.iae == pytest.approx(0.1)

    # Cells [0, 0.75) and [0.75, 1]
    est = SpotVolPath([0.25, 0.75], [1.0, 2.0], 1.0)
    zero = SpotVolPath([0.25, 0.75], [0.0, 0.0], 1.0)
    error = path_error(est, zero)
    assert error.ise == pytest.approx(1.75, abs=1e-14)
    assert error.iae == pytest.approx(1.25, abs=1e-14)

    with pytest.raises(InvalidGrid):
        path_error(est, truth)

def test_summarize_errors():
    summary = summarize_errors([PathError(1.0, 0.5), PathError(3.0, 1.5)])
    assert summary.mise == 2.0
    assert summary.miae == 1.0
    assert summary.mise_se == pytest.approx(1.0)
    assert summary.paths == 2
    assert summarize_errors([PathError(1.0, 1.0)]).mise_se == 0.0
    with pytest.raises(InvalidParameter):
        summarize_errors([])

def test_asymptotic_variance():
    no_noise = CltSpec(Regime.NO_NOISE_SUBOPT, c=0.5, a=1.0)
    assert asymptotic_variance(no_noise, 1.0, 0.0, 0.0) == pytest.approx(4 / 3)

    noise = CltSpec(Regime.NOISE_OPT, c=1.0, a=1.0)
    assert asymptotic_variance(noise, 1.0, 0.0, 0.0) == pytest.approx(2 / 3)

    optimal = CltSpec(Regime.NO_NOISE_OPT, c=0.5, a=2.0)
    gap = asymptotic_variance(optimal, 1.0, 0.3, 0.0) - asymptotic_variance(no_noise, 1.0, 0.3, 0.0)
    assert gap == pytest.approx(2 * math.pi / (3 * 4) * 0.3)

    wider = CltSpec(Regime.NO_NOISE_SUBOPT, c=0.75, a=1.0)
    assert asymptotic_variance(wider, 1.0, 0.0, 0.0) == pytest.approx(4 / 3 * (1 + 1 / 9))

def test_spot_volvol():
    assert spot_volvol(Sv1fParams(), 0.002) == pytest.approx(4 * 0.125 ** 2 * 0.002 ** 2)
    assert spot_volvol(HestonParams(), 0.002) == pytest.approx(0.03 ** 2 * 0.002)
    assert spot_volvol(ConstantVolParams(), 0.002) == 0.0

def test_regimes():
    assert Regime.parse("NOISE_OPT") is Regime.NOISE_OPT
    assert Regime.NOISE_SUBOPT.noisy and not Regime.NOISE_SUBOPT.optimal
    with pytest.raises(InvalidParameter):
        Regime.parse("optimal")

    assert CltSpec(Regime.NOISE_OPT, c=1.0, a=1.0).cutoffs(23400) == EstimatorConfig(N=152, M=12)
    assert CltSpec(Regime.NO_NOISE_SUBOPT, c=0.5, a=1.0).cutoffs(23400) == EstimatorConfig(N=11700, M=818)
    assert CltSpec(Regime.NO_NOISE_OPT, c=0.5, a=1.0).rate(10000, 25) == pytest.approx(20.0)
    with pytest.raises(InvalidParameter):
        CltSpec(Regime.NO_NOISE_OPT, c=0.5, a=1.0, tau=2.0)
    with pytest.raises(InvalidParameter):
        CltSpec(Regime.NO_NOISE_OPT, c=0.5, a=1.0, t_eval=1.0)

def test_check_clt_inputs():
    spec = CltSpec(Regime.NO_NOISE_SUBOPT, c=0.5, a=0.1)
    with pytest.raises(InvalidParameter):
        check_clt_inputs(spec, 23400, 7)
    with pytest.raises(InvalidParameter):
        check_clt_inputs(spec, 100, 100)
    check_clt_inputs(spec, 23400, 8)

def test_summarize_clt_and_negative_control():
    spec = CltSpec(Regime.NO_NOISE_SUBOPT, c=0.5, a=1.0)
    z = np.random.default_rng(0).standard_normal(2000)
    result = summarize_clt(spec, 23400, z)
    assert 0.93 <= result.coverage_95 <= 0.97
    assert result.coverage_95 == pytest.approx(np.mean(np.abs(z) <= NORMAL_Q975))
    assert result.n_paths == 2000
    assert (result.N, result.M) == (11700, 818)

    halved = summarize_clt(spec, 23400, z, avar_scale=0.5)
    assert halved.coverage_95 < 0.90
    with pytest.raises(InvalidParameter):
        summarize_clt(spec, 23400, z, avar_scale=0.0)

def test_clt_check_on_constant_volatility():
    spec = CltSpec(Regime.NO_NOISE_SUBOPT, c=0.5, a=1.0)
    result = clt_check("constant", ConstantVolParams(), spec, 2000, 100, seed=0)
    assert len(result.z) == 100
    assert abs(result.mean_z) < 0.5
    assert 0.5 < result.var_z < 1.8
    assert result.coverage_95 >= 0.85

def test_log_log_slope():
    assert log_log_slope([1, 2, 4, 8], [1, 0.5, 0.25, 0.125]) == pytest.approx(-1.0)
    assert log_log_slope([2 ** 10, 2 ** 12], [2 ** -2.5, 2 ** -3]) == pytest.approx(-0.25)
    with pytest.raises(InvalidParameter):
        log_log_slope([1], [1])

def test_return_midpoints():
    midpoints = return_midpoints(23400, 300)
    assert midpoints.size == 78
    assert midpoints[0] == 150
    assert midpoints[-1] == 23250
    with pytest.raises(InvalidParameter):
        return_midpoints(100, 0)

def test_standardized_returns():
    path = PricePath([0.0, 0.5, 1.0], [0.0, 0.2, 0.5], 1.0)
    vol = SpotVolPath([0.5], [1.0], 1.0)
    assert standardized_returns(path, vol, 1.0).tolist() == pytest.approx([0.5])

    flat = PricePath([0.0, 0.5, 1.0], [0.3, 0.1, 0.3], 1.0)
    assert standardized_returns(flat, vol, 1.0).tolist() == [0.0]

    with pytest.raises(InvalidGrid):
        standardized_returns(path, SpotVolPath([0.25], [1.0], 1.0), 1.0)
    with pytest.raises(InvalidParameter):
        standardized_returns(path, SpotVolPath([0.5], [0.0], 1.0), 1.0)

def test_jarque_bera():
    # Skewness 0 and kurtosis 3 exactly
    engineered = [-1.0] * 2 + [0.0] * 8 + [1.0] * 2
    statistic, p_value = jarque_bera(engineered)
    assert statistic == pytest.approx(0.0, abs=1e-12)
    assert p_value == pytest.approx(1.0)

    heavy = np.random.default_rng(1).standard_t(3, 10_000)
    assert jarque_bera(heavy)[1] < 0.01

    with pytest.raises(InvalidParameter):
        jarque_bera([1.0] * 10)
    with pytest.raises(InvalidParameter):
        jarque_bera([1.0, 2.0])

def test_jarque_bera_size_on_normal_samples():
    rng = np.random.default_rng(2024)
    p_values = np.array([jarque_bera(rng.standard_normal(10_000))[1] for _ in range(2000)])
    assert 0.03 <= np.mean(p_values < 0.05) <= 0.07

def test_ks_normal_and_moments():
    sample = np.random.default_rng(2).standard_normal(5000)
    assert ks_normal(sample)[1] > 0.001
    assert ks_normal(sample + 1.0)[1] < 1e-6

    moments = sample_moments(sample)
    assert moments.mean == pytest.approx(0.0, abs=0.05)
    assert moments.variance == pytest.approx(1.0, abs=0.06)
    assert moments.kurtosis == pytest.approx(3.0, abs=0.25)
