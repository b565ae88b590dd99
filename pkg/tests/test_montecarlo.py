import warnings

import numpy as np
import pytest

from conftest import assert_states_close
from qwalk_mc import (
    SYMMETRIC_INIT,
    CoinSpec,
    LatticeGenerator,
    PointMassInitialState,
    RngStream,
    ScalarState,
    TrajectorySample,
    VarianceAdvisory,
    estimate_continuous,
    estimate_discrete,
    estimate_sigma2,
    nstep_bruteforce,
    point_mass_state,
    poisson_cdf_table,
    sample_poisson,
    sample_trajectory,
)
from qwalk_mc._kernels import invert_poisson
from qwalk_mc.errors import RateOutOfRange

LAM = np.pi / 4


def draws(lam, seed, size):
    u = RngStream(seed, 0).random(size)
    # first k with u <= cdf[k]
    return np.searchsorted(poisson_cdf_table(lam), u, side="left")


def test_inversion_kernel_matches_search():
    cdf = poisson_cdf_table(3.0)
    for u in RngStream(1, 0).random(5000):
        assert invert_poisson(u, cdf) == np.searchsorted(cdf, u, side="left")


def test_poisson_moments():
    m = 1_000_000
    k = draws(LAM, 5, m)
    assert abs(k.mean() - LAM) <= 3 * np.sqrt(LAM / m)
    # var of the sample variance is (mu4 - s^4) / m with mu4 = lam + 3 lam^2 for Poisson
    se_var = np.sqrt((LAM + 3 * LAM**2 - LAM**2) / m)
    assert abs(k.var(ddof=1) - LAM) <= 4 * se_var


def test_sample_poisson_deterministic():
    a = [sample_poisson(LAM, r) for r in [RngStream(42, 0)] for _ in range(20)]
    rng = RngStream(42, 0)
    b = [sample_poisson(LAM, rng) for _ in range(20)]
    assert a == b


def test_streams_differ():
    assert not np.array_equal(RngStream(1, 0).random(8), RngStream(1, 1).random(8))


def test_trajectory_examples():
    assert TrajectorySample.from_jumps([0, 0, 0]).landing_sum == 3
    t = TrajectorySample.from_jumps([1, 0])
    assert t.partial_sums[1:] == (1, 1)
    assert t.landing_sum == 0


def test_trajectory_bounds():
    rng = RngStream(3, 0)
    for n in range(1, 9):
        for _ in range(50):
            t = sample_trajectory(n, 2.0, rng)
            assert abs(t.landing_sum) <= n and (t.landing_sum - n) % 2 == 0


def test_single_sample_lands_where_trajectory_says():
    n = 5
    t = sample_trajectory(n, LAM, RngStream(11, 0))
    with pytest.warns(VarianceAdvisory):
        est = estimate_discrete(CoinSpec(0, 0, LAM, 0), SYMMETRIC_INIT, n, 1, seed=11, workers=1)
    plus = {int(x) for x, a in zip(est.state.positions, est.state.amp_plus) if a != 0}
    minus = {int(x) for x, a in zip(est.state.positions, est.state.amp_minus) if a != 0}
    assert plus == {t.landing_sum} and minus == {-t.landing_sum}


def test_zero_steps_returns_init():
    est = estimate_discrete(CoinSpec(1, 2, 3, 4), SYMMETRIC_INIT, 0, 100)
    assert_states_close(est.state, point_mass_state(SYMMETRIC_INIT), 0)
    assert np.all(est.std_err_plus == 0) and np.all(est.std_err_minus == 0)
    assert_states_close(estimate_sigma2(LAM, SYMMETRIC_INIT, 0, 10).state, point_mass_state(SYMMETRIC_INIT), 0)


def test_rate_guards():
    with pytest.raises(RateOutOfRange):
        estimate_discrete(CoinSpec(0, 0, 0, 0), SYMMETRIC_INIT, 2, 10)
    with pytest.raises(RateOutOfRange), warnings.catch_warnings():
        warnings.simplefilter("ignore", VarianceAdvisory)
        estimate_discrete(CoinSpec(0, 0, 6.0, 0), SYMMETRIC_INIT, 6, 10)


def test_variance_advisory():
    with pytest.warns(VarianceAdvisory):
        estimate_discrete(CoinSpec(0, 0, 2.0, 0), SYMMETRIC_INIT, 3, 1000)


def test_deterministic():
    spec = CoinSpec(0.3, 0.2, 0.9, 1.1)
    a = estimate_discrete(spec, SYMMETRIC_INIT, 3, 300_000, seed=4, workers=2)
    b = estimate_discrete(spec, SYMMETRIC_INIT, 3, 300_000, seed=4, workers=2)
    np.testing.assert_array_equal(a.state.amp_plus, b.state.amp_plus)
    np.testing.assert_array_equal(a.state.amp_minus, b.state.amp_minus)
    np.testing.assert_array_equal(a.std_err_plus, b.std_err_plus)


def test_worker_independence():
    spec = CoinSpec(0.3, 0.2, 0.9, 1.1)
    a = estimate_discrete(spec, SYMMETRIC_INIT, 4, 1_000_000, seed=9, workers=1)
    b = estimate_discrete(spec, SYMMETRIC_INIT, 4, 1_000_000, seed=9, workers=4)
    assert np.max(np.abs(a.state.to_vector() - b.state.to_vector())) <= 1e-12


def test_sigma2_wrapper_identical():
    a = estimate_sigma2(LAM, SYMMETRIC_INIT, 3, 200_000, seed=2)
    b = estimate_discrete(CoinSpec(0, 0, LAM, 0), SYMMETRIC_INIT, 3, 200_000, seed=2)
    np.testing.assert_array_equal(a.state.to_vector(), b.state.to_vector())


def _within(est, ref, k):
    ref = ref.padded(est.state.x_min, est.state.x_max)
    ok_p = np.abs(est.state.amp_plus - ref.amp_plus) <= k * est.std_err_plus + 1e-15
    ok_m = np.abs(est.state.amp_minus - ref.amp_minus) <= k * est.std_err_minus + 1e-15
    return bool(np.all(ok_p) and np.all(ok_m))


def test_sigma2_three_steps_vs_bruteforce():
    spec = CoinSpec(0, 0, LAM, 0)
    est = estimate_discrete(spec, SYMMETRIC_INIT, 3, 10_000_000, seed=123)
    assert _within(est, nstep_bruteforce(SYMMETRIC_INIT, spec, 3), 4)


def test_sigma2_two_steps_vs_bruteforce():
    est = estimate_sigma2(LAM, PointMassInitialState(1, 0), 2, 10_000_000, seed=321)
    assert _within(est, nstep_bruteforce(PointMassInitialState(1, 0), CoinSpec(0, 0, LAM, 0), 2), 4)


def test_general_coin_vs_bruteforce():
    spec = CoinSpec(0.5, 0.7, 0.9, 1.3)
    est = estimate_discrete(spec, SYMMETRIC_INIT, 3, 4_000_000, seed=77)
    assert _within(est, nstep_bruteforce(SYMMETRIC_INIT, spec, 3), 4)


def test_pooled_unbiasedness():
    spec = CoinSpec(0, 0, LAM, 0)
    ref = nstep_bruteforce(SYMMETRIC_INIT, spec, 2).padded(-2, 2).to_vector()
    runs = [estimate_discrete(spec, SYMMETRIC_INIT, 2, 20_000, seed=s, workers=1) for s in range(50)]
    vecs = np.array([r.state.to_vector() for r in runs])
    pooled = vecs.mean(axis=0)
    pooled_se = np.sqrt(np.sum(np.abs(vecs - pooled) ** 2, axis=0) / (len(runs) - 1) / len(runs))
    assert np.all(np.abs(pooled - ref) <= 4 * pooled_se + 1e-15)


def test_sigma3_characteristic_function():
    n, lam, m = 3, 0.6, 10_000_000
    s = draws(n * lam, 8, m)
    for y in (1, -1):
        vals = np.exp(n * lam) * (1j ** ((y * s) % 4))
        mean = vals.mean()
        se = np.sqrt(np.var(vals.real, ddof=1) + np.var(vals.imag, ddof=1)) / np.sqrt(m)
        assert abs(mean - np.exp(1j * n * lam * y)) <= 4 * se


def test_continuous_zero_time():
    est = estimate_continuous(LatticeGenerator(1.0), ScalarState.delta(0), 0.0, 10)
    assert est.state.amps.tolist() == [1]


def test_continuous_bessel_points():
    est = estimate_continuous(LatticeGenerator(1.0), ScalarState.delta(0), 1.0, 10_000_000, seed=5)
    assert abs(est.state.amplitude(0) - 0.76519769) <= 4 * est.std_err[0 - est.state.x_min]
    assert abs(est.state.amplitude(1) - 0.44005059j) <= 4 * est.std_err[1 - est.state.x_min]
