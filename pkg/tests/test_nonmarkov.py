import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfcavity import (
    ModelParams,
    amplitude_mos,
    amplitude_series,
    asymptotic_eps4,
    asymptotic_measure,
    d_eps2_dt,
    is_markovian,
    nm_measure,
    trapped_amplitude,
    volume,
)
from halfcavity.nonmarkov import asymptotic_peak_times, asymptotic_term, auto_mesh_per_delay


def brute_force_measure(p, horizon, step=2e-4):
    """Sum of positive increments of |eps|^4 sampled from the exact series."""
    t = np.arange(0.0, horizon + step / 2, step)
    v = np.abs(amplitude_series(p, t)) ** 4
    dv = np.diff(v)
    return dv[dv > 0].sum()


def test_volume_values():
    assert volume(1.0) == 1.0
    assert volume(0.0) == 0.0
    assert volume(0.5j) == pytest.approx(0.0625)


def test_rate_without_feedback_is_negative(params):
    p = params(1.0, 0.7)
    assert d_eps2_dt(p, 0.6 + 0.2j, 0.0) == pytest.approx(-0.4)


@pytest.mark.parametrize("gtd", [0.1, 1.0, 4.0])
def test_rate_just_after_first_return_at_node_phase(params, gtd):
    p = params(gtd, 0.0)
    now = math.exp(-gtd / 2)
    expected = now * (1.0 - now)
    assert d_eps2_dt(p, now, 1.0) == pytest.approx(expected, rel=1e-14)
    assert expected > 0


def test_rate_matches_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(12):
        gtd = rng.uniform(0.2, 6.0)
        phi = rng.uniform(0, 2 * math.pi)
        p = ModelParams.from_dimensionless(gtd, phi)
        # keep clear of multiples of t_d, where higher derivatives jump
        m = rng.integers(0, 4)
        t = (m + rng.uniform(0.1, 0.9)) * gtd
        h = 1e-5
        fd = (abs(amplitude_series(p, t + h)) ** 2 - abs(amplitude_series(p, t - h)) ** 2) / (2 * h)
        lagged = amplitude_series(p, t - gtd) if t >= gtd else 0.0
        exact = d_eps2_dt(p, amplitude_series(p, t), lagged)
        assert exact == pytest.approx(fd, rel=1e-6, abs=1e-12)


@pytest.mark.parametrize("gtd, phi", [(1.0, 0.0), (2.0, math.pi / 2), (3.0, math.pi), (0.5, 0.3), (2.5, 4.0)])
def test_measure_matches_brute_force_oracle(params, gtd, phi):
    p = params(gtd, phi)
    res = nm_measure(p, horizon=30.0, adaptive=False, mesh_per_delay=256)
    oracle = brute_force_measure(p, res.horizon_used)
    assert res.measure == pytest.approx(oracle, abs=2e-7)


def test_measure_is_sum_of_interval_gains(params):
    res = nm_measure(params(1.0, 0.0))
    assert res.measure == pytest.approx(sum(iv.volume_gain for iv in res.intervals), abs=1e-15)
    for iv in res.intervals:
        assert iv.start < iv.end and iv.volume_gain > 0
        v0, v1 = np.abs(amplitude_series(res.params, [iv.start, iv.end])) ** 4
        assert v1 - v0 == pytest.approx(iv.volume_gain, abs=1e-9)


def test_growth_intervals_have_nonnegative_rate(params):
    p = params(2.0, 0.5)
    res = nm_measure(p)
    assert res.intervals
    for iv in res.intervals:
        t = np.linspace(iv.start, iv.end, 41)[1:-1]
        now = amplitude_series(p, t)
        lagged = np.where(t >= p.t_d, amplitude_series(p, np.maximum(t - p.t_d, 0)), 0)
        assert np.all(d_eps2_dt(p, now, lagged) >= -1e-9)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.1, 6.0), st.floats(0.0, 2 * math.pi))
def test_telescoping_identity(gtd, phi):
    res = nm_measure(ModelParams.from_dimensionless(gtd, phi), horizon=40.0, adaptive=False, mesh_per_delay=32)
    assert res.measure >= 0 and res.volume_loss >= 0
    assert res.measure - res.volume_loss == pytest.approx(res.final_volume - 1.0, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.05, math.pi - 0.05))
def test_measure_even_in_phase(gtd, phi):
    a = nm_measure(ModelParams.from_dimensionless(gtd, phi), horizon=40.0, adaptive=False)
    b = nm_measure(ModelParams.from_dimensionless(gtd, 2 * math.pi - phi), horizon=40.0, adaptive=False)
    c = nm_measure(ModelParams.from_dimensionless(gtd, phi + 2 * math.pi), horizon=40.0, adaptive=False)
    assert a.measure == pytest.approx(b.measure, abs=1e-10)
    assert a.measure == pytest.approx(c.measure, abs=1e-10)


def test_small_delay_is_markovian(params):
    res = nm_measure(params(0.05, math.pi / 2))
    assert res.measure == 0.0 and res.markovian and res.converged
    assert is_markovian(params(0.05, math.pi))


@pytest.mark.parametrize("phi", [0.0, math.pi / 2, math.pi])
def test_large_delay_measure(params, phi):
    res = nm_measure(params(20.0, phi))
    assert res.measure == pytest.approx(0.033, abs=0.005)
    assert not is_markovian(params(20.0, phi))


def test_measure_vanishes_as_delay_shrinks_off_node(params):
    values = [nm_measure(params(g, 1.0)).measure for g in (0.5, 0.1, 0.02)]
    assert values[-1] == 0.0


@settings(max_examples=8, deadline=None)
@given(st.floats(0.01, 5.0))
def test_node_phase_always_non_markovian(gtd):
    assert math.exp(-gtd / 2) < 1.0 / (1.0 + gtd / 2)
    p = ModelParams.from_dimensionless(gtd, 0.0)
    res = nm_measure(p)
    assert res.intervals and res.measure > 0
    assert not is_markovian(p)


@pytest.mark.parametrize("gtd, phi", [(0.5, 2.0), (1.2, 1.0), (2.0, math.pi), (1.6, math.pi / 2)])
def test_verdict_agrees_with_measure(params, gtd, phi):
    p = params(gtd, phi)
    res = nm_measure(p)
    assert is_markovian(p) == (res.measure <= 1e-6 and res.truncation_bound <= 1e-6)


def test_truncation_bound_reported_when_capped(params):
    res = nm_measure(params(30.0, 0.08), max_horizon=3000.0)
    assert not res.converged and res.notes
    assert res.truncation_bound > 0
    lo, hi = res.bracket
    assert hi - lo == pytest.approx(res.truncation_bound, rel=1e-9)


def test_zero_delay_is_trivially_markovian():
    res = nm_measure(ModelParams(1.0, 0.0, 1.0))
    assert res.measure == 0.0 and res.markovian


def test_auto_mesh_bounds():
    assert auto_mesh_per_delay(0.02) == 16
    assert auto_mesh_per_delay(1.0) == 100
    assert auto_mesh_per_delay(30.0) == 512


def test_asymptotic_first_term():
    assert asymptotic_measure(1) == pytest.approx(math.exp(-4.0), rel=1e-14)
    assert asymptotic_measure(1) == pytest.approx(0.018316, abs=1e-6)


def test_asymptotic_measure_value_and_monotonicity():
    partial = [asymptotic_measure(m) for m in range(1, 60)]
    assert np.all(np.diff(partial) > 0)
    assert max(partial) < 0.034
    assert asymptotic_measure(50) == pytest.approx(0.033, abs=0.001)
    total, tail = asymptotic_measure(50, with_tail=True)
    assert 0 < tail < 1e-3


def test_asymptotic_terms_approach_stirling_limit():
    ratio = asymptotic_term(200) * (2 * math.pi * 200) ** 2
    assert ratio == pytest.approx(1.0, rel=0.01)


def test_asymptotic_eps4_prefix(params):
    p = params(3.0, 0.0)
    t = np.linspace(0, 2.9, 7)
    np.testing.assert_allclose(asymptotic_eps4(p, t), np.exp(-2 * t), rtol=1e-14)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_asymptotic_eps4_segment_maximum(params, m):
    p = params(20.0, 0.0)
    t = np.linspace(m * 20.0, (m + 1) * 20.0, 200001)
    peak = t[np.argmax(asymptotic_eps4(p, t))]
    assert peak == pytest.approx(asymptotic_peak_times(p, [m])[0], abs=2e-4)


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("phi", [0.0, 1.0, math.pi])
def test_asymptotic_eps4_close_to_exact_at_peaks(params, m, phi):
    p = params(20.0, phi)
    tp = asymptotic_peak_times(p, [m])[0]
    exact = abs(amplitude_series(p, tp)) ** 4
    assert asymptotic_eps4(p, tp) == pytest.approx(exact, rel=0.01)


def test_trapped_amplitude_closed_form(params):
    assert trapped_amplitude(ModelParams(1.0, 0.0, 0.0)) == 1.0
    assert trapped_amplitude(params(2.0, 2 * math.pi)) == 0.5
    with pytest.warns(UserWarning):
        trapped_amplitude(params(2.0, 1.0))


def test_trapped_amplitude_reached_by_integration(params):
    p = params(1.0, 0.0)
    tr = amplitude_mos(p, 300.0, 512)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        target = trapped_amplitude(p)
    assert target == pytest.approx(2 / 3)
    assert abs(tr.values[-1] - target) <= 1e-3
