import numpy as np
import pytest
from hypothesis import given, strategies as st

from coupler_lab.errors import BadParticipation, DegenerateFit, InsufficientData, RangeNotCovered
from coupler_lab.noisemod import (
    FluxNoiseModel, ModeCoherence, RateCurves, budget, coherence_limit, effective_times, fit_flux_noise,
    flux_noise_dephasing, hybrid_rates, ramsey_envelope,
)

REF_TIMES = [(14.0, 67.0, 17.0), (43.0, 43.0, 6.0)]
times = st.floats(0.5, 500.0)


def test_ramsey_envelope():
    m = ModeCoherence(14.0, 67.0, 17.0)
    assert ramsey_envelope(0.0, 0.7, m) == 0.7
    assert ramsey_envelope(10.0, 1.0, ModeCoherence(t1=14.0)) == pytest.approx(np.exp(-10 / 28))
    expected = np.exp(-10 / 28 - 10 / 67 - (10 / 17) ** 2)
    assert ramsey_envelope(10.0, 1.0, m) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(0.426, abs=1e-3)


def test_hybrid_rates():
    a, b, c = ModeCoherence(10, 20, 30), ModeCoherence(5, 8, 13), ModeCoherence(40, 50, 60)
    h = hybrid_rates((1, 0, 0), (a, b, c))
    assert (h.t1, h.t_phi1, h.t_phi2) == pytest.approx((10, 20, 30))
    r = 0.1
    m = ModeCoherence.from_rates(r, r, r)
    h = hybrid_rates((0.5, 0, 0.5), (m, m, m))
    assert 1 / h.t1 == pytest.approx(r)
    assert 1 / h.t_phi2 == pytest.approx(r / np.sqrt(2))
    z = ModeCoherence()
    h = hybrid_rates((0.3, 0.3, 0.4), (z, z, z))
    assert np.isinf(h.t1) and np.isinf(h.t_phi1) and np.isinf(h.t_phi2)
    with pytest.raises(BadParticipation):
        hybrid_rates((0.5, 0.6, 0.0), (a, b, c))


@given(times, times, times)
def test_unhybridised_mode_keeps_its_rates(t1, tp1, tp2):
    m = ModeCoherence(t1, tp1, tp2)
    h = hybrid_rates((0, 1, 0), (ModeCoherence(1, 1, 1), m, ModeCoherence(2, 2, 2)))
    assert (h.t1, h.t_phi1, h.t_phi2) == pytest.approx((t1, tp1, tp2), rel=1e-12)


def test_flux_noise_dephasing():
    m = FluxNoiseModel(sqrt_a=21.4)
    assert flux_noise_dephasing(1.0, m) == pytest.approx(0.112, abs=5e-4)
    assert flux_noise_dephasing(0.0, FluxNoiseModel(sqrt_a=21.4, offset=0.05)) == 0.05
    assert flux_noise_dephasing(2.0, FluxNoiseModel(b_coeff=10.0), kind="ramsey") == pytest.approx(
        10e-6 * 2 * 2e3 * np.pi)


def test_flux_noise_fit_exact():
    slopes = np.linspace(0.2, 3.0, 12)
    m = FluxNoiseModel(sqrt_a=21.4, offset=-0.132)
    fit = fit_flux_noise(np.c_[slopes, flux_noise_dephasing(slopes, m)])
    assert fit.model.sqrt_a == pytest.approx(21.4, abs=1e-9)
    assert fit.model.offset == pytest.approx(-0.132, abs=1e-9)


def test_flux_noise_fit_errors():
    with pytest.raises(DegenerateFit):
        fit_flux_noise([(1.0, 0.1), (1.0, 0.2), (1.0, 0.3)])
    with pytest.raises(InsufficientData):
        fit_flux_noise([(1.0, 0.1), (2.0, 0.2)])


def _curves(r1=0.05, rp1=0.02, rp2=0.04):
    f = np.linspace(3.0, 4.0, 11)
    return RateCurves(f, np.full(11, r1), np.full(11, rp1), np.full(11, rp2))


def test_effective_times_constant_rate():
    t1, tp1, tp2 = effective_times(_curves(), np.linspace(3.1, 3.9, 50))
    assert (t1, tp1, tp2) == pytest.approx((20.0, 50.0, 25.0))


def test_effective_times_two_segments():
    f = np.array([3.0, 4.0])
    r = 0.1
    c = RateCurves(f, np.array([r, 0.0]), np.array([r, 0.0]), np.array([r, 0.0]))
    traj = np.r_[np.full(100, 3.0), np.full(100, 4.0)]
    t1, tp1, tp2 = effective_times(c, traj)
    assert 1 / t1 == pytest.approx(r / 2)
    assert 1 / tp2 == pytest.approx(r / np.sqrt(2))


def test_trajectory_outside_data():
    with pytest.raises(RangeNotCovered):
        effective_times(_curves(), [2.5, 3.5])


@given(st.floats(5, 60), st.floats(0.01, 0.3), st.floats(0.01, 0.3), st.floats(0.01, 0.3))
def test_effective_times_resampling_invariance(tau, a, b, c):
    freqs = np.linspace(3.0, 4.0, 41)
    curves = RateCurves(freqs, a * (1 + np.sin(3 * freqs)), b * freqs, c * (1 + (freqs - 3) ** 2))

    def traj(n):
        t = np.linspace(0.0, tau, n)
        return t, 3.5 + 0.4 * np.sin(np.pi * t / tau) ** 2

    coarse = effective_times(curves, traj(4001)[1], traj(4001)[0])
    fine = effective_times(curves, traj(16001)[1], traj(16001)[0])
    np.testing.assert_allclose(coarse, fine, rtol=1e-6)


def test_coherence_limit_reference_times():
    assert coherence_limit(REF_TIMES, 33.0) == pytest.approx(1.7e-3, rel=0.05)
    assert coherence_limit(REF_TIMES, 0.0) == 0.0
    inf = np.inf
    assert coherence_limit([(14.0, inf, inf), (inf, inf, inf)], 33.0) == pytest.approx(0.4 * 33e-3 / 14)
    assert coherence_limit(REF_TIMES, 33.0, "appendix") == pytest.approx(2 * coherence_limit(REF_TIMES, 33.0))


@given(st.lists(times, min_size=6, max_size=6), st.floats(1, 100), st.integers(0, 5), st.floats(1.01, 3))
def test_coherence_limit_monotonicity(ts, tau, k, factor):
    q = [tuple(ts[:3]), tuple(ts[3:])]
    base = coherence_limit(q, tau)
    longer = list(ts)
    longer[k] *= factor
    assert coherence_limit([tuple(longer[:3]), tuple(longer[3:])], tau) < base
    assert coherence_limit(q, tau * factor) > base


def test_budget_on_constant_curves():
    b = budget([_curves(), _curves(0.02, 0.02, 0.16)], np.linspace(3.2, 3.8, 20), 33.0)
    assert b.epsilon_limit == pytest.approx(coherence_limit(b.times, 33.0))
    assert b.to_dict()["qubits"][0]["t1_eff_us"] == pytest.approx(20.0)
