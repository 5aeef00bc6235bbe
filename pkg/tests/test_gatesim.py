import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from coupler_lab.errors import CalibrationFailed, UnreachableOperatingPoint, UnstableFilter
from coupler_lab.gatesim import (
    CZTemplate, FluxPulse, IdleFrame, PredistortionFilter, build_pulse, calibrate_cz, cz_metrics, distort, evolve,
    flux_branch, flux_to_theta, idle_theta, predistort, run_gate, slepian_pulse, theta_to_flux, wrap,
)
from coupler_lab.hammod import build_hamiltonian, reference_system

THETA_OP, TAU_OP = 1.18094, 27.7608  # calibrated operating point of the reference device


def test_flat_slepian():
    _, th = slepian_pulse(0.3, 0.3, 20.0, 0.0, dt=0.1)
    np.testing.assert_allclose(th, 0.3)


@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(1, 60), st.floats(-1, 1))
def test_slepian_endpoints(a, b, tau, lam):
    t, th = slepian_pulse(a, b, tau, lam, t=np.array([0.0, tau]))
    assert th[0] == pytest.approx(a, abs=1e-9)
    assert th[1] == pytest.approx(b, abs=1e-9)


@given(st.floats(-1, 1), st.floats(0.01, 1), st.floats(5, 50))
def test_single_harmonic_peaks_at_midpoint(a, lam, tau):
    t, th = slepian_pulse(a, a, tau, lam, dt=tau / 200)
    assert np.argmax(th) == 100


def test_idle_theta_maps_to_idle_flux(device):
    np.testing.assert_allclose(theta_to_flux(np.full(5, idle_theta(device)), device), device.coupler.flux,
                               atol=1e-9)


# the angle is quadratic in flux at the sweet spot, so start slightly off it
@given(st.floats(0.01, 0.33))
def test_flux_theta_round_trip(flux):
    s = reference_system()
    lo, hi = flux_branch(s)
    flux = min(flux, hi)
    assert float(theta_to_flux(flux_to_theta(s, flux), s)) == pytest.approx(flux, abs=1e-9)


def test_ramp_to_operating_point_is_monotone(device):
    p = build_pulse(device, THETA_OP, TAU_OP, 5.5, 0.01)
    t = p.times - 5.5
    rise = p.samples[(t > 0) & (t < TAU_OP / 2)]
    assert np.all(np.diff(rise) < 0)
    th = flux_to_theta(device, p.samples[(t > 0) & (t < TAU_OP)])
    _, target = slepian_pulse(idle_theta(device), idle_theta(device), TAU_OP,
                              0.5 * (THETA_OP - idle_theta(device)), t=t[(t > 0) & (t < TAU_OP)])
    np.testing.assert_allclose(th, target, atol=1e-6)


def test_unreachable_angle(device):
    with pytest.raises(UnreachableOperatingPoint):
        theta_to_flux(np.array([3.0]), device)


def test_default_gate_length(device):
    assert build_pulse(device, 1.18, 22.0).duration == pytest.approx(33.0)


def _step(n=4000, dt=0.1):
    x = np.zeros(n)
    x[200:] = 0.2
    return FluxPulse(x, dt, 0.0, 0.0, 0.0)


def test_zero_amplitude_filter_is_identity():
    p = _step()
    np.testing.assert_allclose(predistort(p, PredistortionFilter(((0.0, 20.0), (0.0, 100.0)))).samples, p.samples,
                               atol=1e-15)


def test_predistortion_recovers_step():
    p, f = _step(), PredistortionFilter()
    out = distort(predistort(p, f), f)
    assert np.max(np.abs(out.samples - p.samples)) < 1e-3 * 0.2
    raw = distort(p, f)
    assert np.max(np.abs(raw.samples - p.samples)) > 1e-3


@given(st.floats(-0.9, 0.9), st.floats(1, 300), st.floats(-0.9, 0.9), st.floats(1, 300))
def test_stage_order_is_irrelevant(a1, t1, a2, t2):
    p = _step(800)
    x = predistort(p, PredistortionFilter(((a1, t1), (a2, t2)))).samples
    y = predistort(p, PredistortionFilter(((a2, t2), (a1, t1)))).samples
    np.testing.assert_allclose(x, y, atol=1e-12 * max(1.0, np.abs(x).max()))


def test_unstable_stage():
    with pytest.raises(UnstableFilter):
        predistort(_step(), PredistortionFilter(((1.0, 10.0),)))


def test_static_evolution_matches_exponential(device):
    p = FluxPulse(np.full(200, device.coupler.flux), 0.05, device.coupler.flux, 0.0, 0.0)
    u = evolve(device, p)
    ref = expm(-2j * np.pi * build_hamiltonian(device) * p.duration)
    np.testing.assert_allclose(u, ref, atol=1e-9)


def test_evolution_is_unitary(device):
    u = evolve(device, build_pulse(device, THETA_OP, TAU_OP, dt=0.02))
    assert np.abs(u.conj().T @ u - np.eye(27)).max() < 1e-9


def test_evolution_step_must_divide_grid(device):
    with pytest.raises(ValueError):
        evolve(device, build_pulse(device, 1.0, 10.0, dt=0.05), dt=0.03)


def _dressed(frame, diag_phases):
    d = np.ones(len(frame.energies), dtype=complex)
    for label, ph in diag_phases.items():
        d[frame.labels[label]] = np.exp(1j * ph)
    return frame.vectors @ np.diag(d) @ frame.vectors.conj().T


def test_metrics_of_ideal_cz_and_identity(device):
    frame = IdleFrame.from_system(device)
    r = cz_metrics(_dressed(frame, {"11": np.pi}), frame)
    assert r.phi11 == pytest.approx(np.pi) and r.leakage == pytest.approx(0.0, abs=1e-12)
    r = cz_metrics(np.eye(27), frame)
    assert r.phi11 == pytest.approx(0.0, abs=1e-12)


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_conditional_phase_ignores_local_and_global_phases(phi, a, b, g):
    s = reference_system()
    frame = IdleFrame.from_system(s)
    u = _dressed(frame, {"10": a, "01": b, "11": phi + a + b})
    r = cz_metrics(np.exp(1j * g) * u, frame)
    assert float(wrap(r.phi11 - phi)) == pytest.approx(0.0, abs=1e-9)
    assert r.single_qubit_phases == pytest.approx((float(wrap(a)), float(wrap(b))), abs=1e-9)


def test_dt_refinement_converges(device):
    leaks = [run_gate(device, build_pulse(device, THETA_OP, TAU_OP, 5.5, dt)).leakage for dt in (0.04, 0.02, 0.01)]
    d = np.diff(leaks)
    assert np.all(np.sign(d) == np.sign(d[0]))
    assert abs(d[1]) < abs(d[0]) / 3


@pytest.mark.slow
def test_doubled_couplings_shorten_the_gate(device):
    s2 = device.with_couplings(2 * 51.5, 2 * 53.9, 2 * 3.7)
    cal = calibrate_cz(s2)
    assert abs(float(wrap(cal.result.phi11 - np.pi))) < 0.01
    assert cal.pulse.interaction_ns < TAU_OP


@pytest.mark.slow
def test_capped_coupler_cannot_make_cz():
    capped = reference_system(coupler_max=3.3)
    with pytest.raises(CalibrationFailed):
        calibrate_cz(capped, CZTemplate(maxiter=40, starts=2, grid_thetas=3, grid_taus=(10.0, 30.0, 10.0)))
