"""Diabatic CZ gate: Slepian flux pulses, predistortion, evolution, calibration.

Time is in ns and frequencies in GHz, so a phase is ``2*pi*E*t``. The control
angle is ``theta = arctan2(2*g2c, f2 - fc)``, the mixing angle of qubit 2 with
the coupler, which is the leakage channel the pulse shape has to suppress.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import CalibrationFailed, UnreachableOperatingPoint, UnstableFilter
from .hammod import (REGIME_RATIO, HamiltonianParts, SystemParams,
                     dressed_spectrum, build_hamiltonian)


@dataclass(frozen=True)
class FluxPulse:
    """Coupler flux (in flux quanta) sampled at cell centres ``(k + 1/2) dt``."""

    samples: np.ndarray
    dt: float
    idle_flux: float
    pad_ns: float
    interaction_ns: float

    @property
    def times(self):
        return (np.arange(len(self.samples)) + 0.5) * self.dt

    @property
    def duration(self):
        return len(self.samples) * self.dt

    def to_csv(self, path):
        from .io import write_csv

        write_csv(path, ["t_ns", "flux_phi0"], np.c_[self.times, self.samples])


@dataclass(frozen=True)
class PredistortionFilter:
    """Cascade of first-order stages, each (amplitude, time constant in ns).

    A stage models a line whose step response is ``1 + a*exp(-t/tau)``.
    """

    stages: tuple = ((0.05, 20.0), (-0.02, 150.0))


@dataclass
class GateResult:
    unitary: np.ndarray
    computational: np.ndarray
    phi11: float
    leakage: float
    single_qubit_phases: tuple


def wrap(phi):
    """Wrap to (-pi, pi]."""
    out = np.angle(np.exp(1j * np.asarray(phi)))
    return np.where(np.isclose(out, -np.pi, atol=1e-15), np.pi, out)


# control angle ---------------------------------------------------------------

def slepian_pulse(theta_i, theta_f, tau, lambda1, dt=None, t=None):
    """First-harmonic fast-adiabatic trajectory on [0, tau].

    theta(t) = theta_i + (theta_f - theta_i)(1 - cos(pi t/tau))/2
               + lambda1 (1 - cos(2 pi t/tau))

    Evaluated on ``t`` if given, otherwise on the grid ``k*dt`` including both
    end points. Returns ``(t, theta)``.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if t is None:
        n = max(int(round(tau / dt)), 1)
        t = np.linspace(0.0, tau, n + 1)
    t = np.asarray(t, dtype=float)
    x = np.clip(t / tau, 0.0, 1.0)
    th = theta_i + 0.5 * (theta_f - theta_i) * (1 - np.cos(np.pi * x)) + lambda1 * (1 - np.cos(2 * np.pi * x))
    return t, th


def _coupler_freq(s: SystemParams, flux):
    c = s.coupler
    ej = c.ej_max * np.abs(np.cos(np.pi * np.asarray(flux, dtype=float)))
    return np.sqrt(8 * ej * c.ec) - c.ec


def _theta_of_freq(s: SystemParams, fc):
    f1, _, f2 = s.freqs()
    g = s.g2c * 1e-3
    if s.ref_freqs is not None:
        g = g * np.sqrt(fc * f2 / (s.ref_freqs[1] * s.ref_freqs[2]))
    return np.arctan2(2 * g, f2 - fc)


def flux_branch(s: SystemParams):
    """Flux interval [0, upper] on which the coupler stays a transmon."""
    c = s.coupler
    if c.ej_max is None:
        raise UnreachableOperatingPoint("coupler is not tunable")
    ratio = REGIME_RATIO * c.ec / c.ej_max
    if ratio >= 1:
        return 0.0, 0.0
    return 0.0, float(np.arccos(ratio) / np.pi)


def flux_to_theta(s: SystemParams, flux):
    return _theta_of_freq(s, _coupler_freq(s, flux))


def idle_theta(s: SystemParams):
    return float(flux_to_theta(s, s.coupler.flux))


def theta_to_flux(theta, s: SystemParams, tol=1e-13):
    """Invert the control angle onto the first flux branch (vectorised Newton)."""
    theta = np.asarray(theta, dtype=float)
    lo, hi = flux_branch(s)
    grid = np.linspace(lo, hi, 4001)
    tg = flux_to_theta(s, grid)  # decreasing in flux
    tmin, tmax = tg[-1], tg[0]
    if theta.size and (theta.min() < tmin - 1e-12 or theta.max() > tmax + 1e-12):
        raise UnreachableOperatingPoint(
            f"theta range [{theta.min():.4f}, {theta.max():.4f}] leaves the branch [{tmin:.4f}, {tmax:.4f}]")
    x = np.interp(-theta, -tg, grid)
    h = 1e-7
    for _ in range(30):
        f = flux_to_theta(s, x) - theta
        d = (flux_to_theta(s, x + h) - flux_to_theta(s, x - h)) / (2 * h)
        step = np.where(d != 0, f / np.where(d == 0, 1, d), 0.0)
        x = np.clip(x - step, lo, hi)
        if np.max(np.abs(step), initial=0.0) < tol:
            break
    return x


def build_pulse(s: SystemParams, theta_op, tau, pad=5.5, dt=0.01):
    """Symmetric CZ pulse peaking at ``theta_op`` after ``pad + tau/2``."""
    th_i = idle_theta(s)
    n = int(round((2 * pad + tau) / dt))
    t = (np.arange(n) + 0.5) * dt - pad
    _, th = slepian_pulse(th_i, th_i, tau, 0.5 * (theta_op - th_i), t=t)
    th = np.where((t > 0) & (t < tau), th, th_i)
    flux = theta_to_flux(th, s)
    flux[(t <= 0) | (t >= tau)] = s.coupler.flux
    return FluxPulse(flux, dt, s.coupler.flux, pad, tau)


# predistortion ----------------------------------------------------------------

def _stage_coeffs(a, tau, dt):
    al = 1 - np.exp(-dt / tau)
    b = np.array([1 + a - a * al, -(1 + a) * (1 - al)])
    den = np.array([1.0, -(1 - al)])
    return b, den


def _check(f: PredistortionFilter):
    for a, tau in f.stages:
        if abs(a) >= 1:
            raise UnstableFilter(f"stage amplitude {a} is not below 1 in magnitude")
        if tau <= 0:
            raise UnstableFilter("time constants must be positive")


def distort(p: FluxPulse, f: PredistortionFilter) -> FluxPulse:
    """Apply the line response modelled by ``f``."""
    _check(f)
    x = p.samples - p.idle_flux
    for a, tau in f.stages:
        b, den = _stage_coeffs(a, tau, p.dt)
        x = lfilter(b, den, x)
    return replace(p, samples=x + p.idle_flux)


def predistort(p: FluxPulse, f: PredistortionFilter) -> FluxPulse:
    """Inverse of :func:`distort`; each stage is a stable first-order IIR."""
    if p.dt <= 0:
        raise ValueError("dt must be positive")
    _check(f)
    x = p.samples - p.idle_flux
    for a, tau in f.stages:
        b, den = _stage_coeffs(a, tau, p.dt)
        x = lfilter(den, b, x)
    return replace(p, samples=x + p.idle_flux)


# evolution -------------------------------------------------------------------

class _Propagator:
    def __init__(self, s: SystemParams):
        self.s = s
        self.parts = HamiltonianParts(s.levels)
        n = s.levels
        par = np.array([(i + j + k) % 2 for i in range(n) for j in range(n) for k in range(n)])
        # the quadrature couplings change two excitation numbers at once
        self.blocks = [np.flatnonzero(par == 0), np.flatnonzero(par == 1)]
        f1, _, f2 = s.freqs()
        self.f1, self.f2 = f1, f2
        self.anh = s.anharms()

    def hamiltonian(self, fc):
        f = (self.f1, fc, self.f2)
        return self.parts.assemble(f, self.anh, self.s.couplings(f))

    def step(self, fc, dt):
        h = self.hamiltonian(fc)
        u = np.zeros(h.shape, dtype=complex)
        for b in self.blocks:
            e, v = np.linalg.eigh(h[np.ix_(b, b)])
            u[np.ix_(b, b)] = (v * np.exp(-2j * np.pi * e * dt)) @ v.T
        return u


def evolve(s: SystemParams, p: FluxPulse, dt=None):
    """Ordered product of exact step propagators with midpoint flux.

    ``dt`` must divide the pulse grid. Flux between samples is linear, with the
    idle value held at both ends.
    """
    dt = p.dt if dt is None else dt
    m = p.dt / dt
    if abs(m - round(m)) > 1e-9 or round(m) < 1:
        raise ValueError("dt must divide the pulse sample spacing")
    m = int(round(m))
    T = p.duration
    nsteps = len(p.samples) * m
    tm = (np.arange(nsteps) + 0.5) * dt
    ts = np.r_[0.0, p.times, T]
    fs = np.r_[p.idle_flux, p.samples, p.idle_flux]
    flux = np.interp(tm, ts, fs)
    fc = _coupler_freq(s, flux)
    prop = _Propagator(s)
    u = np.eye(s.levels**3, dtype=complex)
    for f in fc:
        u = prop.step(f, dt) @ u
    return u


@dataclass
class IdleFrame:
    """Dressed basis at idle used to read out gate phases."""

    energies: np.ndarray
    vectors: np.ndarray
    labels: dict

    @classmethod
    def from_system(cls, s: SystemParams):
        sp = dressed_spectrum(build_hamiltonian(s), s)
        return cls(sp.eigenvalues, sp.eigenvectors, sp.labels)


def cz_metrics(u, frame: IdleFrame, duration=0.0) -> GateResult:
    """CZ figures of merit in the idle dressed frame.

    ``u`` is a lab-frame propagator over ``duration`` ns. Pass ``duration=0``
    when ``u`` is already expressed in the rotating dressed frame.
    """
    ud = frame.vectors.conj().T @ u @ frame.vectors
    ud = np.exp(2j * np.pi * frame.energies * duration)[:, None] * ud
    idx = [frame.labels[k] for k in ("00", "01", "10", "11")]
    sub = ud[np.ix_(idx, idx)]
    ph = np.angle(np.diag(sub))
    phi11 = float(wrap(ph[3] - ph[2] - ph[1] + ph[0]))
    leak = float(np.clip(1 - np.mean(np.sum(np.abs(sub) ** 2, axis=0)), 0.0, 1.0))
    sq = (float(wrap(ph[2] - ph[0])), float(wrap(ph[1] - ph[0])))
    return GateResult(ud, sub, phi11, leak, sq)


# calibration -----------------------------------------------------------------

@dataclass
class CZTemplate:
    """Starting point and numerics for the CZ calibration."""

    theta_op: float = 1.18
    tau: float = 25.0
    pad: float = 5.5
    dt: float = 0.01
    search_dt: float = 0.05
    weights: tuple = (1.0, 10.0)
    phase_tol: float = 0.01
    leakage_tol: float = 1e-3
    maxiter: int = 400
    grid_dt: float = 0.1
    grid_thetas: int = 8
    grid_taus: tuple = (10.0, 30.0, 2.0)
    starts: int = 3


@dataclass
class Calibration:
    pulse: FluxPulse
    result: GateResult
    operation_flux: float
    theta_op: float
    objective: float
    evaluations: int

    def report(self):
        return {
            "phi11_rad": self.result.phi11,
            "leakage": self.result.leakage,
            "interaction_ns": self.pulse.interaction_ns,
            "operation_flux": self.operation_flux,
            "theta_op_rad": self.theta_op,
            "gate_ns": self.pulse.duration,
            "objective": self.objective,
            "single_qubit_phases_rad": list(self.result.single_qubit_phases),
        }


def run_gate(s: SystemParams, pulse: FluxPulse, dt=None, frame=None):
    frame = frame or IdleFrame.from_system(s)
    u = evolve(s, pulse, dt)
    return cz_metrics(u, frame, pulse.duration)


def calibrate_cz(s: SystemParams, template: CZTemplate | None = None) -> Calibration:
    """Nelder-Mead over (operation flux, interaction time).

    Minimises ``w1*(phi11 - pi)**2 + w2*leakage`` on the coarse ``search_dt``
    grid and re-evaluates the optimum at ``dt``. The result is accepted when
    the phase error and the leakage are below the template tolerances; a
    coarse scan seeds further searches if the first start falls short.
    """
    tp = template or CZTemplate()
    frame = IdleFrame.from_system(s)
    lo, _ = flux_branch(s)
    idle = s.coupler.flux
    th_i = idle_theta(s)
    th_top = float(flux_to_theta(s, lo))
    w1, w2 = tp.weights

    def theta_at(op_flux):
        return float(flux_to_theta(s, np.clip(op_flux, lo, idle)))

    def objective(x, dt):
        op_flux, tau = x
        penalty = 0.0
        if op_flux < lo or op_flux > idle:
            penalty += 1e3 * (max(lo - op_flux, op_flux - idle, 0.0)) ** 2 + 1.0
        if tau < 1.0:
            penalty += (1.0 - tau) ** 2 + 1.0
            tau = 1.0
        pulse = build_pulse(s, theta_at(op_flux), tau, tp.pad, dt)
        r = run_gate(s, pulse, dt, frame)
        return w1 * float(wrap(r.phi11 - np.pi)) ** 2 + w2 * r.leakage + penalty, pulse, r

    def flux_of(theta):
        if theta >= th_top:
            return lo
        if theta <= th_i:
            return idle
        return float(theta_to_flux(theta, s))

    def accepted(r):
        return abs(float(wrap(r.phi11 - np.pi))) < tp.phase_tol and r.leakage < tp.leakage_tol

    def search(th0, tau0):
        x0 = np.array([flux_of(th0), tau0])
        simplex = np.array([x0, x0 + [-step, 0.0], x0 + [0.0, -2.0]])
        return minimize(lambda x: objective(x, tp.search_dt)[0], x0, method="Nelder-Mead",
                        options=dict(initial_simplex=simplex, xatol=1e-7, fatol=1e-12,
                                     maxiter=tp.maxiter, maxfev=2 * tp.maxiter))

    step = max(0.02 * (idle - lo), 1e-4)
    best, nfev = None, 0
    starts = [(tp.theta_op, tp.tau)]
    scanned = False
    while starts:
        res = search(*starts.pop(0))
        nfev += res.nfev
        val, pulse, r = objective(res.x, tp.dt)
        if best is None or val < best[0]:
            best = (val, pulse, r, res.x)
        if accepted(best[2]):
            break
        if not scanned and tp.starts > 1:
            # coarse deterministic scan seeds further simplex searches
            scanned = True
            top = min(th_top - 0.02, 1.8)
            thetas = np.linspace(th_i + 0.25 * (top - th_i), top, tp.grid_thetas)
            taus = np.arange(tp.grid_taus[0], tp.grid_taus[1] + 1e-9, tp.grid_taus[2])
            scan = sorted((objective([flux_of(th), tau], tp.grid_dt)[0], th, tau)
                          for th in thetas for tau in taus)
            nfev += len(scan)
            starts += [(th, tau) for _, th, tau in scan[: tp.starts - 1]]
    val, pulse, r, x = best
    if not accepted(r):
        raise CalibrationFailed(
            f"no acceptable operating point after {nfev} evaluations "
            f"(phi11 = {r.phi11:.4f}, leakage = {r.leakage:.2e}, objective = {val:.3e})")
    return Calibration(pulse, r, float(x[0]), theta_at(x[0]), val, int(nfev))


def coupler_trajectory(s: SystemParams, p: FluxPulse):
    """Coupler frequency (GHz) at each pulse sample."""
    return _coupler_freq(s, p.samples)
