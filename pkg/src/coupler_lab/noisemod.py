"""Decoherence bookkeeping for the CZ gate.

Times are in microseconds and rates in inverse microseconds. An infinite time
is always carried as a zero rate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import BadParticipation, DegenerateFit, InsufficientData, RangeNotCovered


def rate(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(np.isinf(t), 0.0, 1.0 / t)


def time_of(r):
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(r == 0, np.inf, 1.0 / r)


@dataclass(frozen=True)
class ModeCoherence:
    t1: float = np.inf
    t_phi1: float = np.inf
    t_phi2: float = np.inf

    def __post_init__(self):
        if min(self.t1, self.t_phi1, self.t_phi2) <= 0:
            raise ValueError("coherence times must be positive")

    @property
    def rates(self):
        return np.array([rate(self.t1), rate(self.t_phi1), rate(self.t_phi2)], dtype=float)

    @classmethod
    def from_rates(cls, g1, gphi1, gphi2):
        return cls(*(float(time_of(r)) for r in (g1, gphi1, gphi2)))


def ramsey_envelope(t, a_t, m: ModeCoherence):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    g1, gp1, gp2 = m.rates
    return a_t * np.exp(-0.5 * g1 * t - gp1 * t - (gp2 * t) ** 2)


def hybrid_rates(participation, uncoupled):
    """Rates of a coupled mode from the bare modes it is made of.

    Relaxation and white dephasing mix linearly with the participations;
    quasi-static dephasing adds in quadrature.
    """
    p = np.asarray(participation, dtype=float)
    if abs(p.sum() - 1) > 1e-6:
        raise BadParticipation(f"participations sum to {p.sum():.8f}")
    r = np.array([m.rates for m in uncoupled])
    g1 = p @ r[:, 0]
    gp1 = p @ r[:, 1]
    gp2 = np.sqrt(np.sum((p * r[:, 2]) ** 2))
    return ModeCoherence.from_rates(g1, gp1, gp2)


@dataclass(frozen=True)
class FluxNoiseModel:
    """Amplitudes in micro flux quanta; ``offset`` in 1/us."""

    sqrt_a: float = 21.4
    offset: float = 0.0
    b_coeff: float = 0.0

    def __post_init__(self):
        if self.sqrt_a < 0:
            raise ValueError("sqrt_a must be nonnegative")


def flux_noise_dephasing(slope, model: FluxNoiseModel, kind="echo"):
    """Dephasing rate (1/us) for a flux slope given in 2*pi*GHz per flux quantum.

    ``echo``: sqrt(A ln 2)|slope|.  ``ramsey``: B|slope|.
    """
    s = np.abs(np.asarray(slope, dtype=float)) * 2e3 * np.pi  # rad/us per flux quantum
    if kind == "echo":
        term = model.sqrt_a * 1e-6 * np.sqrt(np.log(2)) * s
    elif kind == "ramsey":
        term = model.b_coeff * 1e-6 * s
    else:
        raise ValueError("kind is 'echo' or 'ramsey'")
    return term + model.offset


@dataclass
class FluxNoiseFit:
    model: FluxNoiseModel
    sigma_sqrt_a: float
    sigma_offset: float


def fit_flux_noise(points):
    """Straight-line fit of echo rate against |slope|."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 3:
        raise InsufficientData("need at least three points")
    x = np.abs(pts[:, 0]) * 2e3 * np.pi * np.sqrt(np.log(2)) * 1e-6
    if np.ptp(x) == 0:
        raise DegenerateFit("all slopes are equal")
    res = stats.linregress(x, pts[:, 1])
    return FluxNoiseFit(FluxNoiseModel(sqrt_a=res.slope, offset=res.intercept),
                        res.stderr, res.intercept_stderr)


@dataclass
class RateCurves:
    """Rates versus coupler frequency, linearly interpolated."""

    freqs: np.ndarray
    gamma1: np.ndarray
    gamma_phi1: np.ndarray
    gamma_phi2: np.ndarray

    def __post_init__(self):
        order = np.argsort(self.freqs)
        self.freqs = np.asarray(self.freqs, dtype=float)[order]
        self.gamma1 = np.asarray(self.gamma1, dtype=float)[order]
        self.gamma_phi1 = np.asarray(self.gamma_phi1, dtype=float)[order]
        self.gamma_phi2 = np.asarray(self.gamma_phi2, dtype=float)[order]

    @classmethod
    def from_times(cls, freqs, t1, t_phi1, t_phi2):
        return cls(np.asarray(freqs), rate(t1), rate(t_phi1), rate(t_phi2))

    def at(self, f):
        f = np.asarray(f, dtype=float)
        lo, hi = self.freqs[0], self.freqs[-1]
        if f.min() < lo - 1e-12 or f.max() > hi + 1e-12:
            raise RangeNotCovered(f"trajectory spans [{f.min():.4f}, {f.max():.4f}] GHz, data [{lo:.4f}, {hi:.4f}]")
        return tuple(np.interp(f, self.freqs, g) for g in (self.gamma1, self.gamma_phi1, self.gamma_phi2))


def effective_times(curves: RateCurves, trajectory, t=None):
    """Effective (T1, Tphi1, Tphi2) along a coupler trajectory.

    ``trajectory`` holds coupler frequencies at times ``t``; uniform sampling
    is assumed when ``t`` is omitted. Rates are time-averaged except the
    quasi-static one, which enters as a root mean square.
    """
    f = np.asarray(trajectory, dtype=float)
    g1, gp1, gp2 = curves.at(f)
    if t is None:
        w = np.full(len(f), 1.0 / len(f))
    else:
        t = np.asarray(t, dtype=float)
        if len(t) < 2:
            w = np.ones(1)
        else:
            # trapezoid weights over the sampled span
            dt = np.diff(t)
            w = np.zeros(len(t))
            w[:-1] += dt / 2
            w[1:] += dt / 2
            w /= w.sum()
    return (float(time_of(w @ g1)), float(time_of(w @ gp1)), float(time_of(np.sqrt(w @ gp2**2))))


@dataclass
class CoherenceBudget:
    times: tuple  # per qubit (t1_eff, t_phi1_eff, t_phi2_eff)
    tau: float
    epsilon_limit: float

    def to_dict(self):
        return {
            "tau_ns": self.tau,
            "qubits": [dict(zip(("t1_eff_us", "t_phi1_eff_us", "t_phi2_eff_us"), map(float, q)))
                       for q in self.times],
            "epsilon_limit": self.epsilon_limit,
        }


def coherence_limit(times, tau, convention="main"):
    """Gate error from decoherence for a gate of ``tau`` ns.

    ``times`` is one (T1, Tphi1, Tphi2) triple per qubit in microseconds.
    ``convention="appendix"`` uses the prefactor N d / (2 (d + 1)) with N the
    number of qubits and d = 4 instead of 2/5.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    times = [tuple(q) for q in times]
    if convention == "main":
        k = 2 / 5
    elif convention == "appendix":
        d = 4
        k = len(times) * d / (2 * (d + 1))
    else:
        raise ValueError("convention is 'main' or 'appendix'")
    t_us = tau * 1e-3
    eps = 0.0
    for t1, tp1, tp2 in times:
        if min(t1, tp1, tp2) <= 0:
            raise ValueError("effective times must be positive")
        r1, rp1, rp2 = (float(rate(x)) for x in (t1, tp1, tp2))
        eps += k * (t_us * r1 + t_us * rp1 + (t_us * rp2) ** 2)
    return eps


def budget(curves_per_qubit, trajectory, tau, t=None, convention="main"):
    times = [effective_times(c, trajectory, t) for c in curves_per_qubit]
    return CoherenceBudget(tuple(times), tau, coherence_limit(times, tau, convention))
