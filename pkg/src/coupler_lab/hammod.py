"""Three-mode transmon Hamiltonian: qubit 1, coupler, qubit 2.

Energies are in GHz (E/h), couplings in MHz at the interfaces. Mode order in
every tensor product is (q1, coupler, q2).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import least_squares

from .captools import EffectiveCapMatrix
from .errors import (EtaUnity, FitDiverged, InsufficientData, LabelCollision,
                     OutOfTransmonRegime, ResonantDivergence)

REGIME_RATIO = 20.0


@dataclass(frozen=True)
class TransmonParams:
    """Transmon energies in GHz. A tunable device sets ``ej_max`` and ``flux``."""

    ec: float
    ej: float | None = None
    ej_max: float | None = None
    flux: float = 0.0

    def __post_init__(self):
        if self.ec <= 0:
            raise ValueError("ec must be positive")
        if self.ej is None and self.ej_max is None:
            raise ValueError("give ej or ej_max")
        if self.ej_max is not None and self.ej_max <= 0:
            raise ValueError("ej_max must be positive")

    @property
    def ej_eff(self):
        if self.ej_max is not None:
            return squid_ej(self.ej_max, self.flux)
        return self.ej

    @classmethod
    def from_freq(cls, f, alpha):
        ec = -alpha
        return cls(ec=ec, ej=(f + ec) ** 2 / (8 * ec))

    @classmethod
    def tunable(cls, f_max, alpha, flux=0.0):
        ec = -alpha
        return cls(ec=ec, ej_max=(f_max + ec) ** 2 / (8 * ec), flux=flux)

    def at_freq(self, f):
        """Same device retuned to frequency ``f`` (flux solved on the first branch)."""
        ej = (f + self.ec) ** 2 / (8 * self.ec)
        if self.ej_max is None:
            return replace(self, ej=ej)
        if ej > self.ej_max:
            raise ValueError(f"{f} GHz lies above the tunable maximum")
        return replace(self, flux=float(np.arccos(ej / self.ej_max) / np.pi))


def squid_ej(ej_max, flux):
    """Symmetric SQUID: ej_max |cos(pi flux)|."""
    return ej_max * np.abs(np.cos(np.pi * np.asarray(flux, dtype=float)))


def transmon_freq(p: TransmonParams, check=True):
    """Return (frequency, anharmonicity) in GHz."""
    ej = float(p.ej_eff)
    if check and ej / p.ec <= REGIME_RATIO:
        raise OutOfTransmonRegime(f"ej/ec = {ej / p.ec:.2f} is not above {REGIME_RATIO}")
    return np.sqrt(8 * ej * p.ec) - p.ec, -p.ec


@dataclass(frozen=True)
class SystemParams:
    """Two qubits and a coupler plus their bilinear couplings.

    ``g1c, g2c, g12`` are magnitudes in MHz. When ``ref_freqs`` is set they are
    taken as the values at those (q1, coupler, q2) frequencies and rescale as
    sqrt(w_i w_j); with ``ref_freqs=None`` they stay fixed.
    """

    q1: TransmonParams
    coupler: TransmonParams
    q2: TransmonParams
    g1c: float
    g2c: float
    g12: float
    levels: int = 3
    ref_freqs: tuple | None = None

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("levels must be at least 2")

    def freqs(self, check=True):
        return tuple(transmon_freq(p, check)[0] for p in (self.q1, self.coupler, self.q2))

    def anharms(self):
        return (-self.q1.ec, -self.coupler.ec, -self.q2.ec)

    def couplings(self, freqs=None):
        """Couplings in GHz at the current (or given) frequencies."""
        g = np.array([self.g1c, self.g2c, self.g12]) * 1e-3
        if self.ref_freqs is None:
            return tuple(g)
        f1, fc, f2 = self.freqs() if freqs is None else freqs
        r1, rc, r2 = self.ref_freqs
        scale = np.sqrt([f1 * fc / (r1 * rc), f2 * fc / (r2 * rc), f1 * f2 / (r1 * r2)])
        return tuple(g * scale)

    def with_coupler_freq(self, fc):
        return replace(self, coupler=self.coupler.at_freq(fc))

    def with_coupler_flux(self, flux):
        return replace(self, coupler=replace(self.coupler, flux=float(flux)))

    def with_couplings(self, g1c, g2c, g12):
        return replace(self, g1c=g1c, g2c=g2c, g12=g12)

    @classmethod
    def from_capacitances(cls, m: EffectiveCapMatrix, q1, coupler, q2, levels=3):
        f = tuple(transmon_freq(p)[0] for p in (q1, coupler, q2))
        g1c, g2c, g12, _, _ = coupling_strengths(m, f[0], f[2], f[1])
        return cls(q1, coupler, q2, g1c, g2c, g12, levels=levels, ref_freqs=f)


def reference_system(levels=3, rescale=True, coupler_max=4.210):
    """Device parameters of the reference two-qubit chip, coupler at idle."""
    q1 = TransmonParams.from_freq(4.10, -0.216)
    q2 = TransmonParams.from_freq(3.89, -0.217)
    coupler = TransmonParams.tunable(coupler_max, -0.250).at_freq(3.195)
    ref = (4.10, 3.195, 3.89) if rescale else None
    return SystemParams(q1, coupler, q2, 51.5, 53.9, 3.7, levels=levels, ref_freqs=ref)


def coupling_strengths(m: EffectiveCapMatrix, f1, f2, fc):
    """Approximate couplings (MHz) from the effective capacitance matrix.

    Returns ``(g1c, g2c, g12, eta, xi)``.
    """
    eta = m.c1c * m.c2c / (m.c12_star * m.c_sigmac) if m.c12_star else np.inf
    if np.isclose(eta, 1.0, rtol=0, atol=1e-12):
        raise EtaUnity("eta = 1 makes the qubit-qubit term vanish identically")
    g1c = 0.5 * m.c1c / np.sqrt(m.c_sigma1 * m.c_sigmac) * np.sqrt(f1 * fc) * 1e3
    g2c = 0.5 * m.c2c / np.sqrt(m.c_sigma2 * m.c_sigmac) * np.sqrt(f2 * fc) * 1e3
    if np.isfinite(eta):
        g12 = 0.5 * m.c12_star * (1 - eta) / np.sqrt(m.c_sigma1 * m.c_sigma2) * np.sqrt(f1 * f2) * 1e3
        xi = eta / (1 - eta)
    else:
        g12 = -0.5 * m.c1c * m.c2c / m.c_sigmac / np.sqrt(m.c_sigma1 * m.c_sigma2) * np.sqrt(f1 * f2) * 1e3
        xi = np.inf
    return g1c, g2c, g12, eta, xi


@lru_cache(maxsize=8)
def _ladder_ops(levels):
    b = np.diag(np.sqrt(np.arange(1, levels)), 1)
    eye = np.eye(levels)
    mats = []
    for k in range(3):
        f = [eye, eye, eye]
        f[k] = b
        mats.append(np.kron(np.kron(f[0], f[1]), f[2]))
    num = [bk.T @ bk for bk in mats]
    kerr = [bk.T @ bk.T @ bk @ bk for bk in mats]
    x = [bk.T - bk for bk in mats]
    # products of commuting real antisymmetric X are symmetric
    xx = {"1c": x[0] @ x[1], "2c": x[2] @ x[1], "12": x[0] @ x[2]}
    return num, kerr, xx


class HamiltonianParts:
    """Cached operator pieces so that H(w) is a cheap linear combination."""

    def __init__(self, levels):
        self.levels = levels
        self.num, self.kerr, self.xx = _ladder_ops(levels)

    def assemble(self, freqs, anharms, g):
        h = sum(f * n + 0.5 * a * k for f, a, n, k in zip(freqs, anharms, self.num, self.kerr))
        g1c, g2c, g12 = g
        return h - g1c * self.xx["1c"] + g2c * self.xx["2c"] - g12 * self.xx["12"]


def build_hamiltonian(s: SystemParams, freqs=None):
    """Hamiltonian matrix in GHz, dimension ``levels**3``.

    The coupling terms are written with (b^dag - b) quadratures; the signs
    -g1c, +g2c, -g12 follow from the floating-coupler capacitance matrix.
    """
    f = s.freqs() if freqs is None else freqs
    return HamiltonianParts(s.levels).assemble(f, s.anharms(), s.couplings(f))


def bare_index(state, levels):
    i, j, k = state
    return (i * levels + j) * levels + k


COMPUTATIONAL = {"00": (0, 0, 0), "10": (1, 0, 0), "01": (0, 0, 1), "11": (1, 0, 1)}
SINGLE = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


@dataclass
class DressedSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: dict
    participation: np.ndarray
    levels: int

    def energy(self, label):
        return self.eigenvalues[self.labels[label]]

    def index_of(self, bare):
        """Eigenindex with the largest overlap on a bare state tuple."""
        row = np.abs(self.eigenvectors[bare_index(bare, self.levels)]) ** 2
        return int(np.argmax(row))


def dressed_spectrum(h, s: SystemParams) -> DressedSpectrum:
    vals, vecs = np.linalg.eigh(h)
    n = s.levels
    labels = {}
    for name, bare in COMPUTATIONAL.items():
        labels[name] = int(np.argmax(np.abs(vecs[bare_index(bare, n)]) ** 2))
    single = {"q1": (1, 0, 0), "c": (0, 1, 0), "q2": (0, 0, 1)}
    for name, bare in single.items():
        labels.setdefault(name, int(np.argmax(np.abs(vecs[bare_index(bare, n)]) ** 2)))
    comp = [labels[k] for k in COMPUTATIONAL]
    sing = [labels[k] for k in single]
    if len(set(comp)) < len(comp) or len(set(sing)) < len(sing):
        raise LabelCollision("two bare states claim the same dressed state")
    rows = []
    bare_rows = [bare_index(b, n) for b in SINGLE]
    for k in sing:
        w = np.abs(vecs[bare_rows, k]) ** 2
        rows.append(w / w.sum())
    return DressedSpectrum(vals, vecs, labels, np.array(rows), n)


def zz_strength(s: SystemParams) -> float:
    """Static ZZ in MHz from the labelled dressed energies."""
    if s.levels < 3:
        raise ValueError("ZZ needs at least three levels per mode")
    sp = dressed_spectrum(build_hamiltonian(s), s)
    e = sp.energy
    return float((e("11") - e("10") - e("01") + e("00")) * 1e3)


def zz_curve(s: SystemParams, coupler_freqs):
    return np.array([zz_strength(s.with_coupler_freq(f)) for f in coupler_freqs])


def zz_map(s: SystemParams, coupler_freqs, detunings_mhz):
    """ZZ over a (detuning, coupler frequency) grid.

    Qubit 2 stays put and qubit 1 moves so that f1 - f2 equals each detuning.
    Returns an array of shape (len(detunings), len(coupler_freqs)) in MHz.
    """
    f2 = s.freqs()[2]
    out = np.empty((len(detunings_mhz), len(coupler_freqs)))
    for i, d in enumerate(detunings_mhz):
        q1 = s.q1.at_freq(f2 + d * 1e-3)
        si = replace(s, q1=q1)
        out[i] = zz_curve(si, coupler_freqs)
    return out


def zero_crossings(x, y):
    x, y = np.asarray(x), np.asarray(y)
    idx = np.where(np.signbit(y[:-1]) != np.signbit(y[1:]))[0]
    return [(x[i], x[i + 1]) for i in idx]


def idle_point(s: SystemParams, lo, hi, xtol=1e-9):
    """Bisect ZZ = 0 in coupler frequency on the bracket [lo, hi]."""
    from scipy.optimize import brentq

    return brentq(lambda f: zz_strength(s.with_coupler_freq(f)), lo, hi, xtol=xtol)


def gtilde_and_off(s: SystemParams):
    """Second-order transverse coupling (MHz), coupling ratio and off frequency (GHz)."""
    f1, fc, f2 = s.freqs()
    g1c, g2c, g12 = (1e3 * g for g in s.couplings())
    d1, d2, s1, s2 = f1 - fc, f2 - fc, f1 + fc, f2 + fc
    if min(abs(d1), abs(d2)) < 1e-12 or min(abs(s1), abs(s2)) < 1e-12:
        raise ResonantDivergence("coupler is resonant with a qubit")
    gt = g12 - 0.5 * g1c * g2c * 1e-3 * (1 / d1 + 1 / d2 - 1 / s1 - 1 / s2)
    xi = 2 * g1c * g2c / (g12 * fc * 1e3) if g12 else np.inf
    return gt, xi, f1 / np.sqrt(1 + xi)


@dataclass
class CouplingFit:
    g1c: float
    g2c: float
    g12: float
    sigma: tuple
    cost: float
    success: bool


def fit_zz_couplings(curve, base: SystemParams, guess=None, sigma=None, rescale=True):
    """Least-squares fit of (g1c, g2c, g12) in MHz to a measured ZZ curve.

    ``curve`` is a sequence of (coupler GHz, zeta MHz). ``sigma`` optionally
    gives per-point standard deviations. ``rescale`` selects whether the
    fitted couplings refer to the idle frequencies of ``base`` and rescale
    with frequency, or stay fixed.
    """
    curve = np.asarray(curve, dtype=float)
    if curve.ndim != 2 or len(curve) < 4:
        raise InsufficientData("need at least four curve points")
    fc, zeta = curve[:, 0], curve[:, 1]
    if np.ptp(zeta) == 0:
        raise FitDiverged("constant curve does not constrain the couplings")
    if not rescale:
        base = replace(base, ref_freqs=None)
    elif base.ref_freqs is None:
        base = replace(base, ref_freqs=base.freqs())
    systems = [base.with_coupler_freq(f) for f in fc]

    def solve(x0, w):
        def resid(g):
            return w * (np.array([zz_strength(si.with_couplings(*g)) for si in systems]) - zeta)

        r0 = resid(x0)
        sol = least_squares(resid, x0, x_scale="jac", xtol=1e-10, ftol=1e-8, gtol=1e-10, diff_step=1e-6)
        if not sol.success or 2 * sol.cost > (r0 @ r0) + 1e-30 and sol.cost > 0:
            raise FitDiverged("residual did not decrease")
        return sol

    x0 = np.array(guess if guess is not None else (base.g1c, base.g2c, base.g12), dtype=float)
    sol = solve(x0, np.ones_like(zeta))
    if sigma is not None:
        # points near a zero crossing carry huge weights; start from the unweighted optimum
        sol = solve(sol.x, 1.0 / np.asarray(sigma, dtype=float))
    jtj = sol.jac.T @ sol.jac
    dof = max(len(zeta) - 3, 1)
    scale = 1.0 if sigma is not None else 2 * sol.cost / dof
    try:
        cov = np.linalg.inv(jtj) * scale
    except np.linalg.LinAlgError as exc:
        raise FitDiverged("singular Jacobian at the optimum") from exc
    if not np.all(np.isfinite(cov)) or np.linalg.cond(jtj) > 1e16:
        raise FitDiverged("couplings are not identifiable from this curve")
    return CouplingFit(*sol.x, sigma=tuple(np.sqrt(np.abs(np.diag(cov)))), cost=sol.cost, success=True)
