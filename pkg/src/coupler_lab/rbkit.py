"""Two-qubit randomized benchmarking: Clifford synthesis, decay simulation, fits.

Cliffords are built from CZ and single-qubit pi and pi/2 rotations. Each
element keeps its physical gate list so that gate counts and per-gate noise
follow the decomposition. Simulation propagates 4x4 density matrices through
16x16 Liouville superoperators.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.optimize import curve_fit

from .errors import FitDiverged, InsufficientData, NonPhysical

D = 4

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


def _rot(p, angle):
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * p


GATES_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": _rot(_X, np.pi), "Y": _rot(_Y, np.pi),
    "X/2": _rot(_X, np.pi / 2), "-X/2": _rot(_X, -np.pi / 2),
    "Y/2": _rot(_Y, np.pi / 2), "-Y/2": _rot(_Y, -np.pi / 2),
}
CZ = np.diag([1, 1, 1, -1]).astype(complex)

# 24 single-qubit Cliffords as shortest sequences of the generators above
C1_TABLE = (
    ("I",), ("X",), ("Y",), ("Y", "X"),
    ("X/2", "Y/2"), ("X/2", "-Y/2"), ("-X/2", "Y/2"), ("-X/2", "-Y/2"),
    ("Y/2", "X/2"), ("Y/2", "-X/2"), ("-Y/2", "X/2"), ("-Y/2", "-X/2"),
    ("X/2",), ("-X/2",), ("Y/2",), ("-Y/2",),
    ("-X/2", "Y/2", "X/2"), ("-X/2", "-Y/2", "X/2"),
    ("X", "Y/2"), ("X", "-Y/2"), ("Y", "X/2"), ("Y", "-X/2"),
    ("X/2", "Y/2", "X/2"), ("-X/2", "Y/2", "-X/2"),
)
S1 = (("I",), ("Y/2", "X/2"), ("-X/2", "-Y/2"))


def seq_unitary(seq):
    u = np.eye(2, dtype=complex)
    for g in seq:
        u = GATES_1Q[g] @ u
    return u


def unitary_key(u, decimals=6):
    """Hashable key of a unitary modulo global phase."""
    flat = np.asarray(u).ravel()
    k = int(np.argmax(np.abs(flat) > 1e-6))
    v = flat * (abs(flat[k]) / flat[k])
    return tuple(np.round(v.real, decimals) + 0.0) + tuple(np.round(v.imag, decimals) + 0.0)


@lru_cache(maxsize=1)
def _c1_lookup():
    return {unitary_key(seq_unitary(s)): s for s in C1_TABLE}


def simplify(seq):
    """Shortest generator sequence implementing the same single-qubit Clifford."""
    return _c1_lookup()[unitary_key(seq_unitary(seq))]


@dataclass(frozen=True)
class Clifford2:
    """Layers applied in time order: ('1q', seq_a, seq_b) or ('cz',)."""

    layers: tuple

    @property
    def n_cz(self):
        return sum(1 for l in self.layers if l[0] == "cz")

    @property
    def n_1q(self):
        # every single-qubit slot counts its generators; an idle slot counts one
        return sum(len(l[1]) + len(l[2]) for l in self.layers if l[0] == "1q")

    def unitary(self):
        u = np.eye(4, dtype=complex)
        for l in self.layers:
            u = (CZ if l[0] == "cz" else np.kron(seq_unitary(l[1]), seq_unitary(l[2]))) @ u
        return u


def _pair(a, b):
    return ("1q", simplify(a), simplify(b))


@lru_cache(maxsize=1)
def clifford_group():
    """The 11520 two-qubit Cliffords in four classes (single, CNOT-, iSWAP-, SWAP-like)."""
    out = []
    c1 = list(product(C1_TABLE, C1_TABLE))
    for a, b in c1:
        out.append(Clifford2((_pair(a, b),)))
    for (a, b), s, t in product(c1, S1, S1):
        out.append(Clifford2((_pair(a, b), ("cz",), _pair(s + ("Y/2",), t + ("X/2",)))))
    for (a, b), s, t in product(c1, S1, S1):
        out.append(Clifford2((_pair(a, b), ("cz",), _pair(("Y/2",), ("-X/2",)), ("cz",),
                              _pair(s + ("Y/2",), t + ("X/2",)))))
    for a, b in c1:
        out.append(Clifford2((_pair(a, b), ("cz",), _pair(("-Y/2",), ("Y/2",)), ("cz",),
                              _pair(("Y/2",), ("-Y/2",)), ("cz",), _pair(("I",), ("Y/2",)))))
    return tuple(out)


@lru_cache(maxsize=1)
def clifford_index():
    return {unitary_key(c.unitary()): i for i, c in enumerate(clifford_group())}


def find_clifford(u):
    try:
        return clifford_index()[unitary_key(u)]
    except KeyError:
        raise ValueError("unitary is not a two-qubit Clifford") from None


def decomposition_stats():
    g = clifford_group()
    return float(np.mean([c.n_cz for c in g])), float(np.mean([c.n_1q for c in g]))


# sequences -------------------------------------------------------------------

@dataclass(frozen=True)
class RBSequence:
    cliffords: tuple
    n_interleaved: int
    seed: int
    reversing: int

    @property
    def length(self):
        return len(self.cliffords)

    def ideal_unitary(self, include_reversal=True):
        cz_n = np.linalg.matrix_power(CZ, self.n_interleaved)
        g = clifford_group()
        u = np.eye(4, dtype=complex)
        for c in self.cliffords:
            u = cz_n @ g[c].unitary() @ u
        if include_reversal:
            u = g[self.reversing].unitary() @ u
        return u


def synth_sequences(lengths, n_interleaved=0, count=1, seed=0):
    """``count`` random sequences per length, each closed by its inverse Clifford."""
    if count < 1 or min(lengths) < 1:
        raise ValueError("lengths and count must be positive")
    g = clifford_group()
    children = np.random.SeedSequence(seed).spawn(len(lengths) * count)
    cz_n = np.linalg.matrix_power(CZ, n_interleaved)
    seqs = []
    for i, (m, k) in enumerate(product(lengths, range(count))):
        rng = np.random.default_rng(children[i])
        idx = tuple(int(x) for x in rng.integers(0, len(g), size=m))
        u = np.eye(4, dtype=complex)
        for c in idx:
            u = cz_n @ g[c].unitary() @ u
        seqs.append(RBSequence(idx, n_interleaved, seed, find_clifford(u.conj().T)))
    return seqs


def sample_gate_counts(samples=10_000, seed=0):
    """Mean (CZ, single-qubit) gate counts over uniformly drawn Cliffords."""
    rng = np.random.default_rng(seed)
    g = clifford_group()
    idx = rng.integers(0, len(g), size=samples)
    return float(np.mean([g[i].n_cz for i in idx])), float(np.mean([g[i].n_1q for i in idx]))


# noise -------------------------------------------------------------------------

def _superop(u):
    """Liouville matrix of rho -> u rho u^dag (row-stacking)."""
    return np.kron(u, u.conj())


def _depol_super(p, dim):
    """rho -> p rho + (1 - p) Tr(rho) I/dim on a dim-level system."""
    eye = np.eye(dim)
    vec = eye.reshape(-1)
    return p * np.eye(dim * dim) + (1 - p) * np.outer(vec, vec) / dim


@dataclass(frozen=True)
class ErrorModel:
    """Depolarizing strengths per gate plus an optional interleaved gate.

    ``p_cz`` and ``p_1q`` are depolarizing parameters (1 means perfect).
    ``interleaved`` replaces the ideal CZ in the interleaved slots; it may be a
    sub-unitary 4x4 block, which models leakage as trace loss.
    """

    p_cz: float = 1.0
    p_1q: float = 1.0
    p_interleaved: float | None = None
    interleaved: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        for p in (self.p_cz, self.p_1q, self.p_interleaved):
            if p is not None and not 0 <= p <= 1:
                raise ValueError("depolarizing parameters must lie in [0, 1]")


def p_from_error(eps, d=D):
    return 1 - eps * d / (d - 1)


def error_from_p(p, d=D):
    return (1 - p) * (d - 1) / d


def _channel_super(fn):
    """Liouville matrix of a linear map on 4x4 matrices."""
    out = np.zeros((16, 16), dtype=complex)
    for k in range(16):
        e = np.zeros(16, dtype=complex)
        e[k] = 1.0
        out[:, k] = fn(e.reshape(4, 4)).reshape(-1)
    return out


def _local_depol(p, qubit):
    def fn(rho):
        r = rho.reshape(2, 2, 2, 2)
        if qubit == 0:
            rest = np.einsum("abad->bd", r)
            mixed = np.einsum("ac,bd->abcd", np.eye(2) / 2, rest)
        else:
            rest = np.einsum("abcb->ac", r)
            mixed = np.einsum("ac,bd->abcd", rest, np.eye(2) / 2)
        return p * rho + (1 - p) * mixed.reshape(4, 4)

    return _channel_super(fn)


class _Simulator:
    def __init__(self, model: ErrorModel):
        self.cache = {}
        self.dep = (_local_depol(model.p_1q, 0), _local_depol(model.p_1q, 1))
        self.cz = _depol_super(model.p_cz, 4) @ _superop(CZ)
        gate = CZ if model.interleaved is None else np.asarray(model.interleaved, dtype=complex)
        p_int = model.p_cz if model.p_interleaved is None else model.p_interleaved
        self.inter = _depol_super(p_int, 4) @ _superop(gate)
        eye = np.eye(2)
        self.local = {(g, q): _superop(np.kron(u, eye) if q == 0 else np.kron(eye, u))
                      for g, u in GATES_1Q.items() for q in (0, 1)}

    def clifford(self, i):
        s = self.cache.get(i)
        if s is None:
            s = np.eye(16, dtype=complex)
            for layer in clifford_group()[i].layers:
                if layer[0] == "cz":
                    s = self.cz @ s
                    continue
                # every listed generator, idle slots included, carries one gate of noise
                for q in (0, 1):
                    for g in layer[1 + q]:
                        s = self.dep[q] @ (self.local[(g, q)] @ s)
            self.cache[i] = s
        return s

    def survival(self, seq: RBSequence):
        rho = np.zeros(16, dtype=complex)
        rho[0] = 1.0
        inter = np.linalg.matrix_power(self.inter, seq.n_interleaved)
        for c in seq.cliffords:
            rho = inter @ (self.clifford(c) @ rho)
        rho = self.clifford(seq.reversing) @ rho
        return float(rho[0].real)


def simulate_decay(seqs, model: ErrorModel, shots=None, seed=None):
    """Mean survival of |00> per sequence length.

    Returns an array of rows (m, mean_fidelity, std). Binomial shot noise is
    added only when ``shots`` is given, and then ``seed`` is required.
    """
    if shots is not None and seed is None:
        raise ValueError("shot noise needs an explicit seed")
    sim = _Simulator(model)
    rng = np.random.default_rng(seed) if shots is not None else None
    by_m = {}
    for s in seqs:
        f = sim.survival(s)
        if rng is not None:
            f = rng.binomial(shots, min(max(f, 0.0), 1.0)) / shots
        by_m.setdefault(s.length, []).append(f)
    rows = [(m, float(np.mean(v)), float(np.std(v))) for m, v in sorted(by_m.items())]
    return np.array(rows)


# fitting -----------------------------------------------------------------------

@dataclass
class DecayFit:
    a: float
    b: float
    p: float
    sigma: dict

    @property
    def epsilon(self):
        return error_from_p(self.p)

    @property
    def epsilon_sigma(self):
        return self.sigma["p"] * (D - 1) / D


def _model(m, a, p, b):
    return a * p**m + b


def fit_decay(records, b_fixed=None):
    """Fit F = A p^m + B to rows of (m, fidelity[, std])."""
    r = np.asarray(records, dtype=float)
    if r.ndim != 2 or len(np.unique(r[:, 0])) < 3:
        raise InsufficientData("need at least three distinct sequence lengths")
    m, f = r[:, 0], r[:, 1]
    if np.ptp(f) == 0:
        raise FitDiverged("flat data carries no decay")
    b0 = 1 / D
    a0 = max(f[np.argmin(m)] - b0, 1e-3)
    ratio = np.clip((f - b0) / a0, 1e-6, None)
    p0 = float(np.clip(np.exp(np.polyfit(m, np.log(ratio), 1)[0]), 0.5, 0.999999))
    try:
        if b_fixed is None:
            popt, pcov = curve_fit(_model, m, f, p0=(a0, p0, b0),
                                   bounds=([0, 0, 0], [1.5, 1, 1]), maxfev=20000)
        else:
            popt, pcov = curve_fit(lambda x, a, p: _model(x, a, p, b_fixed), m, f, p0=(a0, p0),
                                   bounds=([0, 0], [1.5, 1]), maxfev=20000)
            popt = np.r_[popt, b_fixed]
            pcov = np.pad(pcov, (0, 1))
    except (RuntimeError, ValueError) as exc:
        raise FitDiverged(str(exc)) from exc
    err = np.sqrt(np.abs(np.diag(pcov)))
    if not np.all(np.isfinite(err)):
        err = np.where(np.isfinite(err), err, np.inf)
    a, p, b = popt
    return DecayFit(a=float(a), b=float(b), p=float(p),
                    sigma={"a": float(err[0]), "p": float(err[1]), "b": float(err[2])})


@dataclass
class InterleavedResult:
    epsilon_n: float
    epsilon_n_sigma: float
    epsilon_gate: float
    epsilon_gate_sigma: float
    n: int


def interleaved_analysis(ref: DecayFit, interleaved: DecayFit, n=1):
    """Error of the n-gate block and the per-gate error 1 - (1 - e_n)^(1/n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    pr, pn = ref.p, interleaved.p
    if not (0 < pr <= 1 and 0 < pn <= 1):
        raise ValueError("decay parameters must lie in (0, 1]")
    sr, sn = ref.sigma.get("p", 0.0), interleaved.sigma.get("p", 0.0)
    ratio = pn / pr
    s_ratio = np.hypot(sn / pr, pn * sr / pr**2)
    if ratio > 1 + 2 * s_ratio + 1e-12:
        raise NonPhysical(f"interleaved decay {pn:.6f} exceeds the reference {pr:.6f}")
    e_n = (1 - ratio) * (D - 1) / D
    s_en = s_ratio * (D - 1) / D
    e_gate = 1 - (1 - e_n) ** (1 / n)
    s_gate = (1 / n) * (1 - e_n) ** (1 / n - 1) * s_en
    return InterleavedResult(e_n, s_en, e_gate, s_gate, n)


def per_gate_error(e_n, n):
    return 1 - (1 - e_n) ** (1 / n)


def block_error(e_gate, n):
    return 1 - (1 - e_gate) ** n


def clifford_error_estimate(eps_cz, eps_1q, n_cz=1.5, n_1q=8.25):
    """Error per Clifford from summing its constituent gate errors."""
    return n_cz * eps_cz + n_1q * eps_1q


def aggregate(fits):
    """Mean and spread of per-experiment errors, for comparison with a pooled fit."""
    e = np.array([f.epsilon for f in fits])
    return float(e.mean()), float(e.std(ddof=1)) if len(e) > 1 else 0.0


def pooled_fit(record_sets):
    return fit_decay(np.vstack([np.asarray(r)[:, :2] for r in record_sets]))
