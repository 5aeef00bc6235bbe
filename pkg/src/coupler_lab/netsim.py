"""Quasi-lumped microwave network: lumped capacitors plus lossless lines.

Admittances are assembled nodally, internal nodes are folded away by a
Schur complement and capacitances are read back as Im(Y)/w.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .captools import GND, CapacitanceNetwork, ReducedCircuit, eliminate_com
from .errors import DistanceBelowCouplerWidth, SingularAtFrequency, ZeroReference
from .hammod import coupling_strengths

COUPLER_WIDTH_UM = 920.0
DEFAULT_Z0 = 50.0
DEFAULT_EPS = 6.45


@dataclass(frozen=True)
class TwoPort:
    abcd: np.ndarray

    @property
    def det(self):
        (a, b), (c, d) = self.abcd
        return a * d - b * c

    def y_params(self):
        (a, b), (c, d) = self.abcd
        if b == 0:
            raise ZeroDivisionError("zero series element has no admittance form")
        return np.array([[d / b, -1 / b], [-1 / b, a / b]])


def tl_twoport(z0, eps_eff, length, f):
    """Lossless line of ``length`` metres at ``f`` Hz."""
    if z0 <= 0 or eps_eff < 1 or f <= 0 or length < 0:
        raise ValueError("invalid line parameters")
    bl = 2 * np.pi * f * np.sqrt(eps_eff) / constants.c * length
    return TwoPort(np.array([[np.cos(bl), 1j * z0 * np.sin(bl)],
                             [1j * np.sin(bl) / z0, np.cos(bl)]]))


@dataclass(frozen=True)
class TLine:
    a: str
    b: str
    z0: float = DEFAULT_Z0
    eps_eff: float = DEFAULT_EPS
    length: float = 0.0  # metres

    def __post_init__(self):
        if self.z0 <= 0 or self.eps_eff < 1 or self.length < 0:
            raise ValueError(f"invalid line {self.a}-{self.b}")


@dataclass
class MicrowaveNetwork:
    nodes: list
    capacitors: list = field(default_factory=list)  # (a, b, fF), b may be GND
    tlines: list = field(default_factory=list)

    @classmethod
    def from_config(cls, doc):
        caps = [(str(c["a"]), str(c["b"]), float(c["fF"])) for c in doc.get("capacitors", [])]
        lines = [TLine(str(t["a"]), str(t["b"]), float(t.get("z0_ohm", DEFAULT_Z0)),
                       float(t.get("eps_eff", DEFAULT_EPS)), float(t["length_um"]) * 1e-6)
                 for t in doc.get("tlines", [])]
        return cls([str(n) for n in doc["nodes"]], caps, lines)

    def to_config(self):
        return {
            "nodes": list(self.nodes),
            "capacitors": [{"a": a, "b": b, "fF": c} for a, b, c in self.capacitors],
            "tlines": [{"a": t.a, "b": t.b, "z0_ohm": t.z0, "eps_eff": t.eps_eff,
                        "length_um": t.length * 1e6} for t in self.tlines],
        }


def assemble_admittance(net: MicrowaveNetwork, f, ports):
    """Port admittance matrix (siemens) with every other node eliminated."""
    ports = list(ports)
    if not ports:
        raise ValueError("need at least one port")
    # zero-length lines short their ends together
    parent = {n: n for n in net.nodes}
    parent[GND] = GND

    def root(n):
        while parent[n] != n:
            n = parent[n]
        return n

    for t in net.tlines:
        if t.length == 0:
            ra, rb = root(t.a), root(t.b)
            if ra != rb:
                if rb == GND:
                    ra, rb = rb, ra
                parent[rb] = ra
    nodes = [n for n in net.nodes if root(n) == n and n != GND]
    idx = {n: i for i, n in enumerate(nodes)}
    w = 2 * np.pi * f
    y = np.zeros((len(nodes), len(nodes)), dtype=complex)

    def stamp(a, b, yab):
        ia, ib = idx.get(root(a)), idx.get(root(b))
        if ia is not None:
            y[ia, ia] += yab[0, 0]
        if ib is not None:
            y[ib, ib] += yab[1, 1]
        if ia is not None and ib is not None and ia != ib:
            y[ia, ib] += yab[0, 1]
            y[ib, ia] += yab[1, 0]

    for a, b, c in net.capacitors:
        yc = 1j * w * c * 1e-15
        stamp(a, b, np.array([[yc, -yc], [-yc, yc]]))
    for t in net.tlines:
        if t.length > 0:
            stamp(t.a, t.b, tl_twoport(t.z0, t.eps_eff, t.length, f).y_params())
    pi = [idx[root(p)] for p in ports]
    ii = [i for i in range(len(nodes)) if i not in pi]
    yr = y[np.ix_(pi, pi)]
    if ii:
        yii = y[np.ix_(ii, ii)]
        if np.linalg.cond(yii) > 1e13:
            raise SingularAtFrequency(f"internal block is singular at {f:.4g} Hz")
        yr = yr - y[np.ix_(pi, ii)] @ np.linalg.solve(yii, y[np.ix_(ii, pi)])
    return yr


def extract_caps(y, f):
    """Maxwell capacitance matrix (fF) from Im(Y)/w."""
    if f <= 0:
        raise ValueError("frequency must be positive")
    return np.imag(np.asarray(y)) / (2 * np.pi * f) * 1e15


def network_caps(net: MicrowaveNetwork, f, ports):
    return CapacitanceNetwork.from_maxwell(list(ports), extract_caps(assemble_admittance(net, f, ports), f))


# device model ----------------------------------------------------------------

# Lumped part of the two-qubit device: qubit pads B, G; coupler islands D, E;
# extender ends C, F on the coupler side and Cq, Fq on the qubit side.
DEVICE_CAPS = [
    ("B", GND, 93.0), ("B", "Cq", 12.0), ("C", "D", 189.0), ("C", "F", 41.0), ("C", "E", 2.0),
    ("D", "E", 6.0), ("D", "F", 5.0), ("D", GND, 62.0), ("E", "F", 192.0), ("E", GND, 62.0),
    ("Fq", "G", 12.0), ("G", GND, 93.0),
]
EXTENDER_UM = 900.0
REFERENCE_DQQ_UM = 1960.0


def extender_length_um(d_qq):
    """Both extenders stretch symmetrically with the qubit spacing."""
    return EXTENDER_UM + 0.5 * (d_qq - REFERENCE_DQQ_UM)


def device_network(d_qq=REFERENCE_DQQ_UM, z0=DEFAULT_Z0, eps_eff=DEFAULT_EPS, caps=None):
    if d_qq < COUPLER_WIDTH_UM:
        raise DistanceBelowCouplerWidth(f"d_qq = {d_qq} um is below the coupler width")
    length = extender_length_um(d_qq) * 1e-6
    return MicrowaveNetwork(
        nodes=["B", "D", "E", "G", "C", "F", "Cq", "Fq"],
        capacitors=list(caps or DEVICE_CAPS),
        tlines=[TLine("Cq", "C", z0, eps_eff, length), TLine("Fq", "F", z0, eps_eff, length)],
    )


def effective_matrix(net: MicrowaveNetwork, f=5e9, ports=("B", "D", "E", "G")):
    caps = network_caps(net, f, ports)
    return eliminate_com(ReducedCircuit.from_network(caps, *ports))


def coupling_vs_distance(d_qq_list, freqs=(4.10, 3.89, 3.195), f_eval=5e9, **device):
    """Rows of (d_qq um, g1c, g2c, g12 MHz) for each spacing."""
    rows = []
    for d in d_qq_list:
        if d < COUPLER_WIDTH_UM:
            raise DistanceBelowCouplerWidth(f"d_qq = {d} um is below the coupler width")
        m = effective_matrix(device_network(d, **device), f_eval)
        g1c, g2c, g12, _, _ = coupling_strengths(m, freqs[0], freqs[1], freqs[2])
        rows.append((float(d), g1c, g2c, g12))
    return np.array(rows)


# crosstalk -------------------------------------------------------------------

@dataclass(frozen=True)
class CrosstalkGeometryCaps:
    c_q1_tl: float
    c_q2_tl: float
    c_cC_tl: float
    c_cF_tl: float
    c_q_dl: float = 0.12
    x_cross: float = 0.0

    def __post_init__(self):
        if min(self.c_q1_tl, self.c_q2_tl, self.c_cC_tl, self.c_cF_tl, self.c_q_dl) < 0:
            raise ValueError("capacitances must be nonnegative")


def crosstalk_ratios(caps: CrosstalkGeometryCaps):
    """(r_q1, r_q2, r_c); the coupler sees the island difference."""
    if caps.c_q_dl == 0:
        if max(caps.c_q1_tl, caps.c_q2_tl, caps.c_cC_tl, caps.c_cF_tl) == 0:
            return 0.0, 0.0, 0.0
        raise ZeroReference("drive-line reference capacitance is zero")
    return (caps.c_q1_tl / caps.c_q_dl, caps.c_q2_tl / caps.c_q_dl,
            abs(caps.c_cC_tl - caps.c_cF_tl) / caps.c_q_dl)


def to_db(r):
    return 20 * np.log10(r)


def nnn_coupling(c13, c_sigma1, c_sigma3, f):
    """Next-nearest-neighbour coupling in kHz for oscillators at ``f`` GHz."""
    if c_sigma1 <= 0 or c_sigma3 <= 0:
        raise ValueError("self-capacitances must be positive")
    return 0.5 * f * c13 / np.sqrt(c_sigma1 * c_sigma3) * 1e6
