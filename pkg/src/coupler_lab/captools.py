"""Capacitance-network reduction for a floating-transmon coupler.

The canonical representation is the Maxwell capacitance matrix: self
capacitances on the diagonal, negated mutual capacitances off it. Star-mesh
elimination and the Schur complement are two views of the same reduction.
All capacitances are in femtofarads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import constants

from .errors import DegenerateTransform, SingularMatrix, SingularReduction

GND = "GND"


@dataclass(frozen=True)
class CapacitanceNetwork:
    """Labelled nodes with pairwise capacitances and shunts to ground (fF)."""

    nodes: tuple
    cap: np.ndarray
    shunt: np.ndarray

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError("node labels must be unique")
        cap = np.array(self.cap, dtype=float)
        shunt = np.array(self.shunt, dtype=float)
        n = len(nodes)
        if cap.shape != (n, n) or shunt.shape != (n,):
            raise ValueError("capacitance arrays do not match the node list")
        if not np.allclose(cap, cap.T, rtol=0, atol=1e-12):
            raise ValueError("capacitance matrix must be symmetric")
        np.fill_diagonal(cap, 0.0)
        if (cap < 0).any() or (shunt < 0).any():
            raise ValueError("capacitances must be nonnegative")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "cap", cap)
        object.__setattr__(self, "shunt", shunt)

    def index(self, node):
        return self.nodes.index(node)

    def maxwell(self):
        m = -self.cap.copy()
        np.fill_diagonal(m, self.cap.sum(axis=1) + self.shunt)
        return m

    @classmethod
    def from_maxwell(cls, nodes, m, clip=1e-12):
        m = np.asarray(m, dtype=float)
        m = 0.5 * (m + m.T)
        cap = -m.copy()
        np.fill_diagonal(cap, 0.0)
        shunt = m.sum(axis=1)
        # round-off can leave tiny negative entries
        cap[np.abs(cap) < clip * max(1.0, np.abs(m).max())] = 0.0
        shunt[np.abs(shunt) < clip * max(1.0, np.abs(m).max())] = 0.0
        return cls(tuple(nodes), cap, shunt)

    def between(self, a, b):
        if b == GND:
            return float(self.shunt[self.index(a)])
        if a == GND:
            return float(self.shunt[self.index(b)])
        return float(self.cap[self.index(a), self.index(b)])

    @classmethod
    def from_netlist(cls, doc):
        nodes = [str(n) for n in doc["nodes"]]
        idx = {n: i for i, n in enumerate(nodes)}
        cap = np.zeros((len(nodes), len(nodes)))
        shunt = np.zeros(len(nodes))
        for item in doc.get("capacitors", []):
            a, b, c = str(item["a"]), str(item["b"]), float(item["fF"])
            if c < 0:
                raise ValueError(f"negative capacitance between {a} and {b}")
            if a == GND and b == GND:
                continue
            if b == GND or a == GND:
                node = a if b == GND else b
                if node not in idx:
                    raise ValueError(f"unknown node {node!r}")
                shunt[idx[node]] += c
                continue
            if a not in idx or b not in idx:
                raise ValueError(f"unknown node in capacitor {a}-{b}")
            if a == b:
                raise ValueError(f"self-loop capacitor on {a}")
            cap[idx[a], idx[b]] += c
            cap[idx[b], idx[a]] += c
        return cls(tuple(nodes), cap, shunt)

    def to_netlist(self):
        caps = []
        for i, j in combinations(range(len(self.nodes)), 2):
            if self.cap[i, j] != 0.0:
                caps.append({"a": self.nodes[i], "b": self.nodes[j], "fF": float(self.cap[i, j])})
        for i, n in enumerate(self.nodes):
            if self.shunt[i] != 0.0:
                caps.append({"a": n, "b": GND, "fF": float(self.shunt[i])})
        return {"nodes": list(self.nodes), "capacitors": caps}


def mesh_star(c_cf, c_sc, c_sf):
    """Delta-to-star transform of the triangle (C, F, ground).

    Returns the star branches (C-I, F-I, ground-I) around the new node I.
    """
    if min(c_cf, c_sc, c_sf) <= 0:
        raise DegenerateTransform("mesh-star needs three nonzero capacitances")
    s = c_cf * c_sc + c_cf * c_sf + c_sc * c_sf
    return s / c_sf, s / c_sc, s / c_cf


def star_mesh(branches):
    """Eliminate a star centre. ``branches`` is a list of (node, C) pairs.

    Returns a dict mapping each unordered node pair to its mesh capacitance.
    """
    branches = list(branches)
    if len(branches) < 2:
        raise DegenerateTransform("star-mesh needs at least two branches")
    total = sum(c for _, c in branches)
    if total == 0:
        raise DegenerateTransform("star branches sum to zero")
    out = {}
    for (a, ca), (b, cb) in combinations(branches, 2):
        out[(a, b)] = ca * cb / total
    return out


def kron_reduce(net: CapacitanceNetwork, keep):
    """Schur complement of the Maxwell matrix onto ``keep``."""
    keep = list(keep)
    if not keep or set(keep) - set(net.nodes):
        raise ValueError("keep must be a nonempty subset of the network nodes")
    if len(set(keep)) == len(net.nodes):
        raise ValueError("keep must be a strict subset")
    m = net.maxwell()
    ki = [net.index(n) for n in keep]
    ei = [i for i in range(len(net.nodes)) if i not in ki]
    # isolated nodes carry no charge path; drop them instead of inverting zeros
    ei = [i for i in ei if m[i, i] != 0.0]
    red = m[np.ix_(ki, ki)]
    if ei:
        mee = m[np.ix_(ei, ei)]
        try:
            cond = np.linalg.cond(mee)
        except np.linalg.LinAlgError:
            cond = np.inf
        if not np.isfinite(cond) or cond > 1e14:
            raise SingularReduction("eliminated block is singular")
        red = red - m[np.ix_(ki, ei)] @ np.linalg.solve(mee, m[np.ix_(ei, ki)])
    return CapacitanceNetwork.from_maxwell(keep, red)


def eliminate_node(net: CapacitanceNetwork, node):
    """Remove one node by a single star-mesh step (ground is a branch too)."""
    k = net.index(node)
    branches = [(n, net.cap[k, i]) for i, n in enumerate(net.nodes) if i != k and net.cap[k, i] > 0]
    if net.shunt[k] > 0:
        branches.append((GND, net.shunt[k]))
    rest = [n for n in net.nodes if n != node]
    idx = {n: i for i, n in enumerate(rest)}
    cap = np.array([[net.cap[net.index(a), net.index(b)] for b in rest] for a in rest])
    shunt = np.array([net.shunt[net.index(a)] for a in rest])
    if len(branches) >= 2:
        for (a, b), c in star_mesh(branches).items():
            if GND in (a, b):
                shunt[idx[b if a == GND else a]] += c
            else:
                cap[idx[a], idx[b]] += c
                cap[idx[b], idx[a]] += c
    return CapacitanceNetwork(tuple(rest), cap, shunt)


def star_mesh_reduce(net: CapacitanceNetwork, keep):
    """Same result as :func:`kron_reduce`, one star-mesh elimination at a time."""
    for node in [n for n in net.nodes if n not in set(keep)]:
        net = eliminate_node(net, node)
    order = [net.index(n) for n in keep]
    return CapacitanceNetwork(tuple(keep), net.cap[np.ix_(order, order)], net.shunt[order])


@dataclass(frozen=True)
class ReducedCircuit:
    """Four-node circuit: two qubit pads and the two coupler islands."""

    c1: float
    c2: float
    c_c: float
    c1c_par: float
    c1c_perp: float
    c2c_par: float
    c2c_perp: float
    c12: float
    csD_tilde: float
    csE_tilde: float

    @classmethod
    def from_network(cls, net: CapacitanceNetwork, q1, island_d, island_e, q2):
        """Read the circuit off a network reduced to exactly these four nodes.

        ``island_d`` is the island facing qubit 1, ``island_e`` faces qubit 2.
        """
        if set(net.nodes) != {q1, island_d, island_e, q2}:
            net = kron_reduce(net, [q1, island_d, island_e, q2])
        c = net.between
        return cls(
            c1=c(q1, GND), c2=c(q2, GND), c_c=c(island_d, island_e),
            c1c_par=c(q1, island_d), c1c_perp=c(q1, island_e),
            c2c_par=c(q2, island_e), c2c_perp=c(q2, island_d),
            c12=c(q1, q2), csD_tilde=c(island_d, GND), csE_tilde=c(island_e, GND),
        )

    def as_network(self, names=("1", "D", "E", "2")):
        q1, d, e, q2 = names
        net = {
            "nodes": list(names),
            "capacitors": [
                {"a": q1, "b": GND, "fF": self.c1}, {"a": q2, "b": GND, "fF": self.c2},
                {"a": d, "b": e, "fF": self.c_c}, {"a": q1, "b": d, "fF": self.c1c_par},
                {"a": q1, "b": e, "fF": self.c1c_perp}, {"a": q2, "b": e, "fF": self.c2c_par},
                {"a": q2, "b": d, "fF": self.c2c_perp}, {"a": q1, "b": q2, "fF": self.c12},
                {"a": d, "b": GND, "fF": self.csD_tilde}, {"a": e, "b": GND, "fF": self.csE_tilde},
            ],
        }
        return CapacitanceNetwork.from_netlist(net)


@dataclass(frozen=True)
class EffectiveCapMatrix:
    c_sigma1: float
    c_sigma2: float
    c_sigmac: float
    c1c: float
    c2c: float
    c12_star: float
    gamma1: float = 0.5
    gamma2: float = 0.5

    def matrix(self):
        """The 3x3 matrix in mode order (qubit 1, coupler, qubit 2)."""
        return np.array([
            [self.c_sigma1, -self.c1c, -self.c12_star],
            [-self.c1c, self.c_sigmac, self.c2c],
            [-self.c12_star, self.c2c, self.c_sigma2],
        ])


@dataclass(frozen=True)
class BarredCircuit:
    c1_bar: float
    c2_bar: float
    cc_bar: float
    c1c_par_bar: float
    c2c_par_bar: float
    c12_bar: float
    csD_tilde: float
    csE_tilde: float

    def as_reduced(self):
        return ReducedCircuit(
            c1=self.c1_bar, c2=self.c2_bar, c_c=self.cc_bar,
            c1c_par=self.c1c_par_bar, c1c_perp=0.0,
            c2c_par=self.c2c_par_bar, c2c_perp=0.0,
            c12=self.c12_bar, csD_tilde=self.csD_tilde, csE_tilde=self.csE_tilde,
        )


def eliminate_com(rc: ReducedCircuit) -> EffectiveCapMatrix:
    """Integrate out the centre-of-capacitance coordinate of the coupler islands."""
    p1 = rc.c1c_par + rc.c1c_perp
    p2 = rc.c2c_par + rc.c2c_perp
    c_theta = p1 + p2 + rc.csD_tilde + rc.csE_tilde
    if c_theta == 0:
        raise DegenerateTransform("zero total capacitance on the coupler islands")
    g1 = (rc.c2c_par + rc.c1c_perp + rc.csE_tilde) / c_theta
    g2 = (rc.c1c_par + rc.c2c_perp + rc.csD_tilde) / c_theta
    s1 = rc.c1 + p1 + rc.c12
    s2 = rc.c2 + p2 + rc.c12
    return EffectiveCapMatrix(
        c_sigma1=s1 - p1**2 / c_theta,
        c_sigma2=s2 - p2**2 / c_theta,
        c_sigmac=rc.c_c + g1 * g2 * c_theta,
        c1c=g1 * rc.c1c_par - g2 * rc.c1c_perp,
        c2c=g2 * rc.c2c_par - g1 * rc.c2c_perp,
        c12_star=rc.c12 + p1 * p2 / c_theta,
        gamma1=g1,
        gamma2=g2,
    )


def remove_cross_island(rc: ReducedCircuit) -> BarredCircuit:
    """Equivalent circuit with both cross-island capacitors set to zero.

    The returned circuit has the same effective capacitance matrix.
    """
    d = rc.c1c_par + rc.c2c_perp + rc.csD_tilde
    e = rc.c2c_par + rc.c1c_perp + rc.csE_tilde
    if d == 0 or e == 0:
        raise DegenerateTransform("zero island capacitance")
    m = eliminate_com(rc)
    c1c = rc.c1c_par - rc.c1c_perp * d / e
    c2c = rc.c2c_par - rc.c2c_perp * e / d
    c_theta = c1c + c2c + rc.csD_tilde + rc.csE_tilde
    a, b = c1c + rc.csD_tilde, c2c + rc.csE_tilde
    if c_theta == 0 or a == 0 or b == 0:
        raise DegenerateTransform("zero denominator in the barred circuit")
    c12 = m.c12_star - c1c * c2c / c_theta
    cc = m.c_sigmac - 1.0 / (1.0 / a + 1.0 / b)
    s1 = m.c_sigma1 + c1c**2 / c_theta
    s2 = m.c_sigma2 + c2c**2 / c_theta
    return BarredCircuit(
        c1_bar=s1 - c1c - c12, c2_bar=s2 - c2c - c12, cc_bar=cc,
        c1c_par_bar=c1c, c2c_par_bar=c2c, c12_bar=c12,
        csD_tilde=rc.csD_tilde, csE_tilde=rc.csE_tilde,
    )


@dataclass(frozen=True)
class InverseCapParams:
    c_sigma_star: tuple
    c_sigma_1c_star: float
    c_sigma_2c_star: float
    c_sigma_12_star: float
    e_c: tuple
    det: float = field(default=0.0)
    cofactors: np.ndarray = field(default=None, repr=False)


def charging_energy_ghz(c_ff):
    """E_C/h = e^2/(2hC) in GHz."""
    return constants.e**2 / (2 * constants.h * c_ff * 1e-15) / 1e9


def inverse_cap_params(m: EffectiveCapMatrix) -> InverseCapParams:
    c = m.matrix()
    det = float(np.linalg.det(c))
    if not np.isfinite(det) or abs(det) <= 1e-12 * np.abs(c).max() ** 3:
        raise SingularMatrix("effective capacitance matrix is not invertible")
    a = np.linalg.inv(c) * det

    def ratio(x):
        return np.inf if x == 0 else det / x

    diag = tuple(ratio(a[i, i]) for i in range(3))
    return InverseCapParams(
        c_sigma_star=diag,
        c_sigma_1c_star=ratio(a[0, 1]),
        c_sigma_2c_star=ratio(a[2, 1]),
        c_sigma_12_star=ratio(a[0, 2]),
        e_c=tuple(charging_energy_ghz(x) for x in diag),
        det=det,
        cofactors=a,
    )
