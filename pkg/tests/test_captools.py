import numpy as np
import pytest
from hypothesis import given, strategies as st

from coupler_lab.captools import (
    GND, BarredCircuit, CapacitanceNetwork, EffectiveCapMatrix, ReducedCircuit, charging_energy_ghz,
    eliminate_com, inverse_cap_params, kron_reduce, mesh_star, remove_cross_island, star_mesh,
    star_mesh_reduce,
)
from coupler_lab.errors import DegenerateTransform, SingularMatrix, SingularReduction

TABLE = ReducedCircuit(c1=82, c2=82, c_c=28, c1c_par=8, c1c_perp=1, c2c_par=8, c2c_perp=1,
                       c12=0.07, csD_tilde=100, csE_tilde=98)

cap = st.floats(0.1, 200.0)


def test_mesh_star_examples():
    assert mesh_star(41, 50, 47) == pytest.approx((134.617, 126.54, 154.317), abs=0.01)
    assert mesh_star(1, 1, 1) == pytest.approx((3, 3, 3))
    assert mesh_star(1, 2, 2) == pytest.approx((4, 4, 8))
    with pytest.raises(DegenerateTransform):
        mesh_star(0, 1, 1)


def test_star_mesh_examples():
    m = star_mesh([("a", 2), ("b", 3), ("c", 5)])
    assert m[("a", "b")] == pytest.approx(0.6)
    assert m[("a", "c")] == pytest.approx(1.0)
    assert m[("b", "c")] == pytest.approx(1.5)
    assert star_mesh([("a", 1), ("b", 1)])[("a", "b")] == pytest.approx(0.5)
    assert all(v == pytest.approx(0.25) for v in star_mesh([(k, 1) for k in "abcd"]).values())
    with pytest.raises(DegenerateTransform):
        star_mesh([("a", 0), ("b", 0)])


@given(cap, cap, cap)
def test_mesh_star_inverts_star_mesh(a, b, c):
    ci, fi, si = mesh_star(a, b, c)
    m = star_mesh([("C", ci), ("F", fi), ("s", si)])
    assert m[("C", "F")] == pytest.approx(a, rel=1e-9)
    assert m[("C", "s")] == pytest.approx(b, rel=1e-9)
    assert m[("F", "s")] == pytest.approx(c, rel=1e-9)


def test_chain_elimination():
    net = CapacitanceNetwork.from_netlist({"nodes": ["A", "B", "C"], "capacitors": [
        {"a": "A", "b": "B", "fF": 3.0}, {"a": "B", "b": "C", "fF": 5.0}, {"a": "B", "b": GND, "fF": 2.0}]})
    r = kron_reduce(net, ["A", "C"])
    assert r.between("A", "C") == pytest.approx(3 * 5 / 10)


def test_isolated_node_leaves_rest_unchanged():
    net = CapacitanceNetwork.from_netlist({"nodes": ["A", "B", "X"], "capacitors": [
        {"a": "A", "b": "B", "fF": 3.0}, {"a": "A", "b": GND, "fF": 1.0}]})
    r = kron_reduce(net, ["A", "B"])
    np.testing.assert_allclose(r.maxwell(), [[4, -3], [-3, 3]])


def test_singular_block_raises():
    net = CapacitanceNetwork.from_netlist({"nodes": ["A", "B", "X", "Y"], "capacitors": [
        {"a": "A", "b": "B", "fF": 3.0}, {"a": "X", "b": "Y", "fF": 1.0}]})
    with pytest.raises(SingularReduction):
        kron_reduce(net, ["A", "B"])


@st.composite
def networks(draw):
    n = draw(st.integers(2, 8))
    nodes = [f"n{i}" for i in range(n)]
    caps = []
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.booleans()) or j == i + 1:
                caps.append({"a": nodes[i], "b": nodes[j], "fF": draw(cap)})
        if draw(st.booleans()):
            caps.append({"a": nodes[i], "b": GND, "fF": draw(cap)})
    keep = draw(st.lists(st.sampled_from(nodes), min_size=1, max_size=n - 1, unique=True))
    return CapacitanceNetwork.from_netlist({"nodes": nodes, "capacitors": caps}), keep


@given(networks())
def test_kron_equals_iterated_star_mesh(case):
    net, keep = case
    a = kron_reduce(net, keep)
    b = star_mesh_reduce(net, keep)
    np.testing.assert_allclose(a.maxwell(), b.maxwell()[np.ix_([b.index(k) for k in a.nodes],
                                                               [b.index(k) for k in a.nodes])], atol=1e-9)


def test_full_layout_kron_matches_star_mesh():
    # coupler-side extender ends C and F eliminated; pads A, H and s are ground
    doc = {"nodes": list("BCDEFG"), "capacitors": [
        {"a": "B", "b": GND, "fF": 93}, {"a": "B", "b": "C", "fF": 12}, {"a": "C", "b": "D", "fF": 189},
        {"a": "C", "b": "F", "fF": 41}, {"a": "C", "b": "E", "fF": 2}, {"a": "C", "b": GND, "fF": 50},
        {"a": "D", "b": "E", "fF": 6}, {"a": "D", "b": "F", "fF": 5}, {"a": "D", "b": GND, "fF": 62},
        {"a": "E", "b": "F", "fF": 192}, {"a": "E", "b": GND, "fF": 62}, {"a": "F", "b": "G", "fF": 12},
        {"a": "F", "b": GND, "fF": 47}, {"a": "G", "b": GND, "fF": 93}]}
    net = CapacitanceNetwork.from_netlist(doc)
    keep = ["B", "D", "E", "G"]
    np.testing.assert_allclose(kron_reduce(net, keep).maxwell(), star_mesh_reduce(net, keep).maxwell(),
                               atol=1e-9)


def test_netlist_round_trip():
    net = TABLE.as_network()
    again = CapacitanceNetwork.from_netlist(net.to_netlist())
    np.testing.assert_array_equal(net.maxwell(), again.maxwell())


def test_effective_matrix_of_reduced_circuit():
    m = eliminate_com(TABLE)
    got = (m.c_sigma1, m.c_sigma2, m.c_sigmac, m.c1c, m.c2c, m.c12_star)
    assert got == pytest.approx((91, 91, 82, 3, 3, 0.5), abs=0.6)
    # exact arithmetic of the same inputs
    assert got == pytest.approx((90.695, 90.695, 81.9954, 3.4583, 3.5417, 0.445), abs=1e-3)


def test_barred_circuit_of_reduced_circuit():
    b = remove_cross_island(TABLE)
    assert (b.c1c_par_bar, b.c2c_par_bar, b.c12_bar, b.cc_bar) == pytest.approx((7, 7, 0.25, 29), abs=0.5)


def test_no_cross_island_gives_collapse_and_identity():
    rc = ReducedCircuit(80, 85, 30, 8, 0, 7, 0, 0.1, 100, 90)
    m = eliminate_com(rc)
    assert m.c1c == m.gamma1 * rc.c1c_par
    b = remove_cross_island(rc)
    for f in ("c1_bar", "c2_bar", "cc_bar", "c1c_par_bar", "c2c_par_bar", "c12_bar"):
        ref = {"c1_bar": rc.c1, "c2_bar": rc.c2, "cc_bar": rc.c_c, "c1c_par_bar": rc.c1c_par,
               "c2c_par_bar": rc.c2c_par, "c12_bar": rc.c12}[f]
        assert getattr(b, f) == pytest.approx(ref, abs=1e-9)


def test_symmetric_circuit_has_equal_gammas():
    m = eliminate_com(ReducedCircuit(80, 80, 30, 8, 1, 8, 1, 0.1, 100, 100))
    assert m.gamma1 == pytest.approx(0.5) and m.gamma2 == pytest.approx(0.5)


def test_degenerate_inputs():
    with pytest.raises(DegenerateTransform):
        eliminate_com(ReducedCircuit(80, 80, 30, 0, 0, 0, 0, 0.1, 0, 0))
    with pytest.raises(DegenerateTransform):
        remove_cross_island(ReducedCircuit(80, 80, 30, 0, 0, 0, 0, 0.1, 0, 5))


reduced = st.builds(ReducedCircuit, cap, cap, cap, cap, st.floats(0, 20), cap, st.floats(0, 20),
                    st.floats(0, 5), cap, cap)


def _vec(m: EffectiveCapMatrix):
    return np.array([m.c_sigma1, m.c_sigma2, m.c_sigmac, m.c1c, m.c2c, m.c12_star])


@given(reduced)
def test_barred_circuit_preserves_effective_matrix(rc):
    np.testing.assert_allclose(_vec(eliminate_com(remove_cross_island(rc).as_reduced())),
                               _vec(eliminate_com(rc)), atol=1e-9, rtol=1e-12)


@given(reduced)
def test_gammas_sum_to_one(rc):
    m = eliminate_com(rc)
    assert m.gamma1 + m.gamma2 == pytest.approx(1.0, abs=1e-12)


@given(reduced, st.floats(0.01, 100))
def test_linear_scaling(rc, k):
    scaled = ReducedCircuit(*(k * getattr(rc, f) for f in rc.__dataclass_fields__))
    np.testing.assert_allclose(_vec(eliminate_com(scaled)), k * _vec(eliminate_com(rc)), rtol=1e-9, atol=1e-9)
    b0, b1 = remove_cross_island(rc), remove_cross_island(scaled)
    for f in BarredCircuit.__dataclass_fields__:
        assert getattr(b1, f) == pytest.approx(k * getattr(b0, f), rel=1e-8, abs=1e-8)


def test_inverse_params_diagonal_and_singular():
    inv = inverse_cap_params(EffectiveCapMatrix(90, 85, 80, 0, 0, 0))
    assert inv.c_sigma_star == pytest.approx((90, 80, 85))
    assert np.isinf(inv.c_sigma_1c_star) and np.isinf(inv.c_sigma_2c_star) and np.isinf(inv.c_sigma_12_star)
    with pytest.raises(SingularMatrix):
        inverse_cap_params(EffectiveCapMatrix(1, 1, 1, 1, 0, 0))


def test_charging_energy():
    assert charging_energy_ghz(91) * 1e3 == pytest.approx(212.9, abs=0.1)


def test_weak_coupling_approximation():
    m = EffectiveCapMatrix(91.07, 91.07, 82.0, 3.46, 3.46, 0.445)
    inv = inverse_cap_params(m)
    assert m.c_sigma1 * m.c_sigmac / m.c1c == pytest.approx(2158, abs=2)
    assert abs(inv.c_sigma_1c_star) == pytest.approx(m.c_sigma1 * m.c_sigmac / m.c1c, rel=0.05)
