import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import constants

from coupler_lab.captools import GND, CapacitanceNetwork
from coupler_lab.errors import DistanceBelowCouplerWidth, ZeroReference
from coupler_lab.netsim import (
    CrosstalkGeometryCaps, MicrowaveNetwork, TLine, assemble_admittance, coupling_vs_distance, crosstalk_ratios,
    device_network, effective_matrix, extract_caps, network_caps, nnn_coupling, tl_twoport, to_db,
)

F = 5e9


def test_zero_length_line_is_identity():
    np.testing.assert_allclose(tl_twoport(50, 6.45, 0.0, F).abcd, np.eye(2))


def test_quarter_wave_line():
    length = constants.c / (4 * F * np.sqrt(6.45))
    (a, b), (c, d) = tl_twoport(50, 6.45, length, F).abcd
    assert abs(a) < 1e-12 and abs(d) < 1e-12
    assert b == pytest.approx(50j)


@given(st.floats(10, 200), st.floats(1, 13), st.floats(0, 0.05), st.floats(1e8, 2e10))
def test_lossless_line_is_reciprocal(z0, eps, length, f):
    assert tl_twoport(z0, eps, length, f).det == pytest.approx(1.0, abs=1e-9)


def _lumped():
    caps = [("A", GND, 80.0), ("A", "B", 5.0), ("B", "C", 20.0), ("B", GND, 60.0), ("C", GND, 70.0),
            ("A", "C", 0.5)]
    return MicrowaveNetwork(["A", "B", "C"], caps, [])


def test_capacitive_network_admittance_is_maxwell():
    net = _lumped()
    y = assemble_admittance(net, F, ["A", "B", "C"])
    cn = CapacitanceNetwork.from_netlist(
        {"nodes": net.nodes, "capacitors": [{"a": a, "b": b, "fF": c} for a, b, c in net.capacitors]})
    np.testing.assert_allclose(y, 1j * 2 * np.pi * F * cn.maxwell() * 1e-15, rtol=1e-12)
    np.testing.assert_allclose(extract_caps(y, F), cn.maxwell(), rtol=1e-12)


def test_extract_caps_of_zero_matrix():
    np.testing.assert_array_equal(extract_caps(np.zeros((2, 2)), F), np.zeros((2, 2)))


def test_port_relabeling_permutes_admittance():
    net = device_network()
    y = assemble_admittance(net, F, ["B", "D", "E", "G"])
    yp = assemble_admittance(net, F, ["G", "E", "B", "D"])
    perm = [3, 2, 0, 1]
    np.testing.assert_allclose(yp, y[np.ix_(perm, perm)], rtol=1e-10, atol=1e-18)


@pytest.mark.parametrize("f", [1e9, 5e9, 1e10])
def test_admittance_is_symmetric(f):
    y = assemble_admittance(device_network(2460), f, ["B", "D", "E", "G"])
    np.testing.assert_allclose(y, y.T, rtol=1e-10, atol=1e-20)


def test_short_series_line_matches_merged_node():
    l_um = 10.0
    c_line = l_um * 1e-6 * np.sqrt(6.45) / (constants.c * 50) * 1e15
    caps = [("P1", "X", 10.0), ("X", GND, 5.0), ("Y", GND, 5.0), ("Y", "P2", 10.0)]
    exact = MicrowaveNetwork(["P1", "X", "Y", "P2"], caps, [TLine("X", "Y", 50, 6.45, l_um * 1e-6)])
    lumped = MicrowaveNetwork(["P1", "X", "P2"], [("P1", "X", 10.0), ("X", GND, 10.0 + c_line),
                                                   ("X", "P2", 10.0)], [])
    a = network_caps(exact, F, ["P1", "P2"]).maxwell()
    b = network_caps(lumped, F, ["P1", "P2"]).maxwell()
    np.testing.assert_allclose(a, b, rtol=0.01)


def test_open_stub_converges_quadratically():
    def rel_err(l_um):
        net = MicrowaveNetwork(["P", "S"], [("P", GND, 50.0)], [TLine("P", "S", 50, 6.45, l_um * 1e-6)])
        c = network_caps(net, F, ["P"]).maxwell()[0, 0] - 50.0
        c_lumped = l_um * 1e-6 * np.sqrt(6.45) / (constants.c * 50) * 1e15
        return abs(c - c_lumped) / c_lumped

    errs = np.array([rel_err(l) for l in (800, 400, 200, 100)])
    np.testing.assert_allclose(errs[:-1] / errs[1:], 4.0, rtol=0.02)


def test_device_caps_are_frequency_insensitive():
    a = effective_matrix(device_network(), 5e9).matrix()
    b = effective_matrix(device_network(), 1e9).matrix()
    np.testing.assert_allclose(a, b, atol=0.02 * np.abs(a).max())
    # the few-fF coupling entries move a little more than the diagonal
    np.testing.assert_allclose(a, b, rtol=0.05)


def test_config_round_trip():
    net = device_network(2210)
    again = MicrowaveNetwork.from_config(net.to_config())
    np.testing.assert_allclose(assemble_admittance(again, F, ["B", "G"]), assemble_admittance(net, F, ["B", "G"]))


def test_coupling_at_reference_spacing():
    _, g1c, g2c, _ = coupling_vs_distance([1960])[0]
    assert g1c == pytest.approx(51.5, rel=0.3)
    assert g2c == pytest.approx(53.9, rel=0.3)


def test_coupling_decreases_slowly_with_distance():
    rows = coupling_vs_distance(np.linspace(1960, 2960, 6))
    for col in (1, 2):
        g = rows[:, col]
        assert np.all(np.diff(g) < 0)
        assert g[-1] / g[0] > 0.5


def test_distance_below_coupler_width():
    with pytest.raises(DistanceBelowCouplerWidth):
        coupling_vs_distance([900])
    assert coupling_vs_distance([920]).shape == (1, 4)


def test_crosstalk_examples():
    r = crosstalk_ratios(CrosstalkGeometryCaps(0.012, 0.0, 0.004, 0.004, c_q_dl=0.12))
    assert r[0] == pytest.approx(0.1)
    assert to_db(r[0]) == pytest.approx(-20.0)
    assert r[2] == 0.0
    assert crosstalk_ratios(CrosstalkGeometryCaps(0, 0, 0, 0, c_q_dl=0)) == (0.0, 0.0, 0.0)
    with pytest.raises(ZeroReference):
        crosstalk_ratios(CrosstalkGeometryCaps(0.01, 0, 0, 0, c_q_dl=0))


def test_next_nearest_neighbour_coupling():
    assert nnn_coupling(0.0, 91, 91, 4.3) == 0.0
    c13 = 2 * 30e-6 * 91 / 4.3
    assert c13 == pytest.approx(1.27e-3, abs=1e-5)
    assert nnn_coupling(c13, 91, 91, 4.3) == pytest.approx(30.0)
