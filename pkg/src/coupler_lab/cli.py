"""coupler-lab: batch front end.

    coupler-lab <subcommand> --config <path> [--out <dir>] [--seed <u64>] [--set key.path=value]

Log verbosity comes from the COUPLER_LAB_LOG environment variable
(DEBUG, INFO, WARNING...).  Exit status is 0 on success, 1 on a toolkit
error and 2 on a usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict

import numpy as np

from . import captools, gatesim, hammod, io, netsim, noisemod, rbkit
from .config import DeviceConfig, parse_device_config, validate_document
from .errors import CouplerLabError, LabelCollision, ParseError, ValidationError

log = logging.getLogger("coupler_lab")

COMMANDS = ("reduce", "distance-sweep", "crosstalk", "zzmap", "zzfit", "gate-cal",
            "gate-sim", "coherence", "rb-sim", "rb-fit")
STOCHASTIC = {"rb-sim"}


# system construction -----------------------------------------------------------

def system_from_config(cfg: DeviceConfig) -> hammod.SystemParams:
    if "netlist" in cfg.doc:
        nl = cfg.doc["netlist"]
        if "ej_GHz" not in nl:
            raise ValidationError(["netlist/ej_GHz: Josephson energies are needed to build the Hamiltonian"])
        m = captools.eliminate_com(_reduced(cfg))
        ec = captools.inverse_cap_params(m).e_c
        ej = nl["ej_GHz"]
        q1 = hammod.TransmonParams(ec[0], ej=ej["q1"])
        coupler = hammod.TransmonParams(ec[1], ej_max=ej["coupler"])
        if "coupler_idle_GHz" in nl:
            coupler = coupler.at_freq(nl["coupler_idle_GHz"])
        q2 = hammod.TransmonParams(ec[2], ej=ej["q2"])
        return hammod.SystemParams.from_capacitances(m, q1, coupler, q2, levels=nl["levels"])
    p = cfg.doc["params"]
    q1 = hammod.TransmonParams.from_freq(p["q1"]["freq_GHz"], p["q1"]["anharm_MHz"] * 1e-3)
    q2 = hammod.TransmonParams.from_freq(p["q2"]["freq_GHz"], p["q2"]["anharm_MHz"] * 1e-3)
    c = p["coupler"]
    coupler = hammod.TransmonParams.tunable(c["freq_max_GHz"], c["anharm_MHz"] * 1e-3).at_freq(c["idle_GHz"])
    refs = (p["q1"]["freq_GHz"], c["idle_GHz"], p["q2"]["freq_GHz"]) if p["rescale"] else None
    return hammod.SystemParams(q1, coupler, q2, p["g1c_MHz"], p["g2c_MHz"], p["g12_MHz"],
                               levels=p["levels"], ref_freqs=refs)


def _reduced(cfg):
    nl = cfg.doc["netlist"]
    net = captools.CapacitanceNetwork.from_netlist(nl)
    return captools.ReducedCircuit.from_network(net, *nl["ports"])


def _linspace(r):
    return np.linspace(r[0], r[1], int(r[2]))


def _pulse(cfg, s):
    pc = cfg.doc["pulse"]
    if "csv" in pc:
        _, data = io.read_csv(cfg.path(pc["csv"]))
        t, flux = data[:, 0], data[:, 1]
        dt = float(np.round(np.median(np.diff(t)), 12))
        return gatesim.FluxPulse(flux, dt, float(flux[0]), pc["pad_ns"], pc["tau_ns"])
    return gatesim.build_pulse(s, pc["theta_op_rad"], pc["tau_ns"], pc["pad_ns"], pc["dt_ns"])


# subcommands -------------------------------------------------------------------

def cmd_reduce(cfg, out, seed):
    if "netlist" not in cfg.doc:
        raise ValidationError(["netlist: 'reduce' needs a capacitance netlist"])
    nl = cfg.doc["netlist"]
    net = captools.CapacitanceNetwork.from_netlist(nl)
    kept = captools.kron_reduce(net, nl["ports"]) if set(net.nodes) != set(nl["ports"]) else net
    rc = captools.ReducedCircuit.from_network(kept, *nl["ports"])
    m = captools.eliminate_com(rc)
    inv = captools.inverse_cap_params(m)
    doc = {
        "eliminated_nodes": [n for n in net.nodes if n not in nl["ports"]],
        "reduced_netlist": kept.to_netlist(),
        "reduced_fF": asdict(rc),
        "effective_fF": {k: v for k, v in asdict(m).items() if not k.startswith("gamma")},
        "gamma": [m.gamma1, m.gamma2],
        "barred_fF": asdict(captools.remove_cross_island(rc)),
        "inverse": {"c_sigma_star_fF": list(inv.c_sigma_star), "c_sigma_1c_star_fF": inv.c_sigma_1c_star,
                    "c_sigma_2c_star_fF": inv.c_sigma_2c_star, "c_sigma_12_star_fF": inv.c_sigma_12_star,
                    "e_c_GHz": list(inv.e_c)},
    }
    path = os.path.join(out, "reduce.json")
    io.write_json(path, doc)
    return [path]


def cmd_distance_sweep(cfg, out, seed):
    d = cfg.doc["distance_sweep"]
    f = d["freqs_GHz"]
    rows = netsim.coupling_vs_distance(d["d_qq_um"], freqs=(f["q1"], f["q2"], f["coupler"]),
                                       f_eval=d["f_eval_GHz"] * 1e9, z0=d["z0_ohm"], eps_eff=d["eps_eff"])
    path = os.path.join(out, "distance_sweep.csv")
    io.write_csv(path, ["d_qq_um", "g1c_MHz", "g2c_MHz", "g12_MHz"], rows)
    return [path]


def cmd_crosstalk(cfg, out, seed):
    c = cfg.doc["crosstalk"]
    rows = []
    for p in c["points"]:
        caps = netsim.CrosstalkGeometryCaps(p["c_q1_tl_fF"], p["c_q2_tl_fF"], p["c_cC_tl_fF"],
                                            p["c_cF_tl_fF"], c["c_q_dl_fF"], p["x_cross_um"])
        r = netsim.crosstalk_ratios(caps)
        with np.errstate(divide="ignore"):
            rows.append((p["x_cross_um"], *r, *(netsim.to_db(x) for x in r)))
    path = os.path.join(out, "crosstalk.csv")
    io.write_csv(path, ["x_cross_um", "r_q1_ratio", "r_q2_ratio", "r_c_ratio", "r_q1_dB", "r_q2_dB", "r_c_dB"],
                 rows)
    return [path]


def cmd_zzmap(cfg, out, seed):
    s = system_from_config(cfg)
    z = cfg.doc["zzmap"]
    fcs, dets = _linspace(z["coupler_GHz"]), _linspace(z["detuning_MHz"])
    rows = []
    for d in dets:
        for fc in fcs:
            try:
                zeta = hammod.zz_map(s, [fc], [d])[0, 0]
            except LabelCollision:
                log.warning("label collision at detuning %.1f MHz, coupler %.4f GHz", d, fc)
                zeta = np.nan
            rows.append((d, fc, zeta))
    path = os.path.join(out, "zzmap.csv")
    io.write_csv(path, ["detuning_MHz", "coupler_GHz", "zeta_MHz"], rows)
    return [path]


def cmd_zzfit(cfg, out, seed):
    z = cfg.doc["zzfit"]
    if "curve_csv" not in z:
        raise ValidationError(["zzfit/curve_csv: a measured curve is required"])
    header, data = io.read_csv(cfg.path(z["curve_csv"]))
    sigma = data[:, 2] if data.shape[1] > 2 else None
    s = system_from_config(cfg)
    fit = hammod.fit_zz_couplings(data[:, :2], s, guess=z.get("guess_MHz"), sigma=sigma, rescale=z["rescale"])
    doc = {"g1c_MHz": fit.g1c, "g2c_MHz": fit.g2c, "g12_MHz": fit.g12,
           "sigma_MHz": list(fit.sigma), "cost": fit.cost, "points": len(data), "rescale": z["rescale"]}
    path = os.path.join(out, "zzfit.json")
    io.write_json(path, doc)
    return [path]


def _filter(cfg):
    stages = cfg.doc["pulse"]["predistortion"]
    return gatesim.PredistortionFilter(tuple(tuple(x) for x in stages)) if stages else None


def cmd_gate_cal(cfg, out, seed):
    s = system_from_config(cfg)
    pc, gc = cfg.doc["pulse"], cfg.doc["gate_cal"]
    tp = gatesim.CZTemplate(theta_op=pc["theta_op_rad"], tau=pc["tau_ns"], pad=pc["pad_ns"], dt=pc["dt_ns"],
                            search_dt=gc["search_dt_ns"], weights=tuple(gc["weights"]),
                            phase_tol=gc["phase_tol_rad"], leakage_tol=gc["leakage_tol"],
                            maxiter=gc["maxiter"], starts=gc["starts"])
    cal = gatesim.calibrate_cz(s, tp)
    paths = [os.path.join(out, "gate_cal.json"), os.path.join(out, "pulse.csv")]
    io.write_json(paths[0], {**cal.report(), "evaluations": cal.evaluations})
    cal.pulse.to_csv(paths[1])
    filt = _filter(cfg)
    if filt is not None:
        paths.append(os.path.join(out, "pulse_predistorted.csv"))
        gatesim.predistort(cal.pulse, filt).to_csv(paths[-1])
    return paths


def _metrics(r: gatesim.GateResult, p: gatesim.FluxPulse):
    return {"phi11_rad": r.phi11, "leakage": r.leakage, "gate_ns": p.duration,
            "single_qubit_phases_rad": list(r.single_qubit_phases)}


def cmd_gate_sim(cfg, out, seed):
    s = system_from_config(cfg)
    p = _pulse(cfg, s)
    frame = gatesim.IdleFrame.from_system(s)
    doc = {"ideal": _metrics(gatesim.run_gate(s, p, frame=frame), p)}
    filt = _filter(cfg)
    if filt is not None:
        raw = gatesim.distort(p, filt)
        fixed = gatesim.distort(gatesim.predistort(p, filt), filt)
        doc["distorted"] = _metrics(gatesim.run_gate(s, raw, frame=frame), raw)
        doc["predistorted"] = _metrics(gatesim.run_gate(s, fixed, frame=frame), fixed)
    path = os.path.join(out, "gate_sim.json")
    io.write_json(path, doc)
    return [path]


def cmd_coherence(cfg, out, seed):
    c = cfg.doc["coherence"]
    if "times_us" in c:
        times = [tuple(q) for q in c["times_us"]]
        doc = noisemod.CoherenceBudget(tuple(times), c["tau_ns"],
                                       noisemod.coherence_limit(times, c["tau_ns"], c["convention"])).to_dict()
    elif "curves_csv" in c:
        s = system_from_config(cfg)
        p = _pulse(cfg, s)
        traj = gatesim.coupler_trajectory(s, p)
        curves = []
        for rel in c["curves_csv"]:
            _, d = io.read_csv(cfg.path(rel))
            curves.append(noisemod.RateCurves.from_times(d[:, 0], d[:, 1], d[:, 2], d[:, 3]))
        doc = noisemod.budget(curves, traj, c["tau_ns"], t=p.times, convention=c["convention"]).to_dict()
    else:
        raise ValidationError(["coherence: give 'times_us' or 'curves_csv'"])
    path = os.path.join(out, "coherence.json")
    io.write_json(path, doc)
    return [path]


def _model(rb, n):
    p_cz = rbkit.p_from_error(rb["eps_cz"])
    p_1q = rbkit.p_from_error(rb["eps_1q"], d=2)
    eps_i = rb["eps_interleaved"]
    p_i = rbkit.p_from_error(eps_i) if eps_i is not None else p_cz
    return rbkit.ErrorModel(p_cz=p_cz, p_1q=p_1q, p_interleaved=p_i if n else None)


def cmd_rb_sim(cfg, out, seed):
    rb = cfg.doc["rb"]
    ns = [0] + [n for n in rb["interleaved"] if n > 0]
    children = np.random.SeedSequence(seed).spawn(2 * len(ns))
    rows = []
    for k, n in enumerate(ns):
        seq_seed = int(children[2 * k].generate_state(1)[0])
        shot_seed = int(children[2 * k + 1].generate_state(1)[0])
        seqs = rbkit.synth_sequences(rb["lengths"], n, rb["randomizations"], seq_seed)
        dec = rbkit.simulate_decay(seqs, _model(rb, n), shots=rb["shots"],
                                   seed=shot_seed if rb["shots"] else None)
        rows += [(int(m), n, f, sd) for m, f, sd in dec]
        log.info("rb-sim: n=%d done", n)
    path = os.path.join(out, "rb_sim.csv")
    io.write_csv(path, ["m_cliffords", "n_interleaved", "fidelity_mean", "fidelity_std"], rows)
    return [path]


def cmd_rb_fit(cfg, out, seed):
    rb = cfg.doc["rb"]
    if "dataset_csv" not in rb:
        raise ValidationError(["rb/dataset_csv: an RB dataset is required"])
    _, d = io.read_csv(cfg.path(rb["dataset_csv"]))
    fits = {}
    for n in np.unique(d[:, 1]).astype(int):
        sel = d[d[:, 1] == n]
        fits[int(n)] = rbkit.fit_decay(np.c_[sel[:, 0], sel[:, 2]])
    if 0 not in fits:
        raise ValidationError(["rb/dataset_csv: the reference decay (n_interleaved = 0) is missing"])
    ref = fits[0]
    doc = {"reference": {"p": ref.p, "a": ref.a, "b": ref.b, "epsilon_clifford": ref.epsilon,
                         "epsilon_clifford_sigma": ref.epsilon_sigma},
           "interleaved": []}
    for n, f in sorted(fits.items()):
        if n == 0:
            continue
        r = rbkit.interleaved_analysis(ref, f, n)
        doc["interleaved"].append({"n": n, "p": f.p, "epsilon_n": r.epsilon_n, "epsilon_n_sigma": r.epsilon_n_sigma,
                                   "epsilon_gate": r.epsilon_gate, "epsilon_gate_sigma": r.epsilon_gate_sigma})
    doc["clifford_estimate"] = rbkit.clifford_error_estimate(rb["eps_cz"], rb["eps_1q"])
    path = os.path.join(out, "rb_fit.json")
    io.write_json(path, doc)
    return [path]


HANDLERS = {
    "reduce": cmd_reduce, "distance-sweep": cmd_distance_sweep, "crosstalk": cmd_crosstalk,
    "zzmap": cmd_zzmap, "zzfit": cmd_zzfit, "gate-cal": cmd_gate_cal, "gate-sim": cmd_gate_sim,
    "coherence": cmd_coherence, "rb-sim": cmd_rb_sim, "rb-fit": cmd_rb_fit,
}


def run(command, cfg: DeviceConfig, out=None, seed=None):
    """Execute one subcommand and return the list of written artifacts."""
    if command not in HANDLERS:
        raise ValueError(f"unknown command {command!r}")
    if command in STOCHASTIC and seed is None:
        raise ValidationError([f"{command}: --seed is required"])
    out = out if out is not None else cfg.path(cfg.doc["out_dir"])
    os.makedirs(out, exist_ok=True)
    io.write_json(os.path.join(out, f"{command}.config.json"), cfg.doc)
    return HANDLERS[command](cfg, out, seed)


def _override(doc, assignment):
    key, sep, raw = assignment.partition("=")
    if not sep:
        raise ValidationError([f"--set {assignment}: expected key.path=value"])
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = doc
    parts = key.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="coupler-lab", description="Tunable-coupler modelling toolkit.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON device/run configuration")
    ap.add_argument("--out", help="output directory (overrides out_dir)")
    ap.add_argument("--seed", type=_u64, help="RNG seed, required for rb-sim")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config key, e.g. rb.randomizations=10")
    return ap


def main(argv=None):
    logging.basicConfig(level=os.environ.get("COUPLER_LAB_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_device_config(args.config)
        if args.set:
            doc = cfg.to_dict()
            for a in args.set:
                _override(doc, a)
            cfg = validate_document(doc, cfg.base_dir)
        paths = run(args.command, cfg, args.out, args.seed)
    except ValidationError as exc:
        for p in exc.problems:
            print(f"coupler-lab {args.command}: {p}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"coupler-lab {args.command}: {exc}", file=sys.stderr)
        return 2
    except CouplerLabError as exc:
        print(f"coupler-lab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"coupler-lab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
