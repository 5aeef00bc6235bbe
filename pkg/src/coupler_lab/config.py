"""Device/run configuration: one JSON file drives every subcommand.

Unknown keys are rejected, every missing optional key is filled from
``DEFAULTS`` and the filled document is what gets echoed back.  File paths
are resolved relative to the config file.
"""
from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, field

import jsonschema

from .errors import ParseError, ValidationError

NUM = {"type": "number"}
POS = {"type": "number", "exclusiveMinimum": 0}
INT = {"type": "integer", "minimum": 1}
NUMS = {"type": "array", "items": NUM}
PATH = {"type": "string", "minLength": 1}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_CAP = _obj({"a": {"type": "string"}, "b": {"type": "string"}, "fF": {"type": "number", "minimum": 0}},
            ("a", "b", "fF"))
_LINE = _obj({"a": {"type": "string"}, "b": {"type": "string"}, "z0_ohm": POS,
              "eps_eff": {"type": "number", "minimum": 1}, "length_um": {"type": "number", "minimum": 0}},
             ("a", "b", "length_um"))
_QUBIT = _obj({"freq_GHz": POS, "anharm_MHz": {"type": "number", "exclusiveMaximum": 0}},
              ("freq_GHz", "anharm_MHz"))
_RANGE = {"type": "array", "items": NUM, "minItems": 3, "maxItems": 3}

SCHEMA = _obj({
    "netlist": _obj({
        "nodes": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "capacitors": {"type": "array", "items": _CAP},
        "ports": {"type": "array", "items": {"type": "string"}, "minItems": 4, "maxItems": 4},
        "ej_GHz": _obj({"q1": POS, "coupler": POS, "q2": POS}, ("q1", "coupler", "q2")),
        "coupler_idle_GHz": POS,
        "levels": {"type": "integer", "minimum": 2},
    }, ("nodes", "capacitors")),
    "params": _obj({
        "q1": _QUBIT, "q2": _QUBIT,
        "coupler": _obj({"freq_max_GHz": POS, "anharm_MHz": {"type": "number", "exclusiveMaximum": 0},
                         "idle_GHz": POS}),
        "g1c_MHz": NUM, "g2c_MHz": NUM, "g12_MHz": NUM,
        "levels": {"type": "integer", "minimum": 2},
        "rescale": {"type": "boolean"},
    }),
    "distance_sweep": _obj({
        "d_qq_um": NUMS, "z0_ohm": POS, "eps_eff": {"type": "number", "minimum": 1},
        "f_eval_GHz": POS, "freqs_GHz": _obj({"q1": POS, "q2": POS, "coupler": POS}),
    }),
    "crosstalk": _obj({
        "c_q_dl_fF": {"type": "number", "minimum": 0},
        "points": {"type": "array", "items": _obj({
            "x_cross_um": NUM, "c_q1_tl_fF": {"type": "number", "minimum": 0},
            "c_q2_tl_fF": {"type": "number", "minimum": 0}, "c_cC_tl_fF": {"type": "number", "minimum": 0},
            "c_cF_tl_fF": {"type": "number", "minimum": 0}},
            ("x_cross_um", "c_q1_tl_fF", "c_q2_tl_fF", "c_cC_tl_fF", "c_cF_tl_fF"))},
    }),
    "zzmap": _obj({"coupler_GHz": _RANGE, "detuning_MHz": _RANGE}),
    "zzfit": _obj({
        "curve_csv": PATH, "guess_MHz": {"type": "array", "items": NUM, "minItems": 3, "maxItems": 3},
        "rescale": {"type": "boolean"},
    }),
    "pulse": _obj({
        "tau_ns": POS, "pad_ns": {"type": "number", "minimum": 0}, "dt_ns": POS, "theta_op_rad": POS,
        "csv": PATH,
        "predistortion": {"type": "array", "items": {"type": "array", "items": NUM, "minItems": 2, "maxItems": 2}},
    }),
    "gate_cal": _obj({
        "search_dt_ns": POS, "weights": {"type": "array", "items": NUM, "minItems": 2, "maxItems": 2},
        "phase_tol_rad": POS, "leakage_tol": POS, "maxiter": INT, "starts": INT,
    }),
    "coherence": _obj({
        "tau_ns": {"type": "number", "minimum": 0},
        "convention": {"enum": ["main", "appendix"]},
        "curves_csv": {"type": "array", "items": PATH},
        "times_us": {"type": "array", "items": {"type": "array", "items": POS, "minItems": 3, "maxItems": 3}},
    }),
    "rb": _obj({
        "lengths": {"type": "array", "items": INT, "minItems": 3},
        "randomizations": INT,
        "interleaved": {"type": "array", "items": INT},
        "eps_cz": {"type": "number", "minimum": 0, "maximum": 0.75},
        "eps_1q": {"type": "number", "minimum": 0, "maximum": 0.75},
        "eps_interleaved": {"type": ["number", "null"], "minimum": 0, "maximum": 0.75},
        "shots": {"type": ["integer", "null"], "minimum": 1},
        "dataset_csv": PATH,
    }),
    "out_dir": {"type": "string"},
})

DEFAULT_PARAMS = {
    "q1": {"freq_GHz": 4.10, "anharm_MHz": -216.0},
    "q2": {"freq_GHz": 3.89, "anharm_MHz": -217.0},
    "coupler": {"freq_max_GHz": 4.21, "anharm_MHz": -250.0, "idle_GHz": 3.195},
    "g1c_MHz": 51.5, "g2c_MHz": 53.9, "g12_MHz": 3.7, "levels": 3, "rescale": True,
}

DEFAULTS = {
    "netlist": {"ports": ["1", "D", "E", "2"], "levels": 3},
    "distance_sweep": {"d_qq_um": [1960.0, 2210.0, 2460.0, 2710.0, 2960.0], "z0_ohm": 50.0,
                       "eps_eff": 6.45, "f_eval_GHz": 5.0,
                       "freqs_GHz": {"q1": 4.10, "q2": 3.89, "coupler": 3.195}},
    "crosstalk": {"c_q_dl_fF": 0.12, "points": []},
    "zzmap": {"coupler_GHz": [3.0, 3.5, 20], "detuning_MHz": [-300.0, 300.0, 20]},
    "zzfit": {"rescale": True},
    "pulse": {"tau_ns": 22.0, "pad_ns": 5.5, "dt_ns": 0.01, "theta_op_rad": 1.18, "predistortion": []},
    "gate_cal": {"search_dt_ns": 0.05, "weights": [1.0, 10.0], "phase_tol_rad": 0.01,
                 "leakage_tol": 1e-3, "maxiter": 400, "starts": 3},
    "coherence": {"tau_ns": 33.0, "convention": "main"},
    "rb": {"lengths": [1, 5, 10, 20, 40, 60, 80, 100], "randomizations": 30, "interleaved": [1],
           "eps_cz": 1.9e-3, "eps_1q": 1.1e-3, "eps_interleaved": None, "shots": None},
    "out_dir": "out",
}

_PATH_KEYS = (("zzfit", "curve_csv"), ("pulse", "csv"), ("rb", "dataset_csv"))


def _merge(defaults, doc):
    out = copy.deepcopy(defaults)
    for k, v in doc.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


@dataclass
class DeviceConfig:
    doc: dict
    base_dir: str = field(default=".", compare=False)

    def section(self, name):
        return self.doc.get(name, {})

    def path(self, rel):
        return rel if os.path.isabs(rel) else os.path.normpath(os.path.join(self.base_dir, rel))

    def to_dict(self):
        return copy.deepcopy(self.doc)

    def dumps(self):
        return json.dumps(self.doc, indent=2, sort_keys=True) + "\n"


def _location(err):
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def validate_document(doc, base_dir="."):
    """Fill defaults and check the document; raise ValidationError with all problems."""
    if not isinstance(doc, dict):
        raise ValidationError(["<root>: config must be a JSON object"])
    problems = [f"{_location(e)}: {e.message}"
                for e in sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc), key=str)]
    has_net, has_par = "netlist" in doc, "params" in doc
    if has_net and has_par:
        problems.append("<root>: give either 'netlist' or 'params', not both")
    if problems:
        raise ValidationError(problems)
    filled = _merge({k: v for k, v in DEFAULTS.items() if k != "netlist"}, doc)
    if has_net:
        filled["netlist"] = _merge(DEFAULTS["netlist"], doc["netlist"])
        nodes = set(filled["netlist"]["nodes"])
        for p in filled["netlist"]["ports"]:
            if p not in nodes:
                problems.append(f"netlist/ports: unknown node {p!r}")
    else:
        filled["params"] = _merge(DEFAULT_PARAMS, doc.get("params", {}))
    coh = filled["coherence"]
    rels = [(f"{a}/{b}", filled.get(a, {}).get(b)) for a, b in _PATH_KEYS]
    rels += [(f"coherence/curves_csv/{i}", p) for i, p in enumerate(coh.get("curves_csv", []))]
    for where, rel in rels:
        if rel is not None:
            full = rel if os.path.isabs(rel) else os.path.join(base_dir, rel)
            if not os.path.isfile(full):
                problems.append(f"{where}: file not found: {rel}")
    if problems:
        raise ValidationError(problems)
    return DeviceConfig(filled, base_dir)


def parse_device_config(path):
    base = os.path.dirname(os.path.abspath(path))
    with open(path) as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return validate_document(doc, base)
