"""File formats and deterministic report rendering.

Complex matrices serialize as row-major arrays of [re, im] pairs. Two
document kinds exist: charge-set files ({dim, charges}) and scenario
files (charges for system and bath, beta, endpoint states, work vector,
optional solver options). Both validate against published JSON schemas;
validation errors carry the offending field path.

Reports are rendered with sorted keys and fixed 12-significant-digit
float formatting so identical inputs produce byte-identical output.
"""

from __future__ import annotations

import json
from typing import Any

import jsonschema
import numpy as np

from .errors import ShapeError
from .operators import ChargeSet, DensityState
from .thermo import Scenario

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "load_charge_set",
    "load_scenario",
    "render_json",
    "validate_document",
    "CHARGE_SET_SCHEMA",
    "SCENARIO_SCHEMA",
]

_COMPLEX_PAIR = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}
_MATRIX = {
    "type": "array",
    "minItems": 1,
    "items": {"type": "array", "minItems": 1, "items": _COMPLEX_PAIR},
}
_REAL_VECTOR = {"type": "array", "minItems": 1, "items": {"type": "number"}}

CHARGE_SET_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["dim", "charges"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "charges": {"type": "array", "minItems": 1, "items": _MATRIX},
    },
    "additionalProperties": False,
}

_OPTIONS_SCHEMA = {
    "type": "object",
    "properties": {
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "max_iter": {"type": "integer", "minimum": 1},
        "beta_max": {"type": "number", "exclusiveMinimum": 0},
        "fd_step": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "dim_cap": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "dims",
        "system_charges",
        "bath_charges",
        "beta",
        "rho_S",
        "sigma_S",
        "work",
    ],
    "properties": {
        "dims": {
            "type": "object",
            "required": ["system", "bath"],
            "properties": {
                "system": {"type": "integer", "minimum": 1},
                "bath": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "system_charges": {"type": "array", "minItems": 1, "items": _MATRIX},
        "bath_charges": {"type": "array", "minItems": 1, "items": _MATRIX},
        "beta": _REAL_VECTOR,
        "rho_S": _MATRIX,
        "sigma_S": _MATRIX,
        "work": _REAL_VECTOR,
        "bath_point": _REAL_VECTOR,
        "s_final_SB": {"type": "number"},
        "battery_capacity_ok": {"type": "boolean"},
        "options": _OPTIONS_SCHEMA,
    },
    "additionalProperties": False,
}


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in m]


def matrix_from_json(doc, path: str = "matrix") -> np.ndarray:
    arr = np.asarray(doc, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeError(
            f"{path}: expected a square matrix of [re, im] pairs, "
            f"got shape {arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def validate_document(doc, schema, label: str) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "$" + "".join(
            f"[{p!r}]" if isinstance(p, str) else f"[{p}]"
            for p in err.absolute_path
        )
        raise ShapeError(f"{label} failed validation at {path}: {err.message}")


def load_charge_set(doc) -> ChargeSet:
    validate_document(doc, CHARGE_SET_SCHEMA, "charge set")
    dim = doc["dim"]
    charges = []
    for k, mat in enumerate(doc["charges"]):
        m = matrix_from_json(mat, path=f"$['charges'][{k}]")
        if m.shape[0] != dim:
            raise ShapeError(
                f"$['charges'][{k}]: matrix is {m.shape[0]}x{m.shape[0]}, "
                f"declared dim is {dim}"
            )
        charges.append(m)
    return ChargeSet(charges)


def load_scenario(doc) -> tuple[Scenario, dict]:
    """Parse a scenario document; returns (Scenario, extras) where extras
    holds the optional bath_point / s_final_SB / options entries."""
    validate_document(doc, SCENARIO_SCHEMA, "scenario")
    d_s = doc["dims"]["system"]
    d_b = doc["dims"]["bath"]

    def charges_for(key, dim):
        mats = []
        for k, mat in enumerate(doc[key]):
            m = matrix_from_json(mat, path=f"$['{key}'][{k}]")
            if m.shape[0] != dim:
                raise ShapeError(
                    f"$['{key}'][{k}]: matrix is {m.shape[0]}x{m.shape[0]}, "
                    f"declared dim is {dim}"
                )
            mats.append(m)
        return ChargeSet(mats)

    system = charges_for("system_charges", d_s)
    bath = charges_for("bath_charges", d_b)
    try:
        rho = DensityState(matrix_from_json(doc["rho_S"], "$['rho_S']"))
    except Exception as exc:
        raise ShapeError(f"$['rho_S']: {exc}") from exc
    try:
        sigma = DensityState(matrix_from_json(doc["sigma_S"], "$['sigma_S']"))
    except Exception as exc:
        raise ShapeError(f"$['sigma_S']: {exc}") from exc

    scenario = Scenario(
        system_charges=system,
        bath_charges=bath,
        beta=doc["beta"],
        rho_S=rho,
        sigma_S=sigma,
        work=doc["work"],
        battery_capacity_ok=doc.get("battery_capacity_ok", True),
    )
    extras = {
        "bath_point": doc.get("bath_point"),
        "s_final_SB": doc.get("s_final_SB"),
        "options": doc.get("options", {}),
    }
    return scenario, extras


def _format_float(x: float) -> str:
    if np.isnan(x):
        return "NaN"
    if np.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == 0:
        return "0"  # normalize -0.0
    return format(float(x), ".12g")


def render_json(obj: Any) -> str:
    """Deterministic JSON text: sorted keys, 12-significant-digit floats."""

    def render(o) -> str:
        if isinstance(o, dict):
            items = sorted(o.items(), key=lambda kv: str(kv[0]))
            inner = ",".join(f"{json.dumps(str(k))}:{render(v)}" for k, v in items)
            return "{" + inner + "}"
        if isinstance(o, (list, tuple)):
            return "[" + ",".join(render(v) for v in o) + "]"
        if isinstance(o, np.ndarray):
            return render(o.tolist())
        if isinstance(o, bool) or isinstance(o, np.bool_):
            return "true" if o else "false"
        if o is None:
            return "null"
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return _format_float(float(o))
        if isinstance(o, complex):
            return render([o.real, o.imag])
        return json.dumps(o)

    return render(obj)
