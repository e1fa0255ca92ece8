"""JSON state files.

Schema::

    {"modes": n, "representation": "quadrature" | "normal",
     "sigma": [[...]], "mean": [...],                      # quadrature
     "B": [...], "C": [[re, im], ...],                     # normal
     "D": {"0,1": [re, im]}, "Dbar": {"0,1": [re, im]},
     "mean": [...]}                                         # optional in both

Complex numbers are ``[re, im]`` pairs. ``mean`` is the quadrature mean <X>.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError, WitnessError
from .gaussian_core import NormalCM, QuadratureState, from_normal, to_normal


class SchemaError(WitnessError):
    """A state file cannot be parsed; the message names the offending line or field."""


def _complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise SchemaError(f"field {where}: expected [re, im], got {value!r}")


def _pairs(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(f"field {where}: expected an object keyed by 'j,l'")
    out = {}
    for key, value in obj.items():
        try:
            j, l = (int(t) for t in key.split(","))
        except ValueError:
            raise SchemaError(f"field {where}: key {key!r} is not of the form 'j,l'") from None
        out[(j, l)] = _complex(value, f"{where}[{key!r}]")
    return out


def _real_array(obj, where: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"field {where}: expected a numeric array") from None
    if arr.ndim != ndim:
        raise SchemaError(f"field {where}: expected {ndim}-dimensional array, got shape {arr.shape}")
    return arr


def parse_state(data: dict) -> tuple[QuadratureState, NormalCM]:
    """Build both representations without enforcing physicality (the caller decides)."""
    if not isinstance(data, dict):
        raise SchemaError("top level: expected a JSON object")
    rep = data.get("representation", "quadrature")
    if "modes" not in data:
        raise SchemaError("field modes: missing")
    n = data["modes"]
    if not isinstance(n, int) or n < 1:
        raise SchemaError(f"field modes: expected a positive integer, got {n!r}")
    mean = _real_array(data["mean"], "mean", 1) if "mean" in data else None
    if mean is not None and mean.size != 2 * n:
        raise SchemaError(f"field mean: expected {2 * n} entries, got {mean.size}")
    try:
        if rep == "quadrature":
            if "sigma" not in data:
                raise SchemaError("field sigma: missing")
            sigma = _real_array(data["sigma"], "sigma", 2)
            if sigma.shape != (2 * n, 2 * n):
                raise SchemaError(f"field sigma: expected shape {(2 * n, 2 * n)}, got {sigma.shape}")
            state = QuadratureState(sigma, mean)
            return state, to_normal(state, check=False)
        if rep == "normal":
            for key in ("B", "C"):
                if key not in data:
                    raise SchemaError(f"field {key}: missing")
            B = _real_array(data["B"], "B", 1)
            if not isinstance(data["C"], list):
                raise SchemaError("field C: expected a list of [re, im]")
            C = [_complex(v, f"C[{i}]") for i, v in enumerate(data["C"])]
            if B.size != n or len(C) != n:
                raise SchemaError(f"fields B, C: expected {n} entries each")
            cm = NormalCM(B, C, _pairs(data.get("D", {}), "D"), _pairs(data.get("Dbar", {}), "Dbar"))
            return from_normal(cm, mean, check=False), cm
    except ValidationError as exc:
        raise SchemaError(str(exc)) from exc
    raise SchemaError(f"field representation: expected 'quadrature' or 'normal', got {rep!r}")


def load_state(path) -> tuple[QuadratureState, NormalCM]:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_state(data)


def _pair_json(v: complex) -> list:
    return [float(v.real), float(v.imag)]


def normal_to_json(cm: NormalCM, mean=None) -> dict:
    out = {
        "modes": cm.n_modes,
        "representation": "normal",
        "B": [float(b) for b in cm.B],
        "C": [_pair_json(c) for c in cm.C],
        "D": {f"{j},{l}": _pair_json(v) for (j, l), v in sorted(cm.D.items())},
        "Dbar": {f"{j},{l}": _pair_json(v) for (j, l), v in sorted(cm.Dbar.items())},
    }
    if mean is not None:
        out["mean"] = [float(m) for m in mean]
    return out


def quadrature_to_json(state: QuadratureState) -> dict:
    return {
        "modes": state.n_modes,
        "representation": "quadrature",
        "sigma": state.sigma.tolist(),
        "mean": state.mean.tolist(),
    }
