"""
Run configuration: JSON schema, parsing into domain objects, stable output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .analytic import ProtocolParams
from .comb import CombParams
from .dynamics import GridSpec
from .link import LinkParams, get_preset

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_RANGE = {
    "oneOf": [
        {"type": "array", "items": _NUM, "minItems": 1},
        _obj({"start": _NUM, "stop": _NUM, "num": {"type": "integer", "minimum": 1},
              "spacing": {"enum": ["linear", "log"]}}, ["start", "stop", "num"]),
    ]
}

CONFIG_SCHEMA = _obj({
    "comb": {"oneOf": [
        _obj({"gamma_fwhm": _POS, "delta0": _POS, "big_gamma": _POS,
              "alpha_L": {"type": "number", "minimum": 0}},
             ["gamma_fwhm", "delta0", "big_gamma", "alpha_L"]),
        _obj({"preset": {"type": "string"}, "finesse": _POS}, ["preset"]),
    ]},
    "protocol": _obj({"theta0_sq": {"type": "number", "minimum": 0},
                      "t_d": {"type": "number", "minimum": 0},
                      "tau": {"type": "number", "minimum": 0},
                      "read_area": _NUM, "branching_ratio": _POS}, ["theta0_sq"]),
    "grid": _obj({"n_z": {"type": "integer", "minimum": 1}, "classes_per_fwhm": _POS,
                  "envelope_sigmas": _POS, "steps_per_inv_gamma": _POS,
                  "method": {"enum": ["quadrature", "monte_carlo"]},
                  "n_samples": {"type": "integer", "minimum": 1},
                  "seed": {"type": "integer"}, "force": {"type": "boolean"}}),
    "simulate": _obj({"phase_mismatch": _NUM,
                      "direction": {"enum": ["backward", "forward"]}}),
    "sweep": _obj({"alpha_L": _RANGE, "finesse": _RANGE, "theta0_sq": _RANGE,
                   "dynamics": {"type": "boolean"}}),
    "optimize": _obj({"alpha_L": _POS,
                      "objective": {"enum": ["raman_backward", "raman_forward",
                                             "memory_backward", "memory_forward"]},
                      "f_min": _POS, "f_max": _POS, "tol": _POS}),
    "link": _obj({"distance_km": {"type": "number", "minimum": 0},
                  "attenuation_db_per_km": {"type": "number", "minimum": 0},
                  "eta_c": {"type": "number", "minimum": 0, "maximum": 1},
                  "eta_d": {"type": "number", "minimum": 0, "maximum": 1},
                  "rate_hz": _POS, "p": {"type": "number", "minimum": 0, "maximum": 1},
                  "half_distance": {"type": "boolean"}, "preset": {"type": "string"},
                  "heralds": _POS, "p_from_comb": {"type": "boolean"}}),
    "output": _obj({"format": {"enum": ["csv", "json"]}, "path": {"type": "string"}}),
})

REPORT_SCHEMA = {
    "type": "object",
    "required": ["command"],
    "properties": {"command": {"enum": ["simulate", "sweep", "optimize", "link", "presets"]}},
}


class ConfigError(ValueError):
    """Configuration rejected before any computation."""


@dataclass
class RunConfig:
    comb: CombParams | None = None
    protocol: ProtocolParams | None = None
    grid: GridSpec = field(default_factory=GridSpec)
    options: dict = field(default_factory=dict)
    output_format: str = "json"
    output_path: str | None = None
    raw: dict = field(default_factory=dict)


def _describe(err: jsonschema.ValidationError) -> str:
    where = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"{where}: {err.message}"


def validate(raw) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        # oneOf failures hide the useful message in their context
        err = errors[0]
        if err.context:
            err = min(err.context, key=lambda e: len(list(e.absolute_path)))
        raise ConfigError(_describe(err))


def _comb(d) -> CombParams:
    if "preset" in d:
        try:
            return get_preset(d["preset"]).comb(d.get("finesse"))
        except KeyError as exc:
            raise ConfigError(f"comb/preset: {exc.args[0]}") from None
    return CombParams(**d)


def parse_config(raw: dict, overrides: dict | None = None) -> RunConfig:
    """Validate ``raw`` and build domain objects.

    ``overrides`` may hold ``theta0_sq``, ``alpha_L`` and ``finesse``; the
    finesse override keeps the tooth width and moves the tooth spacing.

    Raises
    ------
    ConfigError
        On schema violations or physically invalid values.
    """
    validate(raw)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    try:
        comb = _comb(raw["comb"]) if "comb" in raw else None
        if comb is not None and ("alpha_L" in overrides or "finesse" in overrides):
            d = comb.to_dict()
            if "alpha_L" in overrides:
                d["alpha_L"] = overrides["alpha_L"]
            if "finesse" in overrides:
                d["delta0"] = overrides["finesse"] * d["gamma_fwhm"]
            comb = CombParams(**d)
        protocol = None
        if "protocol" in raw:
            pd = dict(raw["protocol"])
            if "theta0_sq" in overrides:
                pd["theta0_sq"] = overrides["theta0_sq"]
            protocol = ProtocolParams(**pd)
        grid = GridSpec(**raw.get("grid", {}))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    out = raw.get("output", {})
    options = {k: raw[k] for k in ("simulate", "sweep", "optimize", "link") if k in raw}
    return RunConfig(comb=comb, protocol=protocol, grid=grid, options=options,
                     output_format=out.get("format", "json"),
                     output_path=out.get("path"), raw=raw)


def load_config(path, overrides=None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(raw, overrides)


def expand_range(spec) -> list[float]:
    if isinstance(spec, list):
        return [float(v) for v in spec]
    if spec.get("spacing", "linear") == "log":
        return [float(v) for v in np.geomspace(spec["start"], spec["stop"], spec["num"])]
    return [float(v) for v in np.linspace(spec["start"], spec["stop"], spec["num"])]


def link_params(d: dict) -> LinkParams:
    base = {"distance_km": 1.0, "attenuation_db_per_km": 9.0, "eta_c": 0.5,
            "eta_d": 0.7, "rate_hz": 1e3, "p": 0.05, "half_distance": True}
    if "preset" in d and "attenuation_db_per_km" not in d:
        base["attenuation_db_per_km"] = get_preset(d["preset"]).attenuation_db_per_km
    keys = set(base)
    return LinkParams(**{**base, **{k: v for k, v in d.items() if k in keys}})


def _stable(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return repr(x)
        return float(f"{x:.9g}")
    if isinstance(obj, dict):
        return {str(k): _stable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_stable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with sorted keys and floats rounded to 9 significant digits."""
    return json.dumps(_stable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
