"""Run configuration: JSON schema, validation, canonical serialization.

Schema (all blocks are objects; sim and numeric fields have defaults):

    {
      "model":  {"family": "exponential|gamma|weibull|lognormal|tabulated",
                 "params": {...per family...}},
      "kernel": {"family": "exponential|tabulated", "params": {...}},
      "sim":    {"horizon": float > 0, "reps": int >= 1, "seed": int >= 0,
                 "count_origin": bool, "method": "cluster|thinning|stationary"},
      "numeric": {"renewal_step": float, "pgfl_grid_step": float|null,
                  "pgfl_tol": float, "thinning_window": float|null}
    }

parse_config collects every field-level problem before raising, so a bad
config reports all its errors at once.  serialize_config emits a canonical
form (sorted keys, defaults filled in); config_hash is the SHA-256 of the
compact canonical encoding, embedded in every output file for provenance.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .distributions import (
    ExponentialKernel,
    Exponential,
    Gamma,
    Lognormal,
    Tabulated,
    TabulatedKernel,
    Weibull,
)
from .errors import ConfigError

MODEL_FAMILIES = {
    "exponential": ("rate",),
    "gamma": ("shape", "rate"),
    "weibull": ("shape", "scale"),
    "lognormal": ("mu", "sigma"),
    "tabulated": ("grid", "density"),
}
KERNEL_FAMILIES = {
    "exponential": ("alpha", "beta"),
    "tabulated": ("grid", "values"),
}
METHODS = ("cluster", "thinning", "stationary")

SIM_DEFAULTS = {
    "horizon": None,  # required
    "reps": 1,
    "seed": 0,
    "count_origin": True,
    "method": "cluster",
}
NUMERIC_DEFAULTS = {
    "renewal_step": 0.001,
    "pgfl_grid_step": None,
    "pgfl_tol": 1e-10,
    "thinning_window": None,
}


@dataclass
class RunConfig:
    model_family: str
    model_params: dict
    kernel_family: str
    kernel_params: dict
    sim: dict = field(default_factory=dict)
    numeric: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model": {"family": self.model_family, "params": dict(self.model_params)},
            "kernel": {"family": self.kernel_family, "params": dict(self.kernel_params)},
            "sim": dict(self.sim),
            "numeric": dict(self.numeric),
        }


def build_model(cfg: RunConfig):
    params = cfg.model_params
    if cfg.model_family == "exponential":
        return Exponential(params["rate"])
    if cfg.model_family == "gamma":
        return Gamma(params["shape"], params["rate"])
    if cfg.model_family == "weibull":
        return Weibull(params["shape"], params["scale"])
    if cfg.model_family == "lognormal":
        return Lognormal(params["mu"], params["sigma"])
    if cfg.model_family == "tabulated":
        return Tabulated(
            params["grid"], params["density"], allow_defective=params.get("allow_defective", False)
        )
    raise ConfigError([f"model.family: unknown family {cfg.model_family!r}"])


def build_kernel(cfg: RunConfig):
    params = cfg.kernel_params
    if cfg.kernel_family == "exponential":
        return ExponentialKernel(params["alpha"], params["beta"])
    if cfg.kernel_family == "tabulated":
        return TabulatedKernel(params["grid"], params["values"])
    raise ConfigError([f"kernel.family: unknown family {cfg.kernel_family!r}"])


def _check_block(raw: dict, name: str, allowed, errors: list) -> dict:
    block = raw.get(name)
    if block is None:
        errors.append(f"{name}: missing required block")
        return {}
    if not isinstance(block, dict):
        errors.append(f"{name}: must be an object")
        return {}
    for key in block:
        if key not in allowed:
            errors.append(f"{name}.{key}: unknown field")
    return block


def _number(block, path, key, errors, default=None, required=False, positive=False):
    if key not in block or block[key] is None:
        if required:
            errors.append(f"{path}.{key}: missing required field")
        return default
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        errors.append(f"{path}.{key}: must be a number")
        return default
    if positive and v <= 0:
        errors.append(f"{path}.{key}: must be positive, got {v}")
        return default
    return float(v)


def _component(raw, name, families, errors):
    block = _check_block(raw, name, ("family", "params"), errors)
    family = block.get("family")
    params_in = block.get("params", {})
    if family not in families:
        errors.append(f"{name}.family: must be one of {sorted(families)}, got {family!r}")
        return family, {}
    if not isinstance(params_in, dict):
        errors.append(f"{name}.params: must be an object")
        return family, {}
    params = {}
    allowed = families[family] + (("allow_defective",) if name == "model" and family == "tabulated" else ())
    for key in params_in:
        if key not in allowed:
            errors.append(f"{name}.params.{key}: unknown parameter for family {family!r}")
    for key in families[family]:
        if key not in params_in:
            errors.append(f"{name}.params.{key}: missing required parameter")
            continue
        v = params_in[key]
        if key in ("grid", "density", "values"):
            if not isinstance(v, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
            ):
                errors.append(f"{name}.params.{key}: must be an array of numbers")
                continue
            params[key] = [float(x) for x in v]
        else:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                errors.append(f"{name}.params.{key}: must be a number")
                continue
            params[key] = float(v)
    if "allow_defective" in params_in:
        if not isinstance(params_in["allow_defective"], bool):
            errors.append(f"{name}.params.allow_defective: must be a boolean")
        else:
            params["allow_defective"] = params_in["allow_defective"]
    return family, params


def parse_config(text: str) -> RunConfig:
    """Parse and validate config JSON; raises ConfigError listing every problem."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config must be a JSON object"])

    errors: list[str] = []
    for key in raw:
        if key not in ("model", "kernel", "sim", "numeric"):
            errors.append(f"{key}: unknown top-level block")

    model_family, model_params = _component(raw, "model", MODEL_FAMILIES, errors)
    kernel_family, kernel_params = _component(raw, "kernel", KERNEL_FAMILIES, errors)

    if kernel_family == "exponential" and "alpha" in kernel_params:
        if kernel_params["alpha"] >= 1.0:
            errors.append(
                "kernel.params.alpha: branching ratio must be < 1 (subcriticality), "
                f"got {kernel_params['alpha']}"
            )
        elif kernel_params["alpha"] < 0:
            errors.append(f"kernel.params.alpha: must be >= 0, got {kernel_params['alpha']}")

    sim_block = _check_block(raw, "sim", tuple(SIM_DEFAULTS), errors)
    sim = dict(SIM_DEFAULTS)
    sim["horizon"] = _number(sim_block, "sim", "horizon", errors, required=True, positive=True)
    for key in ("reps", "seed"):
        if key in sim_block:
            v = sim_block[key]
            if isinstance(v, bool) or not isinstance(v, int):
                errors.append(f"sim.{key}: must be an integer")
            elif key == "reps" and v < 1:
                errors.append(f"sim.reps: must be >= 1, got {v}")
            elif key == "seed" and v < 0:
                errors.append(f"sim.seed: must be >= 0, got {v}")
            else:
                sim[key] = v
    if "count_origin" in sim_block:
        if not isinstance(sim_block["count_origin"], bool):
            errors.append("sim.count_origin: must be a boolean")
        else:
            sim["count_origin"] = sim_block["count_origin"]
    if "method" in sim_block:
        if sim_block["method"] not in METHODS:
            errors.append(f"sim.method: must be one of {list(METHODS)}, got {sim_block['method']!r}")
        else:
            sim["method"] = sim_block["method"]

    numeric_block = _check_block(raw, "numeric", tuple(NUMERIC_DEFAULTS), errors) if "numeric" in raw else {}
    numeric = dict(NUMERIC_DEFAULTS)
    numeric["renewal_step"] = _number(
        numeric_block, "numeric", "renewal_step", errors, default=NUMERIC_DEFAULTS["renewal_step"], positive=True
    )
    numeric["pgfl_tol"] = _number(
        numeric_block, "numeric", "pgfl_tol", errors, default=NUMERIC_DEFAULTS["pgfl_tol"], positive=True
    )
    for key in ("pgfl_grid_step", "thinning_window"):
        numeric[key] = _number(numeric_block, "numeric", key, errors, default=None, positive=True)

    if errors:
        raise ConfigError(errors)

    cfg = RunConfig(
        model_family=model_family,
        model_params=model_params,
        kernel_family=kernel_family,
        kernel_params=kernel_params,
        sim=sim,
        numeric=numeric,
    )
    # constructor-level validation (support, shape constraints) surfaces here
    try:
        build_model(cfg)
    except (ValueError, TypeError) as exc:
        errors.append(f"model.params: {exc}")
    try:
        build_kernel(cfg)
    except (ValueError, TypeError) as exc:
        errors.append(f"kernel.params: {exc}")
    if errors:
        raise ConfigError(errors)
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    """Canonical JSON: sorted keys, defaults materialized, trailing newline."""
    return json.dumps(cfg.to_dict(), sort_keys=True, indent=2) + "\n"


def config_hash(cfg: RunConfig) -> str:
    compact = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(compact.encode("utf-8")).hexdigest()
