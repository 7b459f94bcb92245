"""Scenario configuration: JSON parsing with path-precise errors.

Schema (top level):

    {"scenarios": [{
        "name": str,
        "initial_datum": {"atoms": [{"value": v, "weight": w}, ...]}
                       | {"pieces": [{"value": v, "measure": m}, ...]}
                       | {"sampler": {"expr": "<u0(x)>", "n": int,
                                      "domain_measure": m?}},
        "control": {<StepControl overrides>}?,
        "lyapunov": [<catalog names>]?,          # default: per-hypothesis
        "checks": {<flag>: bool, ...}?,
        "sandwich_eps": float?
    }, ...]}

Parsing is total: every malformed document raises SchemaError carrying
the path of the offending element.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .analysis import CATALOG
from .errors import SchemaError
from .integrator import StepControl
from .state import AtomListSpec, InitialDatumSpec, PiecewiseSpec, SamplerSpec

CHECK_NAMES = ("mass", "interval", "lyapunov", "omega_limit",
               "characteristic", "sandwich", "h2_uniqueness")
DEFAULT_CHECKS = {
    "mass": True,
    "interval": True,
    "lyapunov": True,
    "omega_limit": True,
    "characteristic": False,
    "sandwich": False,
    "h2_uniqueness": True,
}

_CONTROL_KEYS = tuple(f.name for f in fields(StepControl))

# Names the sampler expression may reference besides x.
_EXPR_NS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp,
    "log": np.log, "sqrt": np.sqrt, "tanh": np.tanh, "sinh": np.sinh,
    "cosh": np.cosh, "abs": np.abs, "minimum": np.minimum,
    "maximum": np.maximum, "where": np.where, "pi": math.pi, "e": math.e,
}


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    initial_datum: InitialDatumSpec
    control: StepControl
    lyapunov: tuple[str, ...] | None  # None: default catalog for the class
    checks: dict[str, bool]
    checks_explicit: frozenset[str]  # flags the user set themselves
    sandwich_eps: float = 0.05


def _require(cond: bool, path: str, message: str):
    if not cond:
        raise SchemaError(path, message)


def _number(value, path: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool),
             path, f"expected a number, got {type(value).__name__}")
    _require(math.isfinite(float(value)), path, "must be finite")
    return float(value)


def _object(value, path: str, allowed: tuple[str, ...]) -> dict:
    _require(isinstance(value, dict), path,
             f"expected an object, got {type(value).__name__}")
    for key in value:
        _require(key in allowed, f"{path}.{key}", "unknown key")
    return value


def _weighted_list(raw, path: str, weight_key: str) -> tuple[tuple[float, float], ...]:
    _require(isinstance(raw, list), path, "expected an array")
    _require(len(raw) > 0, path, "must not be empty")
    out = []
    for i, entry in enumerate(raw):
        epath = f"{path}[{i}]"
        _object(entry, epath, ("value", weight_key))
        _require("value" in entry, epath, "missing key 'value'")
        _require(weight_key in entry, epath, f"missing key '{weight_key}'")
        value = _number(entry["value"], f"{epath}.value")
        weight = _number(entry[weight_key], f"{epath}.{weight_key}")
        _require(weight > 0.0, f"{epath}.{weight_key}", "must be > 0")
        out.append((value, weight))
    return tuple(out)


def _compile_sampler(raw, path: str) -> SamplerSpec:
    _object(raw, path, ("expr", "n", "domain_measure"))
    _require("expr" in raw, path, "missing key 'expr'")
    _require("n" in raw, path, "missing key 'n'")
    expr = raw["expr"]
    _require(isinstance(expr, str) and expr.strip() != "",
             f"{path}.expr", "expected a non-empty string")
    _require("__" not in expr, f"{path}.expr", "double underscore not allowed")
    n = raw["n"]
    _require(isinstance(n, int) and not isinstance(n, bool) and n >= 1,
             f"{path}.n", "expected an integer >= 1")
    measure = 1.0
    if "domain_measure" in raw:
        measure = _number(raw["domain_measure"], f"{path}.domain_measure")
        _require(measure > 0.0, f"{path}.domain_measure", "must be > 0")
    try:
        code = compile(expr, "<sampler>", "eval")
    except SyntaxError as exc:
        raise SchemaError(f"{path}.expr", f"invalid expression: {exc.msg}")

    def fn(x):
        return eval(code, {"__builtins__": {}}, {**_EXPR_NS, "x": x})

    # Reject expressions that cannot even evaluate on the sample points.
    try:
        probe = np.asarray(fn(np.array([0.25, 0.75])), dtype=np.float64)
    except Exception as exc:
        raise SchemaError(f"{path}.expr", f"evaluation failed: {exc}")
    _require(np.all(np.isfinite(np.atleast_1d(probe))),
             f"{path}.expr", "expression produced non-finite values")
    return SamplerSpec(fn=fn, n=n, domain_measure=measure)


def _parse_datum(raw, path: str) -> InitialDatumSpec:
    _object(raw, path, ("atoms", "pieces", "sampler"))
    keys = [k for k in ("atoms", "pieces", "sampler") if k in raw]
    _require(len(keys) == 1, path,
             "expected exactly one of 'atoms', 'pieces', 'sampler'")
    kind = keys[0]
    if kind == "atoms":
        return AtomListSpec(_weighted_list(raw["atoms"], f"{path}.atoms", "weight"))
    if kind == "pieces":
        return PiecewiseSpec(_weighted_list(raw["pieces"], f"{path}.pieces", "measure"))
    return _compile_sampler(raw["sampler"], f"{path}.sampler")


def _parse_control(raw, path: str) -> StepControl:
    _object(raw, path, _CONTROL_KEYS)
    overrides = {}
    for key, value in raw.items():
        overrides[key] = _number(value, f"{path}.{key}")
    try:
        return StepControl(**overrides)
    except ValueError as exc:
        raise SchemaError(path, str(exc))


def _parse_scenario(raw, path: str) -> ScenarioConfig:
    _object(raw, path, ("name", "initial_datum", "control", "lyapunov",
                        "checks", "sandwich_eps"))
    _require("name" in raw, path, "missing key 'name'")
    name = raw["name"]
    _require(isinstance(name, str) and name.strip() != "",
             f"{path}.name", "expected a non-empty string")
    _require("initial_datum" in raw, path, "missing key 'initial_datum'")
    datum = _parse_datum(raw["initial_datum"], f"{path}.initial_datum")

    control = StepControl()
    if "control" in raw:
        control = _parse_control(raw["control"], f"{path}.control")

    lyapunov = None
    if "lyapunov" in raw:
        entries = raw["lyapunov"]
        _require(isinstance(entries, list), f"{path}.lyapunov",
                 "expected an array of catalog names")
        names = []
        for i, entry in enumerate(entries):
            epath = f"{path}.lyapunov[{i}]"
            _require(isinstance(entry, str), epath, "expected a string")
            _require(entry in CATALOG, epath,
                     f"unknown catalog entry {entry!r}")
            names.append(entry)
        lyapunov = tuple(names)

    checks = dict(DEFAULT_CHECKS)
    explicit: set[str] = set()
    if "checks" in raw:
        flags = _object(raw["checks"], f"{path}.checks", CHECK_NAMES)
        for key, value in flags.items():
            _require(isinstance(value, bool), f"{path}.checks.{key}",
                     "expected a boolean")
            checks[key] = value
            explicit.add(key)

    sandwich_eps = 0.05
    if "sandwich_eps" in raw:
        sandwich_eps = _number(raw["sandwich_eps"], f"{path}.sandwich_eps")
        _require(sandwich_eps > 0.0, f"{path}.sandwich_eps", "must be > 0")

    return ScenarioConfig(name=name.strip(), initial_datum=datum,
                          control=control, lyapunov=lyapunov, checks=checks,
                          checks_explicit=frozenset(explicit),
                          sandwich_eps=sandwich_eps)


def parse_config(text: str) -> list[ScenarioConfig]:
    """Parse and validate a config document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("(document)", f"invalid JSON: {exc}")
    _object(doc, "(document)", ("scenarios",))
    _require("scenarios" in doc, "(document)", "missing key 'scenarios'")
    raw_list = doc["scenarios"]
    _require(isinstance(raw_list, list), "scenarios", "expected an array")
    _require(len(raw_list) > 0, "scenarios", "must not be empty")
    configs = []
    seen = set()
    for i, raw in enumerate(raw_list):
        cfg = _parse_scenario(raw, f"scenarios[{i}]")
        _require(cfg.name not in seen, f"scenarios[{i}].name",
                 f"duplicate scenario name {cfg.name!r}")
        seen.add(cfg.name)
        configs.append(cfg)
    return configs
