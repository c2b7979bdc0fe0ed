"""Parameter validation against the bundled benchmark schemas.

Covers the JSON Schema keywords the schemas use: type, const, enum,
required, minimum, maximum, items and default. Every violation is
collected before reporting.
"""

from __future__ import annotations

import copy
import json
from functools import lru_cache
from importlib import resources

from ..registry import BENCHMARK_SLUGS, canonical_name

_TYPES = {
    "string": lambda v: isinstance(v, str),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "boolean": lambda v: isinstance(v, bool),
    "array": lambda v: isinstance(v, list),
    "object": lambda v: isinstance(v, dict),
    "null": lambda v: v is None,
}


class ValidationError(ValueError):
    """Raised with the full list of violations in ``errors``."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@lru_cache(maxsize=None)
def _load_schema(slug: str) -> str:
    return resources.files("qbench.dataset").joinpath("schemas", f"{slug}.schema.json").read_text()


def load_schema(benchmark_name: str) -> dict:
    return json.loads(_load_schema(BENCHMARK_SLUGS[canonical_name(benchmark_name)]))


def all_schemas() -> dict[str, dict]:
    return {name: load_schema(name) for name in BENCHMARK_SLUGS}


def _check(schema: dict, value, path: str, errors: list[str]) -> None:
    where = path or "params"
    t = schema.get("type")
    if t is not None:
        types = t if isinstance(t, list) else [t]
        if not any(_TYPES[x](value) for x in types):
            errors.append(f"{where}: expected type {'/'.join(types)}, got {type(value).__name__}")
            return
    if "const" in schema and value != schema["const"]:
        errors.append(f"{where}: must equal {schema['const']!r}")
    if "enum" in schema and value not in schema["enum"]:
        errors.append(f"{where}: must be one of {schema['enum']!r}")
    if _TYPES["number"](value):
        if "minimum" in schema and value < schema["minimum"]:
            errors.append(f"{where}: minimum {schema['minimum']}, got {value}")
        if "maximum" in schema and value > schema["maximum"]:
            errors.append(f"{where}: maximum {schema['maximum']}, got {value}")
    if isinstance(value, list) and "items" in schema:
        for i, item in enumerate(value):
            _check(schema["items"], item, f"{where}[{i}]", errors)
    if isinstance(value, dict):
        props = schema.get("properties", {})
        for key in schema.get("required", []):
            if key not in value:
                errors.append(f"{where}: missing required field {key!r}")
        for key, sub in props.items():
            if key in value:
                _check(sub, value[key], f"{path}.{key}" if path else key, errors)


def validate_params(schema: dict, params: dict) -> dict:
    """Return a copy of ``params`` with defaults filled in, or raise ValidationError."""
    errors: list[str] = []
    if not isinstance(params, dict):
        raise ValidationError(["params: expected an object"])
    _check(schema, params, "", errors)
    if errors:
        raise ValidationError(errors)
    out = copy.deepcopy(params)
    for key, sub in schema.get("properties", {}).items():
        if key not in out and "default" in sub:
            out[key] = copy.deepcopy(sub["default"])
    return out


def validate_benchmark_params(params: dict) -> dict:
    """Look up the schema from ``benchmark_name`` and validate."""
    if not isinstance(params, dict):
        raise ValidationError(["params: expected an object"])
    name = params.get("benchmark_name")
    if not isinstance(name, str):
        raise ValidationError(["params: missing required field 'benchmark_name'"])
    try:
        schema = load_schema(name)
    except KeyError:
        raise ValidationError([f"benchmark_name: unknown benchmark {name!r}"]) from None
    return validate_params(schema, params)
