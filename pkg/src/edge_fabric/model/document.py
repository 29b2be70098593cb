# src/edge_fabric/model/document.py
"""Strict JSON document helpers shared by the spec, topology and scenario parsers."""
import json
import math
from typing import Any, Dict, Iterable, List, Optional

from edge_fabric.errors import FieldError, SpecSyntaxError


def load_document(text: str) -> Any:
    """Parse JSON text, turning decoder errors into SpecSyntaxError with line/column."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecSyntaxError(e.msg, e.lineno, e.colno)


def child(path: str, key: Any) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


def expect_object(value: Any, path: str, required: Iterable[str], optional: Iterable[str] = ()) -> Dict[str, Any]:
    """Check that value is an object holding every required key and nothing unknown."""
    label = path or "<root>"
    if not isinstance(value, dict):
        raise FieldError(label, "expected an object")
    required = list(required)
    allowed = set(required) | set(optional)
    for key in required:
        if key not in value:
            raise FieldError(child(path, key), "missing required field")
    for key in value:
        if key not in allowed:
            raise FieldError(child(path, key), "unknown field")
    return value


def get_list(obj: Dict[str, Any], key: str, path: str) -> List[Any]:
    value = obj[key]
    if not isinstance(value, list):
        raise FieldError(child(path, key), "expected an array")
    return value


def get_str(obj: Dict[str, Any], key: str, path: str, allow_none: bool = False) -> Optional[str]:
    value = obj.get(key)
    if value is None and allow_none:
        return None
    if not isinstance(value, str):
        raise FieldError(child(path, key), "expected a string")
    return value


def as_number(value: Any, path: str, minimum: Optional[float] = None, strict_min: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FieldError(path, "expected a number")
    value = float(value)
    if not math.isfinite(value):
        raise FieldError(path, "expected a finite number")
    if minimum is not None:
        if strict_min and value <= minimum:
            raise FieldError(path, f"must be > {minimum:g}")
        if not strict_min and value < minimum:
            raise FieldError(path, f"must be >= {minimum:g}")
    return value


def get_number(obj: Dict[str, Any], key: str, path: str, minimum: Optional[float] = None,
               strict_min: bool = False) -> float:
    return as_number(obj.get(key), child(path, key), minimum, strict_min)


def get_int(obj: Dict[str, Any], key: str, path: str, minimum: Optional[int] = None) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise FieldError(child(path, key), "expected an integer")
    if minimum is not None and value < minimum:
        raise FieldError(child(path, key), f"must be >= {minimum}")
    return value


def get_enum(obj: Dict[str, Any], key: str, path: str, choices: Iterable[str]) -> str:
    value = get_str(obj, key, path)
    choices = tuple(choices)
    if value not in choices:
        raise FieldError(child(path, key), f"must be one of {', '.join(choices)}")
    return value


def dump_document(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
