"""JSON state files.

Complex numbers are written as ``[re, im]`` pairs. Supported kinds::

    {"kind": "density",   "d1": 2, "d2": 2, "matrix": [[[re, im], ...], ...]}
    {"kind": "operator",  "d1": 2, "d2": 2, "matrix": ...}   # any square matrix
    {"kind": "pure",      "d1": 2, "d2": 2, "vector": [[re, im], ...]}
    {"kind": "separable", "d1": 2, "d2": 2,
     "terms": [{"w": 0.5, "rho1": [[...]], "rho2": [[...]]}, ...]}
    {"kind": "projector", "subsystem": 1, "matrix": ...}
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .core import DEFAULT_TOL, BipartiteDensity, PureBipartiteState, ToleranceConfig
from .errors import ValidationError
from .separable import SeparableMixture

__all__ = [
    "StateFileError",
    "encode_matrix",
    "encode_vector",
    "decode_matrix",
    "decode_vector",
    "parse_state",
    "load_state",
    "load_projector",
    "state_to_dict",
    "dump_state",
]


class StateFileError(ValidationError):
    """Malformed state file; ``path`` names the offending field, e.g. ``matrix[2][1]``."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def _complex(entry, path):
    if (
        not isinstance(entry, (list, tuple))
        or len(entry) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
    ):
        raise StateFileError(path, "expected a [re, im] pair of numbers")
    if not all(math.isfinite(x) for x in entry):
        raise StateFileError(path, "non-finite number")
    return complex(entry[0], entry[1])


def decode_vector(obj, path="vector", length=None) -> np.ndarray:
    if not isinstance(obj, list):
        raise StateFileError(path, "expected a list")
    if length is not None and len(obj) != length:
        raise StateFileError(path, f"expected {length} entries, got {len(obj)}")
    return np.array([_complex(e, f"{path}[{i}]") for i, e in enumerate(obj)], dtype=complex)


def decode_matrix(obj, path="matrix", size=None) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise StateFileError(path, "expected a non-empty list of rows")
    n = len(obj) if size is None else size
    if len(obj) != n:
        raise StateFileError(path, f"expected {n} rows, got {len(obj)}")
    rows = [decode_vector(r, f"{path}[{i}]", n) for i, r in enumerate(obj)]
    return np.array(rows)


def encode_vector(v) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def encode_matrix(m) -> list:
    return [encode_vector(row) for row in np.asarray(m, dtype=complex)]


def _dim(doc, key):
    d = doc.get(key)
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise StateFileError(key, "expected a positive integer")
    return d


def parse_state(doc, tol: ToleranceConfig = DEFAULT_TOL):
    """Build a state object from a decoded JSON document.

    Returns ``(kind, obj)`` where obj is a BipartiteDensity, a
    PureBipartiteState, a SeparableMixture, or (kind ``operator``) a
    ``(matrix, d1, d2)`` tuple.
    """
    if not isinstance(doc, dict):
        raise StateFileError("<root>", "expected a JSON object")
    kind = doc.get("kind")
    if kind not in ("density", "operator", "pure", "separable"):
        raise StateFileError("kind", f"unknown state kind {kind!r}")
    d1, d2 = _dim(doc, "d1"), _dim(doc, "d2")
    try:
        if kind in ("density", "operator"):
            m = decode_matrix(doc.get("matrix"), "matrix", d1 * d2)
            if kind == "operator":
                return kind, (m, d1, d2)
            return kind, BipartiteDensity.from_matrix(m, d1, d2, tol)
        if kind == "pure":
            v = decode_vector(doc.get("vector"), "vector", d1 * d2)
            return kind, PureBipartiteState(d1, d2, v, tol)
        terms = doc.get("terms")
        if not isinstance(terms, list) or not terms:
            raise StateFileError("terms", "expected a non-empty list")
        parsed = []
        for k, t in enumerate(terms):
            if not isinstance(t, dict):
                raise StateFileError(f"terms[{k}]", "expected an object")
            w = t.get("w")
            if not isinstance(w, (int, float)) or isinstance(w, bool):
                raise StateFileError(f"terms[{k}].w", "expected a number")
            parsed.append((
                float(w),
                decode_matrix(t.get("rho1"), f"terms[{k}].rho1", d1),
                decode_matrix(t.get("rho2"), f"terms[{k}].rho2", d2),
            ))
        return kind, SeparableMixture(d1, d2, tuple(parsed), tol)
    except StateFileError:
        raise
    except ValidationError as exc:
        raise StateFileError(kind, str(exc)) from exc


def _read(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StateFileError(str(path), f"cannot read file ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(str(path), f"invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_state(path, tol: ToleranceConfig = DEFAULT_TOL):
    return parse_state(_read(path), tol)


def load_projector(path) -> tuple[int, np.ndarray]:
    """Read a projector file; returns ``(subsystem, matrix)``. Validation is the caller's."""
    doc = _read(path)
    if not isinstance(doc, dict):
        raise StateFileError("<root>", "expected a JSON object")
    if doc.get("kind", "projector") not in ("projector", "operator"):
        raise StateFileError("kind", f"expected 'projector', got {doc.get('kind')!r}")
    sub = doc.get("subsystem", 1)
    if sub not in (1, 2):
        raise StateFileError("subsystem", "expected 1 or 2")
    return sub, decode_matrix(doc.get("matrix"), "matrix")


def state_to_dict(obj) -> dict:
    if isinstance(obj, BipartiteDensity):
        return {"kind": "density", "d1": obj.d1, "d2": obj.d2, "matrix": encode_matrix(obj.matrix)}
    if isinstance(obj, PureBipartiteState):
        return {"kind": "pure", "d1": obj.d1, "d2": obj.d2, "vector": encode_vector(obj.vector)}
    if isinstance(obj, SeparableMixture):
        return {
            "kind": "separable", "d1": obj.d1, "d2": obj.d2,
            "terms": [
                {"w": w, "rho1": encode_matrix(r1), "rho2": encode_matrix(r2)}
                for w, r1, r2 in obj.terms
            ],
        }
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_state(obj, path):
    Path(path).write_text(json.dumps(state_to_dict(obj), indent=1) + "\n", encoding="utf-8")
