"""JSON encoding of matrices, points, group elements and reports.

A complex scalar is ``[re, im]``; a matrix is a nested row-major list.
Real matrices may be written with plain numbers, and complex entries
may also be given as plain numbers when the imaginary part is zero.
Output is canonical: sorted keys and shortest round-trip floats.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .group import HeisenbergElement, JacobiGroupElement, JacobiPoint, SiegelPoint, SymplecticMatrix


class ParseError(ValueError):
    """Input that is not valid JSON or does not follow the matrix format."""


def _real(x) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"expected a number, got {x!r}")
    return float(x)


def _complex(x) -> complex:
    if isinstance(x, list):
        if len(x) != 2:
            raise ParseError(f"complex scalar must be [re, im], got {x!r}")
        return complex(_real(x[0]), _real(x[1]))
    return complex(_real(x))


def _rows(obj, name: str) -> list:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return [[obj]]
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ParseError(f"{name} must be a non-empty nested list of rows")
    if len({len(r) for r in obj}) != 1:
        raise ParseError(f"{name} has ragged rows")
    return obj


def parse_real_matrix(obj, name: str = "matrix") -> np.ndarray:
    return np.array([[_real(x) for x in row] for row in _rows(obj, name)], dtype=float)


def parse_complex_matrix(obj, name: str = "matrix") -> np.ndarray:
    if isinstance(obj, list) and len(obj) == 2 and all(isinstance(x, (int, float)) for x in obj):
        return np.array([[_complex(obj)]])
    return np.array([[_complex(x) for x in row] for row in _rows(obj, name)], dtype=complex)


def _finite(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x} cannot be serialized")
    return float(x)


def encode_complex(z: complex) -> list:
    return [_finite(z.real), _finite(z.imag)]


def encode_complex_matrix(a) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return [[encode_complex(complex(x)) for x in row] for row in a]


def encode_real_matrix(a) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return [[_finite(x) for x in row] for row in a]


def parse_point(obj):
    """``{"Z": ..., "W": ...}``; without ``W`` a ``SiegelPoint`` is returned."""
    if not isinstance(obj, dict) or "Z" not in obj:
        raise ParseError('a point is an object with key "Z" and optional key "W"')
    Z = parse_complex_matrix(obj["Z"], "Z")
    if obj.get("W") is None:
        return SiegelPoint(Z)
    return JacobiPoint(Z, parse_complex_matrix(obj["W"], "W"))


def encode_point(p) -> dict:
    if isinstance(p, SiegelPoint):
        return {"Z": encode_complex_matrix(p.Z)}
    return {"Z": encode_complex_matrix(p.Z), "W": encode_complex_matrix(p.W)}


def parse_element(obj) -> JacobiGroupElement:
    if not isinstance(obj, dict) or "M" not in obj:
        raise ParseError('an element is an object with keys "M", "lambda", "mu", "kappa"')
    M = parse_real_matrix(obj["M"], "M")
    n = M.shape[0] // 2
    lam = parse_real_matrix(obj["lambda"], "lambda") if "lambda" in obj else None
    mu = parse_real_matrix(obj["mu"], "mu") if "mu" in obj else None
    m = (lam if lam is not None else mu).shape[0] if (lam is not None or mu is not None) else 1
    lam = np.zeros((m, n)) if lam is None else lam
    mu = np.zeros((m, n)) if mu is None else mu
    kappa = parse_real_matrix(obj["kappa"], "kappa") if "kappa" in obj else np.zeros((m, m))
    return JacobiGroupElement(SymplecticMatrix(M), HeisenbergElement(lam, mu, kappa))


def encode_element(g: JacobiGroupElement) -> dict:
    return {
        "M": encode_real_matrix(g.M.M),
        "lambda": encode_real_matrix(g.h.lam),
        "mu": encode_real_matrix(g.h.mu),
        "kappa": encode_real_matrix(g.h.kappa),
    }


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(complex(obj))
    return obj


def dumps(obj) -> str:
    """Canonical JSON text (sorted keys, two-space indent, shortest floats)."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False)


def loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None


def digest(obj) -> str:
    """Short SHA-256 of the canonical encoding of ``obj``."""
    text = json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
