"""JSON encoding of complex numbers, matrices and realizations.

A complex number is ``[re, im]`` (a bare real number is also accepted on
input).  A matrix is ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` in
row-major order.  A realization is ``{"C": M, "A": M, "B": M, "D": M?,
"q": real?}``.  Decoding errors carry a JSON pointer to the offending field.
"""
import json
import math

import numpy as np

from .exceptions import ValidationError
from .statespace import QRational, StateSpace


class SchemaError(ValidationError):
    """Input JSON does not follow the expected schema."""

    def __init__(self, pointer, message):
        self.pointer = pointer or "/"
        super().__init__(f"{self.pointer}: {message}")


def _ptr(base, key):
    return f"{base}/{key}"


def _clean(x):
    x = float(x)
    # normalize negative zero so output is byte-stable
    return 0.0 if x == 0 else x


def encode_complex(z):
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def decode_complex(obj, pointer=""):
    if isinstance(obj, bool):
        raise SchemaError(pointer, "expected a number or [re, im]")
    if isinstance(obj, (int, float)):
        val = complex(obj)
    elif (isinstance(obj, list) and len(obj) == 2
          and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)):
        val = complex(obj[0], obj[1])
    else:
        raise SchemaError(pointer, "expected a number or [re, im]")
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise SchemaError(pointer, "non-finite value")
    return val


def decode_complex_list(obj, pointer=""):
    if not isinstance(obj, list):
        obj = [obj]
    return np.array([decode_complex(v, _ptr(pointer, i)) for i, v in enumerate(obj)],
                    dtype=complex)


def decode_real(obj, pointer="", lo=None, hi=None):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise SchemaError(pointer, "expected a real number")
    val = float(obj)
    if not math.isfinite(val) or (lo is not None and val < lo) or (hi is not None and val > hi):
        raise SchemaError(pointer, f"value {val} out of range")
    return val


def decode_int(obj, pointer="", lo=None):
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise SchemaError(pointer, "expected an integer")
    if lo is not None and obj < lo:
        raise SchemaError(pointer, f"must be >= {lo}")
    return obj


def encode_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "data": [encode_complex(v) for v in M.ravel()]}


def decode_matrix(obj, pointer=""):
    """Decode a matrix object; a bare number or ``[re, im]`` is read as 1x1."""
    if not isinstance(obj, dict):
        try:
            return np.array([[decode_complex(obj, pointer)]])
        except SchemaError:
            raise SchemaError(pointer, "expected a matrix object {rows, cols, data}")
    for key in ("rows", "cols", "data"):
        if key not in obj:
            raise SchemaError(_ptr(pointer, key), "missing field")
    r = decode_int(obj["rows"], _ptr(pointer, "rows"), 0)
    c = decode_int(obj["cols"], _ptr(pointer, "cols"), 0)
    data = obj["data"]
    if not isinstance(data, list):
        raise SchemaError(_ptr(pointer, "data"), "expected a list")
    if len(data) != r * c:
        raise SchemaError(_ptr(pointer, "data"), f"expected {r * c} entries, got {len(data)}")
    vals = [decode_complex(v, _ptr(_ptr(pointer, "data"), i)) for i, v in enumerate(data)]
    return np.array(vals, dtype=complex).reshape(r, c)


def encode_statespace(ss, q=None):
    out = {"C": encode_matrix(ss.C), "A": encode_matrix(ss.A), "B": encode_matrix(ss.B)}
    if ss.has_D:
        out["D"] = encode_matrix(ss.D)
    if q is not None:
        out["q"] = float(q)
    return out


def encode_qrational(fr):
    return encode_statespace(fr.ss, fr.q)


def decode_statespace(obj, pointer=""):
    """Return ``(StateSpace, q)``; ``q`` is ``None`` when absent."""
    if not isinstance(obj, dict):
        raise SchemaError(pointer, "expected a realization object {C, A, B, D?, q?}")
    mats = {}
    for key in ("C", "A", "B"):
        if key not in obj:
            raise SchemaError(_ptr(pointer, key), "missing field")
        mats[key] = decode_matrix(obj[key], _ptr(pointer, key))
    D = decode_matrix(obj["D"], _ptr(pointer, "D")) if obj.get("D") is not None else None
    q = decode_real(obj["q"], _ptr(pointer, "q"), 0.0, 1.0) if "q" in obj else None
    A = mats["A"]
    if A.shape[0] == 0:
        C = mats["C"].reshape(mats["C"].shape[0], 0)
        B = mats["B"].reshape(0, mats["B"].shape[1])
        mats.update(C=C, B=B)
    try:
        return StateSpace(mats["C"], A, mats["B"], D), q
    except ValidationError as exc:
        raise SchemaError(pointer, str(exc))


def decode_coeffs(obj, pointer=""):
    """List of equally shaped matrices, or a flat list of scalars."""
    if not isinstance(obj, list) or not obj:
        raise SchemaError(pointer, "expected a nonempty list of coefficients")
    mats = [decode_matrix(v, _ptr(pointer, i)) for i, v in enumerate(obj)]
    shape = mats[0].shape
    for i, M in enumerate(mats):
        if M.shape != shape:
            raise SchemaError(_ptr(pointer, i), f"shape {M.shape} differs from {shape}")
    return np.array(mats)


def encode_coeffs(T):
    return [encode_matrix(M) for M in np.asarray(T)]


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj):
    """Deterministic JSON text (sorted keys, fixed indentation)."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False, default=_default) + "\n"


def load_qrational(obj, pointer="", q=None):
    ss, q_in = decode_statespace(obj, pointer)
    q = q_in if q is None else q
    return QRational(ss, 0.0 if q is None else q)
