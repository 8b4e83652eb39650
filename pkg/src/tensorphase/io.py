"""Tensor and system JSON files, plus the deterministic report encoder.

A tensor file is ``{"row_dims": [...], "col_dims": [...], "data": [[re, im], ...]}``
with ``data`` listing the unfolded matrix row by row.  Floats are written
with Python's shortest round-trip repr, so write-then-read preserves every
bit.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import FormatError, ShapeError
from .tensor import DenseTensor

__all__ = [
    "tensor_to_json",
    "tensor_from_json",
    "system_to_json",
    "system_from_json",
    "read_tensor",
    "write_tensor",
    "read_system",
    "write_system",
    "dumps_report",
]


def tensor_to_json(T: DenseTensor) -> dict:
    flat = np.asarray(T.matrix, dtype=complex).ravel()
    return {
        "row_dims": [int(d) for d in T.row_dims],
        "col_dims": [int(d) for d in T.col_dims],
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def _int_list(obj, key):
    val = obj.get(key)
    if not isinstance(val, list) or not all(isinstance(d, int) and not isinstance(d, bool) for d in val):
        raise FormatError(f"{key!r} must be an array of integers")
    if any(d < 1 for d in val):
        raise FormatError(f"{key!r} entries must be positive")
    return val


def _number(x):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FormatError(f"non-numeric entry {x!r}")
    return float(x)


def tensor_from_json(obj: Any) -> DenseTensor:
    if not isinstance(obj, dict):
        raise FormatError("tensor must be a JSON object")
    missing = {"row_dims", "col_dims", "data"} - obj.keys()
    if missing:
        raise FormatError(f"tensor is missing keys {sorted(missing)}")
    rows, cols = _int_list(obj, "row_dims"), _int_list(obj, "col_dims")
    data = obj["data"]
    if not isinstance(data, list):
        raise FormatError("'data' must be an array")
    m, n = math.prod(rows), math.prod(cols)
    if len(data) != m * n:
        raise FormatError(f"'data' has {len(data)} entries, expected {m * n}")
    flat = np.empty(m * n, dtype=complex)
    for k, pair in enumerate(data):
        if not isinstance(pair, list) or len(pair) != 2:
            raise FormatError(f"data[{k}] is not a [re, im] pair")
        flat.real[k], flat.imag[k] = _number(pair[0]), _number(pair[1])
    mat = flat.reshape(m, n)
    try:
        return DenseTensor(mat, tuple(rows), tuple(cols))
    except ShapeError as exc:
        raise FormatError(str(exc)) from exc


def system_to_json(sys) -> dict:
    return {k: tensor_to_json(getattr(sys, k)) for k in "ABCD"}


def system_from_json(obj: Any):
    from .control import MltiSystem

    if not isinstance(obj, dict) or set("ABCD") - obj.keys():
        raise FormatError("system must be an object with keys A, B, C, D")
    parts = [tensor_from_json(obj[k]) for k in "ABCD"]
    try:
        return MltiSystem(*parts)
    except ShapeError as exc:
        raise FormatError(str(exc)) from exc


def _load(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def read_tensor(path) -> DenseTensor:
    return tensor_from_json(_load(path))


def read_system(path):
    return system_from_json(_load(path))


def _dump(obj, path):
    Path(path).write_text(json.dumps(obj, separators=(",", ":")) + "\n")


def write_tensor(T: DenseTensor, path) -> None:
    _dump(tensor_to_json(T), path)


def write_system(sys, path) -> None:
    _dump(system_to_json(sys), path)


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
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


class _Float17:
    """Marker so the encoder can emit a preformatted number."""

    __slots__ = ("text",)

    def __init__(self, text):
        self.text = text


def _fmt(x: float):
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        x = 0.0
    if x == int(x) and abs(x) < 1e16:
        return _Float17(str(int(x)))
    return _Float17(format(x, ".17g"))


def _encode(obj) -> str:
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(k) + ":" + _encode(v) for k, v in obj.items()) + "}"
    if isinstance(obj, list):
        return "[" + ",".join(_encode(v) for v in obj) + "]"
    if isinstance(obj, float):
        f = _fmt(obj)
        return f.text if isinstance(f, _Float17) else json.dumps(f)
    return json.dumps(obj)


def dumps_report(obj) -> str:
    """Deterministic single-line JSON; floats carry 17 significant digits.

    NaN becomes ``null``; infinities become the strings ``"inf"``/``"-inf"``;
    negative zero prints as ``0``.
    """
    return _encode(_plain(obj))
