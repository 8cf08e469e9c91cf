"""JSON and CSV interchange formats.

* coefficient sequence: ``[[re, im], ...]``
* sparse polynomial: ``{"<exponent>": [re, im], ...}``
* zero set: ``{"zeros": [{"re": ..., "im": ..., "mult": ...}, ...]}``

Floats are written with ``repr``, the shortest string that round-trips a
binary64 value, so results reload bit-for-bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import ZeroSetSpec, as_coefs
from .errors import PreconditionError


def coefs_to_json(a) -> list:
    return [[float(c.real), float(c.imag)] for c in np.asarray(a, dtype=np.complex128)]


def coefs_from_json(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise PreconditionError("a coefficient sequence must be a nonempty JSON array")
    try:
        pairs = [complex(float(re), float(im)) for re, im in obj]
    except (TypeError, ValueError) as exc:
        raise PreconditionError(f"malformed coefficient pair: {exc}") from exc
    return as_coefs(pairs)


def zeroset_to_json(W: ZeroSetSpec) -> dict:
    return {"zeros": [{"re": w.real, "im": w.imag, "mult": m} for w, m in _runs(W.points)]}


def _runs(points):
    """Group consecutive equal points, keeping prefix order."""
    out = []
    for w in points:
        if out and out[-1][0] == w:
            out[-1][1] += 1
        else:
            out.append([w, 1])
    return out


def zeroset_from_json(obj) -> ZeroSetSpec:
    if not isinstance(obj, dict) or "zeros" not in obj:
        raise PreconditionError('zero-set JSON must be an object with a "zeros" array')
    zeros = obj["zeros"]
    if not isinstance(zeros, list) or not zeros:
        raise PreconditionError("the zero set is empty")
    pairs = []
    for entry in zeros:
        try:
            w = complex(float(entry["re"]), float(entry.get("im", 0.0)))
            mult = entry.get("mult", 1)
        except (KeyError, TypeError, ValueError) as exc:
            raise PreconditionError(f"malformed zero entry {entry!r}") from exc
        if isinstance(mult, bool) or not isinstance(mult, int) or mult < 1:
            raise PreconditionError(f"multiplicity must be a positive integer, got {mult!r}")
        if w == 0:
            raise PreconditionError("zeros must be nonzero")
        pairs.append((w, mult))
    return ZeroSetSpec.from_pairs(pairs)


def load_zeroset(path) -> ZeroSetSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise PreconditionError(f"cannot read zero set from {path}: {exc}") from exc
    return zeroset_from_json(obj)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=",", lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
