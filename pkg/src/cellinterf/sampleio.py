"""SampleSet files.

Two layouts, chosen by extension:

``.json``
    one object ``{"kind", "seed", "meta", "values"}``; floats are written with
    ``repr`` precision so they round-trip exactly.
``.bin``
    raw little-endian float64 values, plus ``<name>.bin.meta.json`` holding
    ``{"kind", "seed", "meta", "n", "dtype"}``.

Complex-valued sets (covariance draws) are only supported in JSON, as
``[re, im]`` pairs. Output is deterministic: same SampleSet, same bytes.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .stochastic_net import SampleSet

_BIN_DTYPE = "<f8"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def _envelope(s: SampleSet) -> dict:
    return {"kind": s.kind, "seed": s.seed, "meta": _jsonable(s.meta)}


def save_samples(s: SampleSet, path) -> Path:
    path = Path(path)
    values = np.asarray(s.values)
    if path.suffix == ".bin":
        if np.iscomplexobj(values):
            raise ValueError("complex samples need the .json format")
        path.write_bytes(np.ascontiguousarray(values, dtype=_BIN_DTYPE).tobytes())
        side = dict(_envelope(s), n=int(values.size), dtype=_BIN_DTYPE, shape=list(values.shape))
        meta_path(path).write_text(dumps_json(side))
        return path
    if path.suffix != ".json":
        raise ValueError(f"unsupported sample file extension {path.suffix!r}; use .json or .bin")
    if np.iscomplexobj(values):
        flat = np.stack([values.real, values.imag], axis=-1).tolist()
    else:
        flat = values.astype(float).tolist()
    body = dict(_envelope(s), values=flat, complex=bool(np.iscomplexobj(values)))
    # json emits floats with repr(), which round-trips float64 exactly
    path.write_text(json.dumps(body, sort_keys=True, separators=(",", ":")) + "\n")
    return path


def load_samples(path) -> SampleSet:
    path = Path(path)
    if path.suffix == ".bin":
        side = json.loads(meta_path(path).read_text())
        values = np.frombuffer(path.read_bytes(), dtype=side.get("dtype", _BIN_DTYPE)).astype(float)
        if values.size != side["n"]:
            raise ValueError(f"{path}: expected {side['n']} values, found {values.size}")
        values = values.reshape(side.get("shape", [side["n"]]))
        return SampleSet(values, side["kind"], side.get("seed"), side.get("meta", {}))
    if path.suffix != ".json":
        raise ValueError(f"unsupported sample file extension {path.suffix!r}; use .json or .bin")
    body = json.loads(path.read_text())
    values = np.asarray(body["values"], dtype=float)
    if body.get("complex"):
        values = values[..., 0] + 1j * values[..., 1]
    return SampleSet(values, body["kind"], body.get("seed"), body.get("meta", {}))
