"""Lossless JSON checkpoints.

Floats are written with ``repr`` (shortest round-trip form), so a load
reproduces every parameter bit for bit. No timestamps are stored, which keeps
checkpoint bytes a pure function of the parameters.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .block import DenseBlock

FORMAT_VERSION = 1


def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"shape": list(obj.shape), "data": [float(v) for v in obj.reshape(-1)]}
    if isinstance(obj, DenseBlock):
        return {"__block__": _encode(obj.state())}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if set(obj) == {"shape", "data"}:
            return np.array(obj["data"], dtype=np.float64).reshape(obj["shape"])
        if set(obj) == {"__block__"}:
            return DenseBlock.from_state(_decode(obj["__block__"]))
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def dumps(kind: str, payload: dict) -> str:
    doc = {"format_version": FORMAT_VERSION, "model_kind": kind, "payload": _encode(payload)}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> tuple[str, dict]:
    doc = json.loads(text)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported checkpoint format version {version!r}")
    return doc["model_kind"], _decode(doc["payload"])


def save(path, kind: str, payload: dict) -> None:
    Path(path).write_text(dumps(kind, payload), encoding="utf-8")


def load(path) -> tuple[str, dict]:
    return loads(Path(path).read_text(encoding="utf-8"))
