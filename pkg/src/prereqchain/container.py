"""Versioned checkpoint container: JSON metadata plus named numpy arrays.

Everything is stored in a single .npz with the metadata serialized as a
uint8 array, so loading never needs pickle and round-trips are lossless.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
_META_KEY = "__meta__"


def save_checkpoint(path: str | Path, kind: str, meta: dict,
                    arrays: dict[str, np.ndarray]) -> None:
    if _META_KEY in arrays:
        raise ValueError(f"array name {_META_KEY} is reserved")
    envelope = {"format_version": FORMAT_VERSION, "kind": kind, "meta": meta}
    blob = np.frombuffer(json.dumps(envelope, sort_keys=True).encode("utf-8"),
                         dtype=np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(path, **{_META_KEY: blob}, **arrays)


def load_checkpoint(path: str | Path, kind: str) -> tuple[dict, dict[str, np.ndarray]]:
    with np.load(Path(path), allow_pickle=False) as data:
        if _META_KEY not in data:
            raise ValueError(f"{path}: not a checkpoint (missing metadata)")
        envelope = json.loads(bytes(data[_META_KEY]).decode("utf-8"))
        arrays = {k: data[k] for k in data.files if k != _META_KEY}
    version = envelope.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    if envelope.get("kind") != kind:
        raise ValueError(f"{path}: checkpoint holds {envelope.get('kind')!r}, "
                         f"expected {kind!r}")
    return envelope["meta"], arrays
