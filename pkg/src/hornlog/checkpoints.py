"""Weighted interpolation over named f32 tensor checkpoints.

A checkpoint is a directory holding one little-endian IEEE-754 float32
binary file per tensor (row-major, named ``<tensor>.bin``) plus a
``manifest.json`` mapping each tensor name to ``{"shape": [...], "dtype":
"f32"}``.  Only f32 is supported; the format stays bit-exact and testable.

Averaging computes ``alpha * base + (1 - alpha) * tuned`` element-wise with
64-bit accumulation rounded back to f32, streaming tensors chunk by chunk so
peak memory stays well under twice the largest tensor regardless of
checkpoint size.  The endpoints are special-cased byte copies, so alpha=1
returns base and alpha=0 returns tuned bit-exactly.  The manifest is written
only after every payload is on disk.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

MANIFEST_NAME = "manifest.json"
F32 = np.dtype("<f4")
DEFAULT_CHUNK_ELEMS = 1 << 22  # 16 MiB of f32 per stream buffer


class CheckpointError(Exception):
    pass


def _payload_name(name: str) -> str:
    if not name or name.startswith(".") or "/" in name or "\\" in name:
        raise CheckpointError(f"tensor name is not a valid file stem: {name!r}")
    return f"{name}.bin"


@dataclass(frozen=True)
class TensorSpec:
    shape: tuple[int, ...]
    dtype: str = "f32"

    @property
    def elements(self) -> int:
        n = 1
        for d in self.shape:
            n *= d
        return n

    @property
    def nbytes(self) -> int:
        return self.elements * 4


class Checkpoint:
    """A directory-backed named tensor map."""

    def __init__(self, path: str | Path, manifest: dict[str, TensorSpec]) -> None:
        self.path = Path(path)
        self.manifest = manifest

    @classmethod
    def load(cls, path: str | Path) -> "Checkpoint":
        path = Path(path)
        manifest_path = path / MANIFEST_NAME
        if not manifest_path.is_file():
            raise CheckpointError(f"no {MANIFEST_NAME} in {path}")
        raw = json.loads(manifest_path.read_text(encoding="utf-8"))
        manifest: dict[str, TensorSpec] = {}
        for name, spec in raw.items():
            dtype = spec.get("dtype", "f32")
            if dtype != "f32":
                raise CheckpointError(
                    f"tensor {name!r} has unsupported dtype {dtype!r}; only f32 is supported"
                )
            manifest[name] = TensorSpec(tuple(int(d) for d in spec["shape"]))
        checkpoint = cls(path, manifest)
        for name, spec in manifest.items():
            payload = checkpoint.payload_path(name)
            if not payload.is_file():
                raise CheckpointError(f"missing payload for tensor {name!r}: {payload}")
            actual = payload.stat().st_size
            if actual != spec.nbytes:
                raise CheckpointError(
                    f"tensor {name!r}: payload is {actual} bytes, "
                    f"manifest shape needs {spec.nbytes}"
                )
        return checkpoint

    @classmethod
    def save(cls, path: str | Path, tensors: Mapping[str, np.ndarray]) -> "Checkpoint":
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        manifest: dict[str, TensorSpec] = {}
        for name in sorted(tensors):
            array = np.asarray(tensors[name])
            if array.dtype != np.float32:
                raise CheckpointError(
                    f"tensor {name!r} must be float32, got {array.dtype}"
                )
            data = np.ascontiguousarray(array, dtype=F32)
            (path / _payload_name(name)).write_bytes(data.tobytes())
            manifest[name] = TensorSpec(tuple(array.shape))
        _write_manifest(path, manifest)
        return cls(path, manifest)

    def payload_path(self, name: str) -> Path:
        return self.path / _payload_name(name)

    def tensor(self, name: str) -> np.ndarray:
        spec = self.manifest[name]
        data = np.fromfile(self.payload_path(name), dtype=F32)
        return data.reshape(spec.shape)

    def names(self) -> list[str]:
        return sorted(self.manifest)


def _write_manifest(path: Path, manifest: dict[str, TensorSpec]) -> None:
    payload = {
        name: {"shape": list(spec.shape), "dtype": spec.dtype}
        for name, spec in sorted(manifest.items())
    }
    with open(path / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _iter_chunks(path: Path, elements: int, chunk_elems: int) -> Iterator[np.ndarray]:
    with open(path, "rb") as fh:
        remaining = elements
        while remaining > 0:
            take = min(remaining, chunk_elems)
            buf = fh.read(take * 4)
            if len(buf) != take * 4:
                raise CheckpointError(f"short read from {path}")
            yield np.frombuffer(buf, dtype=F32)
            remaining -= take


def _copy_payloads(src: Checkpoint, out_dir: Path) -> None:
    for name in src.manifest:
        with open(src.payload_path(name), "rb") as rfh, \
                open(out_dir / _payload_name(name), "wb") as wfh:
            shutil.copyfileobj(rfh, wfh, length=1 << 24)


def average_checkpoints(base: Checkpoint, tuned: Checkpoint, out_dir: str | Path,
                        alpha: float = 0.5,
                        chunk_elems: int = DEFAULT_CHUNK_ELEMS) -> Checkpoint:
    """Write ``alpha * base + (1 - alpha) * tuned`` as a new checkpoint.

    The default alpha of 0.5 gives the balanced midpoint.  Both inputs must
    agree on tensor names and shapes.
    """
    if not (0.0 <= alpha <= 1.0):
        raise CheckpointError(f"alpha must lie in [0, 1], got {alpha}")
    base_names = set(base.manifest)
    tuned_names = set(tuned.manifest)
    if base_names != tuned_names:
        missing = sorted(base_names ^ tuned_names)
        raise CheckpointError(f"tensor name sets differ; symmetric difference: {missing}")
    for name in sorted(base_names):
        if base.manifest[name].shape != tuned.manifest[name].shape:
            raise CheckpointError(
                f"tensor {name!r}: shape {base.manifest[name].shape} != "
                f"{tuned.manifest[name].shape}"
            )
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if alpha == 1.0:
        _copy_payloads(base, out_dir)
    elif alpha == 0.0:
        _copy_payloads(tuned, out_dir)
    else:
        for name in sorted(base_names):
            spec = base.manifest[name]
            out_path = out_dir / _payload_name(name)
            with open(out_path, "wb") as out_fh:
                chunks = zip(
                    _iter_chunks(base.payload_path(name), spec.elements, chunk_elems),
                    _iter_chunks(tuned.payload_path(name), spec.elements, chunk_elems),
                )
                for base_chunk, tuned_chunk in chunks:
                    mixed = (
                        base_chunk.astype(np.float64) * alpha
                        + tuned_chunk.astype(np.float64) * (1.0 - alpha)
                    )
                    out_fh.write(mixed.astype(F32).tobytes())
    manifest = dict(base.manifest)
    _write_manifest(out_dir, manifest)
    return Checkpoint(out_dir, manifest)
