"""Shared parameter store, RMSProp updates, and the checkpoint format.

The store is the synchronisation point for asynchronous training: readers
take consistent copies, writers apply one atomic clip-accumulate-step under
the lock.  Checkpoints hold the parameter payload as little-endian float32
records after a magic string, the domain fingerprint, and a JSON
hyperparameter block:

    "SYMNET1" | u8 version | u16 n + fingerprint | u32 n + json | u32 count
    then per record: u16 n + name | u8 rank | rank * u32 dims | f32 payload
"""

from __future__ import annotations

import json
import struct
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

MAGIC = b"SYMNET1"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


class NonFiniteGradError(Exception):
    """Raised when a gradient update contains NaN or infinity."""


@dataclass
class OptimConfig:
    learning_rate: float = 1e-3
    rho: float = 0.99
    epsilon: float = 1e-8
    grad_clip: float = 40.0

    def __post_init__(self) -> None:
        for name in ("learning_rate", "rho", "epsilon", "grad_clip"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return {"learning_rate": self.learning_rate, "rho": self.rho,
                "epsilon": self.epsilon, "grad_clip": self.grad_clip}


class ParamStore:
    """Named parameter tensors plus per-tensor RMSProp accumulators.

    The name set and shapes are fixed at construction and never depend on
    instance size.
    """

    def __init__(self, arrays: dict[str, np.ndarray]):
        self._arrays = {name: np.asarray(a, dtype=np.float32)
                        for name, a in arrays.items()}
        self._rms = {name: np.zeros_like(a) for name, a in self._arrays.items()}
        self._lock = threading.Lock()

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._arrays))

    def shape_of(self, name: str) -> tuple[int, ...]:
        return self._arrays[name].shape

    def payload_nbytes(self) -> int:
        return sum(a.nbytes for a in self._arrays.values())

    def snapshot(self) -> dict[str, np.ndarray]:
        """Consistent copy of every tensor (safe across concurrent updates)."""
        with self._lock:
            return {name: a.copy() for name, a in self._arrays.items()}

    def apply_gradients(self, grads: dict[str, np.ndarray],
                        config: OptimConfig) -> float:
        """One atomic RMSProp step; returns the pre-clip global norm.

        Rejects the whole step with :class:`NonFiniteGradError` if any
        gradient entry is NaN/inf, leaving parameters untouched.
        """
        for name, grad in grads.items():
            if grad is not None and not np.isfinite(grad).all():
                raise NonFiniteGradError(f"non-finite gradient for {name!r}")
        with self._lock:
            total = 0.0
            for name in self._arrays:
                grad = grads.get(name)
                if grad is not None:
                    total += float((grad.astype(np.float64) ** 2).sum())
            norm = float(np.sqrt(total))
            factor = 1.0
            if norm > config.grad_clip:
                factor = config.grad_clip / norm
            for name, array in self._arrays.items():
                grad = grads.get(name)
                if grad is None:
                    continue
                g = grad.astype(np.float32) * np.float32(factor)
                s = self._rms[name]
                s *= np.float32(config.rho)
                s += np.float32(1.0 - config.rho) * g * g
                array -= (np.float32(config.learning_rate) * g
                          / (np.sqrt(s) + np.float32(config.epsilon)))
        return norm


def rmsprop_step(store: ParamStore, grads: dict[str, np.ndarray],
                 config: OptimConfig) -> float:
    """Clip gradients to the configured global norm, then update the store."""
    return store.apply_gradients(grads, config)


# ---------------------------------------------------------------------------
# checkpoint I/O
# ---------------------------------------------------------------------------

def save_checkpoint(path: Union[str, Path], store: ParamStore,
                    fingerprint: str, hyperparams: dict) -> None:
    arrays = store.snapshot()
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<B", FORMAT_VERSION)
    fp = fingerprint.encode("utf-8")
    blob += struct.pack("<H", len(fp)) + fp
    hp = json.dumps(hyperparams, sort_keys=True).encode("utf-8")
    blob += struct.pack("<I", len(hp)) + hp
    blob += struct.pack("<I", len(arrays))
    for name in sorted(arrays):
        data = np.ascontiguousarray(arrays[name], dtype="<f4")
        encoded = name.encode("utf-8")
        blob += struct.pack("<H", len(encoded)) + encoded
        blob += struct.pack("<B", data.ndim)
        blob += struct.pack(f"<{data.ndim}I", *data.shape)
        blob += data.tobytes()
    Path(path).write_bytes(bytes(blob))


def load_checkpoint(path: Union[str, Path],
                    ) -> tuple[dict[str, np.ndarray], str, dict]:
    raw = Path(path).read_bytes()
    view = memoryview(raw)
    offset = 0

    def take(n: int) -> memoryview:
        nonlocal offset
        if offset + n > len(raw):
            raise CheckpointError("truncated checkpoint")
        chunk = view[offset:offset + n]
        offset += n
        return chunk

    if bytes(take(len(MAGIC))) != MAGIC:
        raise CheckpointError("bad magic; not a checkpoint file")
    (version,) = struct.unpack("<B", take(1))
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (fp_len,) = struct.unpack("<H", take(2))
    fingerprint = bytes(take(fp_len)).decode("utf-8")
    (hp_len,) = struct.unpack("<I", take(4))
    hyperparams = json.loads(bytes(take(hp_len)).decode("utf-8"))
    (count,) = struct.unpack("<I", take(4))
    arrays: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = bytes(take(name_len)).decode("utf-8")
        (rank,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{rank}I", take(4 * rank)) if rank else ()
        size = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(take(4 * size), dtype="<f4").reshape(shape)
        arrays[name] = np.array(data, dtype=np.float32)
    if offset != len(raw):
        raise CheckpointError("trailing bytes after last record")
    return arrays, fingerprint, hyperparams
