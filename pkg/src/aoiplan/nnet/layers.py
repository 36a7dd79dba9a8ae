"""Dense and recurrent layers over the kernel backend, plus checkpoints.

Models hold their parameters as plain float64 arrays and know how to
flatten them, so optimizers and checkpoints work on a single vector.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from ..errors import CheckpointError, NonFiniteGradientError

ACTIVATIONS = {"identity": 0, "relu": 1, "sigmoid": 2, "tanh": 3}


def _kernels():
    from . import kernels

    return kernels


def glorot_uniform(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, (fan_out, fan_in))


@dataclass
class DenseNet:
    """Fully connected stack; activations are named per layer."""

    sizes: tuple[int, ...]
    activations: tuple[str, ...]
    ws: list[np.ndarray]
    bs: list[np.ndarray]

    @classmethod
    def init(
        cls,
        sizes: tuple[int, ...] | list[int],
        activations: tuple[str, ...] | list[str],
        rng: np.random.Generator,
    ) -> "DenseNet":
        sizes = tuple(int(s) for s in sizes)
        activations = tuple(activations)
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if len(activations) != len(sizes) - 1:
            raise ValueError("need one activation per layer")
        for name in activations:
            if name not in ACTIVATIONS:
                raise ValueError(f"unknown activation {name!r}")
        ws = [
            glorot_uniform(rng, sizes[i + 1], sizes[i])
            for i in range(len(sizes) - 1)
        ]
        bs = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
        return cls(sizes=sizes, activations=activations, ws=ws, bs=bs)

    @property
    def kinds(self) -> list[int]:
        return [ACTIVATIONS[name] for name in self.activations]

    def forward(self, x: np.ndarray) -> np.ndarray:
        single = x.ndim == 1
        batch = x[None, :] if single else x
        y, _ = _kernels().dense_forward(batch, self.ws, self.bs, self.kinds)
        return y[0] if single else y

    def forward_cached(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        return _kernels().dense_forward(x, self.ws, self.bs, self.kinds)

    def backward(
        self, acts: list[np.ndarray], dy: np.ndarray
    ) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
        return _kernels().dense_backward(self.ws, self.kinds, acts, dy)

    def params_flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.ws, self.bs):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def set_flat(self, flat: np.ndarray) -> None:
        offset = 0
        for i, (w, b) in enumerate(zip(self.ws, self.bs)):
            self.ws[i] = flat[offset : offset + w.size].reshape(w.shape).copy()
            offset += w.size
            self.bs[i] = flat[offset : offset + b.size].copy()
            offset += b.size
        if offset != flat.size:
            raise ValueError("flat parameter vector has the wrong length")

    def grads_flat(self, dws: list[np.ndarray], dbs: list[np.ndarray]) -> np.ndarray:
        parts = []
        for dw, db in zip(dws, dbs):
            parts.append(dw.ravel())
            parts.append(db.ravel())
        return np.concatenate(parts)

    def clone(self) -> "DenseNet":
        return DenseNet(
            sizes=self.sizes,
            activations=self.activations,
            ws=[w.copy() for w in self.ws],
            bs=[b.copy() for b in self.bs],
        )

    def to_arrays(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for i, (w, b) in enumerate(zip(self.ws, self.bs)):
            out.append((f"w{i}", w))
            out.append((f"b{i}", b))
        return out


@dataclass
class LstmCell:
    """Single recurrent cell with forget, input, candidate, and output gates.

    The cell state and hidden state share one size; the four gate blocks
    are stacked in wg over the concatenated (hidden, input) vector.
    """

    input_size: int
    hidden_size: int
    wg: np.ndarray
    bg: np.ndarray

    @classmethod
    def init(cls, input_size: int, hidden_size: int, rng: np.random.Generator) -> "LstmCell":
        k = int(hidden_size)
        d = int(input_size)
        wg = glorot_uniform(rng, 4 * k, k + d)
        bg = np.zeros(4 * k)
        return cls(input_size=d, hidden_size=k, wg=wg, bg=bg)

    def seq_forward(
        self,
        xs: np.ndarray,
        h0: np.ndarray | None = None,
        c0: np.ndarray | None = None,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if h0 is None:
            h0 = np.zeros(self.hidden_size)
        if c0 is None:
            c0 = np.zeros(self.hidden_size)
        return _kernels().lstm_seq_forward(self.wg, self.bg, xs, h0, c0)

    def seq_backward(
        self,
        xs: np.ndarray,
        hs: np.ndarray,
        cs: np.ndarray,
        gates: np.ndarray,
        dhs: np.ndarray | None,
        dh_last: np.ndarray,
        dc_last: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return _kernels().lstm_seq_backward(
            self.wg, xs, hs, cs, gates, dhs, dh_last, dc_last
        )

    def step(
        self, x: np.ndarray, h: np.ndarray, c: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        hs, cs, _ = _kernels().lstm_seq_forward(
            self.wg, self.bg, x[None, :], h, c
        )
        return hs[1], cs[1]

    def params_flat(self) -> np.ndarray:
        return np.concatenate([self.wg.ravel(), self.bg.ravel()])

    def set_flat(self, flat: np.ndarray) -> None:
        if flat.size != self.wg.size + self.bg.size:
            raise ValueError("flat parameter vector has the wrong length")
        self.wg = flat[: self.wg.size].reshape(self.wg.shape).copy()
        self.bg = flat[self.wg.size :].copy()

    def clone(self) -> "LstmCell":
        return LstmCell(
            input_size=self.input_size,
            hidden_size=self.hidden_size,
            wg=self.wg.copy(),
            bg=self.bg.copy(),
        )

    def to_arrays(self) -> list[tuple[str, np.ndarray]]:
        return [("wg", self.wg), ("bg", self.bg)]


class SgdOptimizer:
    """Plain gradient descent with optional momentum."""

    def __init__(self, lr: float, momentum: float = 0.0):
        self.lr = lr
        self.momentum = momentum
        self._velocity: np.ndarray | None = None

    def step(self, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(grads)):
            raise NonFiniteGradientError("gradient contains non-finite entries")
        if self.momentum > 0.0:
            if self._velocity is None:
                self._velocity = np.zeros_like(params)
            self._velocity = self.momentum * self._velocity - self.lr * grads
            return params + self._velocity
        return params - self.lr * grads


class AdamOptimizer:
    """Adaptive moment estimation."""

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._m: np.ndarray | None = None
        self._v: np.ndarray | None = None
        self._t = 0

    def step(self, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(grads)):
            raise NonFiniteGradientError("gradient contains non-finite entries")
        if self._m is None:
            self._m = np.zeros_like(params)
            self._v = np.zeros_like(params)
        self._t += 1
        self._m = self.beta1 * self._m + (1 - self.beta1) * grads
        self._v = self.beta2 * self._v + (1 - self.beta2) * grads * grads
        m_hat = self._m / (1 - self.beta1**self._t)
        v_hat = self._v / (1 - self.beta2**self._t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(name: str, lr: float, momentum: float = 0.0):
    if name == "sgd":
        return SgdOptimizer(lr, momentum)
    if name == "adam":
        return AdamOptimizer(lr)
    raise ValueError(f"unknown optimizer {name!r}")


def gradient_check(
    loss_fn: Callable[[np.ndarray], float],
    grad_fn: Callable[[np.ndarray], np.ndarray],
    params: np.ndarray,
    rng: np.random.Generator,
    num_probes: int = 12,
    eps: float = 1e-6,
) -> float:
    """Compare analytic directional derivatives against central differences.

    Returns the worst relative disagreement across random unit directions.
    """
    grad = grad_fn(params)
    worst = 0.0
    for _ in range(num_probes):
        direction = rng.standard_normal(params.size)
        direction /= np.linalg.norm(direction)
        analytic = float(grad @ direction)
        plus = loss_fn(params + eps * direction)
        minus = loss_fn(params - eps * direction)
        numeric = (plus - minus) / (2 * eps)
        scale = max(1.0, abs(analytic), abs(numeric))
        worst = max(worst, abs(analytic - numeric) / scale)
    return worst


# ---------------------------------------------------------------------------
# Checkpoints: versioned shape manifest + flat little-endian float64 payload
# ---------------------------------------------------------------------------

_MAGIC = b"AOIPNET1"
_CHECKPOINT_VERSION = 1


def save_checkpoint(
    path: str | Path,
    kind: str,
    arrays: list[tuple[str, np.ndarray]],
    meta: dict[str, Any] | None = None,
) -> None:
    """Write named parameter arrays with an integrity footer."""
    header = {
        "version": _CHECKPOINT_VERSION,
        "kind": kind,
        "arrays": [
            {"name": name, "shape": list(arr.shape)} for name, arr in arrays
        ],
        "meta": meta or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(
        np.ascontiguousarray(arr, dtype="<f8").tobytes() for _, arr in arrays
    )
    body = _MAGIC + struct.pack("<I", len(header_bytes)) + header_bytes + payload
    crc = zlib.crc32(body) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<I", crc))


def load_checkpoint(path: str | Path) -> tuple[str, dict[str, np.ndarray], dict[str, Any]]:
    """Read a checkpoint, verifying magic, version, and CRC."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(_MAGIC) + 8:
        raise CheckpointError("checkpoint file is truncated")
    body, crc_bytes = blob[:-4], blob[-4:]
    (crc_stored,) = struct.unpack("<I", crc_bytes)
    if zlib.crc32(body) & 0xFFFFFFFF != crc_stored:
        raise CheckpointError("checkpoint CRC mismatch")
    if body[: len(_MAGIC)] != _MAGIC:
        raise CheckpointError("not a checkpoint file")
    offset = len(_MAGIC)
    (header_len,) = struct.unpack("<I", body[offset : offset + 4])
    offset += 4
    try:
        header = json.loads(body[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from exc
    offset += header_len
    if header.get("version") != _CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header.get('version')}")
    arrays: dict[str, np.ndarray] = {}
    for spec in header["arrays"]:
        shape = tuple(int(v) for v in spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        chunk = body[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError("checkpoint payload is truncated")
        arrays[spec["name"]] = np.frombuffer(chunk, dtype="<f8").reshape(shape).copy()
        offset += nbytes
    if offset != len(body):
        raise CheckpointError("checkpoint payload has trailing bytes")
    return header["kind"], arrays, header.get("meta", {})
