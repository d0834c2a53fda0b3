"""Minimal reverse-mode differentiation over dense numpy arrays.

Ops build a tape (a topologically ordered graph of primitive applications)
as they execute; :func:`backward` replays it in reverse.  Tensors are rank
0, 1, or 2.  Training runs in float32; flip to float64 with
:func:`precision` when checking gradients against finite differences.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

_DTYPE = np.float32
_GRAD_ENABLED = True


@contextmanager
def precision(dtype: str):
    """Temporarily switch the default payload dtype ("float32"/"float64")."""
    global _DTYPE
    previous = _DTYPE
    _DTYPE = np.dtype(dtype).type
    try:
        yield
    finally:
        _DTYPE = previous


def default_dtype():
    return _DTYPE


@contextmanager
def no_grad():
    """Run ops without recording the tape (inference-only forward passes)."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data: np.ndarray, requires_grad: bool = False,
                 parents: tuple["Tensor", ...] = (),
                 backward: Optional[Callable[[np.ndarray], None]] = None):
        if data.ndim > 2:
            raise ValueError(f"rank {data.ndim} tensor not supported")
        self.data = data
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents = parents
        self._backward = backward

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"


def constant(value, dtype=None) -> Tensor:
    return Tensor(np.asarray(value, dtype=dtype or _DTYPE))


def parameter(value, dtype=None) -> Tensor:
    return Tensor(np.asarray(value, dtype=dtype or _DTYPE), requires_grad=True)


def _make(data: np.ndarray, parents: tuple[Tensor, ...],
          backward: Callable[[np.ndarray], None]) -> Tensor:
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, parents=parents, backward=backward)
    return Tensor(data)


def _accumulate(tensor: Tensor, grad: np.ndarray) -> None:
    if not tensor.requires_grad:
        return
    if tensor.grad is None:
        # copy: closures may hand the same buffer to several parents
        tensor.grad = np.array(grad, dtype=tensor.data.dtype)
    else:
        tensor.grad += grad


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the operand's shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


# ---------------------------------------------------------------------------
# primitive ops
# ---------------------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    out = a.data + b.data

    def backward(g: np.ndarray) -> None:
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(g, b.data.shape))

    return _make(out, (a, b), backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    out = a.data - b.data

    def backward(g: np.ndarray) -> None:
        _accumulate(a, _unbroadcast(g, a.data.shape))
        _accumulate(b, _unbroadcast(-g, b.data.shape))

    return _make(out, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data * b.data

    def backward(g: np.ndarray) -> None:
        _accumulate(a, _unbroadcast(g * b.data, a.data.shape))
        _accumulate(b, _unbroadcast(g * a.data, b.data.shape))

    return _make(out, (a, b), backward)


def neg(a: Tensor) -> Tensor:
    def backward(g: np.ndarray) -> None:
        _accumulate(a, -g)

    return _make(-a.data, (a,), backward)


def scale(a: Tensor, factor: float) -> Tensor:
    factor = float(factor)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * factor)

    return _make(a.data * np.asarray(factor, dtype=a.data.dtype), (a,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out = a.data @ b.data

    def backward(g: np.ndarray) -> None:
        ad, bd = a.data, b.data
        if ad.ndim == 2 and bd.ndim == 2:
            _accumulate(a, g @ bd.T)
            _accumulate(b, ad.T @ g)
        elif ad.ndim == 2 and bd.ndim == 1:
            _accumulate(a, np.outer(g, bd))
            _accumulate(b, ad.T @ g)
        elif ad.ndim == 1 and bd.ndim == 2:
            _accumulate(a, g @ bd.T)
            _accumulate(b, np.outer(ad, g))
        else:  # vector dot product
            _accumulate(a, g * bd)
            _accumulate(b, g * ad)

    return _make(out, (a, b), backward)


def leaky_relu(a: Tensor, slope: float = 0.01) -> Tensor:
    positive = a.data > 0
    out = np.where(positive, a.data, a.data * a.data.dtype.type(slope))

    def backward(g: np.ndarray) -> None:
        _accumulate(a, np.where(positive, g, g * a.data.dtype.type(slope)))

    return _make(out, (a,), backward)


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g * out)

    return _make(out, (a,), backward)


def log(a: Tensor, floor: float = 0.0) -> Tensor:
    """Natural log; a positive floor clamps the argument first (and the
    gradient is zero in the clamped region)."""
    clamped = np.maximum(a.data, floor) if floor > 0 else a.data
    out = np.log(clamped)

    def backward(g: np.ndarray) -> None:
        inner = g / clamped
        if floor > 0:
            inner = np.where(a.data >= floor, inner, 0.0)
        _accumulate(a, inner)

    return _make(out, (a,), backward)


def softmax(a: Tensor, mask: Optional[np.ndarray] = None) -> Tensor:
    """Softmax over the last axis; masked-out entries get probability 0.

    Requires at least one unmasked entry per row.
    """
    x = a.data
    if mask is not None:
        neg_inf = np.asarray(-np.inf, dtype=x.dtype)
        x = np.where(mask, x, neg_inf)
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)

    def backward(g: np.ndarray) -> None:
        dot = (g * out).sum(axis=-1, keepdims=True)
        _accumulate(a, out * (g - dot))

    return _make(out, (a,), backward)


def log_softmax(a: Tensor) -> Tensor:
    x = a.data
    shifted = x - x.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    out = shifted - lse

    def backward(g: np.ndarray) -> None:
        p = np.exp(out)
        _accumulate(a, g - p * g.sum(axis=-1, keepdims=True))

    return _make(out, (a,), backward)


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    out = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def backward(g: np.ndarray) -> None:
        for part, start, stop in zip(parts, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(start, stop)
            _accumulate(part, g[tuple(sl)])

    return _make(out, tuple(parts), backward)


def stack(rows: Sequence[Tensor]) -> Tensor:
    """Stack 1-D tensors into a matrix, one per row."""
    out = np.stack([r.data for r in rows])

    def backward(g: np.ndarray) -> None:
        for i, row in enumerate(rows):
            _accumulate(row, g[i])

    return _make(out, tuple(rows), backward)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    original = a.data.shape

    def backward(g: np.ndarray) -> None:
        _accumulate(a, g.reshape(original))

    return _make(a.data.reshape(shape), (a,), backward)


def gather_rows(a: Tensor, indices: Sequence[int]) -> Tensor:
    idx = np.asarray(indices, dtype=np.intp)
    out = a.data[idx]

    def backward(g: np.ndarray) -> None:
        if not a.requires_grad:
            return
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        _accumulate(a, full)

    return _make(out, (a,), backward)


def max_pool_rows(a: Tensor) -> Tensor:
    """Elementwise max over the rows of a matrix.

    The subgradient routes to exactly one argmax row per column, the lowest
    row index on ties.
    """
    winners = a.data.argmax(axis=0)
    out = a.data[winners, np.arange(a.data.shape[1])]

    def backward(g: np.ndarray) -> None:
        if not a.requires_grad:
            return
        full = np.zeros_like(a.data)
        full[winners, np.arange(a.data.shape[1])] = g
        _accumulate(a, full)

    return _make(out, (a,), backward)


def sum_all(a: Tensor) -> Tensor:
    out = np.asarray(a.data.sum(), dtype=a.data.dtype)

    def backward(g: np.ndarray) -> None:
        _accumulate(a, np.broadcast_to(g, a.data.shape).astype(a.data.dtype))

    return _make(out, (a,), backward)


def index_element(a: Tensor, index: int) -> Tensor:
    """Pick one element out of a 1-D tensor."""
    out = np.asarray(a.data[index], dtype=a.data.dtype)

    def backward(g: np.ndarray) -> None:
        if not a.requires_grad:
            return
        full = np.zeros_like(a.data)
        full[index] = g
        _accumulate(a, full)

    return _make(out, (a,), backward)


# ---------------------------------------------------------------------------
# reverse pass
# ---------------------------------------------------------------------------

def backward(loss: Tensor) -> None:
    """Reverse-mode sweep from a scalar loss.

    Gradients accumulate into ``.grad`` of every tensor with
    ``requires_grad``; disconnected parameters simply keep ``grad=None``.
    """
    if loss.data.shape != ():
        raise ValueError(f"loss must be scalar, got shape {loss.data.shape}")
    order: list[Tensor] = []
    seen: set[int] = set()
    stack_: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack_:
        node, expanded = stack_.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack_.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack_.append((parent, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


# ---------------------------------------------------------------------------
# finite differences (verification oracle)
# ---------------------------------------------------------------------------

def finite_difference_gradients(fn: Callable[[dict[str, np.ndarray]], float],
                                params: dict[str, np.ndarray],
                                h: float = 1e-5) -> dict[str, np.ndarray]:
    """Central-difference gradients of a scalar function of named arrays.

    Run under float64 inputs; the truncation error is O(h^2).
    """
    grads = {}
    for name, value in params.items():
        if value.dtype != np.float64:
            raise ValueError(f"finite differences need float64 arrays, "
                             f"{name!r} is {value.dtype}")
        grad = np.zeros_like(value)
        flat = value.reshape(-1)  # view: perturbations must reach fn
        flat_grad = grad.reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + h
            hi = fn(params)
            flat[i] = saved - h
            lo = fn(params)
            flat[i] = saved
            flat_grad[i] = (hi - lo) / (2.0 * h)
        grads[name] = grad
    return grads
