"""Dense NCHW tensors with reverse-mode differentiation.

Values are float32 throughout. Operations record a graph only while grad
tracking is enabled and some input needs gradients; backward() walks the
graph once in reverse topological order.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from .errors import NumericError

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable graph recording inside the block (sampling loops, probes)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    """A float32 array plus optional gradient and autograd bookkeeping."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_needs")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float32)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None
        self._needs = requires_grad

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other) if isinstance(other, Tensor) else add_scalar(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other) if isinstance(other, Tensor) else mul_scalar(self, other)

    def __rmul__(self, other):
        return mul_scalar(self, other)

    def __neg__(self):
        return mul_scalar(self, -1.0)


def _result(data, parents, backward_fn) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p._needs for p in parents):
        out._parents = parents
        out._backward = backward_fn
        out._needs = True
    return out


def _check_same_shape(a: Tensor, b: Tensor, op: str):
    if a.data.shape != b.data.shape:
        raise ValueError(f"{op}: shape mismatch {a.data.shape} vs {b.data.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "add")
    return _result(a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "sub")
    return _result(a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "mul")
    return _result(a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data))


def add_scalar(a: Tensor, s: float) -> Tensor:
    return _result(a.data + np.float32(s), (a,), lambda g: (g,))


def mul_scalar(a: Tensor, s: float) -> Tensor:
    s = np.float32(s)
    return _result(a.data * s, (a,), lambda g: (g * s,))


def add_const(a: Tensor, arr: np.ndarray) -> Tensor:
    """Add a non-learnable array (noise map, frozen embedding) to a tensor."""
    out = a.data + np.asarray(arr, dtype=np.float32)
    if out.shape != a.data.shape:
        raise ValueError(f"add_const: addend broadcasts {a.data.shape} to {out.shape}")
    return _result(out, (a,), lambda g: (g,))


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    mask = a.data >= 0
    out = np.where(mask, a.data, np.float32(slope) * a.data)
    return _result(out, (a,), lambda g: (np.where(mask, g, np.float32(slope) * g),))


def sum_all(a: Tensor) -> Tensor:
    return _result(
        np.float32(a.data.sum()), (a,), lambda g: (np.broadcast_to(g, a.data.shape),)
    )


def mean_all(a: Tensor) -> Tensor:
    n = np.float32(a.data.size)
    return _result(
        np.float32(a.data.mean()),
        (a,),
        lambda g: (np.broadcast_to(g / n, a.data.shape),),
    )


def mse_loss(a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "mse_loss")
    diff = a.data - b.data
    n = np.float32(diff.size)

    def back(g):
        scaled = (np.float32(2.0) / n) * g * diff
        return scaled, -scaled

    return _result(np.float32(np.mean(diff * diff)), (a, b), back)


def backward(loss: Tensor):
    """Populate .grad on every requires_grad tensor reachable from loss."""
    if loss.data.size != 1:
        raise ValueError(f"backward expects a scalar loss, got shape {loss.data.shape}")
    topo = []
    visited = set()
    stack = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent._needs and id(parent) not in visited:
                stack.append((parent, False))
    grads = {id(loss): np.ones_like(loss.data)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.requires_grad:
            node.grad = g if node.grad is None else node.grad + g
        if node._backward is None:
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent._needs:
                continue
            key = id(parent)
            grads[key] = grads[key] + pg if key in grads else pg


def validate_finite(t: Tensor, context: str = "tensor"):
    """Validation pass surfacing NaN/Inf as an error state."""
    if not np.all(np.isfinite(t.data)):
        raise NumericError(f"non-finite values detected in {context}")
    return t
