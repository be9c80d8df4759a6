"""Reverse-mode automatic differentiation over dense numpy arrays.

Define-by-run: every operation on tensors that require gradients records a
node (parent references plus a backward rule), and ``backward`` replays the
recording in reverse.  The graph is rebuilt on every forward pass, which is
what variable-length RNN unrolling needs.  Storage is row-major and dense;
broadcasting is limited to bias-vector addition, anything else goes through
an explicit ``expand``.
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from ..errors import (
    DoubleBackward,
    InvalidProbability,
    NonScalarLoss,
    OutOfVocabulary,
    ShapeMismatch,
)
from .. import kernels

_uid_counter = itertools.count()
_grad_enabled = True


class no_grad:
    """Context manager that disables graph recording (inference mode)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


class Tensor:
    """An n-dimensional array participating in the differentiation tape."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn",
                 "_uid", "_backward_ran")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        self.data = np.asarray(data, dtype=dtype)
        if self.data.dtype not in (np.float32, np.float64):
            self.data = self.data.astype(np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward_fn: Callable[[np.ndarray], None] | None = None
        self._uid = next(_uid_counter)
        self._backward_ran = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def zero_grad(self) -> None:
        self.grad = None

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, float(other))
        return multiply(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return slice_axis0(self, idx)


class Parameter(Tensor):
    """A named, trainable leaf tensor."""

    __slots__ = ("name",)

    def __init__(self, name: str, data, dtype=None):
        super().__init__(data, requires_grad=True, dtype=dtype)
        self.name = name

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.data.shape})"


def _node(data: np.ndarray, parents: Sequence[Tensor],
          backward_fn: Callable[[np.ndarray], None]) -> Tensor:
    """Wrap an op result, recording the node if gradients are live."""
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward_fn = backward_fn
    return out


def backward(loss: Tensor) -> None:
    """Populate gradients of everything reachable from a scalar loss."""
    if loss.data.size != 1:
        raise NonScalarLoss(f"loss must be scalar, got shape {loss.shape}")
    if loss._backward_ran:
        raise DoubleBackward("backward already ran on this graph; rebuild the forward")
    loss._backward_ran = True
    if not loss.requires_grad:
        return
    # reverse recording order; parents always carry smaller uids
    nodes: list[Tensor] = []
    seen = set()
    stack = [loss]
    while stack:
        t = stack.pop()
        if id(t) in seen or not t.requires_grad:
            continue
        seen.add(id(t))
        nodes.append(t)
        stack.extend(t._parents)
    nodes.sort(key=lambda t: t._uid, reverse=True)
    loss._accumulate(np.ones_like(loss.data))
    for t in nodes:
        if t._backward_fn is not None and t.grad is not None:
            t._backward_fn(t.grad)


def _check_same_dtype(a: Tensor, b: Tensor) -> None:
    if a.dtype != b.dtype:
        raise ShapeMismatch(f"dtype mismatch: {a.dtype} vs {b.dtype}")


# ---------------------------------------------------------------------------
# forward ops
# ---------------------------------------------------------------------------

def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; also accepts a trailing-axis bias vector for b."""
    _check_same_dtype(a, b)
    if a.shape == b.shape:
        def bw(g):
            if a.requires_grad:
                a._accumulate(g)
            if b.requires_grad:
                b._accumulate(g)
        return _node(a.data + b.data, (a, b), bw)
    if b.data.ndim == 1 and a.data.ndim >= 1 and a.shape[-1] == b.shape[0]:
        def bw(g):
            if a.requires_grad:
                a._accumulate(g)
            if b.requires_grad:
                b._accumulate(g.reshape(-1, g.shape[-1]).sum(axis=0))
        return _node(a.data + b.data, (a, b), bw)
    raise ShapeMismatch(f"add: {a.shape} vs {b.shape}")


def multiply(a: Tensor, b: Tensor) -> Tensor:
    _check_same_dtype(a, b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"multiply: {a.shape} vs {b.shape}")

    def bw(g):
        if a.requires_grad:
            a._accumulate(g * b.data)
        if b.requires_grad:
            b._accumulate(g * a.data)
    return _node(a.data * b.data, (a, b), bw)


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)

    def bw(g):
        if a.requires_grad:
            a._accumulate(g * c)
    return _node(a.data * c, (a,), bw)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """2-D x 2-D, or batched 3-D x 3-D with equal leading dimension."""
    _check_same_dtype(a, b)
    ok = (a.data.ndim == b.data.ndim and a.data.ndim in (2, 3)
          and a.shape[-1] == b.shape[-2]
          and (a.data.ndim == 2 or a.shape[0] == b.shape[0]))
    if not ok:
        raise ShapeMismatch(f"matmul: {a.shape} @ {b.shape}")

    def bw(g):
        if a.data.ndim == 2:
            if a.requires_grad:
                a._accumulate(g @ b.data.T)
            if b.requires_grad:
                b._accumulate(a.data.T @ g)
        else:
            if a.requires_grad:
                a._accumulate(g @ b.data.swapaxes(1, 2))
            if b.requires_grad:
                b._accumulate(a.data.swapaxes(1, 2) @ g)
    return _node(a.data @ b.data, (a, b), bw)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise ShapeMismatch("concat of zero tensors")
    sizes = [t.shape[axis] for t in tensors]
    split_points = np.cumsum(sizes)[:-1]

    def bw(g):
        pieces = np.split(g, split_points, axis=axis)
        for t, piece in zip(tensors, pieces):
            if t.requires_grad:
                t._accumulate(piece)
    return _node(np.concatenate([t.data for t in tensors], axis=axis),
                 tuple(tensors), bw)


def slice_axis0(a: Tensor, idx) -> Tensor:
    """Integer or slice indexing along the first axis."""
    if not isinstance(idx, (int, slice)):
        raise ShapeMismatch("only int/slice indexing on axis 0 is supported")

    def bw(g):
        if a.requires_grad:
            full = np.zeros_like(a.data)
            full[idx] = g
            a._accumulate(full)
    return _node(a.data[idx].copy(), (a,), bw)


def transpose(a: Tensor, ax0: int, ax1: int) -> Tensor:
    def bw(g):
        if a.requires_grad:
            a._accumulate(g.swapaxes(ax0, ax1))
    return _node(a.data.swapaxes(ax0, ax1).copy(), (a,), bw)


def reshape(a: Tensor, shape) -> Tensor:
    def bw(g):
        if a.requires_grad:
            a._accumulate(g.reshape(a.data.shape))
    return _node(a.data.reshape(shape).copy(), (a,), bw)


def expand(a: Tensor, shape) -> Tensor:
    """Broadcast to ``shape``; gradient sums over the broadcast axes."""
    shape = tuple(shape)
    out = np.broadcast_to(a.data, shape).copy()
    lead = len(shape) - a.data.ndim

    def bw(g):
        if not a.requires_grad:
            return
        if lead:
            g = g.sum(axis=tuple(range(lead)))
        axes = tuple(i for i, n in enumerate(a.data.shape) if n == 1 and g.shape[i] != 1)
        if axes:
            g = g.sum(axis=axes, keepdims=True)
        a._accumulate(g)
    return _node(out, (a,), bw)


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.data)

    def bw(g):
        if a.requires_grad:
            a._accumulate(g * (1.0 - out * out))
    return _node(out, (a,), bw)


def sigmoid(a: Tensor) -> Tensor:
    x = a.data
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)

    def bw(g):
        if a.requires_grad:
            a._accumulate(g * out * (1.0 - out))
    return _node(out, (a,), bw)


def relu(a: Tensor) -> Tensor:
    out = np.maximum(a.data, 0.0)

    def bw(g):
        if a.requires_grad:
            a._accumulate(g * (a.data > 0))
    return _node(out, (a,), bw)


def _softmax_data(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax(a: Tensor) -> Tensor:
    """Softmax over the last axis."""
    out = _softmax_data(a.data)

    def bw(g):
        if a.requires_grad:
            dot = (g * out).sum(axis=-1, keepdims=True)
            a._accumulate(out * (g - dot))
    return _node(out, (a,), bw)


def log_softmax(a: Tensor) -> Tensor:
    x = a.data
    shifted = x - x.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    out = shifted - lse

    def bw(g):
        if a.requires_grad:
            sm = np.exp(out)
            a._accumulate(g - sm * g.sum(axis=-1, keepdims=True))
    return _node(out, (a,), bw)


def embedding_lookup(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row lookup: ids of any shape, output shape ids.shape + (dim,)."""
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        raise OutOfVocabulary(
            f"ids outside [0, {table.shape[0]}): min={ids.min()}, max={ids.max()}"
        )

    def bw(g):
        if table.requires_grad:
            dt = np.zeros_like(table.data)
            np.add.at(dt, ids.ravel(), g.reshape(-1, table.shape[1]))
            table._accumulate(dt)
    return _node(table.data[ids], (table,), bw)


def dropout(a: Tensor, p: float, rng: np.random.Generator,
            training: bool) -> Tensor:
    """Inverted dropout: zero with probability p, scale survivors by 1/(1-p)."""
    if not 0.0 <= p < 1.0:
        raise InvalidProbability(f"dropout p must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return a
    keep = (rng.random(a.shape) >= p).astype(a.data.dtype) / (1.0 - p)

    def bw(g):
        if a.requires_grad:
            a._accumulate(g * keep)
    return _node(a.data * keep, (a,), bw)


def layer_norm(a: Tensor, gain: Tensor, bias: Tensor,
               eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then affine."""
    if gain.shape != (a.shape[-1],) or bias.shape != (a.shape[-1],):
        raise ShapeMismatch("layer_norm gain/bias must match the last axis")
    n = a.shape[-1]
    mu = a.data.mean(axis=-1, keepdims=True)
    var = a.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (a.data - mu) * inv
    out = xhat * gain.data + bias.data

    def bw(g):
        if gain.requires_grad:
            gain._accumulate((g * xhat).reshape(-1, n).sum(axis=0))
        if bias.requires_grad:
            bias._accumulate(g.reshape(-1, n).sum(axis=0))
        if a.requires_grad:
            dxhat = g * gain.data
            term = (n * dxhat
                    - dxhat.sum(axis=-1, keepdims=True)
                    - xhat * (dxhat * xhat).sum(axis=-1, keepdims=True))
            a._accumulate(inv / n * term)
    return _node(out, (a, gain, bias), bw)


def masked_fill(a: Tensor, mask: np.ndarray, value: float) -> Tensor:
    """Replace entries where mask is True by a constant (no grad there)."""
    mask = np.broadcast_to(np.asarray(mask, dtype=bool), a.shape)

    def bw(g):
        if a.requires_grad:
            a._accumulate(np.where(mask, 0.0, g))
    return _node(np.where(mask, a.data.dtype.type(value), a.data), (a,), bw)


def reduce_sum(a: Tensor, axis: int | None = None) -> Tensor:
    def bw(g):
        if not a.requires_grad:
            return
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.data.shape).copy())
        else:
            a._accumulate(np.broadcast_to(np.expand_dims(g, axis), a.data.shape).copy())
    return _node(a.data.sum(axis=axis), (a,), bw)


def reduce_mean(a: Tensor, axis: int | None = None) -> Tensor:
    count = a.data.size if axis is None else a.data.shape[axis]
    return scale(reduce_sum(a, axis), 1.0 / count)


def cross_entropy(logits: Tensor, targets: np.ndarray, pad_id: int) -> Tensor:
    """Mean negative log-likelihood of targets, ignoring pad positions.

    logits: (N, V); targets: (N,) integer ids.  An all-pad batch yields a
    constant 0 rather than NaN.
    """
    targets = np.asarray(targets)
    if logits.data.ndim != 2 or targets.shape != (logits.shape[0],):
        raise ShapeMismatch(
            f"cross_entropy: logits {logits.shape} vs targets {targets.shape}"
        )
    V = logits.shape[1]
    if targets.size and (targets.min() < 0 or targets.max() >= V):
        raise OutOfVocabulary(f"target id outside [0, {V})")
    valid = targets != pad_id
    count = int(valid.sum())
    if count == 0:
        return Tensor(np.asarray(0.0, dtype=logits.dtype))
    x = logits.data
    shifted = x - x.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    logp = shifted - lse
    picked = logp[np.arange(len(targets)), targets]
    loss = -picked[valid].sum() / count

    def bw(g):
        if logits.requires_grad:
            d = np.exp(logp)
            d[np.arange(len(targets)), targets] -= 1.0
            d[~valid] = 0.0
            logits._accumulate(d * (float(g) / count))
    return _node(np.asarray(loss, dtype=x.dtype), (logits,), bw)


def gru_sequence(xp: Tensor, h0: Tensor, uz: Tensor, ur: Tensor,
                 uh: Tensor) -> Tensor:
    """Fused GRU recurrence over a sequence of input preactivations.

    xp: (T, B, 3H) holding the z/r/candidate input projections; h0: (B, H);
    uz/ur/uh: (H, H) recurrent weights.  Returns all hidden states (T, B, H).
    Runs on the compiled kernel backend when available.
    """
    if xp.data.ndim != 3 or xp.shape[2] != 3 * h0.shape[1]:
        raise ShapeMismatch(f"gru_sequence: xp {xp.shape} vs h0 {h0.shape}")
    xpd = np.ascontiguousarray(xp.data)
    h0d = np.ascontiguousarray(h0.data)
    hs, zs, rs, hcs = kernels.gru_forward(xpd, h0d, uz.data, ur.data, uh.data)

    def bw(g):
        d_xp, d_h0, d_uz, d_ur, d_uh = kernels.gru_backward(
            h0d, hs, zs, rs, hcs, uz.data, ur.data, uh.data,
            np.ascontiguousarray(g))
        if xp.requires_grad:
            xp._accumulate(d_xp)
        if h0.requires_grad:
            h0._accumulate(d_h0)
        if uz.requires_grad:
            uz._accumulate(d_uz)
        if ur.requires_grad:
            ur._accumulate(d_ur)
        if uh.requires_grad:
            uh._accumulate(d_uh)
    return _node(hs, (xp, h0, uz, ur, uh), bw)
