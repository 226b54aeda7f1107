"""Minimal reverse-mode automatic differentiation over numpy arrays.

A `Value` wraps an ndarray plus an optional gradient accumulator and the
references needed to replay the chain rule.  `backward(loss)` walks the
graph once in reverse topological order, computing local adjoints in a
scratch table and only then adding them into each node's persistent
`.grad`; calling it twice without zeroing therefore doubles every gradient
exactly.

Only the primitives the models need are provided.  Everything preserves
the dtype of its inputs: float64 for gradient checking, float32 for
training (checkpoints store float32).
"""

from __future__ import annotations

import numpy as np


class ShapeMismatch(ValueError):
    def __init__(self, op: str, *shapes):
        super().__init__(f"{op}: incompatible shapes {' and '.join(map(str, shapes))}")


class GraphError(RuntimeError):
    pass


class Value:
    __slots__ = ("data", "_grad", "op", "parents", "_backward", "requires_grad", "name")

    def __init__(self, data, requires_grad=False, op="leaf", parents=(), backward=None, name=""):
        self.data = np.asarray(data)
        self._grad = None
        self.op = op
        self.parents = tuple(parents)
        self._backward = backward
        self.requires_grad = bool(requires_grad) or any(p.requires_grad for p in self.parents)
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def grad(self) -> np.ndarray:
        if self._grad is None:
            self._grad = np.zeros_like(self.data)
        return self._grad

    def accumulate_grad(self, adjoint: np.ndarray) -> None:
        if adjoint.shape != self.data.shape:
            raise ShapeMismatch("grad-accumulate", adjoint.shape, self.data.shape)
        if self._grad is None:
            self._grad = adjoint.copy()
        else:
            self._grad += adjoint

    def zero_grad(self) -> None:
        self._grad = None

    def __repr__(self):
        return f"Value(op={self.op!r}, shape={self.shape}, requires_grad={self.requires_grad})"

    # convenience operators; scalars are promoted to constants
    def __add__(self, other):
        return add(self, _as_value(other, self.dtype))

    def __radd__(self, other):
        return add(_as_value(other, self.dtype), self)

    def __mul__(self, other):
        return mul(self, _as_value(other, self.dtype))

    def __rmul__(self, other):
        return mul(_as_value(other, self.dtype), self)

    def __sub__(self, other):
        return add(self, mul(_as_value(other, self.dtype), _as_value(-1.0, self.dtype)))

    def __neg__(self):
        return mul(self, _as_value(-1.0, self.dtype))

    def __matmul__(self, other):
        return matmul(self, other)


def param(data, name="") -> Value:
    """A trainable leaf."""
    return Value(np.asarray(data), requires_grad=True, name=name)


def const(data) -> Value:
    return Value(np.asarray(data), requires_grad=False)


def _as_value(x, dtype) -> Value:
    if isinstance(x, Value):
        return x
    return Value(np.asarray(x, dtype=dtype))


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to the operand's shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (g, s) in enumerate(zip(grad.shape, shape)) if s == 1 and g != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def add(a: Value, b: Value) -> Value:
    try:
        out_data = a.data + b.data
    except ValueError:
        raise ShapeMismatch("add", a.shape, b.shape) from None

    def bw(g):
        return ((a, _unbroadcast(g, a.shape)), (b, _unbroadcast(g, b.shape)))

    return Value(out_data, op="add", parents=(a, b), backward=bw)


def mul(a: Value, b: Value) -> Value:
    try:
        out_data = a.data * b.data
    except ValueError:
        raise ShapeMismatch("mul", a.shape, b.shape) from None

    def bw(g):
        return ((a, _unbroadcast(g * b.data, a.shape)),
                (b, _unbroadcast(g * a.data, b.shape)))

    return Value(out_data, op="mul", parents=(a, b), backward=bw)


def matmul(a: Value, b: Value) -> Value:
    """2-d by 2-d, 1-d by 2-d, or 2-d by 1-d matrix product."""
    if a.data.ndim > 2 or b.data.ndim > 2:
        raise ShapeMismatch("matmul", a.shape, b.shape)
    try:
        out_data = a.data @ b.data
    except ValueError:
        raise ShapeMismatch("matmul", a.shape, b.shape) from None

    def bw(g):
        a2 = a.data if a.data.ndim == 2 else a.data[None, :]
        b2 = b.data if b.data.ndim == 2 else b.data[:, None]
        g2 = g.reshape(a2.shape[0], b2.shape[1])
        da = (g2 @ b2.T).reshape(a.shape)
        db = (a2.T @ g2).reshape(b.shape)
        return ((a, da), (b, db))

    return Value(out_data, op="matmul", parents=(a, b), backward=bw)


def transpose(a: Value) -> Value:
    def bw(g):
        return ((a, g.T),)
    return Value(a.data.T, op="transpose", parents=(a,), backward=bw)


def concat(values: list[Value], axis: int = -1) -> Value:
    if not values:
        raise ShapeMismatch("concat", ())
    out_data = np.concatenate([v.data for v in values], axis=axis)
    sizes = [v.data.shape[axis] for v in values]
    offsets = np.cumsum([0] + sizes)

    def bw(g):
        pieces = []
        for v, start, stop in zip(values, offsets[:-1], offsets[1:]):
            idx = [slice(None)] * g.ndim
            idx[axis] = slice(start, stop)
            pieces.append((v, np.ascontiguousarray(g[tuple(idx)])))
        return tuple(pieces)

    return Value(out_data, op="concat", parents=tuple(values), backward=bw)


def reshape(a: Value, shape) -> Value:
    def bw(g):
        return ((a, g.reshape(a.shape)),)
    return Value(a.data.reshape(shape), op="reshape", parents=(a,), backward=bw)


def rows(a: Value, index) -> Value:
    """Select rows (first-axis slices) of a matrix, keeping gradients."""
    index = np.asarray(index)
    out_data = a.data[index]

    def bw(g):
        da = np.zeros_like(a.data)
        np.add.at(da, index, g)
        return ((a, da),)

    return Value(out_data, op="rows", parents=(a,), backward=bw)


def tanh(a: Value) -> Value:
    t = np.tanh(a.data)

    def bw(g):
        return ((a, g * (1.0 - t * t)),)

    return Value(t, op="tanh", parents=(a,), backward=bw)


def sigmoid(a: Value) -> Value:
    s = _sigmoid(a.data)

    def bw(g):
        return ((a, g * s * (1.0 - s)),)

    return Value(s, op="sigmoid", parents=(a,), backward=bw)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(a: Value) -> Value:
    mask = a.data > 0

    def bw(g):
        return ((a, g * mask),)

    return Value(a.data * mask, op="relu", parents=(a,), backward=bw)


def softmax(a: Value, axis: int = -1) -> Value:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        dot = (g * s).sum(axis=axis, keepdims=True)
        return ((a, s * (g - dot)),)

    return Value(s, op="softmax", parents=(a,), backward=bw)


def log_softmax(a: Value, axis: int = -1) -> Value:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    ls = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def bw(g):
        return ((a, g - np.exp(ls) * g.sum(axis=axis, keepdims=True)),)

    return Value(ls, op="log_softmax", parents=(a,), backward=bw)


def dropout(a: Value, p: float, train: bool, rng: np.random.Generator | None = None) -> Value:
    """Inverted dropout: scales by 1/(1-p) at train time, identity in eval."""
    if not train or p <= 0.0:
        return a
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {p}")
    if rng is None:
        raise ValueError("dropout in train mode needs an explicit rng")
    mask = (rng.random(a.shape) >= p).astype(a.dtype) / np.asarray(1.0 - p, dtype=a.dtype)

    def bw(g):
        return ((a, g * mask),)

    return Value(a.data * mask, op="dropout", parents=(a,), backward=bw)


def embedding_lookup(table: Value, indices) -> Value:
    """Rows of an embedding table; gradient scatter-adds into the table."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise ShapeMismatch("embedding_lookup", idx.shape, table.shape)
    out_data = table.data[idx]

    def bw(g):
        dt = np.zeros_like(table.data)
        np.add.at(dt, idx, g)
        return ((table, dt),)

    return Value(out_data, op="embedding_lookup", parents=(table,), backward=bw)


def cross_entropy(logits: Value, targets) -> Value:
    """Mean negative log-likelihood of integer targets under softmax(logits).

    `logits` is (n, k) with one target per row, or (k,) with a scalar
    target.
    """
    tgt = np.atleast_1d(np.asarray(targets, dtype=np.int64))
    data = logits.data if logits.data.ndim == 2 else logits.data[None, :]
    n, k = data.shape
    if tgt.shape != (n,):
        raise ShapeMismatch("cross_entropy", logits.shape, tgt.shape)
    if tgt.size and (tgt.min() < 0 or tgt.max() >= k):
        raise ValueError(f"cross_entropy target out of range 0..{k - 1}")
    shifted = data - data.max(axis=1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    logp = shifted - logz
    loss = -logp[np.arange(n), tgt].mean()

    def bw(g):
        grad = np.exp(logp)
        grad[np.arange(n), tgt] -= 1.0
        grad *= g / n
        return ((logits, grad.reshape(logits.shape)),)

    return Value(np.asarray(loss, dtype=logits.dtype), op="cross_entropy",
                 parents=(logits,), backward=bw)


def vsum(a: Value) -> Value:
    def bw(g):
        return ((a, np.full_like(a.data, g)),)
    return Value(np.asarray(a.data.sum(), dtype=a.dtype), op="sum", parents=(a,), backward=bw)


def vmean(a: Value) -> Value:
    n = a.data.size

    def bw(g):
        return ((a, np.full_like(a.data, g / n)),)

    return Value(np.asarray(a.data.mean(), dtype=a.dtype), op="mean", parents=(a,), backward=bw)


def label_bilinear(dep: Value, head: Value, weight: Value) -> Value:
    """Batched bilinear form: out[n, l] = dep[n] . weight[l] @ head[n].

    Scores every label's d x d bilinear term for n (dependent, head)
    representation pairs in one shot.
    """
    if dep.shape != head.shape or weight.data.ndim != 3 \
            or weight.shape[1] != dep.shape[1] or weight.shape[2] != head.shape[1]:
        raise ShapeMismatch("label_bilinear", dep.shape, head.shape, weight.shape)
    out_data = np.einsum("nd,lde,ne->nl", dep.data, weight.data, head.data, optimize=True)

    def bw(g):
        dw = np.einsum("nl,nd,ne->lde", g, dep.data, head.data, optimize=True)
        dd = np.einsum("nl,lde,ne->nd", g, weight.data, head.data, optimize=True)
        dh = np.einsum("nl,lde,nd->ne", g, weight.data, dep.data, optimize=True)
        return ((dep, dd), (head, dh), (weight, dw))

    return Value(out_data, op="label_bilinear", parents=(dep, head, weight), backward=bw)


def _toposort(root: Value) -> list[Value]:
    order: list[Value] = []
    seen: set[int] = set()
    stack: list[tuple[Value, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Value) -> None:
    """Populate gradients of every reachable node that requires them.

    Local adjoints accumulate in a scratch table and are added into the
    persistent `.grad` buffers at the end, so repeated calls without
    zeroing scale gradients linearly.
    """
    if loss.data.size != 1:
        raise GraphError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise GraphError("loss does not depend on any trainable value")
    order = _toposort(loss)
    adjoints: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(order):
        adj = adjoints.pop(id(node), None)
        if adj is None:
            continue
        node.accumulate_grad(adj)
        if node._backward is None:
            continue
        for parent, contribution in node._backward(adj):
            if not parent.requires_grad:
                continue
            prev = adjoints.get(id(parent))
            if prev is None:
                adjoints[id(parent)] = contribution.astype(parent.dtype, copy=True) \
                    if contribution.dtype != parent.dtype else contribution.copy()
            else:
                prev += contribution


class AdamState:
    """Per-parameter Adam moments plus the shared step counter."""

    def __init__(self, params: list[Value], lr=2e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.skipped = 0


def adam_step(state: AdamState) -> None:
    """One bias-corrected Adam update from the accumulated gradients.

    A parameter with any non-finite gradient entry is skipped for this
    step (and counted), instead of poisoning the moments.
    """
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1 ** state.step
    bias2 = 1.0 - b2 ** state.step
    for p, m, v in zip(state.params, state.m, state.v):
        g = p._grad
        if g is None:
            g = np.zeros_like(p.data)
        if not np.isfinite(g).all():
            state.skipped += 1
            continue
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        update = (state.lr / bias1) * m / (np.sqrt(v / bias2) + state.eps)
        p.data -= update.astype(p.dtype, copy=False)


def zero_grads(params: list[Value]) -> None:
    for p in params:
        p.zero_grad()
