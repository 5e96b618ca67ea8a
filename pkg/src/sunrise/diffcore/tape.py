"""Tape-based reverse-mode differentiation over float64 numpy arrays.

A :class:`Var` wraps an array. Operations on vars that belong to a
:class:`Tape` are recorded in creation order, so replaying the record backwards
is a reverse topological sweep. Vars with ``tape is None`` are constants: the
same operations run on them without recording anything, which is how losses
are evaluated for finite differencing or inference.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ContractError, DimensionError, NonFiniteError


class Var:
    __slots__ = ("value", "tape", "parents", "backward_fn", "grad", "is_leaf")
    # make numpy defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, value, tape=None, parents=(), backward_fn=None):
        self.value = value
        self.tape = tape
        self.parents = parents
        self.backward_fn = backward_fn
        self.grad = None
        self.is_leaf = False

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        mode = "recorded" if self.tape is not None else "const"
        return f"Var(shape={self.value.shape}, {mode})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return neg(self)


def as_var(x) -> Var:
    if isinstance(x, Var):
        return x
    return Var(np.asarray(x, dtype=np.float64))


class Gradients:
    """Flat gradient buffers keyed by parameter object (identity)."""

    def __init__(self):
        self._flat = {}

    def __getitem__(self, params):
        g = self._flat.get(id(params))
        if g is None:
            return np.zeros_like(params.theta)
        return g[1]

    def __contains__(self, params):
        return id(params) in self._flat

    def _register(self, params, flat):
        self._flat[id(params)] = (params, flat)

    def items(self):
        return [(p, g) for p, g in self._flat.values()]


class Tape:
    def __init__(self):
        self.nodes = []
        self._watched = {}
        self._grads = Gradients()
        self._done = False

    def record(self, node: Var):
        self.nodes.append(node)

    def watch(self, params):
        """Leaf vars for every tensor of ``params``; repeated calls share them."""
        entry = self._watched.get(id(params))
        if entry is not None:
            return entry
        flat = np.zeros_like(params.theta)
        self._grads._register(params, flat)
        leaves = []
        for value, gview in zip(params.tensors(), params.tensor_views(flat)):
            leaf = Var(value, self)
            leaf.is_leaf = True
            leaf.grad = gview
            self.record(leaf)
            leaves.append(leaf)
        self._watched[id(params)] = leaves
        return leaves

    def backward(self, loss: Var) -> Gradients:
        if loss.tape is not self:
            raise ContractError("loss was not recorded on this tape")
        if loss.value.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {loss.value.shape}")
        if self._done:
            raise ContractError("tape already replayed")
        self._done = True
        loss.grad = np.ones_like(loss.value)
        for node in reversed(self.nodes):
            g = node.grad
            if g is None or node.backward_fn is None:
                continue
            for parent, pg in zip(node.parents, node.backward_fn(g)):
                if pg is None or parent.tape is None:
                    continue
                if parent.is_leaf:
                    parent.grad += pg
                elif parent.grad is None:
                    parent.grad = pg
                else:
                    parent.grad = parent.grad + pg
            if not node.is_leaf:
                node.grad = None
        return self._grads


def _result(value, parents, backward_fn):
    tape = None
    for p in parents:
        if p.tape is not None:
            tape = p.tape
            break
    if tape is None:
        return Var(value)
    node = Var(value, tape, parents, backward_fn)
    tape.record(node)
    return node


def _same_shape(a: Var, b: Var, op: str):
    sa, sb = a.value.shape, b.value.shape
    if sa != sb and a.value.ndim and b.value.ndim:
        raise DimensionError(f"{op}: shape mismatch {sa} vs {sb}")


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    return np.sum(g).reshape(shape) if len(shape) else np.sum(g)


# --- elementwise -------------------------------------------------------------

def add(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    _same_shape(a, b, "add")
    sa, sb = a.value.shape, b.value.shape
    return _result(a.value + b.value, (a, b),
                   lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    _same_shape(a, b, "sub")
    sa, sb = a.value.shape, b.value.shape
    return _result(a.value - b.value, (a, b),
                   lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a, b) -> Var:
    a, b = as_var(a), as_var(b)
    _same_shape(a, b, "mul")
    av, bv = a.value, b.value

    def backward(g):
        ga = _unbroadcast(g * bv, av.shape) if a.tape is not None else None
        gb = _unbroadcast(g * av, bv.shape) if b.tape is not None else None
        return ga, gb

    return _result(av * bv, (a, b), backward)


def neg(a) -> Var:
    a = as_var(a)
    return _result(-a.value, (a,), lambda g: (-g,))


def square(a) -> Var:
    a = as_var(a)
    av = a.value
    return _result(av * av, (a,), lambda g: (2.0 * av * g,))


def exp(a) -> Var:
    a = as_var(a)
    y = np.exp(a.value)
    return _result(y, (a,), lambda g: (g * y,))


def tanh(a) -> Var:
    a = as_var(a)
    y = np.tanh(a.value)
    return _result(y, (a,), lambda g: (g * (1.0 - y * y),))


def softplus(a) -> Var:
    """log(1 + e^x), overflow-safe."""
    a = as_var(a)
    x = a.value
    y = np.logaddexp(0.0, x)
    return _result(y, (a,), lambda g: (g * _sigmoid(x),))


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def clip(a, lo: float, hi: float) -> Var:
    """Clamp; the gradient passes only where the input was inside [lo, hi]."""
    a = as_var(a)
    x = a.value
    inside = (x >= lo) & (x <= hi)
    return _result(np.clip(x, lo, hi), (a,), lambda g: (g * inside,))


# --- reductions and structure --------------------------------------------------

def sum_rows(a) -> Var:
    """Sum over the last axis keeping it: (B, k) -> (B, 1)."""
    a = as_var(a)
    shape = a.value.shape
    return _result(a.value.sum(axis=-1, keepdims=True), (a,),
                   lambda g: (np.broadcast_to(g, shape).copy(),))


def mean(a) -> Var:
    a = as_var(a)
    shape = a.value.shape
    n = a.value.size
    return _result(np.asarray(a.value.sum() / n), (a,),
                   lambda g: (np.full(shape, g / n),))


def concat(parts, axis: int = -1) -> Var:
    parts = [as_var(p) for p in parts]
    values = [p.value for p in parts]
    sizes = np.cumsum([v.shape[axis] for v in values])[:-1]

    def backward(g):
        return tuple(np.split(g, sizes, axis=axis))

    return _result(np.concatenate(values, axis=axis), tuple(parts), backward)


def columns(a, start: int, stop: int) -> Var:
    a = as_var(a)
    shape = a.value.shape

    def backward(g):
        full = np.zeros(shape)
        full[:, start:stop] = g
        return (full,)

    return _result(a.value[:, start:stop].copy(), (a,), backward)


def pick(a, index) -> Var:
    """Row-wise gather ``a[r, index[r]]`` as a (B, 1) column."""
    a = as_var(a)
    shape = a.value.shape
    rows = np.arange(shape[0])
    index = np.asarray(index, dtype=np.int64)

    def backward(g):
        full = np.zeros(shape)
        full[rows, index] = g[:, 0]
        return (full,)

    return _result(a.value[rows, index][:, None], (a,), backward)


def dense(x, W, b, relu: bool) -> Var:
    """Affine layer ``x @ W + b`` with optional ReLU, as a single node."""
    x, W, b = as_var(x), as_var(W), as_var(b)
    if x.value.shape[-1] != W.value.shape[0]:
        raise DimensionError(f"dense: input width {x.value.shape[-1]} != {W.value.shape[0]}")
    xv, Wv = x.value, W.value
    y = kernels.dense_forward(xv, Wv, b.value, relu)
    need_gx = x.tape is not None
    need_gw = W.tape is not None

    def backward(g):
        return kernels.dense_backward(xv, Wv, y, g, relu, need_gx, need_gw)

    return _result(y, (x, W, b), backward)


def check_finite(value, what: str):
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(f"non-finite values in {what}")
