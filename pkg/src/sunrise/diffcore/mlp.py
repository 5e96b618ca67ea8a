"""Parameter containers, MLP evaluation and the Adam optimizer."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import kernels
from .errors import ContractError, DimensionError, NonFiniteError
from .tape import Gradients, Tape, Var, as_var, dense


class ParamVector:
    """A flat float64 parameter vector plus its Adam moment estimates.

    Subclasses expose structured views into ``theta``; every update is made in
    place so the views stay valid.
    """

    def __init__(self, theta: np.ndarray):
        self.theta = np.ascontiguousarray(theta, dtype=np.float64)
        self.m = np.zeros_like(self.theta)
        self.v = np.zeros_like(self.theta)
        self.step = 0

    @property
    def size(self) -> int:
        return self.theta.size

    def tensors(self):
        return [self.theta]

    def tensor_views(self, flat):
        return [flat]

    def describe(self, index: int) -> str:
        return f"element {index}"

    def copy(self):
        other = object.__new__(type(self))
        other.__dict__.update(self.__dict__)
        other.theta = self.theta.copy()
        other.m = self.m.copy()
        other.v = self.v.copy()
        other._bind()
        return other

    def _bind(self):
        pass


class MlpParams(ParamVector):
    """Weights and biases of a ReLU MLP with a linear output layer.

    ``sizes`` lists layer widths from input to output, so ``(3, 64, 64, 1)``
    has two hidden layers. ``layers`` holds ``(W, b)`` views with ``W`` shaped
    ``(in, out)``.
    """

    def __init__(self, sizes: Sequence[int], theta: np.ndarray | None = None):
        sizes = tuple(int(s) for s in sizes)
        if len(sizes) < 2 or min(sizes) < 1:
            raise DimensionError(f"invalid layer sizes {sizes}")
        self.sizes = sizes
        n = sum(i * o + o for i, o in zip(sizes[:-1], sizes[1:]))
        if theta is None:
            theta = np.zeros(n)
        elif np.size(theta) != n:
            raise DimensionError(f"expected {n} parameters for sizes {sizes}, got {np.size(theta)}")
        super().__init__(np.asarray(theta, dtype=np.float64).reshape(-1))
        self._bind()

    @classmethod
    def init(cls, sizes: Sequence[int], rng: np.random.Generator) -> "MlpParams":
        """Uniform +-1/sqrt(fan_in) initialisation of weights and biases."""
        params = cls(sizes)
        for W, b in params.layers:
            bound = 1.0 / np.sqrt(W.shape[0])
            W[...] = rng.uniform(-bound, bound, size=W.shape)
            b[...] = rng.uniform(-bound, bound, size=b.shape)
        return params

    def _bind(self):
        self.layers = self.tensor_views(self.theta, pairs=True)

    def tensor_views(self, flat, pairs=False):
        views = []
        off = 0
        for i, o in zip(self.sizes[:-1], self.sizes[1:]):
            W = flat[off:off + i * o].reshape(i, o)
            off += i * o
            b = flat[off:off + o]
            off += o
            views.append((W, b) if pairs else W)
            if not pairs:
                views.append(b)
        return views

    def tensors(self):
        return self.tensor_views(self.theta)

    @property
    def in_dim(self) -> int:
        return self.sizes[0]

    @property
    def out_dim(self) -> int:
        return self.sizes[-1]

    def describe(self, index: int) -> str:
        off = 0
        for k, (i, o) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if index < off + i * o:
                r, c = divmod(index - off, o)
                return f"layer {k} weight[{r}, {c}]"
            off += i * o
            if index < off + o:
                return f"layer {k} bias[{index - off}]"
            off += o
        raise IndexError(index)

    def same_architecture(self, other) -> bool:
        return isinstance(other, MlpParams) and self.sizes == other.sizes

    def __repr__(self):
        return f"MlpParams(sizes={self.sizes}, step={self.step})"


def mlp_forward(params: MlpParams, x, tape: Tape | None = None, watch: bool = True):
    """Evaluate the network on a (batch, in_dim) input.

    Without a tape, and with a plain array input, this is a direct numpy
    evaluation returning an array. Otherwise the layers are recorded and a
    :class:`Var` is returned. ``watch=False`` treats the weights as constants
    while still propagating gradients to a recorded input.
    """
    xv = x.value if isinstance(x, Var) else x
    if xv.ndim != 2 or xv.shape[1] != params.in_dim:
        raise DimensionError(
            f"layer 0: input shape {xv.shape} does not match in_dim {params.in_dim}")
    n = len(params.layers)
    record = tape is not None or (isinstance(x, Var) and x.tape is not None)
    if not record:
        h = np.ascontiguousarray(xv, dtype=np.float64)
        for k, (W, b) in enumerate(params.layers):
            h = kernels.dense_forward(h, W, b, k < n - 1)
        if not np.all(np.isfinite(h)):
            raise NonFiniteError("non-finite network output")
        return h
    if tape is not None and watch:
        leaves = tape.watch(params)
        weights = [(leaves[2 * k], leaves[2 * k + 1]) for k in range(n)]
    else:
        weights = params.layers
    h = as_var(x)
    for k, (W, b) in enumerate(weights):
        h = dense(h, W, b, k < n - 1)
    if not np.all(np.isfinite(h.value)):
        raise NonFiniteError("non-finite network output")
    return h


def adam_step(params: ParamVector, grads, lr: float = 3e-4,
              betas: tuple[float, float] = (0.9, 0.999), eps: float = 1e-8) -> ParamVector:
    """One bias-corrected Adam update applied in place; returns ``params``."""
    g = grads[params] if isinstance(grads, Gradients) else np.asarray(grads, dtype=np.float64)
    if g.shape != params.theta.shape:
        raise DimensionError(f"gradient shape {g.shape} != parameter shape {params.theta.shape}")
    bad = np.flatnonzero(~np.isfinite(g))
    if bad.size:
        raise NonFiniteError(f"non-finite gradient at {params.describe(int(bad[0]))}")
    if lr <= 0:
        raise ContractError(f"learning rate must be positive, got {lr}")
    params.step += 1
    kernels.adam_update(params.theta, np.ascontiguousarray(g), params.m, params.v,
                        float(lr), float(betas[0]), float(betas[1]), float(eps), params.step)
    return params
