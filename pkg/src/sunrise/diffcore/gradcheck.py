"""Central finite-difference gradient checks."""

from typing import Callable, Sequence

import numpy as np

from .mlp import ParamVector
from .tape import Tape


def _value(loss) -> float:
    v = loss.value if hasattr(loss, "value") else loss
    return float(np.asarray(v).reshape(()))


def analytic_gradients(f: Callable, params: Sequence[ParamVector]):
    tape = Tape()
    for p in params:
        tape.watch(p)
    grads = tape.backward(f(tape))
    return [grads[p].copy() for p in params]


def finite_differences(f: Callable, params: Sequence[ParamVector], eps: float = 1e-5):
    out = []
    for p in params:
        g = np.zeros_like(p.theta)
        for k in range(p.size):
            saved = p.theta[k]
            p.theta[k] = saved + eps
            up = _value(f(None))
            p.theta[k] = saved - eps
            down = _value(f(None))
            p.theta[k] = saved
            g[k] = (up - down) / (2.0 * eps)
        out.append(g)
    return out


def relative_error(analytic, numeric) -> float:
    worst = 0.0
    for a, n in zip(analytic, numeric):
        a, n = np.asarray(a), np.asarray(n)
        if a.size == 0:
            continue
        err = np.abs(a - n) / np.maximum(1e-8, np.abs(a) + np.abs(n))
        worst = max(worst, float(err.max()))
    return worst


def grad_check(f: Callable, params, eps: float = 1e-5) -> float:
    """Max relative error between tape gradients and central differences.

    ``f(tape)`` must build the scalar loss, recording on ``tape`` when it is not
    ``None``, and be deterministic given the parameter values.
    """
    if isinstance(params, ParamVector):
        params = [params]
    return relative_error(analytic_gradients(f, params), finite_differences(f, params, eps))
