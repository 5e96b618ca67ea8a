"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable or disabled with
``SUNRISE_PURE_PYTHON=1``. Signatures match the extension exactly.
"""

import numpy as np


def dense_forward(x, W, b, relu):
    y = x @ W
    y += b
    if relu:
        np.maximum(y, 0.0, out=y)
    return y


def dense_backward(x, W, y, gy, relu, need_gx, need_gw):
    """Return ``(gx, gW, gb)``; entries not requested are ``None``."""
    g = gy * (y > 0.0) if relu else gy
    gx = g @ W.T if need_gx else None
    if need_gw:
        gW = x.T @ g
        gb = g.sum(axis=0)
    else:
        gW = gb = None
    return gx, gW, gb


def adam_update(theta, grad, m, v, lr, beta1, beta2, eps, step):
    """In-place bias-corrected Adam update; ``step`` is the post-increment count."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * (grad * grad)
    bc1 = 1.0 - beta1 ** step
    bc2 = 1.0 - beta2 ** step
    theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def polyak(target, live, tau):
    target += tau * (live - target)
