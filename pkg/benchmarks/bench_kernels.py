"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py              # per-kernel timings
    python benchmarks/bench_kernels.py --end-to-end # plus ensemble update step per backend

Per-kernel numbers import both implementations side by side. The end-to-end
number runs one subprocess per backend, since the backend is fixed at import.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from sunrise.diffcore import _kernels_py

try:
    from sunrise.diffcore import _kernels
except ImportError:
    _kernels = None

SHAPES = [(64, 32, 32), (128, 64, 64), (256, 256, 256)]

STEP_SNIPPET = """
import time, numpy as np
from sunrise.diffcore import BACKEND
from sunrise.ensemble import EnsembleAgent
from sunrise.agents import SacSettings
from sunrise.replay import Batch
rng = np.random.default_rng(0)
B = 128
b = Batch(rng.normal(size=(B, 5)), rng.uniform(-0.9, 0.9, (B, 1)), rng.normal(size=(B, 1)),
          rng.normal(size=(B, 5)), np.zeros((B, 1)), np.ones((B, 5)), np.arange(B))
from sunrise.ensemble import weighted_critic_step
ens = EnsembleAgent.create_sac(5, 1, 5, 0, SacSettings(hidden=(64, 64)), scheme="ensemble_std")
for _ in range(5):
    weighted_critic_step(ens, b)
n = 50
t = time.perf_counter()
for _ in range(n):
    weighted_critic_step(ens, b)
print(BACKEND, (time.perf_counter() - t) / n)
"""


def best_of(fn, number):
    return min(timeit.repeat(fn, number=number, repeat=5)) / number


def kernel_cases(impl, rng, B, fan_in, fan_out):
    x = rng.normal(size=(B, fan_in))
    W = rng.normal(size=(fan_in, fan_out))
    b = rng.normal(size=fan_out)
    y = impl.dense_forward(x, W, b, True)
    gy = rng.normal(size=y.shape)
    n = W.size + b.size
    theta, grad = rng.normal(size=n), rng.normal(size=n)
    m, v = np.zeros(n), np.zeros(n)
    tgt = rng.normal(size=n)
    return {
        "dense_forward": lambda: impl.dense_forward(x, W, b, True),
        "dense_backward": lambda: impl.dense_backward(x, W, y, gy, True, True, True),
        "adam_update": lambda: impl.adam_update(theta, grad, m, v, 1e-3, 0.9, 0.999, 1e-8, 10),
        "polyak": lambda: impl.polyak(tgt, theta, 0.01),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--end-to-end", action="store_true")
    p.add_argument("--number", type=int, default=200)
    args = p.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; showing the numpy fallback only")
    print(f"{'kernel':<16}{'shape':>16}{'python_us':>12}{'compiled_us':>13}{'speedup':>9}")
    for shape in SHAPES:
        py_cases = kernel_cases(_kernels_py, np.random.default_rng(0), *shape)
        c_cases = kernel_cases(_kernels, np.random.default_rng(0), *shape) if _kernels else {}
        for name, fn in py_cases.items():
            t_py = best_of(fn, args.number) * 1e6
            if name in c_cases:
                t_c = best_of(c_cases[name], args.number) * 1e6
                print(f"{name:<16}{str(shape):>16}{t_py:>12.1f}{t_c:>13.1f}{t_py / t_c:>9.2f}")
            else:
                print(f"{name:<16}{str(shape):>16}{t_py:>12.1f}{'-':>13}{'-':>9}")
    if args.end_to_end:
        print("\nensemble update step (N=5, hidden 64x64, batch 128)")
        for pure in ("0", "1"):
            env = {**os.environ, "SUNRISE_PURE_PYTHON": pure}
            out = subprocess.run([sys.executable, "-c", STEP_SNIPPET], env=env, check=True,
                                 capture_output=True, text=True).stdout.split()
            print(f"  {out[0]:<9} {float(out[1]) * 1e3:.2f} ms/step")


if __name__ == "__main__":
    main()
