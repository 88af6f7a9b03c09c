"""Compare the compiled hashing kernels with the numpy fallback.

Runs each kernel on the same random inputs under both backends, checks that
the outputs agree, and reports the best of several timings.  With
``--build`` it also times a full inverter build in a subprocess per backend.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5] [--build 16384]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from imgsearch import _kernels_py

try:
    from imgsearch import _kernels as compiled
except ImportError:
    compiled = None

BUILD_SNIPPET = """
import time
from imgsearch.bench import random_key_function
from imgsearch.inversion import build_tradeoff_inverter
from imgsearch.kernels import BACKEND_NAME
kf = random_key_function({n}, 0)
t = time.perf_counter()
build_tradeoff_inverter(kf, 0.6, 0)
print(BACKEND_NAME, time.perf_counter() - t)
"""


def inputs(n: int, k: int = 3):
    rng = np.random.default_rng(1)
    p = _kernels_py.PRIME
    a = rng.integers(0, p, n, dtype=np.uint64)
    b = rng.integers(0, p, n, dtype=np.uint64)
    words = rng.integers(0, p, (n, k), dtype=np.uint64)
    heavy = np.sort(rng.choice(a, max(1, n // 100), replace=False))
    return a, b, words, heavy


def cases(mod, a, b, words, heavy, n):
    z = np.arange(n, dtype=np.int64)
    return {
        "mulmod": lambda: mod.mulmod(a, b),
        "fingerprint": lambda: mod.fingerprint(words, 123456789),
        "affine_mod": lambda: mod.affine_mod(a, b, a, n),
        "step": lambda: mod.step(a, z, b, a, b, a, heavy, n),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1 << 20)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--build", type=int, default=0, help="also time an inverter build of this size")
    args = ap.parse_args()

    a, b, words, heavy = inputs(args.n)
    py = cases(_kernels_py, a, b, words, heavy, args.n)
    cy = cases(compiled, a, b, words, heavy, args.n) if compiled else {}
    print(f"{'kernel':<12} {'numpy_s':>10} {'cython_s':>10} {'speedup':>8}")
    for name, fn in py.items():
        t_py = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        if name in cy:
            if not np.array_equal(np.asarray(fn()), np.asarray(cy[name]())):
                sys.exit(f"{name}: backends disagree")
            t_cy = min(timeit.repeat(cy[name], number=1, repeat=args.repeat))
            print(f"{name:<12} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>7.1f}x")
        else:
            print(f"{name:<12} {t_py:>10.4f} {'n/a':>10} {'':>8}")

    if args.build:
        for force in ("1", "0"):
            env = dict(os.environ, IMGSEARCH_PURE_PYTHON=force)
            out = subprocess.run([sys.executable, "-c", BUILD_SNIPPET.format(n=args.build)],
                                 env=env, capture_output=True, text=True, check=True)
            backend, secs = out.stdout.split()
            print(f"build N={args.build} backend={backend} seconds={float(secs):.2f}")


if __name__ == "__main__":
    main()
