import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from imgsearch import _kernels_py, kernels

compiled = pytest.importorskip("imgsearch._kernels")
P = _kernels_py.PRIME
fields = st.lists(st.integers(0, P - 1), min_size=1, max_size=50)


def arr(v):
    return np.array(v, dtype=np.uint64)


@given(fields, fields)
def test_mulmod_matches_python_ints(a, b):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    want = [x * y % P for x, y in zip(a, b)]
    assert _kernels_py.mulmod(arr(a), arr(b)).tolist() == want
    assert np.asarray(compiled.mulmod(arr(a), arr(b))).tolist() == want


@given(fields, st.integers(1, P - 1))
def test_fingerprint_backends_agree(vals, beta):
    words = arr(vals).reshape(-1, 1)
    assert np.array_equal(_kernels_py.fingerprint(words, beta),
                          np.asarray(compiled.fingerprint(words, beta)))


def test_step_backends_agree():
    rng = np.random.default_rng(5)
    n = 5000
    fp, a, b, c, d = (rng.integers(0, P, n, dtype=np.uint64) for _ in range(5))
    z = rng.integers(0, n, n, dtype=np.int64)
    heavy = np.sort(fp[::37])
    want = _kernels_py.step(fp, z, a, b, c, d, heavy, n)
    got = np.asarray(compiled.step(fp, z, a, b, c, d, heavy, n))
    assert np.array_equal(want, got)
    assert np.array_equal(_kernels_py.affine_mod(fp, a, b, 997),
                          np.asarray(compiled.affine_mod(fp, a, b, 997)))


def test_backend_selection_env():
    code = "from imgsearch.kernels import BACKEND_NAME; print(BACKEND_NAME)"
    env = dict(os.environ, IMGSEARCH_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"
    assert kernels.BACKEND_NAME in ("cython", "numpy")


def test_inverter_identical_across_backends():
    code = ("from imgsearch.bench import random_key_function;"
            "from imgsearch.inversion import build_tradeoff_inverter;"
            "from imgsearch.artifact import write_inverter;import hashlib;"
            "inv=build_tradeoff_inverter(random_key_function(2048, 1), 0.5, 3);"
            "print(hashlib.sha256(write_inverter(inv).getvalue()).hexdigest())")
    digests = set()
    for force in ("0", "1"):
        env = dict(os.environ, IMGSEARCH_PURE_PYTHON=force)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True)
        digests.add(out.stdout.strip())
    assert len(digests) == 1
