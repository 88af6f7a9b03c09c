"""Backend selection for the hashing kernels.

The compiled extension is used when it imports; otherwise, or when
``IMGSEARCH_PURE_PYTHON`` is set to a non-empty value other than ``0``, the
numpy implementation is used.  Both produce identical results.
"""

import os

from . import _kernels_py

PRIME = _kernels_py.PRIME

_force_py = os.environ.get("IMGSEARCH_PURE_PYTHON", "") not in ("", "0")

backend = _kernels_py
BACKEND_NAME = "numpy"
if not _force_py:
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        backend = _compiled
        BACKEND_NAME = "cython"

mulmod = backend.mulmod
addmod = backend.addmod
fingerprint = backend.fingerprint
affine_mod = backend.affine_mod
step = backend.step
