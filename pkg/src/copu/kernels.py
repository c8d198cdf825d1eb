"""Backend dispatch for the batched kernels.

``COPU_BACKEND=numba`` (default) uses the JIT kernels; ``COPU_BACKEND=numpy``
selects the vectorized numpy path. If numba cannot be imported the numpy
path is used regardless. The choice is made once, at import time.
"""
import logging
import os

from . import _kernels_numpy

log = logging.getLogger(__name__)

KERNEL_NAMES = ("eigh_batch", "choi_kraus_batch", "l1_batch", "purity_batch", "nonunital_cp_batch")


def _select(requested):
    requested = (requested or "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(f"COPU_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba":
        try:
            from . import _kernels_numba
        except ImportError:  # pragma: no cover - numba is a declared dependency
            log.warning("numba unavailable; falling back to numpy kernels")
            return "numpy", _kernels_numpy
        return "numba", _kernels_numba
    return "numpy", _kernels_numpy


BACKEND, _impl = _select(os.environ.get("COPU_BACKEND"))

eigh_batch = _impl.eigh_batch
choi_kraus_batch = _impl.choi_kraus_batch
l1_batch = _impl.l1_batch
purity_batch = _impl.purity_batch
nonunital_cp_batch = _impl.nonunital_cp_batch


def implementation(name):
    """Return the kernel module for ``name`` ('numba' or 'numpy')."""
    return _select(name)[1]
