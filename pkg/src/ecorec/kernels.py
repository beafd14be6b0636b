"""Neighbor-mean kernels over CSR adjacency.

Two interchangeable backends: the compiled extension (``ecorec._csr``, built
via Cython) and a numpy fallback based on ``np.add.at``. The active backend is
picked at import time; set ``ECOREC_KERNELS=numpy`` to force the fallback or
``ECOREC_KERNELS=cython`` to require the extension. Both backends accumulate
edge contributions in CSR order and scale by the reciprocal degree, so their
outputs are bit-identical.
"""

import os

import numpy as np

from .errors import ConfigError


def _py_mean_neighbors(indptr, indices, x):
    """out[v] = mean of x[u] over neighbors u of v; zero row if v is isolated."""
    n = indptr.shape[0] - 1
    deg = np.diff(indptr)
    out = np.zeros((n, x.shape[1]), dtype=np.float64)
    src = np.repeat(np.arange(n, dtype=np.int64), deg)
    np.add.at(out, src, x[indices])
    nz = deg > 0
    out[nz] *= (1.0 / deg[nz])[:, None]
    return out


def _py_mean_neighbors_adjoint(indptr, indices, g):
    """Transpose of mean_neighbors: out[u] += g[v] / deg(v) for every edge (v, u)."""
    n = indptr.shape[0] - 1
    deg = np.diff(indptr)
    inv = np.zeros(n, dtype=np.float64)
    nz = deg > 0
    inv[nz] = 1.0 / deg[nz]
    scaled = g * inv[:, None]
    src = np.repeat(np.arange(n, dtype=np.int64), deg)
    out = np.zeros_like(g)
    np.add.at(out, indices, scaled[src])
    return out


try:
    from . import _csr as _ext
except ImportError:
    _ext = None

_BACKENDS = {
    "numpy": (_py_mean_neighbors, _py_mean_neighbors_adjoint),
}
if _ext is not None:
    _BACKENDS["cython"] = (_ext.mean_neighbors, _ext.mean_neighbors_adjoint)


def available_backends():
    return sorted(_BACKENDS)


def set_backend(name):
    """Switch the active kernel backend ("numpy" or "cython")."""
    global _active, mean_neighbors, mean_neighbors_adjoint
    if name not in _BACKENDS:
        raise ConfigError(
            f"kernel backend {name!r} not available (have: {', '.join(available_backends())})"
        )
    _active = name
    mean_neighbors, mean_neighbors_adjoint = _BACKENDS[name]


def get_backend():
    return _active


_requested = os.environ.get("ECOREC_KERNELS", "auto")
if _requested == "auto":
    _initial = "cython" if _ext is not None else "numpy"
elif _requested in ("numpy", "cython"):
    _initial = _requested
else:
    raise ConfigError(f"ECOREC_KERNELS must be auto, numpy or cython, got {_requested!r}")

_active = None
mean_neighbors = None
mean_neighbors_adjoint = None
set_backend(_initial)
