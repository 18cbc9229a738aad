"""Low-level application of local operators to dense state vectors.

Two interchangeable backends are provided: a numba-compiled gather/scatter
kernel and a pure-numpy reshape/matmul path.  The numpy path is always
available; the numba path is used when numba imports successfully and the
environment variable ``ENTSPEC_DISABLE_NUMBA`` is not set to ``1``.

The hot loop is the repeated application of small local matrices to a large
state vector (Lanczos matvecs, circuit application).  ``benchmarks/`` contains
a script comparing the two backends on that workload.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly via backend selection
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAS_NUMBA = False


def numba_enabled() -> bool:
    """True if the compiled kernel backend is active."""
    if not HAS_NUMBA:
        return False
    return os.environ.get("ENTSPEC_DISABLE_NUMBA", "0") != "1"


def _strides_for(dims):
    """Row-major strides (in elements) for a list of site dimensions."""
    n = len(dims)
    strides = np.ones(n, dtype=np.int64)
    for i in range(n - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    return strides


def _target_offsets(sites, dims):
    """Flat offsets of all local configurations of ``sites`` within the chain.

    Returns (offsets[m], rest_dims, rest_strides) where m is the product of
    the target site dimensions and the rest_* arrays enumerate the untouched
    sites.
    """
    dims = np.asarray(dims, dtype=np.int64)
    strides = _strides_for(dims)
    sites = list(sites)
    tdims = dims[sites]
    m = int(np.prod(tdims))
    offsets = np.zeros(m, dtype=np.int64)
    rep = m
    for ax, s in enumerate(sites):
        rep //= tdims[ax]
        idx = (np.arange(m) // rep) % tdims[ax]
        offsets += idx * strides[s]
    rest = [i for i in range(len(dims)) if i not in set(sites)]
    rest_dims = dims[rest]
    rest_strides = strides[rest]
    return offsets, rest_dims, rest_strides


if HAS_NUMBA:

    @numba.njit(cache=True)
    def _apply_njit(psi, out, op, toff, rest_dims, rest_strides, scale):  # pragma: no cover - compiled
        m = toff.shape[0]
        nrest = rest_dims.shape[0]
        total = 1
        for i in range(nrest):
            total *= rest_dims[i]
        buf = np.empty(m, dtype=np.complex128)
        for r in range(total):
            base = 0
            rr = r
            for i in range(nrest - 1, -1, -1):
                base += (rr % rest_dims[i]) * rest_strides[i]
                rr //= rest_dims[i]
            for i in range(m):
                buf[i] = psi[base + toff[i]]
            for i in range(m):
                acc = 0.0 + 0.0j
                for j in range(m):
                    acc += op[i, j] * buf[j]
                out[base + toff[i]] += scale * acc
        return out


def _apply_numpy(psi, out, op, sites, dims, scale):
    """Reshape/matmul fallback: move target axes to the front and matmul."""
    nd = len(dims)
    ten = psi.reshape(dims)
    rest = [i for i in range(nd) if i not in set(sites)]
    perm = list(sites) + rest
    moved = np.transpose(ten, perm)
    m = op.shape[0]
    res = op @ moved.reshape(m, -1)
    res = res.reshape([dims[i] for i in perm])
    res = np.transpose(res, np.argsort(perm))
    out += scale * res.reshape(-1)
    return out


def apply_local_into(out, psi, op, sites, dims, scale=1.0, backend=None):
    """Accumulate ``scale * (op acting on sites) @ psi`` into ``out``.

    Parameters
    ----------
    out, psi : complex ndarray, flat, length prod(dims).
    op : (m, m) matrix with m the product of the target site dimensions.
    sites : ordered site indices the operator acts on.
    dims : per-site dimensions of the chain.
    scale : scalar prefactor.
    backend : None (auto), "numba" or "numpy".
    """
    op = np.ascontiguousarray(op, dtype=np.complex128)
    use_numba = numba_enabled() if backend is None else backend == "numba"
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable")
    if use_numba:
        toff, rest_dims, rest_strides = _target_offsets(sites, dims)
        _apply_njit(psi, out, op, toff, rest_dims, rest_strides,
                    complex(scale))
    else:
        _apply_numpy(psi, out, op, list(sites), list(dims), complex(scale))
    return out


def apply_local(psi, op, sites, dims, backend=None):
    """Return ``(op acting on sites) @ psi`` as a new vector."""
    out = np.zeros_like(psi, dtype=np.complex128)
    return apply_local_into(out, psi.astype(np.complex128, copy=False), op,
                            sites, dims, backend=backend)
