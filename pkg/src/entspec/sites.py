"""On-site operator algebra and chain layouts.

Local operators are position-free matrices tagged with the dimensions of the
sites they act on; :func:`embed_and_apply` places them on a chain and applies
them to a dense state vector.  Qubit Paulis, the two-qubit controlled-Z gate
and cyclic clock/shift pairs are provided as constructors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels

DEFAULT_DENSE_CAP = 2 ** 24

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class LocalOperator:
    """A matrix acting on one or more adjacent-or-not sites of given dims.

    The ``hermitian`` / ``unitary`` flags are declarations checked on
    construction to 1e-12; an operator may be neither.
    """

    mat: np.ndarray
    site_dims: tuple
    name: str = ""
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = int(np.prod(self.site_dims))
        mat = np.asarray(self.mat, dtype=complex)
        if mat.shape != (m, m):
            raise ValueError(
                f"operator {self.name!r}: shape {mat.shape} does not match "
                f"site dims {self.site_dims}")
        object.__setattr__(self, "mat", mat)
        if self.hermitian and not np.allclose(mat, mat.conj().T, atol=1e-12):
            raise ValueError(f"operator {self.name!r} declared hermitian but is not")
        if self.unitary:
            err = np.linalg.norm(mat @ mat.conj().T - np.eye(m))
            if err > 1e-12 * m:
                raise ValueError(f"operator {self.name!r} declared unitary but is not")

    @property
    def dim(self):
        return self.mat.shape[0]

    def dag(self):
        return LocalOperator(self.mat.conj().T, self.site_dims,
                             name=self.name + "^dag",
                             hermitian=self.hermitian, unitary=self.unitary)

    def __matmul__(self, other):
        if self.site_dims != other.site_dims:
            raise ValueError("site dims mismatch in operator product")
        return LocalOperator(self.mat @ other.mat, self.site_dims,
                             name=f"{self.name}*{other.name}")


def pauli_op(name: str) -> LocalOperator:
    """Single-qubit Pauli operator I, X, Y or Z."""
    if name not in _PAULI:
        raise KeyError(f"unknown Pauli {name!r}")
    return LocalOperator(_PAULI[name], (2,), name=name, hermitian=True,
                         unitary=True)


def cz_gate() -> LocalOperator:
    """Two-qubit controlled-Z, diag(1, 1, 1, -1)."""
    return LocalOperator(np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex),
                         (2, 2), name="CZ", hermitian=True, unitary=True)


def clock_ops(q: int):
    """Clock/shift pair (Z, X) on a dimension-q site with ZX = e^{2πi/q} XZ.

    Z = diag(1, ω, ω², ...) and X raises the clock state by one (mod q).
    For q = 2 these reduce to the Pauli Z and X.
    """
    if q < 2:
        raise ValueError("clock dimension must be at least 2")
    omega = np.exp(2j * np.pi / q)
    zmat = np.diag(omega ** np.arange(q))
    xmat = np.zeros((q, q), dtype=complex)
    for p in range(q):
        xmat[(p + 1) % q, p] = 1.0
    z = LocalOperator(zmat, (q,), name=f"clockZ[{q}]", unitary=True,
                      hermitian=(q == 2))
    x = LocalOperator(xmat, (q,), name=f"clockX[{q}]", unitary=True,
                      hermitian=(q == 2))
    return z, x


def xrot_gate(theta: float) -> LocalOperator:
    """Single-qubit rotation exp(i·theta·X)."""
    c, s = np.cos(theta), np.sin(theta)
    return LocalOperator(np.array([[c, 1j * s], [1j * s, c]]), (2,),
                         name=f"expiX({theta})", unitary=True)


@dataclass(frozen=True)
class ChainLayout:
    """Site dimensions of an open chain plus optional sublattice labels.

    Labels mark the role a site plays in the two-sublattice constructions
    ("x" for transverse-pinned spectator sites, "m" for the matter sublattice,
    "u"/"e" for the uniform / identity-pinned group sublattices).  ``None``
    means unlabelled (plain chain).
    """

    site_dims: tuple
    labels: tuple | None = None
    dense_cap: int = DEFAULT_DENSE_CAP

    def __post_init__(self):
        if any(d < 1 for d in self.site_dims):
            raise ValueError("site dimensions must be positive")
        if self.labels is not None and len(self.labels) != len(self.site_dims):
            raise ValueError("labels length does not match number of sites")

    @property
    def n_sites(self):
        return len(self.site_dims)

    @property
    def dim(self):
        return int(np.prod([int(d) for d in self.site_dims], dtype=object))

    def check_dense_ok(self):
        if self.dim > self.dense_cap:
            raise ValueError(
                f"dense object of dimension {self.dim} exceeds the cap "
                f"{self.dense_cap}")

    def sub_layout(self, sites):
        """Layout of a contiguous-or-not subset of sites (order preserved)."""
        labels = None if self.labels is None else tuple(self.labels[i] for i in sites)
        return ChainLayout(tuple(self.site_dims[i] for i in sites), labels,
                           self.dense_cap)


def chain_of_qubits(n, labels=None):
    return ChainLayout((2,) * n, labels)


def standard_cut(layout: ChainLayout) -> int:
    """Bond index b (cut between sites b and b+1, 0-indexed) for analysis.

    For labelled two-sublattice chains this is the bond nearest the middle
    whose left site is a spectator ("x"/"u") and whose right site is matter
    ("m"/"e"); the exactness of the bond channels requires that orientation.
    For unlabelled chains it is the middle bond.
    """
    n = layout.n_sites
    if layout.labels is None:
        return n // 2 - 1 if n % 2 == 0 else n // 2
    left_ok = {"x", "u"}
    right_ok = {"m", "e"}
    candidates = [b for b in range(n - 1)
                  if layout.labels[b] in left_ok and layout.labels[b + 1] in right_ok]
    if not candidates:
        raise ValueError("layout has no spectator|matter bond")
    mid = (n - 1) / 2.0
    return min(candidates, key=lambda b: abs(b + 0.5 - mid))


def embed_and_apply(ops, layout: ChainLayout, state: np.ndarray,
                    backend=None) -> np.ndarray:
    """Apply a sequence of placed local operators to a dense state.

    ``ops`` is an iterable of ``(op, sites)`` pairs applied in order (first
    entry acts first).  Sites may be non-adjacent; each operator's declared
    site dimensions must match the layout at its sites.
    """
    layout.check_dense_ok()
    psi = np.asarray(state, dtype=np.complex128).reshape(-1)
    if psi.size != layout.dim:
        raise ValueError("state size does not match layout")
    dims = list(layout.site_dims)
    for op, sites in ops:
        sites = list(sites)
        if tuple(layout.site_dims[s] for s in sites) != tuple(op.site_dims):
            raise ValueError(f"operator {op.name!r} does not fit sites {sites}")
        psi = kernels.apply_local(psi, op.mat, sites, dims, backend=backend)
    return psi


def embed_sparse(op: LocalOperator, sites, layout: ChainLayout) -> sp.csr_matrix:
    """Sparse matrix of a local operator embedded on the full chain."""
    layout.check_dense_ok()
    dims = list(layout.site_dims)
    toff, rest_dims, rest_strides = kernels._target_offsets(list(sites), dims)
    m = toff.size
    nrest = int(np.prod(rest_dims)) if len(rest_dims) else 1
    if len(rest_dims):
        grids = np.indices(tuple(rest_dims)).reshape(len(rest_dims), -1)
        base = (grids * rest_strides[:, None]).sum(axis=0)
    else:
        base = np.zeros(1, dtype=np.int64)
    rows = (base[:, None, None] + toff[None, :, None]).repeat(m, axis=2)
    cols = (base[:, None, None] + toff[None, None, :]).repeat(m, axis=1)
    data = np.broadcast_to(op.mat[None, :, :], (nrest, m, m))
    mat = sp.coo_matrix((data.reshape(-1),
                         (rows.reshape(-1), cols.reshape(-1))),
                        shape=(layout.dim, layout.dim))
    return mat.tocsr()


def product_state(layout: ChainLayout, kets) -> np.ndarray:
    """Dense product state from per-site kets (each normalized here)."""
    layout.check_dense_ok()
    if len(kets) != layout.n_sites:
        raise ValueError("need one ket per site")
    psi = np.array([1.0], dtype=complex)
    for d, ket in zip(layout.site_dims, kets):
        v = np.asarray(ket, dtype=complex).reshape(-1)
        if v.size != d:
            raise ValueError("ket dimension mismatch")
        v = v / np.linalg.norm(v)
        psi = np.kron(psi, v)
    return psi


def plus_ket():
    return np.array([1.0, 1.0]) / np.sqrt(2.0)


def basis_ket(d, k):
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return v


def uniform_ket(d):
    return np.ones(d, dtype=complex) / np.sqrt(d)
