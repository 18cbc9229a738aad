"""Ground-state solvers for catalog Hamiltonians.

Dense diagonalization for small chains, an ARPACK Lanczos path (implicitly
restarted, hence reorthogonalized) for larger ones, and a helper to pick the
symmetric state out of a degenerate multiplet.  Both solvers are deterministic
for a fixed seed: the Lanczos start vector is drawn from a seeded generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

DENSE_DIM_CAP = 2 ** 12
ITERATIVE_DIM_CAP = 2 ** 24


@dataclass
class SolverReport:
    method: str
    energies: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool
    degenerate: list = field(default_factory=list)

    @property
    def energy(self):
        return float(self.energies[0])


def dense_ground(h, k=1):
    """Lowest k eigenpairs by full Hermitian diagonalization (dim <= 2^12)."""
    if h.dim > DENSE_DIM_CAP:
        raise ValueError(f"dense solver limited to dim {DENSE_DIM_CAP}, got {h.dim}")
    mat = h.dense(cap=DENSE_DIM_CAP)
    w, v = np.linalg.eigh(mat)
    energies = w[:k]
    vecs = [np.ascontiguousarray(v[:, i]) for i in range(k)]
    res = np.array([np.linalg.norm(mat @ vecs[i] - energies[i] * vecs[i])
                    for i in range(k)])
    report = SolverReport("dense", energies.copy(), res, iterations=1,
                          converged=True, degenerate=_degenerate_groups(energies))
    return energies, vecs, report


def lanczos_ground(h, k=1, tol=0.0, max_iter=None, seed=0):
    """Lowest k eigenpairs via ARPACK's restarted Lanczos.

    The start vector is drawn from numpy's default generator with the given
    seed, which makes repeated runs bitwise reproducible.
    """
    dim = h.dim
    if dim > ITERATIVE_DIM_CAP:
        raise ValueError(f"iterative solver limited to dim {ITERATIVE_DIM_CAP}")
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v0 /= np.linalg.norm(v0)
    op = spla.LinearOperator((dim, dim), matvec=h.matvec, dtype=complex)
    w, v = spla.eigsh(op, k=k, which="SA", v0=v0, tol=tol, maxiter=max_iter)
    order = np.argsort(w)
    w = w[order]
    vecs = [np.ascontiguousarray(v[:, i]) for i in order]
    res = np.array([np.linalg.norm(h.matvec(vecs[i]) - w[i] * vecs[i])
                    for i in range(k)])
    report = SolverReport("lanczos", w.copy(), res, iterations=-1,
                          converged=bool(np.all(res < max(tol, 1e-6) * max(1.0, abs(w[0])) + 1e-8)),
                          degenerate=_degenerate_groups(w))
    return w, vecs, report


def _degenerate_groups(energies, tol=1e-8):
    groups = []
    cur = [0]
    for i in range(1, len(energies)):
        if energies[i] - energies[cur[0]] < tol:
            cur.append(i)
        else:
            if len(cur) > 1:
                groups.append(tuple(cur))
            cur = [i]
    if len(cur) > 1:
        groups.append(tuple(cur))
    return groups


def select_symmetric_ground(states, generator, layout, eigval=1.0, tol=1e-6):
    """Combination of (quasi-)degenerate states with symmetry eigenvalue +1.

    ``states`` spans an invariant subspace of the product-operator symmetry;
    the symmetry is diagonalized inside the span and the eigenvector closest
    to ``eigval`` (within ``tol``) is returned as a normalized state.
    """
    basis = np.array([np.asarray(s).reshape(-1) for s in states]).T
    q, _ = np.linalg.qr(basis)
    gq = np.array([generator.apply(q[:, i], layout) for i in range(q.shape[1])]).T
    m = q.conj().T @ gq
    w, v = np.linalg.eig(m)
    idx = int(np.argmin(np.abs(w - eigval)))
    if abs(w[idx] - eigval) > tol:
        raise ValueError(
            f"no state with symmetry eigenvalue {eigval} in span "
            f"(closest: {w[idx]:.6f})")
    out = q @ v[:, idx]
    return out / np.linalg.norm(out)


def ground_state(h, k=1, seed=0):
    """Dense or Lanczos ground-state solve, chosen by Hilbert dimension."""
    if h.dim <= DENSE_DIM_CAP:
        return dense_ground(h, k=k)
    return lanczos_ground(h, k=k, seed=seed)
