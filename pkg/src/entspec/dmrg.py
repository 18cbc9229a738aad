"""Matrix-product operators and a two-site density-matrix renormalization
group solver for the ground states of chains too long for exact methods.

The MPO is assembled from the same term lists used by the dense builders via
a finite-state automaton: one passthrough state before a term starts, one
after it completes, and one state per unfinished term crossing a bond.  MPO
tensors have shape (Dl, d, d, Dr) with w[a, s, t, b] mapping ket index t to
bra index s.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .mps import MPS, random_mps, right_canonicalize

DENSE_EFF_CAP = 256


def mpo_from_terms(terms, site_dims):
    """Finite-state-machine MPO for a sum of product-operator terms."""
    n = len(site_dims)
    # states per bond: list of keys; key "I" = not started, "F" = finished
    bond_states = [["I", "F"] for _ in range(n + 1)]
    for tid, term in enumerate(terms):
        s0, s1 = term.sites[0], term.sites[-1]
        for b in range(s0 + 1, s1 + 1):  # bonds crossed while term is open
            bond_states[b].append((tid, b))
    index = [{k: i for i, k in enumerate(states)} for states in bond_states]
    tensors = []
    for i, d in enumerate(site_dims):
        dl, dr = len(bond_states[i]), len(bond_states[i + 1])
        w = np.zeros((dl, d, d, dr), dtype=complex)
        eye = np.eye(d)
        li, ri = index[i], index[i + 1]
        if "I" in ri:
            w[li["I"], :, :, ri["I"]] += eye
        w[li["F"], :, :, ri["F"]] += eye
        tensors.append(w)
    for tid, term in enumerate(terms):
        s0, s1 = term.sites[0], term.sites[-1]
        ops = {s: np.asarray(getattr(m, "mat", m), dtype=complex)
               for s, m in zip(term.sites, term.ops)}
        for i in range(s0, s1 + 1):
            d = site_dims[i]
            op = ops.get(i, np.eye(d))
            if i == s0:
                op = term.coeff * op
            src = index[i]["I"] if i == s0 else index[i][(tid, i)]
            dst = index[i + 1]["F"] if i == s1 else index[i + 1][(tid, i + 1)]
            tensors[i][src, :, :, dst] += op
    # boundary: single row "I" on the left, single column "F" on the right
    tensors[0] = tensors[0][index[0]["I"]:index[0]["I"] + 1]
    tensors[-1] = tensors[-1][:, :, :, index[n]["F"]:index[n]["F"] + 1]
    return tensors


def mpo_to_dense(mpo):
    """Dense matrix of an MPO (small systems, used for cross-checks)."""
    acc = mpo[0].transpose(0, 3, 1, 2)  # (Dl, Dr, d, d)
    for w in mpo[1:]:
        nxt = np.einsum("abst,bpqc->acsptq", acc, w, optimize=True)
        a, c = nxt.shape[0], nxt.shape[1]
        ds = nxt.shape[2] * nxt.shape[3]
        acc = nxt.reshape(a, c, ds, ds)
    return acc[0, 0]


def mpo_expectation(mps: MPS, mpo):
    """<psi|H|psi> for a normalized MPS."""
    env = np.ones((1, 1, 1), dtype=complex)
    for t, w in zip(mps.tensors, mpo):
        env = np.einsum("lam,lsx,astb,mty->xby", env, t.conj(), w, t,
                        optimize=True)
    return complex(env[0, 0, 0])


def _heff_apply(lenv, renv, w1, w2, theta):
    t = np.tensordot(lenv, theta, axes=(2, 0))            # (lb, a, s, t, r)
    t = np.tensordot(t, w1, axes=([1, 2], [0, 2]))        # (lb, t, r, s', b)
    t = np.tensordot(t, w2, axes=([4, 1], [0, 2]))        # (lb, r, s', t', c)
    t = np.tensordot(t, renv, axes=([4, 1], [1, 2]))      # (lb, s', t', rb)
    return t


def _update_left(lenv, a, w):
    t = np.tensordot(lenv, a, axes=(2, 0))                # (lb, m, s_in, r)
    t = np.tensordot(t, w, axes=([1, 2], [0, 2]))         # (lb, r, s_out, b)
    t = np.tensordot(t, a.conj(), axes=([0, 2], [0, 1]))  # (r, b, rb)
    return t.transpose(2, 1, 0)


def _update_right(renv, b, w):
    t = np.tensordot(b, renv, axes=(2, 2))                # (l, s_in, rb, c)
    t = np.tensordot(w, t, axes=([3, 2], [3, 1]))         # (a, s_out, l, rb)
    t = np.tensordot(b.conj(), t, axes=([1, 2], [1, 3]))  # (lb, a, l)
    return t


@dataclass
class DMRGResult:
    energy: float
    sweep_energies: list
    mps: MPS
    converged: bool
    max_truncation_error: float
    bond_dims: list = field(default_factory=list)


def dmrg_ground(terms, site_dims, chi_max=64, n_sweeps=10, tol=1e-9,
                seed=0, sv_floor=1e-12):
    """Two-site DMRG ground-state search for a term-list Hamiltonian."""
    mpo = mpo_from_terms(terms, site_dims)
    n = len(site_dims)
    mps = random_mps(site_dims, min(chi_max, 8), seed=seed)
    right_canonicalize(mps)
    # environments: lenvs[i] covers sites < i, renvs[i] covers sites > i
    lenvs = [None] * n
    renvs = [None] * n
    lenvs[0] = np.ones((1, 1, 1), dtype=complex)
    renvs[n - 1] = np.ones((1, 1, 1), dtype=complex)
    for i in range(n - 1, 1, -1):
        renvs[i - 1] = _update_right(renvs[i], mps.tensors[i], mpo[i])
    sweep_energies = []
    max_trunc = 0.0
    converged = False
    energy = np.inf
    for sweep in range(n_sweeps):
        order = list(range(n - 1)) + list(range(n - 2, -1, -1))
        for step, i in enumerate(order):
            going_right = step < n - 1
            t1, t2 = mps.tensors[i], mps.tensors[i + 1]
            theta = np.tensordot(t1, t2, axes=(2, 0))
            shape = theta.shape
            dim = theta.size
            lenv, renv = lenvs[i], renvs[i + 1]
            w1, w2 = mpo[i], mpo[i + 1]

            def matvec(x):
                th = x.reshape(shape)
                return _heff_apply(lenv, renv, w1, w2, th).reshape(-1)

            if dim <= DENSE_EFF_CAP:
                heff = np.zeros((dim, dim), dtype=complex)
                eye = np.eye(dim)
                for c in range(dim):
                    heff[:, c] = matvec(eye[c])
                evals, evecs = np.linalg.eigh(heff)
                e0 = float(evals[0])
                vec = evecs[:, 0]
            else:
                op = LinearOperator((dim, dim), matvec=matvec, dtype=complex)
                v0 = theta.reshape(-1)
                evals, evecs = eigsh(op, k=1, which="SA", v0=v0,
                                     maxiter=max(400, 10 * dim))
                e0 = float(evals[0])
                vec = evecs[:, 0]
            energy = e0
            cl, d1, d2, cr = shape
            u, s, vh = np.linalg.svd(vec.reshape(cl * d1, d2 * cr),
                                     full_matrices=False)
            keep = s > sv_floor * s[0]
            s_kept = s[keep][:chi_max]
            k = s_kept.size
            max_trunc = max(max_trunc, float((s[k:] ** 2).sum()))
            s_kept = s_kept / np.linalg.norm(s_kept)
            u = u[:, :k]
            vh = vh[:k]
            if going_right:
                mps.tensors[i] = u.reshape(cl, d1, k)
                mps.tensors[i + 1] = (s_kept[:, None] * vh).reshape(k, d2, cr)
                lenvs[i + 1] = _update_left(lenvs[i], mps.tensors[i], w1)
            else:
                mps.tensors[i] = (u * s_kept).reshape(cl, d1, k)
                mps.tensors[i + 1] = vh.reshape(k, d2, cr)
                renvs[i] = _update_right(renvs[i + 1], mps.tensors[i + 1], w2)
        sweep_energies.append(energy)
        if (sweep > 0 and abs(sweep_energies[-1] - sweep_energies[-2])
                < tol * max(1.0, abs(energy))):
            converged = True
            break
    return DMRGResult(energy=energy, sweep_energies=sweep_energies, mps=mps,
                      converged=converged, max_truncation_error=max_trunc,
                      bond_dims=mps.bond_dims())
