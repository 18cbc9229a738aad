"""Matrix-product states: canonical forms and entanglement data at a bond.

Tensors have shape (chi_left, d, chi_right).  A cut at ``bond`` b separates
sites 0..b from b+1..end, matching the cut convention used for dense states.
The channel-deformed bond spectrum applies Kraus operators to the first
site(s) of the right block and diagonalizes the resulting Gram matrix of
size (n_kraus · chi), so large chains never need dense vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

SV_FLOOR = 1e-14


@dataclass
class MPS:
    tensors: list

    @property
    def n_sites(self):
        return len(self.tensors)

    def bond_dims(self):
        return [t.shape[2] for t in self.tensors[:-1]]

    def site_dims(self):
        return tuple(t.shape[1] for t in self.tensors)

    def copy(self):
        return MPS([t.copy() for t in self.tensors])

    def to_dense(self, max_dim=2 ** 22):
        dim = prod(self.site_dims())
        if dim > max_dim:
            raise ValueError("state too large to densify")
        vec = self.tensors[0]
        for t in self.tensors[1:]:
            vec = np.tensordot(vec, t, axes=(vec.ndim - 1, 0))
        return vec.reshape(-1)

    def norm(self):
        e = np.ones((1, 1), dtype=complex)
        for t in self.tensors:
            e = np.einsum("ab,aic,bid->cd", e, t.conj(), t, optimize=True)
        return float(np.sqrt(abs(e[0, 0])))


def random_mps(site_dims, chi, seed=0):
    rng = np.random.default_rng(seed)
    n = len(site_dims)
    dims = [1]
    for i in range(1, n):
        # math.prod keeps exact (arbitrary-precision) integers; numpy would
        # overflow int64 beyond 63 qubits.
        dims.append(min(chi, prod(site_dims[:i]), prod(site_dims[i:])))
    dims.append(1)
    tensors = []
    for i, d in enumerate(site_dims):
        shape = (dims[i], d, dims[i + 1])
        tensors.append(rng.standard_normal(shape)
                       + 1j * rng.standard_normal(shape))
    mps = MPS(tensors)
    right_canonicalize(mps)
    return mps


def mps_from_state(state, site_dims, chi_max=None, floor=SV_FLOOR):
    """Exact MPS of a dense state via sequential singular value splits."""
    psi = np.asarray(state, dtype=complex).reshape(-1)
    tensors = []
    chi = 1
    rest = psi.reshape(1, -1)
    for i, d in enumerate(site_dims[:-1]):
        m = rest.reshape(chi * d, -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        keep = s > floor * s[0] if s.size else slice(0)
        u, s, vh = u[:, keep], s[keep], vh[keep]
        if chi_max is not None and s.size > chi_max:
            u, s, vh = u[:, :chi_max], s[:chi_max], vh[:chi_max]
        tensors.append(u.reshape(chi, d, -1))
        rest = (s[:, None] * vh)
        chi = s.size
    tensors.append(rest.reshape(chi, site_dims[-1], 1))
    return MPS(tensors)


def right_canonicalize(mps: MPS):
    """Bring every tensor to right-orthonormal form in place; drop the norm."""
    for i in range(mps.n_sites - 1, 0, -1):
        t = mps.tensors[i]
        cl, d, cr = t.shape
        q, r = np.linalg.qr(t.reshape(cl, d * cr).conj().T)
        k = q.shape[1]
        mps.tensors[i] = q.conj().T.reshape(k, d, cr)
        mps.tensors[i - 1] = np.tensordot(mps.tensors[i - 1], r.conj().T,
                                          axes=(2, 0))
    t0 = mps.tensors[0]
    nrm = np.linalg.norm(t0)
    if nrm > 0:
        mps.tensors[0] = t0 / nrm


def mixed_canonical(mps: MPS, bond: int):
    """Split as A_0..A_b · C · B_{b+1}.. with orthonormal A (left) and B.

    Returns (new MPS, C); the new MPS tensors hold the orthonormal frames
    only, so the physical state is A..A C B..B.
    """
    out = mps.copy()
    right_canonicalize(out)
    carry = np.eye(1, dtype=complex)
    for i in range(bond + 1):
        t = np.tensordot(carry, out.tensors[i], axes=(1, 0))
        cl, d, cr = t.shape
        q, r = np.linalg.qr(t.reshape(cl * d, cr))
        out.tensors[i] = q.reshape(cl, d, q.shape[1])
        carry = r
    return out, carry


def schmidt_values(mps: MPS, bond: int, floor=SV_FLOOR):
    _, c = mixed_canonical(mps, bond)
    s = np.linalg.svd(c, compute_uv=False)
    s = s[s > floor]
    return np.sort(s)[::-1]


def bond_rdm_spectrum(mps: MPS, bond: int, floor=SV_FLOOR):
    """Eigenvalues of the reduced density matrix across a bond, descending."""
    s = schmidt_values(mps, bond, floor=np.sqrt(floor))
    lam = s ** 2
    return lam[lam > floor]


def bond_entropy(mps: MPS, bond: int):
    lam = bond_rdm_spectrum(mps, bond)
    lam = lam / lam.sum()
    return float(-(lam * np.log(lam)).sum())


def bond_channel_spectrum(mps: MPS, bond: int, kraus, n_support=1,
                          floor=SV_FLOOR):
    """Spectrum of the right-block state after Kraus operators at the cut.

    ``kraus`` are matrices on the merged physical space of sites
    bond+1 .. bond+n_support.  The nonzero eigenvalues of
    Σ_k K ρ_B K† equal those of the Gram matrix G[(kα),(k'β)] =
    [C N_{kk'} C†]_{αβ} with N built from the right-orthonormal block
    tensor, so the cost is independent of the chain length.
    """
    canon, c = mixed_canonical(mps, bond)
    blk = canon.tensors[bond + 1]
    for i in range(bond + 2, bond + 1 + n_support):
        nxt = canon.tensors[i]
        cl, d1, _ = blk.shape
        _, d2, cr = nxt.shape
        blk = np.tensordot(blk, nxt, axes=(2, 0)).reshape(cl, d1 * d2, cr)
    nk = len(kraus)
    chi = c.shape[0]
    gram = np.zeros((nk * chi, nk * chi), dtype=complex)
    for i, ki in enumerate(kraus):
        for j, kj in enumerate(kraus):
            m = ki.conj().T @ kj
            nmat = np.einsum("asg,st,btg->ab", blk, m, blk.conj(),
                             optimize=True)
            gram[i * chi:(i + 1) * chi, j * chi:(j + 1) * chi] = c @ nmat @ c.conj().T
    w = np.linalg.eigvalsh(gram)
    w = np.clip(w.real, 0.0, None)
    w = w[w > floor]
    return np.sort(w)[::-1]


def save_mps(mps: MPS, path):
    """Write the site tensors to an ``.npz`` container.

    Each tensor is stored as a named array, so shapes and dtypes travel
    with the file and ``load_mps`` needs no side information.
    """
    arrays = {f"site_{i:05d}": np.asarray(t) for i, t in enumerate(mps.tensors)}
    np.savez_compressed(path, **arrays)


def load_mps(path) -> MPS:
    """Read an MPS written by :func:`save_mps`."""
    with np.load(path) as data:
        names = sorted(data.files)
        if not names:
            raise ValueError("container holds no site tensors")
        tensors = [np.ascontiguousarray(data[name]) for name in names]
    return MPS(tensors)
