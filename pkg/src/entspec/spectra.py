"""Entanglement spectra: reduced density matrices, rescaling to scaling
dimensions, level clustering, symmetry-sector labels, and table export.

Conventions
-----------
A cut after site ``b`` (0-indexed) splits the chain into A = sites 0..b and
B = sites b+1..end.  Entanglement energies are ε = −ln λ of the reduced
density matrix eigenvalues; the spectrum is reported for the *right* block B
unless stated otherwise.  Rescaled spectra pin the lowest level to the ground
scaling dimension and normalize the gap to the first distinct level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sites import ChainLayout, LocalOperator, embed_sparse

SPECTRUM_FLOOR = 1e-14


def rdm_right(state, layout: ChainLayout, cut: int) -> np.ndarray:
    """Reduced density matrix of sites cut+1..end of a pure state."""
    da = int(np.prod(layout.site_dims[:cut + 1]))
    db = layout.dim // da
    m = np.asarray(state, dtype=complex).reshape(da, db)
    return m.T @ m.conj()


def rdm_left(state, layout: ChainLayout, cut: int) -> np.ndarray:
    da = int(np.prod(layout.site_dims[:cut + 1]))
    db = layout.dim // da
    m = np.asarray(state, dtype=complex).reshape(da, db)
    return m @ m.conj().T


def rdm_keep(state, layout: ChainLayout, keep) -> np.ndarray:
    """Reduced density matrix on an arbitrary subset of sites (kept order)."""
    keep = tuple(keep)
    n = layout.n_sites
    rest = tuple(i for i in range(n) if i not in keep)
    psi = np.asarray(state, dtype=complex).reshape(layout.site_dims)
    perm = keep + rest
    dk = int(np.prod([layout.site_dims[i] for i in keep])) if keep else 1
    m = psi.transpose(perm).reshape(dk, -1)
    return m @ m.conj().T


def entanglement_spectrum(rho, floor=SPECTRUM_FLOOR):
    """Eigenvalues of a density matrix, descending, clipped at a floor."""
    w = np.linalg.eigvalsh(rho)
    w = np.clip(w.real, 0.0, None)
    w = w[w > floor]
    return np.sort(w)[::-1]


def entanglement_energies(rho, floor=SPECTRUM_FLOOR):
    return -np.log(entanglement_spectrum(rho, floor))


def entanglement_entropy(rho, floor=SPECTRUM_FLOOR):
    w = entanglement_spectrum(rho, floor)
    return float(-(w * np.log(w)).sum())


def rescale_energies(eps, delta0, delta1, tol=1e-9):
    """Affine map of entanglement energies onto scaling dimensions.

    The lowest level is sent to delta0 and the first strictly higher level to
    delta1: Δ_i = (ε_i − ε_0)(Δ_1 − Δ_0)/(ε_1 − ε_0) + Δ_0.
    """
    eps = np.sort(np.asarray(eps, dtype=float))
    e0 = eps[0]
    higher = eps[eps > e0 + tol]
    if higher.size == 0:
        raise ValueError("spectrum has no second distinct level to pin")
    e1 = higher[0]
    return (eps - e0) * (delta1 - delta0) / (e1 - e0) + delta0


@dataclass(frozen=True)
class Level:
    value: float
    multiplicity: int


def cluster_levels(values, tol=5e-2):
    """Greedy clustering of sorted values into (value, multiplicity) levels.

    A new cluster opens when a value exceeds the cluster anchor (its first
    element) by more than ``tol``; the reported value is the cluster mean.
    """
    vals = np.sort(np.asarray(values, dtype=float))
    levels = []
    if vals.size == 0:
        return levels
    anchor = vals[0]
    bucket = [vals[0]]
    for v in vals[1:]:
        if v - anchor <= tol:
            bucket.append(v)
        else:
            levels.append(Level(float(np.mean(bucket)), len(bucket)))
            anchor = v
            bucket = [v]
    levels.append(Level(float(np.mean(bucket)), len(bucket)))
    return levels


def degeneracy_multiple(spectrum, k, rel_tol=1e-10):
    """Check that density-matrix eigenvalues come in groups of a multiple of k.

    Pairs (or q-tuples) are matched greedily on the sorted spectrum with a
    relative tolerance; returns the largest relative mismatch encountered.
    """
    w = np.sort(np.asarray(spectrum, dtype=float))[::-1]
    if w.size % k:
        return np.inf
    worst = 0.0
    for i in range(0, w.size, k):
        blk = w[i:i + k]
        spread = (blk.max() - blk.min()) / max(blk.max(), SPECTRUM_FLOOR)
        worst = max(worst, float(spread))
    return worst


def sector_labels(rho, op: np.ndarray, tol=1e-8):
    """Label density-matrix eigenvectors by eigenvalues of a commuting op.

    ``op`` must be normal and commute with ρ (checked); returns
    (eigenvalues of ρ descending, label per eigenvector) with labels the
    op eigenvalues rounded to the op's exact spectrum.
    """
    m = rho.shape[0]
    if np.linalg.norm(rho @ op - op @ rho) > tol * max(1.0, np.linalg.norm(rho)):
        raise ValueError("operator does not commute with the density matrix")
    if np.linalg.norm(op @ op.conj().T - op.conj().T @ op) > tol * m:
        raise ValueError("labelling operator must be normal")
    herm = np.linalg.norm(op - op.conj().T) < tol * m
    # simultaneous diagonalization via perturbed Hermitian combination
    rng = np.random.default_rng(3)
    for _ in range(4):
        c = rng.standard_normal() + 1j * rng.standard_normal()
        h = rho + 1e-3 * (c * op + np.conj(c) * op.conj().T)
        _, v = np.linalg.eigh(h)
        dr = v.conj().T @ rho @ v
        do = v.conj().T @ op @ v
        if (np.abs(dr - np.diag(np.diag(dr))).max() < 1e-7
                and np.abs(do - np.diag(np.diag(do))).max() < 1e-7):
            break
    else:
        raise ValueError("failed to jointly diagonalize state and label op")
    lam = np.diag(dr).real
    labels = np.diag(do)
    if herm:
        labels = labels.real
    order = np.argsort(lam)[::-1]
    return lam[order], labels[order]


def projective_phase(g1: np.ndarray, g2: np.ndarray, tol=1e-8):
    """Commutation phase ω with g1 g2 = ω g2 g1 for restricted symmetries."""
    lhs = g1 @ g2
    rhs = g2 @ g1
    num = np.vdot(rhs, lhs)
    den = np.vdot(rhs, rhs)
    if abs(den) < tol:
        raise ValueError("degenerate operators")
    omega = num / den
    if np.linalg.norm(lhs - omega * rhs) > tol * np.linalg.norm(lhs):
        raise ValueError("operators are not proportional under commutation")
    return complex(omega)


def block_operator(factors, layout: ChainLayout, cut: int) -> np.ndarray:
    """Dense operator on the right block B from (site, matrix) factors.

    All sites must lie strictly beyond the cut.
    """
    bsites = list(range(cut + 1, layout.n_sites))
    bl = layout.sub_layout(bsites)
    out = None
    for site, mat in factors:
        if site <= cut:
            raise ValueError("factor acts outside the right block")
        op = LocalOperator(np.asarray(mat, dtype=complex),
                           (layout.site_dims[site],))
        dense = embed_sparse(op, (site - cut - 1,), bl).toarray()
        out = dense if out is None else dense @ out
    if out is None:
        out = np.eye(bl.dim, dtype=complex)
    return out


def gates_in_block(circuit, cut: int):
    """Gates of a circuit supported entirely on sites > cut, in order."""
    kept = []
    for op, sites in circuit.gates:
        if min(sites) > cut:
            kept.append((op, tuple(s - cut - 1 for s in sites)))
    return kept


def aligned_direct_rdm(state, layout: ChainLayout, cut: int, circuit,
                       skip_sites=()):
    """Right-block reduced density matrix rotated back by block-local gates.

    The gates of ``circuit`` acting entirely inside B (optionally excluding
    those supported entirely on ``skip_sites``) form a block unitary V;
    returns V† ρ_B V, which lives in the same frame as the corresponding
    channel output.
    """
    rho = rdm_right(state, layout, cut)
    bsites = list(range(cut + 1, layout.n_sites))
    bl = layout.sub_layout(bsites)
    v = np.eye(bl.dim, dtype=complex)
    for op, sites in gates_in_block(circuit, cut):
        if all(s + cut + 1 in skip_sites for s in sites):
            continue
        dense = embed_sparse(op, sites, bl).toarray()
        v = dense @ v
    return v.conj().T @ rho @ v


def best_gauge(rho, target, gauges):
    """Pick the single-site gauge minimizing ‖g† ρ g − target‖_F.

    ``gauges`` is an iterable of (description, dense block matrix); the
    identity is always tried first.  Returns (rho_aligned, description).
    """
    best = (np.linalg.norm(rho - target), rho, "identity")
    for desc, g in gauges:
        r = g.conj().T @ rho @ g
        d = np.linalg.norm(r - target)
        if d < best[0]:
            best = (d, r, desc)
    return best[1], best[2]


def spectrum_rows(spectrum, *, delta0=None, delta1=None, labels=None,
                  source=""):
    """Rows (index, lambda, epsilon, delta, multiplicity, label, source).

    ``delta`` is blank unless both anchors are given; multiplicities come
    from exact-degeneracy grouping at relative tolerance 1e-10.
    """
    lam = np.sort(np.asarray(spectrum, dtype=float))[::-1]
    eps = -np.log(lam)
    if delta0 is not None and delta1 is not None:
        deltas = rescale_energies(eps, delta0, delta1)
        deltas = np.sort(deltas)
    else:
        deltas = [None] * lam.size
    mult = np.ones(lam.size, dtype=int)
    i = 0
    while i < lam.size:
        j = i
        while (j + 1 < lam.size
               and abs(lam[j + 1] - lam[i]) <= 1e-10 * max(lam[i], 1e-300)):
            j += 1
        mult[i:j + 1] = j - i + 1
        i = j + 1
    rows = []
    for i in range(lam.size):
        lab = "" if labels is None else labels[i]
        rows.append((i, float(lam[i]), float(eps[i]),
                     None if deltas[i] is None else float(deltas[i]),
                     int(mult[i]), lab, source))
    return rows


def format_spectrum_table(rows):
    """Fixed-format text table; identical inputs yield identical bytes."""
    out = ["# index  lambda  epsilon  delta  multiplicity  sector  source"]
    for idx, lam, eps, delta, mult, lab, src in rows:
        dtxt = "-" if delta is None else f"{delta:.12e}"
        if isinstance(lab, complex):
            lab = f"{lab.real:+.6f}{lab.imag:+.6f}j"
        elif isinstance(lab, float):
            lab = f"{lab:+.6f}"
        out.append(f"{idx:6d}  {lam:.12e}  {eps:.12e}  {dtxt}  "
                   f"{mult:3d}  {lab!s:>14}  {src}")
    return "\n".join(out) + "\n"
