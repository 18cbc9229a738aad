"""Quantum channels acting at an entanglement cut.

Channels are stored as Kraus operators on their minimal support (one or two
sites) and promoted to a block of the chain only when applied.  Constructors
cover the bond dephasing channel, unitary rotation channels, their
compositions, the group-averaging channels, the clock-basis projector and
half-dephasing channels, a reset (trace-out) channel, and the factorized
channel of the coupled S3 chain.

Also here: the remix of commuting Kraus sets into orthogonal projectors, the
direct-vs-channel residual report, Uhlmann fidelity, and the isometric
dilation that purifies a channel with one ancilla site.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import GroupSpec, builtin_group, irrep_projector
from .sites import ChainLayout, LocalOperator, clock_ops, embed_sparse, pauli_op, xrot_gate


class ChannelRemixError(ValueError):
    pass


@dataclass(frozen=True)
class KrausChannel:
    """Σ_k K ρ K† with Kraus operators on an explicit site support.

    ``sites`` are absolute chain positions; ``site_dims`` their dimensions.
    ``domain`` optionally restricts trace preservation to a subspace
    projector (for dimension-raising embeddings of sector-reduced channels).
    """

    name: str
    kraus: tuple
    sites: tuple
    site_dims: tuple
    domain: np.ndarray | None = None

    def __post_init__(self):
        m = int(np.prod(self.site_dims))
        for k in self.kraus:
            if k.shape != (m, m):
                raise ValueError("Kraus operator shape mismatch")
        s = sum(k.conj().T @ k for k in self.kraus)
        target = np.eye(m) if self.domain is None else self.domain
        lhs = s if self.domain is None else self.domain @ s @ self.domain
        if np.linalg.norm(lhs - target) > 1e-10 * m:
            raise ValueError(f"channel {self.name!r} is not trace preserving")

    @property
    def n_kraus(self):
        return len(self.kraus)

    def local_dim(self):
        return int(np.prod(self.site_dims))


def build_channel(kind: str, sites, *, theta: float = np.pi / 4, q: int = 2,
                  p: int = 1, group: str = "", site_dim: int = 2) -> KrausChannel:
    """Construct a named channel at the given absolute sites.

    kinds: "dephase", "xrot", "n1", "n2", "n3", "pair_xz", "group_power",
    "clock_fourier", "clock_parity", "reset", "s3_reduced".
    """
    sites = tuple(int(s) for s in sites)
    if kind in ("dephase", "n1"):
        (s,) = sites
        z = pauli_op("Z").mat
        return KrausChannel("dephase", (np.eye(2) / np.sqrt(2), z / np.sqrt(2)),
                            (s,), (2,))
    if kind == "xrot":
        (s,) = sites
        return KrausChannel(f"xrot({theta})", (xrot_gate(theta).mat,), (s,), (2,))
    if kind == "n2":
        (s,) = sites
        return compose(build_channel("dephase", (s,)),
                       build_channel("xrot", (s,), theta=theta))
    if kind == "pair_xz":
        s0, s1 = sites
        xz = np.kron(pauli_op("X").mat, pauli_op("Z").mat)
        eye = np.eye(4)
        return KrausChannel("pair_xz", ((eye + xz) / 2, (eye - xz) / 2),
                            (s0, s1), (2, 2))
    if kind == "n3":
        s0, s1 = sites
        return compose(build_channel("pair_xz", (s0, s1)),
                       build_channel("dephase", (s0,)))
    if kind == "group_power":
        (s,) = sites
        g = builtin_group(group)
        n = g.order
        kraus = []
        from .groups import regular_rep
        for a in range(n):
            ap = g.power(a, p)
            kraus.append(regular_rep(g, ap, "left", "X").mat / np.sqrt(n))
        return KrausChannel(f"group_power[{group},{p}]", tuple(kraus), (s,), (n,))
    if kind == "clock_fourier":
        (s,) = sites
        om = np.exp(2j * np.pi / q)
        kraus = []
        for pp in range(q):
            ket = om ** (pp * np.arange(q)) / np.sqrt(q)
            kraus.append(np.outer(ket, ket.conj()))
        return KrausChannel(f"clock_fourier[{q}]", tuple(kraus), (s,), (q,))
    if kind == "clock_dephase":
        # remix of the phase-power Kraus set {Ẑ^p/√q}
        (s,) = sites
        eye = np.eye(q, dtype=complex)
        kraus = tuple(np.outer(eye[:, j], eye[:, j]) for j in range(q))
        return KrausChannel(f"clock_dephase[{q}]", kraus, (s,), (q,))
    if kind == "clock_parity":
        (s,) = sites
        if q % 2:
            raise ValueError("clock parity dephasing needs even q")
        z, _ = clock_ops(q)
        zh = np.linalg.matrix_power(z.mat, q // 2)
        eye = np.eye(q)
        return KrausChannel(f"clock_parity[{q}]",
                            ((eye + zh) / 2, (eye - zh) / 2), (s,), (q,))
    if kind == "reset":
        (s,) = sites
        d = site_dim
        kraus = tuple(np.outer(np.eye(d)[:, 0], np.eye(d)[:, k])
                      for k in range(d))
        return KrausChannel("reset", kraus, (s,), (d,))
    if kind == "s3_reduced":
        (s,) = sites
        om = np.exp(2j * np.pi / 3)
        kraus = []
        basis2 = np.eye(2)
        for a in range(2):
            for pp in range(3):
                ket = om ** (pp * np.arange(3)) / np.sqrt(3)
                proj = np.outer(ket, ket.conj())
                k2 = np.outer(basis2[:, a], basis2[:, 0])
                kraus.append(np.kron(k2, proj) / np.sqrt(2))
        dom = np.kron(np.diag([1.0, 0.0]), np.eye(3))
        return KrausChannel("s3_reduced", tuple(kraus), (s,), (6,), domain=dom)
    raise ValueError(f"unknown channel kind {kind!r}")


def compose(after: KrausChannel, before: KrausChannel) -> KrausChannel:
    """Channel composition after∘before (``before`` acts first)."""
    union = tuple(sorted(set(after.sites) | set(before.sites)))
    dims = {}
    for ch in (before, after):
        for s, d in zip(ch.sites, ch.site_dims):
            dims[s] = d
    udims = tuple(dims[s] for s in union)
    ka = [_promote(k, after.sites, union, dims) for k in after.kraus]
    kb = [_promote(k, before.sites, union, dims) for k in before.kraus]
    kraus = tuple(a @ b for a in ka for b in kb)
    return KrausChannel(f"{after.name}∘{before.name}", kraus, union, udims)


def _promote(k, sites, union, dims):
    """Embed a Kraus matrix from its own support into a site union."""
    layout = ChainLayout(tuple(dims[s] for s in union))
    local = tuple(union.index(s) for s in sites)
    op = LocalOperator(k, tuple(dims[s] for s in sites))
    return embed_sparse(op, local, layout).toarray()


def promote_to_block(ch: KrausChannel, block_sites, block_dims):
    """Dense Kraus operators of the channel embedded in a block of sites."""
    layout = ChainLayout(tuple(block_dims))
    pos = {s: i for i, s in enumerate(block_sites)}
    local = tuple(pos[s] for s in ch.sites)
    out = []
    for k in ch.kraus:
        op = LocalOperator(k, ch.site_dims)
        out.append(embed_sparse(op, local, layout).toarray())
    return out


def apply_channel(ch: KrausChannel, rho: np.ndarray, block_sites,
                  block_dims) -> np.ndarray:
    """Σ_k K ρ K† with the channel promoted to the block carrying ρ."""
    ks = promote_to_block(ch, block_sites, block_dims)
    out = np.zeros_like(rho, dtype=complex)
    for k in ks:
        out += k @ rho @ k.conj().T
    return out


def check_completely_positive(ch: KrausChannel, n_samples=100, seed=7):
    """Kraus form is CP by construction; verify PSD outputs numerically."""
    rng = np.random.default_rng(seed)
    m = ch.local_dim()
    worst = 0.0
    for _ in range(n_samples):
        a = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        out = sum(k @ rho @ k.conj().T for k in ch.kraus)
        wmin = float(np.linalg.eigvalsh(out).min())
        worst = min(worst, wmin)
    return worst


def remix_to_projectors(ch: KrausChannel, tol=1e-10, seed=11):
    """Rewrite a commuting Kraus set as orthogonal projectors.

    Returns (projector channel, remix unitary W) with P_j = Σ_i W_ji K_i.
    Raises ChannelRemixError when the Kraus operators do not commute, are not
    normal, or the joint-eigenbasis columns fail to be orthogonal (then no
    projector form exists).
    """
    ks = [np.asarray(k, dtype=complex) for k in ch.kraus]
    m = ks[0].shape[0]
    for i, a in enumerate(ks):
        if np.linalg.norm(a @ a.conj().T - a.conj().T @ a) > tol * m:
            raise ChannelRemixError(f"Kraus operator {i} is not normal")
        for b in ks[i + 1:]:
            if np.linalg.norm(a @ b - b @ a) > tol * m:
                raise ChannelRemixError("Kraus operators do not commute")
    rng = np.random.default_rng(seed)
    v = None
    for _ in range(4):
        coeffs = rng.standard_normal(len(ks)) + 1j * rng.standard_normal(len(ks))
        h = sum(c * k + np.conj(c) * k.conj().T for c, k in zip(coeffs, ks))
        _, cand = np.linalg.eigh(h)
        offdiag = 0.0
        for k in ks:
            d = cand.conj().T @ k @ cand
            offdiag = max(offdiag, float(np.abs(d - np.diag(np.diag(d))).max()))
        if offdiag < 1e3 * tol:
            v = cand
            break
    if v is None:
        raise ChannelRemixError("failed to construct a joint eigenbasis")
    evals = np.array([np.diag(v.conj().T @ k @ v) for k in ks])  # (n_kraus, m)
    # group columns with identical joint eigenvalue vectors
    groups = []
    assigned = np.full(m, -1)
    for c in range(m):
        for gi, rep in enumerate(groups):
            if np.linalg.norm(evals[:, c] - evals[:, rep[0]]) < 1e-8:
                rep.append(c)
                assigned[c] = gi
                break
        else:
            groups.append([c])
            assigned[c] = len(groups) - 1
    dmat = np.array([evals[:, g[0]] for g in groups]).T  # (n_kraus, n_groups)
    gram = dmat.conj().T @ dmat
    if np.linalg.norm(gram - np.eye(len(groups))) > 1e-8:
        raise ChannelRemixError(
            "joint eigenvalue columns are not orthonormal; "
            "no projector remix exists")
    w = dmat.conj().T
    if w.shape[0] < len(ks):  # complete to a unitary; extra rows map to zero
        q, _ = np.linalg.qr(np.concatenate(
            [w.conj().T, rng.standard_normal((len(ks), len(ks) - w.shape[0]))],
            axis=1))
        w = q.conj().T
        w[:dmat.shape[1]] = dmat.conj().T
    projs = []
    for g in groups:
        pj = np.zeros((m, m), dtype=complex)
        for c in g:
            pj += np.outer(v[:, c], v[:, c].conj())
        projs.append(pj)
    out = KrausChannel(ch.name + "|projectors", tuple(projs), ch.sites,
                       ch.site_dims, domain=ch.domain)
    return out, w


def group_fourier_channel(group_name: str, site: int,
                          side: str = "left") -> KrausChannel:
    """Projector-type remix of the full group-averaging channel.

    Kraus operators are the irrep-resolved combinations P^[Γ]_{αβ}/√|G|; the
    remix matrix Γ_{αβ}(g)·sqrt(d/|G|) is unitary by great orthogonality, so
    this represents the same channel as uniform group multiplication.
    """
    g = builtin_group(group_name)
    n = g.order
    kraus = []
    for nm, mats in g.irreps.items():
        d = mats.shape[1]
        for a in range(d):
            for b in range(d):
                kraus.append(irrep_projector(g, nm, a, b, side=side).mat
                             / np.sqrt(n))
    return KrausChannel(f"group_fourier[{group_name}]", tuple(kraus),
                        (site,), (n,))


@dataclass
class VarsigmaReport:
    """Residual between an aligned direct reduced state and a channel state."""

    varsigma: np.ndarray
    trace: complex
    frob_norm: float
    fidelity: float

    @staticmethod
    def compute(rho_direct, rho_channel):
        vs = rho_direct - rho_channel
        return VarsigmaReport(vs, complex(np.trace(vs)),
                              float(np.linalg.norm(vs)),
                              state_fidelity(rho_channel, rho_direct))


def state_fidelity(rho, sigma):
    """Uhlmann fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)), clamped at 0."""
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    sq = (v * np.sqrt(w)) @ v.conj().T
    inner = sq @ sigma @ sq
    ev = np.linalg.eigvalsh(inner)
    return float(np.sum(np.sqrt(np.clip(ev, 0.0, None))))


def stinespring_dilate(ch: KrausChannel, state, layout: ChainLayout,
                       ancilla_dim=None):
    """Isometric dilation |Φ> = Σ_k |k>_anc ⊗ K_k |ψ> with a fresh ancilla.

    The ancilla becomes site 0 of the returned layout (original sites shift
    by one).  Tracing out the ancilla together with the left block reproduces
    the channel output exactly; for the bond dephasing channel this is the
    familiar |+> ancilla coupled by a controlled-Z, written in the rotated
    ancilla basis.
    """
    m = ch.n_kraus
    adim = m if ancilla_dim is None else int(ancilla_dim)
    if adim < m:
        raise ValueError("ancilla dimension must be at least the Kraus count")
    psi = np.asarray(state, dtype=complex).reshape(-1)
    out = np.zeros((adim, psi.size), dtype=complex)
    for k, kmat in enumerate(ch.kraus):
        op = LocalOperator(kmat, ch.site_dims)
        kpsi = embed_sparse(op, ch.sites, layout) @ psi
        out[k] = kpsi
    new_layout = ChainLayout((adim,) + tuple(layout.site_dims),
                             None if layout.labels is None
                             else ("anc",) + tuple(layout.labels))
    return out.reshape(-1), new_layout
