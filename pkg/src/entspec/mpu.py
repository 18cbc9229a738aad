"""Matrix-product unitaries: constructors, blocking, standard form, index.

An MPU is stored as a single translation-invariant bulk tensor
T[a, b, t, s] (left bond, right bond, output, input); on a ring of n sites
the operator is the trace over bonds of the tensor product.

The standard form factorizes a (blocked) tensor through two reshapes:
``M_r`` groups (a,t)|(b,s) and ``M_l`` groups (a,s)|(b,t).  Their ranks
(r, l) satisfy r·l = d² exactly when the tensor is simple; then the MPU
equals a two-layer brickwork of gates u: ℂ^d⊗ℂ^d → ℂ^r⊗ℂ^l and
u′: ℂ^l⊗ℂ^r → ℂ^d⊗ℂ^d on shifted pairs, and the index ½·ln(r/l) is a
discrete invariant (−ln 2 for translation of qubits, 0 for any finite-depth
circuit, additive under stacking).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RANK_TOL = 1e-10


class StandardFormError(ValueError):
    pass


@dataclass(frozen=True)
class MPUTensor:
    """Bulk tensor T[a, b, t, s] of a translation-invariant MPU."""

    tensor: np.ndarray
    name: str = ""

    def __post_init__(self):
        if self.tensor.ndim != 4 or self.tensor.shape[0] != self.tensor.shape[1]:
            raise ValueError("bulk tensor must be (chi, chi, d, d)")

    @property
    def bond_dim(self):
        return self.tensor.shape[0]

    @property
    def phys_dim(self):
        return self.tensor.shape[2]


def mpu_to_dense_ring(mpu: MPUTensor, n: int) -> np.ndarray:
    """Dense operator tr[T ... T] on a ring of n sites."""
    t = mpu.tensor
    acc = t.transpose(0, 1, 2, 3)  # (a, b, t, s)
    for _ in range(n - 1):
        acc = np.einsum("abts,bcuv->actusv", acc, t, optimize=True)
        a, c = acc.shape[0], acc.shape[1]
        dd = acc.shape[2] * acc.shape[3]
        acc = acc.reshape(a, c, dd, dd)
    return np.trace(acc, axis1=0, axis2=1)


def block_mpu(mpu: MPUTensor, k: int) -> MPUTensor:
    """Merge k consecutive sites into one (physical dimension d^k)."""
    t = mpu.tensor
    acc = t
    for _ in range(k - 1):
        acc = np.einsum("abts,bcuv->actusv", acc, t, optimize=True)
        a, c = acc.shape[0], acc.shape[1]
        dd = acc.shape[2] * acc.shape[3]
        acc = acc.reshape(a, c, dd, dd)
    return MPUTensor(acc, name=f"{mpu.name}^[{k}]" if mpu.name else "")


def compose_mpu(outer: MPUTensor, inner: MPUTensor) -> MPUTensor:
    """Tensor of the product operator outer·inner (inner acts first)."""
    a = outer.tensor
    b = inner.tensor
    t = np.einsum("abtm,cdms->acbdts", a, b, optimize=True)
    chi = a.shape[0] * b.shape[0]
    d = a.shape[2]
    return MPUTensor(t.reshape(chi, chi, d, d),
                     name=f"{outer.name}·{inner.name}".strip("·"))


def stack_mpu(top: MPUTensor, bottom: MPUTensor) -> MPUTensor:
    """MPU acting on a doubled local space as top ⊗ bottom (stacked chains)."""
    a, b = top.tensor, bottom.tensor
    t = np.einsum("abts,cduv->acbdtusv", a, b, optimize=True)
    chi = a.shape[0] * b.shape[0]
    d = a.shape[2] * b.shape[2]
    return MPUTensor(t.reshape(chi, chi, d, d))


def translation_mpu(d: int) -> MPUTensor:
    """Right-shift by one site: T[a, b, t, s] = δ_{t,a} δ_{s,b}."""
    t = np.zeros((d, d, d, d))
    for a in range(d):
        for b in range(d):
            t[a, b, a, b] = 1.0
    return MPUTensor(t.astype(complex), name="translation")


def identity_mpu(d: int) -> MPUTensor:
    t = np.eye(d, dtype=complex).reshape(1, 1, d, d)
    return MPUTensor(t, name="identity")


def _operator_schmidt(gate: np.ndarray, d: int):
    """gate[(t1 t2),(s1 s2)] = Σ_ν C^ν ⊗ D^ν with exact rank truncation."""
    g = gate.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    u, s, vh = np.linalg.svd(g)
    keep = s > RANK_TOL * s[0]
    u, s, vh = u[:, keep], s[keep], vh[keep]
    left = [(u[:, i] * np.sqrt(s[i])).reshape(d, d) for i in range(s.size)]
    right = [(vh[i] * np.sqrt(s[i])).reshape(d, d) for i in range(s.size)]
    return left, right


def brickwork_mpu(in_gate: np.ndarray, cross_gate: np.ndarray,
                  parity: int = 0) -> MPUTensor:
    """MPU of one brickwork layer on two-site blocks.

    ``in_gate`` acts inside each block (sites 2i, 2i+1), then ``cross_gate``
    across neighbouring blocks (sites 2i+1, 2i+2).  Both are d²×d² matrices.

    ``parity=1`` blocks the same layer with the one-site-shifted pairing
    (sites 2i+1, 2i+2 form a block), which puts ``in_gate`` on the bonds:
    on a ring both tensors represent the same operator, but their standard
    forms are the two inequivalent factorizations of the layer.
    """
    d = int(round(np.sqrt(in_gate.shape[0])))
    if parity not in (0, 1):
        raise ValueError("parity must be 0 or 1")
    if parity:
        cs, ds = _operator_schmidt(in_gate, d)
        chi = len(cs)
        t = np.zeros((chi, chi, d * d, d * d), dtype=complex)
        for a in range(chi):
            for b in range(chi):
                t[a, b] = cross_gate @ np.kron(ds[a], cs[b])
    else:
        cs, ds = _operator_schmidt(cross_gate, d)
        chi = len(cs)
        t = np.zeros((chi, chi, d * d, d * d), dtype=complex)
        for a in range(chi):
            for b in range(chi):
                t[a, b] = np.kron(ds[a], cs[b]) @ in_gate
    return MPUTensor(t, name="brickwork")


def circuit_layers_mpu(layers) -> MPUTensor:
    """Compose brickwork layers [(in_gate, cross_gate), ...], first acts first."""
    out = None
    for in_gate, cross_gate in layers:
        layer = brickwork_mpu(in_gate, cross_gate)
        out = layer if out is None else compose_mpu(layer, out)
    return out


@dataclass(frozen=True)
class StandardForm:
    r: int
    l: int
    u: np.ndarray
    u_prime: np.ndarray
    index: float
    block: int
    phys_dim: int


def mpu_ranks(mpu: MPUTensor, tol=RANK_TOL):
    """Ranks (r, l) of the two canonical reshapes of the bulk tensor."""
    t = mpu.tensor
    chi, d = t.shape[0], t.shape[2]
    m_r = t.transpose(0, 2, 1, 3).reshape(chi * d, chi * d)
    m_l = t.transpose(0, 3, 1, 2).reshape(chi * d, chi * d)
    sr = np.linalg.svd(m_r, compute_uv=False)
    sl = np.linalg.svd(m_l, compute_uv=False)
    r = int((sr > tol * sr[0]).sum())
    l = int((sl > tol * sl[0]).sum())
    return r, l


def mpu_index(mpu: MPUTensor, block: int = 1, tol=RANK_TOL):
    """½·ln(r/l) of the (optionally blocked) tensor."""
    blocked = block_mpu(mpu, block) if block > 1 else mpu
    r, l = mpu_ranks(blocked, tol)
    return 0.5 * np.log(r / l), (r, l)


def standard_form(mpu: MPUTensor, block: int = 1, tol=RANK_TOL) -> StandardForm:
    """Factor a simple MPU tensor into its two-layer brickwork gates.

    Raises StandardFormError with the measured ranks when r·l ≠ d², which
    signals that the tensor needs more blocking (or is not unitary).
    """
    blocked = block_mpu(mpu, block) if block > 1 else mpu
    t = blocked.tensor
    chi, d = t.shape[0], t.shape[2]
    m_r = t.transpose(0, 2, 1, 3).reshape(chi * d, chi * d)
    m_l = t.transpose(0, 3, 1, 2).reshape(chi * d, chi * d)
    ur, sr, vr = np.linalg.svd(m_r)
    ul, sl, vl = np.linalg.svd(m_l)
    r = int((sr > tol * sr[0]).sum())
    l = int((sl > tol * sl[0]).sum())
    if r * l != d * d:
        raise StandardFormError(
            f"not in simple form at block {block}: ranks ({r}, {l}) with "
            f"physical dimension {d}; try a larger block")
    x = (ur[:, :r] * np.sqrt(sr[:r])).reshape(chi, d, r)      # X^t_{a μ}
    y = (np.sqrt(sr[:r])[:, None] * vr[:r]).reshape(r, chi, d)  # Y^s_{μ b}
    v = (ul[:, :l] * np.sqrt(sl[:l])).reshape(chi, d, l)      # V^s_{a ν}
    w = (np.sqrt(sl[:l])[:, None] * vl[:l]).reshape(l, chi, d)  # W^t_{ν b}
    # u[(μ ν), (s1 s2)] = Σ_b Y^{s1}_{μ b} V^{s2}_{b ν}
    u = np.einsum("mbs,btn->mnst", y, v, optimize=True).reshape(r * l, d * d)
    # u'[(t1 t2), (ν μ)] = Σ_a W^{t1}_{ν a} X^{t2}_{a μ}
    up = np.einsum("nat,asm->tsnm", w, x, optimize=True).reshape(d * d, l * r)
    u_norm = np.linalg.norm(u) / d
    u = u / u_norm
    up = up * u_norm
    for name, g in (("u", u), ("u_prime", up)):
        err = np.linalg.norm(g @ g.conj().T - np.eye(g.shape[0]))
        if err > 1e-8:
            raise StandardFormError(f"gate {name} is not unitary ({err:.2e})")
    return StandardForm(r=r, l=l, u=u, u_prime=up,
                        index=0.5 * np.log(r / l), block=block, phys_dim=d)


def standard_form_ring(sf: StandardForm, n_blocks: int) -> np.ndarray:
    """Dense ring operator rebuilt from standard-form gates (cross-check).

    Layer one applies u on input pairs (0,1), (2,3), ..., leaving wire μ_i on
    even positions and ν_{i+1} on odd positions; layer two applies u′ on the
    cyclically shifted wire pairs (ν_i, μ_{i+1}), emitting outputs
    (t_i, t_{i+1}).  Requires an even number of blocks.
    """
    if n_blocks % 2:
        raise ValueError("ring recomposition needs an even block count")
    n = n_blocks
    d, r, l = sf.phys_dim, sf.r, sf.l
    m = n // 2
    u_all = np.eye(1)
    up_all = np.eye(1)
    for _ in range(m):
        u_all = np.kron(u_all, sf.u)
        up_all = np.kron(up_all, sf.u_prime)
    cols = (d * d) ** m
    # wire multi-index after layer one: (μ_0, ν_1, μ_2, ν_3, ...)
    wires = u_all.reshape([r, l] * m + [cols])
    # shift left by one so consecutive pairs read (ν_i, μ_{i+1})
    wires = np.transpose(wires, axes=[(k + 1) % n for k in range(n)] + [n])
    shifted = wires.reshape((l * r) ** m, cols)
    mid = up_all @ shifted
    # output multi-index is (t_1, t_2, ..., t_{n-1}, t_0); restore site order
    out = mid.reshape([d] * n + [cols])
    out = np.transpose(out, axes=[(j - 1) % n for j in range(n)] + [n])
    return out.reshape(d ** n, d ** n)


# ---------------------------------------------------------------------------
# Cocycle MPUs: diagonal phase layers classified by group 2-cocycles.

def cocycle_residual(group, omega: np.ndarray) -> float:
    """Largest violation of ω(g,h)ω(gh,k) = ω(g,hk)ω(h,k)."""
    n = group.order
    worst = 0.0
    for g in range(n):
        for h in range(n):
            gh = group.mult[g, h]
            for k in range(n):
                lhs = omega[g, h] * omega[gh, k]
                rhs = omega[g, group.mult[h, k]] * omega[h, k]
                worst = max(worst, abs(lhs - rhs))
    return worst


def cocycle_mpu(group, omega: np.ndarray) -> MPUTensor:
    """Bulk tensor of the diagonal layer Π_i ω(g_i, g_{i+1}).

    T[a, b, t, s] = δ_{ts} δ_{bs} ω(a, s): the bond carries the previous
    group element.  Open chains use a phase-free first-site boundary (see
    cocycle_layer_dense); on rings the trace closes the product cyclically.
    """
    n = group.order
    t = np.zeros((n, n, n, n), dtype=complex)
    for a in range(n):
        for s in range(n):
            t[a, s, s, s] = omega[a, s]
    return MPUTensor(t, name=f"cocycle[{group.name}]")


def cocycle_layer_dense(group, omega: np.ndarray, n_sites: int) -> np.ndarray:
    """Diagonal operator Π_{i<n} ω(g_i, g_{i+1}) on an open chain."""
    n = group.order
    diag = np.ones(n, dtype=complex)
    for _ in range(1, n_sites):
        ext = diag.reshape(-1, n)[:, :, None] * omega[None, :, :]
        diag = ext.reshape(-1)
    return np.diag(diag)


def cz_pair_cocycle() -> np.ndarray:
    """Z2×Z2 cocycle ω(g, h) = (−1)^{g₂ h₁} of the paired controlled-Z layer.

    With each group site identified with two qubits (g₁, g₂), the diagonal
    layer Π ω(g_i, g_{i+1}) is the cross-block part of a full nearest-
    neighbour controlled-Z layer; the in-block part is a one-site diagonal.
    """
    omega = np.ones((4, 4))
    for g in range(4):
        for h in range(4):
            omega[g, h] = (-1.0) ** ((g & 1) * ((h >> 1) & 1))
    return omega
