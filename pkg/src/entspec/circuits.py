"""Finite-depth entangler circuits used to map trivial states to SPT states.

A :class:`Circuit` is an ordered list of placed gates (first entry acts
first).  Constructors cover the controlled-Z layer, on-site X-rotation
layers, the three standard composite entanglers U_1..U_3, the group
controlled-multiplication layer, the clock controlled-phase layer, and the
symmetric three-CZ composite gates on a ring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .groups import GroupSpec, builtin_group
from .sites import (ChainLayout, LocalOperator, chain_of_qubits, clock_ops,
                    cz_gate, embed_and_apply, xrot_gate)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list; gates[0] is applied first."""

    gates: tuple  # ((LocalOperator, sites), ...)
    n_sites: int
    name: str = ""

    def apply(self, state, layout, backend=None):
        if layout.n_sites != self.n_sites:
            raise ValueError("layout size mismatch")
        return embed_and_apply(self.gates, layout, state, backend=backend)

    def dag(self):
        gates = tuple((op.dag(), sites) for op, sites in reversed(self.gates))
        return Circuit(gates, self.n_sites, name=self.name + "^dag")

    def __add__(self, other):
        """Concatenation: self first, then other."""
        if self.n_sites != other.n_sites:
            raise ValueError("size mismatch in circuit concatenation")
        return Circuit(self.gates + other.gates, self.n_sites,
                       name=f"{self.name}+{other.name}")

    def to_dense(self, layout):
        layout.check_dense_ok()
        dim = layout.dim
        mat = np.eye(dim, dtype=complex)
        for i in range(dim):
            mat[:, i] = self.apply(mat[:, i].copy(), layout)
        return mat


def cz_layer(n_sites: int) -> Circuit:
    gates = tuple((cz_gate(), (i, i + 1)) for i in range(n_sites - 1))
    return Circuit(gates, n_sites, name="cz_layer")


def xrot_layer(n_sites: int, theta: float) -> Circuit:
    g = xrot_gate(theta)
    return Circuit(tuple((g, (i,)) for i in range(n_sites)), n_sites,
                   name=f"xrot_layer({theta})")


def clock_cz_gate(q: int, power: int = 1) -> LocalOperator:
    """Two-site controlled clock phase: |p, p'> -> ω^{power·p·p'} |p, p'>."""
    omega = np.exp(2j * np.pi * power / q)
    p = np.arange(q)
    diag = omega ** (np.outer(p, p).reshape(-1))
    return LocalOperator(np.diag(diag), (q, q), name=f"CZq[{q}]^{power}",
                         unitary=True)


def clock_cz_layer(n_sites: int, q: int) -> Circuit:
    """Controlled-phase layer: each odd-position site phases its left
    neighbor with ω and its right neighbor with ω^{-1}."""
    gates = []
    czp = clock_cz_gate(q, 1)
    czm = clock_cz_gate(q, -1)
    for i in range(0, n_sites, 2):
        if i + 1 < n_sites:
            gates.append((czm, (i, i + 1)))
    for i in range(2, n_sites, 2):
        gates.append((czp, (i - 1, i)))
    return Circuit(tuple(gates), n_sites, name=f"clock_cz_layer[{q}]")


def group_cx_gates(group: GroupSpec):
    """Forward and backward controlled multiplication gates.

    forward:  |g, h> -> |g, g h>   (control first site)
    backward: |g, h> -> |g, h g^{-1}>
    """
    n = group.order
    fwd = np.zeros((n * n, n * n), dtype=complex)
    bwd = np.zeros((n * n, n * n), dtype=complex)
    for g in range(n):
        for h in range(n):
            fwd[g * n + group.mult[g, h], g * n + h] = 1.0
            bwd[g * n + group.mult[h, group.inverse(g)], g * n + h] = 1.0
    return (LocalOperator(fwd, (n, n), name="CX_fwd", unitary=True),
            LocalOperator(bwd, (n, n), name="CX_bwd", unitary=True))


def group_cx_layer(n_sites: int, group: GroupSpec) -> Circuit:
    """Controlled-multiplication entangler on an alternating chain.

    First every odd-position site multiplies its right neighbor forward,
    then every even-position site (except the first) multiplies its right...
    more precisely: backward gates controlled by even sites act on their odd
    right neighbors after the forward layer.
    """
    fwd, bwd = group_cx_gates(group)
    gates = []
    for i in range(0, n_sites, 2):  # uniform sites multiply their right neighbor
        if i + 1 < n_sites:
            gates.append((fwd, (i, i + 1)))
    for i in range(1, n_sites, 2):  # then pinned sites divide their right neighbor
        if i + 1 < n_sites:
            gates.append((bwd, (i, i + 1)))
    return Circuit(tuple(gates), n_sites, name="group_cx_layer")


def entangler_circuit(kind: str, n_sites: int, theta: float = 0.0,
                      level: int = 1, q: int = 2, group: str = "",
                      power: int = 1) -> Circuit:
    """Named entangler circuits.

    kind: "cz_layer", "xrot_layer", "spt" (rotations then controlled-Z),
    "alpha" (level 1..3), "clock_cz" (applied ``power`` times), or
    "group_cx".
    """
    if kind == "cz_layer":
        return cz_layer(n_sites)
    if kind == "xrot_layer":
        return xrot_layer(n_sites, theta)
    if kind == "spt":
        return xrot_layer(n_sites, theta) + cz_layer(n_sites)
    if kind == "alpha":
        if level == 1:
            return cz_layer(n_sites)
        if level == 2:
            return xrot_layer(n_sites, np.pi / 4) + cz_layer(n_sites)
        if level == 3:
            return (cz_layer(n_sites) + xrot_layer(n_sites, np.pi / 4)
                    + cz_layer(n_sites))
        raise ValueError("alpha entangler level must be 1, 2 or 3")
    if kind == "clock_cz":
        c = clock_cz_layer(n_sites, q)
        out = c
        for _ in range(power - 1):
            out = out + c
        return out
    if kind == "group_cx":
        g = builtin_group(group)
        c = group_cx_layer(n_sites, g)
        out = c
        for _ in range(power - 1):
            out = out + c
        return out
    raise ValueError(f"unknown entangler kind {kind!r}")


def _compose_on_sites(ops_sites, span):
    """Dense product (last entry acts last) of gates given inside a span."""
    dims = (2,) * len(span)
    layout = ChainLayout(dims)
    mat = np.eye(2 ** len(span), dtype=complex)
    pos = {s: i for i, s in enumerate(span)}
    for op, sites in ops_sites:
        local = [pos[s] for s in sites]
        col = np.zeros_like(mat)
        for i in range(mat.shape[1]):
            col[:, i] = embed_and_apply([(op, local)], layout, mat[:, i])
        mat = col
    return mat


def symmetric_cz_triple(n_ring: int, start: int) -> tuple:
    """Three-CZ composite on ring sites (start, start+1, start+2).

    Returns (LocalOperator on 3 sites, site tuple with ring wrap-around).
    The closed form is ½(Z₁+Z₂+Z₃−Z₁Z₂Z₃); the operator is built as the
    product of the three CZ gates so the identity is enforced by construction.
    """
    s = [start % n_ring, (start + 1) % n_ring, (start + 2) % n_ring]
    cz = cz_gate()
    mat = _compose_on_sites([(cz, (s[0], s[1])), (cz, (s[1], s[2])),
                             (cz, (s[0], s[2]))], s)
    return LocalOperator(mat, (2, 2, 2), name=f"U3cz@{start}"), tuple(s)


def symmetric_pair_gate(n_ring: int, start: int) -> tuple:
    """Product of two adjacent three-CZ composites, spanning five ring sites.

    W(start) = U3cz(start+2) · U3cz(start): a real gate commuting with the
    global X string.
    """
    span = [(start + k) % n_ring for k in range(5)]
    u1, s1 = symmetric_cz_triple(n_ring, start)
    u2, s2 = symmetric_cz_triple(n_ring, start + 2)
    mat = _compose_on_sites([(u1, s1), (u2, s2)], span)
    return LocalOperator(mat, (2,) * 5, name=f"W@{start}"), tuple(span)


def ring_gate_tiling(n_ring: int) -> list:
    """The tiling of five-site symmetric gates covering a ring.

    Requires the ring size to be a multiple of 4; gates start at every other
    matter site (positions 1, 5, 9, ... in code indexing) and wrap around.
    Their ordered product equals the even-sublattice CZ layer times the full
    nearest-neighbour CZ layer on the ring.
    """
    if n_ring % 4 != 0:
        raise ValueError("ring size must be a multiple of 4")
    return [symmetric_pair_gate(n_ring, start)
            for start in range(1, n_ring, 4)]


def ring_cz_product(n_ring: int, step: int, offset: int = 0) -> list:
    """CZ gates on ring bonds (i, i+step) for i = offset, offset+step, ..."""
    gates = []
    for i in range(offset, n_ring + offset, step):
        a, b = i % n_ring, (i + step) % n_ring
        gates.append((cz_gate(), (a, b)))
    return gates
