"""End-to-end pipelines shared by the command-line runner, the verification
suites, and the tests: build a model, solve it, apply an entangler or a
channel at the standard cut, and extract spectra.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channels import VarsigmaReport, apply_channel, build_channel
from .circuits import Circuit, cz_layer, entangler_circuit, xrot_layer
from .groups import builtin_group
from .dmrg import dmrg_ground
from .models import ModelId, Term, build_model, pinned_product_state
from .mps import bond_channel_spectrum, bond_rdm_spectrum
from .sites import ChainLayout, pauli_op, standard_cut
from .solve import ground_state
from .spectra import (aligned_direct_rdm, best_gauge, block_operator,
                      entanglement_spectrum, rdm_right, sector_labels)


def solve_model(model_id: ModelId, k=1, seed=0):
    spec = build_model(model_id)
    energies, vecs, report = ground_state(spec, k=k, seed=seed)
    return spec, energies, vecs, report


def spt_entangler(n_sites: int, theta: float) -> Circuit:
    """U_X(θ) followed by the controlled-Z layer."""
    if theta:
        return xrot_layer(n_sites, theta) + cz_layer(n_sites)
    return cz_layer(n_sites)


def block_sites_dims(layout: ChainLayout, cut: int):
    bsites = tuple(range(cut + 1, layout.n_sites))
    return bsites, tuple(layout.site_dims[s] for s in bsites)


@dataclass
class SpectrumPair:
    direct: np.ndarray
    channel: np.ndarray
    cut: int
    layout: ChainLayout

    def max_mismatch(self):
        k = min(self.direct.size, self.channel.size)
        pad_d = self.direct[k:]
        pad_c = self.channel[k:]
        tail = 0.0
        for arr in (pad_d, pad_c):
            if arr.size:
                tail = max(tail, float(np.abs(arr).max()))
        return max(float(np.abs(self.direct[:k] - self.channel[:k]).max()),
                   tail)


def cluster_direct_vs_channel(N: int, theta=0.0, seed=0) -> SpectrumPair:
    """ES of the entangled two-sublattice state vs its channel image."""
    spec, _, vecs, _ = solve_model(ModelId(tag="Z2Z2GaplessTrivial", N=N),
                                   seed=seed)
    layout = spec.layout
    cut = standard_cut(layout)
    psi = vecs[0]
    circ = spt_entangler(layout.n_sites, theta)
    psi_spt = circ.apply(psi, layout)
    es_direct = entanglement_spectrum(rdm_right(psi_spt, layout, cut))
    bsites, bdims = block_sites_dims(layout, cut)
    rho_b = rdm_right(psi, layout, cut)
    ch = build_channel("n2", (cut + 1,), theta=theta)
    es_channel = entanglement_spectrum(apply_channel(ch, rho_b, bsites, bdims))
    return SpectrumPair(es_direct, es_channel, cut, layout)


def cluster_spt_spectrum(N: int, theta=0.0, seed=0):
    """ES of the entangled state alone (θ-sweep workhorse)."""
    spec, _, vecs, _ = solve_model(ModelId(tag="Z2Z2GaplessTrivial", N=N),
                                   seed=seed)
    layout = spec.layout
    cut = standard_cut(layout)
    circ = spt_entangler(layout.n_sites, theta)
    psi_spt = circ.apply(vecs[0], layout)
    return entanglement_spectrum(rdm_right(psi_spt, layout, cut))


def level_channel(level: int, site: int):
    """Channel matching the depth-``level`` controlled-Z/rotation entangler."""
    if level == 1:
        return build_channel("n1", (site,)), ()
    if level == 2:
        return build_channel("n2", (site,), theta=np.pi / 4), (site,)
    if level == 3:
        return build_channel("n3", (site, site + 1)), ()
    raise ValueError("entangler level must be 1, 2 or 3")


@dataclass
class ChannelComparison:
    report: VarsigmaReport
    gauge: str
    es_direct: np.ndarray
    es_channel: np.ndarray


def alpha_pair_comparison(N: int, level: int, seed=0) -> ChannelComparison:
    """Direct reduced state of U_level|gs⟩ vs the channel image of |gs⟩.

    The base state is the critical chain (neighbouring-pattern pair (0,1));
    block-local gates are undone on the direct side, the cut-site rotation is
    absorbed into the channel for level 2, and for level 3 a residual
    Z-rotation gauge at the cut site is fixed by minimizing ‖ς‖.
    """
    spec, _, vecs, _ = solve_model(ModelId(tag="AlphaChainPair", N=N, alpha=0),
                                   seed=seed)
    layout = spec.layout
    cut = standard_cut(layout)
    psi = vecs[0]
    site = cut + 1
    ch, skip = level_channel(level, site)
    bsites, bdims = block_sites_dims(layout, cut)
    rho_c = apply_channel(ch, rdm_right(psi, layout, cut), bsites, bdims)
    circ = entangler_circuit("alpha", layout.n_sites, level=level)
    psi_a = circ.apply(psi, layout)
    rho_d = aligned_direct_rdm(psi_a, layout, cut, circ, skip_sites=skip)
    gauge = "identity"
    if level == 3:
        gauges = []
        for sgn in (1.0, -1.0):
            z = np.diag([np.exp(1j * sgn * np.pi / 4),
                         np.exp(-1j * sgn * np.pi / 4)])
            gauges.append((f"zrot({sgn:+.0f})",
                           block_operator([(site, z)], layout, cut)))
        rho_d, gauge = best_gauge(rho_d, rho_c, gauges)
    return ChannelComparison(VarsigmaReport.compute(rho_d, rho_c), gauge,
                             entanglement_spectrum(rho_d),
                             entanglement_spectrum(rho_c))


def clock_channel_pair(N: int, q=4, seed=0):
    """Trivial clock-state ES, the ES after dephasing the boundary clock in
    its phase eigenbasis, and the phase-operator sector labels."""
    spec, _, vecs, _ = solve_model(ModelId(tag="ClockGaplessTrivial", N=N, q=q),
                                   seed=seed)
    layout = spec.layout
    cut = standard_cut(layout)
    psi = vecs[0]
    es_direct = entanglement_spectrum(rdm_right(psi, layout, cut))
    bsites, bdims = block_sites_dims(layout, cut)
    rho_c = apply_channel(build_channel("clock_dephase", (cut + 1,), q=q),
                          rdm_right(psi, layout, cut), bsites, bdims)
    from .sites import clock_ops
    zmat = clock_ops(q)[0].mat
    zblock = block_operator([(cut + 1, zmat)], layout, cut)
    lam, labels = sector_labels(rho_c, zblock)
    return es_direct, entanglement_spectrum(rho_c), lam, labels


def lambda_vector(group_name: str, p: int):
    """Exact per-element weights λ^[p]_g = |{h : h^p = g}| / |G|."""
    g = builtin_group(group_name)
    counts = [0] * g.order
    for h in range(g.order):
        counts[g.power(h, p)] += 1
    return [Fraction(c, g.order) for c in counts]


def group_channel_spectrum(N: int, group: str, p: int):
    """Eigenvalues (including zeros, ascending) of the averaged pinned state."""
    spec = build_model(ModelId(tag="RepGTrivial", N=N, group=group))
    layout = spec.layout
    cut = standard_cut(layout)
    psi = pinned_product_state(spec)
    bsites, bdims = block_sites_dims(layout, cut)
    ch = build_channel("group_power", (cut + 1,), group=group, p=p)
    rho_c = apply_channel(ch, rdm_right(psi, layout, cut), bsites, bdims)
    return np.linalg.eigvalsh(rho_c)


def s3_channel_reduction(N: int, J=0.5, seed=0):
    """Full S3 averaging channel vs its two-block reduced form on the
    deformed chain; returns (ϱ_full, ϱ_reduced, spectrum of ϱ_full)."""
    spec, _, vecs, _ = solve_model(
        ModelId(tag="RepGGaplessTrivial", N=N, group="S3", J=J), seed=seed)
    layout = spec.layout
    cut = standard_cut(layout)
    psi = vecs[0]
    bsites, bdims = block_sites_dims(layout, cut)
    rho_b = rdm_right(psi, layout, cut)
    full = apply_channel(build_channel("group_power", (cut + 1,), group="S3",
                                       p=1), rho_b, bsites, bdims)
    red = apply_channel(build_channel("s3_reduced", (cut + 1,)), rho_b,
                        bsites, bdims)
    return full, red, entanglement_spectrum(full)


def stinespring_pair(N: int, kind: str, theta=np.pi / 4, seed=0):
    """ES from the channel vs ES from tracing the dilated pure state."""
    from .channels import stinespring_dilate
    spec, _, vecs, _ = solve_model(ModelId(tag="IsingOBC", N=N), seed=seed)
    layout = spec.layout
    cut = standard_cut(layout)
    psi = vecs[0]
    site = cut + 1
    ch = build_channel(kind, (site,), theta=theta)
    bsites, bdims = block_sites_dims(layout, cut)
    es_channel = entanglement_spectrum(
        apply_channel(ch, rdm_right(psi, layout, cut), bsites, bdims))
    phi, big = stinespring_dilate(ch, psi, layout)
    es_dilated = entanglement_spectrum(rdm_right(phi, big, cut + 1))
    return es_channel, es_dilated


def dmrg_bond_data(model_id: ModelId, chi=64, seed=0, n_sweeps=12,
                   kraus=None, n_support=1, tol=1e-10):
    """DMRG ground state of a catalog model plus its cut spectrum."""
    spec = build_model(model_id)
    result = dmrg_ground(spec.terms, spec.layout.site_dims, chi_max=chi,
                         n_sweeps=n_sweeps, tol=tol, seed=seed)
    bond = standard_cut(spec.layout)
    if kraus is None:
        lam = bond_rdm_spectrum(result.mps, bond)
    else:
        lam = bond_channel_spectrum(result.mps, bond, kraus,
                                    n_support=n_support)
    return lam, result, bond


def symmetric_path_states(n_ring: int, seed=0):
    """|Φ₁⟩ and |Ψ̃₁⟩ of the five-site-gate path on a ring (matter on odd
    positions, spectators on even), plus the full layout."""
    from .models import HamiltonianSpec
    from .sites import chain_of_qubits, embed_and_apply
    from .circuits import ring_cz_product
    if n_ring % 4:
        raise ValueError("ring size must be a multiple of 4")
    matter = list(range(1, n_ring, 2))
    layout = chain_of_qubits(n_ring)
    x = pauli_op("X")
    z = pauli_op("Z")
    terms = [Term(-1.0, (i,), (x,)) for i in range(n_ring)]
    for k, i in enumerate(matter):
        j = matter[(k + 1) % len(matter)]
        a, b = sorted((i, j))
        terms.append(Term(-1.0, (a, b), (z, z)))
    spec = HamiltonianSpec(layout, terms, name="ring_trivial")
    _, vecs, _ = ground_state(spec, k=1, seed=seed)
    psi0 = vecs[0]
    nn = ring_cz_product(n_ring, 1)
    mm = ring_cz_product(n_ring, 2, offset=1)
    phi1 = embed_and_apply(nn, layout, psi0)
    psi1_tilde = embed_and_apply(mm, layout, psi0)
    return phi1, psi1_tilde, psi0, layout
