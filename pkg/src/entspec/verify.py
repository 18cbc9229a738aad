"""Invariant batteries behind the command-line ``verify`` subcommand.

Each suite recomputes a family of exact identities or closed-form reference
values at small sizes and reports one row per check.  All randomness flows
from the seed argument, so a given (suite, seed) pair always produces the
same table.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channels import (ChannelRemixError, apply_channel, build_channel,
                       group_fourier_channel, remix_to_projectors)
from .circuits import ring_cz_product, ring_gate_tiling, symmetric_cz_triple
from .groups import builtin_group, regular_rep
from .models import ModelId
from .mpu import (StandardFormError, brickwork_mpu, cocycle_mpu,
                  cocycle_residual, cz_pair_cocycle, identity_mpu, mpu_index,
                  mpu_to_dense_ring, standard_form, standard_form_ring,
                  translation_mpu)
from .sites import (chain_of_qubits, clock_ops, cz_gate, embed_and_apply,
                    embed_sparse, pauli_op, standard_cut)
from .spectra import (degeneracy_multiple, entanglement_spectrum,
                      block_operator, rdm_right, sector_labels)
from .towers import (boson_dn_levels, boson_nn_levels, boundary_entropy,
                     boson_radius, channel_twist, ising_fusion, ising_tower,
                     luttinger_parameter)
from .workflows import (alpha_pair_comparison, block_sites_dims,
                        clock_channel_pair, cluster_direct_vs_channel,
                        group_channel_spectrum, lambda_vector,
                        s3_channel_reduction, solve_model, stinespring_pair,
                        symmetric_path_states)


@dataclass(frozen=True)
class CheckRow:
    suite: str
    name: str
    value: float
    bound: float
    ok: bool


def _check(suite, name, value, bound):
    v = float(value)
    return CheckRow(suite, name, v, float(bound), bool(v <= bound))


def _mismatch(a, b):
    """Largest deviation between two descending spectra (unequal sizes ok)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = min(a.size, b.size)
    out = float(np.abs(a[:k] - b[:k]).max()) if k else 0.0
    for tail in (a[k:], b[k:]):
        if tail.size:
            out = max(out, float(np.abs(tail).max()))
    return out


def _cz_ring_dense(m):
    """Dense product of controlled-Z gates on every ring bond of m qubits."""
    layout = chain_of_qubits(m)
    out = np.eye(2 ** m, dtype=complex)
    for i in range(m):
        out = embed_sparse(cz_gate(), (i, (i + 1) % m), layout) @ out
    return np.asarray(out)


def _cross_cz_ring_dense(n_blocks):
    """Controlled-Z on the bonds between two-qubit blocks of a ring."""
    m = 2 * n_blocks
    layout = chain_of_qubits(m)
    out = np.eye(2 ** m, dtype=complex)
    for i in range(n_blocks):
        out = embed_sparse(cz_gate(), (2 * i + 1, (2 * i + 2) % m),
                           layout) @ out
    return np.asarray(out)


def suite_channels(seed=0):
    rows = []
    for theta in (0.0, np.pi / 8):
        pair = cluster_direct_vs_channel(4, theta=theta, seed=seed)
        rows.append(_check("channels",
                           f"entangled ES = channel ES (theta={theta:.4f})",
                           pair.max_mismatch(), 1e-10))
    es0 = cluster_direct_vs_channel(4, theta=0.0, seed=seed).channel
    rows.append(_check("channels", "dephased ES is exactly paired",
                       degeneracy_multiple(es0, 2), 1e-10))
    # Measured infidelities at N=10 are 0.0059 / 0.0116 / 0.0022; the
    # level-2 residual is a genuine finite-size feature, so its regression
    # bound sits above the other two.
    fid_bound = {1: 0.01, 2: 0.013, 3: 0.01}
    for level in (1, 2, 3):
        comp = alpha_pair_comparison(10, level, seed=seed)
        rows.append(_check("channels",
                           f"pattern pair level {level}: |tr(varsigma)|",
                           abs(comp.report.trace), 1e-12))
        rows.append(_check("channels",
                           f"pattern pair level {level}: 1 - fidelity",
                           1.0 - comp.report.fidelity, fid_bound[level]))
    for kind in ("dephase", "n2"):
        es_c, es_d = stinespring_pair(8, kind, seed=seed)
        rows.append(_check("channels", f"dilation reproduces ES ({kind})",
                           _mismatch(es_c, es_d), 1e-10))
    proj, w = remix_to_projectors(build_channel("dephase", (0,)))
    rows.append(_check("channels", "dephasing remix has 2 projectors",
                       abs(proj.n_kraus - 2), 0.0))
    rows.append(_check("channels", "remix matrix is unitary",
                       np.linalg.norm(w @ w.conj().T - np.eye(w.shape[0])),
                       1e-10))
    try:
        remix_to_projectors(build_channel("n2", (0,), theta=np.pi / 8))
        rows.append(CheckRow("channels", "non-normal remix is rejected",
                             1.0, 0.0, False))
    except ChannelRemixError:
        rows.append(_check("channels", "non-normal remix is rejected",
                           0.0, 0.0))
    return rows


def suite_mpu(seed=0):
    rows = []
    shift = translation_mpu(2)
    idx, (r, l) = mpu_index(shift)
    rows.append(_check("mpu", "shift ranks are (1, 4)",
                       abs(r - 1) + abs(l - 4), 0.0))
    rows.append(_check("mpu", "shift index = -ln 2",
                       abs(idx + np.log(2.0)), 1e-12))
    idx0, _ = mpu_index(identity_mpu(2))
    rows.append(_check("mpu", "identity index = 0", abs(idx0), 1e-12))
    sf = standard_form(shift)
    ring = mpu_to_dense_ring(shift, 4)
    rows.append(_check("mpu", "shift two-layer form rebuilds the ring",
                       np.linalg.norm(standard_form_ring(sf, 4) - ring),
                       1e-8))

    czm = cz_gate().mat
    layer = brickwork_mpu(czm, czm)
    rows.append(_check("mpu", "controlled-Z layer MPU matches gates (6 qubits)",
                       np.linalg.norm(mpu_to_dense_ring(layer, 3)
                                      - _cz_ring_dense(6)), 1e-8))
    idx_l, _ = mpu_index(layer)
    rows.append(_check("mpu", "controlled-Z layer index = 0",
                       abs(idx_l), 1e-12))
    try:
        sf_l = standard_form(layer)
    except StandardFormError:
        sf_l = standard_form(layer, block=2)
    qubits = 2 * sf_l.block * 2
    rows.append(_check("mpu", "layer two-layer form rebuilds the ring",
                       np.linalg.norm(standard_form_ring(sf_l, 2)
                                      - _cz_ring_dense(qubits)), 1e-8))

    g22 = builtin_group("Z2xZ2")
    om = cz_pair_cocycle()
    rows.append(_check("mpu", "paired-layer cocycle condition",
                       cocycle_residual(g22, om), 1e-12))
    rows.append(_check("mpu", "cocycle MPU equals cross-bond gates",
                       np.linalg.norm(mpu_to_dense_ring(cocycle_mpu(g22, om), 3)
                                      - _cross_cz_ring_dense(3)), 1e-10))
    return rows


def suite_towers(seed=0):
    rows = []
    ident = ising_tower("identity", 6)
    want_i = [(0, 1), (2, 1), (3, 1), (4, 2), (5, 2), (6, 3)]
    rows.append(_check("towers", "identity tower levels and counts",
                       0.0 if ident == want_i else 1.0, 0.0))
    eps = ising_tower("epsilon", 6)
    want_e = [(Fraction(1, 2), 1), (Fraction(3, 2), 1), (Fraction(5, 2), 1),
              (Fraction(7, 2), 1), (Fraction(9, 2), 2), (Fraction(11, 2), 2)]
    rows.append(_check("towers", "epsilon tower levels and counts",
                       0.0 if eps == want_e else 1.0, 0.0))
    sig = ising_tower("sigma", 6)
    want_s = [(Fraction(1, 16) + m, c)
              for m, c in enumerate((1, 1, 1, 2, 2, 3))]
    rows.append(_check("towers", "sigma tower levels and counts",
                       0.0 if sig == want_s else 1.0, 0.0))
    fus_ok = (ising_fusion("sigma", "sigma") == ("identity", "epsilon")
              and ising_fusion("epsilon", "epsilon") == ("identity",)
              and ising_fusion("epsilon", "sigma") == ("sigma",)
              and ising_fusion("identity", "sigma") == ("sigma",))
    rows.append(_check("towers", "boundary fusion rules",
                       0.0 if fus_ok else 1.0, 0.0))
    rows.append(_check("towers", "free boundary entropy = 0",
                       abs(boundary_entropy("free")), 0.0))
    rows.append(_check("towers", "fixed boundary entropy = -ln(2)/2",
                       abs(boundary_entropy("fixed") + 0.5 * np.log(2.0)),
                       1e-15))
    rows.append(_check("towers", "K(0) = 1",
                       abs(luttinger_parameter(0.0) - 1.0), 1e-12))
    rows.append(_check("towers", "K(1) = 1/2",
                       abs(luttinger_parameter(1.0) - 0.5), 1e-12))
    rows.append(_check("towers", "R(0.5) = sqrt(3)",
                       abs(boson_radius(0.5) - np.sqrt(3.0)), 1e-12))
    anchors = {0.0: (1 / 8, 9 / 8), 0.5: (3 / 32, 27 / 32),
               1.0: (1 / 16, 9 / 16)}
    for j, (a0, a1) in anchors.items():
        radius = boson_radius(j)
        levels = boson_nn_levels(radius, channel_twist(radius), max_delta=2.0)
        dev = abs(levels[0][0] - a0) + abs(levels[1][0] - a1)
        rows.append(_check("towers", f"twisted tower anchors (J={j})",
                           dev, 1e-12))
    dn = boson_dn_levels(3.0)
    rows.append(_check("towers", "integer tower counts (1,1,2,3)",
                       0.0 if dn == [(0.0, 1), (1.0, 1), (2.0, 2), (3.0, 3)]
                       else 1.0, 0.0))
    return rows


def suite_group(seed=0):
    rows = []
    for name in ("Z2", "Z3", "Z4", "Z2xZ2", "S3"):
        g = builtin_group(name)
        try:
            g.check_orthogonality()
            rows.append(_check("group", f"{name} irrep orthogonality",
                               0.0, 0.0))
        except ValueError:
            rows.append(CheckRow("group", f"{name} irrep orthogonality",
                                 1.0, 0.0, False))
    s3 = builtin_group("S3")
    worst = 0.0
    for side in ("left", "right"):
        mats = [regular_rep(s3, g, side, "X").mat for g in range(s3.order)]
        for a in range(s3.order):
            for b in range(s3.order):
                worst = max(worst, float(np.linalg.norm(
                    mats[a] @ mats[b] - mats[int(s3.mult[a, b])])))
    rows.append(_check("group", "regular representation homomorphism",
                       worst, 1e-14))
    lam2 = lambda_vector("S3", 2)
    lam3 = lambda_vector("S3", 3)
    lam6 = lambda_vector("S3", 6)
    ok = (lam2 == [Fraction(2, 3), Fraction(1, 6), Fraction(1, 6), 0, 0, 0]
          and lam3 == [Fraction(1, 2), 0, 0, Fraction(1, 6), Fraction(1, 6),
                       Fraction(1, 6)]
          and lam6 == [1, 0, 0, 0, 0, 0]
          and all(sum(lambda_vector("S3", p)) == 1 for p in range(1, 7)))
    rows.append(_check("group", "power-map weight vectors (exact)",
                       0.0 if ok else 1.0, 0.0))
    for p in range(1, 7):
        lam = np.array([float(x) for x in lambda_vector("S3", p)])
        lam = np.sort(lam[lam > 0])[::-1]
        ev = group_channel_spectrum(2, "S3", p)
        ev = np.sort(ev[ev > 1e-12])[::-1]
        rows.append(_check("group", f"averaged-state spectrum equals weights (p={p})",
                           _mismatch(ev, lam), 1e-12))
    ev1 = group_channel_spectrum(2, "S3", 1)
    ev1 = ev1[ev1 > 1e-12]
    six = (ev1.size == 6) and float(np.abs(ev1 - 1.0 / 6.0).max()) < 1e-12
    rows.append(_check("group", "sixfold degeneracy at p=1",
                       0.0 if six else 1.0, 0.0))
    ch_a = build_channel("group_power", (0,), group="S3", p=1)
    ch_b = group_fourier_channel("S3", 0)
    rng = np.random.default_rng(seed + 1)
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    rho = a @ a.conj().T
    rho /= np.trace(rho)
    out_a = sum(k @ rho @ k.conj().T for k in ch_a.kraus)
    out_b = sum(k @ rho @ k.conj().T for k in ch_b.kraus)
    rows.append(_check("group", "irrep-resolved form equals group averaging",
                       np.linalg.norm(out_a - out_b), 1e-10))
    full, red, _ = s3_channel_reduction(3, J=0.5, seed=seed)
    rows.append(_check("group", "two-block reduced channel matches",
                       np.linalg.norm(full - red), 1e-10))
    return rows


def suite_z4(seed=0):
    rows = []
    spec4, _, vecs4, _ = solve_model(ModelId(tag="ClockGaplessTrivial", N=3,
                                             q=4), seed=seed)
    cut4 = standard_cut(spec4.layout)
    es4 = entanglement_spectrum(rdm_right(vecs4[0], spec4.layout, cut4))
    spec2, _, vecs2, _ = solve_model(ModelId(tag="Z2Z2GaplessTrivial", N=3),
                                     seed=seed)
    es2 = entanglement_spectrum(
        rdm_right(vecs2[0], spec2.layout, standard_cut(spec2.layout)))
    paired = np.sort(np.outer(es2, es2).ravel())[::-1]
    rows.append(_check("z4", "clock ES = paired qubit-chain ES",
                       _mismatch(es4, paired), 1e-8))

    _, es_ch, lam, labels = clock_channel_pair(3, q=4, seed=seed)
    rows.append(_check("z4", "dephased clock ES is fourfold",
                       degeneracy_multiple(es_ch, 4), 1e-8))
    keep = lam > 1e-10
    lam_k, lab_k = lam[keep], labels[keep]
    nq = (lam_k.size // 4) * 4
    worst = 0.0
    for i in range(0, nq, 4):
        quartet = lab_k[i:i + 4]
        phases = set(int(np.rint(np.angle(z) * 2 / np.pi)) % 4
                     for z in quartet)
        worst = max(worst, float(4 - len(phases)))
    rows.append(_check("z4", "each quartet carries all four phase labels",
                       worst, 0.0))

    rho_b = rdm_right(vecs4[0], spec4.layout, cut4)
    bsites, bdims = block_sites_dims(spec4.layout, cut4)
    rho_p = apply_channel(build_channel("clock_parity", (cut4 + 1,), q=4),
                          rho_b, bsites, bdims)
    es_p = entanglement_spectrum(rho_p)
    rows.append(_check("z4", "half-turn dephased ES is paired",
                       degeneracy_multiple(es_p, 2), 1e-8))
    zmat = clock_ops(4)[0].mat
    zsq = block_operator([(cut4 + 1, zmat @ zmat)], spec4.layout, cut4)
    lam_p, lab_p = sector_labels(rho_p, zsq)
    keep = lam_p > 1e-10
    lam_pk, lab_pk = lam_p[keep], lab_p[keep]
    npairs = (lam_pk.size // 2) * 2
    worst = 0.0
    for i in range(0, npairs, 2):
        pair = set(int(np.sign(z.real)) for z in lab_pk[i:i + 2])
        worst = max(worst, float(2 - len(pair)))
    rows.append(_check("z4", "each pair carries both parity labels",
                       worst, 0.0))
    return rows


def suite_ring_path(seed=0):
    rows = []
    n = 8
    layout = chain_of_qubits(n)
    dim = 2 ** n
    flip = np.eye(dim, dtype=complex)
    for i in range(n):
        flip = embed_sparse(pauli_op("X"), (i,), layout) @ flip
    gates = ring_gate_tiling(n)
    worst = 0.0
    prod = np.eye(dim, dtype=complex)
    for op, sites in gates:
        dense = np.asarray(embed_sparse(op, sites, layout).todense())
        worst = max(worst, float(np.abs(dense @ flip - flip @ dense).max()))
        prod = dense @ prod
    rows.append(_check("appendixE", "five-site gates commute with the flip",
                       worst, 0.0))
    u3, s3_sites = symmetric_cz_triple(n, 1)
    u3d = np.asarray(embed_sparse(u3, s3_sites, layout).todense())
    rows.append(_check("appendixE", "three-site composite anticommutes",
                       float(np.abs(u3d @ flip + flip @ u3d).max()), 0.0))
    ref = np.eye(dim, dtype=complex)
    for op, sites in (ring_cz_product(n, 1)
                      + ring_cz_product(n, 2, offset=1)):
        ref = embed_sparse(op, sites, layout) @ ref
    rows.append(_check("appendixE", "tiling equals the two bond layers",
                       float(np.abs(prod - np.asarray(ref)).max()), 0.0))
    phi1, psi1t, _, layout8 = symmetric_path_states(n, seed=seed)
    state = phi1
    for op, sites in gates:
        state = embed_and_apply([(op, sites)], layout8, state)
    overlap = abs(np.vdot(psi1t, state))
    rows.append(_check("appendixE", "tiled circuit maps between the states",
                       1.0 - overlap, 1e-10))
    return rows


SUITES = {
    "channels": suite_channels,
    "mpu": suite_mpu,
    "towers": suite_towers,
    "group": suite_group,
    "z4": suite_z4,
    "appendixE": suite_ring_path,
}


def run_suite(name: str, seed=0):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from "
                         f"{sorted(SUITES)}")
    return SUITES[name](seed=seed)


def format_check_table(rows) -> str:
    lines = [f"{'suite':<10} {'check':<52} {'measured':>13} "
             f"{'bound':>10} status"]
    for r in rows:
        lines.append(f"{r.suite:<10} {r.name:<52} {r.value:>13.6e} "
                     f"{r.bound:>10.1e} {'PASS' if r.ok else 'FAIL'}")
    npass = sum(r.ok for r in rows)
    lines.append(f"{npass}/{len(rows)} checks passed")
    return "\n".join(lines) + "\n"
