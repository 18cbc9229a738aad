"""Catalog of open-chain Hamiltonians and their symmetry data.

Every model is specified by a :class:`ModelId` (tag plus parameters) and
built into a :class:`HamiltonianSpec`: an explicit list of local terms on a
:class:`~entspec.sites.ChainLayout`.  Sums run over open boundaries; terms
that would leave the chain are dropped.

Two-sublattice chains (alternating spectator/matter sites) carry layout
labels so that analysis code can locate the standard entanglement cut; see
:func:`entspec.sites.standard_cut`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.sparse as sp

from . import pauli
from .groups import GroupSpec, builtin_group, irrep_diagonal, regular_rep
from .sites import (ChainLayout, LocalOperator, basis_ket, chain_of_qubits,
                    clock_ops, embed_sparse, pauli_op, plus_ket, product_state,
                    uniform_ket)

_TAG_FIELDS = {
    "Z2Z2GaplessTrivial": {"N"},
    "Z2Z2GaplessSPT": {"N", "theta"},
    "IsingOBC": {"N", "bc", "h_bdry"},
    "AlphaChain": {"N", "alpha"},
    "AlphaChainPair": {"N", "alpha"},
    "XYXChain": {"N", "J", "bc"},
    "XYXGaplessTrivial": {"N", "J"},
    "TranslationGaplessTrivial": {"N"},
    "TranslationGaplessSPT": {"N"},
    "ClockGaplessTrivial": {"N", "q"},
    "RepGTrivial": {"N", "group"},
    "RepGGaplessTrivial": {"N", "group", "J"},
}

_ALPHA_PATTERNS = {
    0: "X", 1: "ZZ", 2: "ZXZ", 3: "ZXXZ", 4: "ZXXXZ",
    -1: "YY", -2: "YXY", -3: "YXXY",
}


@dataclass(frozen=True)
class ModelId:
    """Validated model identifier; serializes to/from a flat JSON object."""

    tag: str
    N: int
    theta: float = 0.0
    J: float = 1.0
    alpha: int = 0
    q: int = 2
    p: int = 1
    group: str = ""
    bc: str = "free"
    h_bdry: float = 1.0

    def __post_init__(self):
        if self.tag not in _TAG_FIELDS:
            raise ValueError(f"unknown model tag {self.tag!r}")
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.tag == "AlphaChain" and self.alpha not in _ALPHA_PATTERNS:
            raise ValueError(f"alpha={self.alpha} outside the catalog")
        if self.tag == "AlphaChainPair" and not (-3 <= self.alpha <= 3):
            raise ValueError("pair alpha must satisfy -3 <= alpha <= 3")
        if "J" in _TAG_FIELDS[self.tag] and not (-1.0 < self.J <= 1.0):
            raise ValueError("J must lie in (-1, 1]")
        if self.tag == "ClockGaplessTrivial" and not (2 <= self.q <= 6):
            raise ValueError("clock dimension must satisfy 2 <= q <= 6")
        if self.tag == "IsingOBC" and self.bc not in ("free", "mixed", "fixed"):
            raise ValueError("IsingOBC bc must be free, mixed or fixed")
        if self.tag == "XYXChain" and self.bc not in ("free", "fixed"):
            raise ValueError("XYXChain bc must be free or fixed")
        if self.tag.startswith("RepG"):
            builtin_group(self.group)  # raises for unknown names

    def to_json(self) -> str:
        keep = {"tag": self.tag, "N": self.N}
        for k in sorted(_TAG_FIELDS[self.tag]):
            if k != "N":
                keep[k] = getattr(self, k)
        return json.dumps(keep)

    @staticmethod
    def from_json(text: str) -> "ModelId":
        data = json.loads(text) if isinstance(text, str) else dict(text)
        if "tag" not in data:
            raise ValueError("model id needs a 'tag' entry")
        tag = data.pop("tag")
        if tag not in _TAG_FIELDS:
            raise ValueError(f"unknown model tag {tag!r}")
        allowed = _TAG_FIELDS[tag]
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown keys for {tag}: {sorted(unknown)}")
        return ModelId(tag=tag, **data)


@dataclass(frozen=True)
class Term:
    """coeff * O_1(site_1) ... O_k(site_k) with strictly increasing sites."""

    coeff: complex
    sites: tuple
    ops: tuple

    def __post_init__(self):
        if list(self.sites) != sorted(set(self.sites)):
            raise ValueError("term sites must be strictly increasing")
        if len(self.sites) != len(self.ops):
            raise ValueError("one operator per site required")

    @property
    def matrix(self):
        m = np.array([[1.0 + 0j]])
        for op in self.ops:
            m = np.kron(m, op.mat)
        return m


@dataclass(frozen=True)
class ProductOperator:
    """Product of single-site operators on distinct sites (e.g. a symmetry string)."""

    factors: tuple  # ((site, LocalOperator), ...)
    name: str = ""

    def __post_init__(self):
        sites = [s for s, _ in self.factors]
        if len(set(sites)) != len(sites):
            raise ValueError("duplicate site in product operator")

    def apply(self, state, layout):
        from .sites import embed_and_apply
        return embed_and_apply([(op, (s,)) for s, op in self.factors],
                               layout, state)

    def to_sparse(self, layout):
        mat = sp.identity(layout.dim, dtype=complex, format="csr")
        for s, op in self.factors:
            mat = embed_sparse(op, (s,), layout) @ mat
        return mat

    def to_dense(self, layout):
        return self.to_sparse(layout).toarray()

    def dag(self):
        return ProductOperator(tuple((s, op.dag()) for s, op in self.factors),
                               name=self.name + "^dag")


class HamiltonianSpec:
    """A Hermitian sum of local terms on an open chain."""

    def __init__(self, layout: ChainLayout, terms, name="", model_id=None):
        self.layout = layout
        self.terms = list(terms)
        self.name = name
        self.model_id = model_id
        for t in self.terms:
            for s, op in zip(t.sites, t.ops):
                if layout.site_dims[s] != op.dim:
                    raise ValueError("term operator does not fit layout")
        self._mats = [(np.ascontiguousarray(t.matrix, dtype=complex),
                       list(t.sites), complex(t.coeff)) for t in self.terms]

    @property
    def dim(self):
        return self.layout.dim

    @property
    def n_sites(self):
        return self.layout.n_sites

    def matvec(self, psi, backend=None):
        from . import kernels
        psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
        out = np.zeros_like(psi)
        dims = list(self.layout.site_dims)
        for mat, sites, coeff in self._mats:
            kernels.apply_local_into(out, psi, mat, sites, dims, scale=coeff,
                                     backend=backend)
        return out

    def sparse(self):
        self.layout.check_dense_ok()
        h = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for t in self.terms:
            op = LocalOperator(t.matrix, tuple(o.dim for o in t.ops))
            h = h + t.coeff * embed_sparse(op, t.sites, self.layout)
        return h

    def dense(self, cap=2 ** 12):
        if self.dim > cap:
            raise ValueError(f"dense Hamiltonian of dim {self.dim} exceeds cap {cap}")
        return self.sparse().toarray()

    def check_hermitian(self, tol=1e-10):
        """Dense Hermiticity check (only for dims below 2^10)."""
        if self.dim > 2 ** 10:
            raise ValueError("hermiticity check is dense-only (dim <= 2^10)")
        h = self.dense()
        return np.linalg.norm(h - h.conj().T) <= tol * max(1.0, np.linalg.norm(h))


def _pauli_terms_to_spec(strings, layout, name, model_id=None):
    terms = []
    for ps in strings:
        if abs(ps.coeff.imag) > 1e-12:
            raise ValueError("non-Hermitian Pauli term encountered")
        sites = tuple(s for s, _ in ps.factors)
        ops = tuple(pauli_op(p) for _, p in ps.factors)
        terms.append(Term(ps.coeff.real, sites, ops))
    return HamiltonianSpec(layout, terms, name=name, model_id=model_id)


def _two_sublattice_labels(n_sites):
    # code-even sites are the transverse-pinned spectators, code-odd the matter
    return tuple("x" if i % 2 == 0 else "m" for i in range(n_sites))


def _z2z2_trivial_strings(N):
    n = 2 * N - 1
    strings = []
    for i in range(1, n - 3, 2):
        strings.append(pauli.PauliString.from_dict(-1.0, {i: "Z", i + 2: "Z"}))
    for i in range(n):
        strings.append(pauli.PauliString.from_dict(-1.0, {i: "X"}))
    return strings, n


def build_model(model_id: ModelId) -> HamiltonianSpec:
    """Construct the Hamiltonian for a validated model id."""
    tag = model_id.tag
    N = model_id.N

    if tag == "Z2Z2GaplessTrivial":
        strings, n = _z2z2_trivial_strings(N)
        layout = chain_of_qubits(n, _two_sublattice_labels(n))
        return _pauli_terms_to_spec(strings, layout, tag, model_id)

    if tag == "Z2Z2GaplessSPT":
        strings, n = _z2z2_trivial_strings(N)
        strings = pauli.conjugate_terms_xrot_layer(strings, range(n),
                                                   model_id.theta)
        bonds = [(i, i + 1) for i in range(n - 1)]
        strings = pauli.conjugate_terms_cz_layer(strings, bonds)
        layout = chain_of_qubits(n, _two_sublattice_labels(n))
        return _pauli_terms_to_spec(strings, layout, tag, model_id)

    if tag == "IsingOBC":
        n = N
        strings = [pauli.PauliString.from_dict(-1.0, {i: "Z", i + 1: "Z"})
                   for i in range(n - 1)]
        xsites = range(n) if model_id.bc == "free" else range(1, n - 1)
        strings += [pauli.PauliString.from_dict(-1.0, {i: "X"}) for i in xsites]
        if model_id.bc == "fixed":
            strings += [pauli.PauliString.from_dict(-model_id.h_bdry, {0: "Z"}),
                        pauli.PauliString.from_dict(-model_id.h_bdry, {n - 1: "Z"})]
        return _pauli_terms_to_spec(strings, chain_of_qubits(n), tag, model_id)

    if tag in ("AlphaChain", "AlphaChainPair"):
        n = N
        alphas = ([model_id.alpha] if tag == "AlphaChain"
                  else [model_id.alpha, model_id.alpha + 1])
        strings = []
        for a in alphas:
            pat = _ALPHA_PATTERNS[a]
            k = len(pat)
            for i in range(n - k + 1):
                strings.append(pauli.PauliString.from_dict(
                    -1.0, {i + j: pat[j] for j in range(k)}))
        return _pauli_terms_to_spec(pauli._collect(strings),
                                    chain_of_qubits(n), tag, model_id)

    if tag == "XYXChain":
        # N is the family parameter of the two-sublattice construction: the
        # anisotropic chain lives on its N - 1 matter sites (spectator sites
        # carry a product state and are omitted here).  For even N the chain
        # length is odd, so the in-plane antiferromagnetic order is
        # compatible with pinning both end spins the same way.
        J = model_id.J
        if model_id.bc == "free":
            n = N - 1
            if n < 2:
                raise ValueError("free XYX chain needs N >= 3")
            strings = []
            for i in range(n - 1):
                strings += [pauli.PauliString.from_dict(1.0, {i: "X", i + 1: "X"}),
                            pauli.PauliString.from_dict(J, {i: "Y", i + 1: "Y"}),
                            pauli.PauliString.from_dict(1.0, {i: "Z", i + 1: "Z"})]
            return _pauli_terms_to_spec(strings, chain_of_qubits(n), tag, model_id)
        # fixed: the two boundary spins are projected onto X=+1, which
        # removes them and leaves transverse fields on the remaining chain
        if N < 6:
            raise ValueError("fixed XYX chain needs N >= 6")
        n = N - 3
        strings = []
        for i in range(n - 1):
            strings += [pauli.PauliString.from_dict(1.0, {i: "X", i + 1: "X"}),
                        pauli.PauliString.from_dict(J, {i: "Y", i + 1: "Y"}),
                        pauli.PauliString.from_dict(1.0, {i: "Z", i + 1: "Z"})]
        strings += [pauli.PauliString.from_dict(1.0, {0: "X"}),
                    pauli.PauliString.from_dict(1.0, {n - 1: "X"})]
        return _pauli_terms_to_spec(strings, chain_of_qubits(n), tag, model_id)

    if tag == "XYXGaplessTrivial":
        n = 2 * N - 1
        J = model_id.J
        strings = []
        for i in range(1, n - 3, 2):
            strings += [pauli.PauliString.from_dict(1.0, {i: "X", i + 2: "X"}),
                        pauli.PauliString.from_dict(J, {i: "Y", i + 2: "Y"}),
                        pauli.PauliString.from_dict(1.0, {i: "Z", i + 2: "Z"})]
        for i in range(0, n, 2):
            strings.append(pauli.PauliString.from_dict(-1.0, {i: "X"}))
        layout = chain_of_qubits(n, _two_sublattice_labels(n))
        return _pauli_terms_to_spec(strings, layout, tag, model_id)

    if tag in ("TranslationGaplessTrivial", "TranslationGaplessSPT"):
        n = N
        strings = [pauli.PauliString.from_dict(1.0, {i: "X", i + 1: "X"})
                   for i in range(n - 1)]
        start = 0 if tag.endswith("Trivial") else 1
        for i in range(start, n - 1, 2):
            strings += [pauli.PauliString.from_dict(1.0, {i: "X", i + 1: "X"}),
                        pauli.PauliString.from_dict(1.0, {i: "Y", i + 1: "Y"})]
        return _pauli_terms_to_spec(pauli._collect(strings),
                                    chain_of_qubits(n), tag, model_id)

    if tag == "ClockGaplessTrivial":
        q = model_id.q
        n = 2 * N - 1
        Z, X = clock_ops(q)
        Zd, Xd = Z.dag(), X.dag()
        terms = []
        for i in range(1, n - 3, 2):
            terms.append(Term(-1.0, (i, i + 2), (Zd, Z)))
            terms.append(Term(-1.0, (i, i + 2), (Z, Zd)))
        for i in range(n):
            terms.append(Term(-1.0, (i,), (X,)))
            terms.append(Term(-1.0, (i,), (Xd,)))
        layout = ChainLayout((q,) * n, _two_sublattice_labels(n))
        return HamiltonianSpec(layout, terms, tag, model_id)

    if tag in ("RepGTrivial", "RepGGaplessTrivial"):
        group = builtin_group(model_id.group)
        ng = group.order
        n = 2 * N - 1
        labels = tuple("u" if i % 2 == 0 else "e" for i in range(n))
        layout = ChainLayout((ng,) * n, labels)
        pe = np.zeros((ng, ng), dtype=complex)
        pe[0, 0] = 1.0
        proj_e = LocalOperator(pe, (ng,), name="proj_e", hermitian=True)
        unif = LocalOperator(np.full((ng, ng), 1.0 / ng, dtype=complex), (ng,),
                             name="proj_uniform", hermitian=True)
        terms = []
        # sum of all irrep characters weighted by dimension = |G| |e><e|;
        # sum of all left-multiplication operators = |G| * uniform projector
        for i in range(1, n, 2):
            terms.append(Term(-float(ng), (i,), (proj_e,)))
        for i in range(0, n, 2):
            terms.append(Term(-float(ng), (i,), (unif,)))
        if tag == "RepGGaplessTrivial":
            if model_id.group != "S3":
                raise ValueError("the coupled model is defined for S3")
            J = model_id.J
            r, rr = group.element_index("r"), group.element_index("rr")
            for i in range(1, n - 3, 2):
                for g in (r, rr):
                    terms.append(Term(-J, (i, i + 2),
                                      (regular_rep(group, g, "right", "X"),
                                       regular_rep(group, g, "left", "X"))))
        return HamiltonianSpec(layout, terms, tag, model_id)

    raise ValueError(f"unhandled tag {tag!r}")


def alpha_pair_perturbation(N: int, coeff: float) -> list:
    """Degeneracy-splitting perturbation terms for the (3,4) pair chain.

    Returns Term objects for coeff * Σ (Z Y Y Z + Y Z Z Y) on four consecutive
    sites; the caller chooses the coefficient, no default strength is implied.
    """
    out = []
    Z, Y = pauli_op("Z"), pauli_op("Y")
    for i in range(N - 3):
        out.append(Term(coeff, (i, i + 1, i + 2, i + 3), (Z, Y, Y, Z)))
        out.append(Term(coeff, (i, i + 1, i + 2, i + 3), (Y, Z, Z, Y)))
    return out


def _x_string(sites, name, op=None):
    op = op or pauli_op("X")
    return ProductOperator(tuple((s, op) for s in sites), name=name)


def symmetry_generators(model_id: ModelId) -> list:
    """Protecting symmetry strings (products of on-site unitaries).

    Only genuine symmetries of the open-chain Hamiltonian are returned; for
    conjugated models the strings carry the exact boundary dressing produced
    by the entangler.  Continuous symmetries (e.g. the U(1) of the XYX chain)
    are not enumerated here.
    """
    tag = model_id.tag
    N = model_id.N

    if tag in ("Z2Z2GaplessTrivial", "XYXGaplessTrivial"):
        n = 2 * N - 1
        return [_x_string(range(0, n, 2), "X_spectator"),
                _x_string(range(1, n, 2), "X_matter")]

    if tag == "Z2Z2GaplessSPT":
        n = 2 * N - 1
        spect = _x_string(range(0, n, 2), "X_spectator")
        X, Z = pauli_op("X"), pauli_op("Z")
        factors = [(0, Z)] + [(i, X) for i in range(1, n - 1, 2)] + [(n - 1, Z)]
        matter = ProductOperator(tuple(factors), name="Z-dressed X_matter")
        return [spect, matter]

    if tag == "IsingOBC":
        if model_id.bc == "fixed":
            return []
        return [_x_string(range(N), "X_all")]

    if tag in ("AlphaChain", "AlphaChainPair"):
        gens = [_x_string(range(N), "X_all")]
        if tag == "AlphaChain" and model_id.alpha % 2 == 0:
            gens += [_x_string(range(0, N, 2), "X_even"),
                     _x_string(range(1, N, 2), "X_odd")]
        return gens

    if tag in ("XYXChain", "TranslationGaplessTrivial", "TranslationGaplessSPT"):
        return [_x_string(range(build_model(model_id).n_sites), "X_all")]

    if tag == "ClockGaplessTrivial":
        n = 2 * N - 1
        _, X = clock_ops(model_id.q)
        return [_x_string(range(0, n, 2), "shift_spectator", op=X),
                _x_string(range(1, n, 2), "shift_matter", op=X)]

    if tag in ("RepGTrivial", "RepGGaplessTrivial"):
        group = builtin_group(model_id.group)
        n = 2 * N - 1
        usites = range(0, n, 2)
        esites = range(1, n, 2)
        gens = []
        for g in range(group.order):
            gens.append(_x_string(usites, f"left[{group.elements[g]}]",
                                  op=regular_rep(group, g, "left", "X")))
            gens.append(_x_string(usites, f"right[{group.elements[g]}]",
                                  op=regular_rep(group, g, "right", "X")))
            adj = LocalOperator(regular_rep(group, g, "left", "X").mat
                                @ regular_rep(group, g, "right", "X").mat,
                                (group.order,), unitary=True,
                                name=f"adj[{group.elements[g]}]")
            gens.append(_x_string(esites, f"adjoint[{group.elements[g]}]", op=adj))
        for nm, mats in group.irreps.items():
            if mats.shape[1] == 1 and nm != "triv":
                diag = irrep_diagonal(group, nm, 0, 0)
                diag = LocalOperator(diag.mat, diag.site_dims, name=f"Z[{nm}]",
                                     unitary=True)
                gens.append(_x_string(esites, f"Zstring[{nm}]", op=diag))
        return gens

    raise ValueError(f"no symmetry catalog for tag {tag!r}")


def projective_edge_generators(model_id: ModelId, cut: int) -> list:
    """Boundary symmetry strings restricted to sites right of the cut bond.

    For the conjugated models the two returned strings commute with the
    reduced state but only commute with each other up to a phase; for trivial
    models the plain restricted strings (which truly commute) are returned.
    ``cut`` is the bond index: the kept block starts at site cut + 1.
    """
    tag = model_id.tag
    n = 2 * model_id.N - 1
    first = cut + 1
    if first >= n - 1 or first % 2 == 0:
        raise ValueError("cut must leave a block starting on a matter site")
    if tag in ("Z2Z2GaplessSPT", "Z2Z2GaplessTrivial"):
        X, Z = pauli_op("X"), pauli_op("Z")
        xs_spect = [(i, X) for i in range(first + 1, n, 2)]
        xs_matter = [(i, X) for i in range(first, n, 2)]
        if tag == "Z2Z2GaplessTrivial":
            return [ProductOperator(tuple(xs_spect), "X_spectator|B"),
                    ProductOperator(tuple(xs_matter), "X_matter|B")]
        g1 = ProductOperator(tuple([(first, Z)] + xs_spect), "Z-dressed|B")
        g2 = ProductOperator(tuple(xs_matter), "X_matter|B")
        return [g1, g2]
    if tag == "ClockGaplessTrivial":
        q = model_id.q
        Z, X = clock_ops(q)
        p = model_id.p % q
        zminus = LocalOperator(np.linalg.matrix_power(Z.dag().mat, p), (q,),
                               name=f"Z^-{p}", unitary=True)
        xs_spect = [(i, X) for i in range(first + 1, n, 2)]
        xs_matter = [(i, X) for i in range(first, n, 2)]
        if p == 0:
            return [ProductOperator(tuple(xs_spect), "shift_spectator|B"),
                    ProductOperator(tuple(xs_matter), "shift_matter|B")]
        g1 = ProductOperator(tuple([(first, zminus)] + xs_spect),
                             "clock-dressed|B")
        g2 = ProductOperator(tuple(xs_matter), "shift_matter|B")
        return [g1, g2]
    raise ValueError(f"no edge-generator catalog for tag {tag!r}")


def pinned_product_state(spec: HamiltonianSpec) -> np.ndarray:
    """Exact product ground state for the fully pinned trivial models."""
    labels = spec.layout.labels
    if labels is None:
        raise ValueError("model has no sublattice labels")
    kets = []
    for d, lab in zip(spec.layout.site_dims, labels):
        if lab == "x":
            kets.append(plus_ket() if d == 2 else uniform_ket(d))
        elif lab == "u":
            kets.append(uniform_ket(d))
        elif lab == "e":
            kets.append(basis_ket(d, 0))
        else:
            raise ValueError("model is not fully pinned (matter sites present)")
    return product_state(spec.layout, kets)
