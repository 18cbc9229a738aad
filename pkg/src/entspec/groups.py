"""Finite groups with unitary irreps, regular representations, projectors.

A :class:`GroupSpec` bundles the multiplication table, inverses and a complete
set of unitary irreducible representations.  Built-ins cover the cyclic groups
Z2..Z6 and the symmetric group S3 (element order e, r, r², s, sr, sr²).
Group files use a small line-oriented text format, see :func:`load_group`.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .sites import LocalOperator


@dataclass(frozen=True)
class GroupSpec:
    """A finite group with named elements and unitary irreps.

    ``mult[i, j]`` is the index of g_i g_j; element 0 must be the identity.
    ``irreps`` maps irrep names to arrays of shape (order, d, d).
    """

    name: str
    elements: tuple
    mult: np.ndarray
    irreps: dict

    def __post_init__(self):
        n = self.order
        mult = np.asarray(self.mult, dtype=int)
        object.__setattr__(self, "mult", mult)
        if mult.shape != (n, n):
            raise ValueError("multiplication table shape mismatch")
        if sorted(set(mult.reshape(-1))) != list(range(n)):
            raise ValueError("multiplication table entries out of range")
        # identity first, then full group axioms
        if not (np.all(mult[0] == np.arange(n)) and np.all(mult[:, 0] == np.arange(n))):
            raise ValueError("element 0 is not the identity")
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if mult[mult[i, j], k] != mult[i, mult[j, k]]:
                        raise ValueError("multiplication table is not associative")
        inv = np.full(n, -1, dtype=int)
        for i in range(n):
            hits = np.where(mult[i] == 0)[0]
            if hits.size != 1:
                raise ValueError("element without unique inverse")
            inv[i] = hits[0]
        object.__setattr__(self, "_inv", inv)
        # irreps: unitary homomorphisms, completeness
        dimsq = 0
        for nm, mats in self.irreps.items():
            mats = np.asarray(mats, dtype=complex)
            self.irreps[nm] = mats
            if mats.shape[0] != n or mats.shape[1] != mats.shape[2]:
                raise ValueError(f"irrep {nm!r} has wrong shape")
            d = mats.shape[1]
            dimsq += d * d
            if not np.allclose(mats[0], np.eye(d), atol=1e-12):
                raise ValueError(f"irrep {nm!r} does not map identity to 1")
            for g in range(n):
                if np.linalg.norm(mats[g] @ mats[g].conj().T - np.eye(d)) > 1e-12 * d:
                    raise ValueError(f"irrep {nm!r} is not unitary at element {g}")
                for h in range(n):
                    if np.linalg.norm(mats[g] @ mats[h] - mats[mult[g, h]]) > 1e-12 * d:
                        raise ValueError(f"irrep {nm!r} is not a homomorphism")
        if dimsq != n:
            raise ValueError("irrep dimensions do not satisfy sum d^2 = |G|")

    @property
    def order(self):
        return len(self.elements)

    def inverse(self, g: int) -> int:
        return int(self._inv[g])

    def element_index(self, label: str) -> int:
        return self.elements.index(label)

    def power(self, g: int, p: int) -> int:
        """g^p (p >= 0)."""
        out = 0
        for _ in range(p):
            out = int(self.mult[out, g])
        return out

    def irrep_dims(self):
        return {nm: mats.shape[1] for nm, mats in self.irreps.items()}

    def check_orthogonality(self, tol=1e-10):
        """Great orthogonality of the irrep matrix elements.

        (|G|/d_Γ) δ_{ΓΓ'} δ_{αα'} δ_{ββ'} = Σ_g Γ_{αβ}(g) conj(Γ'_{α'β'}(g)).
        """
        n = self.order
        names = list(self.irreps)
        for a in names:
            A = self.irreps[a]
            da = A.shape[1]
            for b in names:
                B = self.irreps[b]
                db = B.shape[1]
                s = np.einsum("gij,gkl->ijkl", A, B.conj())
                target = np.zeros_like(s)
                if a == b:
                    for i in range(da):
                        for j in range(db):
                            target[i, j, i, j] = n / da
                if np.abs(s - target).max() > tol:
                    raise ValueError(
                        f"great orthogonality violated for irreps {a!r},{b!r}")
        return True


def _cyclic(q: int) -> GroupSpec:
    mult = (np.arange(q)[:, None] + np.arange(q)[None, :]) % q
    omega = np.exp(2j * np.pi / q)
    irreps = {}
    for k in range(q):
        irreps[f"chi{k}"] = (omega ** (k * np.arange(q))).reshape(q, 1, 1)
    return GroupSpec(f"Z{q}", tuple(str(j) for j in range(q)), mult, irreps)


def _s3() -> GroupSpec:
    # elements as permutations of (0,1,2); r = cyclic shift, s = swap(0,1)
    e = (0, 1, 2)
    r = (1, 2, 0)       # r(0)=1, r(1)=2, r(2)=0
    rr = (2, 0, 1)
    s = (1, 0, 2)

    def compose(a, b):  # (a∘b)(x) = a(b(x))
        return tuple(a[b[x]] for x in range(3))

    sr = compose(s, r)
    srr = compose(s, rr)
    perms = [e, r, rr, s, sr, srr]
    labels = ("e", "r", "rr", "s", "sr", "srr")
    mult = np.zeros((6, 6), dtype=int)
    for i, a in enumerate(perms):
        for j, b in enumerate(perms):
            mult[i, j] = perms.index(compose(a, b))
    triv = np.ones((6, 1, 1), dtype=complex)
    sign = np.array([1, 1, 1, -1, -1, -1], dtype=complex).reshape(6, 1, 1)
    c, s2 = -0.5, np.sqrt(3.0) / 2.0
    rot = np.array([[c, -s2], [s2, c]])
    ref = np.array([[1.0, 0.0], [0.0, -1.0]])
    E = np.zeros((6, 2, 2), dtype=complex)
    E[0] = np.eye(2)
    E[1] = rot
    E[2] = rot @ rot
    E[3] = ref
    E[4] = ref @ rot
    E[5] = ref @ rot @ rot
    return GroupSpec("S3", labels, mult,
                     {"triv": triv, "sign": sign, "E": E})


def _z2z2() -> GroupSpec:
    # element (g1, g2) at index 2*g1 + g2; multiplication is componentwise xor
    labels = ("e", "a", "b", "ab")
    mult = np.zeros((4, 4), dtype=int)
    for g in range(4):
        for h in range(4):
            mult[g, h] = (((g >> 1) ^ (h >> 1)) << 1) | ((g ^ h) & 1)
    irreps = {}
    for k in range(4):
        chars = np.array([(-1.0) ** ((k >> 1) * (g >> 1) + (k & 1) * (g & 1))
                          for g in range(4)], dtype=complex)
        irreps[f"chi{(k >> 1)}{k & 1}"] = chars.reshape(4, 1, 1)
    return GroupSpec("Z2xZ2", labels, mult, irreps)


_BUILTINS = {}


def builtin_group(name: str) -> GroupSpec:
    """Built-in groups: "S3", "Z2xZ2" and "Z2".."Z6"."""
    if name not in _BUILTINS:
        if name == "S3":
            _BUILTINS[name] = _s3()
        elif name == "Z2xZ2":
            _BUILTINS[name] = _z2z2()
        elif name.startswith("Z") and name[1:].isdigit() and 2 <= int(name[1:]) <= 6:
            _BUILTINS[name] = _cyclic(int(name[1:]))
        else:
            raise KeyError(f"no builtin group {name!r}")
    return _BUILTINS[name]


def regular_rep(group: GroupSpec, g, side: str = "left",
                kind: str = "X") -> LocalOperator:
    """Regular-representation operator on a |G|-dimensional site.

    kind "X", side "left":  |h> -> |gh>      (permutation matrix)
    kind "X", side "right": |h> -> |h g^-1>  (permutation matrix)
    kind "Z": diagonal projector |g><g| (side "right" uses |g^-1><g^-1|).
    """
    if isinstance(g, str):
        g = group.element_index(g)
    n = group.order
    mat = np.zeros((n, n), dtype=complex)
    if kind == "X":
        if side == "left":
            for h in range(n):
                mat[group.mult[g, h], h] = 1.0
        elif side == "right":
            ginv = group.inverse(g)
            for h in range(n):
                mat[group.mult[h, ginv], h] = 1.0
        else:
            raise ValueError("side must be 'left' or 'right'")
        return LocalOperator(mat, (n,), name=f"X[{side},{group.elements[g]}]",
                             unitary=True)
    if kind == "Z":
        idx = g if side == "left" else group.inverse(g)
        mat[idx, idx] = 1.0
        return LocalOperator(mat, (n,), name=f"Z[{side},{group.elements[g]}]",
                             hermitian=True)
    raise ValueError("kind must be 'X' or 'Z'")


def irrep_diagonal(group: GroupSpec, irrep: str, a: int, b: int) -> LocalOperator:
    """Diagonal operator Σ_g Γ_{ab}(g) |g><g| for a unitary irrep Γ."""
    mats = group.irreps[irrep]
    mat = np.diag(mats[:, a, b])
    herm = bool(np.allclose(mat, mat.conj().T, atol=1e-12))
    return LocalOperator(mat, (group.order,),
                         name=f"Zirr[{irrep},{a},{b}]", hermitian=herm)


def irrep_projector(group: GroupSpec, irrep: str, a: int, b: int,
                    side: str = "right") -> LocalOperator:
    """sqrt(d/|G|) Σ_g Γ_{ab}(g) X^[g] on a single group site.

    Idempotent up to the factor sqrt(|G|/d) for a = b and nilpotent for
    a != b.  Dividing by sqrt(|G|) turns the full family (all irreps and
    index pairs) into a Kraus set of a dephasing-type channel.
    """
    mats = group.irreps[irrep]
    d = mats.shape[1]
    n = group.order
    acc = np.zeros((n, n), dtype=complex)
    for g in range(n):
        acc += mats[g, a, b] * regular_rep(group, g, side=side, kind="X").mat
    return LocalOperator(np.sqrt(d / n) * acc, (n,),
                         name=f"P[{irrep},{a},{b},{side}]")


def irrep_ket(group: GroupSpec, irrep: str, a: int, b: int) -> np.ndarray:
    """Normalized Fourier ket sqrt(d/|G|) Σ_g Γ_{ab}(g) |g>."""
    mats = group.irreps[irrep]
    d = mats.shape[1]
    return np.sqrt(d / group.order) * mats[:, a, b].copy()


def save_group(group: GroupSpec, path):
    """Write a GroupSpec in the plain-text interchange format."""
    buf = io.StringIO()
    buf.write(f"group {group.name}\n")
    buf.write(f"order {group.order}\n")
    buf.write("elements " + " ".join(group.elements) + "\n")
    buf.write("mult\n")
    for row in group.mult:
        buf.write(" ".join(str(int(x)) for x in row) + "\n")
    buf.write("inverse " + " ".join(str(group.inverse(g))
                                    for g in range(group.order)) + "\n")
    for nm, mats in group.irreps.items():
        d = mats.shape[1]
        buf.write(f"irrep {nm} {d}\n")
        for g in range(group.order):
            flat = []
            for x in mats[g].reshape(-1):
                flat.append(repr(float(x.real)))
                flat.append(repr(float(x.imag)))
            buf.write(" ".join(flat) + "\n")
    buf.write("end\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def load_group(path) -> GroupSpec:
    """Read a group file written by :func:`save_group`.

    The format is line oriented: ``group NAME``, ``order N``, ``elements ...``,
    ``mult`` followed by N rows, ``inverse ...``, then ``irrep NAME DIM``
    blocks with one line of flattened re/im pairs per element, ending with
    ``end``.  All group axioms and irrep properties are re-validated on load.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    it = iter(lines)
    name = next(it).split()[1]
    order = int(next(it).split()[1])
    elements = tuple(next(it).split()[1:])
    if len(elements) != order:
        raise ValueError("group file: element count mismatch")
    if next(it) != "mult":
        raise ValueError("group file: expected mult table")
    mult = np.array([[int(x) for x in next(it).split()] for _ in range(order)])
    inv_line = next(it).split()
    if inv_line[0] != "inverse":
        raise ValueError("group file: expected inverse list")
    declared_inv = [int(x) for x in inv_line[1:]]
    irreps = {}
    ln = next(it)
    while ln != "end":
        _, nm, dstr = ln.split()
        d = int(dstr)
        mats = np.zeros((order, d, d), dtype=complex)
        for g in range(order):
            vals = [float(x) for x in next(it).split()]
            if len(vals) != 2 * d * d:
                raise ValueError(f"group file: irrep {nm!r} row length")
            re = np.array(vals[0::2]).reshape(d, d)
            im = np.array(vals[1::2]).reshape(d, d)
            mats[g] = re + 1j * im
        irreps[nm] = mats
        ln = next(it)
    spec = GroupSpec(name, elements, mult, irreps)
    for g in range(order):
        if spec.inverse(g) != declared_inv[g]:
            raise ValueError("group file: declared inverses inconsistent")
    return spec
