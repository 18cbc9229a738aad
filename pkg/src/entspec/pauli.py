"""Sparse Pauli-string algebra with Clifford and rotation conjugation.

Used by the model catalog to produce conjugated Hamiltonians as explicit term
lists: controlled-Z conjugation maps Pauli strings to Pauli strings, and
conjugation by on-site X rotations splits a string into at most two, so the
transformed Hamiltonians stay local and matrix-product friendly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# single-qubit multiplication table: (phase, result) of row*col
_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}


@dataclass(frozen=True)
class PauliString:
    """coeff * Π_site pauli_site, stored sparsely as {site: 'X'|'Y'|'Z'}."""

    coeff: complex
    factors: tuple  # sorted tuple of (site, letter)

    @staticmethod
    def from_dict(coeff, d):
        items = tuple(sorted((s, p) for s, p in d.items() if p != "I"))
        return PauliString(complex(coeff), items)

    def as_dict(self):
        return dict(self.factors)

    def __mul__(self, other):
        d = self.as_dict()
        phase = self.coeff * other.coeff
        for s, p in other.factors:
            if s in d:
                ph, res = _MUL[(d[s], p)]
                phase *= ph
                if res == "I":
                    del d[s]
                else:
                    d[s] = res
            else:
                d[s] = p
        return PauliString.from_dict(phase, d)

    def conjugate_cz(self, i, j):
        """CZ_{ij} P CZ_{ij} as a single Pauli string."""
        d = self.as_dict()
        out = PauliString.from_dict(self.coeff, d)
        extra = {}
        for a, b in ((i, j), (j, i)):
            if d.get(a, "I") in ("X", "Y"):
                extra[b] = extra.get(b, 0) + 1
        for site, count in extra.items():
            if count % 2:
                out = out * PauliString.from_dict(1.0, {site: "Z"})
        return out

    def conjugate_xrot(self, site, theta):
        """exp(iθX_site) P exp(-iθX_site) as a list of strings.

        Z -> cos(2θ) Z + sin(2θ) Y and Y -> cos(2θ) Y - sin(2θ) Z; strings
        without Y/Z at the site are unchanged.
        """
        d = self.as_dict()
        p = d.get(site, "I")
        if p in ("I", "X"):
            return [self]
        c, s = np.cos(2 * theta), np.sin(2 * theta)
        rotated = []
        if p == "Z":
            d1 = dict(d); d1[site] = "Z"
            d2 = dict(d); d2[site] = "Y"
            rotated = [PauliString.from_dict(self.coeff * c, d1),
                       PauliString.from_dict(self.coeff * s, d2)]
        else:  # Y
            d1 = dict(d); d1[site] = "Y"
            d2 = dict(d); d2[site] = "Z"
            rotated = [PauliString.from_dict(self.coeff * c, d1),
                       PauliString.from_dict(self.coeff * (-s), d2)]
        return [t for t in rotated if abs(t.coeff) > 1e-15]


def conjugate_terms_cz_layer(terms, bonds):
    """Conjugate every string by Π CZ_{i,i+1} over the given bonds.

    All CZ gates commute, so the order does not matter.
    """
    out = []
    for t in terms:
        for (i, j) in bonds:
            t = t.conjugate_cz(i, j)
        out.append(t)
    return out


def conjugate_terms_xrot_layer(terms, sites, theta):
    """Conjugate every string by Π exp(iθX_n) over the given sites."""
    cur = list(terms)
    for s in sites:
        nxt = []
        for t in cur:
            nxt.extend(t.conjugate_xrot(s, theta))
        cur = nxt
    return _collect(cur)


def _collect(terms):
    acc = {}
    for t in terms:
        acc[t.factors] = acc.get(t.factors, 0.0) + t.coeff
    return [PauliString(c, f) for f, c in sorted(acc.items())
            if abs(c) > 1e-14]
