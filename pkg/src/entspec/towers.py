"""Boundary-spectrum towers used to identify rescaled entanglement spectra.

The Ising towers are generated exactly: the identity and epsilon towers
count subsets of distinct half-odd-integer modes {1/2, 3/2, ...} with even
and odd cardinality, the sigma tower counts partitions into distinct
positive integers on top of 1/16.  Multiplicities are therefore exact
integers and level positions exact fractions.

The free-boson towers carry levels E(e, n) = (ΔΘ/2π + eR/2)²/2 + n for
integer winding e and descendant level n with p(n) states, and E = n for
Dirichlet–Neumann ends.  The radius follows from the Luttinger parameter
K(J) = π / (2π − 2·arccos J), R = 2√K.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

ISING_SECTORS = ("identity", "epsilon", "sigma")


def partitions(n_max):
    """p(0..n_max): partitions into positive integers."""
    p = [0] * (n_max + 1)
    p[0] = 1
    for part in range(1, n_max + 1):
        for s in range(part, n_max + 1):
            p[s] += p[s - part]
    return p


def distinct_partitions(n_max):
    """q(0..n_max): partitions into distinct positive integers."""
    q = [0] * (n_max + 1)
    q[0] = 1
    for part in range(1, n_max + 1):
        for s in range(n_max, part - 1, -1):
            q[s] += q[s - part]
    return q


def _half_odd_mode_counts(max_half_units):
    """Counts of subsets of {1, 3, 5, ...} (half units) by (sum, parity)."""
    even = [0] * (max_half_units + 1)
    odd = [0] * (max_half_units + 1)
    even[0] = 1
    part = 1
    while part <= max_half_units:
        for s in range(max_half_units, part - 1, -1):
            even[s], odd[s] = (even[s] + odd[s - part],
                               odd[s] + even[s - part])
        part += 2
    return even, odd


def ising_tower(sector: str, max_delta=6):
    """Exact levels [(Fraction Δ, multiplicity), ...] of one Ising tower."""
    if sector == "sigma":
        base = Fraction(1, 16)
        q = distinct_partitions(int(max_delta))
        out = [(base + n, q[n]) for n in range(int(max_delta) + 1)
               if q[n] and base + n <= max_delta]
        return out
    half_units = int(2 * max_delta)
    even, odd = _half_odd_mode_counts(half_units)
    counts = even if sector == "identity" else odd
    if sector not in ("identity", "epsilon"):
        raise ValueError(f"unknown sector {sector!r}")
    out = []
    for s, c in enumerate(counts):
        if c and (s % 2 == 0) == (sector == "identity"):
            out.append((Fraction(s, 2), c))
    return [(d, c) for d, c in out if d <= max_delta]


def ising_fusion(a: str, b: str):
    """Boundary-condition-changing fusion rules of the Ising sectors."""
    for s in (a, b):
        if s not in ISING_SECTORS:
            raise ValueError(f"unknown sector {s!r}")
    if a == "identity":
        return (b,)
    if b == "identity":
        return (a,)
    if a == b == "sigma":
        return ("identity", "epsilon")
    if a == b == "epsilon":
        return ("identity",)
    return ("sigma",)


def combined_tower(sectors, max_delta=6):
    """Merged tower of several sectors with multiplicities added."""
    acc = {}
    for s in sectors:
        for d, c in ising_tower(s, max_delta):
            acc[d] = acc.get(d, 0) + c
    return sorted(acc.items())


def expand_levels(levels):
    """Flatten [(Δ, mult)] into a sorted float array with repeats."""
    out = []
    for d, c in levels:
        out.extend([float(d)] * int(c))
    return np.array(sorted(out))


def boundary_entropy(bc: str) -> float:
    """Affleck–Ludwig boundary entropy of the Ising conformal boundaries."""
    if bc == "free":
        return 0.0
    if bc == "fixed":
        return -0.5 * np.log(2.0)
    raise ValueError(f"unknown boundary condition {bc!r}")


def boson_boundary_entropy_exceeds(a: str, b: str) -> bool:
    """Whether boson boundary ``a`` has strictly higher boundary entropy
    than ``b``.

    Only the ordering is defined for the compactified boson here — the
    Dirichlet boundary always lies above Neumann, at any radius — so this
    is a comparison predicate rather than a numeric g-function.
    """
    rank = {"dirichlet": 1, "neumann": 0}
    try:
        return rank[a.lower()] > rank[b.lower()]
    except KeyError:
        raise ValueError("boson boundaries are 'dirichlet' or 'neumann'") from None


def luttinger_parameter(j: float) -> float:
    """K(J) of the symmetric spin chain with anisotropy J in (−1, 1]."""
    if not -1.0 < j <= 1.0:
        raise ValueError("anisotropy must lie in (-1, 1]")
    return np.pi / (2 * np.pi - 2 * np.arccos(j))


def boson_radius(j: float) -> float:
    return 2.0 * np.sqrt(luttinger_parameter(j))


def channel_twist(radius: float) -> float:
    """Phase offset ΔΘ = πR/2 produced by the bond dephasing channel."""
    return np.pi * radius / 2.0


def boson_nn_levels(radius, delta_theta, max_delta=3.0, merge_tol=1e-9):
    """Neumann–Neumann tower [(Δ, mult)] as floats, merged when degenerate."""
    levels = {}
    nmax = int(np.floor(max_delta)) + 1
    pn = partitions(nmax)
    emax = int(np.ceil(np.sqrt(2 * max_delta) * 2 / max(radius, 1e-12))) + 2
    raw = []
    for e in range(-emax, emax + 1):
        base = 0.5 * (delta_theta / (2 * np.pi) + e * radius / 2.0) ** 2
        if base > max_delta:
            continue
        for n in range(nmax + 1):
            val = base + n
            if val <= max_delta:
                raw.append((val, pn[n]))
    for val, c in sorted(raw):
        for known in levels:
            if abs(known - val) < merge_tol:
                levels[known] += c
                break
        else:
            levels[val] = c
    return sorted(levels.items())


def boson_dn_levels(max_delta=3.0):
    """Dirichlet–Neumann tower: integer levels with partition multiplicity."""
    nmax = int(np.floor(max_delta))
    pn = partitions(nmax)
    return [(float(n), pn[n]) for n in range(nmax + 1)]


@dataclass
class TowerMatch:
    name: str
    max_error: float
    n_compared: int
    ok: bool


def compare_levels(measured, levels, n_levels, atol):
    """Largest deviation of the lowest measured values from a tower."""
    ref = expand_levels(levels)
    meas = np.sort(np.asarray(measured, dtype=float))
    k = min(n_levels, meas.size, ref.size)
    if k == 0:
        return np.inf, 0
    return float(np.max(np.abs(meas[:k] - ref[:k]))), k


def nearest_deviations(measured, levels, n_levels=6):
    """Distance of each of the lowest measured values to the closest level.

    Unlike :func:`compare_levels`, this does not pair by order: each
    measured value is scored against the nearest predicted position, so a
    slowly converging level is compared with its own target rather than
    shifting every level above it.  ``levels`` may be ``[(Δ, mult)]`` pairs
    or plain positions; multiplicities are ignored.
    """
    vals = np.array([float(l[0]) if isinstance(l, (tuple, list)) else float(l)
                     for l in levels])
    if vals.size == 0:
        raise ValueError("need at least one predicted level")
    meas = np.sort(np.asarray(measured, dtype=float))[:n_levels]
    return np.array([float(np.min(np.abs(vals - m))) for m in meas])


def nearest_match(measured, levels, n_levels=6, atol=0.15,
                  name="") -> TowerMatch:
    """Tower match by nearest-level deviations of the lowest entries."""
    devs = nearest_deviations(measured, levels, n_levels=n_levels)
    err = float(np.max(devs)) if devs.size else np.inf
    return TowerMatch(name=name, max_error=err, n_compared=int(devs.size),
                      ok=err <= atol)


def match_tower(measured, candidates, n_levels=6, atol=0.15) -> TowerMatch:
    """Best-matching tower among candidates [(name, levels)], by max error."""
    best = None
    for name, levels in candidates:
        err, k = compare_levels(measured, levels, n_levels, atol)
        if best is None or err < best.max_error:
            best = TowerMatch(name=name, max_error=err, n_compared=k,
                              ok=err <= atol)
    return best
