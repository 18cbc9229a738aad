"""Entanglement spectra of symmetric spin chains.

Build gapless chain models with decorated symmetry sectors, entangle or
dephase them at a cut, and compare the resulting spectra against conformal
tower predictions, matrix-product-unitary indices and group-algebra
identities.

Submodules are imported lazily so that the command-line entry point can
pin thread counts before any numerical library loads.
"""

from __future__ import annotations

__version__ = "0.1.0"

_SUBMODULES = (
    "channels", "circuits", "cli", "dmrg", "groups", "kernels", "models",
    "mps", "mpu", "pauli", "sites", "solve", "spectra", "towers", "verify",
    "workflows",
)

_EXPORTS = {
    # sites / layouts
    "ChainLayout": "sites",
    "LocalOperator": "sites",
    "chain_of_qubits": "sites",
    "standard_cut": "sites",
    "embed_sparse": "sites",
    "embed_and_apply": "sites",
    "product_state": "sites",
    # models
    "ModelId": "models",
    "HamiltonianSpec": "models",
    "Term": "models",
    "build_model": "models",
    "symmetry_generators": "models",
    "projective_edge_generators": "models",
    "pinned_product_state": "models",
    # solvers
    "ground_state": "solve",
    "dmrg_ground": "dmrg",
    # circuits / channels
    "Circuit": "circuits",
    "entangler_circuit": "circuits",
    "KrausChannel": "channels",
    "build_channel": "channels",
    "apply_channel": "channels",
    "compose": "channels",
    "stinespring_dilate": "channels",
    # spectra
    "entanglement_spectrum": "spectra",
    "rdm_right": "spectra",
    "rescale_energies": "spectra",
    "cluster_levels": "spectra",
    "degeneracy_multiple": "spectra",
    "sector_labels": "spectra",
    # towers
    "ising_tower": "towers",
    "combined_tower": "towers",
    "boundary_entropy": "towers",
    "luttinger_parameter": "towers",
    "boson_radius": "towers",
    "boson_nn_levels": "towers",
    "boson_dn_levels": "towers",
    "match_tower": "towers",
    # groups / mpu
    "builtin_group": "groups",
    "regular_rep": "groups",
    "MPUTensor": "mpu",
    "mpu_index": "mpu",
    "standard_form": "mpu",
    "brickwork_mpu": "mpu",
    # verify
    "run_suite": "verify",
    "SUITES": "verify",
}

__all__ = ["__version__", *sorted(_EXPORTS), *_SUBMODULES]


def __getattr__(name):
    import importlib

    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    if name in _EXPORTS:
        module = importlib.import_module(f".{_EXPORTS[name]}", __name__)
        return getattr(module, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(__all__)
