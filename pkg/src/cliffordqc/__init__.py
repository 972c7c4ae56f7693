"""Gaussian-basis electronic structure on Clifford (flat-torus) supercells.

Quick start::

    from cliffordqc import build_torus_chain, load_basis, build_ao_basis
    from cliffordqc import assemble_clifford_tensors, run_rhf

    geo = build_torus_chain(6, 1.8)
    ao = build_ao_basis(geo, load_basis("sto-3g"))
    scf = run_rhf(assemble_clifford_tensors(geo, ao), geo.n_electrons)
"""
from .analysis import ScanRecord, TdlFit, compare_tdl, fit_tdl
from .basis import (
    AOBasis,
    BasisSet,
    CliffordPrimitive,
    ContractedShell,
    FreePrimitive,
    build_ao_basis,
    eval_primitive,
    load_basis,
    parse_basis_file,
)
from .cgto_integrals import IntegralTensors, assemble_free_tensors, free_eri, free_kinetic, free_nuclear, free_overlap
from .clifford_integrals import (
    CliffordProduct,
    assemble_clifford_tensors,
    clifford_eri,
    clifford_kinetic,
    clifford_nuclear,
    clifford_overlap,
    clifford_product,
)
from .errors import *  # noqa: F401,F403
from .export import read_fcidump, write_fcidump, write_run_record
from .post_hf import MoIntegrals, ao_to_mo, fci_tiny, mp2_energy
from .scf import ScfResult, ScfSettings, run_rhf
from .specfun import QuadratureSpec, bessel_i_scaled, boys, integrate_halfline
from .topology import (
    Geometry,
    SupercellTopology,
    build_ring_chain,
    build_torus_chain,
    nuclear_repulsion,
    parse_geometry,
    torus_distance,
)

__version__ = "0.1.0"
