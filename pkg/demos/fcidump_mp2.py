"""
Handing periodic integrals to a correlated code
===============================================

Only the integrals know about the torus.  Once they are in the MO basis any
molecular post-Hartree-Fock method applies unchanged, so we export an
FCIDUMP, read it back and compare MP2 (and, for this tiny case, FCI).

Run with ``python demos/fcidump_mp2.py``.
"""
import tempfile
from pathlib import Path

from cliffordqc.basis import build_ao_basis, load_basis
from cliffordqc.clifford_integrals import assemble_clifford_tensors
from cliffordqc.export import read_fcidump, write_fcidump
from cliffordqc.post_hf import ao_to_mo, fci_tiny, mp2_energy
from cliffordqc.scf import run_rhf
from cliffordqc.topology import build_torus_chain

geometry = build_torus_chain(4, 1.8)
tensors = assemble_clifford_tensors(geometry, build_ao_basis(geometry, load_basis("sto-3g")))
scf = run_rhf(tensors, geometry.n_electrons)
mo = ao_to_mo(tensors, scf)
print(f"RHF  {scf.energy:.10f}")
print(f"MP2  {mp2_energy(mo):.10f}  (correlation)")
print(f"FCI  {fci_tiny(mo, geometry.n_electrons) - scf.energy:.10f}  (correlation)")

with tempfile.TemporaryDirectory() as tmp:
    path = write_fcidump(mo, tensors.nuclear_repulsion, Path(tmp) / "FCIDUMP", n_electrons=geometry.n_electrons)
    print(path.read_text().splitlines()[0])
    back = read_fcidump(path).as_mo_integrals()
    print(f"MP2 after round trip differs by {abs(mp2_energy(back) - mp2_energy(mo)):.1e}")
