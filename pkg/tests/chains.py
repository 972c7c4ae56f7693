"""Cached hydrogen-chain RHF energies shared by the scan-level tests."""
from __future__ import annotations

import functools

from cliffordqc.cli import RunConfig, run_calculation

SPACING = 1.8


@functools.lru_cache(maxsize=None)
def chain_rhf(n_atoms: int, topology: str, basis: str):
    """(total energy, energy per atom, converged) for an H chain at 1.8 bohr."""
    calc = run_calculation(RunConfig(chain=n_atoms, spacing=SPACING, topology=topology, basis=basis))
    return calc.scf.energy, calc.scf.energy / n_atoms, calc.scf.converged


def per_atom(ns, topology, basis):
    return [chain_rhf(n, topology, basis)[1] for n in ns]
