"""MO transformation, closed-shell MP2 and a tiny determinant FCI.

The FCI code works on spin-orbital bit strings and applies the
second-quantized Hamiltonian term by term; it shares no formulas with the
MP2 expression and so serves as its oracle (see :func:`pt2_from_determinants`).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .cgto_integrals import IntegralTensors, pack_eri
from .errors import ConfigError, ConvergenceError
from .scf import ScfResult

FCI_MAX_ORBITALS = 4
DEGENERACY_GAP = 1e-8


@dataclass(frozen=True)
class MoIntegrals:
    h: np.ndarray  # MO one-electron integrals
    eri: np.ndarray  # (pq|rs) in chemists' notation, dense
    orbital_energies: np.ndarray
    n_occ: int
    nuclear_repulsion: float
    coefficients: np.ndarray | None = None

    @property
    def n_orb(self) -> int:
        return self.h.shape[0]

    @property
    def n_virt(self) -> int:
        return self.n_orb - self.n_occ

    @property
    def eri_packed(self) -> np.ndarray:
        return pack_eri(self.eri)

    def hf_energy(self) -> float:
        o = slice(0, self.n_occ)
        J = np.einsum("iijj->", self.eri[o, o, o, o])
        K = np.einsum("ijji->", self.eri[o, o, o, o])
        return float(2.0 * np.trace(self.h[o, o]) + 2.0 * J - K + self.nuclear_repulsion)


def transform_eri(eri: np.ndarray, C: np.ndarray) -> np.ndarray:
    """(pq|rs) = sum C_mu p C_nu q C_la r C_si s (mu nu|la si), one index at a time."""
    out = np.tensordot(eri, C, axes=([0], [0]))  # nu la si p
    out = np.tensordot(out, C, axes=([0], [0]))  # la si p q
    out = np.tensordot(out, C, axes=([0], [0]))  # si p q r
    out = np.tensordot(out, C, axes=([0], [0]))  # p q r s
    return out


def ao_to_mo(tensors: IntegralTensors, scf: ScfResult, force: bool = False) -> MoIntegrals:
    if not scf.converged and not force:
        raise ConvergenceError("MO transformation requested for an unconverged SCF (pass force=True to override)")
    C = scf.coefficients
    h = C.T @ tensors.H @ C
    return MoIntegrals(0.5 * (h + h.T), symmetrize_eri(transform_eri(tensors.eri, C)), np.asarray(scf.orbital_energies), scf.n_occ, tensors.nuclear_repulsion, C)


def symmetrize_eri(eri: np.ndarray) -> np.ndarray:
    """Average over the 8 index permutations so the symmetry holds bit for bit."""
    eri = 0.5 * (eri + eri.transpose(1, 0, 2, 3))
    eri = 0.5 * (eri + eri.transpose(0, 1, 3, 2))
    return 0.5 * (eri + eri.transpose(2, 3, 0, 1))


def mp2_energy(mo: MoIntegrals) -> float:
    """Closed-shell MP2 correlation energy from canonical orbitals."""
    no, nv = mo.n_occ, mo.n_virt
    if nv == 0 or no == 0:
        return 0.0
    eps = mo.orbital_energies
    homo, lumo = eps[no - 1], eps[no]
    if lumo - homo < DEGENERACY_GAP:
        raise ConvergenceError(f"occupied/virtual near-degeneracy between orbitals {no - 1} and {no} (gap {lumo - homo:.3e})")
    ovov = mo.eri[:no, no:, :no, no:]  # (ia|jb)
    eo, ev = eps[:no], eps[no:]
    denom = eo[:, None, None, None] - ev[None, :, None, None] + eo[None, None, :, None] - ev[None, None, None, :]
    return float(np.sum(ovov * (2.0 * ovov - ovov.transpose(0, 3, 2, 1)) / denom))


# ---------------------------------------------------------------------------
# determinant machinery (spin orbitals 2p = alpha, 2p+1 = beta)


def _spin_integrals(mo: MoIntegrals):
    n = mo.n_orb
    h = np.zeros((2 * n, 2 * n))
    g = np.zeros((2 * n,) * 4)
    for s in (0, 1):
        h[s::2, s::2] = mo.h
        for t in (0, 1):
            g[s::2, s::2, t::2, t::2] = mo.eri
    return h, g


def _annihilate(det: int, p: int):
    if not det >> p & 1:
        return None, 0
    sign = -1 if bin(det & ((1 << p) - 1)).count("1") % 2 else 1
    return det ^ (1 << p), sign


def _create(det: int, p: int):
    if det >> p & 1:
        return None, 0
    sign = -1 if bin(det & ((1 << p) - 1)).count("1") % 2 else 1
    return det | (1 << p), sign


def _apply_string(det, ops):
    """Apply operators right-to-left; ``ops`` = [(p, dagger?), ...] in written order."""
    sign = 1
    for p, dag in reversed(ops):
        det, s = (_create if dag else _annihilate)(det, p)
        if det is None:
            return None, 0
        sign *= s
    return det, sign


def determinant_space(n_orb: int, n_electrons: int):
    """Ms = 0 determinants as spin-orbital bit strings, HF determinant first."""
    na = n_electrons // 2
    nb = n_electrons - na
    alpha = list(combinations(range(n_orb), na))
    beta = list(combinations(range(n_orb), nb))
    dets = []
    for a in alpha:
        for b in beta:
            d = 0
            for p in a:
                d |= 1 << (2 * p)
            for p in b:
                d |= 1 << (2 * p + 1)
            dets.append(d)
    hf = 0
    for p in range(na):
        hf |= 1 << (2 * p)
    for p in range(nb):
        hf |= 1 << (2 * p + 1)
    dets.remove(hf)
    return [hf] + dets


def hamiltonian_matrix(mo: MoIntegrals, dets) -> np.ndarray:
    """<I|H|J> with H = sum h_pq p^+ q + 1/2 sum (pq|rs) p^+ r^+ s q + E_nuc."""
    h, g = _spin_integrals(mo)
    nso = h.shape[0]
    index = {d: i for i, d in enumerate(dets)}
    H = np.zeros((len(dets), len(dets)))
    nz1 = [(p, q) for p in range(nso) for q in range(nso) if h[p, q] != 0.0]
    nz2 = np.argwhere(g != 0.0)
    for j, det in enumerate(dets):
        for p, q in nz1:
            out, s = _apply_string(det, [(p, True), (q, False)])
            if out is not None:
                H[index[out], j] += s * h[p, q]
        for p, q, r, t in nz2:
            out, s = _apply_string(det, [(p, True), (r, True), (t, False), (q, False)])
            if out is not None:
                H[index[out], j] += 0.5 * s * g[p, q, r, t]
    H += mo.nuclear_repulsion * np.eye(len(dets))
    return 0.5 * (H + H.T)


def _guard(mo: MoIntegrals, n_electrons: int):
    if mo.n_orb > FCI_MAX_ORBITALS:
        raise ConfigError(f"FCI oracle limited to {FCI_MAX_ORBITALS} orbitals, got {mo.n_orb}")
    if n_electrons % 2 or n_electrons > 2 * mo.n_orb or n_electrons <= 0:
        raise ConfigError(f"invalid electron count {n_electrons} for {mo.n_orb} orbitals")


def fci_tiny(mo: MoIntegrals, n_electrons: int) -> float:
    """Exact ground-state energy in the Ms = 0 determinant space (total energy)."""
    _guard(mo, n_electrons)
    dets = determinant_space(mo.n_orb, n_electrons)
    return float(np.linalg.eigvalsh(hamiltonian_matrix(mo, dets))[0])


def pt2_from_determinants(mo: MoIntegrals, n_electrons: int) -> float:
    """Second-order Moller-Plesset energy from explicit determinant couplings.

    E2 = sum_D |<D|H|HF>|^2 / (E0_HF - E0_D) with H0 = sum_p eps_p n_p.
    """
    _guard(mo, n_electrons)
    dets = determinant_space(mo.n_orb, n_electrons)
    H = hamiltonian_matrix(mo, dets)
    eps_so = np.repeat(mo.orbital_energies, 2)

    def e0(det):
        return sum(eps_so[p] for p in range(len(eps_so)) if det >> p & 1)

    ref = e0(dets[0])
    return float(sum(H[i, 0] ** 2 / (ref - e0(d)) for i, d in enumerate(dets) if i and H[i, 0] != 0.0))
