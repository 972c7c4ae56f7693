"""Closed-shell restricted Hartree-Fock with DIIS.

Works on any :class:`IntegralTensors`, free-space or Clifford.  Density
convention: ``D = C_occ C_occ^T`` (no factor 2), so ``trace(D S) = N/2``
and ``F = H + 2J - K``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .cgto_integrals import IntegralTensors
from .errors import ConfigError, OrthogonalizationError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScfSettings:
    max_iterations: int = 200
    energy_tol: float = 1e-10
    density_tol: float = 1e-8
    gradient_tol: float = 1e-6
    diis_size: int = 8
    level_shift: float = 0.2
    #: consecutive sign flips of the energy change that switch the level shift on
    oscillation_window: int = 4
    guess: str = "core"
    initial_density: np.ndarray | None = field(default=None, compare=False, repr=False)
    orth_cutoff: float = 1e-7

    def __post_init__(self):
        if self.energy_tol <= 0 or self.density_tol <= 0 or self.gradient_tol <= 0:
            raise ConfigError("SCF thresholds must be positive")
        if self.diis_size < 2:
            raise ConfigError("DIIS subspace must hold at least 2 vectors")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be positive")
        if self.guess not in ("core", "density"):
            raise ConfigError(f"unknown initial guess {self.guess!r}")
        if self.guess == "density" and self.initial_density is None:
            raise ConfigError("guess='density' needs initial_density")


@dataclass(frozen=True)
class IterationInfo:
    iteration: int
    energy: float
    delta_energy: float
    density_rms: float
    gradient: float
    trace_ds: float
    level_shift: float


@dataclass(frozen=True)
class ScfResult:
    energy: float
    electronic_energy: float
    nuclear_repulsion: float
    orbital_energies: np.ndarray
    coefficients: np.ndarray
    density: np.ndarray
    fock: np.ndarray
    converged: bool
    n_electrons: int
    trace: tuple[IterationInfo, ...]

    @property
    def n_occ(self) -> int:
        return self.n_electrons // 2

    @property
    def iterations(self) -> int:
        return len(self.trace)


def canonical_orthogonalizer(S: np.ndarray, cutoff: float = 1e-7) -> np.ndarray:
    """X with X^T S X = 1, dropping overlap eigenvalues below ``cutoff``."""
    s, U = np.linalg.eigh(S)
    if s[0] < -1e-8 or s[-1] <= cutoff:
        cond = s[-1] / s[0] if s[0] != 0 else np.inf
        raise OrthogonalizationError(f"overlap matrix is not positive definite (condition number {cond:.3e})")
    keep = s > cutoff
    dropped = int((~keep).sum())
    if dropped:
        log.info("canonical orthogonalization dropped %d vectors (cond %.3e)", dropped, s[-1] / max(s[0], 1e-300))
    return U[:, keep] / np.sqrt(s[keep])


def fock_matrix(H: np.ndarray, eri: np.ndarray, D: np.ndarray) -> np.ndarray:
    J = np.tensordot(eri, D, axes=([2, 3], [0, 1]))
    K = np.tensordot(eri, D, axes=([1, 3], [0, 1]))
    return H + 2.0 * J - K


def electronic_energy(H, F, D) -> float:
    return float(np.sum(D * (H + F)))


class _Diis:
    def __init__(self, size: int):
        self.size = size
        self.focks: list[np.ndarray] = []
        self.errors: list[np.ndarray] = []

    def push(self, F, err):
        self.focks.append(F)
        self.errors.append(err)
        if len(self.focks) > self.size:
            self.focks.pop(0)
            self.errors.pop(0)

    def extrapolate(self):
        n = len(self.focks)
        if n < 2:
            return self.focks[-1]
        B = -np.ones((n + 1, n + 1))
        B[n, n] = 0.0
        for i in range(n):
            for j in range(i + 1):
                B[i, j] = B[j, i] = np.sum(self.errors[i] * self.errors[j])
        rhs = np.zeros(n + 1)
        rhs[n] = -1.0
        try:
            c = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            # drop the oldest vector and retry
            self.focks.pop(0)
            self.errors.pop(0)
            return self.extrapolate()
        return sum(ci * Fi for ci, Fi in zip(c[:n], self.focks))


def _occupied_density(C, n_occ):
    occ = C[:, :n_occ]
    return occ @ occ.T


def run_rhf(tensors: IntegralTensors, n_electrons: int, settings: ScfSettings | None = None) -> ScfResult:
    """Self-consistent closed-shell solution; returns ``converged=False`` rather than raising."""
    settings = settings or ScfSettings()
    if n_electrons <= 0 or n_electrons % 2:
        raise ConfigError(f"RHF needs a positive even electron count, got {n_electrons}")
    n_occ = n_electrons // 2
    S, H = tensors.S, tensors.H
    eri = tensors.eri
    X = canonical_orthogonalizer(S, settings.orth_cutoff)
    if X.shape[1] < n_occ:
        raise OrthogonalizationError(f"only {X.shape[1]} orbitals survive orthogonalization for {n_occ} occupied")

    def diagonalize(F, shift=0.0, D=None):
        Fo = X.T @ F @ X
        if shift and D is not None:
            # shift virtual space up: P_occ in orthonormal basis is X^T S D S X
            Po = X.T @ S @ D @ S @ X
            Fo = Fo + shift * (np.eye(len(Fo)) - Po)
        eps, Co = np.linalg.eigh(Fo)
        return eps, X @ Co

    if settings.guess == "density":
        D = np.array(settings.initial_density, dtype=float)
    else:
        _, C = diagonalize(H)
        D = _occupied_density(C, n_occ)

    diis = _Diis(settings.diis_size)
    trace: list[IterationInfo] = []
    E_prev = None
    shift = 0.0
    signs: list[float] = []
    converged = False
    fixed = X.shape[1] == n_occ  # no virtual space: density is determined
    for it in range(1, settings.max_iterations + 1):
        F = fock_matrix(H, eri, D)
        E = electronic_energy(H, F, D)
        err = X.T @ (F @ D @ S - S @ D @ F) @ X
        grad = float(np.max(np.abs(err))) if err.size else 0.0
        diis.push(F, err)
        F_use = diis.extrapolate()
        _, C = diagonalize(F_use, shift, D)
        D_new = _occupied_density(C, n_occ)
        dE = np.inf if E_prev is None else E - E_prev
        rms = float(np.sqrt(np.mean((D_new - D) ** 2)))
        trace.append(IterationInfo(it, E + tensors.nuclear_repulsion, float(dE), rms, grad, float(np.sum(D_new * S)), shift))
        log.debug("iter %3d  E=%.12f  dE=%.3e  rms=%.3e  grad=%.3e", it, E, dE, rms, grad)
        if fixed or (abs(dE) < settings.energy_tol and rms < settings.density_tol and grad < settings.gradient_tol):
            converged = True
            D = D_new
            break
        if E_prev is not None and dE != 0.0:
            signs.append(np.sign(dE))
            flips = sum(1 for a, b in zip(signs[-settings.oscillation_window - 1 :], signs[-settings.oscillation_window :]) if a != b)
            if shift == 0.0 and settings.level_shift > 0 and flips >= settings.oscillation_window:
                log.info("energy oscillation detected at iteration %d; level shift %.3f on", it, settings.level_shift)
                shift = settings.level_shift
        E_prev = E
        D = D_new

    # canonical orbitals of the final Fock matrix
    F = fock_matrix(H, eri, D)
    eps, C = diagonalize(F)
    D = _occupied_density(C, n_occ)
    F = fock_matrix(H, eri, D)
    E_el = electronic_energy(H, F, D)
    if not converged:
        log.warning("RHF did not converge in %d iterations", settings.max_iterations)
    return ScfResult(
        energy=E_el + tensors.nuclear_repulsion,
        electronic_energy=E_el,
        nuclear_repulsion=tensors.nuclear_repulsion,
        orbital_energies=eps,
        coefficients=C,
        density=D,
        fock=F,
        converged=converged,
        n_electrons=n_electrons,
        trace=tuple(trace),
    )
