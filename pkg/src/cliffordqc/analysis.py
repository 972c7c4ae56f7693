"""Thermodynamic-limit extrapolation E(N) = E_TDL - a / N^2."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .export import ScanRow

FIT_HEADER = ("engine", "method", "E_TDL", "a", "residual_rms")
PLOT_HEADER = ("engine", "method", "n_atoms", "inv_n2", "energy_per_atom")


@dataclass(frozen=True)
class ScanRecord:
    """Per-atom energies of one (engine, method) series, sorted by N."""

    n_atoms: tuple[int, ...]
    energy_per_atom: tuple[float, ...]
    engine: str = ""
    method: str = ""

    def __post_init__(self):
        if len(self.n_atoms) != len(self.energy_per_atom):
            raise ConfigError("n_atoms and energies differ in length")
        order = np.argsort(self.n_atoms, kind="stable")
        n = tuple(int(self.n_atoms[i]) for i in order)
        e = tuple(float(self.energy_per_atom[i]) for i in order)
        if any(a == b for a, b in zip(n, n[1:])):
            raise ConfigError(f"duplicate chain length in scan: {n}")
        if any(v <= 0 for v in n):
            raise ConfigError("chain lengths must be positive")
        object.__setattr__(self, "n_atoms", n)
        object.__setattr__(self, "energy_per_atom", e)

    def __len__(self):
        return len(self.n_atoms)

    def subset(self, keep) -> "ScanRecord":
        keep = set(keep)
        pts = [(n, e) for n, e in zip(self.n_atoms, self.energy_per_atom) if n in keep]
        return ScanRecord(tuple(p[0] for p in pts), tuple(p[1] for p in pts), self.engine, self.method)


@dataclass(frozen=True)
class TdlFit:
    e_tdl: float
    a: float
    residual_rms: float
    residuals: tuple[float, ...]
    n_atoms: tuple[int, ...]
    power: float = 2.0
    engine: str = ""
    method: str = ""

    def predict(self, n):
        return self.e_tdl - self.a / np.asarray(n, dtype=float) ** self.power


def fit_tdl(scan: ScanRecord, power: float = 2.0) -> TdlFit:
    """Ordinary least squares of E/atom against N^-power (power 2 is the TDL form)."""
    if len(scan) < 2:
        raise ConfigError("a TDL fit needs at least two chain lengths")
    x = np.asarray(scan.n_atoms, dtype=float) ** -power
    y = np.asarray(scan.energy_per_atom)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    res = y - (intercept + slope * x)
    return TdlFit(
        float(intercept), float(-slope), float(np.sqrt(np.mean(res**2))), tuple(float(r) for r in res),
        scan.n_atoms, power, scan.engine, scan.method,
    )


@dataclass(frozen=True)
class TdlComparison:
    gap: float
    tol: float
    agree: bool
    a_first: float
    a_second: float
    labels: tuple[str, str] = field(default=("", ""))


def compare_tdl(fit_a: TdlFit, fit_b: TdlFit, tol: float) -> TdlComparison:
    """Compare intercepts only; slopes legitimately differ between boundary conditions."""
    gap = abs(fit_a.e_tdl - fit_b.e_tdl)
    return TdlComparison(gap, tol, bool(gap < tol), fit_a.a, fit_b.a, (fit_a.engine, fit_b.engine))


def scans_from_rows(rows: list[ScanRow]) -> dict[tuple[str, str], ScanRecord]:
    """Group scan-table rows by (engine, method); failed rows are skipped."""
    groups: dict[tuple[str, str], list[ScanRow]] = {}
    for r in rows:
        if r.ok:
            groups.setdefault((r.engine, r.method), []).append(r)
    return {
        key: ScanRecord(tuple(r.n_atoms for r in rs), tuple(r.energy_per_atom for r in rs), *key)
        for key, rs in sorted(groups.items())
    }


def write_fit_csv(fits, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIT_HEADER)
        for f in fits:
            w.writerow([f.engine, f.method, repr(f.e_tdl), repr(f.a), repr(f.residual_rms)])
    return path


def write_plot_data(scans, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PLOT_HEADER)
        for s in scans:
            for n, e in zip(s.n_atoms, s.energy_per_atom):
                w.writerow([s.engine, s.method, n, repr(1.0 / n**2), repr(e)])
    return path


def fit_report(fits, comparisons=()) -> str:
    lines = [f"{'engine':<10} {'method':<6} {'E_TDL':>16} {'a':>12} {'rms':>10}  N"]
    for f in fits:
        ns = ",".join(str(n) for n in f.n_atoms)
        lines.append(f"{f.engine:<10} {f.method:<6} {f.e_tdl:16.8f} {f.a:12.6f} {f.residual_rms:10.2e}  {ns}")
    for c in comparisons:
        verdict = "agree" if c.agree else "DIFFER"
        lines.append(f"{c.labels[0]} vs {c.labels[1]}: |dE_TDL| = {c.gap:.3e} (tol {c.tol:.1e}) {verdict}; a = {c.a_first:.5f} / {c.a_second:.5f}")
    return "\n".join(lines) + "\n"
