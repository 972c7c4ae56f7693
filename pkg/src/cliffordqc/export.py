"""FCIDUMP files, run records and the chain-scan table."""
from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import ExportError, FormatError
from .post_hf import MoIntegrals
from .scf import ScfResult

SCAN_HEADER = ("n_atoms", "engine", "method", "energy_total", "energy_per_atom")
TRACE_HEADER = ("iteration", "energy", "delta_energy", "density_rms", "gradient", "trace_ds", "level_shift")
RUN_RECORD_SCHEMA = "cliffordqc.run/1"


# ---------------------------------------------------------------------------
# FCIDUMP


@dataclass(frozen=True)
class FcidumpRecord:
    norb: int
    nelec: int
    ms2: int
    orbsym: tuple[int, ...]
    isym: int
    h: np.ndarray
    eri: np.ndarray  # dense chemists' notation
    core_energy: float

    def as_mo_integrals(self, orbital_energies=None, n_occ=None) -> MoIntegrals:
        """MO integrals for post-HF use; orbital energies are rebuilt from the Fock diagonal if absent."""
        n_occ = self.nelec // 2 if n_occ is None else n_occ
        if orbital_energies is None:
            o = slice(0, n_occ)
            fock = self.h + 2.0 * np.einsum("pqii->pq", self.eri[:, :, o, o]) - np.einsum("piiq->pq", self.eri[:, o, o, :])
            orbital_energies = np.diag(fock).copy()
        return MoIntegrals(self.h, self.eri, np.asarray(orbital_energies), n_occ, self.core_energy)


def _format_value(v: float) -> str:
    return f"{v: .17e}"


def _check_finite(v, where):
    if not math.isfinite(v):
        raise ExportError(f"non-finite value {v} at {where}")


def fcidump_lines(mo: MoIntegrals, nuclear_repulsion: float, n_electrons: int, ms2: int = 0):
    n = mo.n_orb
    yield f" &FCI NORB={n},NELEC={n_electrons},MS2={ms2},"
    yield "  ORBSYM=" + ",".join(["1"] * n) + ","
    yield "  ISYM=1,"
    yield " &END"
    eri = mo.eri
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    if k * (k + 1) // 2 + l > ij:
                        continue
                    v = float(eri[i, j, k, l])
                    _check_finite(v, f"({i + 1} {j + 1}|{k + 1} {l + 1})")
                    yield f"{_format_value(v)} {i + 1:4d} {j + 1:4d} {k + 1:4d} {l + 1:4d}"
    for i in range(n):
        for j in range(i + 1):
            v = float(mo.h[i, j])
            _check_finite(v, f"h[{i + 1},{j + 1}]")
            yield f"{_format_value(v)} {i + 1:4d} {j + 1:4d} {0:4d} {0:4d}"
    _check_finite(nuclear_repulsion, "core energy")
    yield f"{_format_value(nuclear_repulsion)} {0:4d} {0:4d} {0:4d} {0:4d}"


def write_fcidump(mo: MoIntegrals, nuclear_repulsion: float, path, n_electrons: int | None = None, ms2: int = 0) -> Path:
    """Write canonical-order FCIDUMP (1-based indices, all unique entries, 17 significant digits)."""
    n_electrons = 2 * mo.n_occ if n_electrons is None else n_electrons
    text = "\n".join(fcidump_lines(mo, nuclear_repulsion, n_electrons, ms2)) + "\n"
    path = Path(path)
    path.write_text(text)
    return path


def _parse_namelist(text: str) -> dict:
    body = re.sub(r"&FCI|&END|/", " ", text, flags=re.I)
    parts = re.split(r"([A-Za-z_][A-Za-z0-9_]*)\s*=", body)
    out = {}
    for key, val in zip(parts[1::2], parts[2::2]):
        out[key.upper()] = [int(v) for v in re.split(r"[,\s]+", val.strip()) if v]
    return out


def read_fcidump(path) -> FcidumpRecord:
    text = Path(path).read_text()
    m = re.search(r"&END|^\s*/\s*$", text, flags=re.I | re.M)
    if m is None:
        raise FormatError("FCIDUMP header has no &END terminator")
    header, body = text[: m.end()], text[m.end() :]
    try:
        nl = _parse_namelist(header)
        norb = nl["NORB"][0]
        nelec = nl["NELEC"][0]
    except (KeyError, IndexError, ValueError) as exc:
        raise FormatError(f"bad FCIDUMP header: {exc}") from exc
    ms2 = nl.get("MS2", [0])[0]
    orbsym = tuple(nl.get("ORBSYM", [1] * norb))
    isym = nl.get("ISYM", [1])[0]
    h = np.zeros((norb, norb))
    eri = np.zeros((norb,) * 4)
    core = 0.0
    start = header.count("\n") + 1
    for lineno, line in enumerate(body.splitlines(), start=start):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FormatError(f"line {lineno}: expected 'value i j k l'")
        try:
            v = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        if i == j == k == l == 0:
            core = v
        elif k == l == 0:
            h[i - 1, j - 1] = h[j - 1, i - 1] = v
        else:
            i, j, k, l = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in ((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k)):
                eri[a, b, c, d] = eri[c, d, a, b] = v
    return FcidumpRecord(norb, nelec, ms2, orbsym, isym, h, eri, core)


# ---------------------------------------------------------------------------
# run records


def _json_number(v):
    return v if not isinstance(v, float) or math.isfinite(v) else None


def run_record(scf: ScfResult, meta: dict, timestamp: bool = True) -> dict:
    rec = {
        "schema": RUN_RECORD_SCHEMA,
        **{k: meta[k] for k in sorted(meta)},
        "n_electrons": scf.n_electrons,
        "converged": bool(scf.converged),
        "iterations": scf.iterations,
        "energy": {
            "total": scf.energy,
            "electronic": scf.electronic_energy,
            "nuclear_repulsion": scf.nuclear_repulsion,
        },
        "orbital_energies": [float(e) for e in scf.orbital_energies],
        "trace": [[_json_number(getattr(it, k)) for k in TRACE_HEADER] for it in scf.trace],
    }
    if timestamp:
        rec["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return rec


def write_run_record(scf: ScfResult, meta: dict, stem, timestamp: bool = True) -> tuple[Path, Path]:
    """Write ``<stem>.json`` (nested record) and ``<stem>.csv`` (iteration table)."""
    stem = Path(stem)
    rec = run_record(scf, meta, timestamp)
    json_path = stem.with_suffix(".json")
    csv_path = stem.with_suffix(".csv")
    json_path.write_text(json.dumps(rec, indent=2, allow_nan=False) + "\n")
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for row in rec["trace"]:
            w.writerow(["" if v is None else repr(v) for v in row])
    return json_path, csv_path


def read_run_record(path) -> dict:
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# scan table


@dataclass(frozen=True)
class ScanRow:
    n_atoms: int
    engine: str
    method: str
    energy_total: float
    energy_per_atom: float

    @property
    def ok(self) -> bool:
        return math.isfinite(self.energy_total)


def write_scan_csv(rows, path) -> Path:
    """Failed members are written with ``nan`` energies so the table stays rectangular."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        for r in rows:
            w.writerow([r.n_atoms, r.engine, r.method, repr(float(r.energy_total)), repr(float(r.energy_per_atom))])
    return path


def read_scan_csv(path) -> list[ScanRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty scan table") from None
        if tuple(h.strip() for h in header) != SCAN_HEADER:
            raise FormatError(f"{path}: row 1: expected header {','.join(SCAN_HEADER)}")
        rows = []
        for rowno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != len(SCAN_HEADER):
                raise FormatError(f"{path}: row {rowno}: expected {len(SCAN_HEADER)} fields, got {len(fields)}")
            try:
                rows.append(ScanRow(int(fields[0]), fields[1].strip(), fields[2].strip(), float(fields[3]), float(fields[4])))
            except ValueError as exc:
                raise FormatError(f"{path}: row {rowno}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: scan table has no data rows")
    return rows
