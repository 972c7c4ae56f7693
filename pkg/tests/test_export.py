import csv
import json

import numpy as np
import pytest

from cliffordqc.analysis import scans_from_rows
from cliffordqc.basis import build_ao_basis, load_basis, parse_basis_file
from cliffordqc.cgto_integrals import assemble_free_tensors
from cliffordqc.clifford_integrals import assemble_clifford_tensors
from cliffordqc.errors import ExportError, FormatError
from cliffordqc.export import (
    RUN_RECORD_SCHEMA,
    SCAN_HEADER,
    ScanRow,
    fcidump_lines,
    read_fcidump,
    read_run_record,
    read_scan_csv,
    run_record,
    write_fcidump,
    write_run_record,
    write_scan_csv,
)
from cliffordqc.post_hf import ao_to_mo, mp2_energy
from cliffordqc.scf import run_rhf
from cliffordqc.topology import Geometry, build_torus_chain


@pytest.fixture(scope="module")
def h4():
    g = build_torus_chain(4, 1.8)
    t = assemble_clifford_tensors(g, build_ao_basis(g, load_basis("sto-3g")))
    res = run_rhf(t, 4)
    return t, res, ao_to_mo(t, res)


def _data_lines(path):
    text = path.read_text()
    return text.split("&END", 1)[1].split()


def test_one_orbital_record_has_three_lines(tmp_path):
    g = Geometry((1,), np.zeros((1, 3)))
    t = assemble_free_tensors(g, build_ao_basis(g, parse_basis_file("ELEMENT H\ns 1\n0.5 1.0\n")))
    mo = ao_to_mo(t, run_rhf(t, 2))
    path = write_fcidump(mo, 0.0, tmp_path / "FCIDUMP")
    body = path.read_text().split("&END", 1)[1].strip().splitlines()
    assert len(body) == 3
    idx = [tuple(int(v) for v in line.split()[1:]) for line in body]
    assert idx == [(1, 1, 1, 1), (1, 1, 0, 0), (0, 0, 0, 0)]


def test_header_and_precision(h4, tmp_path):
    t, res, mo = h4
    path = write_fcidump(mo, t.nuclear_repulsion, tmp_path / "FCIDUMP")
    head = path.read_text().split("&END")[0]
    assert "NORB=4" in head and "NELEC=4" in head and "MS2=0" in head and "ISYM=1" in head
    assert "ORBSYM=1,1,1,1" in head
    for line in path.read_text().split("&END", 1)[1].strip().splitlines():
        mantissa = line.split()[0].split("e")[0].replace("-", "").replace(".", "")
        assert len(mantissa) >= 17


def test_canonical_dedup(h4, tmp_path):
    t, res, mo = h4
    lines = list(fcidump_lines(mo, t.nuclear_repulsion, 4))[4:]
    keys = []
    for line in lines:
        i, j, k, l = (int(v) for v in line.split()[1:])
        if k == l == 0:
            continue
        assert i >= j and k >= l and i * (i - 1) // 2 + j >= k * (k - 1) // 2 + l
        keys.append((i, j, k, l))
    assert len(keys) == len(set(keys))
    n = 4
    npair = n * (n + 1) // 2
    assert len(keys) == npair * (npair + 1) // 2


def test_round_trip_lossless_and_mp2(h4, tmp_path):
    t, res, mo = h4
    path = write_fcidump(mo, t.nuclear_repulsion, tmp_path / "FCIDUMP")
    rec = read_fcidump(path)
    assert rec.norb == 4 and rec.nelec == 4 and rec.ms2 == 0 and rec.orbsym == (1, 1, 1, 1)
    assert np.allclose(rec.eri, mo.eri, rtol=1e-15, atol=1e-16)
    assert np.allclose(rec.h, mo.h, rtol=1e-15, atol=1e-16)
    assert rec.core_energy == t.nuclear_repulsion
    back = rec.as_mo_integrals()
    assert np.allclose(back.orbital_energies, mo.orbital_energies, atol=1e-10)
    assert mp2_energy(back) == pytest.approx(mp2_energy(mo), abs=1e-10)
    assert back.hf_energy() == pytest.approx(res.energy, abs=1e-10)


def test_reader_tolerates_fortran_layout(tmp_path):
    text = (
        " &FCI NORB=  1,NELEC=2,MS2=0,\n  ORBSYM=1,\n  ISYM=1\n /\n"
        "  0.5D+00   1   1   1   1\n -1.25D0 1 1 0 0\n  0.0  0 0 0 0\n"
    )
    p = tmp_path / "f"
    p.write_text(text)
    rec = read_fcidump(p)
    assert rec.eri[0, 0, 0, 0] == 0.5 and rec.h[0, 0] == -1.25


def test_reader_errors(tmp_path):
    p = tmp_path / "bad"
    p.write_text("&FCI NORB=1,NELEC=2,\n&END\n1.0 1 1 1\n")
    with pytest.raises(FormatError, match="line 3"):
        read_fcidump(p)
    p.write_text("NORB=1\n")
    with pytest.raises(FormatError):
        read_fcidump(p)


def test_non_finite_value_is_named(h4, tmp_path):
    t, res, mo = h4
    eri = mo.eri.copy()
    eri[1, 0, 0, 0] = eri[0, 1, 0, 0] = eri[0, 0, 1, 0] = eri[0, 0, 0, 1] = np.nan
    bad = type(mo)(mo.h, eri, mo.orbital_energies, mo.n_occ, mo.nuclear_repulsion)
    with pytest.raises(ExportError, match=r"\(2 1\|1 1\)"):
        write_fcidump(bad, 0.0, tmp_path / "F")
    with pytest.raises(OSError):
        write_fcidump(mo, 0.0, tmp_path / "missing" / "F")


def test_run_record_contents_and_determinism(h4, tmp_path):
    t, res, mo = h4
    meta = {"engine": "clifford", "basis": "sto-3g", "geometry_hash": t.geometry_hash}
    j1, c1 = write_run_record(res, meta, tmp_path / "a", timestamp=False)
    j2, _ = write_run_record(res, meta, tmp_path / "b", timestamp=False)
    assert j1.read_bytes() == j2.read_bytes()
    rec = read_run_record(j1)
    assert rec["schema"] == RUN_RECORD_SCHEMA
    assert rec["converged"] is True
    assert rec["energy"]["total"] == res.energy
    assert rec["iterations"] == res.iterations
    with c1.open() as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == res.iterations + 1
    stamped = run_record(res, meta)
    assert "created" in stamped
    stamped.pop("created")
    assert json.dumps(stamped, sort_keys=True) == json.dumps(rec, sort_keys=True)


def test_scan_table_round_trip(tmp_path):
    rows = [ScanRow(n, "clifford", "rhf", -0.5 * n - 0.01, -0.5 - 0.01 / n) for n in (4, 6, 8)]
    rows.append(ScanRow(10, "clifford", "rhf", float("nan"), float("nan")))
    path = write_scan_csv(rows, tmp_path / "scan.csv")
    assert path.read_text().splitlines()[0] == ",".join(SCAN_HEADER)
    back = read_scan_csv(path)
    assert [r.n_atoms for r in back] == [4, 6, 8, 10]
    assert not back[-1].ok
    assert all(a.energy_total == b.energy_total for a, b in zip(rows[:3], back[:3]))
    scans = scans_from_rows(back)
    assert scans[("clifford", "rhf")].n_atoms == (4, 6, 8)


def test_scan_table_errors(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("")
    with pytest.raises(FormatError, match="empty"):
        read_scan_csv(p)
    p.write_text("n,engine\n")
    with pytest.raises(FormatError, match="row 1"):
        read_scan_csv(p)
    p.write_text(",".join(SCAN_HEADER) + "\n4,clifford,rhf,x,1\n")
    with pytest.raises(FormatError, match="row 2"):
        read_scan_csv(p)
    p.write_text(",".join(SCAN_HEADER) + "\n")
    with pytest.raises(FormatError, match="no data rows"):
        read_scan_csv(p)
