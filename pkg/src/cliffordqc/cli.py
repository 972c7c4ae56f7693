"""Command-line driver: ``cliffordqc {scf,scan,fit,export-fcidump,integrals}``.

Options may also come from a ``key = value`` file given with ``--config``;
command-line flags take precedence.  Exit codes:

    0 success, 2 configuration error, 3 integral failure,
    4 SCF non-convergence, 5 file I/O failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import analysis, export
from .basis import build_ao_basis, load_basis
from .cgto_integrals import assemble_free_tensors
from .clifford_integrals import assemble_clifford_tensors
from .errors import (
    CliffordQCError,
    ConfigError,
    ConvergenceError,
    DomainError,
    ExportError,
    IntegralError,
    OrthogonalizationError,
    QuadratureError,
)
from .post_hf import ao_to_mo, mp2_energy
from .scf import ScfSettings, run_rhf
from .topology import build_ring_chain, build_torus_chain, parse_geometry

log = logging.getLogger("cliffordqc")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRALS = 3
EXIT_SCF = 4
EXIT_IO = 5


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ConvergenceError, OrthogonalizationError)):
        return EXIT_SCF
    if isinstance(exc, (IntegralError, QuadratureError, DomainError)):
        return EXIT_INTEGRALS
    if isinstance(exc, (OSError, ExportError)):
        return EXIT_IO
    if isinstance(exc, (ConfigError, CliffordQCError, ValueError)):
        return EXIT_CONFIG
    raise exc


@dataclass(frozen=True)
class RunConfig:
    geometry_file: str | None = None
    chain: int | None = None
    spacing: float = 1.8
    topology: str = "torus"
    basis: str = "minimal"
    method: str = "rhf"
    engine: str = "auto"
    output: str = "."
    experimental: bool = False
    scf: ScfSettings = field(default_factory=ScfSettings)

    def __post_init__(self):
        if (self.geometry_file is None) == (self.chain is None):
            raise ConfigError("give exactly one geometry source: --geometry FILE or --chain N")
        if self.topology not in ("torus", "ring"):
            raise ConfigError(f"topology must be torus or ring, got {self.topology!r}")
        if self.method not in ("rhf", "mp2"):
            raise ConfigError(f"method must be rhf or mp2, got {self.method!r}")
        if self.engine not in ("auto", "free", "clifford"):
            raise ConfigError(f"engine must be auto, free or clifford, got {self.engine!r}")

    def geometry(self):
        if self.geometry_file is not None:
            return parse_geometry(Path(self.geometry_file).read_text())
        build = build_torus_chain if self.topology == "torus" else build_ring_chain
        return build(self.chain, self.spacing)

    @property
    def tag(self) -> str:
        if self.geometry_file is not None:
            return Path(self.geometry_file).stem
        return f"h{self.chain}_{self.topology}_{Path(self.basis).stem}"


@dataclass
class Calculation:
    config: RunConfig
    geometry: object
    ao_basis: object
    tensors: object
    scf: object
    mp2: float | None = None

    @property
    def energy(self) -> float:
        return self.scf.energy + (self.mp2 or 0.0)


def compute_tensors(config: RunConfig, geometry):
    basis = load_basis(config.basis)
    ao = build_ao_basis(geometry, basis)
    periodic = geometry.topology.is_periodic
    engine = config.engine
    if engine == "auto":
        engine = "clifford" if periodic else "free"
    if engine == "free" and periodic:
        raise ConfigError("free-space engine cannot handle a periodic topology")
    if engine == "clifford" and not periodic:
        raise ConfigError("Clifford engine needs at least one periodic axis")
    if engine == "free":
        tensors = assemble_free_tensors(geometry, ao)
    else:
        tensors = assemble_clifford_tensors(geometry, ao, experimental=config.experimental)
    return ao, tensors


def run_calculation(config: RunConfig, need_mp2: bool | None = None) -> Calculation:
    geometry = config.geometry()
    ao, tensors = compute_tensors(config, geometry)
    scf = run_rhf(tensors, geometry.n_electrons, config.scf)
    calc = Calculation(config, geometry, ao, tensors, scf)
    if need_mp2 is None:
        need_mp2 = config.method == "mp2"
    if need_mp2 and scf.converged:
        calc.mp2 = mp2_energy(ao_to_mo(tensors, scf))
    return calc


# ---------------------------------------------------------------------------
# argument handling

_DEFAULTS = {
    "geometry": None, "chain": None, "spacing": 1.8, "topology": "torus", "basis": "minimal",
    "method": "rhf", "engine": "auto", "output": ".", "experimental": False,
    "max_iter": 200, "e_tol": 1e-10, "d_tol": 1e-8, "diis": 8, "level_shift": 0.2, "orth_cutoff": 1e-7,
}
_TYPES = {
    "chain": int, "spacing": float, "max_iter": int, "e_tol": float, "d_tol": float,
    "diis": int, "level_shift": float, "orth_cutoff": float,
}


def read_config_file(path) -> dict:
    """``key = value`` lines, ``#`` comments; keys may use dashes or underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _DEFAULTS and key != "n_list":
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
        out[key] = val
    return out


def _coerce(key, val):
    if val is None or not isinstance(val, str):
        return val
    if key == "experimental":
        return val.lower() in ("1", "true", "yes", "on")
    try:
        return _TYPES.get(key, str)(val)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {val!r}") from exc


def merged_options(args: argparse.Namespace) -> dict:
    file_opts = read_config_file(args.config) if getattr(args, "config", None) else {}
    opts = {}
    for key, default in _DEFAULTS.items():
        flag = getattr(args, key, None)
        if flag is not None and flag is not False:
            opts[key] = flag
        elif key in file_opts:
            opts[key] = _coerce(key, file_opts[key])
        else:
            opts[key] = default
    opts["n_list"] = getattr(args, "n_list", None) or file_opts.get("n_list")
    return opts


def config_from_options(opts: dict) -> RunConfig:
    settings = ScfSettings(
        max_iterations=opts["max_iter"], energy_tol=opts["e_tol"], density_tol=opts["d_tol"],
        diis_size=opts["diis"], level_shift=opts["level_shift"], orth_cutoff=opts["orth_cutoff"],
    )
    return RunConfig(
        geometry_file=opts["geometry"], chain=opts["chain"], spacing=opts["spacing"], topology=opts["topology"],
        basis=opts["basis"], method=opts["method"], engine=opts["engine"], output=opts["output"],
        experimental=bool(opts["experimental"]), scf=settings,
    )


def _add_run_options(p: argparse.ArgumentParser, geometry=True):
    if geometry:
        p.add_argument("--geometry", help="plain-text geometry file")
        p.add_argument("--chain", type=int, help="generate an N-atom hydrogen chain")
    p.add_argument("--spacing", type=float, help="chain spacing in bohr (default 1.8)")
    p.add_argument("--topology", choices=["torus", "ring"], help="chain boundary condition")
    p.add_argument("--basis", help="bundled basis name or basis file path")
    p.add_argument("--method", choices=["rhf", "mp2"])
    p.add_argument("--engine", choices=["auto", "free", "clifford"])
    p.add_argument("--output", "-o", help="output directory")
    p.add_argument("--experimental", action="store_true", help="enable 2D/3D periodic V and ERI")
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--e-tol", dest="e_tol", type=float)
    p.add_argument("--d-tol", dest="d_tol", type=float)
    p.add_argument("--diis", type=int)
    p.add_argument("--level-shift", dest="level_shift", type=float)
    p.add_argument("--orth-cutoff", dest="orth_cutoff", type=float)
    p.add_argument("--config", help="key = value option file (flags win)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cliffordqc", description="Clifford-torus gaussian electronic structure")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_options(sub.add_parser("scf", help="single RHF (or MP2) run"))
    p = sub.add_parser("scan", help="chain-length scan into a CSV table")
    _add_run_options(p, geometry=False)
    p.add_argument("--n-list", dest="n_list", help="comma-separated atom counts, e.g. 4,6,8")
    p.add_argument("--both", action="store_true", help="run torus and ring")
    p = sub.add_parser("fit", help="TDL fits from scan tables")
    p.add_argument("tables", nargs="+")
    p.add_argument("--output", "-o", default=".")
    p.add_argument("--tol", type=float, default=1e-4, help="E_TDL agreement tolerance")
    p = sub.add_parser("export-fcidump", help="MO integrals as FCIDUMP")
    _add_run_options(p)
    p.add_argument("--fcidump", help="output path (default <output>/FCIDUMP)")
    p = sub.add_parser("integrals", help="dump S, T, V, ERI to .npz")
    _add_run_options(p)
    return parser


# ---------------------------------------------------------------------------
# commands


def _outdir(config: RunConfig) -> Path:
    out = Path(config.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _meta(calc: Calculation) -> dict:
    cfg = calc.config
    meta = {
        "geometry_hash": calc.tensors.geometry_hash,
        "basis_hash": calc.tensors.basis_hash,
        "basis": cfg.basis,
        "engine": calc.tensors.engine,
        "method": cfg.method,
        "n_atoms": calc.geometry.n_atoms,
        "topology": {"periodic_dims": calc.geometry.topology.periodic_dims, "lengths": list(calc.geometry.topology.lengths)},
        "energy_per_atom": calc.energy / calc.geometry.n_atoms,
    }
    if calc.mp2 is not None:
        meta["mp2_correlation"] = calc.mp2
    return meta


def cmd_scf(config: RunConfig, timestamp: bool = True) -> int:
    calc = run_calculation(config)
    out = _outdir(config)
    export.write_run_record(calc.scf, _meta(calc), out / f"scf_{config.tag}", timestamp=timestamp)
    n = calc.geometry.n_atoms
    print(f"{config.tag}: E = {calc.energy:.10f}  E/atom = {calc.energy / n:.10f}  converged={calc.scf.converged}  iterations={calc.scf.iterations}")
    return EXIT_OK if calc.scf.converged else EXIT_SCF


def parse_n_list(text) -> list[int]:
    if text is None:
        raise ConfigError("scan needs --n-list")
    try:
        ns = [int(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError as exc:
        raise ConfigError(f"bad --n-list {text!r}") from exc
    if not ns:
        raise ConfigError("scan needs at least one chain length")
    if any(n % 2 for n in ns):
        raise ConfigError("closed-shell scans need even atom counts")
    return ns


def cmd_scan(config: RunConfig, n_list, topologies=None) -> int:
    ns = parse_n_list(n_list) if not isinstance(n_list, list) else n_list
    topologies = topologies or [config.topology]
    rows, worst = [], EXIT_OK
    for topo in topologies:
        for n in ns:
            cfg = replace(config, chain=n, topology=topo, geometry_file=None)
            engine = "clifford" if topo == "torus" else "free"
            try:
                calc = run_calculation(cfg)
                if not calc.scf.converged:
                    raise ConvergenceError(f"SCF not converged for N={n} ({topo})")
                e = calc.energy
                print(f"N={n:3d} {topo:5s} E/atom = {e / n:.10f}")
            except CliffordQCError as exc:
                log.error("scan member N=%d %s failed: %s", n, topo, exc)
                worst = worst or exit_code_for(exc)
                e = float("nan")
            rows.append(export.ScanRow(n, engine, config.method, e, e / n))
    path = _outdir(config) / f"scan_{Path(config.basis).stem}_{config.method}.csv"
    export.write_scan_csv(rows, path)
    print(f"scan table: {path}")
    return worst


def cmd_fit(tables, output=".", tol=1e-4) -> int:
    rows = []
    for t in tables:
        rows.extend(export.read_scan_csv(t))
    scans = analysis.scans_from_rows(rows)
    fits = [analysis.fit_tdl(s) for s in scans.values() if len(s) >= 2]
    skipped = [key for key, s in scans.items() if len(s) < 2]
    for key in skipped:
        log.warning("series %s has fewer than two points; not fitted", key)
    if not fits:
        raise ConfigError("no series with at least two points to fit")
    comps = []
    by_method: dict[str, list] = {}
    for f in fits:
        by_method.setdefault(f.method, []).append(f)
    for group in by_method.values():
        for i in range(len(group)):
            for j in range(i):
                comps.append(analysis.compare_tdl(group[j], group[i], tol))
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    analysis.write_fit_csv(fits, out / "fit.csv")
    analysis.write_plot_data(list(scans.values()), out / "plot_data.csv")
    report = analysis.fit_report(fits, comps)
    (out / "fit_report.txt").write_text(report)
    print(report, end="")
    return EXIT_OK


def cmd_export_fcidump(config: RunConfig, path=None) -> int:
    calc = run_calculation(config, need_mp2=False)
    if not calc.scf.converged:
        raise ConvergenceError("SCF did not converge; refusing to export")
    mo = ao_to_mo(calc.tensors, calc.scf)
    path = Path(path) if path else _outdir(config) / "FCIDUMP"
    export.write_fcidump(mo, calc.tensors.nuclear_repulsion, path, n_electrons=calc.geometry.n_electrons)
    print(f"FCIDUMP: {path} (NORB={mo.n_orb}, NELEC={calc.geometry.n_electrons})")
    return EXIT_OK


def cmd_integrals(config: RunConfig) -> int:
    geometry = config.geometry()
    _, tensors = compute_tensors(config, geometry)
    path = _outdir(config) / f"integrals_{config.tag}.npz"
    np.savez(path, S=tensors.S, T=tensors.T, V=tensors.V, eri_packed=tensors.eri_packed, nuclear_repulsion=tensors.nuclear_repulsion)
    print(f"integrals: {path} ({tensors.n_ao} AOs, engine {tensors.engine}, min eig S = {tensors.smallest_overlap_eigenvalue():.3e})")
    return EXIT_OK


def _origin(exc: BaseException) -> str:
    """Package module in which the exception was raised."""
    tb, name = exc.__traceback__, "cli"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("cliffordqc."):
            name = mod.split(".", 1)[1]
        tb = tb.tb_next
    return name


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "fit":
            return cmd_fit(args.tables, args.output, args.tol)
        opts = merged_options(args)
        if args.command == "scan":
            opts["chain"] = opts["chain"] or 2  # placeholder; replaced per member
            opts["geometry"] = None
            config = config_from_options(opts)
            topologies = ["torus", "ring"] if args.both else None
            return cmd_scan(config, opts["n_list"], topologies)
        config = config_from_options(opts)
        if args.command == "scf":
            return cmd_scf(config)
        if args.command == "export-fcidump":
            return cmd_export_fcidump(config, args.fcidump)
        if args.command == "integrals":
            return cmd_integrals(config)
    except (CliffordQCError, OSError, ValueError) as exc:
        code = exit_code_for(exc)
        print(f"error [{_origin(exc)}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
