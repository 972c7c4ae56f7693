"""Gaussian primitives (free and Clifford), contracted shells and AO bases.

Along a periodic axis of length L a Clifford gaussian reads

    g_i(x) = (sin(k (x - A)) / k)^i * exp(-alpha kappa (1 - cos(k (x - A))))

with ``k = 2 pi / L`` and ``kappa = L^2 / (2 pi^2)``; the exponent equals
``alpha (L/pi)^2 sin^2(pi (x - A)/L)``.  Non-periodic axes carry the usual
``(x - A)^i exp(-alpha (x - A)^2)``.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import BasisParseError, ConfigError
from .topology import Geometry, SupercellTopology

SHELL_L = {"s": 0, "p": 1, "d": 2}
MAX_L = 2
BUNDLED = {"minimal": "minimal.basis", "sto-3g": "sto-3g.basis", "pob-tzvp": "pob-tzvp.basis"}


def cartesian_components(l: int) -> list[tuple[int, int, int]]:
    """Cartesian exponent triples of shell ``l`` in xx, xy, xz, yy, yz, zz order."""
    out = []
    for i in range(l, -1, -1):
        for j in range(l - i, -1, -1):
            out.append((i, j, l - i - j))
    return out


@dataclass(frozen=True)
class FreePrimitive:
    exponent: float
    center: tuple[float, float, float]
    angular: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self):
        if not self.exponent > 0:
            raise ConfigError("primitive exponent must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "angular", tuple(int(i) for i in self.angular))


@dataclass(frozen=True)
class CliffordPrimitive(FreePrimitive):
    topology: SupercellTopology = SupercellTopology()


def axis_factor(i: int, exponent: float, center: float, x, length: float | None):
    """One Cartesian factor of a primitive; Clifford form when ``length`` is set."""
    x = np.asarray(x, dtype=float)
    if length is None:
        d = x - center
        return d**i * np.exp(-exponent * d * d)
    k = 2.0 * np.pi / length
    kappa = 2.0 / (k * k)
    v = k * (x - center)
    return (np.sin(v) / k) ** i * np.exp(-exponent * kappa * (1.0 - np.cos(v)))


def eval_primitive(p: FreePrimitive, r) -> np.ndarray | float:
    r = np.asarray(r, dtype=float)
    topo = getattr(p, "topology", SupercellTopology.free())
    val = np.ones(r.shape[:-1])
    for s in range(3):
        val = val * axis_factor(p.angular[s], p.exponent, p.center[s], r[..., s], topo.axis_length(s))
    return float(val) if val.ndim == 0 else val


# ---------------------------------------------------------------------------
# basis sets


@dataclass(frozen=True)
class ContractedShell:
    l: int
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]
    element: str = ""

    def __post_init__(self):
        if not self.exponents:
            raise ConfigError("shell needs at least one primitive")
        if len(self.exponents) != len(self.coefficients):
            raise ConfigError("exponent/coefficient count mismatch")
        if self.l < 0 or self.l > MAX_L:
            raise ConfigError(f"angular momentum {self.l} not supported (max {MAX_L})")
        if any(not e > 0 for e in self.exponents):
            raise ConfigError("exponents must be positive")
        order = np.argsort(self.exponents)[::-1]
        exps = tuple(float(self.exponents[i]) for i in order)
        if any(exps[i] <= exps[i + 1] for i in range(len(exps) - 1)):
            raise ConfigError("duplicate exponents in shell")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "coefficients", tuple(float(self.coefficients[i]) for i in order))

    @property
    def letter(self) -> str:
        return "spd"[self.l]

    @property
    def n_cartesian(self) -> int:
        return (self.l + 1) * (self.l + 2) // 2


@dataclass(frozen=True)
class BasisSet:
    name: str
    shells: dict = field(hash=False)

    def for_element(self, symbol: str) -> tuple[ContractedShell, ...]:
        try:
            return self.shells[symbol]
        except KeyError:
            raise ConfigError(f"basis {self.name!r} has no functions for element {symbol}") from None

    def fingerprint(self) -> str:
        h = hashlib.sha1(self.name.encode())
        for el in sorted(self.shells):
            for sh in self.shells[el]:
                h.update(repr((el, sh.l, sh.exponents, sh.coefficients)).encode())
        return h.hexdigest()[:16]


def _parse_native(lines, name):
    shells: dict[str, list] = {}
    element = None
    i = 0
    while i < len(lines):
        lineno, fields = lines[i]
        head = fields[0]
        if head.upper() == "ELEMENT":
            if len(fields) != 2:
                raise BasisParseError("expected 'ELEMENT <symbol>'", lineno)
            element = fields[1].capitalize()
            shells.setdefault(element, [])
            i += 1
            continue
        if element is None:
            raise BasisParseError("shell block before any ELEMENT header", lineno)
        letter = head.lower()
        if letter not in SHELL_L:
            raise BasisParseError(f"unknown shell letter {head!r}", lineno)
        if len(fields) != 2:
            raise BasisParseError("expected '<letter> <n_prim>'", lineno)
        try:
            nprim = int(fields[1])
        except ValueError:
            raise BasisParseError(f"bad primitive count {fields[1]!r}", lineno) from None
        if nprim < 1:
            raise BasisParseError("shell needs at least one primitive", lineno)
        exps, coefs = [], []
        for k in range(nprim):
            i += 1
            if i >= len(lines):
                raise BasisParseError("unexpected end of file inside shell block", lineno)
            pl, pf = lines[i]
            if len(pf) != 2:
                raise BasisParseError("expected '<exponent> <coefficient>'", pl)
            try:
                e, c = (float(v.replace("D", "E").replace("d", "e")) for v in pf)
            except ValueError:
                raise BasisParseError(f"non-numeric primitive {pf!r}", pl) from None
            if not e > 0:
                raise BasisParseError(f"exponent must be positive, got {e}", pl)
            exps.append(e)
            coefs.append(c)
        try:
            shells[element].append(ContractedShell(SHELL_L[letter], tuple(exps), tuple(coefs), element))
        except ConfigError as exc:
            raise BasisParseError(str(exc), lineno) from None
        i += 1
    return BasisSet(name, {k: tuple(v) for k, v in shells.items()})


_NW_HEADER = re.compile(r"^([A-Za-z]{1,2})\s+([A-Za-z]+)$")


def _parse_nwchem(lines, name):
    """NWChem-style exchange format (``H    S`` headers, ``END`` terminator)."""
    shells: dict[str, list] = {}
    current = None

    def flush():
        if current is None:
            return
        el, letter, lineno, exps, coefs = current
        if not exps:
            raise BasisParseError("shell block without primitives", lineno)
        try:
            shells.setdefault(el, []).append(ContractedShell(SHELL_L[letter], tuple(exps), tuple(coefs), el))
        except ConfigError as exc:
            raise BasisParseError(str(exc), lineno) from None

    for lineno, fields in lines:
        text = " ".join(fields)
        if fields[0].upper() == "BASIS" or fields[0].upper() == "END":
            flush()
            current = None
            continue
        m = _NW_HEADER.match(text)
        if m:
            flush()
            letter = m.group(2).lower()
            if letter not in SHELL_L:
                raise BasisParseError(f"unknown shell letter {m.group(2)!r}", lineno)
            current = (m.group(1).capitalize(), letter, lineno, [], [])
            continue
        if current is None:
            raise BasisParseError(f"unexpected line {text!r}", lineno)
        if len(fields) != 2:
            raise BasisParseError("general contractions are not supported", lineno)
        try:
            e, c = (float(v.replace("D", "E").replace("d", "e")) for v in fields)
        except ValueError:
            raise BasisParseError(f"non-numeric primitive {fields!r}", lineno) from None
        if not e > 0:
            raise BasisParseError(f"exponent must be positive, got {e}", lineno)
        current[3].append(e)
        current[4].append(c)
    flush()
    return BasisSet(name, {k: tuple(v) for k, v in shells.items()})


def parse_basis_file(text: str, name: str = "custom") -> BasisSet:
    """Parse basis text in the native ``ELEMENT`` format or NWChem exchange format."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line.split()))
    if not lines:
        raise BasisParseError("empty basis file")
    if any(f[0].upper() == "ELEMENT" for _, f in lines):
        return _parse_native(lines, name)
    return _parse_nwchem(lines, name)


def load_basis(name_or_path: str) -> BasisSet:
    """Bundled basis by name (``minimal``, ``sto-3g``, ``pob-tzvp``) or a file path."""
    key = name_or_path.lower()
    if key in BUNDLED:
        text = resources.files("cliffordqc.data").joinpath(BUNDLED[key]).read_text()
        return parse_basis_file(text, key)
    path = Path(name_or_path)
    if not path.is_file():
        raise ConfigError(f"unknown basis {name_or_path!r} (not bundled, no such file)")
    return parse_basis_file(path.read_text(), path.stem)


# ---------------------------------------------------------------------------
# AO basis


@dataclass(frozen=True)
class AtomicOrbital:
    atom: int
    shell: int
    angular: tuple[int, int, int]
    center: tuple[float, float, float]
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]  # normalisation folded in

    def primitives(self, topology: SupercellTopology):
        cls = CliffordPrimitive if topology.is_periodic else FreePrimitive
        kw = {"topology": topology} if topology.is_periodic else {}
        return [cls(e, self.center, self.angular, **kw) for e in self.exponents]

    def evaluate(self, r, topology: SupercellTopology):
        r = np.asarray(r, dtype=float)
        val = np.zeros(r.shape[:-1])
        for c, prim in zip(self.coefficients, self.primitives(topology)):
            val = val + c * eval_primitive(prim, r)
        return val


@dataclass(frozen=True)
class AOBasis:
    orbitals: tuple[AtomicOrbital, ...]
    topology: SupercellTopology
    name: str = ""
    fingerprint: str = ""

    def __len__(self):
        return len(self.orbitals)

    def __iter__(self):
        return iter(self.orbitals)

    def __getitem__(self, i):
        return self.orbitals[i]

    def permuted(self, order) -> "AOBasis":
        return AOBasis(tuple(self.orbitals[i] for i in order), self.topology, self.name, self.fingerprint)


def primitive_overlap(a: FreePrimitive, b: FreePrimitive, topology: SupercellTopology) -> float:
    if topology.is_periodic:
        from .clifford_integrals import clifford_overlap

        return clifford_overlap(_on(a, topology), _on(b, topology))
    from .cgto_integrals import free_overlap

    return free_overlap(a, b)


def contracted_overlap(a: AtomicOrbital, b: AtomicOrbital, topology: SupercellTopology) -> float:
    total = 0.0
    for ca, pa in zip(a.coefficients, a.primitives(topology)):
        for cb, pb in zip(b.coefficients, b.primitives(topology)):
            total += ca * cb * primitive_overlap(pa, pb, topology)
    return total


def build_ao_basis(geometry: Geometry, basis: BasisSet) -> AOBasis:
    """Instantiate ``basis`` on ``geometry``; every AO gets unit self-overlap under the supercell metric."""
    topo = geometry.topology
    aos = []
    for atom, (symbol, pos) in enumerate(zip(geometry.symbols, geometry.positions)):
        if symbol not in basis.shells:
            raise ConfigError(f"basis {basis.name!r} has no functions for element {symbol}")
        for ish, shell in enumerate(basis.for_element(symbol)):
            for ang in cartesian_components(shell.l):
                center = tuple(float(c) for c in pos)
                coefs = []
                for e, c in zip(shell.exponents, shell.coefficients):
                    prim = FreePrimitive(e, center, ang)
                    coefs.append(c / np.sqrt(primitive_overlap(prim, prim, topo)))
                ao = AtomicOrbital(atom, ish, ang, center, shell.exponents, tuple(coefs))
                norm = contracted_overlap(ao, ao, topo)
                ao = AtomicOrbital(atom, ish, ang, center, shell.exponents, tuple(np.array(coefs) / np.sqrt(norm)))
                aos.append(ao)
    fp = hashlib.sha1((geometry.fingerprint() + basis.fingerprint()).encode()).hexdigest()[:16]
    return AOBasis(tuple(aos), topo, basis.name, fp)


def _on(prim: FreePrimitive, topology: SupercellTopology) -> FreePrimitive:
    if topology.is_periodic:
        return CliffordPrimitive(prim.exponent, prim.center, prim.angular, topology)
    return prim
