"""Clifford supercells, the embedded Euclidean metric and hydrogen-chain geometries.

A supercell that is periodic along ``n`` Cartesian axes is a flat torus
embedded in a higher-dimensional Euclidean space.  Distances are measured
in the embedding space: along a periodic axis of length ``L`` a separation
``d`` contributes the chord ``(L/pi)|sin(pi d / L)|``, while non-periodic
axes contribute their ordinary difference.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DistanceSingularityError

#: pair distances below this are treated as coincident charges
COINCIDENCE_THRESHOLD = 1e-10

ELEMENT_SYMBOLS = {1: "H", 2: "He", 3: "Li", 4: "Be", 5: "B", 6: "C", 7: "N", 8: "O", 9: "F", 10: "Ne"}
ELEMENT_CHARGES = {v: k for k, v in ELEMENT_SYMBOLS.items()}


@dataclass(frozen=True)
class SupercellTopology:
    """Periodic dimensionality and edge lengths of a Clifford supercell.

    Periodic axes come first in (x, y, z) order, so ``periodic_dims=1``
    means periodic along x only.  ``periodic_dims=0`` is ordinary free space.
    """

    periodic_dims: int = 0
    lengths: tuple[float, ...] = ()

    def __post_init__(self):
        if self.periodic_dims not in (0, 1, 2, 3):
            raise ConfigError(f"periodic_dims must be 0..3, got {self.periodic_dims}")
        lengths = tuple(float(v) for v in self.lengths)
        if len(lengths) != self.periodic_dims:
            raise ConfigError(
                f"need {self.periodic_dims} supercell lengths, got {len(lengths)}"
            )
        if any(not np.isfinite(v) or v <= 0.0 for v in lengths):
            raise ConfigError(f"supercell lengths must be positive, got {lengths}")
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def free(cls) -> "SupercellTopology":
        return cls(0, ())

    @property
    def is_periodic(self) -> bool:
        return self.periodic_dims > 0

    def axis_length(self, axis: int) -> float | None:
        """Period of ``axis`` or None if the axis is not periodic."""
        if axis < self.periodic_dims:
            return self.lengths[axis]
        return None

    def lattice_vectors(self) -> np.ndarray:
        vecs = np.zeros((self.periodic_dims, 3))
        for s, length in enumerate(self.lengths):
            vecs[s, s] = length
        return vecs

    def wrap(self, r) -> np.ndarray:
        """Map periodic coordinates into [0, L_s)."""
        r = np.array(r, dtype=float)
        for s, length in enumerate(self.lengths):
            r[..., s] = np.mod(r[..., s], length)
            # np.mod can return L for tiny negative inputs
            r[..., s] = np.where(r[..., s] >= length, 0.0, r[..., s])
        return r

    def squared_distance(self, r1, r2):
        delta = np.asarray(r1, dtype=float) - np.asarray(r2, dtype=float)
        total = np.zeros(delta.shape[:-1])
        for s in range(3):
            length = self.axis_length(s)
            if length is None:
                total = total + delta[..., s] ** 2
            else:
                chord = (length / np.pi) * np.sin(np.pi * delta[..., s] / length)
                total = total + chord**2
        return total

    def distance(self, r1, r2):
        return np.sqrt(self.squared_distance(r1, r2))

    def max_periodic_distance(self) -> float:
        return float(np.sqrt(sum(length**2 for length in self.lengths)) / np.pi)


def torus_distance(topology: SupercellTopology, r1, r2):
    """Embedding-space distance between ``r1`` and ``r2`` (broadcasts over leading axes)."""
    d = topology.distance(r1, r2)
    return float(d) if np.ndim(d) == 0 else d


@dataclass(frozen=True)
class Geometry:
    charges: tuple[int, ...]
    positions: np.ndarray = field(compare=False)
    topology: SupercellTopology = SupercellTopology()

    def __post_init__(self):
        charges = tuple(int(z) for z in self.charges)
        if any(z <= 0 for z in charges):
            raise ConfigError("nuclear charges must be positive integers")
        pos = np.array(self.positions, dtype=float).reshape(-1, 3)
        if pos.shape[0] != len(charges):
            raise ConfigError("one position per nucleus required")
        pos = self.topology.wrap(pos)
        pos.setflags(write=False)
        object.__setattr__(self, "charges", charges)
        object.__setattr__(self, "positions", pos)
        for a in range(len(charges)):
            for b in range(a):
                if self.topology.distance(pos[a], pos[b]) < COINCIDENCE_THRESHOLD:
                    raise DistanceSingularityError(
                        f"nuclei {b} and {a} coincide under the supercell metric"
                    )

    @property
    def n_atoms(self) -> int:
        return len(self.charges)

    @property
    def n_electrons(self) -> int:
        return sum(self.charges)

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(ELEMENT_SYMBOLS.get(z, f"Z{z}") for z in self.charges)

    def translated(self, shift) -> "Geometry":
        return Geometry(self.charges, self.positions + np.asarray(shift, float), self.topology)

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(repr((self.topology.periodic_dims, self.topology.lengths, self.charges)).encode())
        h.update(np.round(self.positions, 10).tobytes())
        return h.hexdigest()[:16]


def nuclear_repulsion(geometry: Geometry) -> float:
    """Sum of Z_A Z_B / |r_A - r_B|_E over distinct nuclear pairs."""
    pos = geometry.positions
    z = np.asarray(geometry.charges, dtype=float)
    if len(z) < 2:
        return 0.0
    ia, ib = np.triu_indices(len(z), k=1)
    d = geometry.topology.distance(pos[ia], pos[ib])
    if np.any(d < COINCIDENCE_THRESHOLD):
        raise DistanceSingularityError("coincident nuclei in nuclear repulsion")
    return float(np.sum(z[ia] * z[ib] / d))


def build_torus_chain(n_atoms: int, spacing: float) -> Geometry:
    """Equispaced hydrogen chain in a quasi-1D Clifford supercell of length n*spacing."""
    if n_atoms < 2:
        raise ConfigError("a torus chain needs at least 2 atoms")
    if spacing <= 0:
        raise ConfigError("spacing must be positive")
    topo = SupercellTopology(1, (n_atoms * spacing,))
    pos = np.zeros((n_atoms, 3))
    pos[:, 0] = np.arange(n_atoms) * spacing
    return Geometry((1,) * n_atoms, pos, topo)


def build_ring_chain(n_atoms: int, spacing: float) -> Geometry:
    """Hydrogen ring in the xy-plane whose nearest-neighbour chord equals ``spacing``."""
    if n_atoms < 3:
        raise ConfigError("a ring needs at least 3 atoms")
    if spacing <= 0:
        raise ConfigError("spacing must be positive")
    radius = spacing / (2.0 * np.sin(np.pi / n_atoms))
    phi = 2.0 * np.pi * np.arange(n_atoms) / n_atoms
    pos = np.column_stack([radius * np.cos(phi), radius * np.sin(phi), np.zeros(n_atoms)])
    return Geometry((1,) * n_atoms, pos, SupercellTopology.free())


def parse_geometry(text: str) -> Geometry:
    """Read the plain-text geometry format.

    First non-comment line: ``n [L_x [L_y [L_z]]]``; then ``Z x y z`` per
    nucleus in bohr.  ``Z`` may be an integer charge or an element symbol.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise ConfigError("empty geometry file")
    lineno, head = rows[0]
    try:
        n = int(head[0])
        lengths = tuple(float(v) for v in head[1:])
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad topology header {head!r}") from exc
    if len(lengths) != n:
        raise ConfigError(f"line {lineno}: expected {n} lengths after n, got {len(lengths)}")
    topo = SupercellTopology(n, lengths)
    charges, pos = [], []
    for lineno, fields in rows[1:]:
        if len(fields) != 4:
            raise ConfigError(f"line {lineno}: expected 'Z x y z'")
        label = fields[0]
        try:
            z = int(label) if label.isdigit() else ELEMENT_CHARGES[label.capitalize()]
            xyz = [float(v) for v in fields[1:]]
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"line {lineno}: cannot parse nucleus {fields!r}") from exc
        charges.append(z)
        pos.append(xyz)
    if not charges:
        raise ConfigError("geometry file lists no nuclei")
    return Geometry(tuple(charges), np.array(pos), topo)


def format_geometry(geometry: Geometry) -> str:
    topo = geometry.topology
    lines = [" ".join([str(topo.periodic_dims)] + [repr(v) for v in topo.lengths])]
    for z, r in zip(geometry.charges, geometry.positions):
        lines.append(f"{z} {float(r[0])!r} {float(r[1])!r} {float(r[2])!r}")
    return "\n".join(lines) + "\n"
