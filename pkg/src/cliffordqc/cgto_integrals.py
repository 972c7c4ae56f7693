"""Free-space cartesian gaussian integrals (McMurchie-Davidson).

Pair densities are expanded in Hermite gaussians,

    (x-A)^i (x-B)^j exp(-a (x-A)^2 - b (x-B)^2) = sum_t E^{ij}_t d^t/dP^t exp(-p (x-P)^2),

and Coulomb integrals reduce to Hermite-Coulomb integrals ``R_tuv`` built
from the Boys function.  Everything is vectorised over batches of
primitive pairs; the scalar ``free_*`` functions are thin wrappers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse

from .basis import AOBasis, FreePrimitive
from .specfun import boys_array
from .topology import Geometry, nuclear_repulsion

PI = np.pi


# ---------------------------------------------------------------------------
# 1D building blocks (shared with the Clifford engine's non-periodic axes)


def hermite_expansion(i: int, j: int, a, b, ab):
    """Hermite coefficients ``E^{ij}_t``, t = 0..i+j, for exponents a, b and separation ab = A - B.

    Broadcasts over array-valued exponents/separations; returns a list of arrays.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = np.asarray(ab, dtype=float)
    p = a + b
    xpa = -b / p * ab
    xpb = a / p * ab
    inv2p = 0.5 / p
    zero = np.zeros(np.broadcast(a, b, ab).shape)
    table = {(0, 0): [np.exp(-a * b / p * ab * ab) + zero]}

    def get(row, t):
        return row[t] if 0 <= t < len(row) else zero

    for ii in range(i + 1):
        for jj in range(j + 1):
            if (ii, jj) in table:
                continue
            if ii > 0:
                prev, shift = table[(ii - 1, jj)], xpa
            else:
                prev, shift = table[(ii, jj - 1)], xpb
            table[(ii, jj)] = [
                inv2p * get(prev, t - 1) + shift * get(prev, t) + (t + 1) * get(prev, t + 1)
                for t in range(ii + jj + 1)
            ]
    return table[(i, j)]


def overlap_1d(i: int, j: int, a, b, ab):
    return hermite_expansion(i, j, a, b, ab)[0] * np.sqrt(PI / (np.asarray(a) + np.asarray(b)))


def kinetic_1d(i: int, j: int, a, b, ab):
    """<i| -1/2 d^2/dx^2 |j> for 1D free gaussians."""
    b = np.asarray(b, dtype=float)
    out = -2.0 * b * (2 * j + 1) * overlap_1d(i, j, a, b, ab)
    out = out + 4.0 * b * b * overlap_1d(i, j + 2, a, b, ab)
    if j >= 2:
        out = out + j * (j - 1) * overlap_1d(i, j - 2, a, b, ab)
    return -0.5 * out


def gaussian_derivatives(n_max: int, beta, x):
    """``d^n/dx^n exp(-beta x^2)`` for n = 0..n_max (Hermite recursion)."""
    beta = np.asarray(beta, dtype=float)
    x = np.asarray(x, dtype=float)
    g0 = np.exp(-beta * x * x)
    out = [g0]
    if n_max >= 1:
        out.append(-2.0 * beta * x * g0)
    for n in range(1, n_max):
        out.append(-2.0 * beta * (x * out[n] + n * out[n - 1]))
    return out


def hermite_coulomb(lx: int, ly: int, lz: int, alpha, x, y, z):
    """Hermite-Coulomb integrals ``R_tuv`` for t<=lx, u<=ly, v<=lz (dict keyed by (t,u,v))."""
    alpha = np.asarray(alpha, dtype=float)
    x, y, z = (np.asarray(c, dtype=float) for c in (x, y, z))
    nmax = lx + ly + lz
    f = boys_array(nmax, alpha * (x * x + y * y + z * z))
    memo = {}
    m2a = -2.0 * alpha

    def r(n, t, u, v):
        key = (n, t, u, v)
        if key in memo:
            return memo[key]
        if t < 0 or u < 0 or v < 0:
            return 0.0
        if t > 0:
            val = (t - 1) * r(n + 1, t - 2, u, v) + x * r(n + 1, t - 1, u, v)
        elif u > 0:
            val = (u - 1) * r(n + 1, t, u - 2, v) + y * r(n + 1, t, u - 1, v)
        elif v > 0:
            val = (v - 1) * r(n + 1, t, u, v - 2) + z * r(n + 1, t, u, v - 1)
        else:
            val = m2a**n * f[n]
        memo[key] = val
        return val

    return {
        (t, u, v): r(0, t, u, v)
        for t in range(lx + 1)
        for u in range(ly + 1)
        for v in range(lz + 1)
        if t + u + v <= nmax
    }


# ---------------------------------------------------------------------------
# batched primitive pairs


@dataclass
class PairBatch:
    """Primitive pairs sharing one angular signature ``(ia, ib, ja, jb, ka, kb)``."""

    angular: tuple[int, ...]
    p: np.ndarray
    center: np.ndarray  # (n, 3) product centres P
    E: list  # per axis: list of arrays E_t, t = 0..la+lb
    rows: np.ndarray = None  # AO-pair index per primitive pair
    weights: np.ndarray = None

    @property
    def orders(self):
        a = self.angular
        return a[0] + a[1], a[2] + a[3], a[4] + a[5]

    def hermite_tensor(self):
        """(n, Tx+1, Ty+1, Tz+1) products Ex_t Ey_u Ez_v."""
        ex, ey, ez = (np.stack(e, axis=-1) for e in self.E)
        return ex[:, :, None, None] * ey[:, None, :, None] * ez[:, None, None, :]


def make_pair_batch(angular, ea, eb, ca, cb, rows=None, weights=None) -> PairBatch:
    ea = np.asarray(ea, float)
    eb = np.asarray(eb, float)
    ca = np.asarray(ca, float).reshape(-1, 3)
    cb = np.asarray(cb, float).reshape(-1, 3)
    p = ea + eb
    center = (ea[:, None] * ca + eb[:, None] * cb) / p[:, None]
    E = [hermite_expansion(angular[2 * s], angular[2 * s + 1], ea, eb, ca[:, s] - cb[:, s]) for s in range(3)]
    return PairBatch(tuple(angular), p, center, E, rows, weights)


def _overlap_batch(batch: PairBatch, ea, eb, ca, cb):
    ang = batch.angular
    out = np.ones_like(batch.p)
    for s in range(3):
        out = out * overlap_1d(ang[2 * s], ang[2 * s + 1], ea, eb, ca[:, s] - cb[:, s])
    return out


def _kinetic_batch(ea, eb, ca, cb, ang):
    s1 = [overlap_1d(ang[2 * s], ang[2 * s + 1], ea, eb, ca[:, s] - cb[:, s]) for s in range(3)]
    t1 = [kinetic_1d(ang[2 * s], ang[2 * s + 1], ea, eb, ca[:, s] - cb[:, s]) for s in range(3)]
    return t1[0] * s1[1] * s1[2] + s1[0] * t1[1] * s1[2] + s1[0] * s1[1] * t1[2]


def _nuclear_batch(batch: PairBatch, charges, positions):
    tx, ty, tz = batch.orders
    herm = batch.hermite_tensor()
    out = np.zeros_like(batch.p)
    for zc, c in zip(charges, positions):
        pc = batch.center - c[None, :]
        r = hermite_coulomb(tx, ty, tz, batch.p, pc[:, 0], pc[:, 1], pc[:, 2])
        acc = np.zeros_like(batch.p)
        for (t, u, v), val in r.items():
            if t <= tx and u <= ty and v <= tz:
                acc = acc + herm[:, t, u, v] * val
        out = out - zc * acc
    return out * 2.0 * PI / batch.p


def _eri_batches(a: PairBatch, b: PairBatch):
    """(n_a, n_b) matrix of primitive ERIs between two pair batches."""
    tx1, ty1, tz1 = a.orders
    tx2, ty2, tz2 = b.orders
    p = a.p[:, None]
    q = b.p[None, :]
    alpha = p * q / (p + q)
    pq = a.center[:, None, :] - b.center[None, :, :]
    r = hermite_coulomb(tx1 + tx2, ty1 + ty2, tz1 + tz2, alpha, pq[..., 0], pq[..., 1], pq[..., 2])
    ha = a.hermite_tensor()
    hb = b.hermite_tensor()
    out = np.zeros(alpha.shape)
    for t2 in range(tx2 + 1):
        for u2 in range(ty2 + 1):
            for v2 in range(tz2 + 1):
                inner = np.zeros(alpha.shape)
                for t1 in range(tx1 + 1):
                    for u1 in range(ty1 + 1):
                        for v1 in range(tz1 + 1):
                            inner += ha[:, t1, u1, v1][:, None] * r[(t1 + t2, u1 + u2, v1 + v2)]
                sign = -1.0 if (t2 + u2 + v2) % 2 else 1.0
                out += sign * inner * hb[:, t2, u2, v2][None, :]
    return out * 2.0 * PI**2.5 / (p * q * np.sqrt(p + q))


def _single(prim: FreePrimitive, other: FreePrimitive):
    ang = tuple(v for s in range(3) for v in (prim.angular[s], other.angular[s]))
    return make_pair_batch(ang, [prim.exponent], [other.exponent], [prim.center], [other.center])


def free_overlap(a: FreePrimitive, b: FreePrimitive) -> float:
    """Overlap of two unnormalised free cartesian gaussians."""
    batch = _single(a, b)
    ca = np.array([a.center])
    cb = np.array([b.center])
    return float(_overlap_batch(batch, [a.exponent], [b.exponent], ca, cb)[0])


def free_kinetic(a: FreePrimitive, b: FreePrimitive) -> float:
    ang = tuple(v for s in range(3) for v in (a.angular[s], b.angular[s]))
    ea, eb = np.array([a.exponent]), np.array([b.exponent])
    return float(_kinetic_batch(ea, eb, np.array([a.center]), np.array([b.center]), ang)[0])


def free_nuclear(a: FreePrimitive, b: FreePrimitive, geometry: Geometry) -> float:
    """Nuclear attraction -sum_C Z_C <a| 1/|r - C| |b>."""
    batch = _single(a, b)
    return float(_nuclear_batch(batch, geometry.charges, geometry.positions)[0])


def free_eri(a: FreePrimitive, b: FreePrimitive, c: FreePrimitive, d: FreePrimitive) -> float:
    """(ab|cd) in chemists' notation."""
    return float(_eri_batches(_single(a, b), _single(c, d))[0, 0])


# ---------------------------------------------------------------------------
# tensors


def pair_index(i, j):
    i, j = np.maximum(i, j), np.minimum(i, j)
    return i * (i + 1) // 2 + j


def pack_eri(full: np.ndarray) -> np.ndarray:
    """Unique (ij|kl), i>=j, k>=l, ij>=kl, in canonical order."""
    n = full.shape[0]
    ii, jj = np.tril_indices(n)
    mat = full[ii, jj][:, ii, jj]
    a, b = np.tril_indices(len(ii))
    return np.ascontiguousarray(mat[a, b])


def unpack_pair_matrix(packed: np.ndarray, n: int) -> np.ndarray:
    npair = n * (n + 1) // 2
    mat = np.zeros((npair, npair))
    a, b = np.tril_indices(npair)
    mat[a, b] = packed
    mat[b, a] = packed
    return mat


def pair_matrix_to_full(mat: np.ndarray, n: int) -> np.ndarray:
    idx = pair_index(*np.meshgrid(np.arange(n), np.arange(n), indexing="ij"))
    return mat[idx[:, :, None, None], idx[None, None, :, :]]


def pack_pair_matrix(mat: np.ndarray) -> np.ndarray:
    a, b = np.tril_indices(mat.shape[0])
    return np.ascontiguousarray(mat[a, b])


@dataclass
class IntegralTensors:
    """AO-basis one- and two-electron integrals.

    ``eri_packed`` holds each permutationally unique (ij|kl) once
    (i>=j, k>=l, ij>=kl); :attr:`eri` unpacks it to a dense 4-index array.
    """

    S: np.ndarray
    T: np.ndarray
    V: np.ndarray
    eri_packed: np.ndarray
    nuclear_repulsion: float = 0.0
    engine: str = "free"
    geometry_hash: str = ""
    basis_hash: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def n_ao(self) -> int:
        return self.S.shape[0]

    @property
    def H(self) -> np.ndarray:
        return self.T + self.V

    @cached_property
    def eri(self) -> np.ndarray:
        mat = unpack_pair_matrix(self.eri_packed, self.n_ao)
        return pair_matrix_to_full(mat, self.n_ao)

    def smallest_overlap_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.S)[0])

    def permuted(self, order) -> "IntegralTensors":
        order = np.asarray(order)
        ix = np.ix_(order, order)
        full = self.eri[np.ix_(order, order, order, order)]
        return IntegralTensors(
            self.S[ix], self.T[ix], self.V[ix], pack_eri(full), self.nuclear_repulsion,
            self.engine, self.geometry_hash, self.basis_hash, dict(self.metadata),
        )


def primitive_pairs(ao_basis: AOBasis):
    """Group all primitive products of AO pairs (mu >= nu) by angular signature."""
    groups: dict[tuple, dict[str, list]] = {}
    for mu, a in enumerate(ao_basis):
        for nu in range(mu + 1):
            b = ao_basis[nu]
            ang = tuple(v for s in range(3) for v in (a.angular[s], b.angular[s]))
            g = groups.setdefault(ang, {k: [] for k in ("ea", "eb", "ca", "cb", "rows", "w")})
            row = mu * (mu + 1) // 2 + nu
            for e1, c1 in zip(a.exponents, a.coefficients):
                for e2, c2 in zip(b.exponents, b.coefficients):
                    g["ea"].append(e1)
                    g["eb"].append(e2)
                    g["ca"].append(a.center)
                    g["cb"].append(b.center)
                    g["rows"].append(row)
                    g["w"].append(c1 * c2)
    return {k: {n: np.asarray(v, dtype=float) for n, v in g.items()} for k, g in groups.items()}


def assemble_free_tensors(geometry: Geometry, ao_basis: AOBasis) -> IntegralTensors:
    """S, T, V and ERI for a non-periodic system, contraction and normalisation folded in."""
    if geometry.topology.is_periodic:
        raise ValueError("free-space engine requires a non-periodic topology")
    n = len(ao_basis)
    npair = n * (n + 1) // 2
    raw = primitive_pairs(ao_basis)
    s_pair = np.zeros(npair)
    t_pair = np.zeros(npair)
    v_pair = np.zeros(npair)
    batches = []
    for ang, g in raw.items():
        rows = g["rows"].astype(int)
        batch = make_pair_batch(ang, g["ea"], g["eb"], g["ca"], g["cb"], rows, g["w"])
        ca, cb = g["ca"].reshape(-1, 3), g["cb"].reshape(-1, 3)
        np.add.at(s_pair, rows, g["w"] * _overlap_batch(batch, g["ea"], g["eb"], ca, cb))
        np.add.at(t_pair, rows, g["w"] * _kinetic_batch(g["ea"], g["eb"], ca, cb, ang))
        np.add.at(v_pair, rows, g["w"] * _nuclear_batch(batch, geometry.charges, geometry.positions))
        contraction = sparse.csr_matrix((g["w"], (rows, np.arange(len(rows)))), shape=(npair, len(rows)))
        batches.append((batch, contraction))
    eri = np.zeros((npair, npair))
    for ia, (ba, ca_) in enumerate(batches):
        for ib in range(ia + 1):
            bb, cb_ = batches[ib]
            block = ca_ @ (cb_ @ _eri_batches(ba, bb).T).T
            eri += block
            if ib != ia:
                eri += block.T
    # rows mu>=nu only hold one ordering; symmetrise the pair matrix
    eri = 0.5 * (eri + eri.T)
    tensors = IntegralTensors(
        _pair_to_square(s_pair, n),
        _pair_to_square(t_pair, n),
        _pair_to_square(v_pair, n),
        pack_pair_matrix(eri),
        nuclear_repulsion(geometry),
        "free",
        geometry.fingerprint(),
        ao_basis.fingerprint,
    )
    return tensors


def _pair_to_square(vec: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((n, n))
    ii, jj = np.tril_indices(n)
    # tril_indices enumerates (i, j) with i >= j in the same i(i+1)/2 + j order
    out[ii, jj] = vec
    out[jj, ii] = vec
    return out
