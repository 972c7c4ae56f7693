"""Integrals over Clifford gaussians on a flat torus.

Notation for one periodic axis of length L: ``k = 2 pi / L``,
``kappa = L^2 / (2 pi^2)``, ``theta_A = k A``.

Product rule
    exp(-a kappa (1 - cos(kx - theta_A))) * exp(-b kappa (1 - cos(kx - theta_B)))
        = exp(-kappa (p - gamma)) * exp(-gamma kappa (1 - cos(kx - theta_P)))
with ``p = a + b`` and ``gamma exp(i theta_P) = a exp(i theta_A) + b exp(i theta_B)``,
so ``gamma^2 = a^2 + b^2 + 2ab cos(theta_A - theta_B)``.  The sine prefactors
are carried as a trigonometric polynomial in ``v = kx - theta_P``.

Fourier-Bessel expansion
    exp(-g kappa (1 - cos v)) = sum_l ive(l, g kappa) exp(i l v)
(``ive`` = exponentially scaled I_l).  A pair density is therefore a
Fourier series ``sum_m F_m exp(i m k x)`` with closed-form coefficients;
overlaps are ``L F_0``.  The Coulomb kernel ``exp(-t^2 |x1 - x2|_E^2)``
is itself an s-type Clifford gaussian of exponent t^2, so nuclear
attraction and ERIs become Laplace integrals over t of Bessel-weighted
dot products of Fourier coefficients.  Non-periodic axes use the usual
Hermite-gaussian algebra.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .basis import AOBasis, CliffordPrimitive, FreePrimitive
from .cgto_integrals import (
    IntegralTensors,
    _pair_to_square,
    gaussian_derivatives,
    hermite_expansion,
    kinetic_1d,
    overlap_1d,
    pack_pair_matrix,
)
from .errors import ExperimentalPathError, IntegralError, QuadratureError
from .specfun import (
    QuadratureSpec,
    bessel_bandwidth,
    bessel_i_scaled_orders,
    graded_rule,
    halfline_map,
    integrate_halfline,
)
from .topology import Geometry, SupercellTopology, nuclear_repulsion

TWO_OVER_SQRT_PI = 2.0 / np.sqrt(np.pi)
DEFAULT_SPEC = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-12)


# ---------------------------------------------------------------------------
# one periodic axis


@dataclass(frozen=True)
class TrigGaussian:
    """``sum_n c_n exp(i n v) * exp(-alpha kappa (1 - cos v))`` with ``v = k (x - center)``.

    ``coeffs`` holds n = -N..N.
    """

    coeffs: np.ndarray
    exponent: float
    center: float
    length: float

    @property
    def k(self) -> float:
        return 2.0 * np.pi / self.length

    @property
    def kappa(self) -> float:
        return self.length**2 / (2.0 * np.pi**2)

    @property
    def degree(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def evaluate(self, x):
        v = self.k * (np.asarray(x, dtype=float) - self.center)
        n = np.arange(-self.degree, self.degree + 1)
        poly = np.real(np.exp(1j * np.multiply.outer(v, n)) @ self.coeffs)
        return poly * np.exp(-self.exponent * self.kappa * (1.0 - np.cos(v)))

    def derivative(self) -> "TrigGaussian":
        """d/dx, again a trigonometric polynomial times the same Clifford exponential."""
        c = np.concatenate([[0.0], self.coeffs, [0.0]]).astype(complex)
        n = np.arange(-(self.degree + 1), self.degree + 2)
        shifted_up = np.concatenate([[0.0], c[:-1]])  # c_{n-1}
        shifted_dn = np.concatenate([c[1:], [0.0]])  # c_{n+1}
        ak = self.exponent * self.kappa
        d = self.k * (1j * n * c - ak / 2j * (shifted_up - shifted_dn))
        return TrigGaussian(d, self.exponent, self.center, self.length)


def trig_gaussian(i: int, exponent: float, center: float, length: float) -> TrigGaussian:
    """The periodic factor ``(sin(v)/k)^i exp(-alpha kappa (1 - cos v))``."""
    k = 2.0 * np.pi / length
    c = np.zeros(2 * i + 1, dtype=complex)
    # (e^{iv} - e^{-iv})^i / (2i k)^i
    for m in range(i + 1):
        c[i + (i - 2 * m)] += comb(i, m) * (-1) ** m
    c /= (2j * k) ** i
    return TrigGaussian(c, float(exponent), float(center), float(length))


@dataclass(frozen=True)
class PeriodicPairFactor:
    """Product of two periodic factors as one Clifford gaussian.

    Value: ``exp(log_scale) * sum_n coeffs_n e^{i n v} * exp(-gamma kappa (1 - cos v))``,
    ``v = k (x - center)``.
    """

    gamma: float
    center: float
    log_scale: float
    coeffs: np.ndarray
    length: float

    @property
    def k(self):
        return 2.0 * np.pi / self.length

    @property
    def kappa(self):
        return self.length**2 / (2.0 * np.pi**2)

    @property
    def degree(self):
        return (len(self.coeffs) - 1) // 2

    @property
    def bandwidth(self) -> int:
        return bessel_bandwidth(self.gamma * self.kappa, self.degree)

    def evaluate(self, x):
        v = self.k * (np.asarray(x, dtype=float) - self.center)
        n = np.arange(-self.degree, self.degree + 1)
        poly = np.real(np.exp(1j * np.multiply.outer(v, n)) @ self.coeffs)
        return np.exp(self.log_scale) * poly * np.exp(-self.gamma * self.kappa * (1.0 - np.cos(v)))

    def fourier(self, max_order: int | None = None) -> np.ndarray:
        """Coefficients F_m, m = 0..M, of ``sum_m F_m exp(i m k x)`` (F_{-m} = conj F_m)."""
        M = self.bandwidth if max_order is None else max_order
        N = self.degree
        ive = bessel_i_scaled_orders(M + N, self.gamma * self.kappa)
        sym = np.concatenate([ive[:0:-1], ive])  # orders -(M+N)..(M+N)
        full = np.convolve(self.coeffs, sym)  # orders -(M+2N)..(M+2N)
        centre = M + 2 * N
        rel = full[centre : centre + M + 1] * np.exp(self.log_scale)
        m = np.arange(M + 1)
        return rel * np.exp(-1j * m * self.k * self.center)

    def integral(self) -> float:
        """Integral over one period."""
        return float(self.length * np.real(self.fourier(0)[0]))


def periodic_pair(fa: TrigGaussian, fb: TrigGaussian) -> PeriodicPairFactor:
    if not np.isclose(fa.length, fb.length, rtol=1e-14, atol=0):
        raise ValueError("periodic factors live on different supercells")
    k, kappa, L = fa.k, fa.kappa, fa.length
    a, b = fa.exponent, fb.exponent
    ta, tb = k * fa.center, k * fb.center
    z = a * np.exp(1j * ta) + b * np.exp(1j * tb)
    gamma = abs(z)
    theta_p = np.angle(z) if gamma > 1e-300 else ta
    # p - gamma without cancellation
    p_minus_gamma = 4.0 * a * b * np.sin(0.5 * (ta - tb)) ** 2 / (a + b + gamma)
    ca = fa.coeffs * np.exp(1j * np.arange(-fa.degree, fa.degree + 1) * (theta_p - ta))
    cb = fb.coeffs * np.exp(1j * np.arange(-fb.degree, fb.degree + 1) * (theta_p - tb))
    center = np.mod(theta_p / k, L)
    return PeriodicPairFactor(float(gamma), float(center), float(-kappa * p_minus_gamma), np.convolve(ca, cb), L)


def real_components(f: np.ndarray) -> np.ndarray:
    """Map F_0..F_M to [F_0, sqrt2 Re F_1, sqrt2 Im F_1, ...].

    Then ``sum_{l=-M}^{M} conj(F_l) G_l w_|l| = sum_c R^F_c R^G_c w_l(c)``
    for real functions with Fourier coefficients F, G.
    """
    out = np.empty(2 * len(f) - 1)
    out[0] = f[0].real
    out[1::2] = np.sqrt(2.0) * f[1:].real
    out[2::2] = np.sqrt(2.0) * f[1:].imag
    return out


def component_orders(n_comp: int) -> np.ndarray:
    return (np.arange(n_comp) + 1) // 2


# ---------------------------------------------------------------------------
# pair products


@dataclass(frozen=True)
class FreePairFactor:
    """Gaussian product on a non-periodic axis, as Hermite gaussians at ``center``."""

    p: float
    center: float
    hermite: tuple[float, ...]

    def evaluate(self, x):
        d = np.asarray(x, dtype=float) - self.center
        g = gaussian_derivatives(len(self.hermite) - 1, self.p, d)
        # Lambda_t = d^t/dP^t exp(-p (x-P)^2) = (-1)^t d^t/dx^t
        return sum(e * (-1) ** t * g[t] for t, e in enumerate(self.hermite))

    def integral(self) -> float:
        return float(self.hermite[0] * np.sqrt(np.pi / self.p))


@dataclass(frozen=True)
class CliffordProduct:
    axes: tuple  # PeriodicPairFactor or FreePairFactor per Cartesian axis
    topology: SupercellTopology

    def evaluate(self, r):
        r = np.asarray(r, dtype=float)
        val = np.ones(r.shape[:-1])
        for s, ax in enumerate(self.axes):
            val = val * ax.evaluate(r[..., s])
        return val

    def integral(self) -> float:
        out = 1.0
        for ax in self.axes:
            out *= ax.integral()
        return out


def _topology(prim) -> SupercellTopology:
    return getattr(prim, "topology", SupercellTopology.free())


def _axis_factors(prim: FreePrimitive, topo: SupercellTopology, s: int) -> TrigGaussian | None:
    length = topo.axis_length(s)
    if length is None:
        return None
    return trig_gaussian(prim.angular[s], prim.exponent, prim.center[s], length)


def _free_pair(i, j, a, b, ca, cb) -> FreePairFactor:
    e = hermite_expansion(i, j, a, b, ca - cb)
    return FreePairFactor(a + b, (a * ca + b * cb) / (a + b), tuple(float(v) for v in e))


def clifford_product(a: CliffordPrimitive, b: CliffordPrimitive) -> CliffordProduct:
    """Write ``a(r) b(r)`` as a single Clifford gaussian per periodic axis (times a trig polynomial)."""
    topo = _topology(a)
    if _topology(b) != topo:
        raise ValueError("primitives live on different topologies")
    axes = []
    for s in range(3):
        fa = _axis_factors(a, topo, s)
        if fa is None:
            axes.append(_free_pair(a.angular[s], b.angular[s], a.exponent, b.exponent, a.center[s], b.center[s]))
        else:
            axes.append(periodic_pair(fa, _axis_factors(b, topo, s)))
    return CliffordProduct(tuple(axes), topo)


# ---------------------------------------------------------------------------
# primitive integrals


def clifford_overlap(a: CliffordPrimitive, b: CliffordPrimitive) -> float:
    """Overlap over the supercell (periodic axes over one period, others over R)."""
    return clifford_product(a, b).integral()


def overlap_s_closed_form(a: CliffordPrimitive, b: CliffordPrimitive) -> float:
    """Direct s-type formula for centres that differ only along periodic axes.

    (pi/p)^((3-n)/2) prod_s L_s I_0(gamma_s L_s^2 / 2 pi^2) exp(-p L_s^2 / 2 pi^2)
    """
    from .specfun import bessel_i_scaled

    topo = _topology(a)
    p = a.exponent + b.exponent
    out = (np.pi / p) ** ((3 - topo.periodic_dims) / 2.0)
    for s, L in enumerate(topo.lengths):
        dth = 2.0 * np.pi / L * (a.center[s] - b.center[s])
        gamma = np.sqrt(a.exponent**2 + b.exponent**2 + 2 * a.exponent * b.exponent * np.cos(dth))
        z = gamma * L**2 / (2 * np.pi**2)
        # I_0(z) exp(-p kappa) = ive(0, z) exp(z - p kappa)
        out *= L * bessel_i_scaled(0, z) * np.exp(z - p * L**2 / (2 * np.pi**2))
    return float(out)


def clifford_kinetic(a: CliffordPrimitive, b: CliffordPrimitive) -> float:
    """<a| -1/2 nabla^2 |b>; the Laplacian acts on the ket as a trig-polynomial Clifford gaussian."""
    topo = _topology(a)
    s_ax, t_ax = [], []
    for s in range(3):
        fa = _axis_factors(a, topo, s)
        if fa is None:
            args = (a.angular[s], b.angular[s], a.exponent, b.exponent, a.center[s] - b.center[s])
            s_ax.append(float(overlap_1d(*args)))
            t_ax.append(float(kinetic_1d(*args)))
        else:
            fb = _axis_factors(b, topo, s)
            s_ax.append(periodic_pair(fa, fb).integral())
            t_ax.append(-0.5 * periodic_pair(fa, fb.derivative().derivative()).integral())
    return t_ax[0] * s_ax[1] * s_ax[2] + s_ax[0] * t_ax[1] * s_ax[2] + s_ax[0] * s_ax[1] * t_ax[2]


def _nuclear_integrand(product: CliffordProduct, c, topo):
    """Vectorised t -> prod_axes of the Laplace-transformed attraction to a unit charge at ``c``."""
    pieces = []
    for s, ax in enumerate(product.axes):
        if isinstance(ax, PeriodicPairFactor):
            f = ax.fourier()
            theta_c = ax.k * c[s]
            phase = np.exp(-1j * np.arange(len(f)) * theta_c)
            w = np.real(np.conj(f) * phase)
            w[1:] *= 2.0
            pieces.append(("p", ax.length * w, ax.kappa))
        else:
            pieces.append(("f", ax, c[s]))

    def integrand(t):
        tau = np.asarray(t, dtype=float) ** 2
        val = np.ones_like(tau)
        for kind, data, extra in pieces:
            if kind == "p":
                ive = bessel_i_scaled_orders(len(data) - 1, tau * extra)
                val = val * (data @ ive)
            else:
                ax = data
                beta = ax.p * tau / (ax.p + tau)
                g = gaussian_derivatives(len(ax.hermite) - 1, beta, ax.center - extra)
                herm = sum(e * g[t_] for t_, e in enumerate(ax.hermite))
                val = val * np.sqrt(np.pi / (ax.p + tau)) * herm
        return TWO_OVER_SQRT_PI * val

    return integrand


def clifford_nuclear(a: CliffordPrimitive, b: CliffordPrimitive, geometry: Geometry, spec: QuadratureSpec | None = None) -> float:
    """-sum_C Z_C <a| 1/|r - C|_E |b> by Laplace quadrature over t."""
    topo = _topology(a)
    product = clifford_product(a, b)
    p = a.exponent + b.exponent
    spec = spec or DEFAULT_SPEC
    spec = QuadratureSpec(spec.abs_tol, spec.rel_tol, spec.max_subdivisions, spec.order, np.sqrt(p))
    total = 0.0
    for idx, (z, c) in enumerate(zip(geometry.charges, geometry.positions)):
        try:
            val, _ = integrate_halfline(_nuclear_integrand(product, c, topo), spec)
        except QuadratureError as exc:
            raise IntegralError(f"nuclear attraction failed for pair (alpha={a.exponent}, beta={b.exponent}), nucleus {idx}: {exc}") from exc
        total -= z * val
    return total


def _eri_integrand(ab: CliffordProduct, cd: CliffordProduct):
    pieces = []
    for s, (x1, x2) in enumerate(zip(ab.axes, cd.axes)):
        if isinstance(x1, PeriodicPairFactor):
            m = min(x1.bandwidth, x2.bandwidth)
            w = np.real(np.conj(x1.fourier(m)) * x2.fourier(m))
            w[1:] *= 2.0
            pieces.append(("p", x1.length**2 * w, x1.kappa))
        else:
            pieces.append(("f", x1, x2))

    def integrand(t):
        tau = np.asarray(t, dtype=float) ** 2
        val = np.ones_like(tau)
        for kind, d1, d2 in pieces:
            if kind == "p":
                ive = bessel_i_scaled_orders(len(d1) - 1, tau * d2)
                val = val * (d1 @ ive)
            else:
                p, q = d1.p, d2.p
                D = p * q + tau * (p + q)
                beta = p * q * tau / D
                n1, n2 = len(d1.hermite), len(d2.hermite)
                g = gaussian_derivatives(n1 + n2 - 2, beta, d1.center - d2.center)
                acc = np.zeros_like(tau)
                for t1, e1 in enumerate(d1.hermite):
                    for t2, e2 in enumerate(d2.hermite):
                        acc = acc + e1 * e2 * (-1) ** t2 * g[t1 + t2]
                val = val * np.pi / np.sqrt(D) * acc
        return TWO_OVER_SQRT_PI * val

    return integrand


def clifford_eri(a, b, c, d, spec: QuadratureSpec | None = None) -> float:
    """(ab|cd) with the embedding-space Coulomb kernel."""
    ab = clifford_product(a, b)
    cd = clifford_product(c, d)
    if ab.topology != cd.topology:
        raise ValueError("primitives live on different topologies")
    p = a.exponent + b.exponent
    q = c.exponent + d.exponent
    spec = spec or DEFAULT_SPEC
    spec = QuadratureSpec(spec.abs_tol, spec.rel_tol, spec.max_subdivisions, spec.order, np.sqrt(p * q / (p + q)))
    try:
        val, _ = integrate_halfline(_eri_integrand(ab, cd), spec)
    except QuadratureError as exc:
        raise IntegralError(
            f"ERI quadrature failed for exponents ({a.exponent}, {b.exponent} | {c.exponent}, {d.exponent}): {exc}"
        ) from exc
    return val


# ---------------------------------------------------------------------------
# tensor assembly


def _primitive(ao, e, topo):
    return CliffordPrimitive(e, ao.center, ao.angular, topo)


def _one_electron(ao_basis: AOBasis, topo):
    n = len(ao_basis)
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    for mu, a in enumerate(ao_basis):
        for nu in range(mu + 1):
            b = ao_basis[nu]
            s = t = 0.0
            for ea, ca in zip(a.exponents, a.coefficients):
                pa = _primitive(a, ea, topo)
                for eb, cb in zip(b.exponents, b.coefficients):
                    pb = _primitive(b, eb, topo)
                    s += ca * cb * clifford_overlap(pa, pb)
                    t += ca * cb * clifford_kinetic(pa, pb)
            S[mu, nu] = S[nu, mu] = s
            T[mu, nu] = T[nu, mu] = t
    return S, T


@dataclass
class _PairGroup:
    p: float
    py: float
    pz: float
    rows: list
    data: list  # (local row, weight, R-vector, Ey, Ez)

    def build(self):
        self.row_index = np.array(sorted(set(self.rows)), dtype=int)
        local = {r: i for i, r in enumerate(self.row_index)}
        self.n_comp = max(len(d[2]) for d in self.data)
        self.hy = max(len(d[3]) for d in self.data)
        self.hz = max(len(d[4]) for d in self.data)
        R = np.zeros((len(self.row_index), self.n_comp, self.hy, self.hz))
        for row, w, vec, ey, ez in self.data:
            block = w * vec[:, None, None] * np.outer(ey, ez)[None, :, :]
            R[local[row], : len(vec), : len(ey), : len(ez)] += block
        self.R = R
        self.max_order = (self.n_comp - 1) // 2
        del self.data


#: drop primitive pairs whose density prefactor is below this
PAIR_THRESHOLD = 1e-17


def _pair_groups(ao_basis: AOBasis, topo: SupercellTopology):
    """Group primitive pair densities by (p, P_y, P_z); contraction folded into AO-pair rows."""
    L = topo.lengths[0]
    groups: dict[tuple, _PairGroup] = {}
    for mu, a in enumerate(ao_basis):
        for nu in range(mu + 1):
            b = ao_basis[nu]
            row = mu * (mu + 1) // 2 + nu
            fa_list = [trig_gaussian(a.angular[0], e, a.center[0], L) for e in a.exponents]
            fb_list = [trig_gaussian(b.angular[0], e, b.center[0], L) for e in b.exponents]
            for ea, ca, fa in zip(a.exponents, a.coefficients, fa_list):
                for eb, cb, fb in zip(b.exponents, b.coefficients, fb_list):
                    w = ca * cb
                    px = periodic_pair(fa, fb)
                    ey = hermite_expansion(a.angular[1], b.angular[1], ea, eb, a.center[1] - b.center[1])
                    ez = hermite_expansion(a.angular[2], b.angular[2], ea, eb, a.center[2] - b.center[2])
                    size = abs(w) * np.exp(px.log_scale) * np.max(np.abs(ey)) * np.max(np.abs(ez))
                    if size < PAIR_THRESHOLD:
                        continue
                    vec = real_components(px.fourier())
                    p = ea + eb
                    py = (ea * a.center[1] + eb * b.center[1]) / p
                    pz = (ea * a.center[2] + eb * b.center[2]) / p
                    key = (round(p, 12), round(py, 10), round(pz, 10))
                    g = groups.get(key)
                    if g is None:
                        g = groups[key] = _PairGroup(p, py, pz, [], [])
                    g.rows.append(row)
                    g.data.append((row, w, vec, np.array(ey, float), np.array(ez, float)))
    out = list(groups.values())
    for g in out:
        g.build()
    return out


def _nuclear_1d_periodic(groups, geometry, topo, rule):
    L = topo.lengths[0]
    kappa = L**2 / (2 * np.pi**2)
    k = 2 * np.pi / L
    centers: dict[tuple, list] = {}
    for z, c in zip(geometry.charges, geometry.positions):
        centers.setdefault((round(c[1], 10), round(c[2], 10)), []).append((z, c))
    u, w = rule
    out = []
    for g in groups:
        t, jac = halfline_map(u, np.sqrt(g.p))
        tau = t * t
        ive = bessel_i_scaled_orders(g.max_order, tau * kappa)  # (M+1, J)
        lidx = component_orders(g.n_comp)
        beta = g.p * tau / (g.p + tau)
        weight = -TWO_OVER_SQRT_PI * w * jac * L * np.pi / (g.p + tau)
        vals = np.zeros(len(g.row_index))
        for (cy, cz), members in centers.items():
            sf = np.zeros(g.max_order + 1, dtype=complex)
            m = np.arange(g.max_order + 1)
            for z, c in members:
                sf += z * np.exp(-1j * m * k * c[0])
            svec = real_components(sf)
            gy = gaussian_derivatives(g.hy - 1, beta, g.py - cy)
            gz = gaussian_derivatives(g.hz - 1, beta, g.pz - cz)
            kern = svec[:, None] * ive[lidx]  # (C, J)
            for ty in range(g.hy):
                for tz in range(g.hz):
                    kj = kern @ (weight * gy[ty] * gz[tz])
                    vals += g.R[:, :, ty, tz] @ kj
        out.append(vals)
    return out


def _eri_1d_periodic(groups, topo, npair, rule):
    L = topo.lengths[0]
    kappa = L**2 / (2 * np.pi**2)
    u, w = rule
    eri = np.zeros((npair, npair))
    for i1, g1 in enumerate(groups):
        for i2 in range(i1 + 1):
            g2 = groups[i2]
            p, q = g1.p, g2.p
            rho = p * q / (p + q)
            t, jac = halfline_map(u, np.sqrt(rho))
            tau = t * t
            M = min(g1.max_order, g2.max_order)
            C = 2 * M + 1
            ive = bessel_i_scaled_orders(M, tau * kappa)
            D = p * q + tau * (p + q)
            beta = p * q * tau / D
            weight = TWO_OVER_SQRT_PI * w * jac * L**2 * np.pi**2 / D
            gy = gaussian_derivatives(g1.hy + g2.hy - 2, beta, g1.py - g2.py)
            gz = gaussian_derivatives(g1.hz + g2.hz - 2, beta, g1.pz - g2.pz)
            # K[l, ny, nz] = sum_j weight_j ive[l, j] gy[ny, j] gz[nz, j]
            K = np.einsum("lj,nj,mj->lnm", ive * weight, np.array(gy), np.array(gz))
            Kc = K[component_orders(C)]
            R1 = g1.R[:, :C]
            R2 = g2.R[:, :C]
            block = np.zeros((len(g1.row_index), len(g2.row_index)))
            for ty2 in range(g2.hy):
                for tz2 in range(g2.hz):
                    acc = np.zeros((R1.shape[0], C))
                    for ty1 in range(g1.hy):
                        for tz1 in range(g1.hz):
                            acc += R1[:, :, ty1, tz1] * Kc[None, :, ty1 + ty2, tz1 + tz2]
                    sign = -1.0 if (ty2 + tz2) % 2 else 1.0
                    block += sign * acc @ R2[:, :, ty2, tz2].T
            eri[np.ix_(g1.row_index, g2.row_index)] += block
            if i1 != i2:
                eri[np.ix_(g2.row_index, g1.row_index)] += block.T
    return eri


def _general_two_electron(ao_basis, geometry, topo):
    """Primitive-by-primitive V and ERI for any periodic dimensionality (slow)."""
    n = len(ao_basis)
    V = np.zeros((n, n))
    prims = [[(c, _primitive(ao, e, topo)) for e, c in zip(ao.exponents, ao.coefficients)] for ao in ao_basis]
    for mu in range(n):
        for nu in range(mu + 1):
            V[mu, nu] = V[nu, mu] = sum(
                ca * cb * clifford_nuclear(pa, pb, geometry) for ca, pa in prims[mu] for cb, pb in prims[nu]
            )
    npair = n * (n + 1) // 2
    pairs = [(i, j) for i in range(n) for j in range(i + 1)]
    eri = np.zeros((npair, npair))
    for P, (i, j) in enumerate(pairs):
        for Q in range(P + 1):
            k, l = pairs[Q]
            val = 0.0
            for ci, pi in prims[i]:
                for cj, pj in prims[j]:
                    for ck, pk in prims[k]:
                        for cl, pl in prims[l]:
                            val += ci * cj * ck * cl * clifford_eri(pi, pj, pk, pl)
            eri[P, Q] = eri[Q, P] = val
    return V, eri


def assemble_clifford_tensors(
    geometry: Geometry,
    ao_basis: AOBasis,
    experimental: bool = False,
    rule=None,
) -> IntegralTensors:
    """S, T, V and ERI on a Clifford supercell.

    One periodic axis uses the batched Fourier-Bessel path.  For two or
    three periodic axes S and T are always available while V and ERI need
    ``experimental=True`` (primitive-by-primitive adaptive quadrature).
    """
    topo = geometry.topology
    if not topo.is_periodic:
        raise ValueError("Clifford engine requires a periodic topology")
    n = len(ao_basis)
    npair = n * (n + 1) // 2
    S, T = _one_electron(ao_basis, topo)
    if topo.periodic_dims == 1:
        rule = rule or graded_rule()
        groups = _pair_groups(ao_basis, topo)
        v_pair = np.zeros(npair)
        for g, vals in zip(groups, _nuclear_1d_periodic(groups, geometry, topo, rule)):
            v_pair[g.row_index] += vals
        V = _pair_to_square(v_pair, n)
        eri = _eri_1d_periodic(groups, topo, npair, rule)
    elif experimental:
        V, eri = _general_two_electron(ao_basis, geometry, topo)
    else:
        raise ExperimentalPathError(
            f"nuclear attraction and ERIs for {topo.periodic_dims} periodic axes are experimental; "
            "pass experimental=True to enable"
        )
    eri = 0.5 * (eri + eri.T)
    return IntegralTensors(
        S, T, V, pack_pair_matrix(eri), nuclear_repulsion(geometry), "clifford",
        geometry.fingerprint(), ao_basis.fingerprint,
        {"periodic_dims": topo.periodic_dims, "lengths": list(topo.lengths), "experimental": bool(experimental and topo.periodic_dims > 1)},
    )
