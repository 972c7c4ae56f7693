"""Special functions and 1D quadrature used by both integral engines.

* exponentially scaled modified Bessel functions ``exp(-z) I_n(z)``,
* the Boys function ``F_m(x)``,
* adaptive Gauss-Legendre quadrature on finite intervals and on the half
  line (through ``t = c u / (1 - u)``), plus a fixed graded rule for
  batched evaluation.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError, QuadratureError

MAX_SCALAR_BESSEL_ORDER = 8


def bessel_i_scaled(order: int, z):
    """``exp(-z) * I_order(z)`` for ``z >= 0`` and ``0 <= order <= 8``."""
    if int(order) != order or order < 0 or order > MAX_SCALAR_BESSEL_ORDER:
        raise DomainError(f"Bessel order must be an integer in [0, 8], got {order}")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise DomainError("scaled Bessel function needs z >= 0")
    out = np.asarray(special.ive(int(order), z))
    big = z > LARGE_BESSEL_ARGUMENT
    if np.any(big):
        out = np.where(big, _ive_asymptotic(float(order), np.where(big, z, 1.0)), out)
    return float(out) if out.ndim == 0 else out


def bessel_i_scaled_orders(max_order: int, z) -> np.ndarray:
    """All orders ``0..max_order`` of ``exp(-z) I_n(z)``.

    Returns an array of shape ``(max_order + 1,) + z.shape``.  Used by the
    Fourier-Bessel expansions of Clifford gaussians, which need orders well
    beyond the scalar API limit.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("scaled Bessel function needs z >= 0")
    orders = np.arange(max_order + 1, dtype=float).reshape((-1,) + (1,) * z.ndim)
    out = special.ive(orders, z[None, ...])
    big = z > LARGE_BESSEL_ARGUMENT
    if np.any(big):
        out[:, big] = _ive_asymptotic(orders.reshape(-1, 1), z[big][None, :])
    return out


#: scipy's ive returns nan beyond roughly 1e9; switch to the Hankel expansion here
LARGE_BESSEL_ARGUMENT = 1e8


def _ive_asymptotic(n, z, terms: int = 6):
    """Large-z expansion of exp(-z) I_n(z); relative error ~ (n^2 / 2z)^terms."""
    mu = 4.0 * n * n
    term = np.ones(np.broadcast(n, z).shape)
    total = term.copy()
    for k in range(1, terms + 1):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        total = total + term
    # for orders comparable to sqrt(z) fall back to the gaussian envelope
    series_ok = mu < 0.5 * z
    envelope = np.exp(-n * n / (2.0 * z))
    return np.where(series_ok, total, envelope) / np.sqrt(2.0 * np.pi * z)


def bessel_bandwidth(z: float, extra: int = 0) -> int:
    """Order beyond which ``I_n(z)/I_0(z)`` is below ~1e-17."""
    return int(math.ceil(math.sqrt(80.0 * max(z, 0.0)))) + 12 + extra


def _boys_series(m: int, x: np.ndarray) -> np.ndarray:
    term = np.ones_like(x)
    total = term / (2 * m + 1)
    for k in range(1, 40):
        term = term * (-x) / k
        total = total + term / (2 * m + 2 * k + 1)
    return total


def boys(m: int, x):
    """Boys function ``F_m(x) = int_0^1 u^(2m) exp(-x u^2) du``."""
    if int(m) != m or m < 0:
        raise DomainError("Boys order must be a non-negative integer")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("Boys function needs x >= 0")
    out = np.empty_like(x)
    small = x < 1.0
    if np.any(small):
        out[small] = _boys_series(int(m), x[small])
    big = ~small
    if np.any(big):
        xb = x[big]
        a = m + 0.5
        out[big] = special.gamma(a) * special.gammainc(a, xb) / (2.0 * xb**a)
    return float(out) if out.ndim == 0 else out


def boys_array(m_max: int, x) -> np.ndarray:
    """``F_0..F_m_max`` at ``x`` by downward recursion; shape ``(m_max+1,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((m_max + 1,) + x.shape)
    out[m_max] = boys(m_max, x)
    ex = np.exp(-x)
    for m in range(m_max - 1, -1, -1):
        out[m] = (2.0 * x * out[m + 1] + ex) / (2 * m + 1)
    return out


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and variable change for :func:`integrate_halfline`.

    ``scale`` sets the half-line map ``t = scale * u / (1 - u)``.
    """

    abs_tol: float = 1e-14
    rel_tol: float = 1e-12
    max_subdivisions: int = 400
    order: int = 15
    scale: float = 1.0

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 16:
            raise ValueError("max_subdivisions must be at least 16")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


@lru_cache(maxsize=64)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panel(f, a, b, order):
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    # two half panels and the full panel in a single vectorised call
    nodes = np.concatenate([a + 0.5 * half * (x + 1.0), mid + 0.5 * half * (x + 1.0), mid + half * x])
    vals = np.asarray(f(nodes), dtype=float)
    left = 0.5 * half * np.dot(w, vals[:order])
    right = 0.5 * half * np.dot(w, vals[order : 2 * order])
    coarse = half * np.dot(w, vals[2 * order :])
    return left + right, abs(left + right - coarse)


def integrate_interval(f, a: float, b: float, spec: QuadratureSpec = QuadratureSpec()):
    """Adaptive Gauss-Legendre quadrature of vectorised ``f`` over [a, b].

    Each panel is estimated with an ``order``-point rule on both halves; the
    difference to the single-panel rule is its error estimate.  Panels with
    the largest estimate are bisected until the total meets the tolerance.
    Returns ``(value, error_estimate)``.
    """
    value, err = _panel(f, a, b, spec.order)
    heap = [(-err, a, b, value, err)]
    total, total_err = value, err
    n_panels = 1
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if n_panels >= spec.max_subdivisions:
            raise QuadratureError(
                f"no convergence after {n_panels} panels (error {total_err:.3e})",
                value=total,
                error=total_err,
            )
        _, lo, hi, v, e = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _panel(f, lo, mid, spec.order)
        v2, e2 = _panel(f, mid, hi, spec.order)
        heapq.heappush(heap, (-e1, lo, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, hi, v2, e2))
        n_panels += 1
        total = sum(item[3] for item in heap)
        total_err = sum(item[4] for item in heap)
    return total, total_err


def halfline_map(u, scale: float = 1.0):
    """Map u in [0, 1) to t = scale u/(1-u); returns (t, dt/du)."""
    u = np.asarray(u, dtype=float)
    one_minus = 1.0 - u
    return scale * u / one_minus, scale / one_minus**2


def integrate_halfline(f, spec: QuadratureSpec = QuadratureSpec()):
    """Integrate vectorised ``f(t)`` over t in [0, inf).  Returns (value, error)."""

    def mapped(u):
        t, jac = halfline_map(u, spec.scale)
        return np.asarray(f(t), dtype=float) * jac

    return integrate_interval(mapped, 0.0, 1.0, spec)


@lru_cache(maxsize=16)
def graded_rule(levels: int = 12, order: int = 12, upper_levels: int = 6):
    """Fixed composite Gauss-Legendre rule on [0, 1] with graded panels.

    Breakpoints ``0, 2^-levels, ..., 1/2, 1 - 2^-2, ..., 1 - 2^-upper_levels, 1``.
    Intended for batched evaluation of Laplace-transform integrands: structure
    near u = 0 comes from distant or tight charge distributions, structure
    near u = 1 from the slowly converging Bessel tail of the periodic axes.
    """
    x, w = gauss_legendre(order)
    edges = (
        [0.0]
        + [2.0 ** (-k) for k in range(levels, 0, -1)]
        + [1.0 - 2.0 ** (-k) for k in range(2, upper_levels + 1)]
        + [1.0]
    )
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    u = np.concatenate(nodes)
    wt = np.concatenate(weights)
    u.setflags(write=False)
    wt.setflags(write=False)
    return u, wt
