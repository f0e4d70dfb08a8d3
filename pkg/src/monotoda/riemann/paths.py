"""Continuous branches of y along straight segments, and their integrals.

Every square root used here is written as a product of factors
``sqrt((x - r)/(m - r))`` with a reference point ``m`` on the segment.  Each
ratio traces a straight segment through 1 that cannot meet the negative real
axis unless ``r`` lies on the segment, so the principal root is continuous
and no step-by-step sheet tracking is needed.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..algebra import CPoly

MAX_NODES = 4096


class QuadratureError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def gauss_legendre(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return x, w


def _ratio_prod(x, roots, ref):
    x = np.asarray(x, dtype=complex)[..., None]
    return np.prod(np.sqrt((x - roots) / (ref - roots)), axis=-1)


def adaptive_gl(fun, a: float, b: float, tol: float, m0: int = 32):
    """Gauss-Legendre with node doubling; ``fun`` maps an array to rows of values.

    Returns ``(integral, error_estimate)``.
    """
    prev = None
    err = np.inf
    m = m0
    while m <= MAX_NODES:
        x, w = gauss_legendre(m)
        t = 0.5 * (b - a) * x + 0.5 * (b + a)
        val = 0.5 * (b - a) * (w @ fun(t))
        if prev is not None:
            err = float(np.abs(val - prev).max())
            if err <= tol * max(1.0, float(np.abs(val).max())):
                return val, err
        prev = val
        m *= 2
    raise QuadratureError(f"quadrature did not converge with {MAX_NODES} nodes (err {err:.3e})")


class SegmentSheet:
    """Forward sheet of ``y`` on the segment between branch points ``u`` and ``v``.

    Parametrized by ``x = u + (v - u)(1 - cos th)/2``; there
    ``y = i (v - u) sin(th)/2 G(x)`` with ``G^2 = f/((x - u)(x - v))``.
    """

    def __init__(self, lead: complex, roots: np.ndarray, iu: int, iv: int):
        self.u, self.v = roots[iu], roots[iv]
        self.others = np.delete(roots, [iu, iv])
        self.m = 0.5 * (self.u + self.v)
        self.Gm = np.sqrt(lead * np.prod(self.m - self.others))

    def G(self, x):
        return self.Gm * _ratio_prod(x, self.others, self.m)

    def x(self, th):
        return self.u + (self.v - self.u) * (1 - np.cos(th)) / 2

    def y(self, th):
        return 1j * (self.v - self.u) * np.sin(th) / 2 * self.G(self.x(th))

    def integrand(self, powers):
        powers = np.asarray(powers)

        def fun(th):
            x = self.x(th)
            return (x[:, None] ** powers[None, :]) / (1j * self.G(x))[:, None]
        return fun

    def integral(self, powers, tol: float):
        """``int_u^v x^s dx / y`` along the forward sheet for each power ``s``."""
        return adaptive_gl(self.integrand(powers), 0.0, np.pi, tol)

    def clearance(self) -> float:
        if not len(self.others):
            return np.inf
        return float(min(_seg_dist(r, self.u, self.v) for r in self.others))


def _seg_dist(p, a, b) -> float:
    d = b - a
    t = np.clip(((p - a) * np.conj(d)).real / abs(d) ** 2, 0, 1)
    return float(abs(p - (a + t * d)))


def from_branch_point(lead, roots, ie: int, x_end: complex, powers, tol: float):
    """Integral from branch point ``roots[ie]`` to ``x_end`` by ``x = e + (x_end - e) s^2``.

    Returns ``(integrals, y_end)``; the sheet is the one on which
    ``y = sqrt(x_end - e) s G_e(x)`` with ``G_e`` continuous from ``x_end``.
    """
    e = roots[ie]
    others = np.delete(roots, ie)
    d = x_end - e
    sd = np.sqrt(d)
    G_end = np.sqrt(lead * np.prod(x_end - others))
    powers = np.asarray(powers)

    def fun(s):
        x = e + d * s * s
        G = G_end * _ratio_prod(x, others, x_end)
        return 2 * sd * x[:, None] ** powers[None, :] / G[:, None]

    val, err = adaptive_gl(fun, 0.0, 1.0, tol)
    return val, sd * G_end, err


def between_points(roots, x0: complex, y0: complex, x1: complex, powers, tol: float):
    """Integral from ``(x0, y0)`` to ``x1`` continuing y; returns ``(vals, y1, err)``."""
    powers = np.asarray(powers)
    d = x1 - x0

    def fun(t):
        x = x0 + d * t
        y = y0 * _ratio_prod(x, roots, x0)
        return d * x[:, None] ** powers[None, :] / y[:, None]

    val, err = adaptive_gl(fun, 0.0, 1.0, tol)
    y1 = y0 * _ratio_prod(np.array([x1]), roots, x0)[0]
    return val, y1, err


def tail_to_infinity(roots, g: int, X: complex, yX: complex, powers, tol: float):
    """Integral from ``(X, yX)`` to the point at infinity reached by continuation.

    Uses ``z = 1/x``: ``x^k dx/y = -z^(g-1-k) dz / S(z)`` with
    ``S(z) = z^(g+1) y``.  Returns ``(vals, S0, err)`` where ``S0 = S(0)``
    identifies the infinite point (``y ~ S0 x^(g+1)``).
    """
    powers = np.asarray(powers)
    z0 = 1.0 / X
    S_z0 = yX * z0 ** (g + 1)

    def S(z):
        z = np.asarray(z, dtype=complex)[..., None]
        return S_z0 * np.prod(np.sqrt((1 - roots * z) / (1 - roots * z0)), axis=-1)

    def fun(t):
        z = z0 * (1 - t)
        return (-(z[:, None] ** (g - 1 - powers[None, :])) * (-z0) / S(z)[:, None])

    val, err = adaptive_gl(fun, 0.0, 1.0, tol)
    return val, complex(S(np.array([0.0]))[0]), err


def unwrap_log_change(fun, a: float, b: float, m: int = 512, max_m: int = 1 << 18) -> float:
    """Total change of ``arg fun(t)`` for t in [a, b], refining until steps are small."""
    while True:
        t = np.linspace(a, b, m)
        ph = np.angle(fun(t))
        dph = np.diff(ph)
        dph = (dph + np.pi) % (2 * np.pi) - np.pi
        if np.abs(dph).max() < 0.3 or m >= max_m:
            return float(dph.sum())
        m *= 4
