"""Small complex polynomial and matrix helpers.

Everything here is plain double precision.  Polynomials store their
coefficients lowest degree first; bivariate polynomials store a grid
``c[i, j]`` multiplying ``eta**i * zeta**j``.
"""
from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

#: degree reported for the zero polynomial
DEG_ZERO = -1

RTOL = 1e-10
ATOL = 1e-10


class InterpolationError(RuntimeError):
    """Sampled characteristic polynomials could not be interpolated reliably."""


class CPoly:
    """Univariate complex polynomial, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[complex] = ()):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs,
                     dtype=complex).ravel()
        nz = np.nonzero(c)[0]
        self.coeffs = c[: nz[-1] + 1] if nz.size else np.zeros(0, dtype=complex)

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "CPoly":
        out = np.zeros(k + 1, dtype=complex)
        out[k] = c
        return cls(out)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if len(self.coeffs) else DEG_ZERO

    def coeff(self, k: int) -> complex:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0j

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for c in self.coeffs[::-1]:
            out = out * z + c
        return out

    def _coerce(self, other) -> "CPoly":
        return other if isinstance(other, CPoly) else CPoly([other])

    def __add__(self, other):
        other = self._coerce(other)
        m = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(m, dtype=complex)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return CPoly(a)

    __radd__ = __add__

    def __neg__(self):
        return CPoly(-self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if not len(self.coeffs) or not len(other.coeffs):
            return CPoly()
        return CPoly(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = CPoly([1.0])
        for _ in range(k):
            out = out * self
        return out

    def compose(self, inner: "CPoly") -> "CPoly":
        """Return ``self(inner(z))``."""
        out = CPoly()
        for c in self.coeffs[::-1]:
            out = out * inner + c
        return out

    def conj_reflect(self, r: int) -> "CPoly":
        """Return ``z**(2r) * conj(self(-1/conj(z)))`` (requires degree <= 2r)."""
        if self.degree > 2 * r:
            raise ValueError(f"degree {self.degree} exceeds 2r={2 * r}")
        out = np.zeros(2 * r + 1, dtype=complex)
        for k, c in enumerate(self.coeffs):
            out[2 * r - k] = (-1) ** k * np.conj(c)
        return CPoly(out)

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.zeros(0, dtype=complex)
        return np.roots(self.coeffs[::-1])

    def allclose(self, other, rtol: float = RTOL, atol: float = ATOL) -> bool:
        other = self._coerce(other)
        m = max(len(self.coeffs), len(other.coeffs), 1)
        a = np.zeros(m, dtype=complex)
        b = np.zeros(m, dtype=complex)
        a[: len(self.coeffs)] = self.coeffs
        b[: len(other.coeffs)] = other.coeffs
        scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0))
        return bool(np.all(np.abs(a - b) <= atol + rtol * scale))

    def __eq__(self, other):
        other = self._coerce(other)
        return len(self.coeffs) == len(other.coeffs) and bool(np.all(self.coeffs == other.coeffs))

    def __repr__(self):
        return f"CPoly({np.array2string(self.coeffs, precision=6)})"


def charpoly(M) -> CPoly:
    """Coefficients (in eta, lowest first) of ``det(eta*1 + M)``."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"square matrix required, got shape {M.shape}")
    if M.shape[0] == 0:
        return CPoly([1.0])
    # np.poly gives det(eta - X) highest first
    return CPoly(np.poly(-M)[::-1])


class BiPoly:
    """Bivariate polynomial ``sum c[i, j] eta**i zeta**j``."""

    def __init__(self, grid):
        g = np.atleast_2d(np.array(grid, dtype=complex))
        self.grid = g

    @property
    def deg_eta(self) -> int:
        return self.grid.shape[0] - 1

    def eta_coeff(self, i: int) -> CPoly:
        """The zeta-polynomial multiplying ``eta**i``."""
        if i < 0 or i >= self.grid.shape[0]:
            return CPoly()
        return CPoly(self.grid[i])

    def a(self, r: int) -> CPoly:
        """Coefficient ``a_r(zeta)`` of ``eta**(n-r)``."""
        return self.eta_coeff(self.deg_eta - r)

    def __call__(self, eta, zeta):
        eta = np.asarray(eta, dtype=complex)
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros(np.broadcast(eta, zeta).shape, dtype=complex)
        for i in range(self.grid.shape[0] - 1, -1, -1):
            out = out * eta + CPoly(self.grid[i])(zeta)
        return out

    def d_eta(self, eta, zeta):
        eta = np.asarray(eta, dtype=complex)
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros(np.broadcast(eta, zeta).shape, dtype=complex)
        for i in range(self.grid.shape[0] - 1, 0, -1):
            out = out * eta + i * CPoly(self.grid[i])(zeta)
        return out

    def d_zeta(self, eta, zeta):
        eta = np.asarray(eta, dtype=complex)
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros(np.broadcast(eta, zeta).shape, dtype=complex)
        for i in range(self.grid.shape[0] - 1, -1, -1):
            c = self.grid[i]
            dc = CPoly(c[1:] * np.arange(1, len(c))) if len(c) > 1 else CPoly()
            out = out * eta + dc(zeta)
        return out

    def eta_roots(self, zeta: complex) -> np.ndarray:
        coeffs = [CPoly(self.grid[i])(zeta) for i in range(self.grid.shape[0])]
        return CPoly(coeffs).roots()

    def allclose(self, other: "BiPoly", rtol: float = RTOL, atol: float = ATOL) -> bool:
        a, b = self.grid, other.grid
        shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
        A = np.zeros(shape, dtype=complex)
        B = np.zeros(shape, dtype=complex)
        A[: a.shape[0], : a.shape[1]] = a
        B[: b.shape[0], : b.shape[1]] = b
        scale = max(np.abs(A).max(), np.abs(B).max())
        return bool(np.all(np.abs(A - B) <= atol + rtol * scale))

    def max_abs_diff(self, other: "BiPoly") -> float:
        a, b = self.grid, other.grid
        shape = (max(a.shape[0], b.shape[0]), max(a.shape[1], b.shape[1]))
        A = np.zeros(shape, dtype=complex)
        B = np.zeros(shape, dtype=complex)
        A[: a.shape[0], : a.shape[1]] = a
        B[: b.shape[0], : b.shape[1]] = b
        return float(np.abs(A - B).max())

    def __repr__(self):
        return f"BiPoly(shape={self.grid.shape})"


def bipoly_from_lax(A: Callable[[complex], np.ndarray], n: int, max_deg: int = 2,
                    rtol: float = 1e-12) -> BiPoly:
    """Recover ``det(eta + A(zeta))`` as a bivariate polynomial.

    ``A`` must be polynomial in zeta of degree at most ``max_deg``.  The
    characteristic polynomial is sampled at ``N > 2 n max_deg`` roots of
    unity and each eta-coefficient is interpolated by inverse DFT, which is
    exactly the Vandermonde solve on those nodes.
    """
    dz = n * max_deg
    N = 2 * dz + 1
    nodes = np.exp(2j * np.pi * np.arange(N) / N)
    samples = np.empty((N, n + 1), dtype=complex)
    for k, z in enumerate(nodes):
        cp = charpoly(A(z)).coeffs
        if len(cp) != n + 1:
            raise InterpolationError(f"charpoly at zeta={z} has wrong length {len(cp)}")
        samples[k] = cp
    # c_j = (1/N) sum_k s_k w^{-jk}
    coef = np.fft.fft(samples, axis=0) / N
    # fft uses exp(-2 pi i jk/N), matching nodes w^k = exp(2 pi i k/N)
    grid = coef[: dz + 1].T.copy()
    scale = max(np.abs(samples).max(), 1.0)
    tail = np.abs(coef[dz + 1:]).max(initial=0.0)
    if tail > 1e3 * rtol * scale:
        raise InterpolationError(f"degree bound violated: tail coefficient {tail:.3e}")
    grid[np.abs(grid) < 1e-15 * scale] = 0.0
    bp = BiPoly(grid)
    recon = np.array([[CPoly(grid[i])(z) for i in range(n + 1)] for z in nodes])
    err = np.abs(recon - samples).max()
    if err > rtol * scale * 10:
        raise InterpolationError(f"interpolation residual {err:.3e}")
    return bp
