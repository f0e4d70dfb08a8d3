"""Riemann theta functions with characteristics, the Fay-Accola ratio and the H3 scan.

Convention::

    theta[a; b](z; tau) = sum_m exp(i pi (m+a).tau.(m+a) + 2 pi i (m+a).(z+b))

The lattice sum is restricted to the ellipsoid ``pi (v - c).Y.(v - c) <= R^2``
(``v = m + a``, ``Y = Im tau``, ``c = -Y^-1 Im z``) with ``R`` chosen from the
incomplete-gamma tail bound of Deconinck et al.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaincc, gamma as gamma_fn

MAX_POINTS = 2_000_000


class ThetaError(ValueError):
    """Im tau is not positive definite, or the lattice sum is too large."""


def _as_tau(tau) -> np.ndarray:
    tau = np.atleast_2d(np.asarray(tau, dtype=complex))
    if tau.shape[0] != tau.shape[1]:
        raise ThetaError("tau must be square")
    return tau


def check_tau(tau, sym_tol: float = 1e-8) -> np.ndarray:
    """Return the Cholesky factor of ``pi Im tau`` or raise ThetaError."""
    tau = _as_tau(tau)
    if np.abs(tau - tau.T).max() > sym_tol * max(1.0, np.abs(tau).max()):
        raise ThetaError("tau is not symmetric")
    Y = 0.5 * (tau.imag + tau.imag.T)
    try:
        L = np.linalg.cholesky(np.pi * Y)
    except np.linalg.LinAlgError:
        eig = np.linalg.eigvalsh(Y)
        raise ThetaError(f"Im tau is not positive definite (eigenvalues {eig})") from None
    return L


def reduce_characteristic(a, b):
    """Split ``a = a0 + k``, ``b = b0 + l`` with ``a0, b0`` in [0, 1).

    Returns ``(a0, b0, witness)`` with ``theta[a;b] = witness * theta[a0;b0]``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    k, l = np.floor(a), np.floor(b)
    a0, b0 = a - k, b - l
    return a0, b0, np.exp(2j * np.pi * float(a0 @ l))


def _shortest_vector(U: np.ndarray) -> float:
    # U upper triangular with pi Y = U^T U; small box search is enough for g <= 4
    g = U.shape[0]
    best = np.inf
    rng = range(-2, 3)
    for m in np.array(np.meshgrid(*([list(rng)] * g))).reshape(g, -1).T:
        if np.any(m):
            best = min(best, float(np.linalg.norm(U @ m)))
    return best


def _radius(g: int, rho: float, tol: float) -> float:
    # tail <= (g/2) (2/rho)^g Gamma(g/2, (R - rho/2)^2)
    def bound(R):
        x = (R - rho / 2) ** 2
        return 0.5 * g * (2 / rho) ** g * gammaincc(g / 2, x) * gamma_fn(g / 2)

    R = max(rho, 1.0)
    while bound(R) > tol:
        R *= 1.2
    lo, hi = R / 1.2, R
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if bound(mid) > tol:
            lo = mid
        else:
            hi = mid
    return max(hi, np.sqrt(g) / 2 + rho / 2)


def _lattice_points(U: np.ndarray, center: np.ndarray, R: float, cap: int) -> np.ndarray:
    """Integer m with ``|U (m - center)| <= R`` (Fincke-Pohst enumeration)."""
    g = U.shape[0]
    out: List[np.ndarray] = []
    m = np.zeros(g)

    def rec(i, partial):
        if len(out) > cap:
            raise ThetaError(f"lattice sum exceeds {cap} points; Im tau is ill-conditioned "
                             f"(cond {np.linalg.cond(U.T @ U):.3e})")
        # contribution of coordinate i given m[i+1:]
        s = U[i, i + 1:] @ (m[i + 1:] - center[i + 1:])
        rem = R * R - partial
        if rem < 0:
            return
        w = np.sqrt(rem) / abs(U[i, i])
        mid = center[i] - s / U[i, i]
        for k in range(int(np.ceil(mid - w)), int(np.floor(mid + w)) + 1):
            m[i] = k
            t = U[i, i] * (k - center[i]) + s
            if i == 0:
                out.append(m.copy())
            else:
                rec(i - 1, partial + t * t)

    rec(g - 1, 0.0)
    return np.array(out).reshape(-1, g)


@dataclass
class ThetaArg:
    z: np.ndarray
    tau: np.ndarray
    a: np.ndarray = None
    b: np.ndarray = None

    def __post_init__(self):
        self.tau = _as_tau(self.tau)
        g = self.tau.shape[0]
        self.z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        self.a = np.zeros(g) if self.a is None else np.atleast_1d(np.asarray(self.a, float))
        self.b = np.zeros(g) if self.b is None else np.atleast_1d(np.asarray(self.b, float))
        if not (len(self.z) == len(self.a) == len(self.b) == g):
            raise ValueError("dimension mismatch between z, tau and characteristic")


def theta(z, tau, a=None, b=None, tol: float = 1e-14, cap: int = MAX_POINTS,
          reduce: bool = True) -> complex:
    """``theta[a;b](z; tau)``; absolute error below ``tol`` times the leading size."""
    arg = ThetaArg(z, tau, a, b)
    tau, z = arg.tau, arg.z
    L = check_tau(tau)
    U = L.T
    g = tau.shape[0]
    a, b, wit = (reduce_characteristic(arg.a, arg.b) if reduce else (arg.a, arg.b, 1.0))
    Y = 0.5 * (tau.imag + tau.imag.T)
    c = -np.linalg.solve(Y, z.imag)
    rho = _shortest_vector(U)
    R = _radius(g, rho, tol)
    ms = _lattice_points(U, c - a, R, cap)
    v = ms + a
    ph = 1j * np.pi * np.einsum("ki,ij,kj->k", v, tau, v) + 2j * np.pi * v @ (z + b)
    # fixed summation order: sort by lattice point
    order = np.lexsort(ms.T[::-1])
    return complex(np.exp(ph[order]).sum() * wit)


def theta_tail_check(z, tau, a=None, b=None, tol: float = 1e-12) -> float:
    """Change of theta when the truncation radius is enlarged by 1."""
    arg = ThetaArg(z, tau, a, b)
    L = check_tau(arg.tau)
    U = L.T
    g = arg.tau.shape[0]
    a0, b0, wit = reduce_characteristic(arg.a, arg.b)
    Y = arg.tau.imag
    c = -np.linalg.solve(Y, arg.z.imag)
    R = _radius(g, _shortest_vector(U), tol)
    vals = []
    for RR in (R, R + 1):
        ms = _lattice_points(U, c - a0, RR, MAX_POINTS)
        v = ms + a0
        ph = (1j * np.pi * np.einsum("ki,ij,kj->k", v, arg.tau, v)
              + 2j * np.pi * v @ (arg.z + b0))
        vals.append(np.exp(ph).sum())
    return float(abs(vals[1] - vals[0]))


# --------------------------------------------------------------------------
# Fay-Accola


def pullback(z, n: int) -> np.ndarray:
    """``(n z_0, z_1..z_(g-1) repeated n times)``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.concatenate([[n * z[0]], np.tile(z[1:], n)])


def fay_accola_ratio(z, tau, tau_hat, n: int, tol: float = 1e-14) -> complex:
    """``theta[e^](pi^* z; tau^) / prod_k theta[0; k/n, 0..](z; tau)``."""
    tau, tau_hat = _as_tau(tau), _as_tau(tau_hat)
    g, gh = tau.shape[0], tau_hat.shape[0]
    if gh != n * (g - 1) + 1:
        raise ValueError(f"genus mismatch: g={g}, g^={gh}, n={n}")
    bh = np.zeros(gh)
    bh[0] = (n - 1) / 2
    num = theta(pullback(z, n), tau_hat, np.zeros(gh), bh, tol)
    den = 1.0 + 0j
    for k in range(n):
        bk = np.zeros(g)
        bk[0] = k / n
        val = theta(z, tau, np.zeros(g), bk, tol)
        if abs(val) < 1e-12:
            raise ZeroDivisionError(f"denominator factor k={k} vanishes at z={z}")
        den *= val
    return num / den


def fay_accola_shift(n: int, g: int) -> np.ndarray:
    """The point with characteristic ``[0..0; (n-1)/(2n), 0..0]``."""
    e = np.zeros(g, dtype=complex)
    e[0] = (n - 1) / (2 * n)
    return e


# --------------------------------------------------------------------------
# H3 scan


@dataclass
class ScanResult:
    lam: np.ndarray
    product: np.ndarray                   # |prod_k theta[0;k/n](z(lam); tau)|
    factors: np.ndarray                   # per-factor moduli, shape (len(lam), n)
    zeros: List[dict] = field(default_factory=list)
    interior_min: float = float("nan")
    symmetry_defect: float = float("nan")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "abs_product"] + [f"abs_factor_{k}" for k in range(self.factors.shape[1])])
            for i in range(len(self.lam)):
                w.writerow([f"{v:.17g}" for v in [self.lam[i], self.product[i], *self.factors[i]]])


def _factors(lam, U, shift, tau, n, tol):
    z = lam * U - shift
    g = len(U)
    out = np.empty(n)
    for k in range(n):
        bk = np.zeros(g)
        bk[0] = k / n
        out[k] = abs(theta(z, tau, np.zeros(g), bk, tol))
    return out


def h3_scan(U, base, tau, n: int, grid: int = 400, e=None, tol: float = 1e-14,
            zero_tol: float = 1e-6, interior=(0.05, 1.95)) -> ScanResult:
    """Scan ``|prod_k theta[0; k/n, 0..](lam U - base - e; tau)|`` for lam in [0, 2].

    ``base`` is the quotient-side base point ``K_(inf+) - e``; ``e`` defaults to
    the Fay-Accola shift, so the argument is ``lam U - K_(inf+)``.
    """
    if grid < 2:
        raise ValueError("grid must have at least 2 points")
    tau = _as_tau(tau)
    check_tau(tau)
    g = tau.shape[0]
    U = np.atleast_1d(np.asarray(U, dtype=complex))
    base = np.atleast_1d(np.asarray(base, dtype=complex))
    e = fay_accola_shift(n, g) if e is None else np.atleast_1d(np.asarray(e, dtype=complex))
    shift = base + e
    lam = np.linspace(0.0, 2.0, grid)
    F = np.array([_factors(l, U, shift, tau, n, tol) for l in lam])
    P = F.prod(axis=1)
    res = ScanResult(lam, P, F)

    def prodabs(l):
        return float(np.prod(_factors(l, U, shift, tau, n, tol)))

    for i in range(len(lam)):
        left = P[i - 1] if i > 0 else np.inf
        right = P[i + 1] if i + 1 < len(lam) else np.inf
        if P[i] <= left and P[i] <= right:
            lo, hi = lam[max(i - 1, 0)], lam[min(i + 1, len(lam) - 1)]
            if 0 < i < len(lam) - 1:
                opt = minimize_scalar(prodabs, bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-12})
                l0, v0 = float(opt.x), float(opt.fun)
            else:
                l0, v0 = float(lam[i]), float(P[i])
            if v0 < zero_tol:
                d = 1e-3
                p1, p2 = prodabs(min(max(l0 + d, 0), 2)), prodabs(min(max(l0 + 2 * d, 0), 2))
                if l0 + 2 * d > 2:
                    p1, p2 = prodabs(l0 - d), prodabs(l0 - 2 * d)
                mult = float(np.log(p2 / p1) / np.log(2)) if p1 > 0 and p2 > 0 else float("nan")
                res.zeros.append({"lambda": l0, "abs_product": v0, "multiplicity": mult})
    mask = (lam > interior[0]) & (lam < interior[1])
    res.interior_min = float(P[mask].min()) if mask.any() else float("nan")
    res.symmetry_defect = float(np.abs(P - P[::-1]).max())
    return res
