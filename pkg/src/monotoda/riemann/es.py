"""The reduced Ercolani-Sinha constraint, its Newton solver, and the vector U."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..curves import DegenerateCurveError, HyperellipticCurve
from .homology import HomologyError, branch_points, cyclic_basis, homology_basis
from .paths import QuadratureError, SegmentSheet
from .periods import PeriodData, PeriodMatrixError, chain_periods, lattice_defect, periods

log = logging.getLogger(__name__)


class ESInfeasibleError(RuntimeError):
    """Newton stagnated (or ran out of iterations) with the residual above tolerance."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass
class ESData:
    r0: int
    r: np.ndarray
    s0: int
    s: np.ndarray
    residual: Optional[np.ndarray] = None

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=int).ravel()
        self.s = np.asarray(self.s, dtype=int).ravel()
        if len(self.r) != len(self.s):
            raise ValueError("r and s must have equal length g-1")

    @classmethod
    def from_list(cls, ints: Sequence[int]) -> "ESData":
        """``[r0, r..., s0, s...]`` of even length 2g."""
        ints = [int(v) for v in ints]
        if len(ints) % 2 or not ints:
            raise ValueError("need 2g integers (r0, r, s0, s)")
        g = len(ints) // 2
        return cls(ints[0], ints[1:g], ints[g], ints[g + 1:])

    @property
    def genus(self) -> int:
        return len(self.r) + 1

    def row(self, n: int) -> np.ndarray:
        return np.concatenate([[self.r0], n * self.r, [n * self.s0], n * self.s]).astype(float)

    def to_list(self):
        return [self.r0, *self.r.tolist(), self.s0, *self.s.tolist()]


def es_residual(p: PeriodData, e: ESData, n: int) -> np.ndarray:
    """``(r0, n r, n s0, n s) (A; B) + 2 e_g``; zero iff the constraint holds."""
    g = p.genus
    if e.genus != g or n - 1 != g:
        raise ValueError(f"dimension mismatch: genus {g}, ints for genus {e.genus}, n={n}")
    eg = np.zeros(g)
    eg[-1] = 2.0
    return e.row(n) @ np.vstack([p.A, p.B]) + eg


def oriented_cyclic_periods(h: HyperellipticCurve, tol: float = 1e-13) -> PeriodData:
    """Toda-curve periods in the cyclic basis.

    For n = 2 the cover does not distinguish the deck generator from its
    inverse, so the pair ``(a_0, b_0)`` is only fixed up to a common sign; we
    take the sign with ``Re A_00 <= 0``.
    """
    cut = homology_basis(branch_points(h))
    cb = cyclic_basis(h, cut)
    pd = periods(h, cb, tol)
    if h.n == 2 and pd.A[0, 0].real > 0:
        cb.cycles = -cb.cycles
        cb.change_of_basis = -cb.change_of_basis
        pd = periods(h, cb, tol)
    return pd


# --------------------------------------------------------------------------
# Newton solver

_NUMERIC_FAILURES = (DegenerateCurveError, HomologyError, QuadratureError, PeriodMatrixError,
                     ArithmeticError, ValueError, np.linalg.LinAlgError)


def _scaled(h0: HyperellipticCurve, logk: float) -> HyperellipticCurve:
    k = np.exp(logk)
    n = h0.n
    a = np.array([k ** r * h0.a[r - 2] for r in range(2, n + 1)])
    return HyperellipticCurve.toda(n, a, k ** n * h0.beta_abs)


@dataclass
class ESReport:
    curve: HyperellipticCurve
    ints: ESData
    residual: np.ndarray
    norm: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)
    periods: Optional[PeriodData] = None

    def to_json(self) -> dict:
        return {"ints": self.ints.to_list(),
                "residual": {"re": self.residual.real.tolist(), "im": self.residual.imag.tolist()},
                "norm": self.norm, "iterations": self.iterations, "converged": self.converged,
                "curve": self.curve.to_json()}


def es_solve(n: int, ints: ESData, init: HyperellipticCurve, tol: float = 1e-12,
             free: str = "auto", max_iter: int = 60, quad_tol: float = 1e-14,
             max_step: float = 0.5) -> ESReport:
    """Damped Newton on the real curve parameters driving ``es_residual`` to zero.

    ``free="scale"`` moves only along ``a_r -> k^r a_r, |beta| -> k^n |beta|``
    (shape fixed); ``free="all"`` moves ``(a_2..a_n, |beta|)`` with minimum-norm
    Gauss-Newton steps.  ``"auto"`` picks ``"scale"`` for n = 2, where the
    solutions form a one-parameter family.  Jacobians are central differences
    of the periods; steps are capped at ``max_step`` and damped by Armijo
    backtracking on ``|res|^2``.  Curves that break the period engine along
    the way count as rejected trial points.
    """
    if init.n != n:
        raise ValueError("init curve has the wrong charge")
    if free == "auto":
        free = "scale" if n == 2 else "all"
    if free == "scale":
        x = np.zeros(1)

        def curve_of(x):
            return _scaled(init, x[0])
    elif free == "all":
        x = np.concatenate([init.a, [np.log(init.beta_abs)]])

        def curve_of(x):
            return HyperellipticCurve.toda(n, x[:-1], np.exp(x[-1]))
    else:
        raise ValueError(f"unknown free-parameter mode {free!r}")

    def F(x):
        pd = oriented_cyclic_periods(curve_of(x), quad_tol)
        r = es_residual(pd, ints, n)
        return np.concatenate([r.real, r.imag]), r, pd

    fx, rc, pd = F(x)
    hist = [float(np.linalg.norm(rc))]
    it = 0
    for it in range(1, max_iter + 1):
        if np.linalg.norm(rc) < tol:
            break
        J = np.empty((len(fx), len(x)))
        try:
            for j in range(len(x)):
                hstep = 1e-6 * max(1.0, abs(x[j]))
                xp, xm = x.copy(), x.copy()
                xp[j] += hstep
                xm[j] -= hstep
                J[:, j] = (F(xp)[0] - F(xm)[0]) / (2 * hstep)
        except _NUMERIC_FAILURES as ex:
            raise ESInfeasibleError(
                f"Jacobian evaluation failed ({ex}) with residual {np.linalg.norm(rc):.3e}",
                ESReport(curve_of(x), ints, rc, float(np.linalg.norm(rc)), it, False, hist, pd))
        step = np.linalg.lstsq(J, -fx, rcond=None)[0]
        sn = float(np.linalg.norm(step))
        if sn > max_step:
            step *= max_step / sn
        if np.linalg.norm(step) < 1e-14 * max(1.0, np.linalg.norm(x)):
            raise ESInfeasibleError(
                f"Newton stagnated with residual {np.linalg.norm(rc):.3e}",
                ESReport(curve_of(x), ints, rc, float(np.linalg.norm(rc)), it, False, hist, pd))
        f0 = float(fx @ fx)
        lam = 1.0
        while True:
            try:
                fn, rn, pn = F(x + lam * step)
                ok = float(fn @ fn) <= (1 - 1e-4 * lam) * f0
            except _NUMERIC_FAILURES:
                ok = False
            if ok or lam < 1e-6:
                break
            lam *= 0.5
        if not ok:
            raise ESInfeasibleError(
                f"line search failed with residual {np.linalg.norm(rc):.3e}",
                ESReport(curve_of(x), ints, rc, float(np.linalg.norm(rc)), it, False, hist, pd))
        x = x + lam * step
        fx, rc, pd = fn, rn, pn
        hist.append(float(np.linalg.norm(rc)))
        log.debug("es_solve it=%d |res|=%.3e lam=%.3g", it, hist[-1], lam)
    norm = float(np.linalg.norm(rc))
    if norm >= tol:
        raise ESInfeasibleError(f"no convergence in {max_iter} iterations (residual {norm:.3e})",
                                ESReport(curve_of(x), ints, rc, norm, it, False, hist, pd))
    return ESReport(curve_of(x), ints, rc, norm, it, True, hist, pd)


# --------------------------------------------------------------------------
# second-kind differential and the vector U


@dataclass
class UData:
    U: np.ndarray
    a_periods_after: np.ndarray      # a-periods of the normalized differential
    bilinear_U: np.ndarray           # independent value from the bilinear relation
    residue: complex
    coeffs: np.ndarray               # holomorphic correction c (gamma = gamma0 - c.u)

    def lift(self, n: int) -> np.ndarray:
        return pullback_vector(self.U, n)


def pullback_vector(z, n: int) -> np.ndarray:
    """``pi^*(z) = (n z_0, z_1..z_(g-1) repeated n times)`` in the cyclic basis."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return np.concatenate([[n * z[0]], np.tile(z[1:], n)])


def gamma_infinity_periods(h: HyperellipticCurve, pd: PeriodData, tol: float = 1e-13,
                           residue_radius: float = None) -> UData:
    """b-periods over 2 pi i of the normalized second-kind differential.

    ``gamma0 = -(dx - x^n dx/y)/2`` has its only pole at ``inf_+`` with
    principal part ``-dx``, matching the pull-back of the monopole
    differential at the points over ``zeta = inf``.  It is made a-normalized by
    subtracting a combination of the ``u_s``.
    """
    if h.n is None:
        raise ValueError("Toda curve required")
    n, g = h.n, pd.genus
    basis = pd.basis
    P, _ = chain_periods(h, basis, np.array([n]), tol)
    AB = basis.cycles @ (0.5 * P[:, 0])
    ga, gb = AB[:g], AB[g:]
    c = np.linalg.solve(pd.A, ga)
    U = (gb - pd.B @ c) / (2j * np.pi)
    after = ga - pd.A @ c
    # bilinear relation: v_k ~ -(1/n) (A^-1)_(g-1,k) dt at inf_+
    Ainv = np.linalg.inv(pd.A)
    bil = -(1.0 / n) * Ainv[g - 1]
    res = _residue_at_inf_plus(h, c, residue_radius)
    return UData(U, after, bil, res, c)


def _residue_at_inf_plus(h, c, radius=None, m: int = 256) -> complex:
    """``(1/2 pi i) oint gamma`` on a small circle around ``inf_+`` (z = 1/x)."""
    r = h.roots()
    R = 4 * max(1.0, float(np.abs(r).max()))
    rad = 1.0 / R if radius is None else radius
    n, g = h.n, h.genus
    th = 2 * np.pi * np.arange(m) / m
    z = rad * np.exp(1j * th)
    # S(z) = z^(g+1) y with S(0) = -1 on inf_+, continuous inside the disc
    S = -np.prod(np.sqrt(1 - r[None, :] * z[:, None]), axis=1)
    x = 1 / z
    y = S / z ** (g + 1)
    dx_dz = -1 / z ** 2
    form = -0.5 * (1 - x ** n / y) * dx_dz
    for s, cs in enumerate(c):
        form = form - cs * (-(1.0 / n) * x ** s / y) * dx_dz
    dz = 1j * z * (2 * np.pi / m)
    return complex((form * dz).sum() / (2j * np.pi))


def half_period_defect(U: np.ndarray, n: int, tau_hat: np.ndarray) -> float:
    """Distance of ``2 pi^*(U)`` from the lattice of ``tau_hat``."""
    return lattice_defect(2 * pullback_vector(U, n), tau_hat)
