"""Period matrices of the differentials ``u_s = c x^s dx / y``."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..curves import HyperellipticCurve
from .homology import HomologyBasis, branch_points, cyclic_basis, homology_basis
from .paths import SegmentSheet

log = logging.getLogger(__name__)


class PeriodMatrixError(RuntimeError):
    """The computed period matrix failed the Riemann bilinear checks."""


class IndefiniteTauError(PeriodMatrixError):
    """Im tau is not positive definite in either b orientation."""


def differential_scale(h: HyperellipticCurve) -> float:
    """``-1/n`` on Toda curves (``u_s = -x^s dx/(n y)``), 1 otherwise."""
    return -1.0 / h.n if h.n is not None else 1.0


def chain_periods(h: HyperellipticCurve, basis: HomologyBasis, powers, tol: float = 1e-13):
    """``oint_(c_k) x^s dx / y`` for the signed chain cycles; returns ``(P, err)``."""
    r = basis.branch.roots
    rows, errs = [], []
    for k in range(2 * basis.genus + 1):
        sh = SegmentSheet(basis.branch.lead, r, k, k + 1)
        val, err = sh.integral(powers, tol)
        rows.append(2 * basis.chain_signs[k] * val)
        errs.append(2 * err)
    return np.array(rows), np.array(errs)


@dataclass
class PeriodData:
    A: np.ndarray
    B: np.ndarray
    tau: np.ndarray
    errest: float
    basis: HomologyBasis
    scale: float
    orientation_fixed: bool = False
    chain: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def genus(self) -> int:
        return self.A.shape[0]

    def symmetry_defect(self) -> float:
        return float(np.abs(self.tau - self.tau.T).max())

    def min_im_eig(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.tau.imag + self.tau.imag.T)).min())

    def to_json(self) -> dict:
        def cm(M):
            return {"re": np.real(M).tolist(), "im": np.imag(M).tolist()}
        return {"A": cm(self.A), "B": cm(self.B), "tau": cm(self.tau), "errest": self.errest,
                "basis": self.basis.kind, "cycles": self.basis.cycles.tolist()}


def _assemble(P, basis, scale):
    g = basis.genus
    AB = basis.cycles @ (scale * P)
    A, B = AB[:g], AB[g:]
    tau = B @ np.linalg.inv(A)
    return A, B, tau


def periods(h: HyperellipticCurve, basis: Optional[HomologyBasis] = None, tol: float = 1e-13,
            scale: Optional[float] = None, check: bool = True) -> PeriodData:
    """a- and b-periods ``A_ij = oint_(a_i) u_j`` and ``tau = B A^-1``."""
    if basis is None:
        basis = homology_basis(branch_points(h))
    if scale is None:
        scale = differential_scale(h)
    g = basis.genus
    P, err = chain_periods(h, basis, np.arange(g), tol)
    A, B, tau = _assemble(P, basis, scale)
    fixed = False
    if check:
        sym = np.abs(tau - tau.T).max() / max(1.0, np.abs(tau).max())
        if sym > 1e-8:
            raise PeriodMatrixError(f"tau not symmetric (defect {sym:.3e})")
        lam = np.linalg.eigvalsh(0.5 * (tau.imag + tau.imag.T)).min()
        if lam <= 0:
            log.info("Im tau indefinite; reversing b orientation")
            basis = basis.swap_b_orientation()
            A, B, tau = _assemble(P, basis, scale)
            fixed = True
            lam = np.linalg.eigvalsh(0.5 * (tau.imag + tau.imag.T)).min()
            if lam <= 0:
                raise IndefiniteTauError("Im tau not positive definite")
    errest = float(np.abs(scale) * np.abs(basis.cycles).sum(axis=1).max() * err.max())
    return PeriodData(A, B, tau, errest, basis, scale, fixed, P)


def toda_periods(h: HyperellipticCurve, tol: float = 1e-13, cyclic: bool = True) -> PeriodData:
    """Periods of a Toda curve in the cut basis or the cyclic-adapted basis."""
    cut = homology_basis(branch_points(h))
    basis = cyclic_basis(h, cut) if cyclic else cut
    return periods(h, basis, tol)


# --------------------------------------------------------------------------
# lattice helpers


def lattice_coords(z, tau):
    """Real ``(m, k)`` with ``z = m + tau k``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    k = np.linalg.solve(tau.imag, z.imag)
    m = z.real - tau.real @ k
    return m, k


def lattice_defect(z, tau) -> float:
    """Distance of ``z`` from the lattice ``Z^g + tau Z^g`` in lattice coordinates."""
    m, k = lattice_coords(z, tau)
    return float(max(np.abs(m - np.rint(m)).max(), np.abs(k - np.rint(k)).max()))


def reduce_to_cell(z, tau):
    """Representative of ``z`` with lattice coordinates in [0, 1); also returns the shift."""
    m, k = lattice_coords(z, tau)
    fm, fk = np.floor(m + 1e-12), np.floor(k + 1e-12)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return z - fm - tau @ fk, (fm.astype(int), fk.astype(int))
