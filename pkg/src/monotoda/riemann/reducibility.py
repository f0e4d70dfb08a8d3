"""Covering-curve consistency: reducibility of the period matrix and the
block structure of the cyclic basis."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..algebra import CPoly
from ..curves import HyperellipticCurve, SpectralCurve, quotient
from ..theta import ThetaError, check_tau, theta
from .es import oriented_cyclic_periods
from .periods import periods


def cover_matrices(n: int):
    """The ``ghat x g`` matrices ``I``, ``I'`` and ``P`` of the cyclic basis."""
    g = n - 1
    gh = (n - 1) ** 2
    I = np.zeros((gh, g))
    Ip = np.zeros((gh, g))
    I[0, 0], Ip[0, 0] = n, 1
    for k in range(n):
        rows = slice(1 + k * (g - 1), 1 + (k + 1) * (g - 1))
        I[rows, 1:] = np.eye(g - 1)
        Ip[rows, 1:] = np.eye(g - 1)
    P = np.zeros((gh, g))
    P[:g, :g] = np.eye(g)
    return I, Ip, P


def cover_M(n: int) -> np.ndarray:
    """``M = diag(I', I)``, so that ``Pihat lambda = M Pi``."""
    I, Ip, _ = cover_matrices(n)
    gh, g = I.shape
    M = np.zeros((2 * gh, 2 * g))
    M[:gh, :g] = Ip
    M[gh:, g:] = I
    return M


def block_C(n: int) -> np.ndarray:
    g = n - 1
    gh = (n - 1) ** 2
    C = np.eye(gh)
    for k in range(1, n):
        rows = slice(1 + k * (g - 1), 1 + (k + 1) * (g - 1))
        C[rows, 1:g] = np.eye(g - 1)
    return C


def poincare_defect(Pi_hat, lam, M, Pi) -> float:
    """``max |Pihat lambda - M Pi|``."""
    Pi_hat, lam, M, Pi = (np.atleast_2d(np.asarray(v, dtype=complex)) for v in (Pi_hat, lam, M, Pi))
    return float(np.abs(Pi_hat @ lam - M @ Pi).max())


# --------------------------------------------------------------------------
# n = 2: both curves elliptic


@dataclass
class ReducibilityReport:
    Pi: np.ndarray              # (A00, B00) of the quotient, differential -dx/(2y)
    Pi_hat: np.ndarray          # covering periods of dzeta/(2 eta) in the matched basis
    lam: complex
    M: np.ndarray
    S: np.ndarray               # integer change from the cut basis of the cover
    defect: float
    tau: complex
    tau_hat: complex

    def to_json(self) -> dict:
        def c(z):
            return {"re": float(np.real(z)), "im": float(np.imag(z))}
        return {"tau": c(self.tau), "tau_hat": c(self.tau_hat), "lambda": c(self.lam),
                "defect": self.defect, "S": self.S.astype(int).tolist(),
                "M": self.M.astype(int).tolist()}


def covering_curve_n2(c: SpectralCurve) -> HyperellipticCurve:
    """The cover ``eta^2 = -(beta zeta^4 + a_2 zeta^2 + conj(beta))`` as ``y^2 = f(x)``."""
    if c.n != 2 or not c.is_cyclic:
        raise ValueError("n = 2 cyclic curve required")
    b = c.beta
    return HyperellipticCurve(CPoly([-np.conj(b), 0, -c.a[0], 0, -b]))


def reducibility_check(c: SpectralCurve, tol: float = 1e-13) -> ReducibilityReport:
    """Compare the covering lattice of ``dzeta/(2 eta)`` with ``M Pi``.

    ``-dx/(2y)`` pulls back to ``dzeta/(2 eta)``, so ``lambda = 1``; the
    cover's homology basis matching the cyclic one is found by writing
    ``M Pi`` in the cut basis of the cover and rounding to integers.
    """
    pd = oriented_cyclic_periods(quotient(c), tol)
    Pi = np.array([pd.A[0, 0], pd.B[0, 0]])
    M = cover_M(2)
    target = M @ Pi
    hp = periods(covering_curve_n2(c), tol=tol, scale=0.5)
    base = np.array([hp.A[0, 0], hp.B[0, 0]])
    R = np.array([[base[0].real, base[1].real], [base[0].imag, base[1].imag]])
    S = np.array([np.rint(np.linalg.solve(R, [w.real, w.imag])) for w in target])
    if round(abs(np.linalg.det(S))) != 1:
        raise ValueError(f"lattices do not match: change of basis {S.tolist()} is not unimodular")
    Pi_hat = S @ base
    lam = complex(np.vdot(Pi_hat, target) / np.vdot(Pi_hat, Pi_hat))
    defect = poincare_defect(Pi_hat[:, None], [[1.0]], M, Pi[:, None])
    return ReducibilityReport(Pi, Pi_hat, lam, M, S, defect, complex(pd.tau[0, 0]),
                              complex(Pi_hat[1] / Pi_hat[0]))


# --------------------------------------------------------------------------
# structural identities on synthetic blocks


def cyclic_block_matrices(a: complex, b: complex, c: complex, d: complex):
    """Block-circulant ``tau_hat`` (4x4) and the quotient ``tau`` (2x2) for n = 3."""
    th = np.array([[a, b, b, b], [b, c, d, d], [b, d, c, d], [b, d, d, c]], dtype=complex)
    t = np.array([[a / 3, b], [b, c + 2 * d]], dtype=complex)
    check_tau(th)
    return th, t


def random_cyclic_blocks(rng: np.random.Generator):
    """Random ``(a, b, c, d)`` giving a block matrix with positive imaginary part."""
    while True:
        a, b, c, d = rng.normal(size=4) + 1j * np.array(
            [3 + rng.random(), 0.3 * rng.normal(), 2 + rng.random(), 0.3 * rng.normal()])
        try:
            cyclic_block_matrices(a, b, c, d)
            return a, b, c, d
        except ThetaError:
            continue


def cyclic_index_rotation(z) -> np.ndarray:
    """``(z0, z1, z2, z3) -> (z0, z3, z1, z2)``: the deck action on cyclic-basis coordinates."""
    z = np.asarray(z)
    return np.concatenate([z[:1], np.roll(z[1:], 1)])


def theta_rotation_defect(a, b, c, d, rng: np.random.Generator, samples: int = 10) -> float:
    th, _ = cyclic_block_matrices(a, b, c, d)
    out = 0.0
    for _ in range(samples):
        z = rng.normal(size=4) + 1j * rng.normal(size=4) * 0.5
        t0 = theta(z, th)
        out = max(out, abs(t0 - theta(cyclic_index_rotation(z), th)) / max(1.0, abs(t0)))
    return out


def synthetic_period_blocks(n: int, rng: np.random.Generator):
    """Random covering a-periods with the cyclic zero/phase structure.

    Columns are ordered noninvariant differentials first, then the invariant
    ones ``omega_(n-2-s, s)``; returns ``(Ahat, A)`` with ``A`` the quotient
    block.
    """
    g = n - 1
    gh = (n - 1) ** 2
    diffs = [(r, s) for s in range(n - 1) for r in range(2 * (n - 2 - s) + 1)]
    non = [(r, s) for r, s in diffs if (r + s + 2) % n != 0]
    w = np.exp(2j * np.pi / n)
    phase = np.array([w ** (r + s + 2) for r, s in non])

    def cplx(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    A = cplx(g, g)
    D0 = cplx(g - 1, len(non))
    Ah = np.zeros((gh, gh), dtype=complex)
    Ah[0, len(non):] = A[0]
    for k in range(n):
        rows = slice(1 + k * (g - 1), 1 + (k + 1) * (g - 1))
        Ah[rows, :len(non)] = D0 * phase ** k
        Ah[rows, len(non):] = A[1:]
    return Ah, A


@dataclass
class CofactorReport:
    cofactor_defect: float      # last row of (C^-1 Ahat)^-1 P vs last row of A^-1
    lambda_defect: float        # e_last lambda A^-1 vs e_last A^-1
    block_zero_defect: float    # size of the lower-right block of C^-1 Ahat


def cofactor_identity(n: int, rng: np.random.Generator) -> CofactorReport:
    Ah, A = synthetic_period_blocks(n, rng)
    g = n - 1
    C = block_C(n)
    _, Ip, P = cover_matrices(n)
    CA = np.linalg.solve(C, Ah)
    lhs = np.linalg.inv(CA)[-1, :g]
    rhs = np.linalg.inv(A)[-1]
    lam = np.linalg.solve(Ah, Ip @ A)
    lam_row = (lam @ np.linalg.inv(A))[-1]
    nn = Ah.shape[0] - g
    return CofactorReport(float(np.abs(lhs - rhs).max()),
                          float(np.abs(lam_row - rhs).max()),
                          float(np.abs(CA[g:, nn:]).max()))
