"""Sutcliffe's cyclic ansatz, the affine su(n) Toda flow and Nahm's equations.

The Toda phase point ``(q, p)`` is mapped to Nahm data by

    T1 + i T2 = sum_i exp((q_i - q_{i+1})/2) E_{i,i+1}   (indices mod n)
    T1 - i T2 = -(T1 + i T2)^T
    T3        = -(i/2) diag(p)

and Nahm's equations ``dT1/ds = [T2, T3]`` (cyclically) then reduce to

    dq_i/ds = p_i,   dp_i/ds = exp(q_i - q_{i+1}) - exp(q_{i-1} - q_i),

the Hamiltonian flow of ``H = |p|^2/2 - sum_i exp(q_i - q_{i+1})``.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .algebra import BiPoly, bipoly_from_lax
from .ode import OdeResult, dopri45

log = logging.getLogger(__name__)

EXP_GUARD = 690.0


class BlowUpError(FloatingPointError):
    """A Toda exponent left the double-precision safe range."""


@dataclass
class TodaState:
    q: np.ndarray
    p: np.ndarray
    s: float = 1.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float).copy()
        self.p = np.asarray(self.p, dtype=float).copy()
        if self.q.shape != self.p.shape or self.q.ndim != 1:
            raise ValueError("q and p must be 1-d arrays of equal length")
        if self.n < 2:
            raise ValueError("charge n must be at least 2")

    @property
    def n(self) -> int:
        return len(self.q)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, scale: float = 0.5,
               s: float = 1.0, centered: bool = True) -> "TodaState":
        q = rng.normal(scale=scale, size=n)
        p = rng.normal(scale=scale, size=n)
        if centered:
            q -= q.mean()
            p -= p.mean()
        return cls(q, p, s)

    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, y: np.ndarray, s: float) -> "TodaState":
        n = len(y) // 2
        return cls(np.real(y[:n]), np.real(y[n:]), s)


@dataclass
class NahmTriple:
    T1: np.ndarray
    T2: np.ndarray
    T3: np.ndarray
    s: float = 1.0

    @property
    def n(self) -> int:
        return self.T1.shape[0]

    def as_tuple(self):
        return self.T1, self.T2, self.T3

    def vector(self) -> np.ndarray:
        return np.concatenate([T.ravel() for T in self.as_tuple()])

    @classmethod
    def from_vector(cls, y: np.ndarray, n: int, s: float) -> "NahmTriple":
        T = np.asarray(y, dtype=complex).reshape(3, n, n)
        return cls(T[0].copy(), T[1].copy(), T[2].copy(), s)

    def antihermiticity_defect(self) -> float:
        return max(float(np.abs(T + T.conj().T).max()) for T in self.as_tuple())


def _check_guard(q: np.ndarray) -> None:
    d = q - np.roll(q, -1)
    if np.abs(d).max() > EXP_GUARD:
        raise BlowUpError(f"|q_i - q_(i+1)| = {np.abs(d).max():.1f} exceeds {EXP_GUARD}")


def build_nahm(state: TodaState) -> NahmTriple:
    """Nahm triple of the cyclic ansatz for a Toda phase point."""
    q, p, n = state.q, state.p, state.n
    _check_guard(q)
    E = np.zeros((n, n), dtype=complex)
    for i in range(n):
        E[i, (i + 1) % n] = np.exp((q[i] - q[(i + 1) % n]) / 2)
    F = -E.T
    T1 = (E + F) / 2
    T2 = (E - F) / 2j
    T3 = -0.5j * np.diag(p).astype(complex)
    return NahmTriple(T1, T2, T3, state.s)


def toda_rhs(state: TodaState):
    """Return ``(dq/ds, dp/ds)`` for the affine Toda flow."""
    q, p = state.q, state.p
    _check_guard(q)
    fwd = np.exp(q - np.roll(q, -1))     # exp(q_i - q_{i+1})
    bwd = np.roll(fwd, 1)                # exp(q_{i-1} - q_i)
    return p.copy(), fwd - bwd


def hamiltonian(state: TodaState) -> float:
    q, p = state.q, state.p
    _check_guard(q)
    return float(0.5 * np.dot(p, p) - np.exp(q - np.roll(q, -1)).sum())


def lax(nahm: NahmTriple, zeta: complex):
    """The spectral Lax pair ``(A(zeta), M(zeta))``."""
    T1, T2, T3 = nahm.as_tuple()
    A = T1 + 1j * T2 - 2j * T3 * zeta + (T1 - 1j * T2) * zeta**2
    M = -1j * T3 + (T1 - 1j * T2) * zeta
    return A, M


def spectral_bipoly(nahm: NahmTriple) -> BiPoly:
    """``det(eta + A(zeta))`` for the given Nahm data."""
    return bipoly_from_lax(lambda z: lax(nahm, z)[0], nahm.n, max_deg=2)


def nahm_rhs(T1: np.ndarray, T2: np.ndarray, T3: np.ndarray):
    """Right-hand side of Nahm's equations ``dT_i = (1/2) eps_ijk [T_j, T_k]``."""
    def comm(X, Y):
        return X @ Y - Y @ X
    return comm(T2, T3), comm(T3, T1), comm(T1, T2)


# --------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    n: int
    s: np.ndarray
    q: np.ndarray                 # (k, n)
    p: np.ndarray                 # (k, n)
    step_sizes: np.ndarray
    error_estimates: np.ndarray
    tol: float
    blowup: bool = False
    s_star: Optional[float] = None
    message: str = ""
    _ode: Optional[OdeResult] = field(default=None, repr=False)

    def __len__(self):
        return len(self.s)

    def state(self, k: int) -> TodaState:
        return TodaState(self.q[k], self.p[k], float(self.s[k]))

    def states(self):
        return [self.state(k) for k in range(len(self.s))]

    def at(self, s) -> Union[TodaState, list]:
        """Dense-output state(s) at parameter value(s) ``s``."""
        y = self._ode(s)
        states = [TodaState.from_vector(row, float(si)) for row, si in zip(y, np.atleast_1d(s))]
        return states[0] if np.ndim(s) == 0 else states

    def hamiltonians(self) -> np.ndarray:
        return np.array([hamiltonian(st) for st in self.states()])

    def to_csv(self, path) -> None:
        H = self.hamiltonians()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s"] + [f"q_{i + 1}" for i in range(self.n)]
                       + [f"p_{i + 1}" for i in range(self.n)] + ["H"])
            for k in range(len(self.s)):
                w.writerow([f"{v:.17g}" for v in
                            [self.s[k], *self.q[k], *self.p[k], H[k]]])


def _estimate_pole(s: np.ndarray, size: np.ndarray) -> float:
    # near a simple pole 1/size is linear in s; extrapolate its zero
    k = min(6, len(s))
    x, y = s[-k:], 1.0 / size[-k:]
    slope, icpt = np.polyfit(x, y, 1)
    return float(-icpt / slope) if slope != 0 else float(s[-1])


def integrate(start: TodaState, s_end: float, tol: float = 1e-10,
              pole_mode: bool = False, max_steps: int = 200000) -> Trajectory:
    """Integrate the Toda flow from ``start.s`` to ``s_end``.

    Outside pole-diagnostic mode both endpoints must lie in (0, 2).  A blow-up
    (exponent guard or step-size collapse) ends the run early; the returned
    trajectory carries ``blowup=True`` and an extrapolated pole ``s_star``.
    """
    if not pole_mode and not (0 < start.s < 2 and 0 < s_end < 2):
        raise ValueError("flow parameters must lie in (0, 2) outside pole mode")
    n = start.n

    def fun(_s, y):
        q = y[:n]
        fwd = np.exp(np.clip(q - np.roll(q, -1), -EXP_GUARD - 50, EXP_GUARD + 50))
        return np.concatenate([y[n:], fwd - np.roll(fwd, 1)])

    def guard(y):
        q = y[:n]
        return bool(np.abs(q - np.roll(q, -1)).max() > EXP_GUARD)

    res = dopri45(fun, start.s, start.vector(), s_end, tol=tol, guard=guard,
                  max_steps=max_steps)
    traj = Trajectory(n, res.t, res.y[:, :n].copy(), res.y[:, n:].copy(),
                      res.steps, res.err, tol, message=res.message, _ode=res)
    if res.status in ("guard", "step-underflow"):
        traj.blowup = True
        size = np.abs(res.y[:, n:]).max(axis=1)
        traj.s_star = _estimate_pole(res.t, size)
        log.info("blow-up detected near s*=%.12g (%s)", traj.s_star, res.message)
    elif res.status != "ok":
        traj.message = res.message
    return traj


def integrate_nahm(start: NahmTriple, s_end: float, tol: float = 1e-10) -> OdeResult:
    """Integrate Nahm's equations directly on the matrix triple."""
    n = start.n

    def fun(_s, y):
        T = y.reshape(3, n, n)
        return np.concatenate([X.ravel() for X in nahm_rhs(T[0], T[1], T[2])])

    return dopri45(fun, start.s, start.vector(), s_end, tol=tol)


def reflection_defect(traj: Trajectory, samples: int = 11) -> float:
    """Max of ``|T_i(s) - T_i(2 - s)^T|`` over a symmetric sub-interval.

    Only meaningful for true monopole data; arbitrary Toda orbits need not
    satisfy it.
    """
    lo, hi = traj.s[0], traj.s[-1]
    half = min(1 - lo, hi - 1)
    if half <= 0:
        raise ValueError("trajectory does not straddle s = 1")
    grid = np.linspace(1 - half, 1 + half, samples)
    out = 0.0
    for s in grid:
        a = build_nahm(traj.at(s)).as_tuple()
        b = build_nahm(traj.at(2 - s)).as_tuple()
        out = max(out, max(float(np.abs(x - y.T).max()) for x, y in zip(a, b)))
    return out


# --------------------------------------------------------------------------
# boundary poles


def spin_matrices(n: int):
    """Hermitian spin-(n-1)/2 matrices ``J1, J2, J3`` with ``[J1, J2] = i J3``."""
    j = (n - 1) / 2
    m = j - np.arange(n)
    Jp = np.zeros((n, n), dtype=complex)
    for k in range(1, n):
        Jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    Jm = Jp.conj().T
    return (Jp + Jm) / 2, (Jp - Jm) / 2j, np.diag(m).astype(complex)


def irrep_residues(n: int):
    """Residues ``R_i = i J_i``; ``T_i = R_i/(s - s*)`` solves Nahm's equations."""
    return tuple(1j * J for J in spin_matrices(n))


@dataclass
class PoleReport:
    s_star: float
    residues: tuple
    weights: np.ndarray
    expected_weights: np.ndarray
    weight_error: float
    closure_error: float
    fit_residual: float
    simple_pole: bool
    irreducible: bool
    message: str = ""


LADDER = 10.0 ** -np.arange(2.0, 4.01, 0.5)


def _fit_residues(T: Callable[[float], Sequence[np.ndarray]], s_star: float, side: float,
                  ladder: np.ndarray):
    d = side * ladder
    X = np.array([[d_k * Ti for Ti in T(s_star + d_k)] for d_k in d])   # (m, 3, n, n)
    design = np.stack([np.ones_like(d), d, d * d], axis=1)
    flat = X.reshape(len(d), -1)
    coef, *_ = np.linalg.lstsq(design, flat, rcond=None)
    resid = flat - design @ coef
    scale = max(np.abs(flat).max(), 1e-300)
    R = coef[0].reshape(X.shape[1:])
    return R, float(np.abs(resid).max() / scale)


def pole_diagnostic(source, s_star: Optional[float] = None, side: Optional[float] = None,
                    ladder: np.ndarray = LADDER, fit_threshold: float = 1e-4,
                    weight_tol: float = 1e-5) -> PoleReport:
    """Fit ``T_i(s) ~ R_i/(s - s*)`` near a boundary pole and classify ``R``.

    ``source`` is a blown-up :class:`Trajectory` or a callable returning
    ``(T1, T2, T3)`` at ``s``.  Residues are normalized so that ``J_i = -i R_i``
    are hermitian with ``[J1, J2] = i J3``; the reported weights are the
    eigenvalues of ``J3`` and the closure error is
    ``max_cyclic |[R_j, R_k] + R_i|``.  The fit carries linear and quadratic
    correction terms so the extrapolated pole of a blown-up trajectory is
    accurate enough without refinement.
    """
    if isinstance(source, Trajectory):
        if not source.blowup and s_star is None:
            raise ValueError("trajectory did not blow up and no s_star given")
        s_star = source.s_star if s_star is None else s_star
        if side is None:
            side = -float(np.sign(source.s[-1] - source.s[0]))
        traj = source

        def T(s):
            return build_nahm(traj.at(s)).as_tuple()
    else:
        T = source
    side = -1.0 if side is None else side
    if s_star is None:
        raise ValueError("pole location required")
    n = np.asarray(T(s_star + side * ladder[0])[0]).shape[0]

    R, resid = _fit_residues(T, s_star, side, ladder)
    R1, R2, R3 = R

    def comm(X, Y):
        return X @ Y - Y @ X

    closure = max(float(np.abs(comm(R2, R3) + R1).max()),
                  float(np.abs(comm(R3, R1) + R2).max()),
                  float(np.abs(comm(R1, R2) + R3).max()))
    J3 = -1j * R3
    weights = np.sort(np.real(np.linalg.eigvals(J3)))[::-1]
    expected = (n - 1) / 2 - np.arange(n)
    werr = float(np.abs(weights - expected).max())
    simple = resid < fit_threshold
    irreducible = simple and werr < weight_tol and closure < weight_tol * max(1, n)
    msg = "ok" if simple else "not simple-pole-like"
    return PoleReport(s_star, (R1, R2, R3), weights, expected, werr, closure, resid,
                      simple, irreducible, msg)
