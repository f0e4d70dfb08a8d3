"""Abel map, vector of Riemann constants and the quotient-side base point."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..curves import HyperellipticCurve
from ..theta import fay_accola_shift, theta
from .paths import _seg_dist, between_points, from_branch_point, tail_to_infinity
from .periods import PeriodData, lattice_coords, lattice_defect, reduce_to_cell


@dataclass(frozen=True)
class CurvePoint:
    """Finite point ``(x, y)`` or, with ``inf = +-1``, the point at infinity
    where ``y ~ inf * sqrt(lead) x^(g+1)``."""
    x: complex = 0j
    y: complex = 0j
    inf: int = 0

    @property
    def is_infinite(self) -> bool:
        return self.inf != 0


def inf_plus(h: HyperellipticCurve) -> CurvePoint:
    """``inf_+``: image of ``zeta = inf`` (``y ~ -x^n``) on Toda curves."""
    return CurvePoint(inf=h.y_at_infinity_sign())


def inf_minus(h: HyperellipticCurve) -> CurvePoint:
    return CurvePoint(inf=-h.y_at_infinity_sign())


def involution(P: CurvePoint) -> CurvePoint:
    return CurvePoint(P.x, -P.y, -P.inf)


def random_point(h: HyperellipticCurve, rng: np.random.Generator, scale: float = 1.0) -> CurvePoint:
    x = complex(rng.normal(scale=scale), rng.normal(scale=scale))
    y = np.sqrt(h.f(x)) * rng.choice([-1, 1])
    return CurvePoint(x, complex(y))


@dataclass
class AbelPoint:
    """Point of C^g modulo ``Z^g + tau Z^g``; ``witness`` is the lattice shift removed."""
    z: np.ndarray
    tau: np.ndarray
    witness: tuple = None

    def reduced(self) -> "AbelPoint":
        r, w = reduce_to_cell(self.z, self.tau)
        return AbelPoint(r, self.tau, w)

    def equals(self, other, tol: float = 1e-8) -> bool:
        oz = other.z if isinstance(other, AbelPoint) else np.asarray(other)
        return lattice_defect(self.z - oz, self.tau) < tol

    def defect(self, other) -> float:
        oz = other.z if isinstance(other, AbelPoint) else np.asarray(other)
        return lattice_defect(self.z - oz, self.tau)

    def __add__(self, other):
        oz = other.z if isinstance(other, AbelPoint) else np.asarray(other)
        return AbelPoint(self.z + oz, self.tau)

    def __sub__(self, other):
        oz = other.z if isinstance(other, AbelPoint) else np.asarray(other)
        return AbelPoint(self.z - oz, self.tau)

    def __neg__(self):
        return AbelPoint(-self.z, self.tau)

    def __rmul__(self, k):
        return AbelPoint(k * self.z, self.tau)


class AbelPathError(RuntimeError):
    pass


class AbelMap:
    """Normalized Abel map of a hyperelliptic curve for a given period matrix.

    Paths start at a branch point ``e`` so that the image of ``sigma(P)`` is
    exactly the negative of the image of ``P``; integrals between arbitrary
    points are differences.
    """

    def __init__(self, h: HyperellipticCurve, pd: PeriodData, base_index: int = 0,
                 tol: float = 1e-13):
        self.h, self.pd, self.tol = h, pd, tol
        self.roots = pd.basis.branch.roots
        self.lead = pd.basis.branch.lead
        self.g = pd.genus
        self.ie = base_index
        self.e = self.roots[base_index]
        self.Ainv = np.linalg.inv(pd.A)
        self.scale = pd.scale
        self.powers = np.arange(self.g)
        R = float(np.abs(self.roots).max())
        self.clear = 0.05 * max(1.0, R)

    def _normalize(self, raw) -> np.ndarray:
        return (self.scale * raw) @ self.Ainv

    def _waypoints(self, x_end):
        """Straight path, or a detour via one waypoint, avoiding other branch points."""
        others = np.delete(self.roots, self.ie)

        def clearance(pts):
            out = np.inf
            for p, q in zip(pts[:-1], pts[1:]):
                for r in others:
                    if np.isclose(r, q):
                        continue
                    out = min(out, _seg_dist(r, p, q))
            return out

        direct = [self.e, x_end]
        if clearance(direct) >= self.clear:
            return direct
        mid = 0.5 * (self.e + x_end)
        d = x_end - self.e
        nrm = 1j * d / max(abs(d), 1e-300)
        best, best_c = None, -1.0
        for off in np.linspace(0.1, 2.0, 20) * max(abs(d), self.clear):
            for sgn in (1, -1):
                pts = [self.e, mid + sgn * off * nrm, x_end]
                c = clearance(pts)
                if c > best_c:
                    best, best_c = pts, c
            if best_c >= self.clear:
                break
        if best_c <= 1e-3 * self.clear:
            raise AbelPathError("could not route a path around the branch points")
        return best

    def _raw_finite(self, x, y):
        """Unnormalized integral from ``e`` to ``(x, y)`` and the arrival y value."""
        if abs(x - self.e) < 1e-14 * max(1.0, abs(self.e)):
            return np.zeros(self.g, dtype=complex), 0j
        pts = self._waypoints(x)
        vals, y1, _ = from_branch_point(self.lead, self.roots, self.ie, pts[1], self.powers, self.tol)
        for p, q in zip(pts[1:-1], pts[2:]):
            v2, y1, _ = between_points(self.roots, p, y1, q, self.powers, self.tol)
            vals = vals + v2
        if y is not None and abs(y1 + y) < abs(y1 - y):
            vals, y1 = -vals, -y1
        return vals, y1

    def _raw_infinite(self, sign: int):
        R = 2 * float(np.abs(self.roots).max()) + 2
        best = None
        for phi in np.linspace(0, 2 * np.pi, 24, endpoint=False) + 0.1:
            X = R * np.exp(1j * phi)
            pts = self._waypoints(X)
            c = min(abs(r - X) for r in self.roots)
            if best is None or (len(pts) == 2 and c > best[1]):
                best = (X, c)
                if len(pts) == 2:
                    break
        X = best[0]
        vals, yX = self._raw_finite(X, None)
        tail, S0, _ = tail_to_infinity(self.roots, self.g, X, yX, self.powers, self.tol)
        target = sign * np.sqrt(self.lead)
        if abs(S0 + target) < abs(S0 - target):
            vals, tail = -vals, -tail
        return vals + tail

    def raw(self, P: CurvePoint) -> np.ndarray:
        if P.is_infinite:
            return self._raw_infinite(P.inf)
        return self._raw_finite(P.x, P.y)[0]

    def from_branch(self, P: CurvePoint) -> np.ndarray:
        return self._normalize(self.raw(P))

    def __call__(self, P: CurvePoint, Q: Optional[CurvePoint] = None) -> AbelPoint:
        """``A_Q(P)``, normalized; ``Q`` defaults to the base branch point."""
        z = self.from_branch(P)
        if Q is not None:
            z = z - self.from_branch(Q)
        return AbelPoint(z, self.pd.tau)


def abel_map(h: HyperellipticCurve, pd: PeriodData, P: CurvePoint,
             Q: Optional[CurvePoint] = None, tol: float = 1e-13) -> AbelPoint:
    if Q is not None and not Q.is_infinite and P == Q:
        return AbelPoint(np.zeros(pd.genus, dtype=complex), pd.tau)
    return AbelMap(h, pd, tol=tol)(P, Q)


# --------------------------------------------------------------------------
# Riemann constants


def half_periods(tau: np.ndarray):
    g = tau.shape[0]
    for bits in itertools.product([0, 1], repeat=2 * g):
        m = np.array(bits[:g]) / 2
        k = np.array(bits[g:]) / 2
        yield m + tau @ k, (m, k)


@dataclass
class RiemannConstants:
    K: AbelPoint
    base: CurvePoint
    half_period: tuple
    vanishing: float
    candidates: list


def riemann_constants(h: HyperellipticCurve, pd: PeriodData, base: Optional[CurvePoint] = None,
                      n_divisors: int = 5, seed: int = 0, tol: float = 1e-13,
                      vanish_tol: float = 1e-8) -> RiemannConstants:
    """``K_Q = -A_Q(K_C)/2 + h`` with ``K_C = (g-1)(inf_+ + inf_-)``.

    The half-period ``h`` is the unique one for which
    ``theta(A_Q(D) + K_Q) = 0`` on random effective divisors of degree g-1.
    """
    base = inf_plus(h) if base is None else base
    amap = AbelMap(h, pd, tol=tol)
    g = pd.genus
    zb = amap.from_branch(base)
    kc = (g - 1) * (amap.from_branch(inf_plus(h)) + amap.from_branch(inf_minus(h)) - 2 * zb)
    K0 = -0.5 * kc
    rng = np.random.default_rng(seed)
    divisors = []
    for _ in range(n_divisors if g > 1 else 1):
        pts = [random_point(h, rng) for _ in range(g - 1)]
        divisors.append(sum((amap.from_branch(p) - zb for p in pts), np.zeros(g, dtype=complex)))
    scores = []
    for hp, lab in half_periods(pd.tau):
        K = K0 + hp
        val = max(abs(theta(D + K, pd.tau)) for D in divisors)
        scores.append((val, lab, K))
    scores.sort(key=lambda s: s[0])
    best = scores[0]
    if best[0] > vanish_tol:
        raise RuntimeError(f"no half-period candidate passes the vanishing test (best {best[0]:.3e})")
    return RiemannConstants(AbelPoint(best[2], pd.tau), base, best[1], best[0],
                            [(float(s[0]), s[1]) for s in scores])


def base_point_data(h: HyperellipticCurve, pd: PeriodData, n: Optional[int] = None,
                    rc: Optional[RiemannConstants] = None):
    """Return ``(K_(inf+) - e, e, K_(inf+))`` with ``e`` of characteristic
    ``[0..0; (n-1)/(2n), 0..0]`` in the (cyclic) basis of ``pd``."""
    n = h.n if n is None else n
    if rc is None:
        rc = riemann_constants(h, pd, inf_plus(h))
    e = fay_accola_shift(n, pd.genus)
    return AbelPoint(rc.K.z - e, pd.tau), e, rc.K
