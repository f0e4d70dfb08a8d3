"""Branch points and integer homology bases of hyperelliptic curves.

Branch points are ordered by real part (ties broken by imaginary part) so the
polyline through them is x-monotone and never crosses itself.  The chain
cycle ``c_k`` (k = 0..2g) is the lift of the segment ``[e_k, e_(k+1)]``: out
on the forward sheet, back on the other.  Only consecutive chain cycles meet,
at their shared branch point, so the intersection matrix is tridiagonal.  All
bases below are integer rows over ``c_0..c_2g``; ``c_0..c_(2g-1)`` alone
already form a basis.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..curves import DegenerateCurveError, HyperellipticCurve
from .lattice import J_matrix, complete_pair, project_out, row_basis, symplectic_reduce
from .paths import SegmentSheet, unwrap_log_change

log = logging.getLogger(__name__)



class HomologyError(RuntimeError):
    """A homology basis could not be built or failed its checks."""

@dataclass
class BranchData:
    roots: np.ndarray                  # ordered branch points
    pairs: List[Tuple[int, int]]       # cuts, as index pairs into roots
    lead: complex
    max_residual: float

    @property
    def genus(self) -> int:
        return len(self.roots) // 2 - 1


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return np.sign(((q - p) * np.conj(r - p)).imag)
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


def _any_crossing(roots, pairs) -> bool:
    for (i, j), (k, l) in itertools.combinations(pairs, 2):
        if _segments_cross(roots[i], roots[j], roots[k], roots[l]):
            return True
    return False


def _min_length_matching(roots) -> List[Tuple[int, int]]:
    best, best_len = None, np.inf

    def rec(left, acc, length):
        nonlocal best, best_len
        if length >= best_len:
            return
        if not left:
            best, best_len = list(acc), length
            return
        i = left[0]
        for j in left[1:]:
            rest = [k for k in left if k not in (i, j)]
            rec(rest, acc + [(i, j)], length + abs(roots[i] - roots[j]))

    rec(list(range(len(roots))), [], 0.0)
    return best


def branch_points(h: HyperellipticCurve) -> BranchData:
    r = h.roots()
    scale = max(1.0, float(np.abs(r).max()))
    key_re = np.round(r.real / (1e-9 * scale))
    order = np.lexsort((r.imag, key_re))
    r = r[order]
    res = float(np.abs(h.f(r)).max() / max(1.0, np.abs(h.f.coeffs).max() * scale ** h.f.degree))
    pairs = [(2 * k, 2 * k + 1) for k in range(len(r) // 2)]
    if _any_crossing(r, pairs):
        pairs = _min_length_matching(r)
        if _any_crossing(r, pairs):
            raise DegenerateCurveError("could not find non-crossing cuts")
    return BranchData(r, pairs, complex(h.lead), res)


@dataclass
class HomologyBasis:
    """Cycles as integer rows over the chain cycles ``c_0..c_2g``.

    ``cycles`` has rows ``a_1..a_g, b_1..b_g``; ``chain_signs`` flips chain
    orientations so that ``c_k . c_(k+1) = +1``.
    """
    branch: BranchData
    chain_signs: np.ndarray
    chain_intersections: np.ndarray
    cycles: np.ndarray
    kind: str = "cut"
    change_of_basis: Optional[np.ndarray] = None      # cycles = change_of_basis @ cut cycles
    chi: Optional[np.ndarray] = None                   # cover monodromy of chain cycles
    n_cover: Optional[int] = None

    @property
    def genus(self) -> int:
        return self.cycles.shape[0] // 2

    def intersection_matrix(self) -> np.ndarray:
        S = self.cycles
        return S @ self.chain_intersections @ S.T

    def is_symplectic(self) -> bool:
        return bool(np.array_equal(self.intersection_matrix(), J_matrix(self.genus)))

    def swap_b_orientation(self) -> "HomologyBasis":
        """Reverse all b-cycles together with the intersection sign convention."""
        g = self.genus
        S = self.cycles.copy()
        S[g:] *= -1
        out = HomologyBasis(self.branch, self.chain_signs, -self.chain_intersections, S,
                            self.kind, self.change_of_basis, self.chi, self.n_cover)
        return out

    def chain_segments(self) -> List[Tuple[int, int]]:
        return [(k, k + 1) for k in range(2 * self.genus + 1)]

    def describe(self) -> dict:
        g = self.genus
        names = [f"a{i}" for i in range(g)] + [f"b{i}" for i in range(g)]
        return {nm: {f"c{k}": int(v) for k, v in enumerate(row) if v}
                for nm, row in zip(names, self.cycles)}


def _local_direction(sheet: SegmentSheet, at_start: bool, fprime_sqrt: complex) -> complex:
    # tangent of the lifted chain cycle in the local coordinate w = y/sqrt(f'(e))
    d = sheet.v - sheet.u
    G = sheet.G(np.array([sheet.u if at_start else sheet.v]))[0]
    w = 1j * d * G / fprime_sqrt
    return w if at_start else -w


def chain_intersections(b: BranchData) -> np.ndarray:
    """Intersection numbers of the unsigned chain cycles ``c_k . c_l``."""
    r = b.roots
    m = len(r) - 1                       # chain cycles c_0..c_2g
    sheets = [SegmentSheet(b.lead, r, k, k + 1) for k in range(m)]
    C = np.zeros((m, m), dtype=int)
    for k in range(m - 1):
        e = r[k + 1]
        fp = b.lead * np.prod(e - np.delete(r, k + 1))
        sq = np.sqrt(fp)
        d1 = _local_direction(sheets[k], False, sq)       # c_k arrives at e
        d2 = _local_direction(sheets[k + 1], True, sq)    # c_(k+1) leaves e
        val = np.imag(np.conj(d1) * d2)
        if abs(val) < 1e-12 * abs(d1) * abs(d2):
            raise DegenerateCurveError("tangent chain cycles at a branch point")
        s = int(np.sign(val))
        C[k, k + 1], C[k + 1, k] = s, -s
    return C


def homology_basis(b: BranchData) -> HomologyBasis:
    """Cut basis: ``a_i`` circles cut ``i+1``, ``b_i`` threads cut 1 to cut ``i+1``."""
    g = b.genus
    C0 = chain_intersections(b)
    signs = np.ones(2 * g + 1, dtype=int)
    for k in range(2 * g):
        if signs[k] * signs[k + 1] * C0[k, k + 1] < 0:
            signs[k + 1] *= -1
    C = C0 * np.outer(signs, signs)
    # cut j is [e_2j, e_2j+1], circled by c_2j
    S = np.zeros((2 * g, 2 * g + 1), dtype=int)
    for i in range(g):
        S[i, 2 * i + 2] = 1
        S[g + i, [2 * k + 1 for k in range(i + 1)]] = -1
    basis = HomologyBasis(b, signs, C, S, "cut", np.eye(2 * g, dtype=int))
    if not basis.is_symplectic():
        raise HomologyError("cut basis failed the symplectic check")
    return basis


# --------------------------------------------------------------------------
# cyclic-adapted basis for Toda curves


def cover_monodromy(h: HyperellipticCurve, basis: HomologyBasis) -> np.ndarray:
    """Winding of ``nu = (y - Q(x))/2`` around each signed chain cycle, mod n."""
    if h.Q is None:
        raise ValueError("Toda curve required")
    r = basis.branch.roots
    out = np.zeros(2 * basis.genus + 1, dtype=int)
    for k in range(2 * basis.genus + 1):
        sh = SegmentSheet(basis.branch.lead, r, k, k + 1)

        def nu(th, sh=sh):
            x = sh.x(th)
            return (sh.y(th) - h.Q(x)) / 2

        dphi = unwrap_log_change(nu, 0.0, np.pi)
        w = 2 * dphi / (2 * np.pi)
        if abs(w - round(w)) > 1e-6:
            raise HomologyError(f"non-integral winding {w}")
        out[k] = (basis.chain_signs[k] * int(round(w))) % h.n
    return out


def _primitive_lift(v: np.ndarray, n: int) -> np.ndarray:
    v = ((v + n // 2) % n) - n // 2
    if np.gcd.reduce(np.abs(v)) == 1:
        return v
    for k in range(len(v)):
        for s in (n, -n):
            w = v.copy()
            w[k] += s
            if np.gcd.reduce(np.abs(w)) == 1:
                return w
    raise HomologyError("no primitive lift found")


def cyclic_basis(h: HyperellipticCurve, cut: HomologyBasis) -> HomologyBasis:
    """Basis adapted to the n-fold cover ``zeta^n = nu/beta``.

    ``a_0`` is dual to the cover monodromy (``chi(gamma) = -gamma . a_0`` mod n),
    ``b_0`` has monodromy 1 so only ``n b_0`` lifts to a closed cycle, and the
    remaining pairs lift to closed cycles on every sheet.
    """
    n, g = h.n, cut.genus
    Cfull = cut.chain_intersections
    chi_full = cover_monodromy(h, cut)
    # work on the genuine basis c_0..c_(2g-1)
    C, chi = Cfull[:2 * g, :2 * g], chi_full[:2 * g]
    if not np.any(chi % n):
        raise DegenerateCurveError("cover is disconnected (reducible curve)")
    Cinv = np.rint(np.linalg.inv(C)).astype(int)
    a0 = _primitive_lift(-(Cinv @ chi), n)
    pool = np.eye(2 * g, dtype=int)
    b0 = complete_pair(a0, pool, C)
    rest = project_out(pool, a0, b0, C)
    A, B = [a0], [b0]
    if len(rest):
        a_r, b_r = symplectic_reduce(rest, C)
        A += a_r
        B += b_r
    S = np.zeros((2 * g, 2 * g + 1), dtype=int)
    S[:, :2 * g] = np.array(A + B, dtype=int)
    mono = (S @ chi_full) % n
    if mono[g] != 1 % n or np.any(np.delete(mono, g)):
        raise HomologyError(f"unexpected cover monodromy {mono}")
    # gamma = sum (gamma.b_i) a_i - (gamma.a_i) b_i in the cut basis
    X = S @ Cfull @ cut.cycles.T
    T = np.concatenate([X[:, g:], -X[:, :g]], axis=1)
    basis = HomologyBasis(cut.branch, cut.chain_signs, Cfull, S, "cyclic", T, chi_full, n)
    if not basis.is_symplectic():
        raise HomologyError("cyclic basis failed the symplectic check")
    return basis
