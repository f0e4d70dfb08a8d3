"""Spectral curves, the PSU(2) action, and the hyperelliptic Toda quotient."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .algebra import BiPoly, CPoly

REALITY_TOL = 1e-10
DEGENERATE_TOL = 1e-10


class DegenerateCurveError(ValueError):
    """The hyperelliptic polynomial has (numerically) repeated roots."""


def genus_ledger(n: int) -> dict:
    g_hat = (n - 1) ** 2
    g = n - 1
    return {"n": n, "g_hat": g_hat, "g": g, "riemann_hurwitz": g_hat == n * (g - 1) + 1}


@dataclass
class SpectralCurve:
    """``P(eta, zeta) = eta^n + sum_r a_r(zeta) eta^(n-r)``.

    When built with :meth:`cyclic`, ``a`` holds ``a_2..a_n`` and ``beta`` the
    coefficient of ``zeta^(2n)``.
    """
    n: int
    P: BiPoly
    a: Optional[np.ndarray] = None
    beta: Optional[complex] = None

    @classmethod
    def cyclic(cls, n: int, a: Sequence[float], beta: complex) -> "SpectralCurve":
        a = np.asarray(a, dtype=float).ravel()
        if n < 2 or len(a) != n - 1:
            raise ValueError(f"need n >= 2 and n-1 real coefficients a_2..a_n, got {len(a)}")
        grid = np.zeros((n + 1, 2 * n + 1), dtype=complex)
        grid[n, 0] = 1.0
        for r in range(2, n + 1):
            grid[n - r, r] += a[r - 2]
        grid[0, 2 * n] += beta
        grid[0, 0] += (-1) ** n * np.conj(beta)
        return cls(n, BiPoly(grid), a, complex(beta))

    @classmethod
    def from_bipoly(cls, P: BiPoly) -> "SpectralCurve":
        n = P.deg_eta
        lead = P.eta_coeff(n)
        if not lead.allclose(CPoly([1.0])):
            raise ValueError("spectral curve must be monic in eta")
        return cls(n, P)

    @property
    def is_cyclic(self) -> bool:
        return self.beta is not None

    def a_r(self, r: int) -> CPoly:
        return self.P.a(r)

    def degree_pattern_ok(self) -> bool:
        return all(self.a_r(r).degree <= 2 * r for r in range(1, self.n + 1))

    def __call__(self, eta, zeta):
        return self.P(eta, zeta)

    # serialization
    def to_json(self) -> dict:
        if self.is_cyclic:
            return {"n": self.n, "a": [float(v) for v in self.a],
                    "beta": {"re": float(self.beta.real), "im": float(self.beta.imag)}}
        g = self.P.grid
        return {"coeffs": {"re": g.real.tolist(), "im": g.imag.tolist()}}

    @classmethod
    def from_json(cls, d: dict) -> "SpectralCurve":
        if "coeffs" in d:
            g = np.array(d["coeffs"]["re"]) + 1j * np.array(d["coeffs"]["im"])
            return cls.from_bipoly(BiPoly(g))
        b = d["beta"]
        return cls.cyclic(int(d["n"]), d["a"], complex(b["re"], b["im"]))


def check_reality(c: SpectralCurve):
    """Coefficientwise test of ``a_r(z) = (-1)^r z^(2r) conj(a_r(-1/conj z))``.

    Returns ``(ok, max_violation)``.
    """
    worst = 0.0
    for r in range(1, c.n + 1):
        ar = c.a_r(r)
        if ar.degree > 2 * r:
            return False, float("inf")
        refl = ar.conj_reflect(r) * ((-1) ** r)
        d = ar - refl
        worst = max(worst, float(np.abs(d.coeffs).max(initial=0.0)))
    scale = max(1.0, float(np.abs(c.P.grid).max()))
    return worst <= REALITY_TOL * scale, worst


@dataclass
class MobiusRotation:
    """Element ``[[p, q], [-conj q, conj p]]`` of SU(2)."""
    p: complex
    q: complex = 0j

    def __post_init__(self):
        self.p, self.q = complex(self.p), complex(self.q)
        if abs(abs(self.p) ** 2 + abs(self.q) ** 2 - 1) > 1e-14:
            raise ValueError("|p|^2 + |q|^2 must equal 1")

    @classmethod
    def random(cls, rng: np.random.Generator) -> "MobiusRotation":
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        return cls(complex(v[0], v[1]), complex(v[2], v[3]))

    @classmethod
    def cyclic_generator(cls, n: int) -> "MobiusRotation":
        # conj(p) = omega^(1/2): (eta, zeta) -> (omega eta, omega zeta)
        return cls(np.exp(-1j * np.pi / n), 0j)

    def matrix(self) -> np.ndarray:
        """Matrix of the zeta map ``z -> (conj(p) z - conj(q))/(q z + p)``."""
        p, q = self.p, self.q
        return np.array([[np.conj(p), -np.conj(q)], [q, p]])

    def __call__(self, zeta):
        m = self.matrix()
        return (m[0, 0] * zeta + m[0, 1]) / (m[1, 0] * zeta + m[1, 1])

    def then(self, other: "MobiusRotation") -> "MobiusRotation":
        """The rotation acting on curves as ``self`` followed by ``other``.

        Curves transform by pull-back, so the zeta maps compose as
        ``self . other``.
        """
        m = self.matrix() @ other.matrix()
        return MobiusRotation(m[1, 1], m[1, 0])


def rotate(c: SpectralCurve, g: MobiusRotation) -> SpectralCurve:
    """Curve ``Ptilde(eta, zeta) = (q zeta + p)^(2n) P(eta~, zeta~)``."""
    n = c.n
    num = CPoly([-np.conj(g.q), np.conj(g.p)])      # conj(p) z - conj(q)
    den = CPoly([g.p, g.q])                         # q z + p
    grid = np.zeros((n + 1, 2 * n + 1), dtype=complex)
    src = c.P.grid
    for i in range(src.shape[0]):
        for j in range(src.shape[1]):
            cij = src[i, j]
            if cij == 0:
                continue
            k = 2 * n - 2 * i - j
            if k < 0:
                raise ValueError("term exceeds the spectral degree pattern")
            term = (num ** j) * (den ** k) * cij
            grid[i, : len(term.coeffs)] += term.coeffs
    out = SpectralCurve(n, BiPoly(grid))
    if c.is_cyclic:
        # the cyclic shape is kept by C_n itself; recognise it if present
        cyc = _as_cyclic(out)
        if cyc is not None:
            return cyc
    return out


def _as_cyclic(c: SpectralCurve, tol: float = 1e-12) -> Optional[SpectralCurve]:
    n, g = c.n, c.P.grid
    mask = np.zeros_like(g, dtype=bool)
    mask[n, 0] = True
    for r in range(2, n + 1):
        mask[n - r, r] = True
    mask[0, 0] = mask[0, 2 * n] = True
    scale = max(1.0, np.abs(g).max())
    if np.abs(g[~mask]).max(initial=0.0) > tol * scale:
        return None
    a = np.array([g[n - r, r] for r in range(2, n + 1)])
    if np.abs(a.imag).max(initial=0.0) > tol * scale:
        return None
    beta = g[0, 2 * n]
    if abs(g[0, 0] - (-1) ** n * np.conj(beta)) > tol * scale:
        return None
    return SpectralCurve.cyclic(n, a.real, beta)


def normalize_beta(c: SpectralCurve):
    """Rotate a cyclic curve about the axis so that ``beta`` becomes real positive.

    Returns ``(rotated_curve, rotation)``.
    """
    if not c.is_cyclic:
        raise ValueError("cyclic curve required")
    phi = np.angle(c.beta)
    g = MobiusRotation(np.exp(1j * phi / (2 * c.n)), 0j)
    out = rotate(c, g)
    return out, g


# --------------------------------------------------------------------------
# the hyperelliptic quotient


@dataclass
class HyperellipticCurve:
    """``y^2 = f(x)`` of even degree ``2g + 2``.

    Toda curves carry ``n``, ``Q`` and ``beta_abs`` with
    ``f = Q^2 - 4 (-1)^n |beta|^2``.  The point ``inf_+`` is the image of
    ``zeta = inf``; there ``y ~ -x^n``.
    """
    f: CPoly
    n: Optional[int] = None
    Q: Optional[CPoly] = None
    beta_abs: Optional[float] = None
    check: bool = True
    _roots: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.f.degree < 3:
            raise ValueError("degree of f must be at least 3")
        if self.f.degree % 2:
            raise ValueError("even-degree model required")
        if self.check:
            self.roots()

    @classmethod
    def toda(cls, n: int, a: Sequence[float], beta_abs: float, check: bool = True):
        a = np.asarray(a, dtype=float).ravel()
        if len(a) != n - 1:
            raise ValueError("need a_2..a_n")
        if not beta_abs > 0:
            raise ValueError("|beta| must be positive")
        Qc = np.zeros(n + 1)
        Qc[n] = 1.0
        for r in range(2, n + 1):
            Qc[n - r] = a[r - 2]
        Q = CPoly(Qc)
        f = Q * Q - 4 * (-1) ** n * beta_abs ** 2
        return cls(f, n, Q, float(beta_abs), check)

    @property
    def genus(self) -> int:
        return self.f.degree // 2 - 1

    @property
    def a(self) -> Optional[np.ndarray]:
        if self.Q is None:
            return None
        return np.array([self.Q.coeff(self.n - r).real for r in range(2, self.n + 1)])

    @property
    def lead(self) -> complex:
        return self.f.coeffs[-1]

    def roots(self) -> np.ndarray:
        if self._roots is None:
            r = polish_roots(self.f, self.f.roots())
            scale = max(1.0, np.abs(r).max())
            sep = min(abs(r[i] - r[j]) for i in range(len(r)) for j in range(i))
            if sep < 1e-8 * scale or normalized_discriminant(self.f, r) < DEGENERATE_TOL:
                raise DegenerateCurveError(f"f has nearly repeated roots (separation {sep:.3e})")
            self._roots = r
        return self._roots

    def y_at_infinity_sign(self) -> int:
        """Sign s with ``y ~ s sqrt(lead) x^(g+1)`` at ``inf_+`` (-1 for Toda curves)."""
        return -1 if self.n is not None else 1

    def to_json(self) -> dict:
        out = {"f": {"re": self.f.coeffs.real.tolist(), "im": self.f.coeffs.imag.tolist()},
               "genus": self.genus}
        if self.n is not None:
            out.update({"n": self.n, "a": [float(v) for v in self.a], "beta_abs": self.beta_abs})
        return out


def polish_roots(f: CPoly, roots: np.ndarray, iters: int = 3) -> np.ndarray:
    df = CPoly(np.arange(1, len(f.coeffs)) * f.coeffs[1:])
    r = np.array(roots, dtype=complex)
    for _ in range(iters):
        d = df(r)
        ok = np.abs(d) > 0
        r[ok] = r[ok] - f(r[ok]) / d[ok]
    return r


def normalized_discriminant(f: CPoly, roots: np.ndarray) -> float:
    """``prod |r_i - r_j|^2`` scaled by the root size, in [0, 1]-ish units."""
    scale = max(1.0, float(np.abs(roots).max()))
    r = roots / scale
    val = 1.0
    for i in range(len(r)):
        for j in range(i):
            val *= abs(r[i] - r[j]) ** 2 / 4
    return val ** (1.0 / max(1, len(r) * (len(r) - 1) // 2))


def quotient(c: SpectralCurve) -> HyperellipticCurve:
    """The Toda curve ``y^2 = Q(x)^2 - 4(-1)^n |beta|^2`` of a cyclic curve."""
    if not c.is_cyclic:
        raise ValueError("quotient requires a cyclic-form curve")
    if abs(c.beta) == 0:
        raise ValueError("|beta| must be positive")
    return HyperellipticCurve.toda(c.n, c.a, abs(c.beta))


def project_point(c: SpectralCurve, zeta: complex, eta: complex, check: bool = True):
    """Map ``(zeta, eta)`` on a cyclic curve to ``(x, y)`` on its quotient.

    ``x = eta/zeta``, ``nu = beta zeta^n`` and ``y = nu - (-1)^n |beta|^2/nu``.
    Points with ``zeta`` near 0 lie over ``inf_-`` and are rejected.
    """
    if not c.is_cyclic:
        raise ValueError("cyclic curve required")
    if abs(zeta) < 1e-8:
        raise ValueError("zeta too close to 0: point lies over inf_-")
    if check:
        res = abs(c(eta, zeta))
        scale = max(1.0, abs(eta) ** c.n, abs(zeta) ** (2 * c.n))
        if res > 1e-10 * scale:
            raise ValueError(f"point not on curve (residual {res:.3e})")
    n = c.n
    x = eta / zeta
    nu = c.beta * zeta ** n
    y = nu - (-1) ** n * abs(c.beta) ** 2 / nu
    return complex(x), complex(y)


def rho(beta: complex, n: int, j: int) -> complex:
    """Asymptotic slope ``eta/zeta^2 -> rho_j`` at the points over ``zeta = inf``."""
    return complex(beta) ** (1.0 / n) * np.exp(2j * np.pi * (j + 0.5) / n)


def pullback_phase(n: int, r: int, s: int) -> int:
    """Exponent ``k`` with ``phi^* omega_(r,s) = omega^k omega_(r,s)``."""
    if not (0 <= s <= n - 2 and r >= 0):
        raise ValueError("need 0 <= s <= n-2 and r >= 0")
    return (r + s + 2) % n


def omega_rs(c: SpectralCurve, r: int, s: int, zeta, eta):
    """Coefficient of ``dzeta`` in ``zeta^r eta^s dzeta / dP/deta``."""
    return zeta ** r * eta ** s / c.P.d_eta(eta, zeta)


@dataclass
class NormalForm:
    t: float
    theta: float
    reducible: bool

    @property
    def t_prime(self) -> complex:
        """Invariant of the quotient ``Y^2 = x^4 + t' x^2 + 1``."""
        val = 2 * self.t / np.sqrt(complex(self.t ** 2 - 4))
        return val.real if abs(val.imag) < 1e-15 * abs(val) else val


def t_prime(t: float) -> float:
    return 2 * t / np.sqrt(t * t - 4)


def n2_normal_form(c: SpectralCurve, tol: float = 1e-12) -> NormalForm:
    """``(t, theta)`` with ``beta = |beta| e^(2 i theta)`` and ``t = gamma/|beta|``."""
    if c.n != 2 or not c.is_cyclic:
        raise ValueError("n = 2 cyclic curve required")
    b = abs(c.beta)
    if b == 0:
        raise ValueError("|beta| must be positive")
    gamma = float(c.a[0])
    t = gamma / b
    theta = float(np.angle(c.beta) / 2)
    return NormalForm(t, theta, abs(abs(t) - 2) < tol)


def n2_curve(t: float, beta_abs: float = 1.0, theta: float = 0.0) -> SpectralCurve:
    return SpectralCurve.cyclic(2, [t * beta_abs], beta_abs * np.exp(2j * theta))


_FLOAT_TAG = "\x00f"


def _tag_floats(obj):
    if isinstance(obj, dict):
        return {str(k): _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _tag_floats(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return _FLOAT_TAG + format(v, ".17g") if np.isfinite(v) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _tag_floats(obj.real), "im": _tag_floats(obj.imag)}
    return obj


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits (byte-stable)."""
    text = json.dumps(_tag_floats(obj), indent=2, sort_keys=True)
    return re.sub(r'"\\u0000f([^"]*)"', r"\1", text)
