"""Dormand-Prince 5(4) integrator with cubic Hermite dense output.

Written for the smooth, occasionally blowing-up flows of this package: it
works on real or complex state vectors, reports step-size collapse rather
than raising, and keeps every accepted step so the caller can build dense
output or diagnose a singularity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class OdeResult:
    t: np.ndarray
    y: np.ndarray                   # shape (len(t), dim)
    f: np.ndarray                   # derivative at each sample, for Hermite output
    err: np.ndarray                 # accepted local error estimates (normalized)
    steps: np.ndarray               # accepted step sizes
    status: str = "ok"              # "ok" | "step-underflow" | "guard" | "max-steps"
    message: str = ""
    nfev: int = 0

    def __call__(self, t):
        """Cubic Hermite interpolation between accepted steps."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ts = self.t
        sgn = 1.0 if ts[-1] >= ts[0] else -1.0
        key = sgn * ts
        idx = np.clip(np.searchsorted(key, sgn * t, side="right") - 1, 0, len(ts) - 2)
        t0, t1 = ts[idx], ts[idx + 1]
        h = t1 - t0
        s = ((t - t0) / h)[:, None]
        y0, y1 = self.y[idx], self.y[idx + 1]
        f0, f1 = self.f[idx] * h[:, None], self.f[idx + 1] * h[:, None]
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        return h00 * y0 + h10 * f0 + h01 * y1 + h11 * f1


def dopri45(fun: Callable[[float, np.ndarray], np.ndarray], t0: float, y0, t1: float,
            tol: float = 1e-10, h0: Optional[float] = None, hmin_rel: float = 1e-13,
            max_steps: int = 200000,
            guard: Optional[Callable[[np.ndarray], bool]] = None) -> OdeResult:
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t1``.

    The local error is controlled in the mixed norm
    ``max |err_i| / (tol + tol*max(|y_i|, |y_new_i|))``.  ``guard(y)`` may
    return True to stop the run (e.g. exponent blow-up); the partial
    trajectory is returned with ``status="guard"``.
    """
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float)
    t = float(t0)
    direction = np.sign(t1 - t0) or 1.0
    span = abs(t1 - t0)
    f = np.asarray(fun(t, y))
    nfev = 1
    if h0 is None:
        scale = tol + tol * np.abs(y)
        d0 = np.max(np.abs(y) / scale)
        d1 = np.max(np.abs(f) / scale)
        h0 = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
        h0 = min(h0, span / 10 if span else 1.0)
    h = max(h0, 1e-12)
    ts, ys, fs, errs, hs = [t], [y.copy()], [f.copy()], [], []
    status, message = "ok", ""
    K = np.empty((7,) + y.shape, dtype=np.result_type(y, f))
    steps = 0
    while direction * (t1 - t) > 0:
        if steps >= max_steps:
            status, message = "max-steps", f"step budget {max_steps} exhausted at t={t}"
            break
        h = min(h, abs(t1 - t))
        if h < hmin_rel * max(1.0, abs(t)):
            status, message = "step-underflow", f"step size collapsed to {h:.3e} at t={t:.15g}"
            break
        hd = direction * h
        K[0] = f
        for i in range(1, 7):
            yi = y + hd * np.tensordot(_A[i], K[:i], axes=(0, 0))
            K[i] = fun(t + _C[i] * hd, yi)
        nfev += 6
        y_new = y + hd * np.tensordot(_B5, K, axes=(0, 0))
        err_vec = hd * np.tensordot(_E, K, axes=(0, 0))
        scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
        with np.errstate(invalid="ignore", over="ignore"):
            err = float(np.max(np.abs(err_vec) / scale))
        if not np.isfinite(err):
            h *= 0.2
            continue
        if err <= 1.0:
            t = t + hd
            y = y_new
            f = K[6].copy()
            ts.append(t)
            ys.append(y.copy())
            fs.append(f)
            errs.append(err)
            hs.append(hd)
            steps += 1
            if guard is not None and guard(y):
                status, message = "guard", f"guard triggered at t={t:.15g}"
                break
            fac = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
    return OdeResult(np.array(ts), np.array(ys), np.array(fs), np.array(errs),
                     np.array(hs), status, message, nfev)
