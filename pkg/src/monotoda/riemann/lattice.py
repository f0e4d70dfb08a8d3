"""Integer linear algebra for homology bases."""
from __future__ import annotations

from math import gcd
from typing import List, Sequence, Tuple

import numpy as np


def J_matrix(g: int) -> np.ndarray:
    Z, I = np.zeros((g, g), dtype=int), np.eye(g, dtype=int)
    return np.block([[Z, I], [-I, Z]])


def ext_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return ``(d, x, y)`` with ``a x + b y = d = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def ext_gcd_vector(v: Sequence[int]) -> Tuple[int, np.ndarray]:
    """Return ``(d, x)`` with ``v . x = d = gcd(v)``."""
    v = [int(t) for t in v]
    x = np.zeros(len(v), dtype=int)
    d = 0
    for i, t in enumerate(v):
        d2, p, q = ext_gcd(d, t)
        x *= p
        x[i] = q
        d = d2
    return d, x


def row_basis(M: np.ndarray) -> np.ndarray:
    """Basis (as rows) of the integer row lattice of ``M`` by Hermite reduction."""
    A = [list(map(int, r)) for r in np.asarray(M, dtype=int)]
    ncol = len(A[0]) if A else 0
    out = []
    for col in range(ncol):
        rows = [r for r in A if r[col] != 0]
        rest = [r for r in A if r[col] == 0]
        while len(rows) > 1:
            rows.sort(key=lambda r: abs(r[col]))
            piv = rows[0]
            new = [piv]
            for r in rows[1:]:
                q = r[col] // piv[col]
                r2 = [a - q * b for a, b in zip(r, piv)]
                (new if r2[col] != 0 else rest).append(r2)
            rows = new
        if rows:
            out.append(rows[0])
        A = rest
    return np.array(out, dtype=int).reshape(len(out), ncol)


def pairing(u: np.ndarray, v: np.ndarray, C: np.ndarray) -> int:
    return int(np.asarray(u) @ C @ np.asarray(v))


def complete_pair(a: np.ndarray, pool: np.ndarray, C: np.ndarray) -> np.ndarray:
    """An integer combination ``b`` of ``pool`` rows with ``a . b = 1``."""
    vals = [pairing(a, u, C) for u in pool]
    d, x = ext_gcd_vector(vals)
    if d != 1:
        raise ValueError(f"cycle is not primitive against the pool (gcd {d})")
    return (x @ pool).astype(int)


def project_out(pool: np.ndarray, a: np.ndarray, b: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Symplectic projection ``u + (u.a) b - (u.b) a`` of every pool row."""
    out = []
    for u in pool:
        out.append(u + pairing(u, a, C) * b - pairing(u, b, C) * a)
    out = np.array(out, dtype=int)
    nz = out[np.any(out != 0, axis=1)]
    if len(nz) == 0:
        return np.zeros((0, pool.shape[1]), dtype=int)
    return row_basis(nz)


def symplectic_reduce(pool: np.ndarray, C: np.ndarray,
                      first: np.ndarray = None) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Integer symplectic basis (a_i, b_i) of the lattice spanned by ``pool``."""
    pool = np.asarray(pool, dtype=int)
    A, B = [], []
    while len(pool):
        if first is not None:
            a, first = np.asarray(first, dtype=int), None
        else:
            a = pool[0]
        b = complete_pair(a, pool, C)
        A.append(a)
        B.append(b)
        pool = project_out(pool, a, b, C)
    return A, B
