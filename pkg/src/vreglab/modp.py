"""Dense linear algebra over F_p on numpy integer arrays."""
from __future__ import annotations

import numpy as np


def rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    m = np.array(a, dtype=np.int64) % p
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(m[r:, c])
        if len(nz) == 0:
            continue
        k = r + nz[0]
        if k != r:
            m[[r, k]] = m[[k, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, p)) % p
        others = np.flatnonzero(m[:, c])
        for i in others:
            if i != r:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(a: np.ndarray, p: int) -> int:
    return len(rref(a, p)[1])


def nullspace(a: np.ndarray, p: int) -> np.ndarray:
    """Rows spanning {v : a v = 0}."""
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[1]
    red, pivots = rref(a, p)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = (-red[i, fc]) % p
    return basis


def matpow_sum(t: np.ndarray, count: int, p: int) -> np.ndarray:
    """I + t + ... + t^(count-1) mod p."""
    n = t.shape[0]
    total = np.zeros((n, n), dtype=np.int64)
    power = np.eye(n, dtype=np.int64)
    for _ in range(count):
        total = (total + power) % p
        power = (t @ power) % p
    return total
