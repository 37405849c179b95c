"""Exact sums of N-th roots of unity.

A value is a formal integer combination of zeta_N^e.  Equality is decided by
reducing modulo the cyclotomic polynomial Phi_N, which gives the canonical
coordinates in the basis 1, zeta, ..., zeta^(phi(N)-1).
"""
from __future__ import annotations

import cmath
from functools import lru_cache
from typing import Iterable

import numpy as np
from sympy import Poly, cyclotomic_poly, symbols

_x = symbols("x")


@lru_cache(maxsize=64)
def reduction_matrix(n: int) -> np.ndarray:
    """Row e holds the coordinates of zeta_n^e in the power basis."""
    coeffs = [int(c) for c in Poly(cyclotomic_poly(n, _x), _x).all_coeffs()]  # leading first
    phi = len(coeffs) - 1
    low = coeffs[::-1]  # low degree first, monic
    rows = np.zeros((n, phi), dtype=np.int64)
    cur = np.zeros(phi, dtype=np.int64)
    cur[0] = 1
    for e in range(n):
        rows[e] = cur
        top = cur[-1]
        nxt = np.zeros(phi, dtype=np.int64)
        nxt[1:] = cur[:-1]
        if top:
            nxt -= top * np.array(low[:phi], dtype=np.int64)
        cur = nxt
    return rows


def canonical_from_histogram(n: int, hist: np.ndarray) -> tuple[int, ...]:
    """Canonical coordinates of sum_e hist[..., e] zeta^e (last axis of length n)."""
    return tuple(int(v) for v in np.asarray(hist, dtype=np.int64) @ reduction_matrix(n))


class CycloSum:
    """sum_e c_e zeta_N^e with integer c_e."""

    __slots__ = ("N", "terms", "_canon")

    def __init__(self, n: int, terms: dict[int, int] | None = None):
        self.N = int(n)
        clean = {}
        for e, c in (terms or {}).items():
            e %= self.N
            clean[e] = clean.get(e, 0) + int(c)
        self.terms = {e: c for e, c in sorted(clean.items()) if c}
        self._canon = None

    @classmethod
    def from_exponents(cls, n: int, exponents: Iterable[int], sign: int = 1) -> "CycloSum":
        terms: dict[int, int] = {}
        for e in exponents:
            e = int(e) % n
            terms[e] = terms.get(e, 0) + sign
        return cls(n, terms)

    @classmethod
    def integer(cls, n: int, value: int) -> "CycloSum":
        return cls(n, {0: value})

    def canonical(self) -> tuple[int, ...]:
        if self._canon is None:
            hist = np.zeros(self.N, dtype=np.int64)
            for e, c in self.terms.items():
                hist[e] += c
            self._canon = canonical_from_histogram(self.N, hist)
        return self._canon

    def is_zero(self) -> bool:
        return not any(self.canonical())

    def as_integer(self) -> int | None:
        c = self.canonical()
        return c[0] if not any(c[1:]) else None

    def __eq__(self, other):
        if isinstance(other, int):
            other = CycloSum.integer(self.N, other)
        if not isinstance(other, CycloSum):
            return NotImplemented
        if self.N != other.N:
            raise ValueError("cannot compare sums of different orders")
        return self.canonical() == other.canonical()

    def __hash__(self):
        return hash((self.N, self.canonical()))

    def __add__(self, other: "CycloSum") -> "CycloSum":
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, 0) + c
        return CycloSum(self.N, terms)

    def __neg__(self) -> "CycloSum":
        return CycloSum(self.N, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "CycloSum") -> "CycloSum":
        return self + (-other)

    def __mul__(self, other) -> "CycloSum":
        if isinstance(other, int):
            return CycloSum(self.N, {e: c * other for e, c in self.terms.items()})
        terms: dict[int, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = (e1 + e2) % self.N
                terms[e] = terms.get(e, 0) + c1 * c2
        return CycloSum(self.N, terms)

    __rmul__ = __mul__

    def shift(self, e: int) -> "CycloSum":
        """Multiply by zeta^e."""
        return CycloSum(self.N, {k + e: c for k, c in self.terms.items()})

    def __complex__(self) -> complex:
        return sum((c * cmath.exp(2j * cmath.pi * e / self.N) for e, c in self.terms.items()), 0j)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms.items():
            mono = "1" if e == 0 else f"z^{e}"
            parts.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(parts) + f" (z = exp(2 pi i/{self.N}))"

    def to_json(self) -> dict:
        return {"N": self.N, "terms": [[e, c] for e, c in self.terms.items()]}
