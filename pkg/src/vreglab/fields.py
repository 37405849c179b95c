"""Finite fields GF(p^k) with a primitive modulus, plus discrete logarithms.

Elements are coefficient tuples ``(c_0, ..., c_{k-1})`` of polynomials in the
class ``x`` of the modulus.  The modulus is chosen primitive, so ``x`` generates
the multiplicative group.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

from sympy import factorint

from .errors import DomainError

DLOG_LIMIT = 2**40


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, f) with q = p^f, or raise."""
    if q < 2:
        raise DomainError(f"{q} is not a prime power")
    fac = factorint(q)
    if len(fac) != 1:
        raise DomainError(f"{q} is not a prime power")
    ((p, f),) = fac.items()
    return int(p), int(f)


def _polymulmod(a, b, mod, p):
    """Product of coefficient lists reduced by the monic ``mod`` (low degree first)."""
    k = len(mod) - 1
    out = [0] * (2 * k - 1 if k else 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    for d in range(len(out) - 1, k - 1, -1):
        c = out[d] % p
        if c:
            for j in range(k):
                out[d - k + j] -= c * mod[j]
        out[d] = 0
    return tuple(c % p for c in out[:k])


def _polypow(a, e, mod, p):
    k = len(mod) - 1
    result = tuple([1] + [0] * (k - 1))
    base = a
    while e:
        if e & 1:
            result = _polymulmod(result, base, mod, p)
        base = _polymulmod(base, base, mod, p)
        e >>= 1
    return result


@lru_cache(maxsize=None)
def primitive_modulus(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically first monic primitive polynomial of degree k over F_p.

    Returned low degree first, without the leading 1.  ``x`` has order
    p^k - 1 in F_p[x]/(f) only when f is irreducible and primitive.
    """
    order = p**k - 1
    cofactors = [order // l for l in factorint(order)] if order > 1 else []
    x = tuple([0, 1] + [0] * (k - 2)) if k > 1 else None
    for tail in itertools.product(range(p), repeat=k):
        mod = tuple(tail) + (1,)
        if mod[0] == 0:
            continue
        gen = x if k > 1 else ((-mod[0]) % p,)
        if _polypow(gen, order, mod, p) != tuple([1] + [0] * (k - 1)):
            continue
        if all(_polypow(gen, c, mod, p) != tuple([1] + [0] * (k - 1)) for c in cofactors):
            return tuple(tail)
    raise DomainError(f"no primitive polynomial found for GF({p}^{k})")


class GF:
    """The field with p^k elements."""

    def __init__(self, p: int, k: int = 1):
        if k < 1:
            raise DomainError("degree must be positive")
        if prime_power(p)[1] != 1:
            raise DomainError(f"{p} is not prime")
        self.p, self.k = p, k
        self.size = p**k
        self.mod = primitive_modulus(p, k) + (1,)
        self.zero = (0,) * k
        self.one = (1,) + (0,) * (k - 1)
        self.gen = (((-self.mod[0]) % p),) if k == 1 else (0, 1) + (0,) * (k - 2)

    def __repr__(self):
        return f"GF({self.p}^{self.k})"

    def __eq__(self, other):
        return isinstance(other, GF) and (self.p, self.k) == (other.p, other.k)

    def __hash__(self):
        return hash((self.p, self.k))

    def element(self, coeffs) -> tuple[int, ...]:
        c = [int(x) % self.p for x in coeffs]
        if len(c) > self.k:
            raise DomainError("too many coefficients")
        return tuple(c + [0] * (self.k - len(c)))

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.p for x in a)

    def scale(self, c: int, a):
        return tuple((c * x) % self.p for x in a)

    def mul(self, a, b):
        return _polymulmod(a, b, self.mod, self.p)

    def pow(self, a, e: int):
        if e < 0:
            a, e = self.inv(a), -e
        return _polypow(a, e, self.mod, self.p)

    def inv(self, a):
        if a == self.zero:
            raise ZeroDivisionError("inverse of zero")
        return self.pow(a, self.size - 2)

    def gen_power(self, e: int):
        return self.pow(self.gen, e % (self.size - 1))

    def frobenius(self, a, times: int = 1):
        return self.pow(a, self.p**times)

    def trace(self, a) -> int:
        """Absolute trace to F_p."""
        total, y = self.zero, a
        for _ in range(self.k):
            total = self.add(total, y)
            y = self.frobenius(y)
        if any(total[1:]):
            raise AssertionError("trace left the prime field")
        return total[0]

    def is_in_subfield(self, a, d: int) -> bool:
        """Whether ``a`` lies in GF(p^d) (d dividing k)."""
        return self.frobenius(a, d) == a

    def dlog(self, a) -> int:
        """Discrete log base ``gen`` by baby-step giant-step."""
        n = self.size - 1
        if n > DLOG_LIMIT:
            raise DomainError("field too large for discrete logarithms")
        if a == self.zero:
            raise DomainError("log of zero")
        m = math.isqrt(n) + 1
        table = {}
        y = self.one
        for j in range(m):
            table.setdefault(y, j)
            y = self.mul(y, self.gen)
        giant = self.inv(self.pow(self.gen, m))
        y = a
        for i in range(m + 1):
            j = table.get(y)
            if j is not None:
                return (i * m + j) % n
            y = self.mul(y, giant)
        raise AssertionError("discrete log not found")

    def elements(self):
        for c in itertools.product(range(self.p), repeat=self.k):
            yield tuple(reversed(c))
