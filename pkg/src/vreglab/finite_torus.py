"""Points of the finite torus attached to a root datum, a twist and q.

A point is an exponent vector ``a`` in (Z/Q)^rank, Q = q^m - 1, solving
``(q N - I) a = 0 mod Q`` where N is the twist acting on cocharacters; the
value of a character chi at the point is ``zeta^<chi, a>`` for a fixed
generator zeta of mu_Q.

Points are indexed by coordinates against a cyclic decomposition obtained
from the Smith normal form of ``q N - I``.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np
from sympy import Matrix as SymMatrix
from sympy import ZZ
from sympy.matrices.normalforms import smith_normal_decomp

from .errors import CapExceededError, DomainError, StarConditionError, StructuralError
from .fields import prime_power
from .root_datum import (
    RootDatum,
    WeylTwist,
    classify_orbits,
    contragredient,
    int_inverse,
    mat_vec,
    rational_rank,
)

STREAM_CAP = 10**8
MATERIALIZE_CAP = 10**6
CHUNK = 1 << 20


def stream_cap() -> int:
    env = os.environ.get("VREGLAB_CAP")
    return int(env) if env else STREAM_CAP


@dataclass(frozen=True, order=True)
class TorusElement:
    exponents: tuple[int, ...]


class TwistedTorus:
    """The torus for (datum, twist, q) together with its finite group of points."""

    def __init__(self, datum: RootDatum, twist: WeylTwist, q: int):
        self.datum = datum
        self.twist = twist
        self.q = int(q)
        self.p, self.f = prime_power(self.q)
        self.twist_order = twist.order
        self.root_perm = datum.root_permutation(twist.matrix)
        try:
            self.N = contragredient(twist.matrix)
        except DomainError as exc:
            raise StructuralError("twist is not transportable to cocharacters") from exc
        self.modulus = self.q**self.twist_order - 1
        self._decompose()

    @property
    def odd(self) -> bool:
        return self.p != 2

    @property
    def rank(self) -> int:
        return self.datum.rank

    def __repr__(self):
        return f"TwistedTorus({self.datum.name or 'datum'}, {self.twist.label or 'twist'}, q={self.q})"

    # ------------------------------------------------------------------
    # structure

    def _decompose(self):
        r, Q = self.rank, self.modulus
        A = [[self.q * self.N[i][j] - int(i == j) for j in range(r)] for i in range(r)]
        self.det = int(SymMatrix(A).det())
        if self.det == 0:
            raise StructuralError("q*N - I is singular")
        D, U, V = smith_normal_decomp(SymMatrix(A), domain=ZZ)
        if U * SymMatrix(A) * V != D:
            raise StructuralError("Smith normal form check failed")
        V_int = tuple(tuple(int(x) for x in V.row(i)) for i in range(r))
        self._Vinv = int_inverse(V_int)
        gens, orders, rows = [], [], []
        for i in range(r):
            d = math.gcd(int(D[i, i]), Q)
            if d == 1:
                continue
            step = Q // d
            gens.append(tuple((V_int[k][i] * step) % Q for k in range(r)))
            orders.append(d)
            rows.append(i)
        self.generators: tuple[tuple[int, ...], ...] = tuple(gens)
        self.orders: tuple[int, ...] = tuple(orders)
        self._rows = tuple(rows)
        self.order = math.prod(orders)
        if self.order != abs(self.det):
            raise StructuralError(f"point count {self.order} differs from |det| {abs(self.det)}")
        for g in gens:
            if not self.contains(g):
                raise StructuralError("generator fails the fixed-point congruence")

    def contains(self, exponents: Sequence[int]) -> bool:
        Q = self.modulus
        image = mat_vec(self.N, exponents)
        return all((self.q * x - y) % Q == 0 for x, y in zip(image, exponents))

    @property
    def num_generators(self) -> int:
        return len(self.orders)

    # ------------------------------------------------------------------
    # elements

    def element(self, coords: Sequence[int]) -> TorusElement:
        Q = self.modulus
        a = [0] * self.rank
        for c, g in zip(coords, self.generators):
            for k in range(self.rank):
                a[k] += c * g[k]
        return TorusElement(tuple(x % Q for x in a))

    def coords(self, elem: TorusElement | Sequence[int]) -> tuple[int, ...]:
        a = elem.exponents if isinstance(elem, TorusElement) else tuple(elem)
        if not self.contains(a):
            raise DomainError(f"{a} is not a point of the torus")
        Q = self.modulus
        b = mat_vec(self._Vinv, a)
        out = []
        for row, d in zip(self._rows, self.orders):
            step = Q // d
            if b[row] % step:
                raise StructuralError("coordinate not divisible by generator step")
            out.append((b[row] // step) % d)
        return tuple(out)

    def identity(self) -> TorusElement:
        return TorusElement((0,) * self.rank)

    def mul(self, g: TorusElement, h: TorusElement) -> TorusElement:
        return TorusElement(tuple((x + y) % self.modulus for x, y in zip(g.exponents, h.exponents)))

    def inv(self, g: TorusElement) -> TorusElement:
        return TorusElement(tuple((-x) % self.modulus for x in g.exponents))

    def power(self, g: TorusElement, e: int) -> TorusElement:
        return TorusElement(tuple((e * x) % self.modulus for x in g.exponents))

    def frobenius(self, g: TorusElement) -> TorusElement:
        """gamma -> gamma^q; equals N applied to the exponent vector."""
        return self.power(g, self.q)

    def act(self, m, g: TorusElement) -> TorusElement:
        """Action of a matrix on X* (commuting with the twist) on points."""
        n = contragredient(m)
        image = tuple(x % self.modulus for x in mat_vec(n, g.exponents))
        if not self.contains(image):
            raise DomainError("matrix does not preserve the torus")
        return TorusElement(image)

    def root_residue(self, alpha: int | Sequence[int], g: TorusElement) -> int:
        """The exponent of alpha(gamma) in Z/Q."""
        a = self.datum.roots[alpha] if isinstance(alpha, int) else alpha
        return sum(x * y for x, y in zip(a, g.exponents)) % self.modulus

    def root_hom(self, alpha: int) -> np.ndarray:
        """alpha(gamma) exponent as a linear form on coordinates."""
        a = self.datum.roots[alpha]
        return np.array([sum(x * y for x, y in zip(a, g)) % self.modulus
                         for g in self.generators], dtype=np.int64)

    def root_values(self, alpha: int, coords: np.ndarray) -> np.ndarray:
        """Exponents of alpha(gamma) mod Q for coordinate columns, without overflow."""
        Q = self.modulus
        out = np.zeros(coords.shape[1], dtype=np.int64)
        for j, (h, d) in enumerate(zip(self.root_hom(alpha), self.orders)):
            step = Q // d
            u = int(h) // step
            if u:
                out = (out + step * ((u * coords[j]) % d)) % Q
        return out

    def coord_action(self, m) -> np.ndarray:
        """Integer matrix A with coords(v . gamma) = A coords(gamma) mod orders."""
        n = contragredient(m)
        cols = []
        for g in self.generators:
            image = tuple(x % self.modulus for x in mat_vec(n, g))
            if not self.contains(image):
                raise DomainError("matrix does not preserve the torus")
            cols.append(self.coords(image))
        k = self.num_generators
        return np.array([[cols[j][i] for j in range(k)] for i in range(k)], dtype=np.int64).reshape(k, k)

    # ------------------------------------------------------------------
    # enumeration

    def _check_cap(self, cap: int | None):
        cap = stream_cap() if cap is None else cap
        if self.order > cap:
            raise CapExceededError(f"torus order {self.order} exceeds cap {cap}")

    def enumerate(self, cap: int | None = None) -> Iterator[TorusElement]:
        self._check_cap(cap)
        for c in itertools.product(*(range(d) for d in self.orders)):
            yield self.element(c)

    def coord_chunks(self, cap: int | None = None, chunk: int = CHUNK) -> Iterator[tuple[int, np.ndarray]]:
        """Yield (start, coords) with coords of shape (k, n) in flat index order."""
        self._check_cap(cap)
        shape = self.orders
        for start in range(0, self.order, chunk):
            flat = np.arange(start, min(start + chunk, self.order), dtype=np.int64)
            if shape:
                coords = np.vstack(np.unravel_index(flat, shape)).astype(np.int64)
            else:
                coords = np.zeros((0, len(flat)), dtype=np.int64)
            yield start, coords

    def all_coords(self, cap: int = MATERIALIZE_CAP) -> np.ndarray:
        if self.order > cap:
            raise CapExceededError(f"torus order {self.order} exceeds materialization cap {cap}")
        return next(self.coord_chunks(chunk=max(self.order, 1)))[1]

    def flat_index(self, coords: np.ndarray) -> np.ndarray:
        if not self.orders:
            return np.zeros(coords.shape[1:], dtype=np.int64)
        return np.ravel_multi_index(tuple(coords), self.orders)

    def exponents_of(self, coords: np.ndarray) -> np.ndarray:
        """Exponent vectors (rank, n) of coordinate columns."""
        Q = self.modulus
        out = np.zeros((self.rank, coords.shape[1]), dtype=object if Q > 2**31 else np.int64)
        for g, c in zip(self.generators, coords):
            out = (out + np.outer(np.array(g, dtype=out.dtype), c.astype(out.dtype))) % Q
        return out

    @cached_property
    def split_rank(self) -> int:
        r = self.rank
        rows = [[self.N[i][j] - int(i == j) for j in range(r)] for i in range(r)]
        return r - rational_rank(rows)

    @cached_property
    def orbit_report(self):
        return classify_orbits(self.datum, self.twist)

    # ------------------------------------------------------------------
    # very regular elements

    def check_subset(self, subset: Iterable[int] | None) -> frozenset[int]:
        if subset is None:
            return frozenset(range(self.datum.num_roots))
        s = frozenset(subset)
        for i in s:
            if not 0 <= i < self.datum.num_roots:
                raise DomainError(f"root index {i} out of range")
            if self.root_perm[i] not in s:
                raise DomainError("root subset is not stable under the twist")
            if self.datum.negative(i) not in s:
                raise DomainError("root subset is not closed under negation")
        return s

    def kernel_representatives(self, subset: Iterable[int] | None) -> list[int]:
        """One root per (<twist> x +-1)-orbit; roots in such an orbit share a kernel."""
        s = self.check_subset(subset)
        return [orb[0] for orb in self.orbit_report.paired_orbits if orb[0] in s]

    def nonvreg_mask(self, coords: np.ndarray, reps: Sequence[int]) -> np.ndarray:
        mask = np.zeros(coords.shape[1], dtype=bool)
        for i in reps:
            mask |= self.root_values(i, coords) == 0
        return mask

    def is_vreg(self, g: TorusElement, subset: Iterable[int] | None = None) -> bool:
        s = self.check_subset(subset)
        return all(self.root_residue(i, g) != 0 for i in s)

    def count_nonvreg(self, subset: Iterable[int] | None = None, cap: int | None = None) -> int:
        reps = self.kernel_representatives(subset)
        total = 0
        for _, coords in self.coord_chunks(cap):
            total += int(self.nonvreg_mask(coords, reps).sum())
        return total


def torus_order(t: TwistedTorus) -> int:
    """|S(F_q)|: |det(qN - I)|, equal to the product of the Smith invariants."""
    return t.order


def enumerate_torus(t: TwistedTorus, cap: int | None = None) -> Iterator[TorusElement]:
    return t.enumerate(cap)


def vreg_locus(t: TwistedTorus, subset: Iterable[int] | None = None,
               cap: int = MATERIALIZE_CAP) -> frozenset[TorusElement]:
    coords = t.all_coords(cap)
    mask = ~t.nonvreg_mask(coords, t.kernel_representatives(subset))
    ex = t.exponents_of(coords[:, mask])
    return frozenset(TorusElement(tuple(int(x) for x in col)) for col in ex.T)


def split_rank(t: TwistedTorus) -> int:
    return t.split_rank


@dataclass(frozen=True)
class DensityReport:
    total: int
    nvreg: int

    @property
    def ratio(self) -> Fraction | None:
        """total / nvreg, or None for infinity."""
        return Fraction(self.total, self.nvreg) if self.nvreg else None

    @property
    def star_holds(self) -> bool:
        return self.total > 2 * self.nvreg

    def exceeds(self, threshold) -> bool:
        return self.nvreg == 0 or Fraction(self.total, self.nvreg) > threshold

    def ratio_pair(self) -> tuple[int, int]:
        r = self.ratio
        return (1, 0) if r is None else (r.numerator, r.denominator)


def density_report(t: TwistedTorus, subset: Iterable[int] | None = None,
                   cap: int | None = None) -> DensityReport:
    return DensityReport(t.order, t.count_nonvreg(subset, cap))


@dataclass(frozen=True)
class StarScan:
    rows: tuple[tuple[int, DensityReport], ...]
    threshold: Fraction

    @property
    def minimal_q(self) -> int | None:
        return next((q for q, rep in self.rows if rep.exceeds(self.threshold)), None)

    @property
    def failures(self) -> tuple[int, ...]:
        return tuple(q for q, rep in self.rows if not rep.exceeds(self.threshold))


def min_q_star(datum: RootDatum, twist: WeylTwist, q_values: Iterable[int],
               subset: Iterable[int] | None = None, threshold=2, cap: int | None = None) -> StarScan:
    """Exact density verdicts for every q listed; no monotonicity is assumed."""
    rows = []
    for q in sorted(set(q_values)):
        rows.append((q, density_report(TwistedTorus(datum, twist, q), subset, cap)))
    return StarScan(tuple(rows), Fraction(threshold))


@dataclass(frozen=True)
class Decomposition:
    ok: bool
    witnesses: dict
    failure: TorusElement | None


def product_decomposition_check(t: TwistedTorus, subset: Iterable[int] | None = None,
                                cap: int = MATERIALIZE_CAP, require_star: bool = True) -> Decomposition:
    """Write every point as a product of two very regular points."""
    coords = t.all_coords(cap)
    bad = t.nonvreg_mask(coords, t.kernel_representatives(subset))
    if require_star and not t.order > 2 * int(bad.sum()):
        raise StarConditionError("density inequality fails for this torus")
    vreg = coords[:, ~bad]
    orders = np.array(t.orders, dtype=np.int64).reshape(-1, 1)
    witnesses = {}
    for idx in range(t.order):
        s = coords[:, idx:idx + 1]
        partner = (s - vreg) % orders if t.orders else vreg
        hits = np.flatnonzero(~bad[t.flat_index(partner)]) if vreg.shape[1] else []
        if len(hits) == 0:
            return Decomposition(False, witnesses, t.element(tuple(int(x) for x in s[:, 0])))
        j = hits[0]
        t1 = tuple(int(x) for x in vreg[:, j])
        t2 = tuple(int(x) for x in partner[:, j])
        witnesses[tuple(int(x) for x in s[:, 0])] = (t1, t2)
    return Decomposition(True, witnesses, None)


def center_mask(t: TwistedTorus, coords: np.ndarray) -> np.ndarray:
    """Points on which every root is trivial."""
    mask = np.ones(coords.shape[1], dtype=bool)
    for i in range(t.datum.num_roots):
        mask &= t.root_values(i, coords) == 0
    return mask
