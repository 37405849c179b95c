"""Quadratic-character signs over level root sets, and the parity r(S, phi).

For an unramified torus, ord_x(alpha) is the progression -<alpha, x> + Z, so a
root lies in the level set at r/2 iff r/2 + <alpha, x> is an integer.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .character_lab import HoweData
from .errors import DomainError, StructuralError
from .finite_torus import TorusElement, TwistedTorus
from .root_datum import RootDatum, WeylTwist, pair


@dataclass(frozen=True)
class BuildingPoint:
    coordinates: tuple[Fraction, ...]
    name: str = ""

    def value(self, root: Sequence[int]) -> Fraction:
        return sum((Fraction(a) * x for a, x in zip(root, self.coordinates)), Fraction(0))

    def table(self, datum: RootDatum) -> dict[int, Fraction]:
        return {i: self.value(a) for i, a in enumerate(datum.roots)}

    @property
    def hyperspecial_like(self) -> bool:
        return all(x.denominator == 1 for x in self.coordinates)


def origin(datum: RootDatum) -> BuildingPoint:
    return BuildingPoint(tuple(Fraction(0) for _ in range(datum.rank)), "origin")


def _simple_coefficients(datum: RootDatum, root: Sequence[int]) -> list[Fraction]:
    """Coefficients of a root in the simple roots (exact elimination)."""
    cols = [datum.roots[i] for i in datum.simple]
    l, r = len(cols), datum.rank
    aug = [[Fraction(cols[j][i]) for j in range(l)] + [Fraction(root[i])] for i in range(r)]
    row = 0
    pivots = []
    for c in range(l):
        piv = next((k for k in range(row, r) if aug[k][c] != 0), None)
        if piv is None:
            continue
        aug[row], aug[piv] = aug[piv], aug[row]
        inv = 1 / aug[row][c]
        aug[row] = [x * inv for x in aug[row]]
        for k in range(r):
            if k != row and aug[k][c] != 0:
                f = aug[k][c]
                aug[k] = [x - f * y for x, y in zip(aug[k], aug[row])]
        pivots.append(c)
        row += 1
    if any(aug[k][l] != 0 for k in range(row, r)):
        raise StructuralError("root outside the span of simple roots")
    coeff = [Fraction(0)] * l
    for k, c in enumerate(pivots):
        coeff[c] = aug[k][l]
    return coeff


def barycenter(datum: RootDatum) -> BuildingPoint:
    """rho^vee / h with h = |R| / |simple|: every simple root takes the value 1/h."""
    l = len(datum.simple)
    if l == 0:
        return origin(datum)
    h = Fraction(datum.num_roots, l)
    acc = [Fraction(0)] * datum.rank
    for a, c in zip(datum.roots, datum.coroots):
        if all(x >= 0 for x in _simple_coefficients(datum, a)):
            acc = [s + Fraction(y, 2) for s, y in zip(acc, c)]
    return BuildingPoint(tuple(s / h for s in acc), "barycenter")


PRESETS = ("origin", "hyperspecial", "coxeter_vertex", "barycenter")


def building_point(datum: RootDatum, preset: str | Sequence = "origin") -> BuildingPoint:
    """A named point, or explicit rational coordinates.

    ``coxeter_vertex`` is the hyperspecial origin, which is where the built-in
    families are evaluated.
    """
    if isinstance(preset, str):
        if preset in ("origin", "hyperspecial", "coxeter_vertex"):
            return BuildingPoint(origin(datum).coordinates, preset)
        if preset == "barycenter":
            return barycenter(datum)
        raise DomainError(f"unknown building point preset {preset!r}")
    coords = tuple(Fraction(x) for x in preset)
    if len(coords) != datum.rank:
        raise DomainError("building point has wrong dimension")
    return BuildingPoint(coords, "custom")


def level_root_set(datum: RootDatum, twist: WeylTwist | None, x: BuildingPoint, r) -> frozenset[int]:
    """{alpha : r/2 + <alpha, x> is an integer}."""
    r = Fraction(r)
    if r <= 0:
        raise DomainError("r must be positive")
    half = r / 2
    return frozenset(i for i, a in enumerate(datum.roots) if (half + x.value(a)).denominator == 1)


# --------------------------------------------------------------------------
# individual signs


def _require_odd(t: TwistedTorus):
    if not t.odd:
        raise DomainError("quadratic signs need odd q")


def _orbit_rep(t: TwistedTorus, k: int) -> tuple[int, int, bool]:
    rep = t.orbit_report
    return rep.orbits[k][0], rep.degree_alpha[k], rep.classification[k] == "symmetric_unramified"


def orbit_sign_bits(t: TwistedTorus, k: int, coords: np.ndarray) -> np.ndarray:
    """0/1 array: 1 where the quadratic sign of orbit k is -1 (no domain check)."""
    _require_odd(t)
    alpha, deg, sym = _orbit_rep(t, k)
    Q, q = t.modulus, t.q
    e = t.root_values(alpha, coords)
    if sym:
        order = q ** (deg // 2) + 1
    else:
        order = q**deg - 1
    if np.any((e % (Q // order)) != 0):
        raise StructuralError("root value outside the expected cyclic subgroup")
    # e = (Q/order) * u with u in Z/order; the quadratic character is (-1)^u
    return ((e // (Q // order)) % 2).astype(np.int64)


def epsilon_alpha(t: TwistedTorus, orbit: int, gamma: TorusElement, strict: bool = True) -> int:
    """Quadratic-character sign of the orbit's representative root at gamma.

    Asymmetric orbits: Legendre symbol of alpha(gamma) in F_{q^deg}^x.
    Symmetric orbits: the order-2 character of the norm-one group of order q^{deg/2}+1.
    """
    _require_odd(t)
    alpha, deg, sym = _orbit_rep(t, orbit)
    Q, q = t.modulus, t.q
    e = t.root_residue(alpha, gamma)
    if strict and e == 0:
        raise DomainError("alpha(gamma) = 1 lies outside the very regular domain")
    if sym:
        k = deg // 2
        if (e * (q**k + 1)) % Q:
            raise StructuralError("alpha(gamma) is not in the norm-one subgroup")
        return 1 if (e * ((q**k + 1) // 2)) % Q == 0 else -1
    if (e * (q**deg - 1)) % Q:
        raise StructuralError("alpha(gamma) is not in F_alpha")
    return 1 if (e * ((q**deg - 1) // 2)) % Q == 0 else -1


def _orbits_in(t: TwistedTorus, roots: Iterable[int]) -> list[int]:
    """Index orbits for a union of orbits: one per paired asymmetric orbit, each symmetric orbit."""
    rep = t.orbit_report
    s = set(roots)
    out = []
    for orb in rep.paired_orbits:
        inside = [i in s for i in orb]
        if any(inside) and not all(inside):
            raise DomainError("root set is not a union of paired orbits")
        if inside and inside[0]:
            out.append(rep.orbit_of[orb[0]])
    return out


def _galois_orbit_count(t: TwistedTorus, roots: Iterable[int]) -> int:
    rep = t.orbit_report
    s = set(roots)
    count = 0
    for orb in rep.orbits:
        inside = [i in s for i in orb]
        if any(inside) and not all(inside):
            raise DomainError("root set is not a union of orbits")
        count += inside[0]
    return count


def epsilon_ram(t: TwistedTorus, x: BuildingPoint, r, gamma: TorusElement,
                roots: Iterable[int] | None = None, strict: bool = True) -> int:
    """Product of orbit signs over the level set at r/2, within ``roots`` (default all)."""
    _require_odd(t)
    level = level_root_set(t.datum, t.twist, x, r)
    if roots is not None:
        level = level & frozenset(roots)
    value = 1
    for k in _orbits_in(t, level):
        value *= epsilon_alpha(t, k, gamma, strict=strict)
    return value


@dataclass(frozen=True)
class SignCharacter:
    """A character of order <= 2: gamma -> (-1)^(sum bits_j c_j)."""

    torus: TwistedTorus
    bits: tuple[int, ...]

    def __post_init__(self):
        for b, d in zip(self.bits, self.torus.orders):
            if b and d % 2:
                raise StructuralError("sign character nontrivial on a generator of odd order")

    @property
    def exponents(self) -> tuple[int, ...]:
        """Exponent vector against the cyclic decomposition (k_j with value exp(2 pi i k_j/d_j))."""
        return tuple(b * d // 2 for b, d in zip(self.bits, self.torus.orders))

    @property
    def trivial(self) -> bool:
        return not any(self.bits)

    def value_bits(self, coords: np.ndarray) -> np.ndarray:
        b = np.array(self.bits, dtype=np.int64)
        return (b @ coords) % 2 if len(b) else np.zeros(coords.shape[1], dtype=np.int64)

    def value(self, gamma: TorusElement) -> int:
        c = np.array(self.torus.coords(gamma), dtype=np.int64).reshape(-1, 1)
        return 1 - 2 * int(self.value_bits(c)[0])

    def to_json(self) -> dict:
        return {"orders": list(self.torus.orders), "exponents": list(self.exponents)}


def _check_howe(howe: HoweData, t: TwistedTorus):
    n = t.datum.num_roots
    for s in howe.subsystems:
        if any(not 0 <= i < n for i in s):
            raise DomainError("Howe data refers to roots outside the datum")
        if any(t.root_perm[i] not in s for i in s):
            raise DomainError("Howe data subsystem is not twist-stable")
    if len(howe.subsystems) != len(howe.jumps):
        raise DomainError("Howe data has mismatched jumps and subsystems")


def relative_level_sets(howe: HoweData, t: TwistedTorus, x: BuildingPoint) -> list[frozenset[int]]:
    """(R^{G^{i+1}} minus R^{G^i}) intersected with the level set at r_i/2, for each jump."""
    _check_howe(howe, t)
    full = frozenset(range(t.datum.num_roots))
    bigger = list(howe.subsystems[1:]) + [full]
    out = []
    for r, small, big in zip(howe.jumps, howe.subsystems, bigger):
        out.append((big - small) & level_root_set(t.datum, t.twist, x, r))
    return out


def ram_sign_bits(howe: HoweData, t: TwistedTorus, x: BuildingPoint, coords: np.ndarray) -> np.ndarray:
    """Definition-level evaluation of the ramified sign character (0/1 for +1/-1)."""
    _require_odd(t)
    bits = np.zeros(coords.shape[1], dtype=np.int64)
    for roots in relative_level_sets(howe, t, x):
        for k in _orbits_in(t, roots):
            bits ^= orbit_sign_bits(t, k, coords)
    return bits


def epsilon_ram_character(howe: HoweData, t: TwistedTorus, x: BuildingPoint,
                          sample: int = 256, seed: int = 0) -> SignCharacter:
    """The sign character as a homomorphism datum, checked against direct evaluation."""
    k = t.num_generators
    gens = np.eye(k, dtype=np.int64)
    char = SignCharacter(t, tuple(int(b) for b in ram_sign_bits(howe, t, x, gens)))
    if t.order <= 4096:
        coords = t.all_coords()
    else:
        rng = random.Random(seed)
        coords = np.array([[rng.randrange(d) for _ in range(sample)] for d in t.orders],
                          dtype=np.int64).reshape(k, sample)
    if not np.array_equal(char.value_bits(coords), ram_sign_bits(howe, t, x, coords)):
        raise StructuralError("sign product is not multiplicative")
    return char


def e_tilde(t: TwistedTorus, x: BuildingPoint, r, gamma: TorusElement,
            roots: Iterable[int] | None = None) -> int:
    """(-1)^(number of Frobenius orbits in the level set), on very regular gamma."""
    if not t.is_vreg(gamma, roots):
        raise DomainError("e_tilde is only defined on very regular elements")
    level = level_root_set(t.datum, t.twist, x, r)
    if roots is not None:
        level = level & frozenset(roots)
    return -1 if _galois_orbit_count(t, level) % 2 else 1


@dataclass(frozen=True)
class ParityReport:
    r_value: int
    closed_form: int | None = None
    rearranged: int | None = None

    @property
    def parity(self) -> int:
        return self.r_value % 2


def gl_parity_closed_form(chain: Sequence[int], jumps: Sequence[int]) -> int:
    return sum((chain[i + 1] - chain[i]) * (jumps[i] - 1) for i in range(len(jumps)))


def gl_parity_rearranged(chain: Sequence[int], jumps: Sequence[int], depth: int) -> int:
    d = len(jumps)
    if d == 0:
        return 0
    r = list(jumps) + [depth]
    n = chain
    total = (r[d] + 1) * n[d] - n[0] * (r[0] + 1)
    total += sum(n[i] * (r[i - 1] - r[i]) for i in range(1, d + 1))
    return total


def gl_epsilon_closed_form(chain: Sequence[int], jumps: Sequence[int]) -> int:
    exp = sum((chain[i + 1] // 2 - chain[i] // 2) * (jumps[i] - 1) for i in range(len(jumps)))
    return -1 if exp % 2 else 1


def depth_parity(howe: HoweData, t: TwistedTorus, x: BuildingPoint) -> ParityReport:
    """r(S, phi) as an orbit count; for GL(n) at an integral point also the closed forms."""
    value = sum(_galois_orbit_count(t, roots) for roots in relative_level_sets(howe, t, x))
    if howe.levi_signature is None or not x.hyperspecial_like:
        return ParityReport(value)
    closed = gl_parity_closed_form(howe.levi_signature, howe.jumps)
    rearranged = gl_parity_rearranged(howe.levi_signature, howe.jumps, howe.depth)
    if not value % 2 == closed % 2 == rearranged % 2:
        raise StructuralError(f"parity forms disagree: {value}, {closed}, {rearranged}")
    return ParityReport(value, closed, rearranged)
