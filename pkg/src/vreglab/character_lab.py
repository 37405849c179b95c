"""Characters of the torus at finite level and their Howe-factorization data.

Positive levels are modelled by one additive space: the fixed points of
``T = N o sigma`` on X_* (x) K, with K = F_q(zeta) the splitting field of the
twist and sigma the q-power map.  This is an F_p-vector space of dimension
f * rank (q = p^f).  A level character is an F_p-linear functional on it,
composed with the standard additive character of F_p.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import modp
from .errors import DomainError, StructuralError
from .fields import GF
from .finite_torus import TwistedTorus
from .root_datum import Matrix, contragredient


class LevelSpace:
    """(X_* (x) K)^{N sigma} with an explicit F_p-basis."""

    def __init__(self, torus: TwistedTorus):
        self.torus = torus
        self.p = torus.p
        self.field = GF(torus.p, torus.f * torus.twist_order)
        self.e = torus.twist_order
        r, k, p = torus.rank, self.field.k, self.p
        self.block = k
        frob = np.zeros((k, k), dtype=np.int64)
        for j in range(k):
            xj = self.field.element([0] * j + [1])
            frob[:, j] = self.field.pow(xj, torus.q)
        n_mod = np.array(torus.N, dtype=np.int64) % p
        self.T = np.kron(n_mod, frob) % p
        fixed = modp.nullspace((self.T - np.eye(r * k, dtype=np.int64)) % p, p)
        basis, pivots = modp.rref(fixed, p)
        if len(pivots) != torus.f * r:
            raise StructuralError(f"fixed space has dimension {len(pivots)}, expected {torus.f * r}")
        self.basis = basis
        self.pivots = pivots
        self.dim = len(pivots)
        self._norm = modp.matpow_sum(self.T, self.e, p)
        self._images: dict[int, np.ndarray] = {}

    def contains(self, v: np.ndarray) -> bool:
        return bool(np.array_equal((self.T @ v) % self.p, np.asarray(v) % self.p))

    def coords(self, v: np.ndarray) -> np.ndarray:
        """Coordinates of fixed vectors (columns or a single vector)."""
        return np.asarray(v)[self.pivots] % self.p

    def vector(self, coords: Sequence[int]) -> np.ndarray:
        return (np.asarray(coords, dtype=np.int64) @ self.basis) % self.p

    def blocks(self, v: np.ndarray) -> list[tuple[int, ...]]:
        """Split a vector into its rank-many K-coefficients."""
        k = self.block
        return [tuple(int(x) for x in v[i * k:(i + 1) * k]) for i in range(self.torus.rank)]

    def from_blocks(self, values: Sequence[Sequence[int]]) -> np.ndarray:
        return np.concatenate([np.asarray(self.field.element(b), dtype=np.int64) for b in values])

    def norm_image(self, alpha: int) -> np.ndarray:
        """Coordinates (rows) spanning {sum_k T^k (alpha^vee (x) y) : y in K}."""
        if alpha not in self._images:
            cor = self.torus.datum.coroots[alpha]
            k, p = self.block, self.p
            cols = []
            for j in range(k):
                v = np.zeros(self.torus.rank * k, dtype=np.int64)
                for i, c in enumerate(cor):
                    v[i * k + j] = c % p
                u = (self._norm @ v) % p
                if not self.contains(u):
                    raise StructuralError("norm-trace image left the fixed space")
                cols.append(self.coords(u))
            self._images[alpha] = np.array(cols, dtype=np.int64)
        return self._images[alpha]

    def action(self, m: Matrix) -> np.ndarray:
        """Matrix A with coords(N_v b) = A coords(b); functionals transform by f -> f A."""
        nv = np.array(contragredient(m), dtype=np.int64) % self.p
        big = np.kron(nv, np.eye(self.block, dtype=np.int64))
        images = (big @ self.basis.T) % self.p
        for col in images.T:
            if not self.contains(col):
                raise DomainError("matrix does not preserve the level space")
        return self.coords(images)

    def functional_from_pairing(self, mu: Sequence[Sequence[int]]) -> tuple[int, ...]:
        """v -> Tr_{K/F_p}(sum_i mu_i v_i) as a dual vector."""
        out = []
        for b in self.basis:
            acc = self.field.zero
            for m_i, v_i in zip(mu, self.blocks(b)):
                acc = self.field.add(acc, self.field.mul(self.field.element(m_i), v_i))
            out.append(self.field.trace(acc))
        return tuple(out)


_level_cache: dict = {}


def level_space(torus: TwistedTorus) -> LevelSpace:
    key = (torus.datum.roots, torus.datum.coroots, torus.twist.matrix, torus.q)
    space = _level_cache.get(key)
    if space is None:
        space = _level_cache[key] = LevelSpace(torus)
    return space


@dataclass(frozen=True)
class FilteredCharacter:
    """A character of the finite model: depth-zero part plus one functional per level.

    ``depth_zero[j]`` is the exponent k_j with theta(g_j) = exp(2 pi i k_j / d_j);
    ``levels[m-1]`` is the dual vector at level m.
    """

    torus: TwistedTorus = field(compare=False, hash=False, repr=False)
    depth_zero: tuple[int, ...]
    levels: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        t = self.torus
        if len(self.depth_zero) != t.num_generators:
            raise DomainError("depth-zero vector has the wrong length")
        object.__setattr__(self, "depth_zero",
                           tuple(int(k) % d for k, d in zip(self.depth_zero, t.orders)))
        dim = t.f * t.rank
        lv = []
        for f in self.levels:
            if len(f) != dim:
                raise DomainError(f"level functional must have length {dim}")
            lv.append(tuple(int(x) % t.p for x in f))
        object.__setattr__(self, "levels", tuple(lv))

    @property
    def nominal_depth(self) -> int:
        return len(self.levels)

    @property
    def depth(self) -> int:
        for m in range(len(self.levels), 0, -1):
            if any(self.levels[m - 1]):
                return m
        return 0

    @property
    def key(self) -> tuple:
        return (self.depth_zero, self.levels)

    def depth_zero_weights(self) -> np.ndarray:
        """w_j = k_j Q/d_j, so theta_0(gamma) = zeta_Q^(sum w_j c_j)."""
        Q = self.torus.modulus
        return np.array([k * (Q // d) for k, d in zip(self.depth_zero, self.torus.orders)],
                        dtype=np.int64)

    def positive_part(self) -> "FilteredCharacter":
        return replace(self, depth_zero=(0,) * len(self.depth_zero))

    def twist_depth_zero(self, exponents: Sequence[int]) -> "FilteredCharacter":
        return replace(self, depth_zero=tuple(a + b for a, b in zip(self.depth_zero, exponents)))

    def weyl_twist(self, m: Matrix) -> "FilteredCharacter":
        """theta^v : gamma -> theta(v . gamma)."""
        t = self.torus
        dz = self.depth_zero
        if t.num_generators:
            A = t.coord_action(m)
            w = self.depth_zero_weights()
            Q = t.modulus
            new_w = [int(sum(int(w[j]) * int(A[j, i]) for j in range(len(w))) % Q)
                     for i in range(len(w))]
            dz = []
            for wi, d in zip(new_w, t.orders):
                step = Q // d
                if wi % step:
                    raise StructuralError("twisted character is not a character")
                dz.append(wi // step)
        if self.levels:
            B = level_space(t).action(m)
            lv = tuple(tuple(int(x) for x in (np.asarray(f) @ B) % t.p) for f in self.levels)
        else:
            lv = ()
        return FilteredCharacter(t, tuple(dz), lv)

    def to_json(self) -> dict:
        return {"depth_zero": list(self.depth_zero),
                "levels": [{"m": m + 1, "functional": list(f)} for m, f in enumerate(self.levels)]}

    @classmethod
    def from_json(cls, torus: TwistedTorus, data: dict | str) -> "FilteredCharacter":
        if isinstance(data, str):
            data = json.loads(data)
        dz = data.get("depth_zero") or [0] * torus.num_generators
        entries = sorted(data.get("levels", []), key=lambda e: e["m"])
        depth = max((e["m"] for e in entries), default=0)
        dim = torus.f * torus.rank
        levels = [[0] * dim for _ in range(depth)]
        for e in entries:
            if e["m"] < 1:
                raise DomainError("levels start at 1")
            levels[e["m"] - 1] = list(e["functional"])
        return cls(torus, tuple(dz), tuple(tuple(f) for f in levels))


def trivial_character(torus: TwistedTorus, depth: int = 0) -> FilteredCharacter:
    dim = torus.f * torus.rank
    return FilteredCharacter(torus, (0,) * torus.num_generators, tuple((0,) * dim for _ in range(depth)))


def level_condition(theta: FilteredCharacter, alpha: int, m: int) -> bool:
    """Whether the level-m functional kills the norm-trace image of alpha^vee."""
    if not 1 <= m <= theta.nominal_depth:
        raise DomainError(f"level {m} outside 1..{theta.nominal_depth}")
    space = level_space(theta.torus)
    img = space.norm_image(alpha)
    return not np.any((img @ np.asarray(theta.levels[m - 1], dtype=np.int64)) % space.p)


@dataclass(frozen=True)
class HoweData:
    jumps: tuple[int, ...]
    depth: int
    subsystems: tuple[frozenset[int], ...]
    r0_plus: frozenset[int]
    levi_signature: tuple[int, ...] | None = None

    @property
    def d(self) -> int:
        return len(self.jumps)

    def to_json(self) -> dict:
        return {"jumps": list(self.jumps), "depth": self.depth,
                "subsystems": [sorted(s) for s in self.subsystems],
                "r0_plus": sorted(self.r0_plus),
                "levi_signature": None if self.levi_signature is None else list(self.levi_signature),
                "toral": not self.r0_plus,
                "zero_toral": (not self.r0_plus) and self.d == 1}


def gl_cycle_positions(torus: TwistedTorus) -> list[int] | None:
    """For GL(n) with an n-cycle twist, position of each index along the cycle."""
    datum, n = torus.datum, torus.rank
    if not datum.name.startswith("GL(") or n < 1:
        return None
    m = torus.twist.matrix
    image = []
    for j in range(n):
        col = [m[i][j] for i in range(n)]
        if sorted(col) != [0] * (n - 1) + [1]:
            return None
        image.append(col.index(1))
    pos = [-1] * n
    k, i = 0, 0
    while pos[i] < 0:
        pos[i] = k
        i = image[i]
        k += 1
    return pos if k == n else None


def _gl_block_count(torus: TwistedTorus, subset: frozenset[int], pos: list[int]) -> int:
    """n_k such that subset = {e_a - e_b : pos a = pos b mod n/n_k}."""
    n = torus.rank
    for s in sorted(d for d in range(1, n + 1) if n % d == 0):
        expected = set()
        for i, root in enumerate(torus.datum.roots):
            a, b = root.index(1), root.index(-1)
            if (pos[a] - pos[b]) % s == 0:
                expected.add(i)
        if expected == set(subset):
            return n // s
    raise StructuralError("subsystem is not of the expected GL(n) form")


def howe_jumps(theta: FilteredCharacter) -> HoweData:
    """R_{m+} filter, jump levels and the twisted-Levi root subsystems."""
    t = theta.torus
    datum = t.datum
    allroots = frozenset(range(datum.num_roots))
    depth = theta.depth
    # plus_sets[m] = R_{m+} for m = 0..depth
    plus_sets = [allroots] * (depth + 1)
    current = allroots
    for m in range(depth, 0, -1):
        current = frozenset(a for a in current if level_condition(theta, a, m))
        plus_sets[m - 1] = current
    for s in plus_sets:
        if any(t.root_perm[a] not in s for a in s):
            raise StructuralError("root filter is not stable under the twist")
        if not datum.is_closed_subset(s):
            raise StructuralError("root filter is not a closed subsystem")
    jumps, subsystems = [], []
    for r in range(1, depth + 1):
        if plus_sets[r - 1] != plus_sets[r]:
            if not plus_sets[r - 1] < plus_sets[r]:
                raise StructuralError("root filter is not monotone")
            jumps.append(r)
            subsystems.append(plus_sets[r - 1])
    signature = None
    pos = gl_cycle_positions(t)
    if pos is not None:
        signature = tuple(_gl_block_count(t, s, pos) for s in subsystems) + (t.rank,)
    return HoweData(tuple(jumps), depth, tuple(subsystems), plus_sets[0], signature)


def _howe(theta) -> HoweData:
    return theta if isinstance(theta, HoweData) else howe_jumps(theta)


def is_toral(theta: FilteredCharacter | HoweData) -> bool:
    return not _howe(theta).r0_plus


def is_zero_toral(theta: FilteredCharacter | HoweData) -> bool:
    h = _howe(theta)
    if h.depth <= 0:
        raise DomainError("0-toral test needs positive depth")
    return not h.r0_plus and h.d == 1


def stabilizer_in_weyl(theta: FilteredCharacter, group: Iterable[Matrix],
                       positive_only: bool = False) -> tuple[Matrix, ...]:
    """Elements v of the group with theta o v = theta."""
    target = theta.positive_part() if positive_only else theta
    return tuple(m for m in group if target.weyl_twist(m) == target)


# --------------------------------------------------------------------------
# GL(n) with the Coxeter twist


def gl_level_functional(torus: TwistedTorus, subfield_degree: int) -> tuple[int, ...]:
    """Functional v -> Tr(mu v_0) with mu a generator of F_{q^s}^x inside K.

    Requires an n-cycle twist; the first coordinate parametrizes the fixed space.
    """
    space = level_space(torus)
    n, q = torus.twist_order, torus.q
    s = subfield_degree
    if n % s:
        raise DomainError("subfield degree must divide the twist order")
    mu = space.field.gen_power((q**n - 1) // (q**s - 1))
    pos = gl_cycle_positions(torus)
    if pos is None:
        raise DomainError("needs GL(n) with an n-cycle twist")
    start = pos.index(0)
    blocks = [space.field.zero] * torus.rank
    blocks[start] = mu
    return space.functional_from_pairing(blocks)


def gl_signature_character(torus: TwistedTorus, chain: Sequence[int], jumps: Sequence[int],
                           depth: int, depth_zero: Sequence[int] | None = None) -> FilteredCharacter:
    """Character with prescribed divisor chain n_0 | ... | n_d = n and jumps r_0 < ... <= depth."""
    n = torus.rank
    d = len(jumps)
    if len(chain) != d + 1 or chain[-1] != n:
        raise DomainError("chain must have one more entry than jumps and end at n")
    if list(jumps) != sorted(set(jumps)) or (jumps and (jumps[0] < 1 or jumps[-1] > depth)):
        raise DomainError("jumps must be strictly increasing within 1..depth")
    levels = []
    for m in range(1, depth + 1):
        j = next((i for i, r in enumerate(jumps) if m <= r), d)
        levels.append(gl_level_functional(torus, n // chain[j]))
    dz = tuple(depth_zero) if depth_zero is not None else (0,) * torus.num_generators
    return FilteredCharacter(torus, dz, tuple(levels))


def gl_jump_signatures(n: int, max_depth: int):
    """All (chain, jumps, depth) with 1 = n_0 | ... | n_d = n strictly and depth <= max_depth."""
    def chains(start):
        if start == n:
            yield (n,)
            return
        for m in range(start + 1, n + 1):
            if m % start == 0 and n % m == 0:
                for rest in chains(m):
                    yield (start,) + rest

    def increasing(k, lo, hi):
        if k == 0:
            yield ()
            return
        for r in range(lo, hi + 1):
            for rest in increasing(k - 1, r + 1, hi):
                yield (r,) + rest

    if n == 1:
        return
    for chain in chains(1):
        d = len(chain) - 1
        for depth in range(1, max_depth + 1):
            for jumps in increasing(d, 1, depth):
                yield chain, jumps, depth
