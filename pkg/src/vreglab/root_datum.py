"""Root data, Weyl groups, Frobenius twists and orbit classification of roots.

Characters live in X* = Z^rank and cocharacters in X_* = Z^rank, paired by the
dot product.  An integer matrix ``M`` acting on column vectors of X* induces
the contragredient ``M^{-T}`` on X_*.
"""
from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceededError, DomainError, InvalidDatumError

Matrix = tuple[tuple[int, ...], ...]
Vector = tuple[int, ...]

WEYL_CAP = 10**6


# --------------------------------------------------------------------------
# small exact matrix helpers


def as_matrix(rows: Iterable[Iterable[int]]) -> Matrix:
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity_matrix(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def mat_vec(a: Matrix, v: Sequence[int]) -> Vector:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else a


def mat_inverse(a: Matrix) -> list[list[Fraction]]:
    """Exact inverse over Q by Gauss-Jordan elimination."""
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise DomainError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                c = aug[r][col]
                aug[r] = [x - c * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def int_inverse(a: Matrix) -> Matrix:
    inv = mat_inverse(a)
    if any(x.denominator != 1 for row in inv for x in row):
        raise DomainError("matrix is not invertible over Z")
    return tuple(tuple(int(x) for x in row) for row in inv)


def contragredient(a: Matrix) -> Matrix:
    """The induced action ``a^{-T}`` on the dual lattice."""
    return transpose(int_inverse(a))


def matrix_order(a: Matrix, bound: int = 10**4) -> int:
    ident = identity_matrix(len(a))
    power = a
    for k in range(1, bound + 1):
        if power == ident:
            return k
        power = mat_mul(power, a)
    raise DomainError(f"matrix has no finite order up to {bound}")


def rational_rank(rows: Sequence[Sequence[int]]) -> int:
    m = [[Fraction(x) for x in row] for row in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                c = m[r][col] / m[rank][col]
                m[r] = [x - c * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def pair(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


# --------------------------------------------------------------------------
# root data


@dataclass(frozen=True)
class RootDatum:
    """An integral root datum with a chosen base.

    ``simple`` indexes the simple roots inside ``roots``; the Weyl generators
    are the corresponding reflections of X*.
    """

    rank: int
    roots: tuple[Vector, ...]
    coroots: tuple[Vector, ...]
    simple: tuple[int, ...]
    name: str = ""
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.rank <= 0:
            raise InvalidDatumError("rank must be positive")
        if len(self.roots) != len(self.coroots):
            raise InvalidDatumError("roots and coroots differ in number")
        index = {}
        for i, (a, c) in enumerate(zip(self.roots, self.coroots)):
            if len(a) != self.rank or len(c) != self.rank:
                raise InvalidDatumError("vector of wrong length")
            if not any(a):
                raise InvalidDatumError("zero root")
            if pair(a, c) != 2:
                raise InvalidDatumError(f"<alpha, alpha^vee> != 2 for root {a}")
            if a in index:
                raise InvalidDatumError(f"duplicate root {a}")
            index[a] = i
        object.__setattr__(self, "_index", index)
        for a in self.roots:
            if tuple(-x for x in a) not in index:
                raise InvalidDatumError("root set not closed under negation")
        for s in self.simple:
            if not 0 <= s < len(self.roots):
                raise InvalidDatumError("simple root index out of range")
        for g in self.weyl_generators:
            self.root_permutation(g)

    @property
    def num_roots(self) -> int:
        return len(self.roots)

    def index(self, root: Sequence[int]) -> int:
        try:
            return self._index[tuple(root)]
        except KeyError:
            raise DomainError(f"{tuple(root)} is not a root") from None

    def negative(self, i: int) -> int:
        return self._index[tuple(-x for x in self.roots[i])]

    def reflection(self, i: int) -> Matrix:
        """s_alpha on X*: beta -> beta - <beta, alpha^vee> alpha."""
        a, c = self.roots[i], self.coroots[i]
        n = self.rank
        return tuple(tuple(int(r == s) - a[r] * c[s] for s in range(n)) for r in range(n))

    @property
    def weyl_generators(self) -> tuple[Matrix, ...]:
        return tuple(self.reflection(i) for i in self.simple)

    def root_permutation(self, m: Matrix) -> tuple[int, ...]:
        """Permutation p with m(root_i) = root_{p[i]}; also checks coroots."""
        mt = contragredient(m)
        perm = []
        for i, a in enumerate(self.roots):
            image = mat_vec(m, a)
            j = self._index.get(image)
            if j is None:
                raise InvalidDatumError("matrix does not permute the roots")
            if mat_vec(mt, self.coroots[i]) != self.coroots[j]:
                raise InvalidDatumError("matrix does not permute the coroots compatibly")
            perm.append(j)
        return tuple(perm)

    def is_closed_subset(self, subset: Iterable[int]) -> bool:
        """Closed under negation and under sums that are roots."""
        s = set(subset)
        for i in s:
            if self.negative(i) not in s:
                return False
            for j in s:
                v = tuple(x + y for x, y in zip(self.roots[i], self.roots[j]))
                k = self._index.get(v)
                if k is not None and k not in s:
                    return False
        return True

    def to_json(self) -> dict:
        return {"rank": self.rank, "roots": [list(r) for r in self.roots],
                "coroots": [list(c) for c in self.coroots], "simple": list(self.simple)}

    @classmethod
    def from_json(cls, data: dict | str, name: str = "custom") -> "RootDatum":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(rank=int(data["rank"]), roots=tuple(tuple(r) for r in data["roots"]),
                   coroots=tuple(tuple(c) for c in data["coroots"]),
                   simple=tuple(data["simple"]), name=data.get("name", name))


def _unit(n: int, i: int, c: int = 1) -> list[int]:
    v = [0] * n
    v[i] = c
    return v


def _classical(n: int, kind: str, name: str) -> RootDatum:
    """Root data on Z^n with the standard e_i coordinates."""
    roots, coroots = [], []

    def add(r, c):
        roots.append(tuple(r))
        coroots.append(tuple(c))

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            v = [0] * n
            v[i], v[j] = 1, -1
            add(v, v)
            if kind in "BCD" and i < j:
                for s in (1, -1):
                    w = [0] * n
                    w[i], w[j] = s, s
                    add(w, w)
    if kind == "B":
        for i in range(n):
            for s in (1, -1):
                add(_unit(n, i, s), _unit(n, i, 2 * s))
    elif kind == "C":
        for i in range(n):
            for s in (1, -1):
                add(_unit(n, i, 2 * s), _unit(n, i, s))
    index = {r: k for k, r in enumerate(roots)}
    simple = []
    for i in range(n - 1):
        v = [0] * n
        v[i], v[i + 1] = 1, -1
        simple.append(index[tuple(v)])
    if kind == "B":
        simple.append(index[tuple(_unit(n, n - 1))])
    elif kind == "C":
        simple.append(index[tuple(_unit(n, n - 1, 2))])
    elif kind == "D" and n >= 2:
        v = [0] * n
        v[n - 2], v[n - 1] = 1, 1
        simple.append(index[tuple(v)])
    return RootDatum(n, tuple(roots), tuple(coroots), tuple(simple), name)


def _simply_connected(cartan: Sequence[Sequence[int]], name: str) -> RootDatum:
    """Simply connected datum from a Cartan matrix ``C[i][j] = <alpha_i, alpha_j^vee>``.

    X* is written in the fundamental weight basis, so simple coroots are unit
    vectors; the remaining roots come from closing under simple reflections.
    """
    n = len(cartan)
    simple_roots = [tuple(int(x) for x in cartan[i]) for i in range(n)]
    simple_coroots = [tuple(_unit(n, i)) for i in range(n)]
    seen = {}
    queue = deque()
    for a, c in zip(simple_roots, simple_coroots):
        seen[a] = c
        queue.append(a)
    while queue:
        a = queue.popleft()
        c = seen[a]
        for sa, sc in zip(simple_roots, simple_coroots):
            k = pair(a, sc)
            na = tuple(x - k * y for x, y in zip(a, sa))
            kk = pair(sa, c)
            nc = tuple(x - kk * y for x, y in zip(c, sc))
            if na not in seen:
                seen[na] = nc
                queue.append(na)
    roots = sorted(seen)
    index = {r: i for i, r in enumerate(roots)}
    return RootDatum(n, tuple(roots), tuple(seen[r] for r in roots),
                     tuple(index[a] for a in simple_roots), name)


_FAMILY_RE = re.compile(r"^\s*([A-Za-z]+)\s*\(?\s*(\d*)\s*\)?\s*$")


def build_root_datum(family: str) -> RootDatum:
    """Standard root datum of a named split group, e.g. ``"GL(4)"`` or ``"G2"``."""
    match = _FAMILY_RE.match(family)
    if not match:
        raise InvalidDatumError(f"cannot parse family {family!r}")
    kind, arg = match.group(1).upper(), match.group(2)
    if kind == "G" and arg == "2":
        return _simply_connected([[2, -1], [-3, 2]], "G2")
    if not arg:
        raise InvalidDatumError(f"family {family!r} needs a rank parameter")
    k = int(arg)
    if k <= 0:
        raise InvalidDatumError("nonpositive rank")
    if kind == "GL":
        return _classical(k, "A", f"GL({k})")
    if kind == "SL":
        if k < 2:
            raise InvalidDatumError("SL(n) needs n >= 2")
        cartan = [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(k - 1)]
                  for i in range(k - 1)]
        return _simply_connected(cartan, f"SL({k})")
    if kind == "SP":
        if k % 2:
            raise InvalidDatumError("Sp(m) needs m even")
        return _classical(k // 2, "C", f"Sp({k})")
    if kind == "SO":
        if k < 2:
            raise InvalidDatumError("SO(m) needs m >= 2")
        if k % 2:
            return _classical((k - 1) // 2, "B", f"SO({k})")
        return _classical(k // 2, "D", f"SO({k})")
    raise InvalidDatumError(f"unknown family {family!r}")


def load_datum(source: str) -> RootDatum:
    """A built-in family name or a path to a JSON file."""
    if source.strip().endswith(".json"):
        with open(source) as fh:
            return RootDatum.from_json(json.load(fh), name=source)
    return build_root_datum(source)


# --------------------------------------------------------------------------
# twists and Weyl groups


@dataclass(frozen=True)
class WeylTwist:
    matrix: Matrix
    label: str = ""

    @property
    def order(self) -> int:
        return matrix_order(self.matrix)

    @property
    def on_cocharacters(self) -> Matrix:
        return contragredient(self.matrix)

    def to_json(self) -> dict:
        return {"matrix": [list(r) for r in self.matrix], "label": self.label}


def word_matrix(datum: RootDatum, word: Sequence[int]) -> Matrix:
    """Product s_{i1} s_{i2} ... of simple reflections, indices 1-based."""
    gens = datum.weyl_generators
    m = identity_matrix(datum.rank)
    for i in word:
        if not 1 <= i <= len(gens):
            raise DomainError(f"simple reflection index {i} out of range")
        m = mat_mul(m, gens[i - 1])
    return m


def twist_from_word(datum: RootDatum, word: Sequence[int]) -> WeylTwist:
    return WeylTwist(word_matrix(datum, word), "s" + ".".join(map(str, word)) if word else "id")


def coxeter_twist(datum: RootDatum) -> WeylTwist:
    m = word_matrix(datum, range(1, len(datum.simple) + 1))
    return WeylTwist(m, "coxeter")


def identity_twist(datum: RootDatum) -> WeylTwist:
    return WeylTwist(identity_matrix(datum.rank), "id")


def permutation_word(perm: Sequence[int]) -> list[int]:
    """Word in adjacent transpositions whose product is ``perm`` (0-based images).

    With s_i the transposition (i, i+1) acting as e_i <-> e_{i+1}, the matrix of
    the returned word sends e_j to e_{perm[j]}.
    """
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise DomainError("not a permutation")
    target = list(perm)
    word = []
    current = list(range(n))  # current[j] = image of j under the word so far
    # build left factors: perm = s_a * rest  <=> rest = s_a * perm
    while current != target:
        # find a descent of target relative to position ordering
        inv = [0] * n
        for j, t in enumerate(target):
            inv[t] = j
        for a in range(n - 1):
            if inv[a] > inv[a + 1]:
                break
        word.append(a + 1)
        target = [a + 1 if t == a else a if t == a + 1 else t for t in target]
    return word


def twist_from_permutation(datum: RootDatum, perm: Sequence[int]) -> WeylTwist:
    """Type A twist from a permutation of {0..n-1} (``perm[j]`` is the image of j)."""
    word = permutation_word(perm)
    m = word_matrix(datum, word)
    return WeylTwist(m, "perm:" + ",".join(map(str, perm)))


class WeylGroup:
    """Enumerated Weyl group; elements are stored as root permutations with matrices."""

    def __init__(self, datum: RootDatum, cap: int = WEYL_CAP):
        self.datum = datum
        gens = datum.weyl_generators
        gen_perms = [datum.root_permutation(g) for g in gens]
        ident = tuple(range(datum.num_roots))
        self.perms: list[tuple[int, ...]] = [ident]
        self.matrices: list[Matrix] = [identity_matrix(datum.rank)]
        self.index: dict[tuple[int, ...], int] = {ident: 0}
        queue = deque([0])
        while queue:
            k = queue.popleft()
            p, m = self.perms[k], self.matrices[k]
            for gp, gm in zip(gen_perms, gens):
                np_ = tuple(gp[i] for i in p)
                if np_ not in self.index:
                    if len(self.perms) >= cap:
                        raise CapExceededError(f"Weyl group larger than cap {cap}")
                    self.index[np_] = len(self.perms)
                    self.perms.append(np_)
                    self.matrices.append(mat_mul(gm, m))
                    queue.append(self.index[np_])
        self._classes = None

    def __len__(self) -> int:
        return len(self.perms)

    def mul(self, i: int, j: int) -> int:
        a, b = self.perms[i], self.perms[j]
        return self.index[tuple(a[k] for k in b)]

    def inverse(self, i: int) -> int:
        p = self.perms[i]
        inv = [0] * len(p)
        for k, v in enumerate(p):
            inv[v] = k
        return self.index[tuple(inv)]

    def find(self, m: Matrix) -> int | None:
        """Index of a matrix in W, or None."""
        try:
            p = self.datum.root_permutation(m)
        except InvalidDatumError:
            return None
        k = self.index.get(p)
        if k is None or self.matrices[k] != tuple(tuple(r) for r in m):
            return None
        return k

    def conjugacy_classes(self) -> list[list[int]]:
        """Classes sorted by (element order, size, smallest matrix)."""
        if self._classes is None:
            gens = [self.index[self.datum.root_permutation(g)] for g in self.datum.weyl_generators]
            seen = [False] * len(self)
            classes = []
            for start in range(len(self)):
                if seen[start]:
                    continue
                cls = [start]
                seen[start] = True
                queue = deque([start])
                while queue:
                    x = queue.popleft()
                    for g in gens:  # generators are involutions
                        y = self.mul(self.mul(g, x), g)
                        if not seen[y]:
                            seen[y] = True
                            cls.append(y)
                            queue.append(y)
                classes.append(sorted(cls, key=lambda k: self.matrices[k]))
            classes.sort(key=lambda c: (self.element_order(c[0]), len(c), self.matrices[c[0]]))
            self._classes = classes
        return self._classes

    def element_order(self, i: int) -> int:
        k, x = 1, i
        while x != 0:
            x = self.mul(x, i)
            k += 1
        return k


_weyl_cache: dict = {}


def weyl_group(datum: RootDatum, cap: int = WEYL_CAP) -> WeylGroup:
    key = (datum.rank, datum.roots, datum.coroots, datum.simple)
    group = _weyl_cache.get(key)
    if group is None:
        group = _weyl_cache[key] = WeylGroup(datum, cap)
    return group


def centralizer(w: WeylTwist, datum: RootDatum, allow_outer: bool = False) -> tuple[Matrix, ...]:
    """Elements of W commuting with the twist, as matrices on X*.

    A twist outside W is rejected unless ``allow_outer`` is set.
    """
    group = weyl_group(datum)
    if group.find(w.matrix) is None and not allow_outer:
        raise DomainError("twist is not an element of the Weyl group")
    mw = np.array(w.matrix, dtype=np.int64)
    out = []
    for m in group.matrices:
        a = np.array(m, dtype=np.int64)
        if np.array_equal(a @ mw, mw @ a):
            out.append(m)
    return tuple(out)


def twist_from_spec(datum: RootDatum, spec: str) -> WeylTwist:
    """Parse ``coxeter``, ``id``, ``perm:2,0,1``, ``class:3`` or a word like ``1,2,1``."""
    spec = spec.strip()
    if spec in ("coxeter", "cox"):
        return coxeter_twist(datum)
    if spec in ("id", "identity", "split"):
        return identity_twist(datum)
    if spec.startswith("perm:"):
        return twist_from_permutation(datum, [int(x) for x in spec[5:].split(",")])
    if spec.startswith("class:"):
        group = weyl_group(datum)
        k = int(spec[6:])
        classes = group.conjugacy_classes()
        if not 0 <= k < len(classes):
            raise DomainError(f"class index {k} out of range (0..{len(classes) - 1})")
        return WeylTwist(group.matrices[classes[k][0]], spec)
    if spec.startswith("matrix:"):
        return WeylTwist(as_matrix(json.loads(spec[7:])), "matrix")
    word = [int(x) for x in re.split(r"[,\s.]+", spec) if x]
    return twist_from_word(datum, word)


# --------------------------------------------------------------------------
# orbit classification


@dataclass(frozen=True)
class RootOrbitReport:
    """Orbits of roots under <twist>, and under <twist> x {+-1}.

    ``classification[k]`` refers to ``orbits[k]``; ``degree_pm[k]`` is the size of
    the paired orbit containing ``orbits[k]`` divided by two when the orbit is
    asymmetric, and half the orbit size when it is symmetric.
    """

    orbits: tuple[tuple[int, ...], ...]
    paired_orbits: tuple[tuple[int, ...], ...]
    classification: tuple[str, ...]
    degree_alpha: tuple[int, ...]
    degree_pm: tuple[int, ...]
    orbit_of: tuple[int, ...]

    def counts(self, subset: Iterable[int] | None = None) -> dict:
        """Orbit counts restricted to a union of orbits."""
        keep = None if subset is None else set(subset)
        total = asym_pairs = sym = 0
        for k, orb in enumerate(self.orbits):
            if keep is not None:
                inside = [i in keep for i in orb]
                if any(inside) and not all(inside):
                    raise DomainError("subset is not a union of orbits")
                if not inside[0]:
                    continue
            total += 1
            if self.classification[k] == "symmetric_unramified":
                sym += 1
        for orb in self.paired_orbits:
            if keep is not None and orb[0] not in keep:
                continue
            if self.classification[self.orbit_of[orb[0]]] == "asymmetric":
                asym_pairs += 1
        return {"orbits": total, "asymmetric_pairs": asym_pairs, "symmetric_unramified": sym}

    def to_json(self) -> dict:
        return {"orbits": [list(o) for o in self.orbits],
                "classification": list(self.classification),
                "degree_alpha": list(self.degree_alpha), **self.counts()}


def classify_orbits(datum: RootDatum, w: WeylTwist) -> RootOrbitReport:
    perm = datum.root_permutation(w.matrix)
    n = datum.num_roots
    orbit_of = [-1] * n
    orbits = []
    for i in range(n):
        if orbit_of[i] >= 0:
            continue
        orb, j = [], i
        while orbit_of[j] < 0:
            orbit_of[j] = len(orbits)
            orb.append(j)
            j = perm[j]
        orbits.append(tuple(orb))
    classification, degree_alpha, degree_pm = [], [], []
    paired, seen = [], set()
    for k, orb in enumerate(orbits):
        neg = datum.negative(orb[0])
        symmetric = orbit_of[neg] == k
        classification.append("symmetric_unramified" if symmetric else "asymmetric")
        degree_alpha.append(len(orb))
        degree_pm.append(len(orb) // 2 if symmetric else len(orb))
        if k not in seen:
            other = orbit_of[neg]
            seen.update((k, other))
            paired.append(tuple(sorted(orb + (() if symmetric else orbits[other]))))
    return RootOrbitReport(tuple(orbits), tuple(paired), tuple(classification),
                           tuple(degree_alpha), tuple(degree_pm), tuple(orbit_of))
