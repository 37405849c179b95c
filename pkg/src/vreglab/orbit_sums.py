"""Weyl-orbit sums of characters on the very regular locus.

The finite model of S_0/S_{r+} is the product of the finite torus with r
copies of the level space.  A character value is a root of unity of order
N = Q p: the depth-zero part contributes zeta_Q^a = zeta_N^(a p) and each level
contributes zeta_p^b = zeta_N^(b Q).
"""
from __future__ import annotations

import itertools
import json
import random
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .character_lab import FilteredCharacter, howe_jumps, level_space
from .cyclotomic import CycloSum, reduction_matrix
from .errors import CapExceededError, DomainError, StarConditionError, StructuralError
from .finite_torus import TorusElement, TwistedTorus, density_report
from .root_datum import Matrix, RootDatum, WeylTwist, centralizer, identity_matrix
from .signs import BuildingPoint, depth_parity, epsilon_ram_character, origin

EXHAUSTIVE_CAP = 10**6
DENSE_CAP = 5 * 10**7


def default_group(t: TwistedTorus) -> tuple[Matrix, ...]:
    return centralizer(t.twist, t.datum, allow_outer=True)


class FiniteModel:
    """The group S(F_q) x V^depth with the action of a subgroup of W."""

    def __init__(self, torus: TwistedTorus, depth: int, group: Sequence[Matrix] | None = None):
        self.torus = torus
        self.depth = depth
        self.group = tuple(group) if group is not None else default_group(torus)
        self.p, self.Q = torus.p, torus.modulus
        self.N = self.Q * self.p
        self.dim = torus.f * torus.rank
        self.A = [torus.coord_action(m) for m in self.group]
        space = level_space(torus) if depth else None
        self.B = [space.action(m) for m in self.group] if depth else [None] * len(self.group)

    @property
    def order(self) -> int:
        return self.torus.order * self.p ** (self.dim * self.depth)

    def act_coords(self, k: int, coords: np.ndarray) -> np.ndarray:
        orders = np.array(self.torus.orders, dtype=np.int64).reshape(-1, 1)
        if not len(orders):
            return coords
        return (self.A[k] @ coords) % orders

    def act_levels(self, k: int, levels: np.ndarray) -> np.ndarray:
        """levels has shape (depth * dim, n)."""
        if not self.depth:
            return levels
        big = np.kron(np.eye(self.depth, dtype=np.int64), self.B[k])
        return (big @ levels) % self.p

    def exponents(self, theta: FilteredCharacter, coords: np.ndarray,
                  levels: np.ndarray | None = None) -> np.ndarray:
        """Exponents mod N of theta at columns (coords, levels)."""
        Q, p, N = self.Q, self.p, self.N
        t = self.torus
        out = np.zeros(coords.shape[1], dtype=np.int64)
        for j, (k, d) in enumerate(zip(theta.depth_zero, t.orders)):
            if k:
                out = (out + (Q // d) * ((k * coords[j]) % d)) % Q
        out = out * p
        if levels is not None and theta.nominal_depth:
            f = np.concatenate([np.asarray(x, dtype=np.int64) for x in theta.levels])
            if len(f) > levels.shape[0]:
                raise DomainError("character deeper than the model")
            b = (f @ levels[:len(f)]) % p
            out = (out + Q * b) % N
        return out % N

    def orbit_exponents(self, theta: FilteredCharacter, coords: np.ndarray,
                        levels: np.ndarray | None = None) -> np.ndarray:
        """Array (|group|, n): exponent of theta(v . x) for each v."""
        rows = []
        for k in range(len(self.group)):
            lv = None if levels is None else self.act_levels(k, levels)
            rows.append(self.exponents(theta, self.act_coords(k, coords), lv))
        return np.array(rows, dtype=np.int64).reshape(len(self.group), coords.shape[1])

    def level_vectors(self) -> np.ndarray:
        """All elements of V^depth as columns."""
        n = self.dim * self.depth
        if n == 0:
            return np.zeros((0, 1), dtype=np.int64)
        if self.p**n > DENSE_CAP:
            raise CapExceededError("level space too large to enumerate")
        grid = np.array(list(itertools.product(range(self.p), repeat=n)), dtype=np.int64)
        return grid.T


def _as_coords(t: TwistedTorus, gamma) -> np.ndarray:
    if isinstance(gamma, TorusElement):
        c = t.coords(gamma)
    else:
        c = tuple(gamma)
    return np.array(c, dtype=np.int64).reshape(-1, 1)


def orbit_sum(theta: FilteredCharacter, group: Sequence[Matrix] | None, gamma,
              levels: Sequence[Sequence[int]] | None = None) -> CycloSum:
    """sum_{v in group} theta(v . gamma) as an exact cyclotomic value.

    ``gamma`` is a TorusElement (or coordinates); ``levels`` optionally gives its
    components in the level spaces, zero by default.
    """
    t = theta.torus
    model = FiniteModel(t, theta.nominal_depth, group)
    lv = None
    if theta.nominal_depth:
        lv = np.zeros((model.dim * model.depth, 1), dtype=np.int64)
        if levels is not None:
            lv[:, 0] = np.concatenate([np.asarray(x, dtype=np.int64) for x in levels])
    ex = model.orbit_exponents(theta, _as_coords(t, gamma), lv)
    return CycloSum.from_exponents(model.N, ex[:, 0])


# --------------------------------------------------------------------------
# predicted tables


OUT_OF_TORUS = None


@dataclass
class PredictedCharacterTable:
    sign: int
    rows: dict
    phi: FilteredCharacter
    star_holds: bool

    def value(self, gamma):
        """Row value, or OUT_OF_TORUS for elements not in the very regular torus locus."""
        return self.rows.get(gamma, OUT_OF_TORUS)

    def to_rows(self) -> list[tuple]:
        return [(g.exponents, v) for g, v in sorted(self.rows.items())]


def predicted_table(theta: FilteredCharacter, x: BuildingPoint | None = None,
                    group: Sequence[Matrix] | None = None,
                    subset: Iterable[int] | None = None) -> PredictedCharacterTable:
    """sign * sum_v eps(v gamma) phi(v gamma) on very regular points, phi = theta * eps."""
    t = theta.torus
    x = origin(t.datum) if x is None else x
    if not t.odd:
        raise DomainError("predicted tables need odd q")
    group = tuple(group) if group is not None else default_group(t)
    rep = density_report(t, subset)
    if not rep.star_holds:
        warnings.warn("density inequality fails for this torus", stacklevel=2)
    if theta.depth == 0:
        if not x.hyperspecial_like:
            raise DomainError("depth-zero sign is only available at hyperspecial points")
        sign = -1 if (t.rank - t.split_rank) % 2 else 1
        bits = (0,) * t.num_generators
        phi = theta
        eps_exp = np.zeros(t.num_generators, dtype=np.int64)
    else:
        howe = howe_jumps(theta)
        if howe.r0_plus:
            raise DomainError("character is not toral")
        eps = epsilon_ram_character(howe, t, x)
        phi = theta.twist_depth_zero(eps.exponents)
        if howe_jumps(phi) != howe:
            raise StructuralError("depth-zero twist changed the jump data")
        back = phi.twist_depth_zero(eps.exponents)
        if back != theta:
            raise StructuralError("eps[phi] * phi differs from theta")
        # toral case: G^0 = S, so the split-rank difference vanishes
        sign = -1 if depth_parity(howe, t, x).r_value % 2 else 1
        bits = eps.bits
        eps_exp = np.array(bits, dtype=np.int64)
    model = FiniteModel(t, 0, group)
    coords = t.all_coords()
    keep = ~t.nonvreg_mask(coords, t.kernel_representatives(subset))
    coords = coords[:, keep]
    phi0 = FilteredCharacter(t, phi.depth_zero, ())
    rows = {}
    half = model.N // 2
    sign_shift = 0 if sign == 1 else half
    ex = model.orbit_exponents(phi0, coords)
    for k in range(len(group)):
        moved = model.act_coords(k, coords)
        ex[k] = (ex[k] + half * ((eps_exp @ moved) % 2) + sign_shift) % model.N
    for col in range(coords.shape[1]):
        g = t.element(tuple(int(c) for c in coords[:, col]))
        rows[g] = CycloSum.from_exponents(model.N, ex[:, col])
    return PredictedCharacterTable(sign, rows, phi, rep.star_holds)


# --------------------------------------------------------------------------
# uniqueness test


@dataclass
class HenniartReport:
    characters: int
    admissible: int
    pairs_tested: int
    equalities: int
    counterexamples: list = field(default_factory=list)
    degenerate: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        return {"characters": self.characters, "admissible": self.admissible,
                "pairs_tested": self.pairs_tested, "equalities": self.equalities,
                "counterexamples": self.counterexamples, "degenerate": self.degenerate}


class _CharacterSpace:
    """All characters of the model, indexed by (depth-zero index, level index)."""

    def __init__(self, model: FiniteModel):
        self.model = model
        t = model.torus
        self.n0 = t.order
        self.nplus = model.p ** (model.dim * model.depth)
        self.count = self.n0 * self.nplus
        orders = t.orders
        self.K = (np.vstack(np.unravel_index(np.arange(self.n0), orders)).T.astype(np.int64)
                  if orders else np.zeros((1, 0), dtype=np.int64))
        self.F = model.level_vectors().T  # (nplus, dim*depth)
        self.steps = np.array([model.Q // d for d in orders], dtype=np.int64)

    def character(self, idx: int) -> FilteredCharacter:
        m = self.model
        i0, ip = divmod(int(idx), self.nplus)
        f = self.F[ip]
        levels = tuple(tuple(int(x) for x in f[k * m.dim:(k + 1) * m.dim]) for k in range(m.depth))
        return FilteredCharacter(m.torus, tuple(int(x) for x in self.K[i0]), levels)

    def permutations(self) -> list[np.ndarray]:
        """perm[k][i] = index of theta_i twisted by group element k."""
        m = self.model
        t = m.torus
        out = []
        for k in range(len(m.group)):
            if t.orders:
                W = self.K * self.steps  # weights (n0, kdim)
                W2 = (W @ m.A[k]) % m.Q
                if np.any(W2 % self.steps):
                    raise StructuralError("twisted weights are not characters")
                K2 = W2 // self.steps
                idx0 = np.ravel_multi_index(tuple(K2.T), t.orders)
            else:
                idx0 = np.zeros(1, dtype=np.int64)
            if m.depth:
                big = np.kron(np.eye(m.depth, dtype=np.int64), m.B[k])
                F2 = (self.F @ big) % m.p
                idxp = np.ravel_multi_index(tuple(F2.T), (m.p,) * (m.dim * m.depth))
            else:
                idxp = np.zeros(1, dtype=np.int64)
            out.append((idx0[:, None] * self.nplus + idxp[None, :]).reshape(-1))
        return out


def _henniart_core(torus: TwistedTorus, group: Sequence[Matrix], depth: int,
                   rows: Sequence[int] | None, subset, tol: float = 1e-6) -> dict:
    model = FiniteModel(torus, depth, group)
    space = _CharacterSpace(model)
    t = torus
    perms = space.permutations()
    ident = [k for k, m in enumerate(model.group) if m == identity_matrix(t.rank)]
    if not ident:
        raise DomainError("group must contain the identity")
    # admissible: trivial stabilizer on the positive part
    plus_idx = np.arange(space.nplus)
    plus_stab = np.ones(space.nplus, dtype=np.int64)
    for k, perm in enumerate(perms):
        if k in ident:
            continue
        moved = perm[plus_idx] % space.nplus  # depth-zero index 0 -> positive part only
        plus_stab += moved == plus_idx
    admissible_plus = plus_stab == 1
    all_rows = [i for i in range(space.count) if admissible_plus[i % space.nplus]]
    targets = all_rows if rows is None else [i for i in rows if admissible_plus[i % space.nplus]]

    coords = t.all_coords()
    coords = coords[:, ~t.nonvreg_mask(coords, t.kernel_representatives(subset))]
    levels = model.level_vectors()
    nS, nV = coords.shape[1], levels.shape[1]
    if space.count * nS * nV > DENSE_CAP:
        raise CapExceededError("character table too large for the dense test")
    W = space.K * space.steps
    # F[theta, (s, y)] = sum_v zeta_Q^(w . A_v s) zeta_p^(f . B_v y)
    total = np.zeros((space.count, nS * nV), dtype=complex)
    exps0, expsp = [], []
    for k in range(len(model.group)):
        e0 = (W @ model.act_coords(k, coords)) % model.Q if t.orders else np.zeros((1, nS), dtype=np.int64)
        ep = (space.F @ model.act_levels(k, levels)) % model.p if depth else np.zeros((1, 1), dtype=np.int64)
        exps0.append(e0)
        expsp.append(ep)
        total += np.kron(np.exp(2j * np.pi * e0 / model.Q), np.exp(2j * np.pi * ep / model.p))

    def exact_row(i):
        i0, ip = divmod(i, space.nplus)
        rows_ = [((model.p * e0[i0])[:, None] + (model.Q * ep[ip])[None, :]).reshape(-1) % model.N
                 for e0, ep in zip(exps0, expsp)]
        return np.array(rows_, dtype=np.int64)

    red = reduction_matrix(model.N)

    def canonical_rows(ex):
        hist = np.zeros((ex.shape[1], model.N), dtype=np.int64)
        for row in ex:
            np.add.at(hist, (np.arange(ex.shape[1]), row), 1)
        return hist @ red

    norms = np.einsum("ij,ij->i", total, total.conj()).real
    result = {"pairs": 0, "equalities": 0, "counterexamples": [], "degenerate": []}
    for i in targets:
        result["pairs"] += space.count
        orbit = {int(perm[i]) for perm in perms}
        if norms[i] < 1e-9:
            if not np.any(canonical_rows(exact_row(i))):
                result["degenerate"].append(space.character(i).to_json())
                continue
        g = total @ total[i].conj()
        cand = np.flatnonzero(np.abs(g) ** 2 >= (1 - tol) * norms * norms[i])
        cand = [int(j) for j in cand if norms[j] >= 1e-9]
        found = set()
        ex_i = np.sort(exact_row(i), axis=0)
        for j in cand:
            ex_j = exact_row(j)
            if np.array_equal(ex_i, np.sort(ex_j, axis=0)):
                c_is_one, proportional = True, True
            else:
                ci, cj = canonical_rows(exact_row(i)), canonical_rows(ex_j)
                proportional, c_is_one = _exact_proportional(model.N, ci, cj)
            if not proportional:
                continue
            found.add(j)
            if c_is_one and j in orbit:
                result["equalities"] += 1
            else:
                result["counterexamples"].append({
                    "theta": space.character(i).to_json(), "theta_prime": space.character(j).to_json(),
                    "c_is_one": c_is_one, "conjugate": j in orbit})
        for j in sorted(orbit - found):
            result["counterexamples"].append({
                "theta": space.character(i).to_json(), "theta_prime": space.character(j).to_json(),
                "missed_conjugate": True})
    result["characters"] = space.count
    result["admissible"] = len(all_rows)
    return result


def _cyclo_from_canonical(n: int, vec) -> CycloSum:
    return CycloSum(n, {e: int(c) for e, c in enumerate(vec) if c})


def _exact_proportional(n: int, ci: np.ndarray, cj: np.ndarray) -> tuple[bool, bool]:
    """Whether row i = c * row j exactly, and whether c = 1."""
    nz = [k for k in range(cj.shape[0]) if np.any(cj[k])]
    if not nz:
        return False, False
    k0 = nz[0]
    a0, b0 = _cyclo_from_canonical(n, ci[k0]), _cyclo_from_canonical(n, cj[k0])
    for k in range(cj.shape[0]):
        lhs = _cyclo_from_canonical(n, ci[k]) * b0
        rhs = a0 * _cyclo_from_canonical(n, cj[k])
        if lhs != rhs:
            return False, False
    return True, a0 == b0


def _henniart_worker(args):
    datum_json, twist_matrix, q, group, depth, rows, subset = args
    datum = RootDatum.from_json(datum_json, name=datum_json.get("name", ""))
    t = TwistedTorus(datum, WeylTwist(twist_matrix), q)
    return _henniart_core(t, group, depth, rows, subset)


def henniart_test(t: TwistedTorus, group: Sequence[Matrix] | None = None, depth: int = 1,
                  mode: str = "exhaustive", trials: int = 100, seed: int = 0,
                  subset: Iterable[int] | None = None, jobs: int = 1) -> HenniartReport:
    """Check that proportional orbit sums force c = 1 and conjugate characters."""
    group = tuple(group) if group is not None else default_group(t)
    subset = None if subset is None else sorted(t.check_subset(subset))
    if not density_report(t, subset).star_holds:
        raise StarConditionError("density inequality fails; the lemma's hypotheses are unmet")
    count = t.order * t.p ** (t.f * t.rank * depth)
    if mode == "exhaustive":
        if count > EXHAUSTIVE_CAP:
            raise CapExceededError(f"{count} characters exceed the exhaustive cap")
        rows = list(range(count))
    elif mode == "random":
        rng = random.Random(seed)
        rows = sorted(rng.sample(range(count), min(trials, count)))
    else:
        raise DomainError(f"unknown mode {mode!r}")
    jobs = max(1, int(jobs))
    chunks = [rows[k::jobs] for k in range(jobs)] if jobs > 1 else [rows]
    if jobs == 1:
        parts = [_henniart_core(t, group, depth, rows, subset)]
    else:
        payload = dict(t.datum.to_json(), name=t.datum.name)
        args = [(payload, t.twist.matrix, t.q, group, depth, c, subset) for c in chunks]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_henniart_worker, args))
    report = HenniartReport(parts[0]["characters"], parts[0]["admissible"], 0, 0)
    for part in parts:
        report.pairs_tested += part["pairs"]
        report.equalities += part["equalities"]
        report.counterexamples.extend(part["counterexamples"])
        report.degenerate.extend(part["degenerate"])
    report.counterexamples.sort(key=json_key)
    report.degenerate.sort(key=json_key)
    return report


def json_key(obj) -> str:
    return json.dumps(obj, sort_keys=True)


# --------------------------------------------------------------------------
# orthogonality


@dataclass(frozen=True)
class Orthogonality:
    value: Fraction
    coincidences: int

    @property
    def consistent(self) -> bool:
        return self.value == self.coincidences


def _padded(theta: FilteredCharacter, depth: int) -> FilteredCharacter:
    dim = theta.torus.f * theta.torus.rank
    extra = tuple((0,) * dim for _ in range(depth - theta.nominal_depth))
    return FilteredCharacter(theta.torus, theta.depth_zero, theta.levels + extra)


def orbit_sum_orthogonality(theta: FilteredCharacter, theta_prime: FilteredCharacter,
                            group: Sequence[Matrix] | None = None) -> Orthogonality:
    """<sum_v theta^v, sum_v theta'^v> over the whole model, divided by |group|."""
    t = theta.torus
    depth = max(theta.nominal_depth, theta_prime.nominal_depth)
    a, b = _padded(theta, depth), _padded(theta_prime, depth)
    model = FiniteModel(t, depth, group)
    if model.order > DENSE_CAP // max(1, len(model.group) ** 2):
        raise CapExceededError("model too large for a direct inner product")
    coords = t.all_coords()
    levels = model.level_vectors() if depth else None
    nS = coords.shape[1]
    nV = 1 if levels is None else levels.shape[1]
    C = np.repeat(coords, nV, axis=1)
    Y = None if levels is None else np.tile(levels, (1, nS))
    ea = model.orbit_exponents(a, C, Y)
    eb = model.orbit_exponents(b, C, Y)
    hist = np.zeros(model.N, dtype=np.int64)
    for ra in ea:
        for rb in eb:
            np.add.at(hist, (ra - rb) % model.N, 1)
    total = CycloSum(model.N, {e: int(c) for e, c in enumerate(hist) if c}).as_integer()
    if total is None:
        raise StructuralError("inner product is not rational")
    value = Fraction(total, model.order * len(model.group))
    coincidences = sum(1 for m in model.group if a.weyl_twist(m) == b)
    return Orthogonality(value, coincidences)
