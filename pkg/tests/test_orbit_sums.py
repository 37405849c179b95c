import cmath
import random

import numpy as np
import pytest

from vreglab.character_lab import (
    FilteredCharacter,
    gl_signature_character,
    howe_jumps,
    level_space,
    trivial_character,
)
from vreglab.cyclotomic import CycloSum
from vreglab.errors import CapExceededError, DomainError, StarConditionError
from vreglab.finite_torus import TwistedTorus
from vreglab.orbit_sums import (
    OUT_OF_TORUS,
    FiniteModel,
    default_group,
    henniart_test,
    orbit_sum,
    orbit_sum_orthogonality,
    predicted_table,
)
from vreglab.root_datum import build_root_datum, twist_from_spec
from vreglab.signs import epsilon_ram_character, origin


def torus(family, q, twist="coxeter"):
    d = build_root_datum(family)
    return TwistedTorus(d, twist_from_spec(d, twist), q)


def zeta(n, e):
    return cmath.exp(2j * cmath.pi * e / n)


def test_cyclotomic_arithmetic():
    # 1 + z + ... + z^(n-1) = 0 and z^(n/2) = -1
    for n in (6, 8, 24, 30):
        assert CycloSum.from_exponents(n, range(n)).is_zero()
        assert CycloSum(n, {n // 2: 1}) == -CycloSum.integer(n, 1)
    a = CycloSum(12, {1: 2, 5: -1})
    b = CycloSum(12, {3: 1})
    assert abs(complex(a * b) - complex(a) * complex(b)) < 1e-9
    assert a.shift(11) == CycloSum(12, {0: 2, 4: -1})
    assert CycloSum.from_exponents(5, [1, 2, 3, 4]) == -1
    assert (a - a).is_zero() and (a + b).as_integer() is None
    with pytest.raises(ValueError):
        _ = CycloSum(4, {}) == CycloSum(6, {})


def test_trivial_character_sums_to_group_order():
    t = torus("GL(3)", 3)
    group = default_group(t)
    for col in t.all_coords()[:, ::5].T:
        assert orbit_sum(trivial_character(t), group, tuple(col)) == len(group)


def test_gl2_orbit_sum_is_theta_plus_frobenius_conjugate():
    t = torus("GL(2)", 3)
    group = default_group(t)
    assert len(group) == 2
    for k in range(8):
        theta = FilteredCharacter(t, (k,))
        for c in range(8):
            value = orbit_sum(theta, group, (c,))
            # gamma -> gamma^q is the nontrivial element; theta(g^c) = zeta_8^(k c)
            expected = zeta(8, k * c) + zeta(8, k * c * 3)
            assert abs(complex(value) - expected) < 1e-9


def test_orbit_sum_with_levels_matches_direct_sum():
    t = torus("GL(2)", 5)
    group = default_group(t)
    model = FiniteModel(t, 1, group)
    rng = random.Random(7)
    for _ in range(20):
        theta = FilteredCharacter(t, (rng.randrange(24),), (tuple(rng.randrange(5) for _ in range(2)),))
        c = rng.randrange(24)
        y = [rng.randrange(5) for _ in range(2)]
        direct = 0
        for k in range(len(group)):
            moved_c = int(model.act_coords(k, np.array([[c]]))[0, 0])
            moved_y = model.act_levels(k, np.array(y).reshape(-1, 1))[:, 0]
            direct += zeta(24, theta.depth_zero[0] * moved_c) * zeta(5, int(np.dot(theta.levels[0], moved_y)))
        got = orbit_sum(theta, group, (c,), levels=[y])
        assert abs(complex(got) - direct) < 1e-9


def test_gl2_predicted_table_depth_zero():
    t = torus("GL(2)", 3)
    theta = FilteredCharacter(t, (1,))
    table = predicted_table(theta)
    assert table.sign == -1  # anisotropic rank one: (-1)^(2 - 1)
    assert len(table.rows) == 6
    for g, value in table.rows.items():
        c = t.coords(g)[0]
        assert abs(complex(value) + zeta(8, c) + zeta(8, 3 * c)) < 1e-9
    assert table.value(t.identity()) is OUT_OF_TORUS


@pytest.mark.parametrize("n,q,chain,jumps,depth", [
    (2, 3, (1, 2), (1,), 1), (2, 3, (1, 2), (2,), 2), (3, 3, (1, 3), (1,), 1),
    (3, 3, (1, 3), (2,), 2), (2, 5, (1, 2), (2,), 2), (4, 3, (1, 2, 4), (1, 2), 2),
])
def test_predicted_rows_follow_definition(n, q, chain, jumps, depth):
    t = torus(f"GL({n})", q)
    theta = gl_signature_character(t, chain, jumps, depth, depth_zero=(1,))
    table = predicted_table(theta)
    howe = howe_jumps(theta)
    eps = epsilon_ram_character(howe, t, origin(t.datum))
    group = default_group(t)
    model = FiniteModel(t, 0, group)
    Q = t.modulus
    phi = table.phi
    # theta = eps * phi on the torus
    assert phi.twist_depth_zero(eps.exponents) == theta
    for g, value in list(table.rows.items())[:60]:
        c = np.array(t.coords(g)).reshape(-1, 1)
        expected = 0
        for k in range(len(group)):
            mc = model.act_coords(k, c)
            e_phi = sum(kk * (Q // d) * int(x) for kk, d, x in zip(phi.depth_zero, t.orders, mc[:, 0]))
            sign = -1 if int(eps.value_bits(mc)[0]) else 1
            expected += sign * zeta(Q, e_phi)
        assert abs(complex(value) - table.sign * expected) < 1e-9
    # rows are constant on group orbits
    for g, value in table.rows.items():
        for m in group:
            assert table.rows[t.act(m, g)] == value


def test_predicted_table_rejects_bad_input():
    with pytest.raises(DomainError):
        predicted_table(trivial_character(torus("GL(2)", 4)))
    t = torus("GL(4)", 3)
    with pytest.raises(DomainError):
        predicted_table(gl_signature_character(t, (2, 4), (1,), 1))


def test_predicted_table_warns_without_density():
    t = torus("Sp(4)", 3, "id")
    with pytest.warns(UserWarning):
        table = predicted_table(trivial_character(t))
    assert not table.star_holds


@pytest.mark.parametrize("q", [3, 5])
def test_henniart_gl2(q):
    t = torus("GL(2)", q)
    rep = henniart_test(t, depth=1)
    assert rep.ok and not rep.degenerate
    assert rep.characters == (q * q - 1) * q * q
    assert rep.equalities == rep.admissible * 2
    assert rep.pairs_tested == rep.admissible * rep.characters


def test_henniart_gl3_depth_zero_and_random_mode():
    t = torus("GL(3)", 3)
    rep0 = henniart_test(t, depth=0)
    assert rep0.ok and rep0.admissible == 0
    rep = henniart_test(torus("GL(2)", 5), depth=1, mode="random", trials=40, seed=3)
    assert rep.ok and rep.pairs_tested <= 40 * rep.characters


def test_henniart_parallel_matches_serial():
    t = torus("GL(2)", 3)
    a = henniart_test(t, depth=1, jobs=1).to_json()
    b = henniart_test(t, depth=1, jobs=2).to_json()
    assert a == b


def test_henniart_guards():
    with pytest.raises(StarConditionError):
        henniart_test(torus("G2", 2), depth=0)
    with pytest.raises(CapExceededError):
        henniart_test(torus("GL(3)", 5), depth=2)
    with pytest.raises(DomainError):
        henniart_test(torus("GL(2)", 3), mode="bogus")


def test_orthogonality_gl3_q2():
    t = torus("GL(3)", 2)
    group = default_group(t)
    dim = level_space(t).dim
    rng = random.Random(11)
    for _ in range(40):
        theta = FilteredCharacter(t, (rng.randrange(7),), (tuple(rng.randrange(2) for _ in range(dim)),))
        other = theta.weyl_twist(rng.choice(group)) if rng.random() < 0.5 else \
            FilteredCharacter(t, (rng.randrange(7),), (tuple(rng.randrange(2) for _ in range(dim)),))
        res = orbit_sum_orthogonality(theta, other, group)
        assert res.consistent
    trivial = orbit_sum_orthogonality(trivial_character(t), trivial_character(t, 1), group)
    assert trivial.value == trivial.coincidences == len(group)


def test_finite_model_order():
    t = torus("GL(2)", 3)
    assert FiniteModel(t, 2).order == 8 * 9**2
    assert FiniteModel(t, 1).level_vectors().shape == (2, 9)
