from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vreglab.character_lab import (
    gl_jump_signatures,
    gl_signature_character,
    howe_jumps,
    level_space,
)
from vreglab.errors import DomainError, StructuralError
from vreglab.fields import GF
from vreglab.finite_torus import TwistedTorus, center_mask
from vreglab.root_datum import build_root_datum, centralizer, coxeter_twist, twist_from_spec
from vreglab.signs import (
    BuildingPoint,
    SignCharacter,
    barycenter,
    building_point,
    depth_parity,
    e_tilde,
    epsilon_alpha,
    epsilon_ram,
    epsilon_ram_character,
    gl_epsilon_closed_form,
    gl_parity_closed_form,
    gl_parity_rearranged,
    level_root_set,
    origin,
    ram_sign_bits,
)


def torus(family, q, twist="coxeter"):
    d = build_root_datum(family)
    return TwistedTorus(d, twist_from_spec(d, twist), q)


def field_sign(t, orbit, gamma):
    """Quadratic sign computed by powering inside the splitting field."""
    rep = t.orbit_report
    alpha = rep.orbits[orbit][0]
    deg = rep.degree_alpha[orbit]
    K = GF(t.p, t.f * t.twist_order)
    x = K.gen_power(t.root_residue(alpha, gamma))
    minus_one = K.neg(K.one)
    if rep.classification[orbit] == "symmetric_unramified":
        k = deg // 2
        assert K.pow(x, t.q**k + 1) == K.one
        y = K.pow(x, (t.q**k + 1) // 2)
    else:
        assert K.is_in_subfield(x, t.f * deg)
        y = K.pow(x, (t.q**deg - 1) // 2)
    assert y in (K.one, minus_one)
    return 1 if y == K.one else -1


@pytest.mark.parametrize("family,q,twist", [
    ("GL(2)", 3, "coxeter"), ("GL(3)", 3, "coxeter"), ("GL(4)", 3, "coxeter"), ("GL(3)", 5, "1"),
    ("G2", 3, "coxeter"), ("Sp(4)", 3, "coxeter"), ("SL(3)", 5, "coxeter"), ("GL(2)", 9, "coxeter"),
    ("SO(5)", 3, "2"), ("GL(3)", 7, "id"),
])
def test_orbit_signs_match_field_powers(family, q, twist):
    t = torus(family, q, twist)
    step = max(1, t.order // 400)
    coords = t.all_coords()[:, ::step]
    for col in coords.T:
        gamma = t.element(tuple(int(c) for c in col))
        for k in range(len(t.orbit_report.orbits)):
            assert epsilon_alpha(t, k, gamma, strict=False) == field_sign(t, k, gamma)


def test_gl2_generator_sign():
    # gamma generates F_9^x, so alpha(gamma) = gamma^(1-q) generates the norm-one group
    t = torus("GL(2)", 3)
    gamma = t.element((1,))
    assert field_sign(t, 0, gamma) == -1
    assert epsilon_alpha(t, 0, gamma) == -1
    assert epsilon_ram(t, origin(t.datum), 2, gamma) == -1
    assert epsilon_ram(t, origin(t.datum), 1, gamma) == 1


def test_sign_domain_errors():
    t = torus("GL(2)", 3)
    with pytest.raises(DomainError):
        epsilon_alpha(t, 0, t.identity())
    with pytest.raises(DomainError):
        epsilon_alpha(torus("GL(2)", 4), 0, t.identity())


def test_level_root_sets():
    d = build_root_datum("GL(2)")
    x = origin(d)
    assert level_root_set(d, None, x, 1) == frozenset()
    assert level_root_set(d, None, x, 2) == frozenset(range(2))
    half = building_point(d, [Fraction(1, 2), 0])
    assert level_root_set(d, None, half, 1) == frozenset(range(2))
    assert level_root_set(d, None, half, 2) == frozenset()
    assert level_root_set(d, None, x, Fraction(4, 1)) == frozenset(range(2))
    with pytest.raises(DomainError):
        level_root_set(d, None, x, 0)


def test_building_points():
    d = build_root_datum("SL(3)")
    assert building_point(d, "coxeter_vertex").coordinates == origin(d).coordinates
    b = barycenter(d)
    h = Fraction(d.num_roots, len(d.simple))
    assert h == 3
    for i in d.simple:
        assert b.value(d.roots[i]) == 1 / h
    assert not b.hyperspecial_like
    with pytest.raises(DomainError):
        building_point(d, "nowhere")
    with pytest.raises(DomainError):
        building_point(d, [0, 0, 0])


@pytest.mark.parametrize("n,q", [(2, 3), (3, 3), (4, 3), (5, 3), (3, 5)])
def test_e_tilde_at_origin(n, q):
    t = torus(f"GL({n})", q)
    x = origin(t.datum)
    coords = t.all_coords(cap=10**5)[:, :200]
    for col in coords.T:
        g = t.element(tuple(int(c) for c in col))
        if not t.is_vreg(g):
            with pytest.raises(DomainError):
                e_tilde(t, x, 2, g)
            continue
        assert e_tilde(t, x, 2, g) == (-1) ** (n - 1)
        assert e_tilde(t, x, 1, g) == 1


def _sweep(ns=(2, 3, 4), qs=(3, 5), depth=3):
    for n in ns:
        for q in qs:
            t = torus(f"GL({n})", q)
            for chain, jumps, dep in gl_jump_signatures(n, depth):
                yield t, chain, jumps, dep


@pytest.mark.parametrize("n", [2, 3, 4])
def test_ram_sign_is_a_central_invariant_homomorphism(n):
    for t, chain, jumps, depth in _sweep(ns=(n,), qs=(3,)):
        howe = howe_jumps(gl_signature_character(t, chain, jumps, depth))
        x = origin(t.datum)
        char = epsilon_ram_character(howe, t, x)
        coords = t.all_coords()
        bits = ram_sign_bits(howe, t, x, coords)
        assert np.array_equal(char.value_bits(coords), bits)
        assert not bits[center_mask(t, coords)].any()
        for m in centralizer(t.twist, t.datum):
            A = t.coord_action(m)
            moved = (A @ coords) % np.array(t.orders).reshape(-1, 1)
            assert np.array_equal(ram_sign_bits(howe, t, x, moved), bits)


def test_ram_sign_at_generator_relation():
    # at a generator only symmetric orbits contribute: asymmetric root values are squares
    for t, chain, jumps, depth in _sweep():
        howe = howe_jumps(gl_signature_character(t, chain, jumps, depth))
        gen = np.eye(t.num_generators, dtype=np.int64)[:, :1]
        got = int(ram_sign_bits(howe, t, origin(t.datum), gen)[0])
        expected = sum(((chain[i + 1] % 2 == 0) - (chain[i] % 2 == 0)) * (r % 2 == 0)
                       for i, r in enumerate(jumps)) % 2
        assert got == expected


def test_sign_character_validation():
    t = torus("G2", 3)  # cyclic of odd order 7
    with pytest.raises(StructuralError):
        SignCharacter(t, (1,))
    assert SignCharacter(t, (0,)).trivial
    t2 = torus("GL(2)", 3)
    s = SignCharacter(t2, (1,))
    assert s.exponents == (4,) and s.value(t2.element((1,))) == -1
    assert s.to_json() == {"orders": [8], "exponents": [4]}


def test_parity_forms_agree():
    for t, chain, jumps, depth in _sweep(ns=(2, 3, 4, 6), qs=(3,), depth=4):
        howe = howe_jumps(gl_signature_character(t, chain, jumps, depth))
        rep = depth_parity(howe, t, origin(t.datum))
        assert rep.closed_form == gl_parity_closed_form(chain, jumps)
        assert rep.parity == rep.closed_form % 2 == rep.rearranged % 2


def test_parity_orbit_count_small_cases():
    # GL(2), one jump at r: all roots lie in the level set iff r is even
    t = torus("GL(2)", 3)
    for r in (1, 2, 3, 4):
        howe = howe_jumps(gl_signature_character(t, (1, 2), (r,), 4))
        assert depth_parity(howe, t, origin(t.datum)).r_value == (1 if r % 2 == 0 else 0)


@settings(max_examples=200)
@given(st.lists(st.integers(1, 6), min_size=0, max_size=4), st.integers(0, 6))
def test_rearranged_form_is_congruent_to_closed_form(steps, extra):
    chain = [1]
    for s in steps:
        chain.append(chain[-1] * (s + 1))
    jumps = list(range(1, 2 * len(steps), 2))
    depth = (jumps[-1] if jumps else 0) + extra
    closed = gl_parity_closed_form(chain, jumps)
    rearranged = gl_parity_rearranged(chain, jumps, depth)
    assert (closed - rearranged) % 2 == 0
    if not jumps:
        assert closed == rearranged == 0


def test_epsilon_closed_form_values():
    assert gl_epsilon_closed_form((1, 3), (2,)) == -1
    assert gl_epsilon_closed_form((1, 3), (1,)) == 1
    assert gl_epsilon_closed_form((1, 2, 4), (2, 3)) == -1
    assert gl_epsilon_closed_form((1,), ()) == 1


def test_depth_parity_at_non_integral_point():
    t = torus("GL(2)", 3)
    howe = howe_jumps(gl_signature_character(t, (1, 2), (1,), 1))
    x = BuildingPoint((Fraction(1, 2), Fraction(0)))
    rep = depth_parity(howe, t, x)
    assert rep.closed_form is None and rep.r_value == 1
    assert level_space(t).dim == 2
