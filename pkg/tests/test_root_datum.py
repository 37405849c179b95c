import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from vreglab.errors import DomainError, InvalidDatumError
from vreglab.root_datum import (
    RootDatum,
    build_root_datum,
    centralizer,
    classify_orbits,
    contragredient,
    coxeter_twist,
    identity_twist,
    load_datum,
    mat_mul,
    pair,
    permutation_word,
    twist_from_permutation,
    twist_from_spec,
    weyl_group,
)

# (family, number of roots, |W|, number of conjugacy classes); textbook values
KNOWN = [
    ("GL(2)", 2, 2, 2),
    ("GL(3)", 6, 6, 3),
    ("GL(4)", 12, 24, 5),
    ("GL(5)", 20, 120, 7),
    ("SL(3)", 6, 6, 3),
    ("Sp(4)", 8, 8, 5),
    ("SO(5)", 8, 8, 5),
    ("Sp(6)", 18, 48, 10),
    ("SO(8)", 24, 192, 13),
    ("G2", 12, 12, 6),
]


@pytest.mark.parametrize("family,roots,order,classes", KNOWN)
def test_family_invariants(family, roots, order, classes):
    d = build_root_datum(family)
    assert d.num_roots == roots
    w = weyl_group(d)
    assert len(w) == order
    assert len(w.conjugacy_classes()) == classes
    assert sum(len(c) for c in w.conjugacy_classes()) == order


@pytest.mark.parametrize("family", [k[0] for k in KNOWN])
def test_pairing_and_weyl_preserve_roots(family):
    d = build_root_datum(family)
    for a, c in zip(d.roots, d.coroots):
        assert pair(a, c) == 2
    for m in weyl_group(d).matrices:
        perm = d.root_permutation(m)
        assert sorted(perm) == list(range(d.num_roots))


def test_coxeter_on_gl_shifts_basis():
    d = build_root_datum("GL(4)")
    m = coxeter_twist(d).matrix
    for i in range(4):
        e = [int(k == i) for k in range(4)]
        image = [sum(m[r][s] * e[s] for s in range(4)) for r in range(4)]
        assert image == [int(k == (i + 1) % 4) for k in range(4)]
    assert coxeter_twist(d).order == 4


@pytest.mark.parametrize("n", range(2, 7))
def test_gl_coxeter_centralizer_is_cyclic_of_order_n(n):
    d = build_root_datum(f"GL({n})")
    assert len(centralizer(coxeter_twist(d), d)) == n


def test_centralizers_small():
    g2 = build_root_datum("G2")
    assert len(centralizer(coxeter_twist(g2), g2)) == 6
    d = build_root_datum("Sp(4)")
    assert len(centralizer(identity_twist(d), d)) == 8


def test_centralizer_rejects_outer_twist():
    d = build_root_datum("GL(3)")
    outer = twist_from_spec(d, "matrix:[[0,0,-1],[0,-1,0],[-1,0,0]]")
    with pytest.raises(DomainError):
        centralizer(outer, d)
    assert len(centralizer(outer, d, allow_outer=True)) >= 1


def _gl_orbit_oracle(n):
    # roots e_i - e_j under i -> i+1 mod n: orbits are indexed by k = j - i mod n
    orbits = n - 1
    symmetric = 1 if n % 2 == 0 else 0
    return {"orbits": orbits, "asymmetric_pairs": (orbits - symmetric) // 2,
            "symmetric_unramified": symmetric}


@pytest.mark.parametrize("n", range(2, 11))
def test_gl_coxeter_orbit_counts(n):
    d = build_root_datum(f"GL({n})")
    report = classify_orbits(d, coxeter_twist(d))
    assert report.counts() == _gl_orbit_oracle(n)
    assert set(report.degree_alpha) == {n}


def test_g2_coxeter_orbits():
    d = build_root_datum("G2")
    report = classify_orbits(d, coxeter_twist(d))
    assert len(report.orbits) == 2
    assert set(report.classification) == {"symmetric_unramified"}


def _classes_strategy():
    fams = ["GL(3)", "GL(4)", "Sp(4)", "G2", "SL(3)"]
    return st.sampled_from(fams).flatmap(
        lambda f: st.tuples(st.just(f), st.integers(0, len(weyl_group(build_root_datum(f))) - 1),
                            st.integers(0, len(weyl_group(build_root_datum(f))) - 1)))


@settings(max_examples=60, deadline=None)
@given(_classes_strategy())
def test_orbit_report_partitions_and_is_conjugation_equivariant(case):
    family, i, j = case
    d = build_root_datum(family)
    w = weyl_group(d)
    twist = type(coxeter_twist(d))(w.matrices[i])
    report = classify_orbits(d, twist)
    seen = sorted(k for orb in report.orbits for k in orb)
    assert seen == list(range(d.num_roots))
    assert sorted(k for orb in report.paired_orbits for k in orb) == list(range(d.num_roots))
    # conjugating the twist by an element of W preserves the orbit statistics
    g = w.matrices[j]
    ginv = w.matrices[w.inverse(j)]
    conj = type(twist)(mat_mul(mat_mul(g, twist.matrix), ginv))
    other = classify_orbits(d, conj)
    assert other.counts() == report.counts()
    assert sorted(other.degree_alpha) == sorted(report.degree_alpha)


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(range(5))))
def test_permutation_twist_matches_permutation(perm):
    d = build_root_datum("GL(5)")
    m = twist_from_permutation(d, perm).matrix
    for j in range(5):
        col = [m[r][j] for r in range(5)]
        assert col == [int(r == perm[j]) for r in range(5)]
    assert all(1 <= a <= 4 for a in permutation_word(perm))


def test_class_twists_cover_all_classes():
    d = build_root_datum("GL(4)")
    orders = sorted(twist_from_spec(d, f"class:{k}").order for k in range(5))
    assert orders == [1, 2, 2, 3, 4]
    with pytest.raises(DomainError):
        twist_from_spec(d, "class:5")


def test_word_twist():
    d = build_root_datum("SL(3)")
    assert twist_from_spec(d, "1,2").matrix == coxeter_twist(d).matrix
    assert twist_from_spec(d, "1,1").matrix == identity_twist(d).matrix
    with pytest.raises(DomainError):
        twist_from_spec(d, "3")


def test_contragredient_of_weyl_elements_is_integral():
    d = build_root_datum("G2")
    for m in weyl_group(d).matrices:
        n = contragredient(m)
        assert all(isinstance(x, int) for row in n for x in row)


def test_json_round_trip(tmp_path):
    d = build_root_datum("Sp(4)")
    again = RootDatum.from_json(json.dumps(d.to_json()))
    assert again.roots == d.roots and again.coroots == d.coroots and again.simple == d.simple
    path = tmp_path / "sp4.json"
    path.write_text(json.dumps(d.to_json()))
    assert load_datum(str(path)).roots == d.roots


@pytest.mark.parametrize("bad", ["GL(0)", "Sp(3)", "XY(2)", "GL", "SO(1)", "SL(1)"])
def test_bad_family_names(bad):
    with pytest.raises(InvalidDatumError):
        build_root_datum(bad)


def test_invalid_datum_rejected():
    with pytest.raises(InvalidDatumError):
        RootDatum(1, ((1,), (-1,)), ((1,), (-1,)), (0,))  # pairing is 1, not 2
    with pytest.raises(InvalidDatumError):
        RootDatum(1, ((2,),), ((1,),), (0,))  # not closed under negation


def test_closed_subsets():
    d = build_root_datum("GL(3)")
    a = d.index((1, -1, 0))
    b = d.index((0, 1, -1))
    assert d.is_closed_subset({a, d.negative(a)})
    assert not d.is_closed_subset({a, d.negative(a), b, d.negative(b)})
    assert d.is_closed_subset(range(d.num_roots))


def test_weyl_order_formula_type_a():
    for n in range(2, 6):
        assert len(weyl_group(build_root_datum(f"SL({n})"))) == math.factorial(n)
