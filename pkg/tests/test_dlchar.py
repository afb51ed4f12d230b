"""Conjugacy tables and cuspidal characters of GL2, tested against the
classical count (q^2 - 1 classes in four families) and hand-expanded value
maps at q = 3."""

import random

import pytest

from dlcusp.dlchar import (
    ClassFunction,
    ConjugacyTable,
    conjugacy_classes,
    cuspidal_character,
    general_position_exponents,
)
from dlcusp.errors import ConfigError
from dlcusp.groups import MatrixGroup


@pytest.mark.parametrize("q", (3, 5, 7))
def test_class_census(q):
    g = MatrixGroup("gl2", q)
    table = conjugacy_classes(g)
    by_kind = {}
    for c in table.classes:
        by_kind.setdefault(c.kind, []).append(c)
    assert len(by_kind["central"]) == q - 1
    assert len(by_kind["unipotent"]) == q - 1
    assert len(by_kind["split"]) == (q - 1) * (q - 2) // 2
    assert len(by_kind["elliptic"]) == (q * q - q) // 2
    assert len(table.classes) == q * q - 1
    assert {c.size for c in by_kind["central"]} == {1}
    assert {c.size for c in by_kind["unipotent"]} == {q * q - 1}
    assert {c.size for c in by_kind["split"]} == {q * q + q}
    assert {c.size for c in by_kind["elliptic"]} == {q * q - q}
    assert sum(c.size for c in table.classes) == g.order


def test_table_is_cached():
    g = MatrixGroup("gl2", 3)
    assert conjugacy_classes(g) is conjugacy_classes(g)


def test_table_rejects_product_group():
    with pytest.raises(ConfigError):
        ConjugacyTable(MatrixGroup("gl2_x_gl2", 3))


def test_class_reps_classify_to_their_own_class():
    g = MatrixGroup("gl2", 5)
    table = conjugacy_classes(g)
    for i, c in enumerate(table.classes):
        assert table.class_of(c.rep) == i


def test_class_of_is_conjugation_invariant():
    g = MatrixGroup("gl2", 5)
    table = conjugacy_classes(g)
    els = g.gl2_elements()
    rng = random.Random(13)
    for _ in range(200):
        x, h = rng.choice(els), rng.choice(els)
        conj = g.mul(g.mul(h, x), g.inv(h))
        assert table.class_of(conj) == table.class_of(x)


def test_class_sizes_by_direct_count():
    g = MatrixGroup("gl2", 3)
    table = conjugacy_classes(g)
    counts = [0] * len(table.classes)
    for x in g.gl2_elements():
        counts[table.class_of(x)] += 1
    assert counts == [c.size for c in table.classes]


def test_class_key_errors():
    g = MatrixGroup("gl2", 3)
    table = conjugacy_classes(g)
    with pytest.raises(ConfigError):
        table.class_key(((1, 1), (1, 1)))


def test_general_position_pairs():
    g3 = MatrixGroup("gl2", 3)
    assert general_position_exponents(g3) == ((1, 3), (2, 6), (5, 7))
    g5 = MatrixGroup("gl2", 5)
    pairs5 = general_position_exponents(g5)
    assert len(pairs5) == 10
    assert pairs5[:3] == ((1, 5), (2, 10), (3, 15))
    for k, partner in pairs5:
        assert partner == (5 * k) % 24
        assert k == min(k, partner)
    assert len(general_position_exponents(MatrixGroup("gl2", 7))) == 21


# -- cuspidal characters ------------------------------------------------------


def test_rejects_frobenius_fixed_exponent():
    g = MatrixGroup("gl2", 3)
    for k in (0, 4):  # the exponents with 3k = k mod 8
        with pytest.raises(ConfigError):
            cuspidal_character(g, k)


def test_value_maps_q3_k1():
    g = MatrixGroup("gl2", 3)
    chi = cuspidal_character(g, 1)
    assert chi.exponent == 1 and chi.partner == 3
    table = chi.table
    by_key = dict(zip((c.key for c in table.classes), chi.chi.maps))
    assert by_key[("central", 1)] == {0: 2}
    assert by_key[("central", 2)] == {4: 2}  # dlog(-1) = 4, degree 2
    assert by_key[("unipotent", 1)] == {0: -1}
    assert by_key[("unipotent", 2)] == {4: -1}
    assert by_key[("split", (1, 2))] == {}
    assert by_key[("elliptic", 1)] == {1: -1, 3: -1}
    assert by_key[("elliptic", 2)] == {2: -1, 6: -1}
    assert by_key[("elliptic", 5)] == {5: -1, 7: -1}


def test_value_maps_q3_k2_merges_exponents():
    g = MatrixGroup("gl2", 3)
    chi = cuspidal_character(g, 2)
    by_key = dict(zip((c.key for c in chi.table.classes), chi.chi.maps))
    # 2*2 and 2*2*3 agree mod 8, so the two eigenvalue terms merge
    assert by_key[("elliptic", 2)] == {4: -2}
    assert by_key[("central", 2)] == {0: 2}
    rep = next(c.rep for c in chi.table.classes if c.key == ("elliptic", 2))
    assert abs(chi.value(rep) - 2) < 1e-12


def test_degree_and_central_values():
    for q, k in ((3, 1), (5, 7), (7, 2)):
        g = MatrixGroup("gl2", q)
        chi = cuspidal_character(g, k)
        assert chi.value(g.identity()) == q - 1
        n = g.tower.order(2)
        for z in range(1, q):
            expected = chi.central_log(z)
            got = chi.value(g.scalar(z))
            import cmath
            import math

            ref = (q - 1) * cmath.exp(2j * math.pi * expected / n)
            assert abs(got - ref) < 1e-9


def test_split_classes_vanish():
    g = MatrixGroup("gl2", 5)
    chi = cuspidal_character(g, 3)
    for c in chi.table.classes:
        if c.kind == "split":
            assert chi.value(c.rep) == 0


def test_partner_exponent_same_character():
    g = MatrixGroup("gl2", 3)
    assert cuspidal_character(g, 1).chi.maps == cuspidal_character(g, 3).chi.maps
    g5 = MatrixGroup("gl2", 5)
    assert cuspidal_character(g5, 7).chi.maps == cuspidal_character(g5, 11).chi.maps


def test_orthonormality_q3():
    g = MatrixGroup("gl2", 3)
    chis = [cuspidal_character(g, k) for k, _ in general_position_exponents(g)]
    for i, a in enumerate(chis):
        for j, b in enumerate(chis):
            got = a.chi.inner(b.chi)
            assert abs(got - (1 if i == j else 0)) < 1e-9


def test_orthogonality_sample_q7():
    g = MatrixGroup("gl2", 7)
    a = cuspidal_character(g, 2)
    b = cuspidal_character(g, 5)
    assert abs(a.chi.inner(b.chi)) < 1e-9
    assert abs(a.chi.inner(a.chi) - 1) < 1e-9


def test_inner_requires_same_table():
    a = cuspidal_character(MatrixGroup("gl2", 3), 1)
    b = cuspidal_character(MatrixGroup("gl2", 3), 1)
    with pytest.raises(ConfigError):
        a.chi.inner(b.chi)


def test_class_function_validation():
    g = MatrixGroup("gl2", 3)
    table = conjugacy_classes(g)
    with pytest.raises(ConfigError):
        ClassFunction(table, [{} for _ in range(3)])


def test_constant_function_inner():
    g = MatrixGroup("gl2", 3)
    table = conjugacy_classes(g)
    one = ClassFunction(table, [{0: 1} for _ in table.classes])
    assert abs(one.inner(one) - 1) < 1e-12


def test_json_shape():
    g = MatrixGroup("gl2", 3)
    chi = cuspidal_character(g, 5)
    blob = chi.to_json_dict()
    assert blob["q"] == 3 and blob["lambda_exponent"] == 5
    assert len(blob["classes"]) == 8
    entry = blob["classes"][0]
    assert set(entry) == {"rep", "size", "value_re", "value_im"}
    assert sum(c["size"] for c in blob["classes"]) == 48


def test_unipotent_column_sums_vanish():
    # the defining cuspidality property, checked here at one group element
    g = MatrixGroup("gl2", 5)
    chi = cuspidal_character(g, 2)
    x = ((2, 1), (1, 1))
    total = 0j
    for b in range(5):
        u = ((1, b), (0, 1))
        total += chi.value(g.mul(x, u))
    assert abs(total) < 1e-9
