"""Field tower tests against independently derived constants.

The moduli and generator facts asserted here were computed by hand from the
canonical construction (lexicographically least monic irreducible, least
generator in coefficient order) before the implementation existed.
"""

import random

import pytest

from dlcusp.gf import (
    TorusCharacter,
    build_field,
    discrete_log,
    legendre_symbol,
)


def test_rejects_bad_orders():
    for q in (4, 6, 8, 12, 1, 0, -3):
        with pytest.raises(ValueError):
            build_field(q, degrees=(1, 2))


def test_prime_power_base_field():
    t = build_field(9, degrees=(1,))
    # base F_9 = F_3[y]/(y^2 + 1), codes are base-3 digit strings
    assert t.p == 3 and t.f == 2 and t.q == 9
    assert t.base_mul(3, 3) == 2  # y * y = -1
    assert t.smallest_nonsquare() == 4


# level-2 modulus, generator, and generator order for each acceptance field
FROZEN = {
    3: {"modulus": (1, 0, 1), "generator": (1, 1), "order": 8, "nonsquare": 2},
    5: {"modulus": (1, 1, 1), "generator": (1, 3), "order": 24, "nonsquare": 2},
    7: {"modulus": (1, 0, 1), "generator": (1, 2), "order": 48, "nonsquare": 3},
}


@pytest.mark.parametrize("q", sorted(FROZEN))
def test_frozen_tower_constants(q):
    t = build_field(q, degrees=(1, 2))
    facts = FROZEN[q]
    assert t.modulus(2) == facts["modulus"]
    assert t.generator(2).coeffs == facts["generator"]
    assert t.order(2) == facts["order"]
    assert t.smallest_nonsquare() == facts["nonsquare"]
    assert t.order(1) == q - 1


def test_frozen_generator_powers_q3():
    t = build_field(3, degrees=(1, 2))
    g = t.element(2, (1, 1))
    assert (g ** 4).coeffs == (2, 0)  # (1+y)^4 = -1
    assert (g ** 8).coeffs == (1, 0)


def test_frozen_generator_powers_q5():
    t = build_field(5, degrees=(1, 2))
    g = t.generator(2)
    assert (g ** 12).coeffs == (4, 0)  # the half-order power is -1


def test_frozen_generator_powers_q7():
    t = build_field(7, degrees=(1, 2))
    g = t.generator(2)
    assert (g ** 8).coeffs == (5, 0)
    assert (g ** 16).coeffs == (4, 0)
    assert (g ** 24).coeffs == (6, 0)


@pytest.mark.parametrize("q", (3, 5, 7))
def test_element_counts_and_orders(q):
    t = build_field(q, degrees=(1, 2))
    assert len(list(t.elements(1))) == q
    assert len(list(t.units(1))) == q - 1
    assert len(list(t.elements(2))) == q * q
    assert len(list(t.units(2))) == q * q - 1
    assert list(t.elements(2))[0].is_zero()


def test_elements_are_lexicographic():
    t = build_field(3, degrees=(1, 2))
    coeffs = [x.coeffs for x in t.elements(2)]
    assert coeffs == sorted(coeffs)
    assert coeffs[:4] == [(0, 0), (0, 1), (0, 2), (1, 0)]


def test_discrete_log_roundtrip_exhaustive():
    for q in (3, 5):
        t = build_field(q, degrees=(1, 2))
        g = t.generator(2)
        n = t.order(2)
        seen = set()
        for x in t.units(2):
            k = t.discrete_log(x)
            assert 0 <= k < n
            assert g ** k == x
            seen.add(k)
        assert seen == set(range(n))
        assert t.discrete_log(g) == 1
        assert t.discrete_log(t.one(2)) == 0


def test_discrete_log_of_zero_rejected():
    t = build_field(3, degrees=(1, 2))
    with pytest.raises(ValueError):
        t.discrete_log(t.zero(2))


def test_frobenius_is_dlog_multiplication():
    t = build_field(3, degrees=(1, 2))
    n = t.order(2)
    for x in t.units(2):
        assert t.discrete_log(t.frobenius(x)) == (3 * t.discrete_log(x)) % n
    assert t.frobenius(t.zero(2)).is_zero()


def test_frobenius_orbit_pairs_q3():
    # unit exponent pairs {k, 3k mod 8} that are not Frobenius fixed
    t = build_field(3, degrees=(1, 2))
    pairs = set()
    for k in range(8):
        if (3 * k) % 8 != k:
            pairs.add(frozenset({k, (3 * k) % 8}))
    assert pairs == {frozenset({1, 3}), frozenset({2, 6}), frozenset({5, 7})}
    del t


def test_field_axioms_exhaustive_pairs_q3():
    t = build_field(3, degrees=(1, 2))
    xs = list(t.elements(2))
    one, zero = t.one(2), t.zero(2)
    for x in xs:
        assert x + zero == x
        assert x * one == x
        assert x - x == zero
        assert (-x) + x == zero
        if not x.is_zero():
            assert x * x.inverse() == one
            assert (one / x) * x == one
    for x in xs:
        for y in xs:
            assert x + y == y + x
            assert x * y == y * x


def test_field_axioms_sampled_triples():
    t = build_field(5, degrees=(1, 2))
    xs = list(t.elements(2))
    rng = random.Random(7)
    for _ in range(500):
        x, y, z = (rng.choice(xs) for _ in range(3))
        assert (x + y) + z == x + (y + z)
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z


def test_pow_matches_repeated_multiplication():
    t = build_field(7, degrees=(1, 2))
    g = t.generator(2)
    acc = t.one(2)
    for k in range(20):
        assert g ** k == acc
        acc = acc * g
    assert g ** (-1) == g.inverse()


def test_cross_level_arithmetic_rejected():
    t = build_field(3, degrees=(1, 2))
    with pytest.raises(ValueError):
        t.element(1, (1,)) + t.element(2, (1, 0))
    with pytest.raises(ValueError):
        t.element(2, (1,))  # wrong coefficient count


def test_cross_tower_arithmetic_rejected():
    a = build_field(3, degrees=(1, 2))
    b = build_field(3, degrees=(1, 2))
    with pytest.raises(ValueError):
        a.one(2) + b.one(2)


def test_embed_is_a_field_hom():
    t = build_field(3, degrees=(1, 2))
    for a in range(3):
        for b in range(3):
            ea = t.embed(a, 2)
            eb = t.embed(b, 2)
            assert ea + eb == t.embed(t.base_add(a, b), 2)
            assert ea * eb == t.embed(t.base_mul(a, b), 2)
    assert t.embed(t.element(1, (2,)), 2) == t.embed(2, 2)


def test_scalar_reduces_mod_p():
    t = build_field(5, degrees=(1, 2))
    assert t.scalar(2, 7) == t.embed(2, 2)
    assert t.scalar(2, -1) == t.embed(4, 2)


def test_sqrt_on_all_squares():
    for q in (3, 7):
        t = build_field(q, degrees=(1, 2))
        for x in t.units(2):
            if t.discrete_log(x) % 2 == 0:
                r = t.sqrt(x)
                assert r * r == x
            else:
                with pytest.raises(ValueError):
                    t.sqrt(x)
        assert t.sqrt(t.zero(2)).is_zero()


def test_base_arithmetic_q9():
    t = build_field(9, degrees=(1, 2))
    # inverses in the 9-element base field
    for a in range(1, 9):
        assert t.base_mul(a, t.base_inv(a)) == 1
    assert t.base_neg(0) == 0
    assert t.base_sub(1, 3) == t.base_add(1, t.base_neg(3))


def test_legendre_symbol_q7():
    t = build_field(7, degrees=(1,))
    signs = {a: legendre_symbol(t.element(1, (a,))) for a in range(1, 7)}
    assert signs == {1: 1, 2: 1, 4: 1, 3: -1, 5: -1, 6: -1}
    with pytest.raises(ValueError):
        legendre_symbol(t.zero(1))


def test_legendre_symbol_level2():
    t = build_field(3, degrees=(1, 2))
    g = t.generator(2)
    assert legendre_symbol(g) == -1
    assert legendre_symbol(g * g) == 1


def test_character_log_value_is_a_hom():
    t = build_field(3, degrees=(1, 2))
    chi = TorusCharacter(t, 2, 3)
    n = t.order(2)
    units = list(t.units(2))
    for x in units:
        for y in units:
            assert chi.log_value(x * y) == (chi.log_value(x) + chi.log_value(y)) % n
    assert chi.log_value(t.one(2)) == 0


def test_character_exponent_normalization():
    t = build_field(3, degrees=(1, 2))
    assert TorusCharacter(t, 2, 11).exponent == 3
    assert TorusCharacter(t, 2, -1).exponent == 7
    chi = TorusCharacter(t, 2, 5)
    assert chi.inverse().exponent == 3
    assert chi.frobenius_twist().exponent == 7


def test_general_position_census_q3():
    t = build_field(3, degrees=(1, 2))
    gp = {k for k in range(8) if TorusCharacter(t, 2, k).is_general_position()}
    assert gp == {1, 2, 3, 5, 6, 7}


def test_character_trivial_on_base_units():
    t = build_field(3, degrees=(1, 2))
    base = [t.embed(a, 2) for a in (1, 2)]
    for k in range(8):
        chi = TorusCharacter(t, 2, k)
        assert chi.is_trivial_on(base) == (k % 2 == 0)


def test_character_value_on_unit_circle():
    t = build_field(5, degrees=(1, 2))
    chi = TorusCharacter(t, 2, 7)
    for x in list(t.units(2))[:10]:
        v = chi.value(x)
        assert abs(abs(v) - 1.0) < 1e-12
    assert abs(chi.value(t.one(2)) - 1.0) < 1e-12


def test_module_level_helpers():
    t = build_field(3, degrees=(1, 2))
    g = t.generator(2)
    assert discrete_log(g) == 1
    chi = TorusCharacter(t, 2, 2)
    from dlcusp.gf import character_eval

    assert abs(character_eval(chi, g) - chi.value(g)) == 0


def test_deterministic_rebuild():
    a = build_field(7, degrees=(1, 2))
    b = build_field(7, degrees=(1, 2))
    assert a.modulus(2) == b.modulus(2)
    assert a.generator(2).coeffs == b.generator(2).coeffs
    assert [x.coeffs for x in a.units(2)] == [x.coeffs for x in b.units(2)]
