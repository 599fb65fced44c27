"""Exact L-value layer: Bernoulli machinery, partial zetas, ray class
levels, approximants, characters, and the layer-norm congruence."""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from padiclog import zeta as Z
from padiclog.coeffs import IntegralityFailure


# ----------------------------------------------------------------- bernoulli


def test_bernoulli_against_sympy():
    # sympy switched to the B_1 = +1/2 convention; we use the
    # classical minus sign, and every other index agrees
    assert Z.bernoulli_number(1) == Fraction(-1, 2)
    for k in [0] + list(range(2, 22)):
        assert Z.bernoulli_number(k) == Fraction(*sympy.bernoulli(k).as_numer_denom())


def test_bernoulli_two_routes_agree():
    for k in range(0, 30):
        assert Z.bernoulli_number(k) == Z.bernoulli_akiyama(k)


@given(st.integers(1, 12), st.fractions(max_denominator=20))
@settings(max_examples=40)
def test_bernoulli_poly_against_sympy(k, x):
    ours = Z.bernoulli_poly_eval(k, Fraction(x))
    ref = sympy.bernoulli(k, sympy.Rational(x))
    assert ours == Fraction(*sympy.nsimplify(ref).as_numer_denom())


def test_bernoulli_poly_generating_function_route():
    for k in range(1, 10):
        for x in (Fraction(1, 3), Fraction(2, 5), Fraction(7)):
            assert Z.bernoulli_poly_eval(k, x) == Z.bernoulli_poly_eval_gf(k, x)


def test_hurwitz_against_sympy():
    # our normalization satisfies value(k, a, M) = M^(k-1) * zeta(1-k, a/M)
    for k, a, M in [(2, 1, 3), (4, 1, 2), (4, 3, 5), (6, 2, 9), (8, 7, 15)]:
        ref = sympy.nsimplify(sympy.zeta(1 - k, sympy.Rational(a, M)))
        ref = Fraction(*ref.as_numer_denom()) * M ** (k - 1)
        assert Z._hurwitz_neg(k, a, M) == ref


# ------------------------------------------------------------- partial zetas


def test_partial_zeta_frozen_values():
    # zeta with the Euler factor at 3 removed, at s = -1 and s = -3:
    # (1-3)*(-1/12) and (1-27)*(1/120)
    assert Z.partial_zeta(1, 1, (3,), 2) == Fraction(1, 6)
    assert Z.partial_zeta(1, 1, (3,), 4) == Fraction(-13, 60)


def test_partial_zeta_dual_routes():
    cases = [
        (1, 1, (3,), 2), (1, 1, (3,), 6),
        (2, 5, (3, 5), 4), (4, 15, (3, 5), 2),
        (7, 9, (3,), 4), (2, 9, (3, 7), 6),
    ]
    for a, M, sigma, k in cases:
        assert Z.partial_zeta(a, M, sigma, k, "euler") == Z.partial_zeta(
            a, M, sigma, k, "moebius"
        )


def test_partial_zeta_sums_to_smoothed_zeta():
    # the class sums are two-sided (n = +-a), so the single class of 1
    # mod 4 covers every odd integer: its value is the zeta function
    # with the Euler factor at 2 removed
    for k in (2, 4, 6):
        ref = (1 - Fraction(2) ** (k - 1)) * (-Z.bernoulli_number(k) / k)
        assert Z.partial_zeta(1, 4, (2,), k) == ref
        # 3 = -1 mod 4 names the same class
        assert Z.partial_zeta(3, 4, (2,), k) == ref


def test_euler_factor_removal_is_order_free():
    a, M, k = 2, 7, 4
    assert Z.partial_zeta(a, M, (3, 5), k) == Z.partial_zeta(a, M, (5, 3), k)


# --------------------------------------------------------- ray class levels


def test_level_sizes_and_conductors():
    expected = {
        (1, -1): (1, 1), (1, 0): (1, 3), (1, 1): (3, 9), (1, 2): (9, 27),
        (5, -1): (2, 5), (5, 0): (4, 15), (5, 1): (12, 45), (5, 2): (36, 135),
    }
    for (F, j), (n, M) in expected.items():
        lv = Z.RayClassLevel(3, F, j)
        assert (lv.n, lv.M) == (n, M), (F, j)
        assert lv.f == 1
        assert lv.group().is_cyclic()


def test_level_reps_are_reduced():
    lv = Z.RayClassLevel(3, 1, 2)
    assert lv.reps == [1, 2, 4, 5, 7, 8, 10, 11, 13]
    # plus-minus identification: n and M - n share a class
    for n in range(1, 27):
        if n % 3 == 0:
            continue
        assert lv.class_of(n) == lv.class_of(27 - n)


def test_kappa_is_multiplicative():
    # only even powers are well defined on +- classes
    lv = Z.RayClassLevel(3, 5, 1)
    for i in range(lv.n):
        for t in range(lv.n):
            lhs = lv.kappa_pow(lv.mul(i, t), 2)
            rhs = (lv.kappa_pow(i, 2) * lv.kappa_pow(t, 2)) % 3**lv.prec
            assert lhs == rhs
    with pytest.raises(ValueError):
        lv.kappa_pow(0, 1)


def test_omega_exponents_frozen():
    assert Z.RayClassLevel(3, 1, 1).omega_exponents() == [0, 2, 1]
    assert Z.RayClassLevel(3, 5, 1).omega_exponents() == [
        0, 1, 2, 1, 0, 1, 2, 2, 1, 0, 0, 2,
    ]
    # no p-part at level 0 for F = 1: the character is trivial
    assert Z.RayClassLevel(3, 1, 0).omega_exponents() == [0]


def test_omega_exponents_define_a_character():
    for F in (1, 5):
        lv = Z.RayClassLevel(3, F, 1)
        om = lv.omega_exponents()
        for i in range(lv.n):
            for t in range(lv.n):
                assert om[lv.mul(i, t)] == (om[i] + om[t]) % 3


def test_projection_and_frobenius_between_levels():
    hi = Z.RayClassLevel(3, 5, 1)
    lo = Z.RayClassLevel(3, 5, 0)
    proj = hi.project_to(lo)
    # projection is a surjective homomorphism
    assert set(proj) == set(range(lo.n))
    for i in range(hi.n):
        for t in range(hi.n):
            assert proj[hi.mul(i, t)] == lo.mul(proj[i], proj[t])
    frob = hi.frobenius_from(lo)
    # the p-power map section: projecting back recovers the p-th power
    for x in range(lo.n):
        assert proj[frob[x]] == lo.class_pow(x, 3)


def test_frobenius_from_trivial_level():
    hi = Z.RayClassLevel(3, 1, 1)
    assert hi.frobenius_from(Z.RayClassLevel(3, 1, 0)) == [0]


# -------------------------------------------------- locally constant layers


def test_translate_round_trip():
    lv = Z.RayClassLevel(3, 5, 1)
    f = Z.LocallyConstantFn.delta(lv, 3)
    for i in range(lv.n):
        g = f.translate(i).translate(lv.inv(i))
        assert g.values == f.values


def test_compose_classmap_pulls_back():
    hi = Z.RayClassLevel(3, 5, 1)
    lo = Z.RayClassLevel(3, 5, 0)
    f = Z.LocallyConstantFn.delta(lo, 1)
    pulled = f.compose_classmap(hi, hi.project_to(lo))
    for i in range(hi.n):
        assert pulled.values[i] == f.values[hi.project_to(lo)[i]]


def test_L_sigma_of_constant_function():
    lv = Z.RayClassLevel(3, 1, 1)
    one = Z.LocallyConstantFn.constant(lv, 1)
    tot = sum(Z.partial_zeta(r, lv.M, (3,), 4) for r in lv.reps)
    assert Z.L_sigma(one, (3,), 4) == tot


def test_delta_u_frozen_value():
    # the one-class instance: delta of the trivial class at weight 4,
    # smoothing unit 1 + 3
    inst = Z.ZetaInstance(3, 1, 0, 4, (3,))
    lv = inst.level()
    eps = Z.LocallyConstantFn.delta(lv, 0)
    val = Z.delta_u(eps, inst.sigma, lv.n_u, 4)
    assert val == Fraction(221, 4)
    # the level works mod p^(f+j) = 3 here, and 221/4 = 2 mod 3
    assert lv.prec == 1
    assert Z.delta_u_reduced(eps, inst.sigma, lv.n_u, 4, lv.prec) == 2
    assert Z.delta_u_reduced(eps, inst.sigma, lv.n_u, 4, 3) == (
        221 * pow(4, -1, 27)
    ) % 27


def test_delta_u_is_p_integral_across_classes():
    lv = Z.RayClassLevel(3, 5, 1)
    for i in range(lv.n):
        eps = Z.LocallyConstantFn.delta(lv, i)
        val = Z.delta_u(eps, (3, 5), lv.n_u, 4)
        assert val.denominator % 3 != 0


# ------------------------------------------------------- instances + checks


def test_instance_normalizes_sigma():
    inst = Z.ZetaInstance(3, 5, 1, 4, ())
    assert inst.sigma == (3, 5)
    inst2 = Z.ZetaInstance(3, 1, 0, 4, (7,))
    assert inst2.sigma == (3, 7)


def test_instance_rejects_odd_weight():
    with pytest.raises(ValueError):
        Z.ZetaInstance(3, 1, 0, 3, ())


def test_approximant_frozen_value():
    inst = Z.ZetaInstance(3, 1, 0, 4, (3,))
    assert Z.rw_approximant(inst) == {0: 2}


def test_j_compatibility():
    for F in (1, 5):
        hi = Z.ZetaInstance(3, F, 1, 4, ())
        lo = Z.ZetaInstance(3, F, 0, 4, ())
        v = Z.check_j_compatibility(hi, lo)
        assert v.passed, v.detail


def test_k_independence():
    for F in (1, 5):
        inst = Z.ZetaInstance(3, F, 1, 4, ())
        v = Z.check_k_independence(inst, 16)
        assert v.passed, v.detail
        assert v.m == 2  # f + j digits


def test_interpolation():
    for F, j in ((1, 1), (5, 0), (5, 1)):
        inst = Z.ZetaInstance(3, F, j, 4, ())
        v = Z.check_interpolation(inst)
        assert v.passed, v.detail


# ----------------------------------------------------- characters and roots


def test_character_tables_frozen():
    lv1 = Z.RayClassLevel(3, 1, 1)
    got = sorted((n, tuple(int(v) for v in e)) for n, e in Z.characters(lv1))
    assert got == [(3, (0, 0, 0)), (3, (0, 1, 2)), (3, (0, 2, 1))]
    assert len(Z.characters(Z.RayClassLevel(3, 5, 1))) == 12


def test_character_orthogonality():
    # a nontrivial character sums to zero over the group
    for F in (1, 5):
        lv = Z.RayClassLevel(3, F, 1)
        for n, e in Z.characters(lv):
            s = Z.CycloRat(n)
            for i in range(lv.n):
                s = s + Z.CycloRat.root_power(n, int(e[i]))
            if all(int(v) == 0 for v in e):
                assert s == Z.CycloRat(n, [Fraction(lv.n)] + [Fraction(0)] * (len(s.coeffs) - 1))
            else:
                assert s.is_zero()


def test_cyclotomic_poly_frozen():
    assert Z.cyclotomic_poly(12) == (1, 0, -1, 0, 1)
    assert Z.cyclotomic_poly(3) == (1, 1, 1)
    assert Z.cyclotomic_poly(1) == (-1, 1)


def test_cyclotomic_product_over_divisors():
    # the product of Phi_d over d | 12 is x^12 - 1
    def polymul(a, b):
        out = [0] * (len(a) + len(b) - 1)
        for i, c in enumerate(a):
            for j, d in enumerate(b):
                out[i + j] += c * d
        return out

    acc = [1]
    for d in (1, 2, 3, 4, 6, 12):
        acc = polymul(acc, list(Z.cyclotomic_poly(d)))
    assert acc == [-1] + [0] * 11 + [1]


def test_cyclorat_root_relations():
    w = Z.CycloRat.root_power(3, 1)
    s = w + Z.CycloRat.root_power(3, 2) + Z.CycloRat(3, [Fraction(1)])
    assert s.is_zero()
    assert Z.CycloRat.root_power(6, 3) == Z.CycloRat(6, [Fraction(-1)])


# ------------------------------------------------------ layer norm identity


def test_layer_norm_frozen_value():
    # the product of the level-1 approximant with its two twists by
    # the order-3 character; supported on cube classes, equal mod 9 to
    # the exact smoothed value of the lower field
    lv = Z.RayClassLevel(3, 1, 1)
    assert Z.layer_norm_approximant(lv, (3,), 4) == {0: 8, 1: 0, 2: 0}


def test_layer_norm_matches_exact_character_product():
    # independent route: expand the product of L-values over all
    # characters of the level; it collapses to a rational, and the
    # smoothed combination reduces to the same residue
    lv = Z.RayClassLevel(3, 1, 1)
    prod = None
    for n, e in Z.characters(lv):
        Lpsi = Z.CycloRat(n)
        for i, r in enumerate(lv.reps):
            Lpsi = Lpsi + Z.CycloRat.root_power(n, int(e[i])) * Z.partial_zeta(
                r, lv.M, (3,), 4
            )
        prod = Lpsi if prod is None else prod * Lpsi
    assert prod.coeffs[1:] == (Fraction(0),) * (len(prod.coeffs) - 1)
    zeta_lower = prod.coeffs[0]
    assert zeta_lower == Fraction(-2587, 45)
    smoothed = (1 - Fraction(lv.n_u) ** 12) * zeta_lower
    assert smoothed == 964503449
    assert smoothed % 9 == Z.layer_norm_approximant(lv, (3,), 4)[0]


def test_abelian_congruence_instances():
    for F in (1, 5):
        for j in (0, 1, 2):
            for k in (4, 16):
                v = Z.check_abelian_congruence(Z.ZetaInstance(3, F, j, k, ()))
                assert v.passed, (F, j, k, v.detail)


# ------------------------------------------------------------ value tables


def test_table_round_trip():
    inst = Z.ZetaInstance(3, 5, 1, 4, ())
    text = Z.write_delta_table(inst, (4, 16))
    table = Z.read_delta_table(text)
    assert table["header"] == {"F": 5, "p": 3, "j": 1, "sigma": (3, 5), "u": 16}
    assert len(table["rows"]) == 24  # 12 classes x 2 weights
    v = Z.check_table_k_independence(table, 4, 16)
    assert v.passed, v.detail
    assert v.m == 2


def test_table_rejects_non_integral_value():
    inst = Z.ZetaInstance(3, 1, 1, 4, ())
    text = Z.write_delta_table(inst, (4,))
    lines = text.splitlines()
    # find a record line and give it a denominator divisible by p
    for i, line in enumerate(lines):
        parts = line.split()
        if len(parts) == 4 and not line.startswith("#"):
            parts[3] = str(int(parts[3]) * 3)
            lines[i] = " ".join(parts)
            break
    with pytest.raises((ValueError, IntegralityFailure)):
        Z.read_delta_table("\n".join(lines))


def test_table_rejects_malformed_header():
    with pytest.raises(ValueError):
        Z.read_delta_table("F_cond=5 p=3\n1 4 1 1\n")
