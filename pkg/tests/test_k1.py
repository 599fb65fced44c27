"""Logarithms and the unit-side map family."""

import random
from fractions import Fraction

import numpy as np
import pytest

from padiclog.coeffs import IntegralityFailure, PrecisionError
from padiclog.groups import LevelGroup, parse_seed
from padiclog.k1 import (
    K1Context,
    exp_ring,
    headroom,
    integral_log,
    log_classes,
    log_ring,
    nilpotency_index,
    omega_to_ab,
)
from padiclog.rings import ClassCtx, RingCtx


def test_nilpotency_index_known_values():
    # index of nilpotency of the augmentation ideal mod p; the cyclic
    # values are (order-1)*1+1, the product values add the factors
    expected = {
        ("cyclic:3", 0): 3,
        ("cyclic:3", 1): 5,
        ("cyclic:9", 0): 9,
        ("cyclic:9", 1): 11,
        ("elem-abelian:9", 0): 5,
        ("elem-abelian:9", 1): 7,
        ("heisenberg:3", 0): 9,
        ("heisenberg:3", 1): 15,
    }
    for (label, j), nil in expected.items():
        lv = LevelGroup(parse_seed(label), j)
        assert nilpotency_index(RingCtx(lv.group, 3, 1)) == nil, (label, j)


def test_headroom_known_values():
    assert headroom(3, 3, 3) == 9
    assert headroom(3, 3, 9) == 10
    assert headroom(3, 2, 27) == 10
    assert headroom(3, 4, 81) == 13
    for nil in (3, 9, 27):
        assert headroom(3, 4, nil) > headroom(3, 2, nil)


def _c3_rational_log(vcoeffs, terms=45):
    """log(1+v) in Q[x]/(x^3-1) summed far enough that the tail is
    divisible by a large power of 3; exact rational arithmetic."""
    def mulp(a, b):
        out = [Fraction(0)] * 3
        for i in range(3):
            if a[i]:
                for k in range(3):
                    out[(i + k) % 3] += a[i] * b[k]
        return out

    acc = [Fraction(0)] * 3
    power = [Fraction(1), Fraction(0), Fraction(0)]
    v = [Fraction(c) for c in vcoeffs]
    for k in range(1, terms):
        power = mulp(power, v)
        sgn = Fraction(1) if k % 2 else Fraction(-1)
        acc = [a + sgn * c / k for a, c in zip(acc, power)]
    return acc


def _mod(frac, q):
    return (frac.numerator * pow(frac.denominator, -1, q)) % q


def test_log_ring_matches_rational_series():
    lv = LevelGroup(parse_seed("cyclic:3"), 0)
    ctx = RingCtx(lv.group, 3, 4)
    for vc in ([0, 3, 0], [3, 3, 3], [0, 6, 3], [9, 3, 6]):
        v = np.array(vc, dtype=np.int64)
        got = log_ring(ctx, v)
        # p-divisible arguments have p-integral logarithms
        assert got.is_integral()
        pay, prec = got.normalize()
        oracle = _c3_rational_log(vc)
        q = 3**prec
        assert pay.tolist() == [_mod(c, q) for c in oracle]


def test_log_requires_augmentation_ideal():
    ctx = RingCtx(LevelGroup(parse_seed("cyclic:3"), 0).group, 3, 3)
    bad = np.array([1, 0, 0], dtype=np.int64)  # coefficient sum 1
    with pytest.raises(ValueError):
        log_ring(ctx, bad)
    with pytest.raises(ValueError):
        log_classes(ctx, ClassCtx(LevelGroup(parse_seed("cyclic:3"), 0), 3), bad)


def test_exp_requires_p_divisible_argument():
    ctx = RingCtx(LevelGroup(parse_seed("cyclic:3"), 0).group, 3, 3)
    with pytest.raises(ValueError):
        exp_ring(ctx, np.array([1, 0, 0], dtype=np.int64))


def test_exp_log_roundtrip_fixed_case():
    lv = LevelGroup(parse_seed("cyclic:9"), 0)
    ctx = RingCtx(lv.group, 3, 6)
    x = np.zeros(9, dtype=np.int64)
    x[1], x[4] = 3, 6
    ex, eprec = exp_ring(ctx, x)
    back, prec = log_ring(ctx, (ex - ctx.one()) % 3**eprec).normalize()
    pr = min(eprec, prec)
    assert np.array_equal(back % 3**pr, x % 3**pr)


def test_integral_log_frozen_value():
    # L(1 + 3g) on C3, m = 8 working precision; the expected class
    # vector mod 9 was computed from the exact 3-adically convergent
    # rational series, with the class-power map sending every class
    # to the identity
    lv = LevelGroup(parse_seed("cyclic:3"), 0)
    M = headroom(3, 2, 3)
    assert M == 8
    ctx = RingCtx(lv.group, 3, M)
    cc = ClassCtx(lv, M)
    x = ctx.one()
    x[1] = (x[1] + 3) % ctx.q
    L, ach = integral_log(ctx, cc, x, 2)
    assert ach >= 2
    assert (L % 9).tolist() == [2, 3, 0]
    # inline oracle: log(x) minus one third of the total mass at the
    # identity class
    logx = _c3_rational_log([0, 3, 0])
    tot = sum(logx)
    oracle = [logx[0] - tot / 3, logx[1], logx[2]]
    assert [_mod(c, 9) for c in oracle] == [2, 3, 0]


def test_integral_log_kills_group_elements():
    lv = LevelGroup(parse_seed("cyclic:9"), 0)
    M = headroom(3, 2, 9)
    ctx = RingCtx(lv.group, 3, M)
    cc = ClassCtx(lv, M)
    for g in range(9):
        L, pr = integral_log(ctx, cc, ctx.basis(g), 2)
        assert not (L % 3**pr).any()


def test_integral_log_rejects_nonunits():
    lv = LevelGroup(parse_seed("cyclic:3"), 0)
    ctx = RingCtx(lv.group, 3, 5)
    cc = ClassCtx(lv, 5)
    allg = (ctx.basis(0) + ctx.basis(1) + ctx.basis(2)) % ctx.q
    with pytest.raises(ValueError):
        integral_log(ctx, cc, allg, 2)


def test_theta_of_identity_is_identity_tuple(cyc9_1):
    kctx = K1Context(cyc9_1, 2, bound=243)
    tup = kctx.theta(kctx.ring.one())
    for P, t in tup.items():
        assert int(t[0]) == 1 and not t[1:].any()


def test_theta_is_multiplicative(cyc9_1):
    kctx = K1Context(cyc9_1, 2, bound=243)
    rng = random.Random(5)
    for _ in range(5):
        a = kctx.ring.random_unit(rng)
        b = kctx.ring.random_unit(rng)
        ta, tb, tab = kctx.theta(a), kctx.theta(b), kctx.theta(kctx.ring.mul(a, b))
        for P in kctx.subgroups:
            assert np.array_equal(tab[P], kctx.carrier(P).mul(ta[P], tb[P]))


def test_theta_multiplicative_nonabelian(heis0):
    kctx = K1Context(heis0, 2, bound=81)
    rng = random.Random(6)
    for _ in range(3):
        a = kctx.ring.random_unit(rng)
        b = kctx.ring.random_unit(rng)
        ta, tb, tab = kctx.theta(a), kctx.theta(b), kctx.theta(kctx.ring.mul(a, b))
        for P in kctx.subgroups:
            assert np.array_equal(tab[P], kctx.carrier(P).mul(ta[P], tb[P]))


def test_omega_to_ab_on_class_basis(cyc9_1):
    cctx = ClassCtx(cyc9_1, 2)
    ab = cyc9_1.ab
    for c in range(cctx.nc):
        e = np.zeros(cctx.nc, dtype=np.int64)
        e[c] = 1
        assert omega_to_ab(cctx, e) == int(cyc9_1.ab_proj[cctx.reps[c]])
        # additivity: doubling the coefficient squares the image
        e[c] = 2
        g = int(cyc9_1.ab_proj[cctx.reps[c]])
        assert omega_to_ab(cctx, e) == int(ab.mul[g, g])


def test_high_precision_context(cyc9_1):
    kctx = K1Context(cyc9_1, 2, bound=243)
    big = kctx.high_precision()
    assert big.m > kctx.m
    assert big.level is kctx.level
