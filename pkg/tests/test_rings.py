"""Group ring contexts, determinant norms, and conjugacy-class
projections."""

import random

import numpy as np
import pytest
import sympy

from padiclog.coeffs import CycloExt
from padiclog.groups import LevelGroup, parse_seed
from padiclog.rings import (
    AbelianStep,
    ClassCtx,
    RingCtx,
    det_ring,
    twisted_product_norm,
)


def c3_ctx(m=3):
    return RingCtx(LevelGroup(parse_seed("cyclic:3"), 0).group, 3, m)


def c9_ctx(m=2):
    return RingCtx(LevelGroup(parse_seed("cyclic:9"), 0).group, 3, m)


def test_known_product_in_c3():
    ctx = c3_ctx()
    a = (ctx.basis(0) + ctx.basis(1)) % ctx.q     # 1 + g
    b = (ctx.basis(0) + ctx.basis(2)) % ctx.q     # 1 + g^2
    # (1+g)(1+g^2) = 1 + g + g^2 + g^3 = 2 + g + g^2
    assert ctx.mul(a, b).tolist() == [2, 1, 1]


def test_basis_multiplication_matches_group_law():
    lv = LevelGroup(parse_seed("heisenberg:3"), 0)
    ctx = RingCtx(lv.group, 3, 2)
    rng = np.random.default_rng(0)
    for _ in range(40):
        g, h = (int(v) for v in rng.integers(0, lv.group.n, size=2))
        prod = ctx.mul(ctx.basis(g), ctx.basis(h))
        assert prod.tolist() == ctx.basis(int(lv.group.mul[g, h])).tolist()


def test_ring_laws_on_random_elements():
    ctx = c9_ctx()
    rng = random.Random(1)
    for _ in range(20):
        a = ctx.random_element(rng)
        b = ctx.random_element(rng)
        c = ctx.random_element(rng)
        assert np.array_equal(ctx.mul(ctx.mul(a, b), c), ctx.mul(a, ctx.mul(b, c)))
        assert np.array_equal(ctx.mul(a, b), ctx.mul(b, a))  # abelian carrier
        assert np.array_equal(ctx.mul(a, ctx.add(b, c)),
                              ctx.add(ctx.mul(a, b), ctx.mul(a, c)))


def test_augment_is_multiplicative():
    ctx = c9_ctx()
    rng = random.Random(2)
    for _ in range(20):
        a = ctx.random_element(rng)
        b = ctx.random_element(rng)
        assert ctx.augment(ctx.mul(a, b)) == (ctx.augment(a) * ctx.augment(b)) % ctx.q


def test_unit_inversion():
    ctx = c3_ctx()
    rng = random.Random(3)
    for _ in range(20):
        x = ctx.random_unit(rng)
        assert np.array_equal(ctx.mul(x, ctx.invert(x)), ctx.one())


def test_nonunit_detected():
    ctx = c3_ctx()
    allg = (ctx.basis(0) + ctx.basis(1) + ctx.basis(2)) % ctx.q
    assert not ctx.is_unit(allg)  # augmentation 3 is not a unit mod 3
    with pytest.raises(Exception):
        ctx.invert(allg)


def test_pow_matches_repeated_multiplication():
    ctx = c9_ctx()
    rng = random.Random(4)
    x = ctx.random_element(rng)
    acc = ctx.one()
    for e in range(5):
        assert np.array_equal(ctx.pow(x, e), acc)
        acc = ctx.mul(acc, x)


def test_coefficient_guard():
    G = LevelGroup(parse_seed("cyclic:9"), 0).group
    with pytest.raises(ValueError):
        RingCtx(G, 3, 20)


def test_det_ring_against_sympy_polynomials():
    # determinant over (Z/27)[C3] via exact polynomial arithmetic
    ctx = c3_ctx()
    rng = random.Random(7)
    x = sympy.symbols("x")
    for size in (2, 3):
        mats = np.array(
            [[[rng.randrange(27) for _ in range(3)] for _ in range(size)]
             for _ in range(size)],
            dtype=np.int64,
        )
        d = det_ring(mats, ctx)
        M = sympy.Matrix(
            size, size,
            lambda i, j: sum(int(mats[i][j][t]) * x**t for t in range(3)),
        )
        rem = sympy.rem(sympy.expand(M.det()), x**3 - 1, x)
        oracle = [int(rem.coeff(x, t)) % 27 for t in range(3)]
        assert d.tolist() == oracle


def test_det_ring_identity_and_diagonal():
    ctx = c3_ctx()
    rng = random.Random(8)
    eye = np.zeros((3, 3, 3), dtype=np.int64)
    for i in range(3):
        eye[i, i] = ctx.one()
    assert det_ring(eye, ctx).tolist() == ctx.one().tolist()
    d0, d1, d2 = (ctx.random_element(rng) for _ in range(3))
    diag = np.zeros((3, 3, 3), dtype=np.int64)
    diag[0, 0], diag[1, 1], diag[2, 2] = d0, d1, d2
    assert np.array_equal(det_ring(diag, ctx), ctx.mul(ctx.mul(d0, d1), d2))


def _index3_step():
    ctx = c9_ctx()
    V = tuple(sorted(ctx.grp.closure([3])))
    return AbelianStep(ctx, V)


def test_step_norm_of_embedded_element_is_cube():
    step = _index3_step()
    rng = random.Random(9)
    for _ in range(10):
        v = step.vctx.random_element(rng)
        assert np.array_equal(step.norm(step.embed(v)), step.vctx.pow(v, 3))


def test_step_trace_of_embedded_element():
    step = _index3_step()
    rng = random.Random(10)
    for _ in range(10):
        v = step.vctx.random_element(rng)
        assert np.array_equal(step.trace(step.embed(v)), (3 * v) % step.ctx.q)


def test_step_norm_is_multiplicative():
    step = _index3_step()
    rng = random.Random(11)
    for _ in range(10):
        a = step.ctx.random_element(rng)
        b = step.ctx.random_element(rng)
        assert np.array_equal(
            step.norm(step.ctx.mul(a, b)),
            step.vctx.mul(step.norm(a), step.norm(b)),
        )


def test_twisted_product_equals_determinant_norm():
    # the two norm routes must agree on every element, not just units
    step = _index3_step()
    ext = CycloExt(3, 2)
    rng = random.Random(12)
    for _ in range(25):
        x = step.ctx.random_element(rng)
        assert np.array_equal(step.norm(x), twisted_product_norm(step, x, ext))


def test_twisted_product_on_elem_abelian_steps():
    lv = LevelGroup(parse_seed("elem-abelian:9"), 0)
    ctx = RingCtx(lv.group, 3, 2)
    ext = CycloExt(3, 2)
    rng = random.Random(13)
    for H in lv.group.subgroups():
        if len(H) != 3:
            continue
        step = AbelianStep(ctx, H)
        for _ in range(8):
            x = ctx.random_element(rng)
            assert np.array_equal(step.norm(x), twisted_product_norm(step, x, ext))


def test_class_projection_is_conjugation_invariant(heis0):
    ctx = RingCtx(heis0.group, 3, 2)
    cctx = ClassCtx(heis0, 2)
    rng = random.Random(14)
    G = heis0.group
    for _ in range(20):
        x = ctx.random_element(rng)
        g = rng.randrange(G.n)
        assert np.array_equal(cctx.project(x), cctx.project(ctx.conjugate(x, g)))


def test_class_projection_counts_class_members(heis0):
    cctx = ClassCtx(heis0, 2)
    ctx = RingCtx(heis0.group, 3, 2)
    total = np.zeros(cctx.nc, dtype=np.int64)
    for g in range(heis0.group.n):
        total += cctx.project(ctx.basis(g))
    # summing all group elements hits each class once per member
    sizes = np.bincount(cctx.class_of, minlength=cctx.nc)
    assert np.array_equal(total % ctx.q, sizes % ctx.q)
