"""Group seeds, level groups, and the transfer map."""

import numpy as np
import pytest

from padiclog.groups import (
    FiniteGroup,
    LevelGroup,
    SeedError,
    parse_seed,
    transfer,
    transfer_hom,
)

TRIVIAL_C3_BLOCK = """
semidirect
p 3
h-order 3
h-table
0 1 2
1 2 0
2 0 1
alpha 0 1 2
label c3-trivial
"""


def test_builtin_families_parse():
    assert parse_seed("cyclic:3").label == "cyclic:3"
    # the p-power families carry their torsion in H; only the
    # heisenberg twist needs a nontrivial alpha order
    assert parse_seed("cyclic:9").e == 0
    assert parse_seed("elem-abelian:9").e == 0
    assert parse_seed("heisenberg:3").e == 1


def test_seed_rejects_junk():
    for bad in ("nonsense:7", "cyclic:8", "cyclic:6", "elem-abelian:16",
                "heisenberg:2", "heisenberg:4", "cyclic:x"):
        with pytest.raises(SeedError):
            parse_seed(bad)


def test_semidirect_block_parses():
    seed = parse_seed(TRIVIAL_C3_BLOCK)
    assert seed.label == "c3-trivial"
    assert seed.p == 3 and seed.e == 0
    assert len(seed.h_mul) == 3


def test_semidirect_rejects_wrong_e():
    # trivial alpha has minimal exponent 0, so e 1 must be refused
    with pytest.raises(SeedError):
        parse_seed(TRIVIAL_C3_BLOCK.replace("label c3-trivial", "e 1"))


def test_semidirect_rejects_non_group():
    bad = TRIVIAL_C3_BLOCK.replace("1 2 0", "1 1 0")
    with pytest.raises(ValueError):
        parse_seed(bad)


def test_comments_and_whitespace_ignored():
    text = "# leading comment\n  cyclic:9   # trailing\n"
    assert parse_seed(text).label == "cyclic:9"


def test_cyclic9_base_group():
    G = LevelGroup(parse_seed("cyclic:9"), 0).group
    assert G.n == 9
    assert G.is_cyclic()
    assert G.exponent() == 9
    assert sorted(len(H) for H in G.subgroups()) == [1, 3, 9]
    assert sorted(G.element_orders().tolist()) == [1, 3, 3, 9, 9, 9, 9, 9, 9]


def test_elem_abelian_base_group():
    G = LevelGroup(parse_seed("elem-abelian:9"), 0).group
    assert G.n == 9
    assert G.is_abelian() and not G.is_cyclic()
    assert G.exponent() == 3
    # 1 trivial + 4 lines + the whole group
    assert len(G.subgroups()) == 6
    reps, classes = G.conjugacy_classes()
    assert len(classes) == 9


def test_heisenberg_base_group(heis0):
    G = heis0.group
    assert G.n == 27
    assert not G.is_abelian()
    assert G.exponent() == 3
    assert len(G.center()) == 3
    assert set(G.derived_subgroup()) == set(G.center())
    _, classes = G.conjugacy_classes()
    assert len(classes) == 11
    ab, proj = G.abelianization()
    assert ab.n == 9 and ab.exponent() == 3


def test_heisenberg_level_one(heis1):
    assert heis1.n == 81
    assert heis1.G.n == 27
    assert len(heis1.Zj) == 3
    assert heis1.group.exponent() == 9
    _, classes = heis1.group.conjugacy_classes()
    assert len(classes) == 33
    assert heis1.ab.n == 27 and heis1.ab.exponent() == 9


def test_level_tower_orders():
    for label, orders in (
        ("cyclic:3", (3, 9, 27)),
        ("elem-abelian:9", (9, 27, 81)),
        ("cyclic:9", (9, 27, 81)),
        ("heisenberg:3", (27, 81, 243)),
    ):
        seed = parse_seed(label)
        for j, n in enumerate(orders):
            assert LevelGroup(seed, j, check=False).n == n


def test_central_subgroup_is_central(heis1):
    G = heis1.group
    for z in heis1.Zj:
        assert all(G.mul[z, g] == G.mul[g, z] for g in range(G.n))
    assert G.element_order(heis1.z_gen) == 3


def test_lift_sections_to_G(heis1):
    # to_G . lift is the identity on the shared quotient
    assert np.array_equal(heis1.to_G[heis1.lift], np.arange(heis1.G.n))


def test_ab_proj_is_homomorphism(heis1):
    G, ab, proj = heis1.group, heis1.ab, heis1.ab_proj
    rng = np.random.default_rng(0)
    for _ in range(50):
        g, h = rng.integers(0, G.n, size=2)
        assert proj[G.mul[g, h]] == ab.mul[proj[g], proj[h]]


def test_reduce_to_level_quotient():
    seed = parse_seed("cyclic:9")
    hi = LevelGroup(seed, 2)
    lo = LevelGroup(seed, 1)
    red = hi.reduce_to(lo)
    for g in range(hi.n):
        for h in range(hi.n):
            assert red[hi.group.mul[g, h]] == lo.group.mul[red[g], red[h]]


def test_transfer_on_cyclic_is_power_map():
    # for abelian big/small the transfer is g -> g^[big:small]
    G = LevelGroup(parse_seed("cyclic:9"), 0).group
    big = tuple(range(9))
    small = tuple(sorted(G.closure([3])))
    idx = len(big) // len(small)
    for g in big:
        assert transfer(G, big, small, g) == G.power(g, idx)


def test_transfer_hom_lands_in_abelianization(heis0):
    G = heis0.group
    subs = [H for H in G.subgroups() if len(H) == 9]
    big = tuple(range(G.n))
    ab, arr = transfer_hom(G, big, subs[0])
    assert arr.min() >= 0
    # transfer is a homomorphism into the abelian target
    rng = np.random.default_rng(1)
    for _ in range(40):
        g, h = rng.integers(0, G.n, size=2)
        assert arr[G.mul[g, h]] == ab.mul[arr[g], arr[h]]


def test_finite_group_checks_table():
    bad = np.array([[0, 1], [1, 1]])
    with pytest.raises(ValueError):
        FiniteGroup(bad)
