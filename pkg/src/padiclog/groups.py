"""Finite groups as dense multiplication tables, and the level tower.

Everything downstream works with one concrete encoding: a group of
order n is the set {0, ..., n-1} with identity 0 and an (n, n) int64
multiplication table.  Element ordering is part of the data; all coset
and basis choices are derived from it, so runs are reproducible.

A seed (p, H, alpha, e) with alpha^(p^e) = id determines the tower of
semidirect products H x| Z/p^(e+j).  Level j carries the central
cyclic subgroup Z_j generated by the p^e-th power of the distinguished
generator gamma, of order p^j, and the fixed quotient G of order
|H| * p^e shared by all levels.  The commutator subgroup meets Z_j
trivially because commutators have trivial gamma-exponent in the
split product; this is asserted at construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class BoundExceeded(ValueError):
    """A size bound protecting exhaustive enumeration was exceeded."""


class SeedError(ValueError):
    """A group seed failed validation."""


def _is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


class FiniteGroup:
    """A finite group on {0..n-1} with identity 0, given by its table."""

    def __init__(self, mul, check: bool = True):
        mul = np.ascontiguousarray(np.asarray(mul, dtype=np.int64))
        n = mul.shape[0]
        if mul.shape != (n, n):
            raise ValueError("multiplication table must be square")
        if mul.min() < 0 or mul.max() >= n:
            raise ValueError("table entries out of range")
        if not np.array_equal(mul[0], np.arange(n)) or not np.array_equal(
            mul[:, 0], np.arange(n)
        ):
            raise ValueError("element 0 must be the identity")
        inv = np.full(n, -1, dtype=np.int64)
        for g in range(n):
            hits = np.nonzero(mul[g] == 0)[0]
            if hits.size != 1:
                raise ValueError("inverses must exist and be unique")
            inv[g] = hits[0]
        self.mul = mul
        self.inv = inv
        self.n = n
        if check and n <= 512:
            for a in range(n):
                row = mul[a]
                left = mul[row][:, :]          # (b, c) -> (a b) c
                right = row[mul]               # (b, c) -> a (b c)
                if not np.array_equal(left, right):
                    raise ValueError("table is not associative")
        self._classes = None
        self._subgroups = None
        self._derived = None
        self._orders = None

    def __len__(self):
        return self.n

    def power(self, g: int, k: int) -> int:
        if k < 0:
            g = int(self.inv[g])
            k = -k
        acc = 0
        base = g
        while k:
            if k & 1:
                acc = int(self.mul[acc, base])
            base = int(self.mul[base, base])
            k >>= 1
        return acc

    def element_orders(self) -> np.ndarray:
        if self._orders is None:
            out = np.ones(self.n, dtype=np.int64)
            for g in range(self.n):
                x = g
                k = 1
                while x != 0:
                    x = int(self.mul[x, g])
                    k += 1
                out[g] = k
            self._orders = out
        return self._orders

    def element_order(self, g: int) -> int:
        return int(self.element_orders()[g])

    def exponent(self) -> int:
        out = 1
        for o in map(int, self.element_orders()):
            a, b = out, o
            while b:
                a, b = b, a % b
            out = out * o // a
        return out

    def conj(self, g: int, x: int) -> int:
        return int(self.mul[self.mul[g, x], self.inv[g]])

    def commutator(self, g: int, h: int) -> int:
        gh = self.mul[g, h]
        hg = self.mul[h, g]
        return int(self.mul[gh, self.inv[hg]])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))

    def is_cyclic(self) -> bool:
        return bool((self.element_orders() == self.n).any())

    def closure(self, gens) -> tuple:
        """The subgroup generated by the given elements, sorted."""
        seen = np.zeros(self.n, dtype=bool)
        seen[0] = True
        frontier = [0]
        gens = sorted(set(int(g) for g in gens))
        for g in gens:
            if not seen[g]:
                seen[g] = True
                frontier.append(g)
        while frontier:
            cur = np.nonzero(seen)[0]
            prod = self.mul[np.ix_(cur, cur)].ravel()
            newseen = seen.copy()
            newseen[prod] = True
            if (newseen == seen).all():
                break
            frontier = list(np.nonzero(newseen & ~seen)[0])
            seen = newseen
        return tuple(int(i) for i in np.nonzero(seen)[0])

    def derived_subgroup(self) -> tuple:
        if self._derived is None:
            A = self.mul
            B = self.mul.T
            comm = self.mul[A, self.inv[B]]
            self._derived = self.closure(np.unique(comm))
        return self._derived

    def center(self) -> tuple:
        mask = (self.mul == self.mul.T).all(axis=1)
        return tuple(int(i) for i in np.nonzero(mask)[0])

    def subgroups(self) -> list[tuple]:
        """Every subgroup, as a sorted index tuple, found by closure
        saturation from below."""
        if self._subgroups is None:
            found = {(0,)}
            queue = [(0,)]
            while queue:
                S = queue.pop()
                inside = set(S)
                for g in range(1, self.n):
                    if g in inside:
                        continue
                    T = self.closure(set(S) | {g})
                    if T not in found:
                        found.add(T)
                        queue.append(T)
            self._subgroups = sorted(found, key=lambda s: (len(s), s))
        return self._subgroups

    def conjugacy_classes(self):
        """(class_of, reps): class index per element; reps are minimal
        elements, listed in increasing order."""
        if self._classes is None:
            class_of = np.full(self.n, -1, dtype=np.int64)
            reps = []
            allg = np.arange(self.n)
            for x in range(self.n):
                if class_of[x] >= 0:
                    continue
                orbit = self.mul[self.mul[allg, x], self.inv[allg]]
                idx = len(reps)
                class_of[np.unique(orbit)] = idx
                reps.append(x)
            self._classes = (class_of, reps)
        return self._classes

    def normalizer(self, sub: tuple) -> tuple:
        s = np.array(sub, dtype=np.int64)
        sset = frozenset(int(i) for i in sub)
        out = []
        for g in range(self.n):
            img = self.mul[self.mul[g, s], self.inv[g]]
            if frozenset(int(i) for i in img) == sset:
                out.append(g)
        return tuple(out)

    def subgroup_group(self, indices: tuple):
        """(group on the subgroup, embed): embed[i] is the parent index
        of subgroup element i."""
        idx = sorted(int(i) for i in indices)
        if idx[0] != 0:
            raise ValueError("subgroup must contain the identity")
        pos = -np.ones(self.n, dtype=np.int64)
        for i, g in enumerate(idx):
            pos[g] = i
        sub = pos[self.mul[np.ix_(idx, idx)]]
        if (sub < 0).any():
            raise ValueError("set is not closed under multiplication")
        return FiniteGroup(sub, check=False), tuple(idx)

    def quotient(self, normal: tuple):
        """(quotient group, projection array).

        Cosets are labelled by their minimal elements, in increasing
        order, so the identity coset is index 0.
        """
        nset = np.array(sorted(set(int(i) for i in normal)), dtype=np.int64)
        for g in range(self.n):
            img = np.sort(self.mul[self.mul[g, nset], self.inv[g]])
            if not np.array_equal(img, nset):
                raise ValueError("subgroup is not normal")
        coset_min = np.full(self.n, -1, dtype=np.int64)
        for g in range(self.n):
            if coset_min[g] >= 0:
                continue
            coset = self.mul[g, nset]
            coset_min[coset] = coset.min()
        reps = np.unique(coset_min)
        proj = -np.ones(self.n, dtype=np.int64)
        for i, r in enumerate(reps):
            proj[coset_min == r] = i
        table = proj[self.mul[np.ix_(reps, reps)]]
        return FiniteGroup(table, check=False), proj

    def abelianization(self):
        """(abelian quotient, projection array over parent indices)."""
        der = self.derived_subgroup()
        if len(der) == 1:
            return self, np.arange(self.n, dtype=np.int64)
        return self.quotient(der)


def left_cosets(group: FiniteGroup, sub: tuple):
    """(reps, coset_of): minimal representative per left coset g*sub,
    reps sorted increasingly; coset_of maps every element to its coset
    index."""
    s = np.array(sub, dtype=np.int64)
    coset_min = np.full(group.n, -1, dtype=np.int64)
    for g in range(group.n):
        if coset_min[g] >= 0:
            continue
        coset = group.mul[g, s]
        coset_min[coset] = coset.min()
    reps = np.unique(coset_min)
    coset_of = -np.ones(group.n, dtype=np.int64)
    for i, r in enumerate(reps):
        coset_of[coset_min == r] = i
    return [int(r) for r in reps], coset_of


def transfer(group: FiniteGroup, big: tuple, small: tuple, g: int) -> int:
    """Transfer of g in <big> down to <small>, as a parent index.

    Uses the double-coset product: for each orbit of g on the left
    cosets x*small inside big, with representative x and length L, the
    factor x^-1 g^L x lies in small; the product over orbits represents
    the transfer.  The result is canonical only modulo [small, small];
    callers reduce to the abelianization.
    """
    if g not in set(big):
        raise ValueError("element must lie in the source subgroup")
    bigset = sorted(set(int(i) for i in big))
    s = np.array(sorted(set(int(i) for i in small)), dtype=np.int64)
    coset_min = {}
    for x in bigset:
        coset = group.mul[x, s]
        coset_min[x] = int(coset.min())
    reps = sorted(set(coset_min.values()))
    pos = {r: i for i, r in enumerate(reps)}
    sigma = [pos[coset_min[int(group.mul[g, r])]] for r in reps]
    done = [False] * len(reps)
    out = 0
    smallset = set(int(i) for i in s)
    for i0 in range(len(reps)):
        if done[i0]:
            continue
        length = 0
        i = i0
        while not done[i]:
            done[i] = True
            i = sigma[i]
            length += 1
        x = reps[i0]
        y = group.mul[group.mul[group.inv[x], group.power(g, length)], x]
        if int(y) not in smallset:
            raise AssertionError("double-coset factor landed outside the target")
        out = int(group.mul[out, y])
    return out


def transfer_hom(group: FiniteGroup, big: tuple, small: tuple):
    """(target abelianization, map array over parent indices).

    The array sends each element of big to the index of its transfer in
    the abelianization of small; entries off big are -1.
    """
    small_grp, small_embed = group.subgroup_group(small)
    ab, abproj = small_grp.abelianization()
    spos = -np.ones(group.n, dtype=np.int64)
    for i, e in enumerate(small_embed):
        spos[e] = i
    arr = -np.ones(group.n, dtype=np.int64)
    for g in big:
        t = transfer(group, big, small, int(g))
        arr[g] = abproj[spos[t]]
    return ab, arr


# --------------------------------------------------------------------
# seeds


@dataclass(frozen=True)
class GroupSeed:
    """Datum (p, H, alpha, e) generating the tower H x| Z/p^(e+j).

    h_mul is H's multiplication table with identity 0; alpha is an
    automorphism of H as a permutation tuple; e is minimal with
    alpha^(p^e) = id.
    """

    label: str
    p: int
    h_mul: tuple
    alpha: tuple
    e: int

    def __post_init__(self):
        if not _is_odd_prime(self.p):
            raise SeedError(f"p = {self.p} must be an odd prime")
        H = FiniteGroup(np.array(self.h_mul, dtype=np.int64))
        nH = len(H)
        # H must be a p-group
        size = nH
        while size % self.p == 0:
            size //= self.p
        if size != 1:
            raise SeedError(f"|H| = {nH} is not a power of p = {self.p}")
        a = np.array(self.alpha, dtype=np.int64)
        if sorted(int(i) for i in a) != list(range(nH)):
            raise SeedError("alpha is not a permutation of H")
        if not np.array_equal(a[H.mul], H.mul[np.ix_(a, a)]):
            raise SeedError("alpha is not an automorphism")
        if a[0] != 0:
            raise SeedError("alpha must fix the identity")
        if self.e < 0:
            raise SeedError("e must be nonnegative")
        emin = _alpha_e(self.h_mul, self.alpha, self.p)
        if self.e != emin:
            raise SeedError(
                f"e = {self.e} but alpha has order p^{emin}; e must be minimal"
            )

    def h_group(self) -> FiniteGroup:
        return FiniteGroup(np.array(self.h_mul, dtype=np.int64), check=False)


def _cyclic_table(n: int) -> np.ndarray:
    a = np.arange(n)
    return (a[:, None] + a[None, :]) % n


def _product_table(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Direct product with index i = i1 * len(t2) + i2."""
    n1, n2 = t1.shape[0], t2.shape[0]
    i1 = np.arange(n1)
    i2 = np.arange(n2)
    left = t1[np.ix_(i1, i1)]
    right = t2[np.ix_(i2, i2)]
    out = np.zeros((n1 * n2, n1 * n2), dtype=np.int64)
    for a1 in range(n1):
        for a2 in range(n2):
            out[a1 * n2 + a2] = (
                left[a1][:, None] * n2 + right[a2][None, :]
            ).ravel()
    return out


def _prime_power(n: int):
    """(p, k) with n = p^k, or None."""
    if n < 2:
        return None
    p = 2
    while p * p <= n:
        if n % p == 0:
            break
        p += 1
    else:
        p = n
    k = 0
    m = n
    while m % p == 0:
        m //= p
        k += 1
    if m != 1:
        return None
    return p, k


def seed_cyclic(n: int) -> GroupSeed:
    """G cyclic of order n = p^k: H = C_n with trivial action, e = 0."""
    pk = _prime_power(n)
    if pk is None or not _is_odd_prime(pk[0]):
        raise SeedError(f"cyclic order {n} must be a power of an odd prime")
    p, _ = pk
    t = _cyclic_table(n)
    return GroupSeed(
        label=f"cyclic:{n}",
        p=p,
        h_mul=tuple(tuple(int(x) for x in row) for row in t),
        alpha=tuple(range(n)),
        e=0,
    )


def seed_elem_abelian(n: int) -> GroupSeed:
    """G elementary abelian of order n = p^k: H = C_p^k, e = 0."""
    pk = _prime_power(n)
    if pk is None or not _is_odd_prime(pk[0]):
        raise SeedError(f"order {n} must be a power of an odd prime")
    p, k = pk
    t = _cyclic_table(p)
    for _ in range(k - 1):
        t = _product_table(t, _cyclic_table(p))
    nH = p**k
    return GroupSeed(
        label=f"elem-abelian:{n}",
        p=p,
        h_mul=tuple(tuple(int(x) for x in row) for row in t),
        alpha=tuple(range(nH)),
        e=0,
    )


def seed_heisenberg(p: int) -> GroupSeed:
    """G = extraspecial group of order p^3 and exponent p.

    H = C_p x C_p with basis (x, z), index a*p + c for x^a z^c; gamma
    acts by x -> x z, z -> z, which makes z the commutator [x, gamma]
    and the center of G.
    """
    if not _is_odd_prime(p):
        raise SeedError(f"p = {p} must be an odd prime")
    t = _product_table(_cyclic_table(p), _cyclic_table(p))
    alpha = tuple((a * p + (a + c) % p) for a in range(p) for c in range(p))
    return GroupSeed(
        label=f"heisenberg:{p}",
        p=p,
        h_mul=tuple(tuple(int(x) for x in row) for row in t),
        alpha=alpha,
        e=1,
    )


SEED_GRAMMAR = """\
Seed text format. Either a one-line built-in family:

    cyclic:N         N = p^k (odd prime power): G cyclic of order N
    elem-abelian:N   N = p^k:  G elementary abelian of order N
    heisenberg:p     p odd prime: G extraspecial of order p^3, exponent p

or an explicit block:

    semidirect
    p <odd prime>
    h-order <n>
    h-table
    <n rows of n indices, identity must be element 0>
    alpha <n indices: an automorphism of H as a permutation>
    e <minimal exponent with alpha^(p^e) = id>        (optional)
    label <name>                                      (optional)

Indices are whitespace separated; '#' starts a comment.  Validation
rejects p = 2, non-groups, non-automorphisms, and an 'e' that is not
minimal.
"""


def parse_seed(text: str) -> GroupSeed:
    """Parse the plain-text seed format described in SEED_GRAMMAR."""
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise SeedError("empty seed")
    head = lines[0]
    if ":" in head and len(lines) == 1:
        fam, _, arg = head.partition(":")
        fam = fam.strip()
        try:
            n = int(arg)
        except ValueError:
            raise SeedError(f"bad family parameter {arg!r}") from None
        if fam == "cyclic":
            return seed_cyclic(n)
        if fam == "elem-abelian":
            return seed_elem_abelian(n)
        if fam == "heisenberg":
            return seed_heisenberg(n)
        raise SeedError(f"unknown family {fam!r}")
    if head != "semidirect":
        raise SeedError(f"expected a family line or 'semidirect', got {head!r}")
    p = None
    e = None
    h_order = None
    label = None
    table = None
    alpha = None
    i = 1
    while i < len(lines):
        parts = lines[i].split()
        key = parts[0]
        if key == "p":
            p = int(parts[1])
        elif key == "e":
            e = int(parts[1])
        elif key == "h-order":
            h_order = int(parts[1])
        elif key == "label":
            label = parts[1]
        elif key == "h-table":
            if h_order is None:
                raise SeedError("h-order must precede h-table")
            rows = []
            for r in range(h_order):
                i += 1
                if i >= len(lines):
                    raise SeedError("h-table is truncated")
                row = [int(x) for x in lines[i].split()]
                if len(row) != h_order:
                    raise SeedError(f"h-table row {r} has wrong length")
                rows.append(tuple(row))
            table = tuple(rows)
        elif key == "alpha":
            alpha = tuple(int(x) for x in parts[1:])
        else:
            raise SeedError(f"unknown seed key {key!r}")
        i += 1
    if p is None or table is None or alpha is None:
        raise SeedError("semidirect seed needs p, h-table and alpha")
    probe = GroupSeed(
        label=label or "semidirect", p=p, h_mul=table, alpha=alpha, e=_alpha_e(table, alpha, p)
    )
    if e is not None and e != probe.e:
        raise SeedError(f"e = {e} is not minimal (alpha has order p^{probe.e})")
    return probe


def _alpha_e(table, alpha, p) -> int:
    nH = len(table)
    a = np.array(alpha, dtype=np.int64)
    ident = np.arange(nH)
    cur = a.copy()
    order = 1
    while not np.array_equal(cur, ident):
        cur = cur[a]
        order += 1
        if order > nH * nH:
            raise SeedError("alpha order runaway")
    emin = 0
    t = 1
    while t < order:
        t *= p
        emin += 1
    if t != order and order != 1:
        raise SeedError(f"alpha has order {order}, not a power of p")
    return emin


# --------------------------------------------------------------------
# the level tower


class LevelGroup:
    """The group H x| Z/p^(e+j) together with its level data.

    Elements are indexed h * p^(e+j) + a for h an H-index and a the
    gamma-exponent; the identity is 0.  G is the shared quotient by
    Z_j = <gamma^(p^e)> and lift is the canonical section G -> level
    group picking gamma-exponents below p^e.
    """

    def __init__(self, seed: GroupSeed, j: int, check: bool = True):
        if j < 0:
            raise ValueError("level must be nonnegative")
        self.seed = seed
        self.j = j
        self.p = p = seed.p
        self.e = e = seed.e
        self.nH = nH = len(seed.h_mul)
        self.r = r = p ** (e + j)
        self.n = n = nH * r
        self.group = FiniteGroup(self._build_table(j), check=check)
        pe = p**e
        if j == 0:
            self.G = self.group
            self.to_G = np.arange(n, dtype=np.int64)
            self.lift = np.arange(n, dtype=np.int64)
        else:
            self.G = FiniteGroup(self._build_table(0), check=False)
            h_idx = np.arange(n) // r
            a_idx = np.arange(n) % r
            self.to_G = h_idx * pe + a_idx % pe
            gh = np.arange(nH * pe) // pe
            gb = np.arange(nH * pe) % pe
            self.lift = gh * r + gb
        self.Zj = tuple(int(t * pe) for t in range(p**j))
        self.z_gen = pe if j > 0 else 0
        self.gamma = 1 if r > 1 else 0
        mul = self.group.mul
        for z in self.Zj:
            if not np.array_equal(mul[:, z], mul[z, :]):
                raise AssertionError("Z_j must be central")
        assert self.n == self.G.n * p**j
        if check and n <= 512:
            A = mul
            B = mul.T
            comm = np.unique(mul[A, self.group.inv[B]])
            bad = set(int(c) for c in comm) & set(self.Zj)
            if bad - {0}:
                raise AssertionError("commutators must miss Z_j")
        self.ab, self.ab_proj = self.group.abelianization()

    def _build_table(self, j: int) -> np.ndarray:
        p, e, nH = self.p, self.e, self.nH
        r = p ** (e + j)
        pe = p**e
        hmul = np.array(self.seed.h_mul, dtype=np.int64)
        alpha = np.array(self.seed.alpha, dtype=np.int64)
        alphas = [np.arange(nH, dtype=np.int64)]
        for _ in range(pe - 1):
            alphas.append(alpha[alphas[-1]])
        table = np.zeros((nH * r, nH * r), dtype=np.int64)
        arange_r = np.arange(r)
        for h1 in range(nH):
            for a1 in range(r):
                hpart = hmul[h1, alphas[a1 % pe]]
                apart = (a1 + arange_r) % r
                table[h1 * r + a1] = (hpart[:, None] * r + apart[None, :]).ravel()
        return table

    def reduce_to(self, other: "LevelGroup") -> np.ndarray:
        """Projection array onto a lower level of the same seed."""
        if other.seed != self.seed or other.j > self.j:
            raise ValueError("target must be a lower level of the same seed")
        h_idx = np.arange(self.n) // self.r
        a_idx = np.arange(self.n) % self.r
        return h_idx * other.r + a_idx % other.r

    def describe(self) -> str:
        lines = [
            f"seed {self.seed.label} (p = {self.p}, |H| = {self.nH}, e = {self.e})",
            f"level j = {self.j}: |group| = {self.n}, |G| = {self.G.n}, "
            f"|Z_j| = {self.p**self.j}",
            "lift: the fixed section G -> level group chooses "
            f"gamma-exponents below p^e = {self.p**self.e} "
            "(one lift per seed; reported here because alternative lifts "
            "are not explored)",
            f"abelianization of the level group has order {self.ab.n}",
            f"conjugacy classes: {len(self.group.conjugacy_classes()[1])}",
        ]
        return "\n".join(lines)


class SubgroupDatum:
    """Everything the ring layer needs about one subgroup P of G."""

    def __init__(self, level: LevelGroup, P: tuple):
        G = level.G
        self.level = level
        self.P = P = tuple(sorted(int(i) for i in P))
        self.P_grp, self.P_embed = G.subgroup_group(P)
        self.is_cyclic = self.P_grp.is_cyclic()
        self.is_trivial = len(P) == 1
        # preimage in the level group
        toG = level.to_G
        U = tuple(int(w) for w in np.nonzero(np.isin(toG, P))[0])
        self.U = U
        self.U_grp, self.U_embed = level.group.subgroup_group(U)
        assert len(U) == len(P) * level.p**level.j
        if self.is_cyclic and not self.U_grp.is_abelian():
            raise AssertionError("preimage of a cyclic subgroup must be abelian")
        self.Uab, self.U_to_ab = self.U_grp.abelianization()
        self.upos = -np.ones(level.n, dtype=np.int64)
        for i, w in enumerate(self.U_embed):
            self.upos[w] = i
        self.ppos = -np.ones(G.n, dtype=np.int64)
        for i, g in enumerate(self.P_embed):
            self.ppos[g] = i
        # map level-subgroup elements onto P
        self.U_to_P = self.ppos[toG[np.array(self.U_embed)]]
        # Z_j sits inside U; record its abelianized image and check it
        # stays faithful
        zab = [int(self.U_to_ab[self.upos[z]]) for z in level.Zj]
        if len(set(zab)) != len(level.Zj):
            raise AssertionError("Z_j must embed into the abelianization")
        self.Zj_ab = tuple(zab)
        # coset geometry of P in G and its lift
        self.coset_reps, self.coset_of = left_cosets(G, P)
        self.lift_reps = [int(level.lift[c]) for c in self.coset_reps]
        # decomposition arrays: for w in the level group, w = c * u with
        # c the lifted representative of its G-coset and u in U
        mul = level.group.mul
        inv = level.group.inv
        cos = self.coset_of[toG]
        lifts_inv = inv[np.array(self.lift_reps, dtype=np.int64)][cos]
        u_of = mul[lifts_inv, np.arange(level.n)]
        assert (self.upos[u_of] >= 0).all()
        self.dec_coset = cos
        self.dec_ab = self.U_to_ab[self.upos[u_of]]
        # normalizer and the conjugation action on Uab; W_reps are
        # coset representatives of P in N_G(P), canonical minimal ones
        self.N = G.normalizer(P)
        self.W_reps = _subgroup_coset_reps(G, self.N, P)
        self.conj_perms_ab = [
            self._conj_perm_ab(g) for g in self.W_reps
        ]
        # cyclic bookkeeping
        if self.is_cyclic and not self.is_trivial:
            orders = self.P_grp.element_orders()
            gens = [self.P_embed[i] for i in range(len(P)) if orders[i] == len(P)]
            self.gen = min(gens)
            dlog = {}
            x = 0
            gpos = self.ppos[self.gen]
            for k in range(len(P)):
                dlog[x] = k
                x = int(self.P_grp.mul[x, gpos])
            self._dlog = dlog
        else:
            self.gen = None
            self._dlog = None

    def _conj_perm_ab(self, g: int) -> np.ndarray:
        """Permutation of Uab induced by conjugation with the lift of g."""
        level = self.level
        gt = int(level.lift[g])
        mul = level.group.mul
        inv = level.group.inv
        U = np.array(self.U_embed, dtype=np.int64)
        img = mul[mul[gt, U], inv[gt]]
        assert (self.upos[img] >= 0).all(), "conjugation must preserve U"
        perm_on_U = self.U_to_ab[self.upos[img]]
        out = -np.ones(self.Uab.n, dtype=np.int64)
        for i in range(len(U)):
            a = self.U_to_ab[i]
            if out[a] < 0:
                out[a] = perm_on_U[i]
            elif out[a] != perm_on_U[i]:
                raise AssertionError("conjugation must descend to Uab")
        return out

    def dlog_in_P(self, g: int) -> int:
        """Discrete log of a P-element w.r.t. the canonical generator."""
        return self._dlog[int(self.ppos[g])]

    def generates_P(self, g: int) -> bool:
        """Whether a P-element generates P (trivial P: always)."""
        if self.is_trivial:
            return True
        if not self.is_cyclic:
            raise ValueError("generator test only applies to cyclic P")
        d = self.dlog_in_P(g)
        return d % self.level.p != 0

    def omega_exponents(self) -> np.ndarray:
        """For cyclic nontrivial P: the exponent array of the chosen
        order-p character on U (via the discrete log in P, mod p)."""
        if not self.is_cyclic or self.is_trivial:
            raise ValueError("omega is defined for nontrivial cyclic P")
        toG = self.level.to_G
        out = np.zeros(len(self.U_embed), dtype=np.int64)
        for i, w in enumerate(self.U_embed):
            out[i] = self.dlog_in_P(int(toG[w])) % self.level.p
        return out


def _subgroup_coset_reps(G: FiniteGroup, big: tuple, small: tuple):
    """Minimal representatives of the left cosets x*small inside big."""
    s = np.array(sorted(small), dtype=np.int64)
    seen = set()
    reps = []
    for x in sorted(big):
        coset = G.mul[x, s]
        key = int(coset.min())
        if key not in seen:
            seen.add(key)
            reps.append(key)
    return sorted(reps)


class SubgroupTable:
    """All subgroups of G with their level data, plus pair lists."""

    def __init__(self, level: LevelGroup, bound: int = 81):
        if level.G.n > bound:
            raise BoundExceeded(
                f"|G| = {level.G.n} exceeds the enumeration bound {bound}"
            )
        self.level = level
        subs = level.G.subgroups()
        self.order = list(subs)
        self.data = {P: SubgroupDatum(level, P) for P in subs}
        self.cyclic = [P for P in subs if self.data[P].is_cyclic]

    def datum(self, P: tuple) -> SubgroupDatum:
        return self.data[tuple(sorted(P))]

    def conjugate_subgroup(self, P: tuple, g: int) -> tuple:
        G = self.level.G
        return tuple(sorted(int(G.conj(g, x)) for x in P))

    def contains(self, P: tuple, Q: tuple) -> bool:
        """Whether Q is contained in P."""
        return set(Q) <= set(P)

    def power_subgroup(self, P: tuple) -> tuple:
        """The subgroup generated by p-th powers of P's elements."""
        G = self.level.G
        p = self.level.p
        return G.closure([G.power(int(x), p) for x in P])

    def pairs_with(self, cond) -> list:
        out = []
        for P in self.order:
            for Pp in self.order:
                if set(P) <= set(Pp) and cond(P, Pp):
                    out.append((P, Pp))
        return out
