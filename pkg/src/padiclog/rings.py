"""Group-ring arithmetic over Z/p^m and the elementary map layer.

A ring context pairs a FiniteGroup carrier with a coefficient modulus
p^m; elements are dense int64 vectors indexed by carrier elements.
On top of that this module provides

* the conjugacy-class module of a level group, free over the central
  Z_j on the fixed level lifts of G-class representatives;
* trace, norm and projection between nested abelian carriers, with the
  norm computed as an exact determinant over the subring;
* transfer- and p-power-induced ring maps;
* character twists into the mu_p-extension, the twisted-product norm
  route, and the map x -> x^p / (norm down the kernel of the twist);
* trace ideals with Howell-backed membership certificates.

The determinant routine prefers unit pivots (always available for
units over these local rings) and falls back to cofactor expansion for
matrices up to 4 x 4, which covers index-p steps on non-units.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .coeffs import CycloExt
from .groups import FiniteGroup, LevelGroup, SubgroupDatum, left_cosets, transfer
from .linalg import NonUnit


class CarrierMismatch(ValueError):
    """Operands live over different carriers or precisions."""


class RingCtx:
    """The group ring (Z/p^m)[carrier] with dense coefficient vectors."""

    def __init__(self, grp: FiniteGroup, p: int, m: int):
        self.grp = grp
        self.p = p
        self.m = m
        self.q = q = p**m
        self.n = n = grp.n
        if n * q * q >= 2**62:
            raise ValueError("modulus too large for exact int64 convolution")
        inv = grp.inv
        mul = grp.mul
        # ldiv[i, k] = i^-1 * k  and  rdiv[k, h] = k * h^-1
        self.ldiv = mul[inv][:, :]
        self.rdiv = mul[:, inv][:, :]
        self._pow_cache = {}

    def zero(self) -> np.ndarray:
        return np.zeros(self.n, dtype=np.int64)

    def one(self) -> np.ndarray:
        z = self.zero()
        z[0] = 1
        return z

    def basis(self, g: int) -> np.ndarray:
        z = self.zero()
        z[g] = 1
        return z

    def scalar(self, c: int) -> np.ndarray:
        z = self.zero()
        z[0] = c % self.q
        return z

    def reduce(self, vec) -> np.ndarray:
        return np.asarray(vec, dtype=np.int64) % self.q

    def add(self, a, b) -> np.ndarray:
        return (a + b) % self.q

    def mul(self, a, b) -> np.ndarray:
        return (a[:, None] * b[self.ldiv]).sum(axis=0) % self.q

    def mul_rows(self, a, rows) -> np.ndarray:
        """a * r for every row r of rows, shape (k, n)."""
        gathered = rows[:, self.ldiv]          # (k, n, n)
        return np.einsum("i,kin->kn", a, gathered) % self.q

    def pow(self, a, e: int) -> np.ndarray:
        acc = self.one()
        base = a % self.q
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def augment(self, a) -> int:
        return int(a.sum() % self.q)

    def is_unit(self, a) -> bool:
        return self.augment(a) % self.p != 0

    def invert(self, a) -> np.ndarray:
        """Inverse of a unit via the right-multiplication linear system."""
        if not self.is_unit(a):
            raise NonUnit("augmentation is divisible by p")
        mat = a[self.rdiv]
        sol = linalg.solve_unit(mat, self.one(), self.p, self.m)
        assert np.array_equal(self.mul(a, sol), self.one())
        return sol

    def conjugate(self, a, g: int) -> np.ndarray:
        """g a g^-1, an index permutation of the coefficients."""
        grp = self.grp
        perm = grp.mul[grp.mul[g, np.arange(self.n)], grp.inv[g]]
        out = self.zero()
        out[perm] = a
        return out

    def pushforward(self, a, arr, target: "RingCtx") -> np.ndarray:
        """Image under the ring map induced by the element map arr."""
        out = target.zero()
        np.add.at(out, arr, a)
        return out % target.q

    def random_element(self, rng) -> np.ndarray:
        return np.array([rng.randrange(self.q) for _ in range(self.n)], dtype=np.int64)

    def random_unit(self, rng) -> np.ndarray:
        """Seeded random unit: any augmentation prime to p works."""
        vec = self.random_element(rng)
        if vec.sum() % self.p == 0:
            vec[0] = (vec[0] + 1) % self.q
        assert self.is_unit(vec)
        return vec


def det_ring(mats: np.ndarray, ctx: RingCtx) -> np.ndarray:
    """Determinant of a matrix over a commutative group-ring context.

    mats has shape (r, r, n).  Unit-pivot elimination when possible;
    cofactor expansion for r <= 4 otherwise.
    """
    r = mats.shape[0]
    if r == 0:
        return ctx.one()
    if r == 1:
        return mats[0, 0] % ctx.q
    work = mats % ctx.q
    sign = 1
    det = ctx.one()
    cofactor_needed = False
    work = work.copy()
    for c in range(r):
        piv = None
        for i in range(c, r):
            if ctx.is_unit(work[i, c]):
                piv = i
                break
        if piv is None:
            cofactor_needed = True
            break
        if piv != c:
            work[[c, piv]] = work[[piv, c]]
            sign = -sign
        pivot = work[c, c]
        det = ctx.mul(det, pivot)
        pinv = ctx.invert(pivot)
        for i in range(c + 1, r):
            if work[i, c].any():
                f = ctx.mul(work[i, c], pinv)
                work[i, c:] = (work[i, c:] - ctx.mul_rows(f, work[c, c:])) % ctx.q
    if not cofactor_needed:
        if sign < 0:
            det = (-det) % ctx.q
        return det
    if r > 4:
        raise NonUnit("no unit pivot and matrix too large for cofactors")
    return _det_cofactor(mats % ctx.q, ctx)


def _det_cofactor(mats: np.ndarray, ctx: RingCtx) -> np.ndarray:
    r = mats.shape[0]
    if r == 1:
        return mats[0, 0]
    out = ctx.zero()
    for i in range(r):
        if not mats[i, 0].any():
            continue
        minor = np.delete(np.delete(mats, i, axis=0), 0, axis=1)
        term = ctx.mul(mats[i, 0], _det_cofactor(minor, ctx))
        if i % 2:
            out = (out - term) % ctx.q
        else:
            out = (out + term) % ctx.q
    return out


class ClassCtx:
    """The conjugacy-class module of a level group over Z/p^m.

    Basis: conjugacy classes of the level group, represented by their
    minimal elements.  Freeness over (Z/p^m)[Z_j] on the fixed lifts of
    G-class representatives is asserted at construction.
    """

    def __init__(self, level: LevelGroup, m: int):
        self.level = level
        self.p = level.p
        self.m = m
        self.q = level.p**m
        class_of, reps = level.group.conjugacy_classes()
        self.class_of = class_of
        self.reps = reps
        self.nc = len(reps)
        grp = level.group
        self.phi_class = np.array(
            [class_of[grp.power(r, level.p)] for r in reps], dtype=np.int64
        )
        # freeness over Z_j: z * lift(G-class rep) hits every class once
        g_class_of, g_reps = level.G.conjugacy_classes()
        seen = set()
        for cbar in g_reps:
            w = int(level.lift[cbar])
            for z in level.Zj:
                cls = int(class_of[grp.mul[z, w]])
                if cls in seen:
                    raise AssertionError("class module is not free over Z_j")
                seen.add(cls)
        if len(seen) != self.nc:
            raise AssertionError("Z_j times G-classes must cover all classes")

    def zero(self) -> np.ndarray:
        return np.zeros(self.nc, dtype=np.int64)

    def project(self, vec) -> np.ndarray:
        """Class projection of a group-ring vector."""
        out = self.zero()
        np.add.at(out, self.class_of, vec)
        return out % self.q

    def phi(self, cvec) -> np.ndarray:
        """The map sending a class [g] to [g^p], extended linearly."""
        out = self.zero()
        np.add.at(out, self.phi_class, cvec)
        return out % self.q

    def basis_of_class(self, c: int) -> np.ndarray:
        z = self.zero()
        z[c] = 1
        return z


class AbelianStep:
    """A pair V <= A of abelian carriers with trace/norm down to R[V].

    A is the carrier of an existing ring context; V a subgroup of it.
    The norm is the determinant of the multiplication matrix over R[V]
    w.r.t. the canonical coset basis; the trace is its diagonal sum.
    """

    def __init__(self, ctx: RingCtx, V: tuple):
        if not ctx.grp.is_abelian():
            raise ValueError("step carrier must be abelian")
        self.ctx = ctx
        A = ctx.grp
        self.V = V = tuple(sorted(int(i) for i in V))
        self.V_grp, self.V_embed = A.subgroup_group(V)
        self.vctx = RingCtx(self.V_grp, ctx.p, ctx.m)
        self.vpos = -np.ones(A.n, dtype=np.int64)
        for i, g in enumerate(self.V_embed):
            self.vpos[g] = i
        reps, coset_of = left_cosets(A, V)
        self.reps = reps
        self.coset_of = coset_of
        self.r = len(reps)
        # scatter targets: rep_i * a lands in coset J[i,a] with V-part W[i,a]
        mul = A.mul
        inv = A.inv
        rv = np.array(reps, dtype=np.int64)
        prod = mul[rv][:, :]                      # (r, n): rep_i * a
        J = coset_of[prod]
        back = inv[rv[J]]                         # (r, n): rep_{J}^{-1}
        W = self.vpos[mul[back, prod]]
        assert (W >= 0).all()
        self.J = J
        self.W = W

    def matrix(self, x) -> np.ndarray:
        """Right-multiplication matrix of x over R[V], shape (r, r, |V|)."""
        r, nV = self.r, self.V_grp.n
        E = np.zeros((r, r * nV), dtype=np.int64)
        flat = self.J * nV + self.W
        for i in range(r):
            np.add.at(E[i], flat[i], x)
        return (E % self.ctx.q).reshape(r, r, nV)

    def trace(self, x) -> np.ndarray:
        out = np.zeros(self.V_grp.n, dtype=np.int64)
        for i in range(self.r):
            mask = self.J[i] == i
            np.add.at(out, self.W[i][mask], x[mask])
        return out % self.ctx.q

    def norm(self, x) -> np.ndarray:
        return det_ring(self.matrix(x), self.vctx)

    def embed(self, v) -> np.ndarray:
        """Inclusion R[V] -> R[A]."""
        out = self.ctx.zero()
        out[np.array(self.V_embed, dtype=np.int64)] = v
        return out

    def omega_exponents(self) -> np.ndarray:
        """Exponent array of the canonical order-[A:V] character of A/V
        (element 1 of the quotient in canonical order is the chosen
        generator); only used when A/V is cyclic."""
        Q, proj = self.ctx.grp.quotient(self.V)
        if not Q.is_cyclic():
            raise ValueError("step quotient is not cyclic")
        gen = 1 if Q.n > 1 else 0
        dlog = -np.ones(Q.n, dtype=np.int64)
        x = 0
        for k in range(Q.n):
            dlog[x] = k
            x = int(Q.mul[x, gen])
        return dlog[proj]


def twisted_product_norm(step: AbelianStep, x, ext: CycloExt) -> np.ndarray:
    """The product of the twists of x by all powers of the step
    character, computed in the mu_p-extension.

    For an index-p abelian step this is the Galois-product form of the
    norm: the result must be base-valued and supported on V, and is
    returned as a vector over R[V].
    """
    ctx = step.ctx
    p = ctx.p
    if step.r != p:
        raise ValueError("twisted product form requires an index-p step")
    if ext.p != p or ext.m != ctx.m:
        raise ValueError("extension ring must match the step context")
    expo = step.omega_exponents() % p
    deg = ext.deg
    n = ctx.n
    # reduction tensor for products in the extension
    red = np.zeros((deg, deg, deg), dtype=np.int64)
    for d1 in range(deg):
        for d2 in range(deg):
            red[d1, d2] = ext._red[d1 + d2]
    acc = np.zeros((n, deg), dtype=np.int64)
    acc[0, 0] = 1
    for k in range(p):
        xt = np.zeros((n, deg), dtype=np.int64)
        for g in range(n):
            if x[g]:
                xt[g] = (x[g] * ext.t_pow(int(expo[g]) * k)) % ctx.q
        gathered = xt[ctx.ldiv]                  # (n, n, deg)
        acc = np.einsum("ia,inb,abd->nd", acc, gathered, red) % ctx.q
    if acc[:, 1:].any():
        raise AssertionError("twisted product must be base-valued")
    base = acc[:, 0]
    outside = np.ones(n, dtype=bool)
    outside[np.array(step.V_embed, dtype=np.int64)] = False
    if base[outside].any():
        raise AssertionError("twisted product must be supported on V")
    return base[np.array(step.V_embed, dtype=np.int64)] % ctx.q


def alpha_map(datum: SubgroupDatum, ctx: RingCtx, x) -> np.ndarray:
    """x^p for trivial or noncyclic P; for nontrivial cyclic P, x^p
    divided by the norm of x down the kernel of the omega character,
    included back into the carrier.  Requires x to be a unit in the
    cyclic case."""
    p = ctx.p
    if not datum.is_cyclic or datum.is_trivial:
        return ctx.pow(x, p)
    expo = datum.omega_exponents()
    # cyclic P forces U abelian, so U indices and Uab indices agree
    assert len(expo) == ctx.n
    K = tuple(int(i) for i in np.nonzero(expo % p == 0)[0])
    step = AbelianStep(ctx, K)
    nm = step.norm(x)
    denom = step.embed(nm)
    return ctx.mul(ctx.pow(x, p), ctx.invert(denom))


# --------------------------------------------------------------------
# induced ring maps between subgroup carriers


def ab_projection_map(dP: SubgroupDatum, dPp: SubgroupDatum) -> np.ndarray:
    """Index map realizing R[U_P^ab] -> R[V], V the image of U_P inside
    U_P'^ab.  Requires P <= P'."""
    if not set(dP.P) <= set(dPp.P):
        raise ValueError("first subgroup must lie in the second")
    arr = -np.ones(dP.Uab.n, dtype=np.int64)
    for i, w in enumerate(dP.U_embed):
        src = int(dP.U_to_ab[i])
        tgt = int(dPp.U_to_ab[dPp.upos[w]])
        if arr[src] < 0:
            arr[src] = tgt
        elif arr[src] != tgt:
            raise AssertionError("projection must factor through U_P^ab")
    return arr


def image_subgroup_in_ab(dP: SubgroupDatum, dPp: SubgroupDatum) -> tuple:
    """Indices of the image of U_P inside U_P'^ab."""
    vals = set()
    for w in dP.U_embed:
        vals.add(int(dPp.U_to_ab[dPp.upos[w]]))
    return tuple(sorted(vals))


def ver_map(level: LevelGroup, dPp: SubgroupDatum, dP: SubgroupDatum) -> np.ndarray:
    """Index map on abelianized carriers induced by the transfer from
    U_P' down to U_P.  Routes through parent indices and the data's own
    abelianization arrays."""
    out = -np.ones(dPp.Uab.n, dtype=np.int64)
    for w in dPp.U_embed:
        src = int(dPp.U_to_ab[dPp.upos[w]])
        t = transfer(level.group, dPp.U, dP.U, int(w))
        tgt = int(dP.U_to_ab[dP.upos[t]])
        if out[src] < 0:
            out[src] = tgt
        elif out[src] != tgt:
            raise AssertionError("transfer must factor through the source ab")
    return out


def p_power_map(level: LevelGroup, dSrc: SubgroupDatum, dTgt: SubgroupDatum) -> np.ndarray:
    """Index map sending u to u^p from U_src^ab into U_tgt^ab.

    Requires p-th powers of U_src to land in U_tgt (true when the
    p-power subgroup of P_src lies in P_tgt) and U_src abelian, which
    is the cyclic-P case this is used for.
    """
    grp = level.group
    out = -np.ones(dSrc.Uab.n, dtype=np.int64)
    for i, w in enumerate(dSrc.U_embed):
        src = int(dSrc.U_to_ab[i])
        wp = grp.power(int(w), level.p)
        pos = int(dTgt.upos[wp])
        if pos < 0:
            raise ValueError("p-th power lands outside the target carrier")
        tgt = int(dTgt.U_to_ab[pos])
        if out[src] < 0:
            out[src] = tgt
        elif out[src] != tgt:
            raise AssertionError("p-power map must factor through the ab")
    return out


# --------------------------------------------------------------------
# trace ideals


class TraceIdeal:
    """Generators of a trace ideal over a subgroup carrier, with
    Howell-backed membership at any p-power scaling.

    kind 'pair': T_{P,P'} = image of x -> sum over P'/P of gxg^-1 on
    R[U_P^ab]; requires P normal in P'.  kind 'self': T_P, the same sum
    over the Weyl group N_G(P)/P; for trivial P this is |G| R[Z_j] by
    definition.
    """

    def __init__(self, datum: SubgroupDatum, kind: str, upper: tuple | None = None):
        self.datum = datum
        self.kind = kind
        level = datum.level
        G = level.G
        dim = datum.Uab.n
        if kind == "self" and datum.is_trivial:
            gens = (G.n * np.eye(dim, dtype=np.int64))
        else:
            if kind == "self":
                reps = datum.W_reps
            elif kind == "pair":
                from .groups import _subgroup_coset_reps

                Pset = set(datum.P)
                if upper is None or not Pset <= set(upper):
                    raise ValueError("pair kind needs an upper subgroup")
                for g in upper:
                    if tuple(sorted(G.conj(int(g), int(x)) for x in datum.P)) != datum.P:
                        raise ValueError("P must be normal in the upper subgroup")
                reps = _subgroup_coset_reps(G, tuple(upper), datum.P)
            else:
                raise ValueError(f"unknown trace ideal kind {kind!r}")
            perms = []
            for g in reps:
                perms.append(datum._conj_perm_ab(int(g)))
            perms = np.array(perms, dtype=np.int64)
            gens = np.zeros((dim, dim), dtype=np.int64)
            for u in range(dim):
                np.add.at(gens[u], perms[:, u], 1)
        self.gens = gens
        self._howells = {}

    def membership(self, x, m: int, scale_pow: int = 0):
        """Coefficients over the (p^scale_pow)-scaled generators
        expressing x, or None.  m is the working precision."""
        key = (m, scale_pow)
        if key not in self._howells:
            p = self.datum.level.p
            gens = (self.gens * p**scale_pow) % p**m
            self._howells[key] = linalg.Howell(gens, p, m)
        return self._howells[key].contains(x)
