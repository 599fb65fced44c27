"""The map family between units of the level ring and additive data.

One K1Context bundles a level group with a working precision and
provides, for every subgroup P of the common quotient G:

* theta_P: determinant of left multiplication on the coset basis with
  entries pushed to the abelianized carrier (the norm-map family);
* t_P, eta_P, beta_P: the additive transfer family and its
  generator-part correction on cyclic carriers;
* delta: the scaled left inverse of beta, summing class lifts of the
  cyclic entries with 1/[G:P] weights;
* logarithms: the plain series on 1+J, its class projection, the
  exponential on p-scaled ideals, and the phi-corrected integral
  logarithm whose per-term divisions are the integrality claims;
* omega_to_ab: the product-of-representatives map to the level
  abelianization;
* u_P, v_P and the calL family tying the two sides together.

Series are evaluated with precision headroom derived from the
nilpotency index of the mod-p augmentation ideal, so that values
reported at the requested precision are exact despite the 1/p and 1/k
divisions along the way.
"""

from __future__ import annotations

import numpy as np

from .coeffs import IntegralityFailure, PrecisionError, Scaled
from .groups import LevelGroup, SubgroupTable
from .linalg import inv_mod, vp
from .rings import (
    AbelianStep,
    ClassCtx,
    RingCtx,
    TraceIdeal,
    alpha_map,
    det_ring,
    p_power_map,
)


def nilpotency_index(ctx: RingCtx) -> int:
    """Least N with Jbar^N = 0, Jbar the augmentation ideal mod p."""
    p = ctx.p
    n = ctx.n
    gens = [g for g in range(1, n)]
    basis = np.zeros((len(gens), n), dtype=np.int64)
    for i, g in enumerate(gens):
        basis[i, g] = 1
        basis[i, 0] = p - 1
    basis = _echelon_mod_p(basis, p)
    N = 1
    while basis.shape[0]:
        prods = []
        for g in gens:
            # row * (e_g - e_0): index shift by g minus the row itself
            shifted = basis[:, ctx.ldiv[g]]
            prods.append((shifted - basis) % p)
        basis = _echelon_mod_p(np.concatenate(prods, axis=0), p)
        N += 1
        if N > n + 1:
            raise AssertionError("augmentation ideal failed to vanish")
    return N


def _echelon_mod_p(rows: np.ndarray, p: int) -> np.ndarray:
    """Reduced basis of the row span over F_p."""
    mat = rows % p
    mat = mat[mat.any(axis=1)]
    out = []
    pivots = {}
    for row in mat:
        row = row.copy()
        while row.any():
            c = int(np.nonzero(row)[0][0])
            if c in pivots:
                prow = pivots[c]
                row = (row - row[c] * inv_mod(int(prow[c]), p) * prow) % p
            else:
                pivots[c] = row
                out.append(row)
                break
    if not out:
        return np.zeros((0, rows.shape[1]), dtype=np.int64)
    return np.array(out, dtype=np.int64)


def _tail_cap(p: int, M: int, k0: int, extra_div: int = 0) -> int:
    """Valuation floor for the dropped tail of an alternating power
    series truncated once the running power vanishes mod p^M at k0.

    True tail terms for k >= k0 lie in p^(M floor(k/k0)) R divided by
    k (and possibly one extra factor of p), so the bound is the min of
    t M - extra_div - floor(log_p((t+1) k0 - 1)) over small t."""
    best = None
    for t in range(1, 5):
        top = (t + 1) * k0 - 1
        lg = 0
        while p ** (lg + 1) <= top:
            lg += 1
        cand = t * M - extra_div - lg
        best = cand if best is None else min(best, cand)
        if t * M > (best or 0) + M:
            break
    return max(best, 0)


def _fact_vp(k: int, p: int) -> int:
    v = 0
    pk = p
    while pk <= k:
        v += k // pk
        pk *= p
    return v


def headroom(p: int, m: int, nil: int) -> int:
    """Internal precision such that logarithm series keep m honest
    digits: division losses plus the truncation tail (one p worse for
    the phi-corrected series) both stay under the slack s, which means
    p^(s-2) >= 2 nil (m + s)."""
    s = 2
    while p ** (s - 2) < 2 * nil * (m + s):
        s += 1
    return m + s


class K1Context:
    """Level group + precision + all per-subgroup machinery."""

    def __init__(self, level: LevelGroup, m: int, bound: int = 81):
        self.level = level
        self.p = p = level.p
        self.m = m
        self.q = p**m
        self.table = SubgroupTable(level, bound)
        self.ring = RingCtx(level.group, p, m)
        self.cctx = ClassCtx(level, m)
        self.carriers = {
            P: RingCtx(d.Uab, p, m) for P, d in self.table.data.items()
        }
        self.subgroups = self.table.order
        self.cyclics = self.table.cyclic
        self._theta_scatter = {}
        self._t_matrices = {}
        self._eta_masks = {}
        self._class_lift = {}
        self._trace_self = {}
        self._ppow_maps = {}
        self._nil = None

    # -- plumbing ----------------------------------------------------

    def datum(self, P):
        return self.table.datum(P)

    def carrier(self, P) -> RingCtx:
        return self.carriers[tuple(sorted(P))]

    def nilpotency(self) -> int:
        if self._nil is None:
            self._nil = nilpotency_index(RingCtx(self.level.group, self.p, 1))
        return self._nil

    def trace_self(self, P) -> TraceIdeal:
        P = tuple(sorted(P))
        if P not in self._trace_self:
            self._trace_self[P] = TraceIdeal(self.datum(P), "self")
        return self._trace_self[P]

    def ppow_map(self, Psrc, Ptgt) -> np.ndarray:
        key = (tuple(sorted(Psrc)), tuple(sorted(Ptgt)))
        if key not in self._ppow_maps:
            self._ppow_maps[key] = p_power_map(
                self.level, self.datum(Psrc), self.datum(Ptgt)
            )
        return self._ppow_maps[key]

    def phi_into(self, x, Psrc, Ptgt):
        """Push x over the Psrc carrier through u -> u^p into Ptgt's."""
        arr = self.ppow_map(Psrc, Ptgt)
        tgt = self.carrier(Ptgt)
        out = tgt.zero()
        np.add.at(out, arr, x)
        return out % tgt.q

    # -- theta -------------------------------------------------------

    def _scatter(self, P):
        P = tuple(sorted(P))
        if P not in self._theta_scatter:
            d = self.datum(P)
            nab = d.Uab.n
            mul = self.level.group.mul
            rows = []
            for c in d.lift_reps:
                pr = mul[:, c]
                rows.append(d.dec_coset[pr] * nab + d.dec_ab[pr])
            self._theta_scatter[P] = np.array(rows, dtype=np.int64)
        return self._theta_scatter[P]

    def theta_matrix(self, x, P) -> np.ndarray:
        """Matrix of left multiplication by x acting on the left-coset
        basis, entries pushed to the abelianized carrier.

        Left multiplication commutes with the right module structure
        over the coset decomposition, which is what makes the matrix
        multiplicative.  Row i holds the expansion of x times the i-th
        basis vector, so the array is the transpose of the usual
        coordinate matrix; the determinant downstream does not care."""
        d = self.datum(P)
        r = len(d.lift_reps)
        nab = d.Uab.n
        sc = self._scatter(P)
        M = np.zeros((r, r * nab), dtype=np.int64)
        for i in range(r):
            np.add.at(M[i], sc[i], x)
        return (M % self.q).reshape(r, r, nab)

    def theta_P(self, x, P) -> np.ndarray:
        return det_ring(self.theta_matrix(x, P), self.carrier(P))

    def theta(self, x) -> dict:
        return {P: self.theta_P(x, P) for P in self.subgroups}

    # -- additive maps ----------------------------------------------

    def t_matrix(self, P) -> np.ndarray:
        """Matrix of t_P from level classes to the P carrier; entries
        are plain coset-visit counts."""
        P = tuple(sorted(P))
        if P not in self._t_matrices:
            d = self.datum(P)
            grp = self.level.group
            mat = np.zeros((d.Uab.n, self.cctx.nc), dtype=np.int64)
            for ci, g in enumerate(self.cctx.reps):
                for c in d.lift_reps:
                    y = grp.mul[grp.inv[c], grp.mul[g, c]]
                    pos = d.upos[y]
                    if pos >= 0:
                        mat[d.U_to_ab[pos], ci] += 1
            self._t_matrices[P] = mat
        return self._t_matrices[P]

    def eta_mask(self, P) -> np.ndarray:
        """Indicator over the carrier basis of elements whose image
        generates the cyclic subgroup P (all of them when P trivial)."""
        P = tuple(sorted(P))
        if P not in self._eta_masks:
            d = self.datum(P)
            if not d.is_cyclic:
                raise ValueError("eta is defined for cyclic P")
            if d.is_trivial:
                mask = np.ones(d.Uab.n, dtype=np.int64)
            else:
                mask = (d.omega_exponents() % self.p != 0).astype(np.int64)
            self._eta_masks[P] = mask
        return self._eta_masks[P]

    def t_P(self, a, P) -> np.ndarray:
        return (self.t_matrix(P) @ a) % self.q

    def eta_P(self, x, P) -> np.ndarray:
        return (x * self.eta_mask(P)) % self.q

    def beta_matrix(self, P) -> np.ndarray:
        mat = self.t_matrix(P)
        if self.datum(P).is_cyclic:
            mat = mat * self.eta_mask(P)[:, None]
        return mat

    def beta_P(self, a, P) -> np.ndarray:
        return (self.beta_matrix(P) @ a) % self.q

    def beta(self, a) -> dict:
        return {P: self.beta_P(a, P) for P in self.subgroups}

    def class_lift(self, P) -> np.ndarray:
        """Carrier index -> level conjugacy class, for cyclic P."""
        P = tuple(sorted(P))
        if P not in self._class_lift:
            d = self.datum(P)
            assert d.is_cyclic
            emb = np.array(d.U_embed, dtype=np.int64)
            self._class_lift[P] = self.cctx.class_of[emb]
        return self._class_lift[P]

    def delta(self, tup: dict) -> Scaled:
        """Sum of class lifts of the cyclic entries weighted 1/[G:P].

        Accumulates exactly (no modular reduction), so integer-valued
        inputs give the exact rational answer; the Scaled result then
        carries precision m - v_p([G:1])."""
        G_order = self.level.G.n
        smax = vp(G_order, self.p)
        acc = np.zeros(self.cctx.nc, dtype=np.int64)
        for P in self.cyclics:
            a = tup[P]
            idx = self.G_index(P)
            w = self.p ** (smax - vp(idx, self.p))
            out = np.zeros(self.cctx.nc, dtype=np.int64)
            np.add.at(out, self.class_lift(P), np.asarray(a, dtype=np.int64))
            acc = acc + w * out
        return Scaled(self.p, acc, smax, self.m - smax)

    def G_index(self, P) -> int:
        return self.level.G.n // len(P)

    # -- logarithms --------------------------------------------------

    def series_ctx(self) -> RingCtx:
        M = headroom(self.p, self.m, self.nilpotency())
        return RingCtx(self.level.group, self.p, M)

    def omega_to_ab(self, a) -> int:
        """Product of class representatives to the powers given by the
        coefficients, landing in the level abelianization."""
        lvl = self.level
        ab = lvl.ab
        acc = 0
        for c, coeff in enumerate(np.asarray(a, dtype=np.int64)):
            e = int(coeff) % self.q
            if e == 0:
                continue
            g = ab.power(int(lvl.ab_proj[self.cctx.reps[c]]), e)
            acc = int(ab.mul[acc, g])
        return acc

    def high_precision(self) -> "K1Context":
        """A context over the same level at series headroom precision.

        Values computed there and reduced to m digits are exact, which
        is how the log-based checks avoid reporting precision they do
        not have.
        """
        if not hasattr(self, "_high"):
            M = headroom(self.p, self.m, self.nilpotency())
            self._high = K1Context(self.level, M) if M > self.m else self
        return self._high


def log_ring(ctx: RingCtx, v) -> Scaled:
    """log(1 + v) as a Scaled ring vector; v must lie in (p, J).

    The returned precision accounts both for divisions by k and for
    the truncated tail, whose true terms sit in p^m R but can lose
    log_p(k) digits to the division."""
    if (int(v.sum()) % ctx.p) != 0:
        raise ValueError("argument must lie in the augmentation+p ideal")
    acc = Scaled(ctx.p, ctx.zero(), 0, ctx.m)
    power = ctx.one()
    k = 0
    while True:
        k += 1
        power = ctx.mul(power, v)
        if not power.any():
            break
        term = Scaled(ctx.p, power if k % 2 else (-power) % ctx.q, 0, ctx.m)
        acc = acc + term.divide_exact(k)
        if k > ctx.n * ctx.m + ctx.m:
            raise AssertionError("log series failed to terminate")
    cap = min(acc.prec, _tail_cap(ctx.p, ctx.m, k))
    if cap <= 0:
        raise PrecisionError("log series retains no correct digits")
    return acc.reduce_prec(cap)


def log_classes(ctx: RingCtx, cctx: ClassCtx, v) -> Scaled:
    """Class projection of log(1 + v)."""
    if (int(v.sum()) % ctx.p) != 0:
        raise ValueError("argument must lie in the augmentation+p ideal")
    acc = Scaled(ctx.p, cctx.zero(), 0, ctx.m)
    power = ctx.one()
    k = 0
    while True:
        k += 1
        power = ctx.mul(power, v)
        if not power.any():
            break
        pr = cctx.project(power)
        term = Scaled(ctx.p, pr if k % 2 else (-pr) % cctx.q, 0, ctx.m)
        acc = acc + term.divide_exact(k)
        if k > ctx.n * ctx.m + ctx.m:
            raise AssertionError("log series failed to terminate")
    cap = min(acc.prec, _tail_cap(ctx.p, ctx.m, k))
    if cap <= 0:
        raise PrecisionError("log series retains no correct digits")
    return acc.reduce_prec(cap)


def exp_ring(ctx: RingCtx, x) -> tuple:
    """exp(x) for x with all coefficients divisible by p.

    Factorial denominators eat roughly 1/(p-1) of the argument's
    valuation, so the honest output precision is noticeably below the
    working precision; it is computed from the truncation point and
    returned alongside the value."""
    p = ctx.p
    if (np.asarray(x) % p).any():
        raise ValueError("exp needs an argument divisible by p")
    acc = Scaled(p, ctx.one(), 0, ctx.m)
    power = ctx.one()
    k = 0
    fact = 1
    while True:
        k += 1
        fact *= k
        power = ctx.mul(power, x)
        if not power.any():
            break
        acc = acc + Scaled(p, power, 0, ctx.m).divide_exact(fact)
        if k > ctx.n * ctx.m + ctx.m:
            raise AssertionError("exp series failed to terminate")
    M = ctx.m
    cap = None
    for kk in range(k, k + 6 * M + 1):
        val = max(kk, M * (kk // k)) - _fact_vp(kk, p)
        cap = val if cap is None else min(cap, val)
    prec = min(acc.prec, max(cap, 0))
    if prec <= 0:
        raise PrecisionError("exp series retains no correct digits")
    payload = acc.reduce_prec(prec).normalize()[0]
    return payload % p**prec, prec


def integral_log(ctx: RingCtx, cctx: ClassCtx, x, out_prec: int) -> tuple:
    """The phi-corrected logarithm of a unit, in the class module.

    Strips the Teichmueller scalar of the augmentation, then evaluates

        sum_{p not| k} (-1)^(k+1) [v^k]/k
      + sum_{k} (-1)^(k+1) ([v^(pk)] - phi[v^k]) / (pk)

    with every division exact; a failing division raises
    IntegralityFailure and is a genuine counterexample at this level.
    Returns (class vector, achieved precision >= out_prec).
    """
    p = ctx.p
    aug = int(x.sum() % ctx.q)
    if aug % p == 0:
        raise ValueError("integral log needs a unit")
    t = pow(aug, p**ctx.m, ctx.q)
    x1 = (x * inv_mod(t, ctx.q)) % ctx.q
    v = x1.copy()
    v[0] = (v[0] - 1) % ctx.q
    # class projections of all powers of v, computed once
    proj = {}
    power = ctx.one()
    k = 0
    while True:
        k += 1
        power = ctx.mul(power, v)
        if not power.any():
            kmax = k
            break
        proj[k] = cctx.project(power)
        if k > ctx.n * ctx.m + ctx.m:
            raise AssertionError("integral log series failed to terminate")
    acc = Scaled(p, cctx.zero(), 0, ctx.m)
    for k in range(1, kmax):
        if k % p:
            term = proj[k] if k % 2 else (-proj[k]) % cctx.q
            acc = acc + Scaled(p, term, 0, ctx.m).divide_exact(k)
    for k in range(1, kmax):
        top = proj.get(p * k, cctx.zero())
        diff = (top - cctx.phi(proj[k])) % cctx.q
        if not diff.any():
            continue
        term = diff if k % 2 else (-diff) % cctx.q
        ts = Scaled(p, term, 0, ctx.m).divide_exact(p * k)
        if not ts.is_integral():
            raise IntegralityFailure(
                f"term at k={k}: [v^(pk)] - phi[v^k] not divisible by {p * k}"
            )
        acc = acc + ts
    cap = _tail_cap(p, ctx.m, kmax, extra_div=1)
    acc = acc.reduce_prec(min(acc.prec, cap))
    payload, prec = acc.normalize()
    if prec < out_prec:
        raise PrecisionError(
            f"series lost too much precision: {prec} < {out_prec}"
        )
    return payload % p**prec, prec


# --------------------------------------------------------------------
# the u/v/calL family


def u_P(kctx: K1Context, alpha_tuple: dict, P) -> np.ndarray:
    """Product of phi-pushforwards of the alpha'd entries at P' with
    P'^p = P (P cyclic, P' != P) or P'^p <= P with exponent |P'|
    (P noncyclic).  Empty product is 1."""
    P = tuple(sorted(P))
    ctx = kctx.carrier(P)
    d = kctx.datum(P)
    acc = ctx.one()
    for Pp in kctx.cyclics:
        Ppow = kctx.table.power_subgroup(Pp)
        if d.is_cyclic:
            if Ppow == P and Pp != P:
                acc = ctx.mul(acc, kctx.phi_into(alpha_tuple[Pp], Pp, P))
        else:
            if set(Ppow) <= set(P):
                f = kctx.phi_into(alpha_tuple[Pp], Pp, P)
                acc = ctx.mul(acc, ctx.pow(f, len(Pp)))
    return acc


def v_P(kctx: K1Context, tup: dict, P) -> Scaled:
    """Additive analogue of u_P; rational weights flow into the scale."""
    P = tuple(sorted(P))
    ctx = kctx.carrier(P)
    d = kctx.datum(P)
    p = kctx.p
    if d.is_cyclic:
        acc = ctx.zero()
        for Pp in kctx.cyclics:
            if kctx.table.power_subgroup(Pp) == P and Pp != P:
                acc = (acc + kctx.phi_into(tup[Pp], Pp, P)) % ctx.q
        return Scaled(p, (p * acc) % ctx.q, 0, kctx.m)
    s = vp(len(P), p)
    acc = np.zeros(ctx.n, dtype=np.int64)
    for Pp in kctx.cyclics:
        Ppow = kctx.table.power_subgroup(Pp)
        if set(Ppow) <= set(P):
            acc = acc + len(Pp) * kctx.phi_into(tup[Pp], Pp, P)
    return Scaled(p, acc, s, kctx.m - s)


def alpha_tuple_of(kctx: K1Context, tup: dict) -> dict:
    return {
        P: alpha_map(kctx.datum(P), kctx.carrier(P), tup[P])
        for P in kctx.subgroups
    }


def calL(kctx: K1Context, tup: dict) -> dict:
    """The map family tying multiplicative tuples to additive ones.

    Entry at P is a Scaled vector over the P carrier; integrality of
    each entry is part of the claims under test, so no normalization
    happens here.
    """
    p = kctx.p
    at = alpha_tuple_of(kctx, tup)
    out = {}
    for P in kctx.subgroups:
        ctx = kctx.carrier(P)
        d = kctx.datum(P)
        u = u_P(kctx, at, P)
        if d.is_cyclic and not d.is_trivial:
            ratio = ctx.mul(at[P], ctx.invert(u))
            w = ratio.copy()
            w[0] = (w[0] - 1) % ctx.q
            out[P] = log_ring(ctx, w).divide_exact(p)
        elif d.is_trivial:
            phi_x = kctx.phi_into(tup[P], P, P)
            denom = ctx.mul(phi_x, u)
            ratio = ctx.mul(at[P], ctx.invert(denom))
            w = ratio.copy()
            w[0] = (w[0] - 1) % ctx.q
            out[P] = log_ring(ctx, w).divide_exact(p)
        else:
            num = ctx.pow(at[P], p * len(P))
            ratio = ctx.mul(num, ctx.invert(u))
            w = ratio.copy()
            w[0] = (w[0] - 1) % ctx.q
            out[P] = log_ring(ctx, w).divide_exact(p * p * len(P))
    return out


def omega_to_ab(cctx: ClassCtx, a) -> int:
    """Image of a conjugacy-module vector in the abelianization of the
    level group: the product over classes of rep^coefficient.

    The result only determines a canonical element when the entries
    are known modulo the exponent of the abelianization; callers
    enforce that through the precision of a.
    """
    level = cctx.level
    ab = level.ab
    out = 0
    for c in range(cctx.nc):
        e = int(a[c]) % ab.n
        if e:
            g = int(level.ab_proj[cctx.reps[c]])
            out = int(ab.mul[out, ab.power(g, e)])
    return out
