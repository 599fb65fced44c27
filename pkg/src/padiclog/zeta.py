"""Exact rational L-value layer at modulus F p^(j+1) over the
rationals, plus the finite approximants built from smoothed values.

Everything before the final reduction is a Fraction: Bernoulli
numbers and polynomials, partial zeta values at negative integers
with Euler factors removed, L-values of locally constant functions
on the plus-quotient ray classes, and the smoothed differences.  The
smoothing element u enters through its exact cyclotomic-character
value (an integer congruent to 1+Fp), which stays meaningful even at
levels where u's image class is trivial.

Bernoulli numbers and the Euler-factor removal are each implemented
twice by genuinely different routes and compared in tests.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .coeffs import IntegralityFailure, fraction_mod
from .congruence import Verdict
from .groups import FiniteGroup
from .linalg import inv_mod, vp


# --------------------------------------------------------------------
# Bernoulli numbers and polynomials, two ways


@lru_cache(maxsize=None)
def bernoulli_number(k: int) -> Fraction:
    """B_k by the defining recurrence sum C(n+1,i) B_i = 0."""
    if k < 0:
        raise ValueError("negative index")
    if k == 0:
        return Fraction(1)
    acc = Fraction(0)
    for i in range(k):
        acc += math.comb(k + 1, i) * bernoulli_number(i)
    return -acc / (k + 1)


def bernoulli_akiyama(k: int) -> Fraction:
    """B_k by the Akiyama-Tanigawa triangle (second route)."""
    row = [Fraction(1, i + 1) for i in range(k + 1)]
    for i in range(1, k + 1):
        row = [(j + 1) * (row[j] - row[j + 1]) for j in range(k + 1 - i)]
    return row[0] if k != 1 else -row[0]


def bernoulli_poly_eval(k: int, x: Fraction) -> Fraction:
    """B_k(x) by the binomial expansion over the defining recurrence."""
    x = Fraction(x)
    acc = Fraction(0)
    for i in range(k + 1):
        acc += math.comb(k, i) * bernoulli_number(i) * x ** (k - i)
    return acc


def bernoulli_poly_coeffs(k: int) -> list:
    """Coefficient list of B_k (ascending), via the exponential
    generating function convolution with Akiyama-Tanigawa numbers."""
    fact = [math.factorial(i) for i in range(k + 1)]
    bern = [bernoulli_akiyama(i) / fact[i] for i in range(k + 1)]
    # t e^{xt}/(e^t-1) = (sum B_i t^i/i!)(sum x^j t^j/j!): coefficient
    # of t^k is sum_{i+j=k} B_i/i! x^j/j!, so [x^j] B_k = k!/j! B_{k-j}/(k-j)!
    return [fact[k] * bern[k - j] / fact[j] for j in range(k + 1)]


def bernoulli_poly_eval_gf(k: int, x: Fraction) -> Fraction:
    """B_k(x) by Horner on the generating-function coefficients."""
    x = Fraction(x)
    coeffs = bernoulli_poly_coeffs(k)
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


# --------------------------------------------------------------------
# partial zeta values at negative integers


def _hurwitz_neg(k: int, a: int, M: int) -> Fraction:
    """Value at 1-k of the one-sided class sum over n = a mod M, n > 0,
    for 1 <= a <= M; equals M^(k-1) (-B_k(a/M)/k)."""
    return Fraction(M) ** (k - 1) * (-bernoulli_poly_eval(k, Fraction(a, M)) / k)


def _two_sided(k: int, a: int, M: int) -> Fraction:
    """Sum over n = +-a mod M without double counting the fixed classes
    of negation."""
    a = a % M
    if a == 0:
        a = M
    b = (M - a) % M
    if b == 0:
        b = M
    if a == b:
        return _hurwitz_neg(k, a, M)
    return _hurwitz_neg(k, a, M) + _hurwitz_neg(k, b, M)


def partial_zeta(a: int, M: int, sigma, k: int, route: str = "euler") -> Fraction:
    """Value at s = 1-k of the sum of n^(-s) over positive n = +-a mod M
    with the Euler factors at primes of sigma not dividing M removed.

    route 'euler' peels primes in increasing order by the recursion
    zeta_S = zeta_{S-l} - l^(k-1) zeta_{S-l}(translated); route
    'moebius' expands the same product by inclusion-exclusion.
    """
    if M < 1 or math.gcd(a, M) != 1:
        raise ValueError("class representative must be a unit")
    if k <= 0 or k % 2:
        raise ValueError("k must be even and positive")
    extra = sorted(set(int(s) for s in sigma) - set(_prime_factors(M)))
    for ell in extra:
        if M % ell == 0:
            raise AssertionError
    if route == "euler":
        # peel one prime at a time: the subseries of multiples of ell
        # is the translated sum scaled by ell^(k-1), and primes already
        # removed stay removed on both terms of the recursion
        return _zeta_removed(k, a, M, tuple(extra))
    if route == "moebius":
        val = Fraction(0)
        for mask in range(1 << len(extra)):
            d = 1
            bits = 0
            for i, ell in enumerate(extra):
                if mask >> i & 1:
                    d *= ell
                    bits += 1
            ainv = (a * pow(d, -1, M)) % M if M > 1 else 1
            val += (-1) ** bits * Fraction(d) ** (k - 1) * _two_sided(k, ainv, M)
        return val
    raise ValueError(f"unknown route {route!r}")


def _zeta_partial_rec(k: int, a: int, M: int, removed: tuple, ell: int) -> Fraction:
    left = _zeta_removed(k, a, M, removed)
    ainv = (a * pow(ell, -1, M)) % M if M > 1 else 1
    right = _zeta_removed(k, ainv, M, removed)
    return left - Fraction(ell) ** (k - 1) * right


@lru_cache(maxsize=None)
def _zeta_removed(k: int, a: int, M: int, removed: tuple) -> Fraction:
    if not removed:
        return _two_sided(k, a, M)
    *rest, ell = removed
    return _zeta_partial_rec(k, a, M, tuple(rest), ell)


def _prime_factors(n: int) -> list:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# --------------------------------------------------------------------
# ray class levels and locally constant functions


class RayClassLevel:
    """The plus quotient of units modulo F p^(j+1) with the Artin
    labeling, the cyclotomic character, and the central line.

    j = -1 is allowed and gives the prime-to-p layer, used as the
    lower partner of the adjacent-level congruence.  Classes are
    labeled by their representative in 1..M/2 (or 1 for M <= 2);
    index 0 is always the trivial class.
    """

    def __init__(self, p: int, F: int, j: int):
        if p < 3 or p % 2 == 0:
            raise ValueError("p must be an odd prime")
        if F < 1 or F % p == 0:
            raise ValueError("conductor must be positive and prime to p")
        if j < -1:
            raise ValueError("level must be at least -1")
        self.p = p
        self.F = F
        self.j = j
        self.M = M = F * p ** (j + 1)
        reps = []
        for n in range(1, M + 1):
            if math.gcd(n, M) != 1:
                continue
            if min(n % M, (M - n) % M or M) == n or M == 1:
                reps.append(n)
        if M == 1:
            reps = [1]
        self.reps = sorted(reps)
        self.index = {r: i for i, r in enumerate(self.reps)}
        self.n = len(self.reps)
        # exact kappa value of the canonical topological generator of
        # the central line, and the conductor exponent it determines
        self.n_u = 1 + F * p
        self.f = vp(pow(self.n_u, p - 1) - 1, p)
        self.prec = self.f + max(j, 0)

    def class_of(self, n: int) -> int:
        """Class index of the Artin symbol of n."""
        M = self.M
        if M == 1:
            return 0
        n = n % M
        if math.gcd(n, M) != 1:
            raise ValueError(f"{n} is not a unit at modulus {M}")
        r = min(n, M - n)
        return self.index[r]

    def rep(self, i: int) -> int:
        return self.reps[i]

    def mul(self, i: int, k: int) -> int:
        return self.class_of(self.reps[i] * self.reps[k])

    def inv(self, i: int) -> int:
        if self.M == 1:
            return 0
        return self.class_of(pow(self.reps[i], -1, self.M))

    def kappa_pow(self, i: int, k: int, prec: int | None = None) -> int:
        """kappa(x)^k mod p^prec; needs k even so the sign ambiguity
        of the representative drops out."""
        if k % 2:
            raise ValueError("kappa powers are defined for even k")
        q = self.p ** (self.prec if prec is None else prec)
        return pow(self.reps[i], k, q)

    def group(self) -> FiniteGroup:
        mul = np.zeros((self.n, self.n), dtype=np.int64)
        for i in range(self.n):
            for k in range(self.n):
                mul[i, k] = self.mul(i, k)
        return FiniteGroup(mul)

    def central_class(self) -> int:
        return self.class_of(self.n_u)

    def project_to(self, other: "RayClassLevel") -> list:
        """Index map onto a lower level with the same p and F."""
        if (other.p, other.F) != (self.p, self.F) or other.j > self.j:
            raise ValueError("target must be a lower level of the same tower")
        return [other.class_of(r) for r in self.reps]

    def frobenius_from(self, other: "RayClassLevel") -> list:
        """The p-power map from the adjacent lower level into this one;
        well defined because n^p mod F p^(j+1) only depends on n mod
        F p^j."""
        if (other.p, other.F) != (self.p, self.F) or other.j != self.j - 1:
            raise ValueError("source must be the adjacent lower level")
        return [self.class_of(pow(r, self.p, self.M)) for r in other.reps]

    def class_pow(self, i: int, e: int) -> int:
        return self.class_of(pow(self.reps[i], e, self.M))

    def omega_exponents(self) -> list:
        """Discrete log mod p of the p-primary part of every class,
        taken to the base of the central generator.  t -> zeta_p^t is
        then the order-p character whose kernel is exactly the
        subgroup of p-th powers (the image of the adjacent lower
        level under the p-power map)."""
        qp, mprime = 1, self.n
        while mprime % self.p == 0:
            qp *= self.p
            mprime //= self.p
        if qp == 1:
            return [0] * self.n
        # exponent projecting onto the p-primary part
        e = mprime * pow(mprime, -1, qp) if mprime > 1 else 1
        uc = self.central_class()
        dlog = {0: 0}
        c = 0
        for t in range(1, qp):
            c = self.mul(c, uc)
            dlog[c] = t
        return [dlog[self.class_pow(x, e)] % self.p for x in range(self.n)]


@dataclass
class LocallyConstantFn:
    """Rational-valued function on the classes of one level."""

    level: RayClassLevel
    values: tuple

    @classmethod
    def delta(cls, level: RayClassLevel, i: int) -> "LocallyConstantFn":
        vals = [Fraction(0)] * level.n
        vals[i] = Fraction(1)
        return cls(level, tuple(vals))

    @classmethod
    def constant(cls, level: RayClassLevel, c) -> "LocallyConstantFn":
        return cls(level, tuple(Fraction(c) for _ in range(level.n)))

    def translate(self, i: int) -> "LocallyConstantFn":
        """x -> f(u x) for u the class with index i."""
        lv = self.level
        vals = [self.values[lv.mul(i, x)] for x in range(lv.n)]
        return LocallyConstantFn(lv, tuple(vals))

    def compose_classmap(
        self, source: RayClassLevel, arr: list
    ) -> "LocallyConstantFn":
        """Pull back along a map given as an index array from source
        classes into this function's level."""
        vals = [self.values[arr[x]] for x in range(source.n)]
        return LocallyConstantFn(source, tuple(vals))


def L_sigma(eps: LocallyConstantFn, sigma, k: int) -> Fraction:
    """Sum over classes of eps(x) times the partial zeta of x at 1-k."""
    lv = eps.level
    acc = Fraction(0)
    for i, r in enumerate(lv.reps):
        if eps.values[i]:
            acc += eps.values[i] * partial_zeta(r, lv.M, sigma, k)
    return acc


def delta_u(eps: LocallyConstantFn, sigma, n_u: int, k: int) -> Fraction:
    """L(eps, 1-k) - kappa(u)^k L(eps_u, 1-k) with the exact integer
    kappa value n_u^k; the image class of u is n_u's class."""
    lv = eps.level
    eps_u = eps.translate(lv.class_of(n_u))
    return L_sigma(eps, sigma, k) - Fraction(n_u) ** k * L_sigma(eps_u, sigma, k)


def delta_u_reduced(eps: LocallyConstantFn, sigma, n_u: int, k: int, prec: int) -> int:
    """The smoothed value as an element of Z/p^prec; raises
    IntegralityFailure if the exact rational is not p-integral."""
    val = delta_u(eps, sigma, n_u, k)
    q = eps.level.p**prec
    return fraction_mod(val, q, eps.level.p)


# --------------------------------------------------------------------
# instances and approximants


@dataclass(frozen=True)
class ZetaInstance:
    p: int
    F: int
    j: int
    k: int
    sigma: tuple = ()

    def __post_init__(self):
        sig = set(self.sigma) | {self.p} | set(_prime_factors(self.F))
        object.__setattr__(self, "sigma", tuple(sorted(sig)))
        if self.k <= 0 or self.k % 2:
            raise ValueError("k must be even and positive")

    def level(self) -> RayClassLevel:
        return RayClassLevel(self.p, self.F, self.j)


def _approximant_at(lv: RayClassLevel, sigma, k: int) -> dict:
    q = lv.p**lv.prec
    out = {}
    for i in range(lv.n):
        d = delta_u_reduced(
            LocallyConstantFn.delta(lv, i), sigma, lv.n_u, k, lv.prec
        )
        kk = inv_mod(lv.kappa_pow(i, k), q)
        out[i] = d * kk % q
    return out


def rw_approximant(inst: ZetaInstance, k: int | None = None) -> dict:
    """Coefficients (class index -> residue mod p^prec) of the finite
    element representing the smoothed zeta value: the sum over classes
    of Delta^u(delta_x, 1-k) kappa(x)^{-k} [x]."""
    return _approximant_at(inst.level(), inst.sigma, inst.k if k is None else k)


def check_j_compatibility(inst_hi: ZetaInstance, inst_lo: ZetaInstance) -> Verdict:
    """Fiber sums of the level-j approximant against the level-(j-1)
    approximant, compared at the lower precision."""
    if (inst_hi.p, inst_hi.F, inst_hi.k) != (inst_lo.p, inst_lo.F, inst_lo.k):
        raise ValueError("instances must share p, F and k")
    if inst_hi.j != inst_lo.j + 1:
        raise ValueError("levels must be adjacent")
    hi = inst_hi.level()
    lo = inst_lo.level()
    proj = hi.project_to(lo)
    ahi = rw_approximant(inst_hi)
    alo = rw_approximant(inst_lo)
    q = lo.p**lo.prec
    sums = [0] * lo.n
    for i, c in ahi.items():
        sums[proj[i]] = (sums[proj[i]] + c) % q
    bad = [
        {"class": lo.rep(i), "fiber_sum": sums[i], "expected": alo[i] % q}
        for i in range(lo.n)
        if sums[i] != alo[i] % q
    ]
    return Verdict(
        name="zeta-j-compatibility",
        group=_inst_label(inst_hi),
        j=inst_hi.j,
        m=lo.prec,
        passed=not bad,
        witness=bad[0] if bad else None,
        detail=f"levels ({inst_hi.j},{inst_lo.j}) mod p^{lo.prec}",
    )


def check_k_independence(inst: ZetaInstance, k2: int) -> Verdict:
    """Classwise equality of the approximants for two weights."""
    lv = inst.level()
    a1 = rw_approximant(inst)
    a2 = rw_approximant(inst, k2)
    q = lv.p**lv.prec
    bad = [
        {"class": lv.rep(i), "at_k": a1[i], "at_k2": a2[i]}
        for i in range(lv.n)
        if a1[i] % q != a2[i] % q
    ]
    return Verdict(
        name="zeta-k-independence",
        group=_inst_label(inst),
        j=inst.j,
        m=lv.prec,
        passed=not bad,
        witness=bad[0] if bad else None,
        detail=f"k = {inst.k} vs {k2} mod p^{lv.prec}",
    )


# --------------------------------------------------------------------
# cyclotomic arithmetic for the interpolation check


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple:
    """Integer coefficients of the n-th cyclotomic polynomial,
    ascending, computed by exact division of x^n - 1."""
    num = [0] * (n + 1)
    num[0], num[n] = -1, 1
    for d in range(1, n):
        if n % d == 0:
            num = _polydiv_exact(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _polydiv_exact(num: list, den: list) -> list:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        assert c % den[-1] == 0
        q = c // den[-1]
        out[i] = q
        for t, dc in enumerate(den):
            num[i + t] -= q * dc
    assert not any(num)
    return out


class CycloRat:
    """Elements of the n-th cyclotomic field on the power basis with
    Fraction coefficients; just enough arithmetic for L-values."""

    def __init__(self, n: int, coeffs=None):
        self.n = n
        self.phi = cyclotomic_poly(n)
        self.deg = len(self.phi) - 1
        if coeffs is None:
            coeffs = []
        c = [Fraction(x) for x in coeffs]
        c += [Fraction(0)] * (self.deg - len(c))
        if len(c) > self.deg:
            c = self._reduce(c)
        self.coeffs = tuple(c)

    def _reduce(self, c: list) -> list:
        c = list(c)
        for i in range(len(c) - 1, self.deg - 1, -1):
            top = c[i]
            if top:
                for t in range(self.deg + 1):
                    c[i - self.deg + t] -= top * self.phi[t]
            c.pop()
        return c

    @classmethod
    def root_power(cls, n: int, e: int) -> "CycloRat":
        z = [Fraction(0)] * (e % n + 1)
        z[e % n] = Fraction(1)
        return cls(n, z)

    def __add__(self, other):
        other = self._coerce(other)
        return CycloRat(
            self.n, [a + b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __sub__(self, other):
        other = self._coerce(other)
        return CycloRat(
            self.n, [a - b for a, b in zip(self.coeffs, other.coeffs)]
        )

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloRat(self.n, [a * other for a in self.coeffs])
        if other.n != self.n:
            raise ValueError("mixed cyclotomic orders")
        prod = [Fraction(0)] * (2 * self.deg)
        for i, a in enumerate(self.coeffs):
            if a:
                for t, b in enumerate(other.coeffs):
                    if b:
                        prod[i + t] += a * b
        return CycloRat(self.n, self._reduce(prod))

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloRat(self.n, [Fraction(other)])
        return other

    def __eq__(self, other):
        other = self._coerce(other)
        return self.n == other.n and self.coeffs == other.coeffs

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def reduce_mod(self, p: int, prec: int) -> tuple:
        """Coefficientwise image in Z/p^prec; raises on denominators
        divisible by p (the ring of integers is the full power basis)."""
        q = p**prec
        return tuple(fraction_mod(c, q, p) for c in self.coeffs)


def cyclic_decomposition(G: FiniteGroup) -> list:
    """Element indices generating a direct decomposition of an abelian
    group into cyclic factors, largest order first."""
    if not G.is_abelian():
        raise ValueError("decomposition needs an abelian group")
    if G.n == 1:
        return []
    orders = G.element_orders()
    g = int(np.argmax(orders))
    o = int(orders[g])
    if o == G.n:
        return [g]
    line = set(G.closure([g]))
    for H in G.subgroups():
        if len(H) * o != G.n:
            continue
        if set(H) & line != {0}:
            continue
        sub, embed = G.subgroup_group(H)
        return [g] + [int(embed[i]) for i in cyclic_decomposition(sub)]
    raise AssertionError("abelian group ought to split off its exponent")


def characters(level: RayClassLevel):
    """All characters of the class group, as (order n, value exponent
    array e with psi(class i) = zeta_n^e[i])."""
    G = level.group()
    gens = cyclic_decomposition(G)
    orders = [int(G.element_orders()[g]) for g in gens]
    n = 1
    for o in orders:
        n = n * o // math.gcd(n, o)
    # exponent tuples of every element over the decomposition
    expo = {0: [0] * len(gens)}
    for idx, g in enumerate(gens):
        new = dict(expo)
        for base in list(expo):
            x = base
            for a in range(1, orders[idx]):
                x = int(G.mul[x, g])
                vec = list(expo[base])
                vec[idx] = a
                new[x] = vec
        expo = new
    assert len(expo) == G.n
    out = []
    tuples = [[]]
    for o in orders:
        tuples = [t + [a] for t in tuples for a in range(o)]
    for t in tuples:
        e = np.zeros(G.n, dtype=np.int64)
        for x, vec in expo.items():
            e[x] = sum(
                t[i] * vec[i] * (n // orders[i]) for i in range(len(gens))
            ) % n
        out.append((n, e))
    return out


def check_interpolation(inst: ZetaInstance) -> Verdict:
    """Pairing every character against the approximant versus the
    exact smoothed L-value, met in (Z/p^prec)[x]/(Phi_n)."""
    lv = inst.level()
    k = inst.k
    q = lv.p**lv.prec
    appr = rw_approximant(inst)
    uc = lv.central_class()
    for n, e in characters(lv):
        lhs = [0] * max(len(cyclotomic_poly(n)) - 1, 1)
        for i in range(lv.n):
            z = CycloRat.root_power(n, int(e[i]))
            w = appr[i] * lv.kappa_pow(i, k) % q
            for t, c in enumerate(z.coeffs):
                lhs[t] = (lhs[t] + w * int(c)) % q
        # exact side
        Lval = CycloRat(n)
        for i, r in enumerate(lv.reps):
            Lval = Lval + CycloRat.root_power(n, int(e[i])) * partial_zeta(
                r, lv.M, inst.sigma, k
            )
        factor = CycloRat(n, [Fraction(1)]) - CycloRat.root_power(
            n, int(e[uc])
        ) * (Fraction(lv.n_u) ** k)
        rhs = (factor * Lval).reduce_mod(lv.p, lv.prec)
        if tuple(lhs) != tuple(rhs):
            return Verdict(
                name="zeta-interpolation",
                group=_inst_label(inst),
                j=inst.j,
                m=lv.prec,
                passed=False,
                witness={
                    "character_order": n,
                    "exponents": e.tolist(),
                    "lhs": list(lhs),
                    "rhs": list(rhs),
                },
                detail=f"pairing mismatch mod p^{lv.prec}",
            )
    return Verdict(
        name="zeta-interpolation",
        group=_inst_label(inst),
        j=inst.j,
        m=lv.prec,
        passed=True,
        witness=None,
        detail=f"all {len(characters(lv))} characters mod p^{lv.prec}",
    )


def _phi_p_reduce(vec, p: int, q: int) -> tuple:
    """Reduce a t-power coefficient vector modulo 1 + t + ... + t^(p-1)
    and modulo q; the result has length p - 1."""
    vec = [v % q for v in vec] + [0] * max(p - 1 - len(vec), 0)
    for d in range(len(vec) - 1, p - 2, -1):
        c = vec[d]
        vec[d] = 0
        if c:
            # t^d = -(t^(d-p+1) + ... + t^(d-1))
            for i in range(d - p + 1, d):
                vec[i] = (vec[i] - c) % q
    return tuple(vec[: p - 1])


def _cyc_mul(a, b, p: int, q: int) -> tuple:
    prod = [0] * (2 * (p - 1) - 1)
    for i, x in enumerate(a):
        if x:
            for t, y in enumerate(b):
                if y:
                    prod[i + t] = (prod[i + t] + x * y) % q
    return _phi_p_reduce(prod, p, q)


def layer_norm_approximant(lv: RayClassLevel, sigma, k: int) -> dict:
    """Product of the level approximant with its p - 1 twists by the
    order-p character vanishing on p-th powers.

    The twisted factors have coefficients in Z[zeta_p]/p^prec, but the
    product provably has rational coefficients supported on the
    subgroup of p-th powers; both facts are asserted.  On that
    subgroup the result is the approximant of the smoothed zeta
    attached to the fixed field of the subgroup, with smoothing u^p,
    at the same weight and precision.
    """
    p = lv.p
    q = p**lv.prec
    appr = _approximant_at(lv, sigma, k)
    om = lv.omega_exponents()

    def rational(c):
        return (c % q,) + (0,) * (p - 2)

    cur = {x: rational(appr[x]) for x in range(lv.n)}
    for i in range(1, p):
        tw = {}
        for x in range(lv.n):
            e = om[x] * i % p
            root = _phi_p_reduce([0] * e + [1], p, q)
            tw[x] = _cyc_mul(rational(appr[x]), root, p, q)
        nxt = {x: (0,) * (p - 1) for x in range(lv.n)}
        for x1, c1 in cur.items():
            if not any(c1):
                continue
            for x2, c2 in tw.items():
                if not any(c2):
                    continue
                x3 = lv.mul(x1, x2)
                pr = _cyc_mul(c1, c2, p, q)
                nxt[x3] = tuple((a + b) % q for a, b in zip(nxt[x3], pr))
        cur = nxt
    out = {}
    for x in range(lv.n):
        assert not any(cur[x][1:]), "norm product must be rational"
        if om[x]:
            assert cur[x][0] == 0, "norm product must live on p-th powers"
        out[x] = cur[x][0]
    return out


def check_abelian_congruence(inst: ZetaInstance, k: int | None = None) -> Verdict:
    """The adjacent-level congruence.

    Levels (J, J-1) with J = max(j, 1) are compared: the norm product
    of the level-J approximant at weight k, which carries the smoothed
    values Delta^(u^p)(delta_y, 1-k) of the p-th-power layer, against
    the level-(J-1) approximant at weight p*k pushed forward along the
    p-power map.  Coefficients must agree mod p for every class y;
    off the image of the p-power map both sides vanish.
    """
    p = inst.p
    k = inst.k if k is None else k
    hi = RayClassLevel(p, inst.F, max(inst.j, 1))
    lo = RayClassLevel(p, inst.F, hi.j - 1)
    lhs = layer_norm_approximant(hi, inst.sigma, k)
    rhs = _approximant_at(lo, inst.sigma, p * k)
    frob = hi.frobenius_from(lo)
    bad = []
    for x in range(lo.n):
        y = frob[x]
        if (lhs[y] - rhs[x]) % p:
            bad.append({"class": hi.rep(y), "lhs": lhs[y] % p, "rhs": rhs[x] % p})
    return Verdict(
        name="zeta-abelian-congruence",
        group=_inst_label(inst),
        j=inst.j,
        m=1,
        passed=not bad,
        witness=bad[0] if bad else None,
        detail=f"levels ({hi.j},{lo.j}), weights ({k},{p * k}) mod {p}",
    )


def _inst_label(inst: ZetaInstance) -> str:
    return f"p={inst.p} F={inst.F} j={inst.j} k={inst.k} sigma={list(inst.sigma)}"


# --------------------------------------------------------------------
# the portable table format


TABLE_HEADER = re.compile(
    r"^F_cond=(\d+)\s+p=(\d+)\s+j=(-?\d+)\s+sigma=([\d,]+)\s+u=(\d+)\s*$"
)


def write_delta_table(inst: ZetaInstance, ks) -> str:
    """Rows (class rep, k, numerator, denominator) of exact smoothed
    values under a header fixing the instance; the text round-trips
    through read_delta_table."""
    lv = inst.level()
    lines = [
        "# smoothed partial zeta values",
        f"F_cond={lv.F} p={lv.p} j={lv.j} "
        f"sigma={','.join(str(s) for s in inst.sigma)} u={lv.n_u}",
    ]
    for k in ks:
        for i in range(lv.n):
            val = delta_u(
                LocallyConstantFn.delta(lv, i), inst.sigma, lv.n_u, k
            )
            lines.append(f"{lv.rep(i)} {k} {val.numerator} {val.denominator}")
    return "\n".join(lines) + "\n"


def read_delta_table(text: str) -> dict:
    """Parse a table; returns header fields and {(class rep, k):
    Fraction}; every value must be p-integral."""
    header = None
    rows = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if header is None:
            mm = TABLE_HEADER.match(line)
            if not mm:
                raise ValueError(f"line {ln}: malformed header")
            header = {
                "F": int(mm.group(1)),
                "p": int(mm.group(2)),
                "j": int(mm.group(3)),
                "sigma": tuple(int(s) for s in mm.group(4).split(",")),
                "u": int(mm.group(5)),
            }
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"line {ln}: expected 4 fields")
        rep, k, num, den = (int(x) for x in parts)
        val = Fraction(num, den)
        if val.denominator % header["p"] == 0:
            raise IntegralityFailure(
                f"line {ln}: value {val} is not {header['p']}-integral"
            )
        rows[(rep, k)] = val
    if header is None:
        raise ValueError("empty table")
    return {"header": header, "rows": rows}


def check_table_k_independence(table: dict, k1: int, k2: int) -> Verdict:
    """k-independence of kappa-twisted rows of an imported table, mod
    p^(f+j) computed from the header."""
    h = table["header"]
    lv = RayClassLevel(h["p"], h["F"], h["j"])
    q = lv.p**lv.prec
    bad = []
    for i in range(lv.n):
        r = lv.rep(i)
        try:
            v1 = fraction_mod(table["rows"][(r, k1)], q, lv.p)
            v2 = fraction_mod(table["rows"][(r, k2)], q, lv.p)
        except KeyError as e:
            raise ValueError(f"table lacks a row for {e}") from None
        t1 = v1 * inv_mod(pow(r, k1, q), q) % q
        t2 = v2 * inv_mod(pow(r, k2, q), q) % q
        if t1 != t2:
            bad.append({"class": r, "at_k": t1, "at_k2": t2})
    return Verdict(
        name="zeta-table-k-independence",
        group=f"p={h['p']} F={h['F']} j={h['j']} (imported)",
        j=h["j"],
        m=lv.prec,
        passed=not bad,
        witness=bad[0] if bad else None,
        detail=f"k = {k1} vs {k2} mod p^{lv.prec}",
    )
