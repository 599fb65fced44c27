"""Coefficient arithmetic for the finite-level machinery.

Four layers, all exact:

* ``Residues``: the ring Z/p^m with unit tests, inverses and
  Teichmueller lifts;
* ``CycloExt``: Z/p^m with a primitive p-th root of unity adjoined via
  the p-th cyclotomic polynomial (used for character twists and the
  product form of index-p norms);
* ``UnramExt``: an unramified extension (Z/p^m)[x]/(f) together with
  its Frobenius, Hensel-lifted from the p-power map;
* ``Scaled``: a payload over Z/p^(prec+scale) standing for
  payload / p^scale known modulo p^prec.  Every division by an integer
  n moves v_p(n) into the scale and charges it against the precision,
  so nothing is ever silently rounded.

Rationals are plain ``fractions.Fraction``; ``vp_fraction`` computes
their p-adic valuation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .linalg import NonUnit, inv_mod, vp


class InexactDivision(ArithmeticError):
    """A division that was required to be exact is not."""


class IntegralityFailure(InexactDivision):
    """A value that must be integral has positive denominator exponent."""


class PrecisionError(ValueError):
    """An operation was asked for more precision than its inputs carry."""


def vp_fraction(x: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    if x == 0:
        raise ValueError("valuation of zero")
    return vp(x.numerator, p) - vp(x.denominator, p)


def fraction_mod(x: Fraction, q: int, p: int) -> int:
    """Reduce a p-integral rational into Z/q for a p-power q."""
    if x.denominator % p == 0:
        raise IntegralityFailure(f"{x} is not p-integral at p = {p}")
    return x.numerator * inv_mod(x.denominator % q, q) % q


class Residues:
    """The coefficient ring Z/p^m for an odd prime p."""

    def __init__(self, p: int, m: int):
        if p < 3 or p % 2 == 0:
            raise ValueError("p must be an odd prime")
        d = 2
        while d * d <= p:
            if p % d == 0:
                raise ValueError("p must be prime")
            d += 1
        if m < 1:
            raise ValueError("precision must be positive")
        self.p = p
        self.m = m
        self.q = p**m

    def reduce(self, a: int) -> int:
        return a % self.q

    def is_unit(self, a: int) -> bool:
        return a % self.p != 0

    def invert(self, a: int) -> int:
        return inv_mod(a % self.q, self.q)

    def teichmuller(self, a: int) -> int:
        """The p-power-stable lift of a mod p.

        Computed as a^(p^m), which is stationary; units land on the
        unique (p-1)-st root of unity congruent to a mod p and
        non-units land on 0.
        """
        t = pow(a % self.q, self.p**self.m, self.q)
        assert pow(t, self.p, self.q) == t, "Teichmueller lift must be p-power stable"
        return t

    def __repr__(self):
        return f"Residues(p={self.p}, m={self.m})"


def exact_divide(x: "Scaled", n: int) -> "Scaled":
    """Divide a scaled approximant by a nonzero integer, exactly.

    The prime-to-p part of n must divide (it is a unit, so it always
    does); the p-part v = v_p(n) raises the scale and costs v digits of
    absolute precision.  No payload information is discarded.
    """
    if n == 0:
        raise ZeroDivisionError("division by zero")
    return x.divide_exact(n)


@dataclass(frozen=True)
class Scaled:
    """payload / p^scale, known modulo p^prec.

    The payload (an int or an int64 ndarray) is stored reduced modulo
    p^(prec + scale).  Two approximants are equal iff the cross-scaled
    payloads agree at the common achievable precision.
    """

    p: int
    payload: object
    scale: int
    prec: int

    def _q(self) -> int:
        return self.p ** (self.prec + self.scale)

    @classmethod
    def integral(cls, p: int, payload, prec: int) -> "Scaled":
        q = p**prec
        if isinstance(payload, np.ndarray):
            payload = payload % q
        else:
            payload = int(payload) % q
        return cls(p, payload, 0, prec)

    def _binop(self, other: "Scaled", op):
        if self.p != other.p:
            raise ValueError("mixed primes")
        s = max(self.scale, other.scale)
        prec = min(self.prec, other.prec)
        q = self.p ** (prec + s)
        a = self.payload * self.p ** (s - self.scale)
        b = other.payload * self.p ** (s - other.scale)
        if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
            pay = op(np.asarray(a), np.asarray(b)) % q
        else:
            pay = op(a, b) % q
        return Scaled(self.p, pay, s, prec)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __neg__(self):
        return Scaled(self.p, (-self.payload) % self._q(), self.scale, self.prec)

    def mul_int(self, n: int) -> "Scaled":
        return Scaled(self.p, (self.payload * n) % self._q(), self.scale, self.prec)

    def divide_exact(self, n: int) -> "Scaled":
        v = vp(n, self.p)
        unit = n // self.p**v if n > 0 else -((-n) // self.p**v)
        prec = self.prec - v
        if prec <= 0:
            raise PrecisionError(
                f"division by p^{v} exhausts precision {self.prec}"
            )
        q = self._q()
        pay = (self.payload * inv_mod(unit % q, q)) % q
        return Scaled(self.p, pay, self.scale + v, prec)

    def is_integral(self) -> bool:
        step = self.p**self.scale
        if isinstance(self.payload, np.ndarray):
            return not (self.payload % step).any()
        return self.payload % step == 0

    def normalize(self):
        """Return (integral payload mod p^prec, prec).

        Raises IntegralityFailure when the value has a genuine
        denominator.
        """
        if not self.is_integral():
            raise IntegralityFailure(
                f"payload not divisible by p^{self.scale}"
            )
        q = self.p**self.prec
        pay = (self.payload // self.p**self.scale) % q
        return pay, self.prec

    def reduce_prec(self, prec: int) -> "Scaled":
        if prec > self.prec:
            raise PrecisionError("cannot gain precision")
        q = self.p ** (prec + self.scale)
        return Scaled(self.p, self.payload % q, self.scale, prec)

    def eq_mod(self, other: "Scaled", prec: int) -> bool:
        """Whether the two values agree modulo p^prec."""
        if self.prec < prec or other.prec < prec:
            raise PrecisionError(
                f"comparison at p^{prec} exceeds known precision "
                f"({self.prec}, {other.prec})"
            )
        d = self - other
        s = self.p ** (prec + d.scale)
        pay = d.payload % s
        if isinstance(pay, np.ndarray):
            return not pay.any()
        return pay == 0


class CycloExt:
    """(Z/p^m)[t]/(1 + t + ... + t^(p-1)): a primitive p-th root t.

    Elements are int64 vectors of length p-1 over the power basis
    1, t, ..., t^(p-2).  The Galois action substitutes t -> t^g;
    sending t to 1 is additive at full precision but respects
    products only modulo p, since the minimal polynomial evaluates
    to p there.
    """

    def __init__(self, p: int, m: int):
        self.base = Residues(p, m)
        self.p = p
        self.m = m
        self.q = p**m
        self.deg = p - 1
        # reduction rows for t^i, i < 2*deg - 1 (enough for products):
        # multiplying by t moves coefficients up one slot and the
        # overflow at t^(p-1) folds back as -(1 + ... + t^(p-2))
        red = np.zeros((2 * self.deg - 1, self.deg), dtype=np.int64)
        for i in range(self.deg):
            red[i, i] = 1
        for i in range(self.deg, 2 * self.deg - 1):
            prev = red[i - 1]
            overflow = prev[-1]
            shifted = np.zeros(self.deg, dtype=np.int64)
            shifted[1:] = prev[:-1]
            red[i] = (shifted - overflow) % self.q
        self._red = red
        self._tpows = {}

    def zero(self) -> np.ndarray:
        return np.zeros(self.deg, dtype=np.int64)

    def one(self) -> np.ndarray:
        z = self.zero()
        z[0] = 1
        return z

    def from_base(self, c: int) -> np.ndarray:
        z = self.zero()
        z[0] = c % self.q
        return z

    def t_pow(self, k: int) -> np.ndarray:
        k %= self.p
        if k not in self._tpows:
            if k < self.deg:
                v = self.zero()
                v[k] = 1
            else:
                # t^(p-1) = -(1 + ... + t^(p-2))
                v = (-np.ones(self.deg, dtype=np.int64)) % self.q
            self._tpows[k] = v
        return self._tpows[k]

    def add(self, a, b):
        return (a + b) % self.q

    def mul(self, a, b):
        conv = np.convolve(a, b) % self.q
        return (conv @ self._red[: len(conv)]) % self.q

    def galois(self, a, g: int) -> np.ndarray:
        """Substitute t -> t^g for g prime to p."""
        if g % self.p == 0:
            raise ValueError("g must be prime to p")
        out = self.zero()
        for i, c in enumerate(a):
            if c:
                out = (out + c * self.t_pow(i * g)) % self.q
        return out

    def is_base(self, a) -> bool:
        return not a[1:].any()

    def to_base(self, a) -> int:
        if not self.is_base(a):
            raise ValueError("element is not in the base ring")
        return int(a[0])

    def specialize_t1(self, a) -> int:
        """Coefficient sum: the value at t = 1.  Additive always;
        multiplicative only modulo p."""
        return int(a.sum() % self.q)

    def norm(self, a) -> int:
        """Product of all Galois conjugates, landing in the base ring."""
        acc = self.one()
        for g in range(1, self.p):
            acc = self.mul(acc, self.galois(a, g))
        return self.to_base(acc)


class UnramExt:
    """The unramified extension (Z/p^m)[x]/(f) of residue degree d.

    f is the lexicographically first monic degree-d polynomial over
    F_p that is irreducible, lifted with coefficients in [0, p).  The
    Frobenius fixes the base and reduces to y -> y^p mod p; its matrix
    is determined by the Hensel-lifted root x -> frobenius_root.
    """

    def __init__(self, p: int, m: int, d: int):
        if d < 1:
            raise ValueError("degree must be positive")
        self.base = Residues(p, m)
        self.p = p
        self.m = m
        self.q = p**m
        self.d = d
        self.modulus = self._find_irreducible(p, d)
        self.frobenius_root = self._lift_frobenius_root()
        # powers of the Frobenius root, for evaluating the substitution
        pows = [self.one()]
        for _ in range(d - 1):
            pows.append(self.mul(pows[-1], self.frobenius_root))
        self._frob_pows = np.array(pows, dtype=np.int64)

    @staticmethod
    def _poly_mulmod(a, b, f, p):
        conv = np.convolve(a, b) % p
        d = len(f) - 1
        for i in range(len(conv) - 1, d - 1, -1):
            c = conv[i]
            if c:
                conv[i - d : i + 1] = (conv[i - d : i + 1] - c * np.asarray(f)) % p
        return conv[:d] % p

    @classmethod
    def _find_irreducible(cls, p: int, d: int) -> np.ndarray:
        """First monic irreducible of degree d over F_p, as int64 coeffs
        low-to-high with leading 1."""
        if d == 1:
            return np.array([0, 1], dtype=np.int64)
        import itertools

        x = np.zeros(d, dtype=np.int64)
        x[1] = 1
        for tail in itertools.product(range(p), repeat=d):
            f = np.array(list(tail) + [1], dtype=np.int64)
            if f[0] == 0:
                continue
            # f irreducible iff x^(p^d) = x mod f and x^(p^(d/r)) != x
            # for every prime r dividing d
            powm = [x.copy()]
            for _ in range(d):
                cur = powm[-1]
                e = p
                acc = np.zeros(d, dtype=np.int64)
                acc[0] = 1
                while e:
                    if e & 1:
                        acc = cls._poly_mulmod(acc, cur, f, p)
                    cur = cls._poly_mulmod(cur, cur, f, p)
                    e >>= 1
                powm.append(acc)
            if not np.array_equal(powm[d], x):
                continue
            if any(np.array_equal(powm[d // r], x) for r in _prime_divisors(d)):
                continue
            return f
        raise RuntimeError("no irreducible polynomial found")

    def zero(self):
        return np.zeros(self.d, dtype=np.int64)

    def one(self):
        z = self.zero()
        z[0] = 1
        return z

    def gen(self):
        z = self.zero()
        if self.d == 1:
            # x is a root of the linear modulus, i.e. 0
            return z
        z[1] = 1
        return z

    def from_base(self, c: int):
        z = self.zero()
        z[0] = c % self.q
        return z

    def add(self, a, b):
        return (a + b) % self.q

    def mul(self, a, b):
        conv = np.convolve(a, b) % self.q
        f = self.modulus
        d = self.d
        for i in range(len(conv) - 1, d - 1, -1):
            c = conv[i]
            if c:
                conv[i - d : i + 1] = (conv[i - d : i + 1] - c * f) % self.q
        out = np.zeros(d, dtype=np.int64)
        out[: min(d, len(conv))] = conv[: min(d, len(conv))]
        return out % self.q

    def pow(self, a, e: int):
        acc = self.one()
        b = a % self.q
        while e:
            if e & 1:
                acc = self.mul(acc, b)
            b = self.mul(b, b)
            e >>= 1
        return acc

    def _eval_mod(self, poly, at):
        acc = self.zero()
        for c in reversed(poly):
            acc = self.mul(acc, at)
            acc = (acc + self.from_base(int(c))) % self.q
        return acc

    def _lift_frobenius_root(self):
        """Hensel-lift x^p mod p to the exact Frobenius image of x."""
        r = self.pow(self.gen(), self.p)
        fprime = np.arange(len(self.modulus), dtype=np.int64) * self.modulus
        fprime = fprime[1:]
        for _ in range(self.m + 1):
            val = self._eval_mod(self.modulus, r)
            der = self._eval_mod(fprime, r)
            der_inv = self.invert(der)
            r = (r - self.mul(val, der_inv)) % self.q
        assert not self._eval_mod(self.modulus, r).any()
        return r

    def invert(self, a):
        """Inverse via the multiplication matrix over Z/p^m."""
        from . import linalg

        cols = [self.mul(a, self._basis(i)) for i in range(self.d)]
        mat = np.array(cols, dtype=np.int64).T
        rhs = self.one()
        sol = linalg.solve_unit(mat, rhs, self.p, self.m)
        return sol % self.q

    def _basis(self, i):
        z = self.zero()
        z[i] = 1
        return z

    def frobenius(self, a):
        """The ring endomorphism sending the generator to its lift."""
        return (np.asarray(a) @ self._frob_pows) % self.q


def _prime_divisors(n: int):
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
