"""Exact linear algebra over the rings Z/p^m.

All matrices are numpy int64 arrays with entries reduced into [0, p^m).
Two workhorses live here:

* unit-pivot Gaussian elimination, which inverts matrices that are
  invertible over the local ring Z/p^m and solves their linear systems;
* a Howell-style echelon form for row modules over Z/p^m, which decides
  membership (with combination certificates), produces kernel
  generators, and counts module elements.

Over Z/p^m every nonzero residue factors as unit * p^k, so pivots are
chosen by minimal p-valuation and rows are cleared exactly.  Appending
the p^(m-k) multiple of each pivot row keeps the row set saturated
column by column, which is what makes membership tests and relation
extraction sound over Z/p^m (this is the Howell-form construction).

Entries stay below p^m and multipliers below p^m, so intermediate
products fit comfortably in int64 for p^m up to around 3*10^9.
"""

from __future__ import annotations

import numpy as np


class NonUnit(ArithmeticError):
    """Inversion was requested for a non-invertible element."""


class SingularMatrix(ArithmeticError):
    """No unit pivot available: the matrix is singular over Z/p^m."""


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def inv_mod(a: int, q: int) -> int:
    """Inverse of a modulo q, raising NonUnit when gcd(a, q) > 1."""
    try:
        return pow(int(a), -1, q)
    except ValueError:
        raise NonUnit(f"{a} is not invertible mod {q}") from None


def as_matrix(mat, q: int) -> np.ndarray:
    out = np.asarray(mat, dtype=np.int64) % q
    if out.ndim != 2:
        raise ValueError("expected a 2-d array")
    return out


def fp_rank(mat, p: int) -> int:
    """Rank of the reduction of mat over the field with p elements."""
    a = np.asarray(mat, dtype=np.int64) % p
    rows, cols = a.shape
    rank = 0
    r = 0
    for c in range(cols):
        if r == rows:
            break
        live = np.nonzero(a[r:, c])[0]
        if live.size == 0:
            continue
        piv = r + int(live[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = (a[r] * inv_mod(int(a[r, c]), p)) % p
        f = a[:, c].copy()
        f[r] = 0
        a = (a - f[:, None] * a[r][None, :]) % p
        r += 1
        rank += 1
    return rank


def solve_unit(mat, rhs, p: int, m: int) -> np.ndarray:
    """Solve mat @ x = rhs for a matrix invertible over Z/p^m.

    rhs may be a vector or a matrix of column right-hand sides.  Raises
    SingularMatrix when some elimination step finds no unit pivot, which
    over a local ring happens exactly when mat is not invertible.
    """
    q = p**m
    a = as_matrix(mat, q)
    n, nc = a.shape
    if n != nc:
        raise ValueError("matrix must be square")
    b = np.asarray(rhs, dtype=np.int64) % q
    one_dim = b.ndim == 1
    if one_dim:
        b = b[:, None]
    if b.shape[0] != n:
        raise ValueError("shape mismatch")
    a = a.copy()
    b = b.copy()
    for c in range(n):
        live = np.nonzero(a[c:, c] % p)[0]
        if live.size == 0:
            raise SingularMatrix(f"no unit pivot in column {c}")
        piv = c + int(live[0])
        if piv != c:
            a[[c, piv]] = a[[piv, c]]
            b[[c, piv]] = b[[piv, c]]
        inv = inv_mod(int(a[c, c]), q)
        a[c] = (a[c] * inv) % q
        b[c] = (b[c] * inv) % q
        f = a[:, c].copy()
        f[c] = 0
        a = (a - f[:, None] * a[c][None, :]) % q
        b = (b - f[:, None] * b[c][None, :]) % q
    return b[:, 0] if one_dim else b


def matrix_inverse(mat, p: int, m: int) -> np.ndarray:
    n = len(mat)
    return solve_unit(mat, np.eye(n, dtype=np.int64), p, m)


def _valuations(vals: np.ndarray, p: int, m: int) -> np.ndarray:
    """Vector of p-valuations capped at m; zeros get m."""
    v = np.zeros(vals.shape, dtype=np.int64)
    step = 1
    for _ in range(m):
        step *= p
        v += (vals % step) == 0
    return v


class Howell:
    """Echelon data for the row module of a matrix over Z/p^m.

    rows[i] has its leading (pivot) entry p^k at column pivots[i][0]
    with k = pivots[i][1]; entries above a pivot are reduced below p^k.
    combos tracks each stored row as a combination of the original
    generator rows, and relation_combos spans the left kernel (all
    combinations of the original rows equal to zero), which the
    augmented p^(m-k) multiples guarantee.
    """

    def __init__(self, gens, p: int, m: int):
        self.p = p
        self.m = m
        self.q = q = p**m
        gens = as_matrix(gens, q)
        ngens, n = gens.shape
        self.ncols = n
        self.ngens = ngens
        width = n + ngens
        work = np.zeros((ngens, width), dtype=np.int64)
        work[:, :n] = gens
        work[:, n:] = np.eye(ngens, dtype=np.int64)
        pivots: list[tuple[int, int]] = []
        pivot_rows: list[np.ndarray] = []
        extras: list[np.ndarray] = []
        for col in range(n):
            if extras:
                work = np.vstack([work] + extras) if work.size else np.array(extras)
                extras = []
            if work.shape[0] == 0:
                break
            colvals = work[:, col]
            live = np.nonzero(colvals)[0]
            if live.size == 0:
                continue
            vals = _valuations(colvals[live], p, m)
            pick = int(live[int(np.argmin(vals))])
            kval = int(vals.min())
            best = work[pick].copy()
            unit = int(best[col]) // p**kval
            best = (best * inv_mod(unit, q)) % q
            keep = np.ones(work.shape[0], dtype=bool)
            keep[pick] = False
            work = work[keep]
            f = work[:, col] // p**kval
            nz = np.nonzero(f)[0]
            if nz.size:
                work[nz, col:] = (work[nz, col:] - f[nz, None] * best[None, col:]) % q
            work = work[work.any(axis=1)]
            pivots.append((col, kval))
            pivot_rows.append(best)
            if kval:
                extra = (best * p ** (m - kval)) % q
                if extra.any():
                    extras.append(extra)
        if extras:
            work = np.vstack([work] + extras) if work.size else np.array(extras)
        # reduce entries above each pivot so the form is canonical-ish
        for i in range(len(pivot_rows)):
            col, kval = pivots[i]
            mod = p**kval
            for jj in range(i):
                e = int(pivot_rows[jj][col])
                if e >= mod:
                    f = e // mod
                    pivot_rows[jj] = (pivot_rows[jj] - f * pivot_rows[i]) % q
        self.pivots = pivots
        if pivot_rows:
            full = np.array(pivot_rows, dtype=np.int64)
        else:
            full = np.zeros((0, width), dtype=np.int64)
        self.rows = full[:, :n]
        self.combos = full[:, n:]
        if work.shape[0]:
            assert not work[:, :n].any(), "left parts must be exhausted"
            self.relation_combos = work[:, n:].copy()
        else:
            self.relation_combos = np.zeros((0, ngens), dtype=np.int64)

    def reduce(self, vec) -> tuple[np.ndarray, np.ndarray]:
        """Reduce vec against the module; return (remainder, coeffs).

        coeffs are coefficients on the original generators with
        vec = coeffs @ gens + remainder (mod p^m).
        """
        q = self.q
        p = self.p
        v = np.asarray(vec, dtype=np.int64) % q
        coeffs = np.zeros(self.ngens, dtype=np.int64)
        for i, (col, kval) in enumerate(self.pivots):
            e = int(v[col])
            if e:
                f = e // p**kval
                if f:
                    v = (v - f * self.rows[i]) % q
                    coeffs = (coeffs + f * self.combos[i]) % q
        return v, coeffs

    def contains(self, vec):
        """Coefficients expressing vec over the generators, or None."""
        rem, coeffs = self.reduce(vec)
        if rem.any():
            return None
        return coeffs

    def size_log(self) -> int:
        """log_p of the number of elements of the row module."""
        return sum(self.m - k for _, k in self.pivots)


def kernel(mat, p: int, m: int) -> np.ndarray:
    """Generators of {x : mat @ x = 0} over Z/p^m (rows of the result)."""
    q = p**m
    a = as_matrix(mat, q)
    h = Howell(a.T, p, m)
    return h.relation_combos % q


def module_size_log(gens, p: int, m: int) -> int:
    """log_p of the size of the module spanned by the given rows."""
    return Howell(gens, p, m).size_log()
