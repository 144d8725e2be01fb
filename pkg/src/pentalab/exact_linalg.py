"""Exact rational linear algebra on GMP-backed numbers.

Everything in this module is exact. Rationals are gmpy2.mpq (always in lowest
terms with positive denominator), integers are gmpy2.mpz. Determinants run
fraction-free (Bareiss) on denominator-cleared integer matrices so that no
intermediate rational normalization happens inside the elimination; pivots are
chosen by smallest bit length to limit intermediate growth.

Matrices are plain sequences of row sequences. Heights follow the classical
definition ht(a/b) = max(|a|, b) for a/b in lowest terms with b > 0.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpq, mpz

__all__ = [
    "SingularMatrix",
    "ZeroVector",
    "as_mpq",
    "parse_rational",
    "format_rational",
    "canonical_homogeneous",
    "height",
    "log10_height",
    "digits10",
    "det",
    "det_int",
    "solve",
    "nullspace_int",
]

_LOG10_2 = math.log10(2.0)


class SingularMatrix(ValueError):
    """Square system has no unique solution."""


class ZeroVector(ValueError):
    """The zero vector has no homogeneous representative."""


def as_mpq(x) -> mpq:
    """Coerce ints, mpz, mpq, Fractions, or 'p/q' strings to mpq."""
    if isinstance(x, str):
        return parse_rational(x)
    return mpq(x)


def parse_rational(s: str) -> mpq:
    s = s.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        d = mpz(den)
        if d == 0:
            raise ZeroDivisionError(f"zero denominator in {s!r}")
        return mpq(mpz(num), d)
    return mpq(mpz(s))


def format_rational(q) -> str:
    q = as_mpq(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def canonical_homogeneous(v: Sequence) -> tuple:
    """Reduce a nonzero rational vector to coprime integers, first nonzero > 0.

    The result is the unique integer representative of the projective class.
    Raises ZeroVector on the zero vector.
    """
    qs = [as_mpq(x) for x in v]
    scale = mpz(1)
    for q in qs:
        scale = gmpy2.lcm(scale, q.denominator)
    ints = [mpz(q.numerator * (scale // q.denominator)) for q in qs]
    g = mpz(0)
    for e in ints:
        g = gmpy2.gcd(g, e)
        if g == 1:
            break
    if g == 0:
        raise ZeroVector("all coordinates are zero")
    lead = next(e for e in ints if e)
    if (lead < 0) != (g < 0):
        g = -g
    return tuple(e // g for e in ints)


def height(q) -> mpz:
    """max(|numerator|, denominator) in lowest terms; height(0) = 1."""
    q = as_mpq(q)
    return max(abs(mpz(q.numerator)), mpz(q.denominator))


def log10_height(h) -> float:
    """log10 of a positive integer, from bit length and leading bits.

    Accurate to far better than the documented +-1; never materializes the
    decimal expansion.
    """
    h = mpz(h)
    if h <= 0:
        raise ValueError("heights are positive")
    bl = h.bit_length()
    if bl <= 53:
        return math.log10(int(h))
    shift = max(bl - 64, 0)
    lead = int(h >> shift)
    return math.log2(lead) * _LOG10_2 + shift * _LOG10_2


def digits10(h) -> int:
    """Exact number of decimal digits of a positive integer."""
    h = mpz(h)
    if h <= 0:
        raise ValueError("expected a positive integer")
    nd = int(gmpy2.num_digits(h, 10))
    # num_digits may overcount by one just below powers of ten
    if nd > 1 and h < mpz(10) ** (nd - 1):
        nd -= 1
    return nd


def _check_rect(rows) -> tuple[int, int]:
    nr = len(rows)
    if nr == 0:
        raise ValueError("empty matrix")
    nc = len(rows[0])
    if any(len(r) != nc for r in rows):
        raise ValueError("ragged matrix")
    return nr, nc


def det_int(rows: Sequence[Sequence]) -> mpz:
    """Fraction-free Bareiss determinant of a square integer matrix.

    Full pivoting; among nonzero candidates the entry with the smallest bit
    length is promoted, which keeps intermediate minors small.
    """
    nr, nc = _check_rect(rows)
    if nr != nc:
        raise ValueError("determinant needs a square matrix")
    a = [[mpz(e) for e in row] for row in rows]
    n = nr
    sign = 1
    prev = mpz(1)
    for k in range(n - 1):
        pr = pc = -1
        best = -1
        for i in range(k, n):
            ai = a[i]
            for j in range(k, n):
                e = ai[j]
                if e:
                    bl = e.bit_length()
                    if best < 0 or bl < best:
                        best = bl
                        pr, pc = i, j
        if best < 0:
            return mpz(0)
        if pr != k:
            a[k], a[pr] = a[pr], a[k]
            sign = -sign
        if pc != k:
            for row in a:
                row[k], row[pc] = row[pc], row[k]
            sign = -sign
        pk = a[k][k]
        ak = a[k]
        for i in range(k + 1, n):
            ai = a[i]
            aik = ai[k]
            for j in range(k + 1, n):
                ai[j] = gmpy2.divexact(pk * ai[j] - aik * ak[j], prev)
        prev = pk
    return a[n - 1][n - 1] if sign > 0 else -a[n - 1][n - 1]


def _clear_rows(rows) -> tuple[list[list[mpz]], mpz]:
    """Scale each row to integers; return (integer rows, product of scales)."""
    out = []
    factor = mpz(1)
    for row in rows:
        qs = [as_mpq(e) for e in row]
        scale = mpz(1)
        for q in qs:
            scale = gmpy2.lcm(scale, q.denominator)
        out.append([mpz(q.numerator * (scale // q.denominator)) for q in qs])
        factor *= scale
    return out, factor


def det(rows: Sequence[Sequence]) -> mpq:
    """Exact determinant of a square rational matrix."""
    cleared, factor = _clear_rows(rows)
    return mpq(det_int(cleared), factor)


def solve(rows: Sequence[Sequence], rhs: Sequence) -> tuple:
    """Solve a square rational system exactly. Raises SingularMatrix."""
    nr, nc = _check_rect(rows)
    if nr != nc:
        raise ValueError("solve needs a square matrix")
    if len(rhs) != nr:
        raise ValueError("rhs length mismatch")
    aug = [list(row) + [rhs[i]] for i, row in enumerate(rows)]
    a, _ = _clear_rows(aug)
    n = nr
    prev = mpz(1)
    perm = list(range(n))  # column permutation from full pivoting
    for k in range(n - 1):
        pr = pc = -1
        best = -1
        for i in range(k, n):
            ai = a[i]
            for j in range(k, n):
                e = ai[j]
                if e:
                    bl = e.bit_length()
                    if best < 0 or bl < best:
                        best = bl
                        pr, pc = i, j
        if best < 0:
            raise SingularMatrix("rank-deficient system")
        if pr != k:
            a[k], a[pr] = a[pr], a[k]
        if pc != k:
            for row in a:
                row[k], row[pc] = row[pc], row[k]
            perm[k], perm[pc] = perm[pc], perm[k]
        pk = a[k][k]
        ak = a[k]
        for i in range(k + 1, n):
            ai = a[i]
            aik = ai[k]
            for j in range(k + 1, n + 1):
                ai[j] = gmpy2.divexact(pk * ai[j] - aik * ak[j], prev)
            ai[k] = mpz(0)
        prev = pk
    if a[n - 1][n - 1] == 0:
        raise SingularMatrix("rank-deficient system")
    x = [mpq(0)] * n
    for i in range(n - 1, -1, -1):
        acc = mpq(a[i][n])
        for j in range(i + 1, n):
            acc -= a[i][j] * x[j]
        x[i] = acc / a[i][i]
    out = [mpq(0)] * n
    for pos, col in enumerate(perm):
        out[col] = x[pos]
    return tuple(out)


def nullspace_int(rows: Sequence[Sequence]) -> list[tuple]:
    """Kernel basis of an integer matrix, as canonical integer vectors.

    Fraction-free row echelon (columns scanned left to right, pivot row by
    smallest bit length), then exact back substitution per free column.
    """
    nr, nc = _check_rect(rows)
    a = [[mpz(e) for e in row] for row in rows]
    prev = mpz(1)
    piv = []  # (row, col) of each pivot
    r = 0
    for c in range(nc):
        if r == nr:
            break
        pr = -1
        best = -1
        for i in range(r, nr):
            e = a[i][c]
            if e:
                bl = e.bit_length()
                if best < 0 or bl < best:
                    best = bl
                    pr = i
        if pr < 0:
            continue
        if pr != r:
            a[r], a[pr] = a[pr], a[r]
        pk = a[r][c]
        ar = a[r]
        for i in range(r + 1, nr):
            ai = a[i]
            aic = ai[c]
            for j in range(c + 1, nc):
                ai[j] = gmpy2.divexact(pk * ai[j] - aic * ar[j], prev)
            ai[c] = mpz(0)
        prev = pk
        piv.append((r, c))
        r += 1
    piv_cols = {c for _, c in piv}
    basis = []
    for f in range(nc):
        if f in piv_cols:
            continue
        x = [mpq(0)] * nc
        x[f] = mpq(1)
        for i, c in reversed(piv):
            acc = mpq(0)
            for j in range(c + 1, nc):
                if x[j]:
                    acc += a[i][j] * x[j]
            x[c] = -acc / a[i][c]
        basis.append(canonical_homogeneous(x))
    return basis
