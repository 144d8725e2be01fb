"""Unit-determinant lifts, difference-equation coefficients, and spectral
conservation checks.

A twisted polygon admits vertex lifts V_j with every sliding-window
determinant det(V_j, ..., V_{j+d}) equal to 1 when gcd(n, d+1) = 1. The lift
lives over the reals: the scale factors solve a cyclic linear system in the
logs, and the signs solve a companion system over GF(2). Coefficients of the
resulting difference equation

    V_{j+d+1} = a_{j,d} V_{j+d} + ... + a_{j,1} V_{j+1} + (-1)^d V_j

feed banded matrices N_j(lambda) whose inverses are the L-matrices of the
spectral presentation; coefficients of the characteristic polynomial of the
ordered product are conserved by the short-diagonal and dented maps, up to
roundoff, at every sampled lambda.

All real arithmetic runs in a cloned mpmath context so precision is a per-call
parameter, never ambient state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq, mpz
from mpmath import mp

from .exact_linalg import det_int
from .pentagram_maps import Generalized, MapSpec, apply, short_diagonal
from .polygon import TwistedPolygon

__all__ = [
    "GcdObstruction",
    "SignObstruction",
    "IllConditioned",
    "Lift",
    "SpectralSample",
    "unit_det_lift",
    "build_inner_matrix",
    "monodromy_charpoly",
    "conservation_check",
    "variant_of",
    "DEFAULT_PRECISION",
    "DEFAULT_LIFT_TOL",
    "DEFAULT_CONSERVATION_TOL",
    "DEFAULT_LAMBDAS",
]

DEFAULT_PRECISION = 512
DEFAULT_LIFT_TOL = 1e-40
DEFAULT_CONSERVATION_TOL = 1e-20
DEFAULT_LAMBDAS = (Fraction(1, 2), Fraction(1), Fraction(2))


class GcdObstruction(ValueError):
    """Unit-determinant lifts need gcd(n, d+1) = 1."""


class SignObstruction(RuntimeError):
    """No real sign assignment normalizes every window determinant."""


class IllConditioned(RuntimeError):
    """A numerical check failed beyond the configured tolerance."""


@dataclass(frozen=True)
class Lift:
    """Scaled real lift of a twisted polygon with unit window determinants.

    monodromy holds the scaled (and possibly sign-flipped) matrix that
    transports lift vectors across the period.
    """

    d: int
    n: int
    precision: int
    vectors: tuple
    a: tuple
    monodromy: tuple
    monodromy_flipped: bool


@dataclass(frozen=True)
class SpectralSample:
    """Monic charpoly coefficients of the lambda-monodromy at one lambda."""

    lam: Fraction
    charpoly: tuple


def _wrap_count(j: int, d: int, n: int) -> int:
    return max(0, j + d - n + 1)


def _window_det(p: TwistedPolygon, j: int, sign_flip: bool):
    """Exact integer det of window j, wrapped columns via the raw monodromy."""
    d, n = p.d, p.n
    cols = []
    for i in range(d + 1):
        idx = j + i
        if idx < n:
            cols.append(list(p.vertices[idx].coords))
        else:
            v = p.vertices[idx - n].coords
            col = [
                sum((p.monodromy.rows[r][c] * v[c] for c in range(d + 1)), mpz(0))
                for r in range(d + 1)
            ]
            if sign_flip:
                col = [-e for e in col]
            cols.append(col)
    rows = [[cols[c][r] for c in range(d + 1)] for r in range(d + 1)]
    return det_int(rows)


def _solve_gf2(rows: list, rhs: list, n: int):
    """Solve a GF(2) system given as bitmask rows; None when inconsistent.

    Free variables are set to 0, so the returned branch is deterministic.
    """
    aug = [rows[i] | (rhs[i] << n) for i in range(len(rows))]
    pivots = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, len(aug)) if (aug[i] >> c) & 1), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        for i in range(len(aug)):
            if i != r and (aug[i] >> c) & 1:
                aug[i] ^= aug[r]
        pivots.append(c)
        r += 1
    for i in range(r, len(aug)):
        if aug[i] >> n:
            return None
    x = [0] * n
    for i, c in enumerate(pivots):
        x[c] = (aug[i] >> n) & 1
    return x


def unit_det_lift(
    p: TwistedPolygon,
    precision: int = DEFAULT_PRECISION,
    lift_tol: float = DEFAULT_LIFT_TOL,
) -> Lift:
    """Scale the canonical vertices so every window determinant is 1.

    The monodromy is rescaled to determinant 1 first; for odd d that needs a
    positive determinant (an even power of a real scalar cannot fix the sign),
    and the sign system over GF(2) may be inconsistent, in which case the
    monodromy sign is flipped once and the solve retried.
    """
    if precision < 128:
        raise ValueError("precision below 128 bits is not supported")
    d, n = p.d, p.n
    if math.gcd(n, d + 1) != 1:
        raise GcdObstruction(f"gcd({n}, {d + 1}) != 1; no unit-determinant lift")
    det_m = det_int([list(r) for r in p.monodromy.rows])
    if d % 2 == 1 and det_m < 0:
        raise SignObstruction(
            "negative monodromy determinant has no real root of even order; "
            "no unit-determinant lift exists"
        )

    ctx = mp.clone()
    ctx.prec = precision

    # mu rescales the monodromy to determinant 1
    absdet = ctx.mpf(abs(det_m))
    mu = ctx.power(absdet, ctx.mpf(-1) / (d + 1))
    if det_m < 0:
        mu = -mu
    log_mu = ctx.log(abs(mu))

    dets = [_window_det(p, j, False) for j in range(n)]
    wraps = [_wrap_count(j, d, n) for j in range(n)]

    # cyclic system for the log scales: u_j + ... + u_{j+d} = -log |window|
    A = ctx.matrix(n, n)
    b = ctx.matrix(n, 1)
    for j in range(n):
        for i in range(d + 1):
            A[j, (j + i) % n] += 1
    sign_mu = -1 if mu < 0 else 1

    def solve_signs(flipped: bool):
        rows = []
        rhs = []
        for j in range(n):
            mask = 0
            for i in range(d + 1):
                mask |= 1 << ((j + i) % n)
            dj = dets[j] if not flipped else dets[j] * (-1) ** wraps[j]
            s = (1 if dj > 0 else -1) * sign_mu ** wraps[j]
            rows.append(mask)
            rhs.append(0 if s > 0 else 1)
        return _solve_gf2(rows, rhs, n)

    flipped = False
    x = solve_signs(False)
    if x is None:
        flipped = True
        x = solve_signs(True)
        if x is None:
            raise SignObstruction(
                "window-sign system inconsistent for both monodromy signs"
            )
    eps = [(-1) ** e for e in x]

    for j in range(n):
        dj = dets[j] if not flipped else dets[j] * (-1) ** wraps[j]
        b[j, 0] = -(wraps[j] * log_mu + ctx.log(abs(ctx.mpf(dj))))
    u = ctx.lu_solve(A, b)

    tilde = tuple(
        tuple(eps[j] * ctx.exp(u[j, 0]) * ctx.mpf(c) for c in p.vertices[j].coords)
        for j in range(n)
    )

    mono_sign = -1 if flipped else 1
    mhat = [
        [mu * mono_sign * ctx.mpf(p.monodromy.rows[r][c]) for c in range(d + 1)]
        for r in range(d + 1)
    ]

    def lifted(idx: int):
        if idx < n:
            return tilde[idx]
        v = lifted(idx - n)
        return tuple(
            ctx.fsum(mhat[r][c] * v[c] for c in range(d + 1)) for r in range(d + 1)
        )

    # defining property: every wrapped window determinant is 1
    for j in range(n):
        w = ctx.matrix(d + 1, d + 1)
        for i in range(d + 1):
            col = lifted(j + i)
            for r in range(d + 1):
                w[r, i] = col[r]
        dev = abs(ctx.det(w) - 1)
        if dev > lift_tol:
            raise IllConditioned(
                f"window {j} determinant off by {ctx.nstr(dev, 5)} after scaling"
            )

    # difference-equation coefficients; the trailing one must be (-1)^d
    sign_target = (-1) ** d
    coeffs = []
    for j in range(n):
        m = ctx.matrix(d + 1, d + 1)
        for i in range(d + 1):
            col = lifted(j + i)
            for r in range(d + 1):
                m[r, i] = col[r]
        rhsv = ctx.matrix(d + 1, 1)
        col = lifted(j + d + 1)
        for r in range(d + 1):
            rhsv[r, 0] = col[r]
        sol = ctx.lu_solve(m, rhsv)
        cj = sol[0, 0]
        if abs(cj - sign_target) > lift_tol:
            raise IllConditioned(
                f"trailing coefficient at j={j} is {ctx.nstr(cj, 8)}, "
                f"expected {sign_target}"
            )
        coeffs.append(tuple(sol[k, 0] for k in range(1, d + 1)))

    mono = tuple(tuple(row) for row in mhat)
    return Lift(d, n, precision, tilde, tuple(coeffs), mono, flipped)


def _diag_pattern(d: int, variant, lam):
    """Diagonal of the d x d block: lambda placement per map variant."""
    if variant == "sh":
        if d % 2 == 1:
            return [lam if i % 2 == 0 else 1 for i in range(d)]
        return [1 if i % 2 == 0 else lam for i in range(d)]
    if isinstance(variant, tuple) and len(variant) == 2 and variant[0] == "dented":
        m = variant[1]
        if not 1 <= m <= d - 1:
            raise ValueError("dent position must be in 1..d-1")
        return [lam if i == m else 1 for i in range(d)]
    raise ValueError(f"unknown Lax variant: {variant!r}")


def build_inner_matrix(a_j: Sequence, lam, variant, d: int, ctx=None):
    """N_j(lambda): first row (0,..,0,(-1)^d), diagonal block, a-column.

    The L-matrix of the spectral presentation is the inverse of this one.
    """
    if ctx is None:
        ctx = mp
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    if len(a_j) != d:
        raise ValueError(f"need {d} coefficients")
    diag = _diag_pattern(d, variant, lam)
    m = ctx.matrix(d + 1, d + 1)
    m[0, d] = (-1) ** d
    for i in range(1, d + 1):
        m[i, i - 1] = diag[i - 1]
        m[i, d] = a_j[i - 1]
    return m


def _charpoly(ctx, m, size: int):
    """Monic characteristic polynomial by the trace-power recursion."""
    coeffs = [ctx.mpf(1)]
    mk = m.copy()
    for k in range(1, size + 1):
        ck = -ctx.fsum(mk[i, i] for i in range(size)) / k
        coeffs.append(ck)
        if k < size:
            for i in range(size):
                mk[i, i] += ck
            mk = m * mk
    return tuple(coeffs)


def variant_of(spec: MapSpec):
    """Lax variant tag for a spec, or ValueError when none is known."""
    if isinstance(spec, Generalized):
        ones = (1,) * (spec.d - 1)
        if spec.J == ones:
            if spec.I == (2,) * (spec.d - 1):
                return "sh"
            big = [(i, e) for i, e in enumerate(spec.I, start=1) if e != 1]
            if len(big) == 1 and big[0][1] == 2:
                return ("dented", big[0][0])
    raise ValueError(
        "spectral matrices are available for short-diagonal and dented maps"
    )


def monodromy_charpoly(lift: Lift, lam, variant) -> SpectralSample:
    """Charpoly of the inverse of the ordered N-product at one lambda."""
    lam = Fraction(lam)
    if lam == 0:
        raise ValueError("lambda must be nonzero")
    ctx = mp.clone()
    ctx.prec = lift.precision
    lam_r = ctx.mpf(lam.numerator) / lam.denominator
    q = ctx.eye(lift.d + 1)
    for j in range(lift.n):
        q = q * build_inner_matrix(lift.a[j], lam_r, variant, lift.d, ctx)
    try:
        qinv = q**-1
    except ZeroDivisionError as e:
        raise IllConditioned(f"N-product is singular at lambda={lam}") from e
    return SpectralSample(lam, _charpoly(ctx, qinv, lift.d + 1))


def conservation_check(
    p: TwistedPolygon,
    spec: MapSpec,
    lam_samples: Sequence = DEFAULT_LAMBDAS,
    precision: int = DEFAULT_PRECISION,
    conservation_tol: float = DEFAULT_CONSERVATION_TOL,
    lift_tol: float = DEFAULT_LIFT_TOL,
) -> dict:
    """One exact map step; spectral samples before and after must agree.

    Relative deviation per coefficient is |x - y| / max(|x|, |y|, 1); the
    check passes when the max over coefficients and lambdas is at most
    conservation_tol.
    """
    variant = variant_of(spec)
    img = apply(spec, p)
    lift_before = unit_det_lift(p, precision, lift_tol)
    lift_after = unit_det_lift(img, precision, lift_tol)
    max_dev = 0.0
    for lam in lam_samples:
        lam = Fraction(lam)
        before = monodromy_charpoly(lift_before, lam, variant)
        after = monodromy_charpoly(lift_after, lam, variant)
        for x, y in zip(before.charpoly, after.charpoly):
            denom = max(abs(x), abs(y), 1)
            dev = float(abs(x - y) / denom)
            if dev > max_dev:
                max_dev = dev
    variant_name = variant if isinstance(variant, str) else f"dented:{variant[1]}"
    return {
        "variant": variant_name,
        "d": p.d,
        "n": p.n,
        "lambda": [str(Fraction(l)) for l in lam_samples],
        "max_rel_dev": max_dev,
        "pass": max_dev <= conservation_tol,
        "precision_bits": precision,
    }
