"""Projective points, hyperplanes, and maps over the rationals.

Every object stores the canonical integer representative of its projective
class (coprime entries, first nonzero positive), so equality and hashing are
plain data comparisons and repeated gcd reduction is exactly where the
cancellation structure of the dynamics lives.

Points and hyperplanes in P^d both carry d+1 coordinates; a hyperplane pairs
with a point by the dot product (zero iff incident). Spans and meets reduce to
one-dimensional nullspaces, computed as signed maximal minors; the general
complementary-span meet goes through fraction-free elimination and must come
out a single point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpz

from .exact_linalg import (
    ZeroVector,
    canonical_homogeneous,
    det_int,
    nullspace_int,
)

__all__ = [
    "DegenerateSpan",
    "DegenerateMeet",
    "DegenerateFrame",
    "ProjPoint",
    "Hyperplane",
    "ProjMap",
    "pairing",
    "span_hyperplane",
    "meet_hyperplanes",
    "meet_spans",
    "frame_transform",
    "apply_map",
    "inverse_map",
    "compose",
    "in_general_position",
]


class DegenerateSpan(ValueError):
    """The given points do not span a hyperplane."""


class DegenerateMeet(ValueError):
    """The given flats do not meet in a single point."""


class DegenerateFrame(ValueError):
    """The frame points are not in general position."""


@dataclass(frozen=True)
class ProjPoint:
    """Point of P^d, canonical integer coordinates (length d+1)."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", canonical_homogeneous(self.coords))

    @property
    def dim(self) -> int:
        return len(self.coords) - 1


@dataclass(frozen=True)
class Hyperplane:
    """Hyperplane of P^d, canonical integer covector (length d+1)."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", canonical_homogeneous(self.coeffs))

    @property
    def dim(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True)
class ProjMap:
    """Invertible projective map, canonical integer matrix acting on columns."""

    rows: tuple

    def __post_init__(self):
        flat = [e for row in self.rows for e in row]
        n = len(self.rows)
        if any(len(row) != n for row in self.rows):
            raise ValueError("projective maps are square")
        flat = canonical_homogeneous(flat)
        rows = tuple(tuple(flat[i * n : (i + 1) * n]) for i in range(n))
        if det_int(rows) == 0:
            raise ValueError("projective map must be invertible")
        object.__setattr__(self, "rows", rows)

    @property
    def dim(self) -> int:
        return len(self.rows) - 1


def pairing(p: ProjPoint, h: Hyperplane) -> mpz:
    """Exact dot product; zero iff the point lies on the hyperplane."""
    if len(p.coords) != len(h.coeffs):
        raise ValueError("dimension mismatch")
    return sum((a * b for a, b in zip(p.coords, h.coeffs)), mpz(0))


def _signed_minors(rows: list) -> list:
    """Signed maximal minors of a k x (k+1) integer matrix.

    The resulting vector spans the kernel when the rank is k; it is the zero
    vector exactly when the rank drops.
    """
    k = len(rows)
    out = []
    for i in range(k + 1):
        sub = [[row[j] for j in range(k + 1) if j != i] for row in rows]
        m = det_int(sub) if k else mpz(1)
        out.append(m if i % 2 == 0 else -m)
    return out


def span_hyperplane(points: Sequence[ProjPoint]) -> Hyperplane:
    """Hyperplane through d independent points of P^d."""
    if not points:
        raise ValueError("no points given")
    d = points[0].dim
    if len(points) != d:
        raise ValueError(f"a hyperplane in P^{d} is spanned by {d} points")
    if any(p.dim != d for p in points):
        raise ValueError("dimension mismatch")
    w = _signed_minors([list(p.coords) for p in points])
    try:
        return Hyperplane(w)
    except ZeroVector:
        raise DegenerateSpan("points do not span a hyperplane") from None


def meet_hyperplanes(hyps: Sequence[Hyperplane]) -> ProjPoint:
    """Common point of d independent hyperplanes of P^d."""
    if not hyps:
        raise ValueError("no hyperplanes given")
    d = hyps[0].dim
    if len(hyps) != d:
        raise ValueError(f"{d} hyperplanes of P^{d} meet in a point")
    if any(h.dim != d for h in hyps):
        raise ValueError("dimension mismatch")
    w = _signed_minors([list(h.coeffs) for h in hyps])
    try:
        return ProjPoint(w)
    except ZeroVector:
        raise DegenerateMeet("hyperplanes do not meet in a single point") from None


def meet_spans(a: Sequence[ProjPoint], b: Sequence[ProjPoint]) -> ProjPoint:
    """Unique intersection point of span(a) and span(b).

    Solves sum(alpha_i a_i) = sum(beta_j b_j); the joint kernel must be one
    dimensional and the combination nonzero, otherwise the configuration is
    degenerate. Handles both the complementary case |a|+|b| = d+2 and the
    corrugated case of two coplanar lines in higher dimension.
    """
    if not a or not b:
        raise ValueError("need points on both sides")
    d = a[0].dim
    if any(p.dim != d for p in list(a) + list(b)):
        raise ValueError("dimension mismatch")
    cols = [list(p.coords) for p in a] + [[-c for c in p.coords] for p in b]
    rows = [[col[r] for col in cols] for r in range(d + 1)]
    kernel = nullspace_int(rows)
    if len(kernel) != 1:
        raise DegenerateMeet(
            f"span intersection has kernel dimension {len(kernel)}, expected 1"
        )
    coeffs = kernel[0]
    point = [mpz(0)] * (d + 1)
    for alpha, p in zip(coeffs, a):
        if alpha:
            for r, c in enumerate(p.coords):
                point[r] += alpha * c
    try:
        return ProjPoint(point)
    except ZeroVector:
        raise DegenerateMeet("spans share a positive-dimensional flat") from None


def _adjugate(rows: Sequence[Sequence]) -> list:
    n = len(rows)
    adj = [[mpz(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            sub = [
                [rows[r][c] for c in range(n) if c != j]
                for r in range(n)
                if r != i
            ]
            cof = det_int(sub) if n > 1 else mpz(1)
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return adj


def frame_transform(points: Sequence[ProjPoint]) -> ProjMap:
    """Map sending d+2 frame points to the standard frame e_0..e_d, (1:...:1).

    Requires every d+1 of the given d+2 points to be independent.
    """
    if not points:
        raise ValueError("no points given")
    d = points[0].dim
    if len(points) != d + 2:
        raise ValueError(f"a frame of P^{d} has {d + 2} points")
    if any(p.dim != d for p in points):
        raise ValueError("dimension mismatch")
    basis = [list(p.coords) for p in points[: d + 1]]
    target = points[d + 1].coords
    a_rows = [[basis[j][r] for j in range(d + 1)] for r in range(d + 1)]
    if det_int(a_rows) == 0:
        raise DegenerateFrame("first d+1 frame points are dependent")
    # Cramer numerators of A c = target; the common denominator det(A) is a
    # projective scale and drops out.
    c = []
    for i in range(d + 1):
        rows_i = [row[:] for row in a_rows]
        for r in range(d + 1):
            rows_i[r][i] = target[r]
        c.append(det_int(rows_i))
    if any(ci == 0 for ci in c):
        raise DegenerateFrame("last frame point lies on a face of the simplex")
    scaled = [[a_rows[r][j] * c[j] for j in range(d + 1)] for r in range(d + 1)]
    return ProjMap(tuple(tuple(row) for row in _adjugate(scaled)))


def apply_map(t: ProjMap, x):
    """Apply a projective map to a point or, contragradiently, a hyperplane."""
    if isinstance(x, ProjPoint):
        if t.dim != x.dim:
            raise ValueError("dimension mismatch")
        coords = [
            sum((r * c for r, c in zip(row, x.coords)), mpz(0)) for row in t.rows
        ]
        return ProjPoint(coords)
    if isinstance(x, Hyperplane):
        if t.dim != x.dim:
            raise ValueError("dimension mismatch")
        adj = _adjugate(t.rows)
        coeffs = [
            sum((x.coeffs[i] * adj[i][j] for i in range(len(adj))), mpz(0))
            for j in range(len(adj))
        ]
        return Hyperplane(coeffs)
    raise TypeError(f"cannot apply a projective map to {type(x).__name__}")


def inverse_map(t: ProjMap) -> ProjMap:
    """Projective inverse (adjugate representative)."""
    return ProjMap(tuple(tuple(row) for row in _adjugate(t.rows)))


def compose(outer: ProjMap, inner: ProjMap) -> ProjMap:
    """Matrix product: compose(f, g) acts as x -> f(g(x))."""
    if outer.dim != inner.dim:
        raise ValueError("dimension mismatch")
    n = outer.dim + 1
    rows = [
        [
            sum((outer.rows[i][k] * inner.rows[k][j] for k in range(n)), mpz(0))
            for j in range(n)
        ]
        for i in range(n)
    ]
    return ProjMap(tuple(tuple(row) for row in rows))


def in_general_position(points: Sequence[ProjPoint]) -> bool:
    """True iff the d+1 given points of P^d are linearly independent."""
    if not points:
        raise ValueError("no points given")
    d = points[0].dim
    if len(points) != d + 1:
        raise ValueError(f"general position in P^{d} is asked of {d + 1} points")
    if any(p.dim != d for p in points):
        raise ValueError("dimension mismatch")
    rows = [list(p.coords) for p in points]
    return det_int(rows) != 0
