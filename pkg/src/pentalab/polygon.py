"""Twisted polygons and finite vertex strips in P^d.

A twisted n-gon is a bi-infinite vertex sequence with v_{k+n} = M(v_k) for a
fixed projective monodromy M; we store one period v_0..v_{n-1} plus M and
transport across the seam on demand. A vertex strip is a plain finite window
[lo, hi) with no wrap, which is what the duality round-trip checks act on.

Canonical invariants: the projective frame built on v_0..v_{d+1} is pushed to
the standard frame, the remaining vertices and the conjugated monodromy are
read off in those coordinates, and every entry is an exact rational. Two
projectively equivalent polygons get identical invariant lists, so the height
of the list (max of entry heights) is a projective invariant and is the
quantity whose growth the laboratory measures.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from gmpy2 import mpq, mpz

from .exact_linalg import format_rational, height, parse_rational
from .projective import (
    DegenerateFrame,
    ProjMap,
    ProjPoint,
    apply_map,
    compose,
    frame_transform,
    in_general_position,
    inverse_map,
)

__all__ = [
    "GenerationFailed",
    "WindowExceeded",
    "TwistedPolygon",
    "VertexStrip",
    "CorrugationWitness",
    "vertex",
    "shift",
    "projectively_equal",
    "equal_up_to_shift",
    "random_twisted",
    "random_strip",
    "random_corrugated_strip",
    "random_corrugated_polygon",
    "is_corrugated",
    "canonical_invariants",
    "polygon_height",
    "polygon_to_json",
    "polygon_from_json",
    "strip_to_json",
    "strip_from_json",
]


class GenerationFailed(RuntimeError):
    """Random generation kept hitting degenerate configurations."""


class WindowExceeded(IndexError):
    """A strip was asked for a vertex outside its window."""


@dataclass(frozen=True)
class TwistedPolygon:
    """One period of a twisted n-gon plus its monodromy.

    Validity (checked here): n > d+2, every vertex lives in P^d, and every
    window of d+1 cyclically consecutive vertices (wrapped through the
    monodromy) is in general position.
    """

    d: int
    n: int
    vertices: tuple
    monodromy: ProjMap

    def __post_init__(self):
        if self.n <= self.d + 2:
            raise ValueError("need n > d + 2")
        if len(self.vertices) != self.n:
            raise ValueError("vertex count does not match n")
        if any(v.dim != self.d for v in self.vertices):
            raise ValueError("vertex dimension mismatch")
        if self.monodromy.dim != self.d:
            raise ValueError("monodromy dimension mismatch")
        ext = list(self.vertices) + [
            apply_map(self.monodromy, v) for v in self.vertices[: self.d]
        ]
        for k in range(self.n):
            if not in_general_position(ext[k : k + self.d + 1]):
                raise ValueError(f"window at vertex {k} is degenerate")


@dataclass(frozen=True)
class VertexStrip:
    """Finite vertex window [lo, hi) in P^d, no wrap."""

    d: int
    lo: int
    hi: int
    vertices: tuple

    def __post_init__(self):
        if self.hi - self.lo != len(self.vertices):
            raise ValueError("window length does not match vertex count")
        if any(v.dim != self.d for v in self.vertices):
            raise ValueError("vertex dimension mismatch")

    def __len__(self) -> int:
        return self.hi - self.lo

    def vertex(self, k: int) -> ProjPoint:
        if not self.lo <= k < self.hi:
            raise WindowExceeded(f"index {k} outside window [{self.lo}, {self.hi})")
        return self.vertices[k - self.lo]


@dataclass(frozen=True)
class CorrugationWitness:
    """A corrugated strip plus the exact recurrence coefficients.

    coeffs[i] = (a, b, c) with v_{k+d} = a v_{k-1} + b v_k + c v_{k+d-1} on the
    stored canonical representatives, where k = strip.lo + 1 + i.
    """

    strip: VertexStrip
    coeffs: tuple


def vertex(p: TwistedPolygon, k: int) -> ProjPoint:
    """Vertex at any integer index, transported by monodromy powers."""
    q, r = divmod(k, p.n)
    v = p.vertices[r]
    if q == 0:
        return v
    m = p.monodromy if q > 0 else inverse_map(p.monodromy)
    for _ in range(abs(q)):
        v = apply_map(m, v)
    return v


def shift(obj, s: int):
    """Reindex so that the new vertex k is the old vertex k+s."""
    if isinstance(obj, TwistedPolygon):
        return TwistedPolygon(
            obj.d,
            obj.n,
            tuple(vertex(obj, k + s) for k in range(obj.n)),
            obj.monodromy,
        )
    if isinstance(obj, VertexStrip):
        return VertexStrip(obj.d, obj.lo - s, obj.hi - s, obj.vertices)
    raise TypeError(f"cannot shift {type(obj).__name__}")


def projectively_equal(a, b) -> bool:
    """Exact equality of canonical representatives, vertexwise."""
    if isinstance(a, TwistedPolygon) and isinstance(b, TwistedPolygon):
        return (
            a.d == b.d
            and a.n == b.n
            and a.vertices == b.vertices
            and a.monodromy == b.monodromy
        )
    if isinstance(a, VertexStrip) and isinstance(b, VertexStrip):
        return a.d == b.d and a.lo == b.lo and a.hi == b.hi and a.vertices == b.vertices
    raise TypeError("can only compare like with like")


def equal_up_to_shift(a, b, max_shift: int = 8) -> Optional[int]:
    """Smallest |s| (positive first) with b = shift(a, s), or None.

    Polygons compare over a full period and must share the monodromy; strips
    compare over the overlap of their windows after shifting, which must be
    nonempty.
    """
    if type(a) is not type(b):
        raise TypeError("can only compare like with like")
    candidates = [0]
    for m in range(1, max_shift + 1):
        candidates.extend((m, -m))
    if isinstance(a, TwistedPolygon):
        if a.d != b.d or a.n != b.n or a.monodromy != b.monodromy:
            return None
        for s in candidates:
            if all(b.vertices[k] == vertex(a, k + s) for k in range(a.n)):
                return s
        return None
    if isinstance(a, VertexStrip):
        if a.d != b.d:
            return None
        for s in candidates:
            lo = max(b.lo, a.lo - s)
            hi = min(b.hi, a.hi - s)
            if hi <= lo:
                continue
            if all(b.vertex(k) == a.vertex(k + s) for k in range(lo, hi)):
                return s
        return None
    raise TypeError(f"cannot compare {type(a).__name__}")


def _random_point(rng: random.Random, d: int, coord_range) -> ProjPoint:
    lo, hi = coord_range
    return ProjPoint(tuple(mpz(rng.randint(lo, hi)) for _ in range(d + 1)))


def random_twisted(
    d: int,
    n: int,
    seed: int,
    coord_range=(1, 10),
    max_rounds: int = 100,
) -> TwistedPolygon:
    """Random twisted n-gon: n random vertices, d+1 random monodromy columns.

    Rejection sampling until every general-position invariant holds; the draw
    is deterministic in the seed.
    """
    rng = random.Random(seed)
    lo, hi = coord_range
    for _ in range(max_rounds):
        try:
            verts = tuple(_random_point(rng, d, coord_range) for _ in range(n))
            # small coordinate ranges make accidental vertex repeats likely
            if len({v.coords for v in verts}) != n:
                continue
            cols = [
                [mpz(rng.randint(lo, hi)) for _ in range(d + 1)]
                for _ in range(d + 1)
            ]
            mono = ProjMap(
                tuple(
                    tuple(cols[j][i] for j in range(d + 1)) for i in range(d + 1)
                )
            )
            return TwistedPolygon(d, n, verts, mono)
        except ValueError:
            continue
    raise GenerationFailed(f"no valid polygon in {max_rounds} rounds (seed {seed})")


def random_strip(
    d: int,
    lo: int,
    hi: int,
    seed: int,
    coord_range=(1, 10),
    max_rounds: int = 100,
) -> VertexStrip:
    """Random strip on [lo, hi) with every d+1 consecutive vertices independent."""
    if hi - lo < d + 1:
        raise ValueError("window too short for a general-position check")
    rng = random.Random(seed)
    for _ in range(max_rounds):
        verts = []
        seen = set()
        ok = True
        for _ in range(hi - lo):
            v = _random_point(rng, d, coord_range)
            if v.coords in seen:
                ok = False
                break
            seen.add(v.coords)
            verts.append(v)
            if len(verts) >= d + 1 and not in_general_position(verts[-(d + 1) :]):
                ok = False
                break
        if ok:
            return VertexStrip(d, lo, hi, tuple(verts))
    raise GenerationFailed(f"no valid strip in {max_rounds} rounds (seed {seed})")


def _combine(triple, pts) -> ProjPoint:
    a, b, c = triple
    coords = [
        a * x + b * y + c * z
        for x, y, z in zip(pts[0].coords, pts[1].coords, pts[2].coords)
    ]
    return ProjPoint(coords)


def random_corrugated_strip(
    d: int,
    lo: int,
    hi: int,
    seed: int,
    coord_range=(1, 10),
    coeff_range=(1, 5),
    max_rounds: int = 100,
) -> CorrugationWitness:
    """Corrugated strip: v_{k+d} is a recorded combination of v_{k-1}, v_k, v_{k+d-1}.

    Every window of d+1 consecutive vertices stays in general position, so the
    strip is corrugated but otherwise generic.
    """
    if d < 2:
        raise ValueError("corrugation needs d >= 2")
    if hi - lo < d + 2:
        raise ValueError("window too short to corrugate")
    rng = random.Random(seed)
    clo, chi = coeff_range
    for _ in range(max_rounds):
        verts = []
        ok = True
        for _ in range(d + 1):
            verts.append(_random_point(rng, d, coord_range))
        if not in_general_position(verts):
            continue
        coeffs = []
        for k in range(lo + 1, hi - d):
            i = k - lo
            raw = (
                mpz(rng.randint(clo, chi)),
                mpz(rng.randint(clo, chi)),
                mpz(rng.randint(clo, chi)),
            )
            new = _combine(raw, (verts[i - 1], verts[i], verts[i + d - 1]))
            verts.append(new)
            if not in_general_position(verts[-(d + 1) :]):
                ok = False
                break
            coeffs.append(raw)
        if ok and len({v.coords for v in verts}) == len(verts):
            strip = VertexStrip(d, lo, hi, tuple(verts))
            exact = tuple(
                _exact_coeffs(strip, lo + 1 + idx, raw, d)
                for idx, raw in enumerate(coeffs)
            )
            return CorrugationWitness(strip, exact)
    raise GenerationFailed(f"no corrugated strip in {max_rounds} rounds (seed {seed})")


def _exact_coeffs(strip: VertexStrip, k: int, raw, d: int):
    """Coefficients expressing the stored canonical v_{k+d} exactly.

    The generator combined canonical inputs with integer raw coefficients, then
    the output was renormalized by some rational s; recover s from any nonzero
    coordinate and divide it back out.
    """
    target = strip.vertex(k + d)
    p1 = strip.vertex(k - 1).coords
    p2 = strip.vertex(k).coords
    p3 = strip.vertex(k + d - 1).coords
    a, b, c = raw
    rawvec = [a * x + b * y + c * z for x, y, z in zip(p1, p2, p3)]
    i = next(j for j, e in enumerate(target.coords) if e)
    s = mpq(rawvec[i], target.coords[i])
    return (mpq(a) / s, mpq(b) / s, mpq(c) / s)


def is_corrugated(strip: VertexStrip) -> bool:
    """True iff every applicable quadruple v_{k-1}, v_k, v_{k+d-1}, v_{k+d}
    spans a projective 2-plane (rank exactly 3)."""
    from .exact_linalg import nullspace_int

    d = strip.d
    for k in range(strip.lo + 1, strip.hi - d):
        quad = [
            list(strip.vertex(k - 1).coords),
            list(strip.vertex(k).coords),
            list(strip.vertex(k + d - 1).coords),
            list(strip.vertex(k + d).coords),
        ]
        rank = 4 - len(nullspace_int([[row[c] for row in quad] for c in range(d + 1)]))
        if rank != 3:
            return False
    return True


def random_corrugated_polygon(
    d: int,
    n: int,
    seed: int,
    coord_range=(1, 10),
    coeff_range=(1, 5),
    max_rounds: int = 100,
) -> TwistedPolygon:
    """Corrugated twisted n-gon from an n-periodic 3-term recurrence.

    The monodromy is the transfer map of the periodic recurrence, recovered as
    the matrix sending the basis window v_0..v_d to v_n..v_{n+d}.
    """
    if d < 3:
        raise ValueError("corrugated twisted polygons need d >= 3 to be nontrivial")
    rng = random.Random(seed)
    lo_c, hi_c = coeff_range
    for _ in range(max_rounds):
        verts = [_random_point(rng, d, coord_range) for _ in range(d + 1)]
        if not in_general_position(verts):
            continue
        triples = [
            (
                mpz(rng.randint(lo_c, hi_c)),
                mpz(rng.randint(lo_c, hi_c)),
                mpz(rng.randint(lo_c, hi_c)),
            )
            for _ in range(n)
        ]
        ok = True
        for k in range(1, n + 1):
            t = triples[(k - 1) % n]
            new = _combine(t, (verts[k - 1], verts[k], verts[k + d - 1]))
            verts.append(new)
            if not in_general_position(verts[-(d + 1) :]):
                ok = False
                break
        if not ok or len({v.coords for v in verts[:n]}) != n:
            continue
        try:
            basis = _columns_matrix(verts[: d + 1])
            image = _columns_matrix(verts[n : n + d + 1])
            from .exact_linalg import det_int
            from .projective import _adjugate

            if det_int(basis) == 0:
                continue
            adj = _adjugate(basis)
            rows = [
                [
                    sum((image[i][k] * adj[k][j] for k in range(d + 1)), mpz(0))
                    for j in range(d + 1)
                ]
                for i in range(d + 1)
            ]
            mono = ProjMap(tuple(tuple(r) for r in rows))
            poly = TwistedPolygon(d, n, tuple(verts[:n]), mono)
        except ValueError:
            continue
        # transfer-map consistency across the seam
        if all(
            apply_map(mono, verts[k]) == verts[n + k] for k in range(d + 1)
        ):
            return poly
    raise GenerationFailed(f"no corrugated polygon in {max_rounds} rounds (seed {seed})")


def _columns_matrix(points: Sequence[ProjPoint]) -> list:
    m = len(points)
    return [[p.coords[r] for p in points] for r in range(m)]


def canonical_invariants(p: TwistedPolygon) -> list:
    """Frame-normalized coordinates: push v_0..v_{d+1} to the standard frame,
    list the remaining vertices and the conjugated monodromy entries.

    Projectively equivalent polygons (same indexing) give identical lists.
    """
    g = frame_transform([vertex(p, k) for k in range(p.d + 2)])
    out = []
    for k in range(p.d + 2, p.n):
        out.extend(mpq(e) for e in apply_map(g, p.vertices[k]).coords)
    conj = compose(compose(g, p.monodromy), inverse_map(g))
    for row in conj.rows:
        out.extend(mpq(e) for e in row)
    return out


def polygon_height(p: TwistedPolygon) -> mpz:
    """Height of the canonical invariant list: max over entries of
    max(|numerator|, denominator)."""
    return max(height(q) for q in canonical_invariants(p))


def polygon_to_json(p: TwistedPolygon) -> dict:
    return {
        "d": p.d,
        "n": p.n,
        "vertices": [[format_rational(c) for c in v.coords] for v in p.vertices],
        "monodromy": [[format_rational(e) for e in row] for row in p.monodromy.rows],
    }


def polygon_from_json(doc: dict) -> TwistedPolygon:
    verts = tuple(
        ProjPoint(tuple(parse_rational(s) for s in row)) for row in doc["vertices"]
    )
    mono = ProjMap(
        tuple(tuple(parse_rational(s) for s in row) for row in doc["monodromy"])
    )
    return TwistedPolygon(int(doc["d"]), int(doc["n"]), verts, mono)


def strip_to_json(s: VertexStrip) -> dict:
    return {
        "d": s.d,
        "lo": s.lo,
        "hi": s.hi,
        "vertices": [[format_rational(c) for c in v.coords] for v in s.vertices],
    }


def strip_from_json(doc: dict) -> VertexStrip:
    verts = tuple(
        ProjPoint(tuple(parse_rational(s) for s in row)) for row in doc["vertices"]
    )
    return VertexStrip(int(doc["d"]), int(doc["lo"]), int(doc["hi"]), verts)
