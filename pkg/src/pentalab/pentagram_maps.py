"""Pentagram-type maps on twisted polygons and strips.

Five families share one interface:

* Generalized T_{I,J}: the hyperplane P^I_k passes through v_k and the d-1
  vertices at cumulative jumps of I; the image of v_k is the meet of the d
  hyperplanes P^I at cumulative shifts of J. Short-diagonal, dented, and
  deep-dented maps are special tuples.
* Skew: d explicit offset tuples, one hyperplane each, all met at the same
  base index.
* Universal: acts on d-tuples of polygons; row l of the jump matrix builds a
  hyperplane from one vertex of each polygon, row p of the intersection
  matrix says which shifted hyperplanes meet to form output polygon p.
* Corrugated: the chord (v_{k-1}, v_{k+d-1}) meets the chord (v_k, v_{k+d});
  the meet exists exactly on corrugated inputs (or everywhere when d = 2).
* Mixed: span of the A-offsets meets the span of the B-offsets, with
  |A| + |B| = d + 2.

Inverse specs: for Generalized, reversing both tuples and swapping their
roles gives a map whose composite with the original is a pure index shift;
for Universal, negating and transposing both matrices and swapping their
roles gives the exact inverse (no shift). The alpha map sends d sequences to
the d sequences of their jump hyperplanes, read as points of the dual space;
applying it with the jump matrix and then with the intersection matrix is
exactly the universal map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

from .exact_linalg import ZeroVector
from .polygon import TwistedPolygon, VertexStrip, WindowExceeded, vertex
from .projective import (
    DegenerateMeet,
    DegenerateSpan,
    Hyperplane,
    ProjPoint,
    meet_hyperplanes,
    meet_spans,
    span_hyperplane,
)

__all__ = [
    "DegenerateImage",
    "MonodromyMismatch",
    "Generalized",
    "Skew",
    "Universal",
    "Corrugated",
    "Mixed",
    "MapSpec",
    "short_diagonal",
    "dented",
    "deep_dented",
    "spec_offsets",
    "reach",
    "diagonal_hyperplane",
    "apply",
    "apply_strip",
    "apply_universal",
    "alpha_map",
    "inverse_spec",
    "universal_inverse_spec",
    "format_map_name",
    "parse_map_name",
    "spec_to_json",
    "spec_from_json",
]


class DegenerateImage(RuntimeError):
    """The image of some vertex is not a well-defined point."""


class MonodromyMismatch(ValueError):
    """Universal maps need input polygons with matching monodromies."""


def _check_positive_tuple(t, name: str, length: int):
    if len(t) != length:
        raise ValueError(f"{name} must have length {length}")
    if any(int(e) < 1 for e in t):
        raise ValueError(f"{name} entries must be positive integers")


@dataclass(frozen=True)
class Generalized:
    """T_{I,J} with (d-1)-tuples of positive jumps I and intersections J."""

    d: int
    I: tuple
    J: tuple

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("need d >= 2")
        object.__setattr__(self, "I", tuple(int(e) for e in self.I))
        object.__setattr__(self, "J", tuple(int(e) for e in self.J))
        _check_positive_tuple(self.I, "I", self.d - 1)
        _check_positive_tuple(self.J, "J", self.d - 1)


@dataclass(frozen=True)
class Skew:
    """d pairwise distinct offset d-tuples, one spanning hyperplane each."""

    d: int
    tuples: tuple

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("need d >= 2")
        tt = tuple(tuple(int(e) for e in t) for t in self.tuples)
        object.__setattr__(self, "tuples", tt)
        if len(tt) != self.d:
            raise ValueError(f"need {self.d} offset tuples")
        if any(len(t) != self.d for t in tt):
            raise ValueError(f"each offset tuple must have length {self.d}")
        if len(set(tt)) != self.d:
            raise ValueError("offset tuples must be pairwise distinct")


@dataclass(frozen=True)
class Universal:
    """Jump matrix Imat and intersection matrix Jmat, both d x d integers."""

    d: int
    Imat: tuple
    Jmat: tuple

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("need d >= 2")
        for name in ("Imat", "Jmat"):
            m = tuple(tuple(int(e) for e in row) for row in getattr(self, name))
            object.__setattr__(self, name, m)
            if len(m) != self.d or any(len(row) != self.d for row in m):
                raise ValueError(f"{name} must be {self.d}x{self.d}")


@dataclass(frozen=True)
class Corrugated:
    """Chord (v_{k-1}, v_{k+d-1}) meets chord (v_k, v_{k+d})."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("need d >= 2")


@dataclass(frozen=True)
class Mixed:
    """span(v_{k+a}: a in A) meets span(v_{k+b}: b in B), |A|+|B| = d+2."""

    d: int
    A: tuple
    B: tuple

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(int(e) for e in self.A))
        object.__setattr__(self, "B", tuple(int(e) for e in self.B))
        if self.d < 2:
            raise ValueError("need d >= 2")
        if len(self.A) < 2 or len(self.B) < 2:
            raise ValueError("both offset families need at least 2 vertices")
        if len(self.A) + len(self.B) != self.d + 2:
            raise ValueError("offset families must total d + 2 vertices")
        if len(set(self.A)) != len(self.A) or len(set(self.B)) != len(self.B):
            raise ValueError("offsets within a family must be distinct")


MapSpec = Union[Generalized, Skew, Universal, Corrugated, Mixed]


def short_diagonal(d: int) -> Generalized:
    """Jumps of 2 everywhere, intersections of 1: the classical map."""
    return Generalized(d, (2,) * (d - 1), (1,) * (d - 1))


def dented(d: int, m: int) -> Generalized:
    """One jump of 2 in position m (1-based), every other entry 1."""
    if not 1 <= m <= d - 1:
        raise ValueError("dent position must be in 1..d-1")
    return deep_dented(d, m, 2)


def deep_dented(d: int, m: int, p: int) -> Generalized:
    """One jump of p in position m, every other entry 1."""
    if not 1 <= m <= d - 1:
        raise ValueError("dent position must be in 1..d-1")
    if p < 2:
        raise ValueError("jump depth must be at least 2")
    i = [1] * (d - 1)
    i[m - 1] = p
    return Generalized(d, tuple(i), (1,) * (d - 1))


def _cumulative(t: Sequence[int]) -> tuple:
    out = [0]
    for e in t:
        out.append(out[-1] + e)
    return tuple(out)


def spec_offsets(spec: MapSpec) -> tuple:
    """Sorted vertex offsets consumed when producing output vertex 0."""
    if isinstance(spec, Generalized):
        hyper = _cumulative(spec.I)
        shifts = _cumulative(spec.J)
        offs = {c + o for c in shifts for o in hyper}
    elif isinstance(spec, Skew):
        offs = {e for t in spec.tuples for e in t}
    elif isinstance(spec, Corrugated):
        offs = {-1, 0, spec.d - 1, spec.d}
    elif isinstance(spec, Mixed):
        offs = set(spec.A) | set(spec.B)
    elif isinstance(spec, Universal):
        offs = set()
        for p in range(spec.d):
            for s in range(spec.d):
                for t in range(spec.d):
                    offs.add(spec.Jmat[p][s] + spec.Imat[s][t])
    else:
        raise TypeError(f"not a map spec: {type(spec).__name__}")
    return tuple(sorted(offs))


def reach(spec: MapSpec) -> int:
    """Total window shrink of one application: max offset minus min offset."""
    offs = spec_offsets(spec)
    return offs[-1] - offs[0]


def diagonal_hyperplane(obj, spec: MapSpec, k: int):
    """The spanning hyperplane(s) the map uses at base index k.

    Generalized: the single P^I_k. Skew: one hyperplane per offset tuple.
    """
    vat = _accessor(obj)
    if isinstance(spec, Generalized):
        hyper = _cumulative(spec.I)
        return span_hyperplane([vat(k + o) for o in hyper])
    if isinstance(spec, Skew):
        return tuple(
            span_hyperplane([vat(k + o) for o in t]) for t in spec.tuples
        )
    raise TypeError("diagonal hyperplanes exist for Generalized and Skew specs")


def _accessor(obj) -> Callable[[int], ProjPoint]:
    if isinstance(obj, TwistedPolygon):
        cache: dict = {}

        def vat(k: int) -> ProjPoint:
            if 0 <= k < obj.n:
                return obj.vertices[k]
            v = cache.get(k)
            if v is None:
                v = vertex(obj, k)
                cache[k] = v
            return v

        return vat
    if isinstance(obj, VertexStrip):
        return obj.vertex
    raise TypeError(f"cannot read vertices of {type(obj).__name__}")


def _image_vertex(spec: MapSpec, vat, k: int, hyper_cache: dict) -> ProjPoint:
    if isinstance(spec, Generalized):
        hyper = _cumulative(spec.I)
        shifts = _cumulative(spec.J)
        planes = []
        for c in shifts:
            m = k + c
            h = hyper_cache.get(m)
            if h is None:
                h = span_hyperplane([vat(m + o) for o in hyper])
                hyper_cache[m] = h
            planes.append(h)
        return meet_hyperplanes(planes)
    if isinstance(spec, Skew):
        planes = []
        for idx, t in enumerate(spec.tuples):
            key = (idx, k)
            h = hyper_cache.get(key)
            if h is None:
                h = span_hyperplane([vat(k + o) for o in t])
                hyper_cache[key] = h
            planes.append(h)
        if len(set(planes)) != len(planes):
            raise DegenerateMeet("coincident hyperplanes in skew meet")
        return meet_hyperplanes(planes)
    if isinstance(spec, Corrugated):
        d = spec.d
        return meet_spans(
            [vat(k - 1), vat(k + d - 1)], [vat(k), vat(k + d)]
        )
    if isinstance(spec, Mixed):
        return meet_spans(
            [vat(k + a) for a in spec.A], [vat(k + b) for b in spec.B]
        )
    raise TypeError(
        "universal specs act on d-tuples of polygons; use apply_universal"
    )


def apply(spec: MapSpec, p: TwistedPolygon) -> TwistedPolygon:
    """Image polygon: same n, same monodromy, vertices mapped exactly.

    Raises DegenerateImage when some meet degenerates or an output window
    leaves general position.
    """
    if isinstance(spec, Universal):
        raise TypeError(
            "universal specs act on d-tuples of polygons; use apply_universal"
        )
    if spec.d != p.d:
        raise ValueError("spec and polygon dimension differ")
    vat = _accessor(p)
    hyper_cache: dict = {}
    verts = []
    for k in range(p.n):
        try:
            verts.append(_image_vertex(spec, vat, k, hyper_cache))
        except (DegenerateSpan, DegenerateMeet, ZeroVector) as e:
            raise DegenerateImage(f"image of vertex {k}: {e}") from e
    try:
        return TwistedPolygon(p.d, p.n, tuple(verts), p.monodromy)
    except ValueError as e:
        raise DegenerateImage(f"image polygon invalid: {e}") from e


def apply_strip(spec: MapSpec, s: VertexStrip) -> VertexStrip:
    """Image strip on the shrunken window; WindowExceeded if nothing survives."""
    if isinstance(spec, Universal):
        raise TypeError(
            "universal specs act on d-tuples of strips; use apply_universal"
        )
    if spec.d != s.d:
        raise ValueError("spec and strip dimension differ")
    offs = spec_offsets(spec)
    lo = s.lo - offs[0]
    hi = s.hi - offs[-1]
    if hi <= lo:
        raise WindowExceeded(
            f"window [{s.lo}, {s.hi}) too short for reach {reach(spec)}"
        )
    vat = _accessor(s)
    hyper_cache: dict = {}
    verts = []
    for k in range(lo, hi):
        try:
            verts.append(_image_vertex(spec, vat, k, hyper_cache))
        except (DegenerateSpan, DegenerateMeet, ZeroVector) as e:
            raise DegenerateImage(f"image of vertex {k}: {e}") from e
    # no general-position requirement on strip images: downstream meets will
    # surface any actual degeneracy, and duality composites only need the
    # intermediate meets to exist
    return VertexStrip(s.d, lo, hi, tuple(verts))


def _hyperplane_strip_windows(spec: Universal, windows):
    """Valid index window of each jump-hyperplane sequence, from input windows."""
    out = []
    for l in range(spec.d):
        lo = max(windows[s][0] - spec.Imat[l][s] for s in range(spec.d))
        hi = min(windows[s][1] - spec.Imat[l][s] for s in range(spec.d))
        out.append((lo, hi))
    return out


def apply_universal(spec: Universal, polys: Sequence) -> tuple:
    """Map a d-tuple of polygons (or strips) to the d output tuple."""
    if not isinstance(spec, Universal):
        raise TypeError("apply_universal needs a Universal spec")
    if len(polys) != spec.d:
        raise ValueError(f"need exactly {spec.d} input sequences")
    kinds = {type(q) for q in polys}
    if len(kinds) != 1:
        raise TypeError("inputs must be all polygons or all strips")
    if any(q.d != spec.d for q in polys):
        raise ValueError("input dimension mismatch")
    d = spec.d

    if isinstance(polys[0], TwistedPolygon):
        n = polys[0].n
        if any(q.n != n for q in polys):
            raise MonodromyMismatch("input polygons must share n")
        mono = polys[0].monodromy
        if any(q.monodromy != mono for q in polys):
            raise MonodromyMismatch("input monodromies differ")
        vats = [_accessor(q) for q in polys]
        hyp_cache: dict = {}

        def hyp(l: int, m: int) -> Hyperplane:
            h = hyp_cache.get((l, m))
            if h is None:
                h = span_hyperplane(
                    [vats[s](m + spec.Imat[l][s]) for s in range(d)]
                )
                hyp_cache[(l, m)] = h
            return h

        outs = []
        for p_idx in range(d):
            verts = []
            for k in range(n):
                try:
                    planes = [hyp(s, k + spec.Jmat[p_idx][s]) for s in range(d)]
                    verts.append(meet_hyperplanes(planes))
                except (DegenerateSpan, DegenerateMeet, ZeroVector) as e:
                    raise DegenerateImage(
                        f"output {p_idx}, vertex {k}: {e}"
                    ) from e
            try:
                outs.append(TwistedPolygon(d, n, tuple(verts), mono))
            except ValueError as e:
                raise DegenerateImage(f"output polygon {p_idx} invalid: {e}") from e
        return tuple(outs)

    # strips
    windows = [(q.lo, q.hi) for q in polys]
    hw = _hyperplane_strip_windows(spec, windows)
    vats = [_accessor(q) for q in polys]
    hyp_cache = {}

    def hyp(l: int, m: int) -> Hyperplane:
        h = hyp_cache.get((l, m))
        if h is None:
            h = span_hyperplane([vats[s](m + spec.Imat[l][s]) for s in range(d)])
            hyp_cache[(l, m)] = h
        return h

    outs = []
    for p_idx in range(d):
        lo = max(hw[s][0] - spec.Jmat[p_idx][s] for s in range(d))
        hi = min(hw[s][1] - spec.Jmat[p_idx][s] for s in range(d))
        if hi <= lo:
            raise WindowExceeded(f"output {p_idx} window is empty")
        verts = []
        for k in range(lo, hi):
            try:
                planes = [hyp(s, k + spec.Jmat[p_idx][s]) for s in range(d)]
                verts.append(meet_hyperplanes(planes))
            except (DegenerateSpan, DegenerateMeet, ZeroVector) as e:
                raise DegenerateImage(f"output {p_idx}, vertex {k}: {e}") from e
        outs.append(VertexStrip(d, lo, hi, tuple(verts)))
    return tuple(outs)


def alpha_map(Imat: Sequence[Sequence[int]], strips: Sequence[VertexStrip]) -> tuple:
    """d sequences of jump hyperplanes, emitted as points of the dual space.

    Output sequence l at index j is the hyperplane through vertex j + Imat[l][s]
    of input sequence s, for s = 1..d. Self-inverse bookkeeping: applying again
    with -Imat transposed recovers the originals exactly.
    """
    d = len(strips)
    Imat = tuple(tuple(int(e) for e in row) for row in Imat)
    if len(Imat) != d or any(len(row) != d for row in Imat):
        raise ValueError("jump matrix must be d x d")
    if any(s.d != d for s in strips):
        raise ValueError("strip dimension must match the tuple size")
    outs = []
    for l in range(d):
        lo = max(strips[s].lo - Imat[l][s] for s in range(d))
        hi = min(strips[s].hi - Imat[l][s] for s in range(d))
        if hi <= lo:
            raise WindowExceeded(f"dual sequence {l} window is empty")
        pts = []
        for j in range(lo, hi):
            try:
                h = span_hyperplane(
                    [strips[s].vertex(j + Imat[l][s]) for s in range(d)]
                )
            except DegenerateSpan as e:
                raise DegenerateImage(f"dual sequence {l}, index {j}: {e}") from e
            pts.append(ProjPoint(h.coeffs))
        outs.append(VertexStrip(d, lo, hi, tuple(pts)))
    return tuple(outs)


def _neg_transpose(m: tuple) -> tuple:
    d = len(m)
    return tuple(tuple(-m[s][l] for s in range(d)) for l in range(d))


def inverse_spec(spec: Generalized) -> tuple:
    """Duality partner of a Generalized map, with a usage note.

    Reverse both tuples and swap their roles. The composite with the original
    is not the identity but a pure index shift (by the sum of all tuple
    entries); recover the shift with equal_up_to_shift.
    """
    if not isinstance(spec, Generalized):
        raise TypeError("inverse_spec takes a Generalized spec")
    dual = Generalized(spec.d, spec.J[::-1], spec.I[::-1])
    note = (
        "composite with the original equals the index shift by "
        f"{sum(spec.I) + sum(spec.J)}"
    )
    return dual, note


def universal_inverse_spec(spec: Universal) -> Universal:
    """Exact inverse of a universal map: negate, transpose, and swap.

    The swap of the two matrices matters: with it the round trip is the exact
    identity on the surviving window (both composition orders, zero shift);
    without it the composite is not the identity for any shift. Applying this
    twice returns the original spec.
    """
    if not isinstance(spec, Universal):
        raise TypeError("universal_inverse_spec takes a Universal spec")
    return Universal(spec.d, _neg_transpose(spec.Jmat), _neg_transpose(spec.Imat))


def format_map_name(spec: MapSpec) -> str:
    """Canonical CLI name of a spec."""
    if isinstance(spec, Generalized):
        ones = (1,) * (spec.d - 1)
        if spec.J == ones:
            if spec.I == (2,) * (spec.d - 1):
                return "T_sh"
            big = [(i, e) for i, e in enumerate(spec.I, start=1) if e != 1]
            if len(big) == 1:
                m, p = big[0]
                if p == 2:
                    return f"T_m:{m}"
                return f"T_deep:{m},{p}"
        return "T:%s/%s" % (
            ",".join(str(e) for e in spec.I),
            ",".join(str(e) for e in spec.J),
        )
    if isinstance(spec, Skew):
        return "skew:" + "/".join(",".join(str(e) for e in t) for t in spec.tuples)
    if isinstance(spec, Corrugated):
        return "T_cor"
    if isinstance(spec, Mixed):
        return "mixed:%s/%s" % (
            ",".join(str(e) for e in spec.A),
            ",".join(str(e) for e in spec.B),
        )
    if isinstance(spec, Universal):
        return "universal:%s|%s" % (
            "/".join(",".join(str(e) for e in row) for row in spec.Imat),
            "/".join(",".join(str(e) for e in row) for row in spec.Jmat),
        )
    raise TypeError(f"not a map spec: {type(spec).__name__}")


def _parse_ints(s: str) -> tuple:
    return tuple(int(e) for e in s.split(","))


def parse_map_name(name: str, d: int) -> MapSpec:
    """Parse the CLI mini-language; the dimension comes from context."""
    name = name.strip()
    if name in ("T_st", "T_sh"):
        return short_diagonal(d)
    if name == "T_cor":
        return Corrugated(d)
    if name.startswith("T_m:"):
        return dented(d, int(name[4:]))
    if name.startswith("T_deep:"):
        m, p = _parse_ints(name[7:])
        return deep_dented(d, m, p)
    if name.startswith("T:"):
        body = name[2:]
        i_part, j_part = body.split("/", 1)
        return Generalized(d, _parse_ints(i_part), _parse_ints(j_part))
    if name.startswith("skew:"):
        tuples = tuple(_parse_ints(t) for t in name[5:].split("/"))
        return Skew(d, tuples)
    if name.startswith("mixed:"):
        a_part, b_part = name[6:].split("/", 1)
        return Mixed(d, _parse_ints(a_part), _parse_ints(b_part))
    if name.startswith("universal:"):
        i_part, j_part = name[10:].split("|", 1)
        imat = tuple(_parse_ints(r) for r in i_part.split("/"))
        jmat = tuple(_parse_ints(r) for r in j_part.split("/"))
        return Universal(d, imat, jmat)
    raise ValueError(f"unrecognized map name: {name!r}")


def spec_to_json(spec: MapSpec) -> dict:
    if isinstance(spec, Generalized):
        return {"kind": "generalized", "d": spec.d, "I": list(spec.I), "J": list(spec.J)}
    if isinstance(spec, Skew):
        return {"kind": "skew", "d": spec.d, "tuples": [list(t) for t in spec.tuples]}
    if isinstance(spec, Universal):
        return {
            "kind": "universal",
            "d": spec.d,
            "Imat": [list(r) for r in spec.Imat],
            "Jmat": [list(r) for r in spec.Jmat],
        }
    if isinstance(spec, Corrugated):
        return {"kind": "corrugated", "d": spec.d}
    if isinstance(spec, Mixed):
        return {"kind": "mixed", "d": spec.d, "A": list(spec.A), "B": list(spec.B)}
    raise TypeError(f"not a map spec: {type(spec).__name__}")


def spec_from_json(doc: dict) -> MapSpec:
    kind = doc["kind"]
    d = int(doc["d"])
    if kind == "generalized":
        return Generalized(d, tuple(doc["I"]), tuple(doc["J"]))
    if kind == "skew":
        return Skew(d, tuple(tuple(t) for t in doc["tuples"]))
    if kind == "universal":
        return Universal(
            d,
            tuple(tuple(r) for r in doc["Imat"]),
            tuple(tuple(r) for r in doc["Jmat"]),
        )
    if kind == "corrugated":
        return Corrugated(d)
    if kind == "mixed":
        return Mixed(d, tuple(doc["A"]), tuple(doc["B"]))
    raise ValueError(f"unknown map kind: {kind!r}")
