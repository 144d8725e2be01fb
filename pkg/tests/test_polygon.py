import json
import random

import pytest
from gmpy2 import mpz

from pentalab.exact_linalg import det_int, height
from pentalab.projective import ProjPoint, apply_map, compose, inverse_map
from pentalab.polygon import (
    GenerationFailed,
    TwistedPolygon,
    VertexStrip,
    WindowExceeded,
    canonical_invariants,
    equal_up_to_shift,
    is_corrugated,
    polygon_from_json,
    polygon_height,
    polygon_to_json,
    projectively_equal,
    random_corrugated_polygon,
    random_corrugated_strip,
    random_strip,
    random_twisted,
    shift,
    strip_from_json,
    strip_to_json,
    vertex,
)


def transformed(p, g):
    verts = tuple(apply_map(g, v) for v in p.vertices)
    mono = compose(compose(g, p.monodromy), inverse_map(g))
    return TwistedPolygon(p.d, p.n, verts, mono)


def rank_of(rows):
    """Exact rank via minors; rows is a small integer matrix."""
    rows = [list(r) for r in rows]
    m, n = len(rows), len(rows[0])
    for size in range(min(m, n), 0, -1):
        import itertools

        for ri in itertools.combinations(range(m), size):
            for ci in itertools.combinations(range(n), size):
                sub = [[rows[i][j] for j in ci] for i in ri]
                if det_int(sub) != 0:
                    return size
    return 0


def test_vertex_monodromy_transport():
    for d in (2, 3):
        p = random_twisted(d, 7, seed=31)
        m = p.monodromy
        mi = inverse_map(m)
        for k in range(-2 * p.n, 2 * p.n):
            assert vertex(p, k + p.n) == apply_map(m, vertex(p, k))
        assert vertex(p, -p.n) == apply_map(mi, vertex(p, 0))
        for k in range(p.n):
            assert vertex(p, k) == p.vertices[k]


def test_random_twisted_deterministic():
    a = random_twisted(2, 11, seed=5)
    b = random_twisted(2, 11, seed=5)
    assert a == b
    c = random_twisted(2, 11, seed=6)
    assert a != c


def test_random_twisted_within_range():
    p = random_twisted(3, 11, seed=1)
    assert p.d == 3 and p.n == 11
    for v in p.vertices:
        assert all(1 <= int(c) <= 10 for c in v.coords) or v.coords[0] > 0


def test_generation_failure():
    with pytest.raises(GenerationFailed):
        random_twisted(2, 11, seed=1, coord_range=(1, 1))


def test_polygon_rejects_bad_n():
    p = random_twisted(2, 11, seed=2)
    with pytest.raises(ValueError):
        TwistedPolygon(2, 4, p.vertices[:4], p.monodromy)


def test_polygon_json_round_trip():
    for d in (2, 3):
        p = random_twisted(d, 9, seed=41)
        doc = polygon_to_json(p)
        txt = json.dumps(doc)
        q = polygon_from_json(json.loads(txt))
        assert p == q


def test_strip_json_round_trip():
    s = random_strip(2, -3, 9, seed=42)
    doc = strip_to_json(s)
    t = strip_from_json(json.loads(json.dumps(doc)))
    assert s == t


def test_strip_window_bounds():
    s = random_strip(2, 0, 8, seed=43)
    assert len(s) == 8
    s.vertex(0)
    s.vertex(7)
    with pytest.raises(WindowExceeded):
        s.vertex(8)
    with pytest.raises(WindowExceeded):
        s.vertex(-1)


def test_shift_round_trip_polygon():
    p = random_twisted(2, 11, seed=44)
    for s in (-3, -1, 0, 1, 2, 4):
        q = shift(p, s)
        assert equal_up_to_shift(p, q, max_shift=5) == s
        assert vertex(q, 0) == vertex(p, s)
    assert projectively_equal(p, shift(p, 0))


def test_shift_round_trip_strip():
    s = random_strip(3, -5, 12, seed=45)
    for k in (-2, 0, 3):
        t = shift(s, k)
        assert t.lo == s.lo - k and t.hi == s.hi - k
        assert equal_up_to_shift(s, t, max_shift=4) == k


def test_equal_up_to_shift_negative_control():
    a = random_twisted(2, 11, seed=46)
    b = random_twisted(2, 11, seed=47)
    assert equal_up_to_shift(a, b, max_shift=6) is None


def test_canonical_invariants_projective_invariance():
    rng = random.Random(48)
    for d in (2, 3):
        p = random_twisted(d, 9, seed=49)
        inv = canonical_invariants(p)
        for _ in range(5):
            while True:
                rows = tuple(
                    tuple(rng.randint(-5, 5) for _ in range(d + 1))
                    for _ in range(d + 1)
                )
                try:
                    from pentalab.projective import ProjMap

                    g = ProjMap(rows)
                    break
                except ValueError:
                    continue
            assert canonical_invariants(transformed(p, g)) == inv
            assert polygon_height(transformed(p, g)) == polygon_height(p)


def test_canonical_invariants_detect_perturbation():
    p = random_twisted(2, 9, seed=50)
    verts = list(p.vertices)
    c = list(verts[-1].coords)
    c[0] += 1
    verts[-1] = ProjPoint(tuple(c))
    try:
        q = TwistedPolygon(p.d, p.n, tuple(verts), p.monodromy)
    except ValueError:
        return
    assert canonical_invariants(q) != canonical_invariants(p)


def test_polygon_height_trivial_frame():
    # invariants all in {0, 1} give height 1
    p = random_twisted(2, 9, seed=51)
    assert polygon_height(p) >= 1
    assert polygon_height(p) == max(
        height(x) for q in canonical_invariants(p) for x in [q]
    )


def test_height_monotone_under_short_diagonal():
    from pentalab.pentagram_maps import apply, short_diagonal

    p = random_twisted(2, 11, seed=52)
    spec = short_diagonal(2)
    h = [polygon_height(p)]
    for _ in range(3):
        p = apply(spec, p)
        h.append(polygon_height(p))
    assert h[0] < h[1] < h[2] < h[3]


def test_corrugated_strip_rank3_quadruples():
    d = 3
    w = random_corrugated_strip(d, 0, 12, seed=53)
    s = w.strip
    for k in range(s.lo + 1, s.hi - d):
        quad = [
            s.vertex(k - 1).coords,
            s.vertex(k).coords,
            s.vertex(k + d - 1).coords,
            s.vertex(k + d).coords,
        ]
        assert rank_of(quad) == 3
    assert is_corrugated(s)


def test_corrugation_witness_coefficients():
    d = 3
    w = random_corrugated_strip(d, 0, 12, seed=54)
    s = w.strip
    for i, (a, b, c) in enumerate(w.coeffs):
        k = s.lo + 1 + i
        lhs = s.vertex(k + d).coords
        combo = tuple(
            a * x + b * y + c * z
            for x, y, z in zip(
                s.vertex(k - 1).coords, s.vertex(k).coords, s.vertex(k + d - 1).coords
            )
        )
        assert ProjPoint(combo).coords == lhs


def test_generic_strip_not_corrugated():
    s = random_strip(3, 0, 12, seed=55)
    assert not is_corrugated(s)


def test_random_corrugated_polygon_valid():
    p = random_corrugated_polygon(3, 11, seed=56)
    assert p.n == 11 and p.d == 3
    d = p.d
    for k in range(p.n):
        quad = [
            vertex(p, k - 1).coords,
            vertex(p, k).coords,
            vertex(p, k + d - 1).coords,
            vertex(p, k + d).coords,
        ]
        assert rank_of(quad) == 3


def test_fresh_height_not_astronomical():
    for seed in (1, 2, 3):
        h = polygon_height(random_twisted(2, 11, seed=seed))
        assert h < mpz(10) ** 40
