import random

import pytest
from gmpy2 import mpq

from pentalab.exact_linalg import det
from pentalab.projective import (
    DegenerateFrame,
    DegenerateMeet,
    DegenerateSpan,
    Hyperplane,
    ProjMap,
    ProjPoint,
    apply_map,
    compose,
    frame_transform,
    in_general_position,
    inverse_map,
    meet_hyperplanes,
    meet_spans,
    pairing,
    span_hyperplane,
)


def pt(*coords):
    return ProjPoint(tuple(coords))


def rand_point(rng, d, lo=1, hi=10):
    return pt(*(rng.randint(lo, hi) for _ in range(d + 1)))


def rand_map(rng, d):
    while True:
        rows = tuple(
            tuple(rng.randint(-5, 5) for _ in range(d + 1)) for _ in range(d + 1)
        )
        try:
            return ProjMap(rows)
        except ValueError:
            continue


def test_span_line_z0():
    h = span_hyperplane([pt(1, 0, 0), pt(0, 1, 0)])
    assert h.coeffs == (0, 0, 1)


def test_span_coordinate_hyperplane():
    h = span_hyperplane([pt(1, 0, 0, 0), pt(0, 1, 0, 0), pt(0, 0, 1, 0)])
    assert h.coeffs == (0, 0, 0, 1)


def test_span_degenerate():
    with pytest.raises(DegenerateSpan):
        span_hyperplane([pt(1, 0, 0), pt(2, 0, 0)])


def test_span_incidence_property():
    rng = random.Random(21)
    for _ in range(100):
        d = rng.choice((2, 3))
        pts = [rand_point(rng, d) for _ in range(d)]
        try:
            h = span_hyperplane(pts)
        except DegenerateSpan:
            continue
        for p in pts:
            assert pairing(p, h) == 0


def test_meet_lines():
    p = meet_hyperplanes([Hyperplane((1, 0, 0)), Hyperplane((0, 1, 0))])
    assert p.coords == (0, 0, 1)


def test_meet_planes():
    p = meet_hyperplanes(
        [Hyperplane((1, 0, 0, 0)), Hyperplane((0, 1, 0, 0)), Hyperplane((0, 0, 1, 0))]
    )
    assert p.coords == (0, 0, 0, 1)


def test_meet_degenerate():
    with pytest.raises(DegenerateMeet):
        meet_hyperplanes([Hyperplane((1, 0, 0)), Hyperplane((2, 0, 0))])


def test_meet_incidence_property():
    rng = random.Random(22)
    for _ in range(100):
        d = rng.choice((2, 3))
        hyps = []
        while len(hyps) < d:
            pts = [rand_point(rng, d) for _ in range(d)]
            try:
                hyps.append(span_hyperplane(pts))
            except DegenerateSpan:
                continue
        try:
            x = meet_hyperplanes(hyps)
        except DegenerateMeet:
            continue
        for h in hyps:
            assert pairing(x, h) == 0


def test_meet_spans_shared_point():
    a = [pt(1, 0, 0, 0), pt(0, 1, 0, 0)]
    b = [pt(0, 0, 1, 0), pt(0, 0, 0, 1), pt(1, 1, 0, 0)]
    assert meet_spans(a, b).coords == (1, 1, 0, 0)


def test_meet_spans_hand_oracle():
    a = [pt(1, 0, 0), pt(0, 1, 0)]
    b = [pt(0, 0, 1), pt(1, 1, 1)]
    assert meet_spans(a, b).coords == (1, 1, 0)


def test_meet_spans_skew_lines():
    rng = random.Random(23)
    hits = 0
    for _ in range(50):
        a = [rand_point(rng, 3, 1, 30) for _ in range(2)]
        b = [rand_point(rng, 3, 1, 30) for _ in range(2)]
        try:
            meet_spans(a, b)
            hits += 1
        except DegenerateMeet:
            pass
    # generic lines in 3-space are skew
    assert hits == 0


def test_meet_spans_membership():
    rng = random.Random(24)
    done = 0
    while done < 50:
        d = 3
        a = [rand_point(rng, d) for _ in range(2)]
        b = [rand_point(rng, d) for _ in range(3)]
        try:
            x = meet_spans(a, b)
        except (DegenerateMeet, DegenerateSpan):
            continue
        # membership in span(b): the 4x4 determinant with x appended vanishes
        rows_b = [p.coords for p in b] + [x.coords]
        assert det(rows_b) == 0
        # membership in span(a): rank of the 3x4 stays 2
        rows_a = [list(a[0].coords), list(a[1].coords), list(x.coords)]
        for drop in range(4):
            sub = [[row[j] for j in range(4) if j != drop] for row in rows_a]
            assert det(sub) == 0
        done += 1


def test_frame_identity():
    g = frame_transform([pt(1, 0, 0), pt(0, 1, 0), pt(0, 0, 1), pt(1, 1, 1)])
    assert g.rows == ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def test_frame_example():
    g = frame_transform([pt(1, 0, 0), pt(0, 1, 0), pt(0, 0, 1), pt(1, 2, 3)])
    # diag(1, 1/2, 1/3) in canonical integers
    assert g.rows == ((6, 0, 0), (0, 3, 0), (0, 0, 2))


def test_frame_degenerate():
    with pytest.raises(DegenerateFrame):
        frame_transform([pt(1, 0, 0), pt(0, 1, 0), pt(1, 1, 0), pt(1, 1, 1)])


def test_frame_reproduces_standard_frame():
    rng = random.Random(25)
    done = 0
    while done < 40:
        d = rng.choice((2, 3))
        pts = [rand_point(rng, d) for _ in range(d + 2)]
        try:
            g = frame_transform(pts)
        except DegenerateFrame:
            continue
        for i in range(d + 1):
            want = tuple(1 if j == i else 0 for j in range(d + 1))
            assert apply_map(g, pts[i]).coords == want
        assert apply_map(g, pts[d + 1]).coords == (1,) * (d + 1)
        done += 1


def test_apply_map_examples():
    ident = ProjMap(((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert apply_map(ident, pt(4, 5, 6)).coords == (4, 5, 6)
    g = ProjMap(((2, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert apply_map(g, pt(1, 1, 1)).coords == (2, 1, 1)


def test_apply_map_preserves_incidence():
    rng = random.Random(26)
    done = 0
    while done < 60:
        d = rng.choice((2, 3))
        g = rand_map(rng, d)
        pts = [rand_point(rng, d) for _ in range(d)]
        try:
            h = span_hyperplane(pts)
        except DegenerateSpan:
            continue
        q = rand_point(rng, d)
        on = pairing(q, h) == 0
        on_img = pairing(apply_map(g, q), apply_map(g, h)) == 0
        assert on == on_img
        # the transported hyperplane contains all transported spanning points
        for p in pts:
            assert pairing(apply_map(g, p), apply_map(g, h)) == 0
        done += 1


def test_inverse_and_compose():
    rng = random.Random(27)
    for _ in range(40):
        d = rng.choice((2, 3))
        g = rand_map(rng, d)
        gi = inverse_map(g)
        p = rand_point(rng, d)
        assert apply_map(gi, apply_map(g, p)) == p
        assert apply_map(compose(g, gi), p) == p


def test_general_position_examples():
    assert in_general_position([pt(1, 0, 0), pt(0, 1, 0), pt(0, 0, 1)])
    assert not in_general_position([pt(1, 0, 0), pt(0, 1, 0), pt(1, 1, 0)])


def test_general_position_random():
    rng = random.Random(28)
    good = 0
    for _ in range(200):
        pts = [rand_point(rng, 2) for _ in range(3)]
        if in_general_position(pts):
            good += 1
    assert good > 180


def test_projmap_rejects_singular():
    with pytest.raises(ValueError):
        ProjMap(((1, 1), (1, 1)))


def test_point_canonicalization():
    assert pt(2, 4, 6) == pt(1, 2, 3)
    assert pt(mpq(-1, 2), 1, 0) == pt(1, -2, 0)
