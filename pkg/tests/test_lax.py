from fractions import Fraction

import mpmath as mp
import pytest

from pentalab.exact_linalg import det_int
from pentalab.polygon import random_twisted, shift
from pentalab.pentagram_maps import Generalized, dented, short_diagonal
from pentalab.lax import (
    DEFAULT_LAMBDAS,
    GcdObstruction,
    SignObstruction,
    build_inner_matrix,
    conservation_check,
    monodromy_charpoly,
    unit_det_lift,
    variant_of,
)

# first seeds (scanning from 1) whose polygons admit a real unit-determinant
# lift and whose one-step images do too, per variant
SEED_2D = 1
SEED_3D = {"T_sh": 4, "T_1": 4, "T_2": 14}


def lifted_window_det(lift, j, ctx):
    cols = []
    n, d = lift.n, lift.d
    for t in range(d + 1):
        idx = j + t
        v = list(lift.vectors[idx % n])
        wraps = idx // n
        for _ in range(wraps):
            v = [
                sum(lift.monodromy[r][c] * v[c] for c in range(d + 1))
                for r in range(d + 1)
            ]
        cols.append(v)
    m = ctx.matrix(d + 1, d + 1)
    for r in range(d + 1):
        for c in range(d + 1):
            m[r, c] = cols[c][r]
    return ctx.det(m)


def test_gcd_obstruction():
    p = random_twisted(3, 12, seed=1)
    with pytest.raises(GcdObstruction):
        unit_det_lift(p)


def test_precision_floor():
    p = random_twisted(2, 11, seed=SEED_2D)
    with pytest.raises(ValueError):
        unit_det_lift(p, precision=64)


def test_negative_monodromy_determinant_obstructs():
    # d odd: a lift scales the monodromy by a real (d+1)-th root of a
    # negative determinant, which does not exist
    p = random_twisted(3, 11, seed=1)
    assert det_int(p.monodromy.rows) < 0
    with pytest.raises(SignObstruction):
        unit_det_lift(p)


def test_d2_lift_never_obstructs():
    for seed in range(1, 31):
        p = random_twisted(2, 11, seed=seed)
        lift = unit_det_lift(p)
        assert lift.monodromy_flipped is False


def test_lift_window_determinants_are_one():
    for d, seed in ((2, SEED_2D), (3, SEED_3D["T_sh"])):
        p = random_twisted(d, 11, seed=seed)
        lift = unit_det_lift(p)
        ctx = mp.mp.clone()
        ctx.prec = lift.precision
        for j in range(p.n):
            dj = lifted_window_det(lift, j, ctx)
            assert abs(dj - 1) < 1e-40


def test_lift_coefficients_recurrence():
    # V_{j+d+1} = sum_k a_{j,k} V_{j+k} + (-1)^d V_j on the lifted vectors
    d, seed = 2, SEED_2D
    p = random_twisted(d, 11, seed=seed)
    lift = unit_det_lift(p)
    ctx = mp.mp.clone()
    ctx.prec = lift.precision

    def vec(idx):
        v = list(lift.vectors[idx % lift.n])
        for _ in range(idx // lift.n):
            v = [
                sum(lift.monodromy[r][c] * v[c] for c in range(d + 1))
                for r in range(d + 1)
            ]
        return v

    for j in range(p.n):
        lhs = vec(j + d + 1)
        rhs = [(-1) ** d * x for x in vec(j)]
        for k in range(1, d + 1):
            vk = vec(j + k)
            rhs = [r + lift.a[j][k - 1] * x for r, x in zip(rhs, vk)]
        for u, v in zip(lhs, rhs):
            assert abs(u - v) < 1e-35 * max(1, abs(u))


def test_inner_matrix_patterns():
    a3 = (mp.mpf(5), mp.mpf(7), mp.mpf(11))
    lam = mp.mpf(2)
    m = build_inner_matrix(a3, lam, "sh", 3)
    assert m[0, 0] == 0 and m[0, 1] == 0 and m[0, 2] == 0
    assert m[0, 3] == -1  # (-1)^d, d = 3
    assert (m[1, 0], m[2, 1], m[3, 2]) == (lam, 1, lam)
    assert (m[1, 3], m[2, 3], m[3, 3]) == a3

    a2 = (mp.mpf(3), mp.mpf(4))
    m2 = build_inner_matrix(a2, lam, "sh", 2)
    assert m2[0, 2] == 1  # (-1)^d, d = 2
    assert (m2[1, 0], m2[2, 1]) == (1, lam)

    md = build_inner_matrix(a3, lam, ("dented", 1), 3)
    assert (md[1, 0], md[2, 1], md[3, 2]) == (1, lam, 1)


def test_variant_of():
    assert variant_of(short_diagonal(3)) == "sh"
    assert variant_of(dented(3, 2)) == ("dented", 2)
    with pytest.raises(ValueError):
        variant_of(Generalized(3, (2, 3), (1, 1)))


def test_spectral_sample_shape():
    p = random_twisted(2, 11, seed=SEED_2D)
    lift = unit_det_lift(p)
    sample = monodromy_charpoly(lift, Fraction(1, 2), "sh")
    assert len(sample.charpoly) == p.d + 2
    assert sample.charpoly[0] == 1
    assert sample.lam == Fraction(1, 2)


def test_charpoly_determinant_consistency():
    # constant coefficient of det(xI - Q^{-1}) is (-1)^{d+1} det(Q^{-1})
    p = random_twisted(2, 11, seed=SEED_2D)
    lift = unit_det_lift(p)
    lam = Fraction(2)
    sample = monodromy_charpoly(lift, lam, "sh")
    ctx = mp.mp.clone()
    ctx.prec = lift.precision
    lam_r = ctx.mpf(lam.numerator) / lam.denominator
    q = ctx.eye(p.d + 1)
    for j in range(p.n):
        q = q * build_inner_matrix(lift.a[j], lam_r, "sh", p.d, ctx)
    det_qinv = 1 / ctx.det(q)
    want = (-1) ** (p.d + 1) * det_qinv
    got = sample.charpoly[-1]
    assert abs(got - want) < 1e-80 * max(1, abs(want))


def test_shift_invariance_of_spectra():
    p = random_twisted(2, 11, seed=SEED_2D)
    before = monodromy_charpoly(unit_det_lift(p), Fraction(1), "sh")
    for s in (1, 3):
        q = shift(p, s)
        after = monodromy_charpoly(unit_det_lift(q), Fraction(1), "sh")
        for x, y in zip(before.charpoly, after.charpoly):
            assert abs(x - y) <= 1e-100 * max(1, abs(x))


def test_conservation_2d():
    p = random_twisted(2, 11, seed=SEED_2D)
    rep = conservation_check(p, short_diagonal(2))
    assert rep["pass"] is True
    assert rep["max_rel_dev"] <= 1e-20
    assert rep["variant"] == "sh"
    assert rep["lambda"] == ["1/2", "1", "2"]
    assert rep["precision_bits"] == 512


def test_conservation_3d_all_variants():
    cases = [
        (short_diagonal(3), SEED_3D["T_sh"]),
        (dented(3, 1), SEED_3D["T_1"]),
        (dented(3, 2), SEED_3D["T_2"]),
    ]
    for spec, seed in cases:
        p = random_twisted(3, 11, seed=seed)
        rep = conservation_check(p, spec)
        assert rep["pass"] is True, (spec, rep)
        assert rep["max_rel_dev"] <= 1e-20


def test_precision_scaling():
    p = random_twisted(2, 11, seed=SEED_2D)
    spec = short_diagonal(2)
    dev512 = conservation_check(p, spec, precision=512)["max_rel_dev"]
    dev1024 = conservation_check(p, spec, precision=1024)["max_rel_dev"]
    assert dev1024 < dev512 * 1e-10


def test_negative_control():
    # spectra of two unrelated polygons disagree wildly
    a = random_twisted(2, 11, seed=SEED_2D)
    b = random_twisted(2, 11, seed=SEED_2D + 1)
    la, lb = unit_det_lift(a), unit_det_lift(b)
    worst = 0.0
    for lam in DEFAULT_LAMBDAS:
        sa = monodromy_charpoly(la, lam, "sh")
        sb = monodromy_charpoly(lb, lam, "sh")
        for x, y in zip(sa.charpoly, sb.charpoly):
            denom = max(abs(x), abs(y), 1)
            worst = max(worst, float(abs(x - y) / denom))
    assert worst > 1e-3
