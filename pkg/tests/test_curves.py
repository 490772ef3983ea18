import random
from fractions import Fraction
from itertools import combinations

import pytest

from twoselmer import modpoly
from twoselmer.curves import (
    CurveError,
    CurveQ,
    bad_primes,
    classify_two_torsion_field,
    discriminant,
    format_curve_line,
    has_good_reduction,
    integral_short_model,
    is_four_torsion_local,
    minimal_scaled_model,
    parse_curve_file,
    quadratic_twist,
    same_two_torsion_field,
    two_division_cubic,
    two_torsion_dim_mod_p,
)

E_MX = CurveQ.short(-1, 0, "mx")        # y^2 = x^3 - x, full rational 2-torsion
E_PX = CurveQ.short(1, 0, "px")         # y^2 = x^3 + x, one rational 2-torsion point
E_331 = CurveQ.short(-3, -1, "c331")    # y^2 = x^3 - 3x - 1, cyclic cubic
E_M2 = CurveQ.short(0, -2, "m2")        # y^2 = x^3 - 2, S3 sextic

POOL = [
    E_MX,
    CurveQ.short(-4, 0, "mx4"),
    E_PX,
    CurveQ.short(4, 0, "px4"),
    E_M2,
    E_331,
    CurveQ.short(0, 2, "p2"),
    CurveQ.from_coeffs(0, -1, 1, 0, 0, "t11"),   # y^2 + y = x^3 - x^2
    CurveQ.from_coeffs(0, 1, 0, -1, 0, "deg2a"),  # y^2 = x(x^2 + x - 1), D = 5
    CurveQ.short(-2, 0, "deg2b"),                 # y^2 = x(x^2 - 2), D = 2
    CurveQ.from_coeffs(0, 0, 1, -1, 0, "t37"),    # y^2 + y = x^3 - x
    CurveQ.short(5, 0, "deg2c"),                  # y^2 = x(x^2 + 5), D = -5
]


def test_discriminant_examples():
    assert discriminant(E_MX) == 64
    assert discriminant(E_PX) == -64
    assert discriminant(E_331) == 1296
    for E in POOL:
        assert E.c4**3 - E.c6**2 == 1728 * discriminant(E)


def test_singular_model_rejected():
    with pytest.raises(CurveError):
        CurveQ.short(0, 0)
    with pytest.raises(CurveError):
        CurveQ.short(-3, 2)  # (x-1)^2 (x+2)


def test_two_division_cubic():
    assert two_division_cubic(E_MX) == (0, -1, 0)
    assert two_division_cubic(E_331) == (0, -3, -1)
    # y^2 + y = x^3 - x^2 completes the square to x^3 - x^2 + 1/4,
    # the same roots as 4x^3 - 4x^2 + 1
    t11 = CurveQ.from_coeffs(0, -1, 1, 0, 0)
    assert two_division_cubic(t11) == (-1, 0, Fraction(1, 4))


def test_integral_short_model_roots():
    A, B, C = minimal_scaled_model(E_MX)
    assert (A, B, C) == (0, -1, 0)
    A, B, C = minimal_scaled_model(CurveQ.short(Fraction(-1, 4), 0))
    # clearing denominators must keep the cubic monic integral
    assert all(isinstance(t, int) for t in (A, B, C))


def test_quadratic_twist_examples():
    assert quadratic_twist(E_MX, 1) is E_MX
    tw = quadratic_twist(E_MX, -1)
    assert minimal_scaled_model(tw) == (0, -1, 0)  # same model: d=-1 fixes x^3 - x
    tw2 = quadratic_twist(E_PX, 2)
    assert minimal_scaled_model(tw2) == (0, 4, 0)  # y^2 = x^3 + 4x
    with pytest.raises(CurveError):
        quadratic_twist(E_MX, 12)
    with pytest.raises(CurveError):
        quadratic_twist(E_MX, 0)


def test_twist_twice_is_original():
    for E in (E_MX, E_PX, E_331):
        for d in (-1, 5, -6, 17):
            assert minimal_scaled_model(quadratic_twist(quadratic_twist(E, d), d)) == \
                minimal_scaled_model(E)


def test_classification_examples():
    assert classify_two_torsion_field(E_MX).degree == 1
    info_px = classify_two_torsion_field(E_PX)
    assert info_px.degree == 2 and info_px.quadratic_disc == -1
    info331 = classify_two_torsion_field(E_331)
    assert info331.degree == 3 and info331.disc_square_class == 1
    assert classify_two_torsion_field(E_M2).degree == 6
    assert classify_two_torsion_field(CurveQ.from_coeffs(0, -1, 1, 0, 0)).degree == 6


def test_same_two_torsion_field_examples():
    assert same_two_torsion_field(E_MX, CurveQ.short(-4, 0)) is True
    assert same_two_torsion_field(E_MX, E_PX) is False
    assert same_two_torsion_field(E_331, E_M2) is False
    # x^3 + 2 and x^3 - 2 generate the same splitting field (roots negate)
    assert same_two_torsion_field(E_M2, CurveQ.short(0, 2)) is True
    # two deg-2 curves with different quadratic fields
    assert same_two_torsion_field(E_PX, CurveQ.short(-2, 0)) is False
    assert same_two_torsion_field(E_PX, CurveQ.short(4, 0)) is True


def test_same_two_torsion_equivalence_relation():
    for E in POOL:
        assert same_two_torsion_field(E, E)
    for E, A in combinations(POOL, 2):
        assert same_two_torsion_field(E, A) == same_two_torsion_field(A, E)
    for E, A, B in combinations(POOL, 3):
        if same_two_torsion_field(E, A) and same_two_torsion_field(A, B):
            assert same_two_torsion_field(E, B)


def test_twist_invariance_of_classification():
    rng = random.Random(17)
    squarefree = [d for d in range(-30, 31) if d and d not in (0,)]
    from twoselmer.arith import is_squarefree

    squarefree = [d for d in squarefree if is_squarefree(d)]
    count = 0
    for E in POOL:
        deg = classify_two_torsion_field(E).degree
        for _ in range(9):
            d = rng.choice(squarefree)
            assert classify_two_torsion_field(quadratic_twist(E, d)).degree == deg
            count += 1
    assert count >= 100

    # twist invariance of field equality itself
    for E, A in [(E_MX, E_PX), (E_331, E_M2), (E_MX, CurveQ.short(-4, 0))]:
        base = same_two_torsion_field(E, A)
        for d in (5, -7, 13):
            assert same_two_torsion_field(quadratic_twist(E, d), quadratic_twist(A, d)) == base


def test_good_reduction():
    assert has_good_reduction(E_MX, 5) is True
    assert has_good_reduction(E_MX, 2) is False
    assert bad_primes(E_MX) == (2,)
    # disc 1296 = 2^4 3^4: v_3 = 4 is not removable (disc scales by u^12 and is
    # translation invariant) and the cubic is (x-1)^3 mod 3, so 3 is genuinely bad
    assert has_good_reduction(E_331, 3) is False
    assert bad_primes(E_331) == (2, 3)


def test_two_torsion_dim_mod_p():
    assert two_torsion_dim_mod_p(E_MX, 5) == 2       # x^3 - x splits everywhere
    assert two_torsion_dim_mod_p(E_331, 5) == 0      # irreducible mod 5
    assert two_torsion_dim_mod_p(E_PX, 5) == 2       # x^2 + 1 = (x-2)(x+2) mod 5
    assert two_torsion_dim_mod_p(E_PX, 7) == 1


def _point_count_oracle(A, B, C, q):
    # number of points on Y^2 = X^3 + A X^2 + B X + C over F_q, and the group's
    # 4-torsion structure via exhaustive enumeration
    pts = [(None, None)]  # point at infinity
    for x in range(q):
        rhs = (x**3 + A * x * x + B * x + C) % q
        for y in range(q):
            if (y * y - rhs) % q == 0:
                pts.append((x, y))
    return pts


def _f4_structure_oracle(E, q):
    # (Z/4)^2 <= E(F_q) iff #E[4](F_q) = 16, via exhaustive doubling
    A, B, C = minimal_scaled_model(E)
    pts = _point_count_oracle(A, B, C, q)

    def dbl(P):
        if P == (None, None):
            return P
        x, y = P
        if y == 0:
            return (None, None)
        lam = (3 * x * x + 2 * A * x + B) * pow(2 * y, -1, q) % q
        x3 = (lam * lam - A - 2 * x) % q
        y3 = (lam * (x - x3) - y) % q
        return (x3, y3)

    four_tors = [P for P in pts if dbl(dbl(P)) == (None, None)]
    return len(four_tors) == 16


@pytest.mark.parametrize("q", [5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41])
def test_is_four_torsion_local_against_enumeration(q):
    for E in (E_MX, E_PX, E_331):
        if not has_good_reduction(E, q):
            continue
        assert is_four_torsion_local(E, q) == _f4_structure_oracle(E, q)


def test_four_torsion_needs_full_two_torsion():
    # Frobenius of order 3 on M excludes E[4]
    assert is_four_torsion_local(E_331, 5) is False


def test_factorization_matches_point_counts():
    # the F_q-rational 2-torsion count matches the cubic's factorization type
    for E in (E_MX, E_PX, E_331, E_M2):
        for q in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
            if not has_good_reduction(E, q):
                continue
            A, B, C = minimal_scaled_model(E)
            pts = _point_count_oracle(A, B, C, q)
            two_tors = [P for P in pts if P == (None, None) or P[1] == 0]
            assert len(two_tors) == 2 ** two_torsion_dim_mod_p(E, q)


def test_curve_file_roundtrip():
    text = """# sample curves
    mx : 0 0 0 -1 0
    half : 0 0 0 -1/4 1/8
    """
    curves = parse_curve_file(text)
    assert [E.label for E in curves] == ["mx", "half"]
    assert curves[1].a4 == Fraction(-1, 4)
    again = parse_curve_file("\n".join(format_curve_line(E) for E in curves))
    assert [E.ainvs() for E in again] == [E.ainvs() for E in curves]


def test_curve_file_errors():
    with pytest.raises(CurveError) as err:
        parse_curve_file("bad line without colon")
    assert "line 1" in str(err.value)
    with pytest.raises(CurveError) as err:
        parse_curve_file("\nx : 1 2 3\n")
    assert "line 2" in str(err.value)
    assert parse_curve_file("") == []
