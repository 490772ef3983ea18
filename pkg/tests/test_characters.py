import pytest

from twoselmer.arith import INFINITY, hilbert_symbol
from twoselmer.characters import (
    ConstructedCharacter,
    NotFound,
    NotRepresentable,
    QuadChar,
    SearchError,
    chi_local_value,
    congruence,
    construct_global_character,
    cubic_irreducible,
    find_prime,
    is_ramified_at,
    is_trivial_at,
    quad_element_square,
    ramified_at,
    square_mod_q,
    trivial_at,
    unramified_nontrivial_at,
)
from twoselmer.curves import CurveQ
from twoselmer.quadfield import QuadElem

E_331 = CurveQ.short(-3, -1, "c331")


def test_quadchar_validation():
    with pytest.raises(Exception):
        QuadChar(12)
    with pytest.raises(Exception):
        QuadChar(0)
    assert QuadChar(1).is_trivial
    assert (QuadChar(6) * QuadChar(10)).d == 15


def test_chi_local_value_examples():
    for v in (INFINITY, 2, 3, 97):
        for r in (-7, 2, 5):
            assert chi_local_value(QuadChar(1), v, r) == 1
    # 73 = 1 mod 8: the component at 2 is trivial
    for r in (-1, 2, 3, 5, -10):
        assert chi_local_value(QuadChar(73), 2, r) == 1
    assert chi_local_value(QuadChar(-1), INFINITY, -1) == -1
    # and it is the Hilbert symbol by definition
    assert chi_local_value(QuadChar(-5), 5, 10) == hilbert_symbol(-5, 10, 5)


def test_is_ramified_at():
    assert is_ramified_at(QuadChar(73), 73) is True
    assert is_ramified_at(QuadChar(73), 5) is False
    assert is_ramified_at(QuadChar(-1), 2) is True
    assert is_ramified_at(QuadChar(5), 2) is False   # 5 = 1 mod 4
    assert is_ramified_at(QuadChar(3), 2) is True    # 3 = 3 mod 4
    with pytest.raises(Exception):
        is_ramified_at(QuadChar(3), INFINITY)


def test_find_prime_examples():
    assert find_prime([congruence(1, 8), square_mod_q(3)], 100) == 73
    assert find_prime([cubic_irreducible(E_331)], 10, exclude=(2, 3)) == 5
    with pytest.raises(SearchError):
        find_prime([congruence(1, 4), congruence(3, 4)], 100)
    with pytest.raises(NotFound):
        find_prime([congruence(1, 8), square_mod_q(3)], 50)


def test_find_prime_quad_predicates():
    # -i in Q(i) is trivial at q iff both lifts of -i are squares mod q
    alpha = QuadElem.of(0, -1, -1)
    q = find_prime([congruence(1, 8), quad_element_square(alpha)], 200)
    # oracle: i is a square in Q_q iff q = 1 mod 8
    assert q % 8 == 1


def test_construct_global_character_direct():
    # S = {oo, 2, 3}, ramified at 73: d = 73 works outright
    out = construct_global_character([INFINITY, 2, 3], [ramified_at(73)])
    assert out.chi.d == 73 and out.auxiliary == ()
    # the constructed character is trivial on all of S
    for v in (INFINITY, 2, 3):
        assert is_trivial_at(out.chi, v)
    assert is_ramified_at(out.chi, 73)


def test_construct_global_character_needs_aux():
    # ell = 7: 7 = 3 mod 4 fails at 2; -7 fails at oo; aux prime needed.
    # The constructor itself imposes the complementary congruences on r
    # (7r = 1 mod 8 and the QR conditions); the relax set only gates admission.
    with pytest.raises(NotRepresentable):
        construct_global_character([INFINITY, 2, 3], [ramified_at(7)])
    out = construct_global_character([INFINITY, 2, 3], [ramified_at(7)],
                                     relax_set=lambda r: True)
    d = out.chi.d
    assert d % 7 == 0 and d > 0
    (r,) = out.auxiliary
    assert d == 7 * r and (7 * r) % 8 == 1
    for v in (INFINITY, 2, 3):
        assert is_trivial_at(out.chi, v)
    assert is_ramified_at(out.chi, 7)


def test_construct_global_character_ramified_class():
    # prescribe the ramified class at ell exactly: unit part 1 vs nonresidue
    from twoselmer.arith import least_nonresidue, square_class

    ell = 73
    for target in (1, least_nonresidue(ell)):
        out = construct_global_character(
            [INFINITY, 2, 3], [ramified_at(ell, target)],
            relax_set=lambda r: True, bound=10**4)
        cls = square_class(out.chi.d, ell)
        assert cls.rep == ell * target or (target == 1 and cls.rep == ell)
        for v in (INFINITY, 2, 3):
            assert is_trivial_at(out.chi, v)


def test_construct_unramified_nontrivial():
    out = construct_global_character(
        [INFINITY, 2, 3], [unramified_nontrivial_at(7)],
        relax_set=lambda r: True, bound=10**4)
    d = out.chi.d
    assert d % 7 != 0
    from twoselmer.arith import legendre

    assert legendre(d % 7, 7) == -1  # nontrivial unramified component at 7
    for v in (INFINITY, 2, 3):
        assert is_trivial_at(out.chi, v)


def test_constructed_characters_unramified_elsewhere():
    out = construct_global_character([INFINITY, 2, 3], [ramified_at(7)],
                                     relax_set=lambda r: True)
    support = {7} | set(out.auxiliary)
    from sympy import factorint

    assert set(factorint(abs(out.chi.d))) == support
    # unramified at every other finite place: the support IS the ramified set
    for p in (5, 11, 13, 19):
        assert not is_ramified_at(out.chi, p)


def test_delta_kernel_sampling():
    """Classes outside <Delta_E, Delta_A> die at some P0 prime; the Deltas survive.

    E = c331 (disc 1296, square class 1), A = m2 (disc -1728 ~ -3):
    S-unit classes mod squares are generated by -1, 2, 3."""
    from twoselmer.arith import is_square_in_Qv, legendre
    from twoselmer.curves import discriminant
    from twoselmer.local import prime_class
    from twoselmer.curves import bad_primes

    A = CurveQ.short(0, -2, "m2")
    S_units = [-1, 2, 3, 6, -2, -3, -6]
    span = {1, -3}  # squarefree classes of disc(E) = 1296 and disc(A) = -1728
    killed = {}
    survivors_checked = 0
    q = 3
    from twoselmer.arith import is_prime

    p0_primes = []
    while q < 10**5 and (len(p0_primes) < 50 or
                         any(a not in killed for a in S_units if a not in span)):
        q += 2
        if not is_prime(q) or q in bad_primes(E_331) or q in bad_primes(A):
            continue
        if prime_class(E_331, q) != 0 or prime_class(A, q) != 0:
            continue
        p0_primes.append(q)
        for a in S_units:
            if a not in span and a not in killed and legendre(a % q, q) == -1:
                killed[a] = q
    assert all(a in killed for a in S_units if a not in span), killed
    # Delta classes are squares at 50 sampled P0 primes
    for q in p0_primes[:50]:
        assert is_square_in_Qv(discriminant(E_331), q)
        assert is_square_in_Qv(discriminant(A), q)
    assert len(p0_primes) >= 50
