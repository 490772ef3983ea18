"""Quadratic characters of Q as squarefree integers, their local components,
prime searches with splitting conditions, and the global constructor realizing
prescribed local behavior (trivial on a finite place set S, ramified at a
chosen prime, unramified elsewhere up to auxiliary primes from a relax set).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from sympy import primerange

from .arith import (
    ArithmeticError_,
    Place,
    crt_consistent,
    hilbert_symbol,
    is_square_in_Qv,
    is_squarefree,
    legendre,
    place,
    square_class,
    sqrt_mod_prime_power,
)
from .curves import CurveQ, bad_primes, reduced_cubic_mod_p
from .local import LocalCharacter, character_kind_at
from . import modpoly
from .quadfield import QuadElem, splitting_type


class SearchError(RuntimeError):
    pass


class NotFound(SearchError):
    def __init__(self, message, bound):
        super().__init__(f"{message} (searched up to {bound})")
        self.bound = bound


class NotRepresentable(SearchError):
    pass


@dataclass(frozen=True)
class QuadChar:
    """The quadratic character of Q attached to the squarefree integer d
    (d = 1 is trivial; the kernel field is Q(sqrt(d)))."""

    d: int

    def __post_init__(self):
        if self.d == 0 or not is_squarefree(self.d):
            raise ArithmeticError_(f"character parameter must be squarefree nonzero: {self.d}")

    @property
    def is_trivial(self) -> bool:
        return self.d == 1

    def local_value(self, v, r) -> int:
        """Value of the local component at v on r: the Hilbert symbol (d, r)_v."""
        return hilbert_symbol(self.d, r, v)

    def local_component(self, q: int) -> LocalCharacter:
        return LocalCharacter(q, square_class(self.d, q).rep)

    def kind_at(self, v) -> str:
        return character_kind_at(self.d, v)

    def __mul__(self, other: "QuadChar") -> "QuadChar":
        from .arith import squarefree_part

        return QuadChar(squarefree_part(self.d * other.d))


def chi_local_value(chi: QuadChar, v, r) -> int:
    return chi.local_value(v, r)


def is_ramified_at(chi: QuadChar, v) -> bool:
    """Whether the local component at a finite place is nontrivial on units."""
    v = place(v)
    if v.is_infinite:
        raise ArithmeticError_("ramification is a finite-place notion")
    return chi.kind_at(v) == "ramified"


def is_trivial_at(chi: QuadChar, v) -> bool:
    """Whether the full local component at v is trivial (on all of Q_v^x)."""
    return is_square_in_Qv(chi.d, v)


# --- prime searches -------------------------------------------------------------

@dataclass(frozen=True)
class Predicate:
    """One Frobenius-style condition on a candidate prime q."""

    kind: str
    payload: tuple
    describe: str

    def test(self, q: int) -> bool:
        k = self.kind
        if k == "congruence":
            r, m = self.payload
            return q % m == r % m
        if k == "legendre":
            a, eps = self.payload
            if a % q == 0:
                return False
            return legendre(a % q, q) == eps
        if k == "cubic_type":
            E, typ = self.payload
            if q in bad_primes(E):
                return False
            return modpoly.cubic_factorization_type(reduced_cubic_mod_p(E, q), q) == typ
        if k == "four_torsion":
            (E,) = self.payload
            from .curves import is_four_torsion_local

            if q in bad_primes(E):
                return False
            return is_four_torsion_local(E, q)
        if k == "quad_square":
            alpha, eps = self.payload
            if eps == 1:
                return _quad_elem_square_at(alpha, q)
            return _quad_elem_nontrivial_at(alpha, q)
        if k == "custom":
            (fn,) = self.payload
            return fn(q)
        raise ArithmeticError_(f"unknown predicate kind {k}")


def congruence(r: int, m: int, note: str = "") -> Predicate:
    return Predicate("congruence", (r, m), note or f"q = {r} mod {m}")

def square_mod_q(a: int, note: str = "") -> Predicate:
    return Predicate("legendre", (a, 1), note or f"({a}|q) = 1")

def nonsquare_mod_q(a: int, note: str = "") -> Predicate:
    return Predicate("legendre", (a, -1), note or f"({a}|q) = -1")

def cubic_split(E: CurveQ, note: str = "") -> Predicate:
    return Predicate("cubic_type", (E, "split"), note or f"2-division cubic of {E.label} splits mod q")

def cubic_irreducible(E: CurveQ, note: str = "") -> Predicate:
    return Predicate("cubic_type", (E, "irreducible"),
                     note or f"2-division cubic of {E.label} irreducible mod q")

def four_torsion_split(E: CurveQ, note: str = "") -> Predicate:
    return Predicate("four_torsion", (E,), note or f"E[4] of {E.label} rational at q")

def quad_element_square(alpha: QuadElem, note: str = "") -> Predicate:
    return Predicate("quad_square", (alpha, 1), note or f"{alpha} square at both places over q")

def quad_element_nonsquare(alpha: QuadElem, note: str = "") -> Predicate:
    return Predicate("quad_square", (alpha, -1), note or f"{alpha} nontrivial at q")

def custom_predicate(fn: Callable[[int], bool], note: str) -> Predicate:
    return Predicate("custom", (fn,), note)


def _quad_elem_square_at(alpha: QuadElem, q: int) -> bool:
    """Whether a field element restricts trivially at an odd prime q split in
    its field: a square in both completions over q.  False when q is inert,
    ramified, or meets the element's support."""
    n = alpha.norm()
    if n == 0:
        raise ArithmeticError_("zero element")
    if splitting_type(alpha.D, q) != "split":
        return False
    if abs(n.numerator) % q == 0 or n.denominator % q == 0:
        return False
    if alpha.x.denominator % q == 0 or alpha.y.denominator % q == 0:
        return False
    s = sqrt_mod_prime_power(alpha.D % q, q, 1)
    xr = alpha.x.numerator * pow(alpha.x.denominator, -1, q) % q
    yr = alpha.y.numerator * pow(alpha.y.denominator, -1, q) % q
    for sg in (s, (q - s) % q):
        t = (xr + yr * sg) % q
        if t == 0 or legendre(t, q) != 1:
            return False
    return True


def _quad_elem_nontrivial_at(alpha: QuadElem, q: int) -> bool:
    """Whether the element restricts NONtrivially at q in the unramified sense:
    q split in the field, prime to the element's support, and some embedding
    class a non-square.  (The Frobenius conditions of the searches need an
    unramified nontrivial restriction, not merely 'not a square'.)"""
    n = alpha.norm()
    if n == 0:
        raise ArithmeticError_("zero element")
    if splitting_type(alpha.D, q) != "split":
        return False
    if abs(n.numerator) % q == 0 or n.denominator % q == 0:
        return False
    if alpha.x.denominator % q == 0 or alpha.y.denominator % q == 0:
        return False
    return not _quad_elem_square_at(alpha, q)


def find_prime(predicates: Sequence[Predicate], bound: int,
               exclude: Iterable[int] = (), start: int = 3) -> int:
    """The least prime q <= bound outside the excluded set satisfying all
    predicates; congruence inconsistency is reported instead of looping."""
    congruences = [p.payload for p in predicates if p.kind == "congruence"]
    if congruences and not crt_consistent([(r, m) for r, m in congruences]):
        raise SearchError(
            "inconsistent congruence predicates: " +
            "; ".join(p.describe for p in predicates if p.kind == "congruence"))
    excluded = set(exclude)
    for q in primerange(start, bound + 1):
        if q in excluded or q == 2:
            continue
        if all(p.test(q) for p in predicates):
            return q
    desc = "; ".join(p.describe for p in predicates) or "(no predicates)"
    raise NotFound(f"no prime satisfies {desc}", bound)


# --- the global constructor ------------------------------------------------------

@dataclass(frozen=True)
class LocalPrescription:
    place: Place
    requirement: str  # 'trivial' | 'unramified' | 'ramified' | 'ramified-class'
    target_class: Optional[int] = None  # unit square-class at the place, for 'ramified-class'


def trivial_at(v) -> LocalPrescription:
    return LocalPrescription(place(v), "trivial")


def ramified_at(q: int, target_class: Optional[int] = None) -> LocalPrescription:
    if target_class is None:
        return LocalPrescription(place(q), "ramified")
    return LocalPrescription(place(q), "ramified-class", target_class)


def unramified_nontrivial_at(q: int) -> LocalPrescription:
    return LocalPrescription(place(q), "unramified")


@dataclass(frozen=True)
class ConstructedCharacter:
    chi: QuadChar
    ell: int
    auxiliary: tuple[int, ...]
    requirement: str


def _matches_ramified_class(d: int, ell: int, target_class: Optional[int]) -> bool:
    cls = square_class(d, ell)
    if cls.rep % ell != 0:
        return False
    if target_class is None:
        return True
    unit = cls.rep // ell
    return unit == target_class


def construct_global_character(S: Sequence, prescriptions: Sequence[LocalPrescription],
                               relax_set: Optional[Callable[[int], bool]] = None,
                               bound: int = 10**5) -> ConstructedCharacter:
    """Build a squarefree d with chi_d trivial at every place of S, the
    prescribed behavior at the one designated prime ell, and unramified
    elsewhere except possibly one auxiliary prime drawn from the relax set.

    Minimal |d| wins; ties prefer positive d."""
    S_places = [place(v) for v in S]
    ells = [p for p in prescriptions if p.requirement in ("ramified", "ramified-class", "unramified")]
    if len(ells) != 1:
        raise NotRepresentable("need exactly one designated non-trivial place")
    presc = ells[0]
    ell = presc.place.prime
    if any((not v.is_infinite) and v.prime == ell for v in S_places):
        raise NotRepresentable(f"designated prime {ell} lies in S")
    for p in prescriptions:
        if p.requirement == "trivial" and p.place not in S_places:
            S_places.append(p.place)

    def trivial_on_S(d: int) -> bool:
        return all(is_square_in_Qv(d, v) for v in S_places)

    if presc.requirement in ("ramified", "ramified-class"):
        # first try d = +-ell directly
        candidates = sorted([ell, -ell], key=lambda d: (abs(d), -d))
        for d in candidates:
            if trivial_on_S(d) and _matches_ramified_class(d, ell, presc.target_class):
                return ConstructedCharacter(QuadChar(d), ell, (), presc.requirement)
        if relax_set is None:
            raise NotRepresentable(
                f"no admissible d in {{+-{ell}}} and no relax set to draw from")
        # auxiliary prime r: d = ell * r (sign chosen positive for oo-triviality)
        preds = [custom_predicate(relax_set, "r in the relax set")]
        r = _search_auxiliary(ell, S_places, presc, preds, bound, ramified_mode=True)
        d = ell * r
        return ConstructedCharacter(QuadChar(d), ell, (r,), presc.requirement)

    # unramified-nontrivial at ell: d = r with (r|ell) = -1, r from the relax set
    if relax_set is None:
        raise NotRepresentable("unramified-nontrivial prescription needs a relax set")
    preds = [custom_predicate(relax_set, "r in the relax set")]
    r = _search_auxiliary(ell, S_places, presc, preds, bound, ramified_mode=False)
    return ConstructedCharacter(QuadChar(r), ell, (r,), "unramified")


def _search_auxiliary(ell: int, S_places, presc, extra_preds, bound, ramified_mode):
    target_sign = 1  # d > 0 keeps the component at oo trivial
    for q in primerange(3, bound + 1):
        if q == ell or any((not v.is_infinite) and v.prime == q for v in S_places):
            continue
        if not extra_preds[0].test(q):
            continue
        d = ell * q if ramified_mode else q
        if d * target_sign < 0:
            continue
        if not all(is_square_in_Qv(d, v) for v in S_places):
            continue
        if ramified_mode:
            if not _matches_ramified_class(d, ell, presc.target_class):
                continue
        else:
            if legendre(d % ell, ell) != -1:
                continue
        return q
    raise NotFound(f"no auxiliary prime for ell={ell}", bound)
