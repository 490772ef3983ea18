"""Elliptic curve models over Q: invariants, twists, 2-division cubics, 2-torsion fields.

A curve is given by long Weierstrass coefficients a1..a6.  Descent-facing code
works with the integral quasi-short model Y^2 = X^3 + b2 X^2 + 8 b4 X + 16 b6
(X = 4x, Y = 4(2y + a1 x + a3)), whose 2-division cubic is monic and integral
and whose roots generate the same 2-torsion field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from sympy import Poly, Symbol, factor_list, factorint

from . import modpoly
from .arith import (
    is_prime,
    is_squarefree,
    legendre,
    prime_support,
    squarefree_part,
    valuation,
)

_X = Symbol("x")
_Y = Symbol("y")


class CurveError(ValueError):
    pass


@dataclass(frozen=True)
class CurveQ:
    """An elliptic curve over Q by long Weierstrass coefficients."""

    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction
    label: Optional[str] = None

    @staticmethod
    def from_coeffs(a1, a2, a3, a4, a6, label=None) -> "CurveQ":
        E = CurveQ(Fraction(a1), Fraction(a2), Fraction(a3), Fraction(a4), Fraction(a6), label)
        if E.discriminant == 0:
            raise CurveError(f"singular model (discriminant 0): {E.ainvs()}")
        return E

    @staticmethod
    def short(a, b, label=None) -> "CurveQ":
        """y^2 = x^3 + a x + b."""
        return CurveQ.from_coeffs(0, 0, 0, a, b, label)

    def ainvs(self) -> tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    # standard b/c invariants
    @property
    def b2(self) -> Fraction:
        return self.a1 * self.a1 + 4 * self.a2

    @property
    def b4(self) -> Fraction:
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self) -> Fraction:
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self) -> Fraction:
        return (self.a1 * self.a1 * self.a6 + 4 * self.a2 * self.a6
                - self.a1 * self.a3 * self.a4 + self.a2 * self.a3 * self.a3
                - self.a4 * self.a4)

    @property
    def c4(self) -> Fraction:
        return self.b2 * self.b2 - 24 * self.b4

    @property
    def c6(self) -> Fraction:
        return -self.b2 ** 3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def discriminant(self) -> Fraction:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def __repr__(self):
        lab = f"{self.label}: " if self.label else ""
        return f"CurveQ({lab}a={list(map(str, self.ainvs()))})"


def discriminant(E: CurveQ) -> Fraction:
    """Standard Weierstrass discriminant; c4^3 - c6^2 = 1728 disc."""
    d = E.discriminant
    if d == 0:
        raise CurveError("singular model")
    return d


def two_division_cubic(E: CurveQ) -> tuple[Fraction, Fraction, Fraction]:
    """Monic cubic (coeffs of x^2, x, 1) whose roots are the 2-torsion x-coordinates
    of the completed-square model y^2 = x^3 + (b2/4)x^2 + (b4/2)x + b6/4."""
    return (E.b2 / 4, E.b4 / 2, E.b6 / 4)


@lru_cache(maxsize=None)
def integral_short_model(E: CurveQ) -> tuple[int, int, int]:
    """Monic integral cubic (A, B, C) with Y^2 = X^3 + A X^2 + B X + C, X = 4x.

    Remaining denominators are cleared by a square-compatible scaling
    X -> u^2 X, which multiplies (A, B, C) by (u^2, u^4, u^6); the roots span
    the same 2-torsion field.
    """
    A, B, C = E.b2, 8 * E.b4, 16 * E.b6
    den_primes = set()
    for coeff in (A, B, C):
        den_primes |= set(factorint(Fraction(coeff).denominator))
    u = 1
    for p in sorted(den_primes):
        e = 0
        for coeff, w in ((A, 2), (B, 4), (C, 6)):
            if coeff != 0:
                v = valuation(coeff, p)
                if v < 0:
                    e = max(e, (-v + w - 1) // w)
        u *= p ** e
    A, B, C = A * u**2, B * u**4, C * u**6
    assert A.denominator == B.denominator == C.denominator == 1
    return int(A), int(B), int(C)


def quadratic_twist(E: CurveQ, d: int) -> CurveQ:
    """The quadratic twist E^d: roots of the 2-division cubic scale by d."""
    if d == 0 or not is_squarefree(d):
        raise CurveError(f"twist parameter must be a nonzero squarefree integer: {d}")
    if d == 1:
        return E
    A, B, C = minimal_scaled_model(E)
    lab = f"{E.label}^({d})" if E.label else None
    twisted = CurveQ.from_coeffs(0, A * d, 0, B * d * d, C * d**3, lab)
    Am, Bm, Cm = minimal_scaled_model(twisted)
    return CurveQ.from_coeffs(0, Am, 0, Bm, Cm, lab)


@lru_cache(maxsize=None)
def minimal_scaled_model(E: CurveQ) -> tuple[int, int, int]:
    """Integral short model (A, B, C) with u^12 | disc scalings removed (naive
    minimization; full Tate reduction is out of scope)."""
    A, B, C = integral_short_model(E)
    # a removable u divides gcd(A, B, C), zero coefficients imposing no bound
    content = math.gcd(math.gcd(A, B), C)
    for p in sorted(prime_support(content)) if content > 1 else []:
        while (A % p**2 == 0) and (B % p**4 == 0) and (C % p**6 == 0):
            A //= p**2
            B //= p**4
            C //= p**6
    return A, B, C


def _cubic_disc(A: int, B: int, C: int) -> int:
    # disc of x^3 + A x^2 + B x + C
    return (18 * A * B * C - 4 * A**3 * C + A * A * B * B - 4 * B**3 - 27 * C * C)


@lru_cache(maxsize=None)
def bad_primes(E: CurveQ) -> tuple[int, ...]:
    """Primes dividing the minimal discriminant of the naive minimal model."""
    A, B, C = minimal_scaled_model(E)
    disc = 16 * _cubic_disc(A, B, C)
    return tuple(sorted(prime_support(disc)))


def has_good_reduction(E: CurveQ, p: int) -> bool:
    if not is_prime(p):
        raise CurveError(f"not a prime: {p}")
    return p not in bad_primes(E)


@dataclass(frozen=True)
class TwoTorsionFieldInfo:
    """Classification of M = Q(E[2]) by the 2-division cubic."""

    degree: int  # [M:Q] in {1, 2, 3, 6}
    cubic: tuple[Fraction, Fraction, Fraction]  # monic: x^3 + c2 x^2 + c1 x + c0
    factorization: str  # 'three_linear' | 'linear_quadratic' | 'irreducible'
    disc_square_class: int
    rational_roots: tuple[Fraction, ...]
    quadratic_disc: Optional[int] = None  # squarefree disc class of the quadratic factor


def _monic_cubic_disc(c2: Fraction, c1: Fraction, c0: Fraction) -> Fraction:
    return (18 * c2 * c1 * c0 - 4 * c2**3 * c0 + c2 * c2 * c1 * c1
            - 4 * c1**3 - 27 * c0 * c0)


@lru_cache(maxsize=None)
def classify_two_torsion_field(E: CurveQ) -> TwoTorsionFieldInfo:
    c2, c1, c0 = two_division_cubic(E)
    expr = _X**3 + c2 * _X**2 + c1 * _X + c0
    _, factors = factor_list(expr, _X)
    lin_roots = []
    quad = None
    irred_cubic = False
    for f, mult in factors:
        pf = Poly(f, _X)
        if pf.degree() == 1:
            a, b = pf.all_coeffs()
            lin_roots += [Fraction(-Fraction(str(b)), Fraction(str(a)))] * mult
        elif pf.degree() == 2:
            quad = pf
        elif pf.degree() == 3:
            irred_cubic = True
    disc = _monic_cubic_disc(c2, c1, c0)
    disc_cls = squarefree_part(disc)
    if irred_cubic:
        degree = 3 if disc_cls == 1 else 6
        fact = "irreducible"
        qd = None
    elif quad is not None:
        degree = 2
        fact = "linear_quadratic"
        qa, qb, qc = [Fraction(str(c)) for c in quad.all_coeffs()]
        qd = squarefree_part(qb * qb - 4 * qa * qc)
    else:
        degree = 1
        fact = "three_linear"
        qd = None
    return TwoTorsionFieldInfo(degree, (c2, c1, c0), fact, disc_cls,
                               tuple(sorted(lin_roots)), qd)


def _residue(c: Fraction, p: int) -> int:
    return c.numerator * pow(c.denominator, -1, p) % p


def _cubic_field_isomorphic(f: tuple, g: tuple) -> bool:
    """Whether the cubic fields Q[x]/f and Q[x]/g are isomorphic (f, g monic
    irreducible cubics).  Screens with factorization types mod good primes
    below 10^3 before running the exact number-field factorization."""
    from sympy import AlgebraicNumber, CRootOf

    fl = [Fraction(c) for c in f]
    gl = [Fraction(c) for c in g]
    bad = {2, 3}
    for c in fl + gl:
        if c != 0:
            bad |= set(prime_support(c))
    fd, gd = _monic_cubic_disc(*fl), _monic_cubic_disc(*gl)
    bad |= set(prime_support(fd * gd))
    for p in range(5, 1000):
        if not is_prime(p) or p in bad:
            continue
        fp = [_residue(fl[2], p), _residue(fl[1], p), _residue(fl[0], p), 1]
        gp = [_residue(gl[2], p), _residue(gl[1], p), _residue(gl[0], p), 1]
        if modpoly.count_roots(fp, p) != modpoly.count_roots(gp, p):
            return False
    fe = _X**3 + fl[0] * _X**2 + fl[1] * _X + fl[2]
    ge = _Y**3 + gl[0] * _Y**2 + gl[1] * _Y + gl[2]
    alpha = AlgebraicNumber(CRootOf(Poly(ge, _Y), 0))
    _, factors = factor_list(fe, _X, extension=alpha)
    return any(Poly(fac, _X).degree() == 1 for fac, _ in factors)


def same_two_torsion_field(E: CurveQ, A: CurveQ) -> bool:
    """Whether Q(E[2]) = Q(A[2])."""
    iE, iA = classify_two_torsion_field(E), classify_two_torsion_field(A)
    if iE.degree != iA.degree:
        return False
    if iE.degree == 1:
        return True
    if iE.degree == 2:
        return iE.quadratic_disc == iA.quadratic_disc
    if iE.disc_square_class != iA.disc_square_class:
        return False
    return _cubic_field_isomorphic(iE.cubic, iA.cubic)


def reduced_cubic_mod_p(E: CurveQ, p: int) -> list[int]:
    """The integral 2-division cubic reduced mod an odd prime of good reduction."""
    A, B, C = minimal_scaled_model(E)
    return modpoly.poly_mod([C, B, A, 1], p)


def two_torsion_dim_mod_p(E: CurveQ, p: int) -> int:
    """dim_F2 E(F_p)[2] for odd p of good reduction: 2-division cubic roots mod p."""
    if p == 2 or not has_good_reduction(E, p):
        raise CurveError(f"need an odd prime of good reduction, got {p}")
    n = modpoly.count_roots(reduced_cubic_mod_p(E, p), p)
    return {0: 0, 1: 1, 3: 2}[n]


def is_four_torsion_local(E: CurveQ, q: int) -> bool:
    """Whether E[4] is contained in E(Q_q) for an odd prime q of good reduction.

    Uses the halving criterion: with full 2-torsion mod q, a 2-torsion point
    (e_i, 0) is divisible by 2 in E(F_q) iff e_i - e_j and e_i - e_k are both
    squares mod q; E[4] is rational iff all three are halvable.
    """
    if q == 2 or not is_prime(q):
        raise CurveError("q must be an odd prime")
    if not has_good_reduction(E, q):
        raise CurveError(f"bad reduction at {q}")
    cubic = reduced_cubic_mod_p(E, q)
    rts = modpoly.roots(cubic, q) if q < 1000 else _roots_via_split(cubic, q)
    if len(rts) != 3:
        return False
    e1, e2, e3 = rts
    for a, b in ((e1 - e2), (e1 - e3)), ((e2 - e1), (e2 - e3)), ((e3 - e1), (e3 - e2)):
        if legendre(a % q, q) != 1 or legendre(b % q, q) != 1:
            return False
    return True


def _roots_via_split(cubic: list[int], q: int) -> list[int]:
    """Roots of a cubic mod a large prime; only called when it splits completely."""
    if modpoly.count_roots(cubic, q) != 3:
        return []
    from sympy import GF, Poly as SPoly

    f = SPoly(list(reversed(cubic)), _X, domain=GF(q))
    return [int(-SPoly(fac, _X).all_coeffs()[-1]) % q
            for fac, _ in f.factor_list()[1] if SPoly(fac, _X).degree() == 1]


# --- curve text format -------------------------------------------------------

def parse_curve_line(line: str, lineno: int = 0) -> Optional[CurveQ]:
    """One curve per line: 'label : a1 a2 a3 a4 a6', '#' starts a comment."""
    body = line.split("#", 1)[0].strip()
    if not body:
        return None
    if ":" not in body:
        raise CurveError(f"line {lineno}: expected 'label : a1 a2 a3 a4 a6'")
    label, _, rest = body.partition(":")
    fields = rest.split()
    if len(fields) != 5:
        raise CurveError(f"line {lineno}: expected 5 coefficients, got {len(fields)}")
    try:
        coeffs = [Fraction(f) for f in fields]
    except (ValueError, ZeroDivisionError) as exc:
        raise CurveError(f"line {lineno}: bad rational ({exc})") from exc
    try:
        return CurveQ.from_coeffs(*coeffs, label=label.strip())
    except CurveError as exc:
        raise CurveError(f"line {lineno}: {exc}") from exc


def parse_curve_file(text: str) -> list[CurveQ]:
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        E = parse_curve_line(line, i)
        if E is not None:
            out.append(E)
    return out


def format_curve_line(E: CurveQ) -> str:
    label = E.label or "?"
    return f"{label} : " + " ".join(str(a) for a in E.ainvs())
