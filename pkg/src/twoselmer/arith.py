"""Exact rational arithmetic: residue symbols, Hilbert symbols, p-adic square classes.

Everything operates on exact integers / fractions; no floating point anywhere.
Places of Q are the real place (INFINITY) and finite primes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Union

from sympy import factorint

Rational = Union[int, Fraction]

# Sentinel for the real place.  Finite places are plain prime ints.
INFINITY = "oo"

# Miller-Rabin with these bases is deterministic below 3.4e14 (Jaeschke).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17)
_MR_LIMIT = 3_404_000_000_000_000

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


class ArithmeticError_(ValueError):
    """Domain error in a number-theoretic primitive."""


def is_prime(n: int) -> bool:
    """Deterministic primality for |n| below 3.4e14 (raises beyond)."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    if n > _MR_LIMIT:
        raise ArithmeticError_(f"primality of {n} exceeds the deterministic MR range")
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Place:
    """A place of Q: the real place or a certified finite prime."""

    tag: Union[int, str]

    def __post_init__(self):
        if self.tag != INFINITY:
            if not isinstance(self.tag, int) or not is_prime(self.tag):
                raise ArithmeticError_(f"not a prime: {self.tag!r}")

    @property
    def is_infinite(self) -> bool:
        return self.tag == INFINITY

    @property
    def prime(self) -> int:
        if self.is_infinite:
            raise ArithmeticError_("the real place has no residue characteristic")
        return self.tag

    def __repr__(self):
        return "oo" if self.is_infinite else str(self.tag)


REAL_PLACE = Place(INFINITY)


def place(v) -> Place:
    """Coerce an int / 'oo' / Place to a Place."""
    if isinstance(v, Place):
        return v
    return Place(v)


def valuation(r: Rational, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    r = Fraction(r)
    if r == 0:
        raise ArithmeticError_("valuation of zero")
    e = 0
    n, d = r.numerator, r.denominator
    while n % p == 0:
        n //= p
        e += 1
    while d % p == 0:
        d //= p
        e -= 1
    return e


def unit_part(r: Rational, p: int) -> Fraction:
    """r / p^v(r), a p-adic unit."""
    return Fraction(r) / Fraction(p) ** valuation(r, p)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) for an odd prime p."""
    if p == 2 or not is_prime(p):
        raise ArithmeticError_(f"legendre: {p} is not an odd prime")
    a %= p
    if a == 0:
        return 0
    s = pow(a, (p - 1) // 2, p)
    return 1 if s == 1 else -1


def legendre_rational(r: Rational, p: int) -> int:
    """Legendre symbol of a p-adic unit given as an exact rational."""
    r = Fraction(r)
    if valuation(r, p) != 0:
        raise ArithmeticError_(f"{r} is not a p-adic unit at {p}")
    return legendre(r.numerator * pow(r.denominator, -1, p) % p, p)


def least_nonresidue(p: int) -> int:
    """Least positive quadratic non-residue mod an odd prime (canonical u_p)."""
    u = 2
    while legendre(u, p) != -1:
        u += 1
    return u


def _unit_mod8(r: Fraction) -> int:
    n = r.numerator % 8
    d = r.denominator % 8
    return n * pow(d, -1, 8) % 8


def is_square_in_Qv(r: Rational, v) -> bool:
    """Is r a square in the completion Q_v?  (r nonzero, exact.)"""
    r = Fraction(r)
    if r == 0:
        raise ArithmeticError_("zero has no square class")
    v = place(v)
    if v.is_infinite:
        return r > 0
    p = v.prime
    if valuation(r, p) % 2 != 0:
        return False
    u = unit_part(r, p)
    if p == 2:
        return _unit_mod8(u) == 1
    return legendre_rational(u, p) == 1


def hilbert_symbol(a: Rational, b: Rational, v) -> int:
    """Hilbert symbol (a,b)_v: +1 iff z^2 = a x^2 + b y^2 has a nonzero Q_v-point."""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ArithmeticError_("hilbert_symbol requires nonzero arguments")
    v = place(v)
    if v.is_infinite:
        return -1 if (a < 0 and b < 0) else 1
    p = v.prime
    alpha, beta = valuation(a, p), valuation(b, p)
    u, w = unit_part(a, p), unit_part(b, p)
    if p == 2:
        eps_u = (_unit_mod8(u) - 1) // 2 % 2
        eps_w = (_unit_mod8(w) - 1) // 2 % 2
        omega_u = (_unit_mod8(u) ** 2 - 1) // 8 % 2
        omega_w = (_unit_mod8(w) ** 2 - 1) // 8 % 2
        e = eps_u * eps_w + alpha * omega_w + beta * omega_u
        return -1 if e % 2 else 1
    lu = legendre_rational(u, p)
    lw = legendre_rational(w, p)
    sign = 1
    if (alpha * beta) % 2 == 1 and p % 4 == 3:
        sign = -sign
    if beta % 2 == 1 and lu == -1:
        sign = -sign
    if alpha % 2 == 1 and lw == -1:
        sign = -sign
    return sign


# Canonical unit representatives mod (Q_2^x)^2, keyed by unit residue mod 8.
_REP2 = {1: 1, 3: -5, 5: 5, 7: -1}


@dataclass(frozen=True)
class SquareClass:
    """Canonical representative of Q_v^x / (Q_v^x)^2.

    At oo: rep in {1, -1}.  At odd p: rep in {1, u, p, u*p} with u the least
    non-residue.  At 2: rep in {1, -1, 5, -5, 2, -2, 10, -10}.
    """

    place: Place
    rep: int

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        if self.place != other.place:
            raise ArithmeticError_("square classes at different places")
        return square_class(Fraction(self.rep) * other.rep, self.place)

    @property
    def is_trivial(self) -> bool:
        return self.rep == 1


def square_class(r: Rational, v) -> SquareClass:
    """Canonical square class of a nonzero rational in Q_v."""
    r = Fraction(r)
    if r == 0:
        raise ArithmeticError_("zero has no square class")
    v = place(v)
    if v.is_infinite:
        return SquareClass(v, 1 if r > 0 else -1)
    p = v.prime
    e = valuation(r, p) % 2
    u = unit_part(r, p)
    if p == 2:
        rep = _REP2[_unit_mod8(u)]
    else:
        rep = 1 if legendre_rational(u, p) == 1 else least_nonresidue(p)
    if e:
        rep *= p
    return SquareClass(v, rep)


def squarefree_part(r: Rational) -> int:
    """The squarefree integer representing r modulo rational squares."""
    r = Fraction(r)
    if r == 0:
        raise ArithmeticError_("zero has no squarefree part")
    n = r.numerator * r.denominator
    sign = -1 if n < 0 else 1
    out = sign
    for p, e in factorint(abs(n)).items():
        if e % 2:
            out *= p
    return out


def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for e in factorint(abs(n)).values())


def prime_support(r: Rational) -> list[int]:
    """Primes at which the rational has nonzero valuation, ascending."""
    r = Fraction(r)
    if r == 0:
        raise ArithmeticError_("zero has no support")
    return sorted(set(factorint(abs(r.numerator)).keys()) | set(factorint(r.denominator).keys()))


def hilbert_product_places(a: Rational, b: Rational) -> list[Place]:
    """Places where (a,b)_v can be nontrivial: oo, 2 and the odd support of ab."""
    ps = {2} | set(prime_support(a)) | set(prime_support(b))
    return [REAL_PLACE] + [Place(p) for p in sorted(ps)]


def sqrt_mod_prime_power(a: int, p: int, k: int) -> int | None:
    """A square root of a unit a mod p^k, or None.  Hensel from mod p / mod 8."""
    from sympy import sqrt_mod

    a %= p ** k
    if p == 2:
        if k == 1:
            return 1 if a % 2 == 1 else None
        if k == 2:
            return 1 if a % 4 == 1 else None
        if a % 8 != 1:
            return None
        x = 1
        for j in range(3, k):
            if (x * x - a) % (2 ** (j + 1)):
                x += 2 ** (j - 1)
        return x % 2 ** k
    x = sqrt_mod(a, p)
    if x is None:
        return None
    # Hensel lift to p^k
    mod = p
    while mod < p ** k:
        mod = min(mod * mod, p ** k)
        inv = pow(2 * x, -1, mod)
        x = (x - (x * x - a) * inv) % mod
    return x % p ** k


def crt_consistent(congruences: Iterable[tuple[int, int]]) -> bool:
    """Whether a list of (residue, modulus) congruences is simultaneously satisfiable."""
    r0, m0 = 0, 1
    for r, m in congruences:
        g = gcd(m0, m)
        if (r - r0) % g != 0:
            return False
        lcm = m0 // g * m
        t = ((r - r0) // g * pow(m0 // g, -1, m // g)) % (m // g)
        r0 = (r0 + m0 * t) % lcm
        m0 = lcm
    return True


def is_perfect_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n
