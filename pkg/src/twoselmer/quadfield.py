"""Real and imaginary quadratic fields Q(sqrt(D)): exact elements, units, class
groups by reduced binary quadratic forms, T-unit groups modulo squares, and
square tests in the completions.

Everything needed by the descent over Q x Q(sqrt(D)) when the 2-division cubic
has exactly one rational root.  D is a squarefree integer != 0, 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Iterable, Optional

from sympy import factorint

from .arith import (
    SquareClass,
    is_square_in_Qv,
    is_squarefree,
    legendre,
    place,
    square_class,
    sqrt_mod_prime_power,
    valuation,
)


class QuadFieldError(ValueError):
    pass


@dataclass(frozen=True)
class QuadElem:
    """x + y*sqrt(D), exact."""

    x: Fraction
    y: Fraction
    D: int

    @staticmethod
    def of(x, y, D) -> "QuadElem":
        return QuadElem(Fraction(x), Fraction(y), D)

    def __mul__(self, other):
        if isinstance(other, QuadElem):
            if other.D != self.D:
                raise QuadFieldError("mixed fields")
            return QuadElem(self.x * other.x + self.y * other.y * self.D,
                            self.x * other.y + self.y * other.x, self.D)
        return QuadElem(self.x * Fraction(other), self.y * Fraction(other), self.D)

    __rmul__ = __mul__

    def __add__(self, other: "QuadElem"):
        return QuadElem(self.x + other.x, self.y + other.y, self.D)

    def __neg__(self):
        return QuadElem(-self.x, -self.y, self.D)

    def conj(self) -> "QuadElem":
        return QuadElem(self.x, -self.y, self.D)

    def norm(self) -> Fraction:
        return self.x * self.x - self.y * self.y * self.D

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise QuadFieldError("not invertible")
        return QuadElem(self.x / n, -self.y / n, self.D)

    def __pow__(self, n: int) -> "QuadElem":
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadElem(Fraction(1), Fraction(0), self.D)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    @property
    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    @property
    def is_rational(self) -> bool:
        return self.y == 0

    def __repr__(self):
        return f"({self.x} + {self.y}*sqrt({self.D}))"


def _is_rational_square(r: Fraction) -> bool:
    if r < 0:
        return False
    n, d = r.numerator, r.denominator
    return isqrt(n) ** 2 == n and isqrt(d) ** 2 == d


def is_square_in_field(a: QuadElem) -> bool:
    """Exact global square test in Q(sqrt(D))."""
    if a.is_zero:
        return True
    if a.y == 0:
        return _is_rational_square(a.x) or _is_rational_square(a.x / a.D)
    n = a.norm()
    if not _is_rational_square(n):
        return False
    rt = Fraction(isqrt(n.numerator), isqrt(n.denominator))
    for sgn in (1, -1):
        s2 = (a.x + sgn * rt) / 2
        if s2 != 0 and _is_rational_square(s2):
            s = Fraction(isqrt(s2.numerator), isqrt(s2.denominator))
            t = a.y / (2 * s)
            if (s * s + t * t * a.D, 2 * s * t) == (a.x, a.y):
                return True
    return False


def sqrt_in_field(a: QuadElem) -> Optional[QuadElem]:
    """An exact square root in the field, if one exists."""
    if a.is_zero:
        return QuadElem.of(0, 0, a.D)
    if a.y == 0:
        if _is_rational_square(a.x):
            return QuadElem.of(Fraction(isqrt(a.x.numerator), isqrt(a.x.denominator)), 0, a.D)
        q = a.x / a.D
        if _is_rational_square(q):
            return QuadElem.of(0, Fraction(isqrt(q.numerator), isqrt(q.denominator)), a.D)
        return None
    n = a.norm()
    if not _is_rational_square(n):
        return None
    rt = Fraction(isqrt(n.numerator), isqrt(n.denominator))
    for sgn in (1, -1):
        s2 = (a.x + sgn * rt) / 2
        if s2 != 0 and _is_rational_square(s2):
            s = Fraction(isqrt(s2.numerator), isqrt(s2.denominator))
            t = a.y / (2 * s)
            if (s * s + t * t * a.D, 2 * s * t) == (a.x, a.y):
                return QuadElem(s, t, a.D)
    return None


# --- binary quadratic forms --------------------------------------------------

@dataclass(frozen=True)
class BQF:
    """Primitive integral form a x^2 + b xy + c y^2 of discriminant b^2 - 4ac."""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def value(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y


def _transform(f: BQF, p: int, q: int, r: int, s: int) -> BQF:
    # f composed with [[p, q], [r, s]] in SL2(Z)
    a = f.value(p, r)
    c = f.value(q, s)
    b = 2 * f.a * p * q + f.b * (p * s + q * r) + 2 * f.c * r * s
    return BQF(a, b, c)


def reduce_definite(f: BQF) -> tuple[BQF, tuple[int, int, int, int]]:
    """Reduce a positive definite form; returns (reduced, M) with reduced = f o M."""
    M = (1, 0, 0, 1)
    while True:
        a, b, c = f.a, f.b, f.c
        if -a < b <= a <= c and not (a == c and b < 0):
            return f, M
        if a > c or (a == c and b < 0):
            f = _transform(f, 0, -1, 1, 0)
            M = (M[1], -M[0], M[3], -M[2])
            # careful: right-multiplication by S = [[0,-1],[1,0]]
            continue
        k = (a - b) // (2 * a)  # floor division toward -a < b' <= a
        f = _transform(f, 1, k, 0, 1)
        M = (M[0], M[0] * k + M[1], M[2], M[2] * k + M[3])


def _rho_reduced_range(b: int, absc: int, d: int) -> int:
    """Residue r = -b mod 2|c| in the reduction window for indefinite forms."""
    sq = isqrt(d)
    m = 2 * absc
    r = (-b) % m
    if absc > sq:
        # bring r into (-|c|, |c|]
        if r > absc:
            r -= m
    else:
        # bring r into (sq - 2|c|, sq]
        while r > sq:
            r -= m
        while r <= sq - m:
            r += m
    return r


def rho_step(f: BQF) -> tuple[BQF, tuple[int, int, int, int]]:
    """One reduction step for an indefinite form; returns (rho(f), M)."""
    d = f.disc
    r = _rho_reduced_range(f.b, abs(f.c), d)
    m = (f.b + r) // (2 * f.c)
    g = _transform(f, 0, -1, 1, m)
    return g, (0, -1, 1, m)


def is_reduced_indefinite(f: BQF) -> bool:
    # classical window: 0 < b < sqrt(d) and sqrt(d) - b < 2|a| < sqrt(d) + b,
    # in integer form (sqrt(d) irrational for fundamental d)
    sq = isqrt(f.disc)
    return 0 < f.b <= sq and sq - f.b < 2 * abs(f.a) <= sq + f.b


def _mat_mul(M, N):
    return (M[0] * N[0] + M[1] * N[2], M[0] * N[1] + M[1] * N[3],
            M[2] * N[0] + M[3] * N[2], M[2] * N[1] + M[3] * N[3])


def principal_form(d: int) -> BQF:
    if d % 4 == 0:
        return BQF(1, 0, -d // 4)
    return BQF(1, 1, (1 - d) // 4)


def reduce_indefinite(f: BQF) -> tuple[BQF, tuple[int, int, int, int]]:
    M = (1, 0, 0, 1)
    for _ in range(10000):
        if is_reduced_indefinite(f):
            return f, M
        f, step = rho_step(f)
        M = _mat_mul(M, step)
    raise QuadFieldError("indefinite reduction did not terminate")


def indefinite_cycle(f: BQF) -> list[BQF]:
    """The rho-cycle of a reduced indefinite form."""
    out = [f]
    g, _ = rho_step(f)
    while g != f:
        out.append(g)
        g, _ = rho_step(g)
        if len(out) > 100000:
            raise QuadFieldError("cycle too long")
    return out


@lru_cache(maxsize=None)
def reduced_forms(d: int) -> tuple[BQF, ...]:
    """All primitive reduced forms of discriminant d (d a fundamental discriminant)."""
    out = []
    if d < 0:
        bmax = isqrt(-d // 3)
        for a in range(1, isqrt(-d // 3) + 1):
            for b in range(-a + 1, a + 1):
                if (b * b - d) % (4 * a):
                    continue
                c = (b * b - d) // (4 * a)
                if c < a or (a == c and b < 0):
                    continue
                if math.gcd(math.gcd(a, b), c) != 1:
                    continue
                out.append(BQF(a, b, c))
    else:
        sq = isqrt(d)
        for b in range(1, sq + 1):
            if (b - d) % 2:
                continue
            prod = (d - b * b) // 4
            if prod <= 0:
                continue
            for a in _divisors_signed(prod):
                c = -prod // a
                f = BQF(a, b, c)
                if is_reduced_indefinite(f) and math.gcd(math.gcd(a, b), abs(c)) == 1:
                    out.append(f)
    return tuple(out)


def _divisors_signed(n: int) -> list[int]:
    ds = []
    for i in range(1, isqrt(n) + 1):
        if n % i == 0:
            ds += [i, n // i]
    ds = sorted(set(ds))
    return ds + [-x for x in ds]


@lru_cache(maxsize=None)
def class_count(d: int) -> int:
    """Form class number of discriminant d (narrow class number for d > 0)."""
    forms = reduced_forms(d)
    if d < 0:
        return len(forms)
    seen, cycles = set(), 0
    for f in forms:
        if f in seen:
            continue
        cycles += 1
        seen |= set(indefinite_cycle(f))
    return cycles


# --- fundamental units by continued fractions --------------------------------

@lru_cache(maxsize=None)
def fundamental_unit(D: int) -> QuadElem:
    """Fundamental unit > 1 of Q(sqrt(D)), D > 1 squarefree, by the continued
    fraction of the standard generator of the ring of integers.

    The state omega_1 just inside the period is purely periodic; the product
    M of the period's partial-quotient matrices [[a,1],[1,0]] fixes it, and
    eps = M10 * omega_1 + M11 is a unit with norm (-1)^(period length)."""
    if D <= 1:
        raise QuadFieldError("fundamental units need a real field")
    P, Q = (1, 2) if D % 4 == 1 else (0, 1)
    sq = isqrt(D)
    a = (P + sq) // Q
    P = a * Q - P
    Q = (D - P * P) // Q
    start = (P, Q)
    P1, Q1 = P, Q
    m10, m11 = 0, 1
    for _ in range(10 ** 6):
        a = (P + sq) // Q
        m10, m11 = m10 * a + m11, m10
        P = a * Q - P
        Q = (D - P * P) // Q
        if (P, Q) == start:
            break
    else:
        raise QuadFieldError(f"continued fraction of sqrt({D}) did not close")
    eps = QuadElem.of(Fraction(m10 * P1 + m11 * Q1, Q1), Fraction(m10, Q1), D)
    if abs(eps.norm()) != 1:
        raise QuadFieldError(f"continued fraction unit failed for D={D}: N={eps.norm()}")
    for cand in (eps, -eps, eps.inverse(), -eps.inverse()):
        if cand.x > 0 and cand.y > 0:
            return cand
    raise QuadFieldError(f"unit normalization failed for D={D}")


def unit_generators(D: int) -> list[QuadElem]:
    """Generators of O_K^x modulo squares."""
    if D == -1:
        return [QuadElem.of(0, 1, -1)]                     # i; -1 = i^2 is a square
    if D == -3:
        return [QuadElem.of(Fraction(1, 2), Fraction(1, 2), -3)]  # zeta_6
    if D < 0:
        return [QuadElem.of(-1, 0, D)]
    return [QuadElem.of(-1, 0, D), fundamental_unit(D)]


# --- prime ideals as forms, principality, generators --------------------------

def fundamental_disc(D: int) -> int:
    return D if D % 4 == 1 else 4 * D


def splitting_type(D: int, p: int) -> str:
    """'split' / 'inert' / 'ramified' for p in Q(sqrt(D))."""
    d = fundamental_disc(D)
    if p == 2:
        if d % 2 == 0:
            return "ramified"
        return "split" if d % 8 == 1 else "inert"
    if d % p == 0:
        return "ramified"
    return "split" if legendre(d % p, p) == 1 else "inert"


def prime_form(D: int, p: int) -> BQF:
    """The form (p, b, c) of a prime ideal above a non-inert prime p."""
    d = fundamental_disc(D)
    typ = splitting_type(D, p)
    if typ == "inert":
        raise QuadFieldError(f"{p} is inert in Q(sqrt({D}))")
    if p == 2:
        if d % 8 == 1:
            b = 1
        elif D % 4 == 2:
            b = 0
        else:  # D = 3 mod 4, d = 4D
            b = 2
    elif typ == "ramified":
        b = 0 if d % 4 == 0 else p
    else:
        r = sqrt_mod_prime_power(d % p, p, 1)
        # b = +-r mod p with b = d mod 2 makes b^2 = d mod 4p automatic
        b = r if r % 2 == d % 2 else r + p
    assert (b * b - d) % (4 * p) == 0, (D, p, b)
    return BQF(p, b, (b * b - d) // (4 * p))


def ideal_element(f: BQF, col: tuple[int, int], D: int) -> QuadElem:
    """The element p*a - r*(-b + sqrt(d))/2 of the ideal [a, (-b+sqrt(d))/2].

    With (p, r) the first column of M in SL2(Z), its norm is a * (f o M).a,
    via N(x*a + y*(-b+sqrt(d))/2) = a * f(x, -y)."""
    d = fundamental_disc(D)
    a, b = f.a, f.b
    p, r = col[0], -col[1]
    if d % 4 == 1:
        return QuadElem.of(Fraction(2 * p * a - r * b, 2), Fraction(r, 2), D)
    # d = 4D: (-b + sqrt(d))/2 = -b/2 + sqrt(D), b even
    return QuadElem.of(p * a - r * (b // 2), r, D)


def principal_generator(f: BQF, D: int) -> Optional[QuadElem]:
    """A generator of the ideal of the form f, or None if not principal.

    Reduction with SL2 tracking: if f o M has leading coefficient +-1, the
    first column of M gives an element of norm +-N(ideal)."""
    d = fundamental_disc(D)
    if d < 0:
        g, M = reduce_definite(f)
        if g.a != 1:
            return None
        return ideal_element(f, (M[0], M[2]), D)
    g, M = reduce_indefinite(f)
    start = g
    for _ in range(100000):
        if abs(g.a) == 1:
            return ideal_element(f, (M[0], M[2]), D)
        g, step = rho_step(g)
        M = _mat_mul(M, step)
        if g == start:
            return None
    raise QuadFieldError("principality walk did not terminate")


def element_valuation(alpha: QuadElem, p: int) -> dict[str, int]:
    """Valuations of alpha at the primes above p, keyed 'P' (and 'Pbar' if split).

    Split primes are told apart by the local root: P is the prime with
    omega = (-b + sqrt(d))/2 = root mod P for the canonical prime_form."""
    if alpha.is_zero:
        raise QuadFieldError("zero element")
    D = alpha.D
    typ = splitting_type(D, p)
    n = alpha.norm()
    vn = valuation(n, p)
    if typ == "inert":
        if vn % 2:
            raise QuadFieldError("odd norm valuation at an inert prime")
        return {"P": vn // 2}
    if typ == "ramified":
        return {"P": vn}
    vP, vPbar = split_embedding_valuations(alpha, p)
    return {"P": vP, "Pbar": vPbar}


def _split_sqrt(D: int, p: int, prec: int) -> int:
    """A lift s with s^2 = D mod p^prec, normalized to the embedding in which
    the canonical prime_form ideal is the prime of 'first' embedding."""
    d = fundamental_disc(D)
    f = prime_form(D, p)
    s = sqrt_mod_prime_power(D % p ** prec, p, prec)
    if s is None:
        raise QuadFieldError(f"{p} is not split in Q(sqrt({D}))")
    if p == 2:
        # P = [2, (-1+sqrt(d))/2] contains omega iff sqrt(d) = 1 mod 4
        if s % 4 != 1:
            s = 2 ** prec - s
        if s % 4 != 1:
            s += 2 ** (prec - 1)
        assert (s * s - D) % 2 ** (prec - 1) == 0 and s % 4 == 1
        return s
    target = (f.b % p) if d % 4 == 1 else ((f.b // 2) % p)
    if s % p != target:
        s = p ** prec - s
    if s % p != target:
        raise QuadFieldError("embedding normalization failed")
    return s


def split_embedding_valuations(alpha: QuadElem, p: int) -> tuple[int, int]:
    """(v_P, v_Pbar) of a nonzero element at a split prime p, exactly."""
    n = alpha.norm()
    vn = valuation(n, p)
    low = min(valuation(alpha.x, p) if alpha.x else 10 ** 9,
              valuation(alpha.y, p) if alpha.y else 10 ** 9, 0)
    prec = max(vn - 2 * low + 8, 8)
    s = _split_sqrt(alpha.D, p, prec)
    t1 = alpha.x + alpha.y * s
    t2 = alpha.x - alpha.y * s
    v1 = valuation(t1, p) if t1 else 10 ** 9
    v2 = valuation(t2, p) if t2 else 10 ** 9
    guard = prec - 3
    if v1 < guard and v2 < guard:
        if v1 + v2 != vn:
            raise QuadFieldError("split valuation inconsistency")
        return v1, v2
    if v1 < guard:
        return v1, vn - v1
    if v2 < guard:
        return vn - v2, v2
    raise QuadFieldError("split valuation needs more precision")


# --- squares in completions ----------------------------------------------------

def _unit_square_unramified_odd(beta: QuadElem, p: int) -> bool:
    """Square test for a w-unit in the unramified quadratic extension of Q_p,
    p odd: the residue in F_{p^2} = F_p[t]/(t^2 - D) must be a square, i.e.
    beta^((p^2-1)/2) = 1."""
    a, b = beta.x, beta.y
    den = a.denominator * b.denominator
    if den % p == 0:
        raise QuadFieldError("not p-integral")
    inv = pow(den, -1, p)
    a0 = a.numerator * (den // a.denominator) * inv % p
    b0 = b.numerator * (den // b.denominator) * inv % p
    # exponentiate a0 + b0 t in F_p[t]/(t^2 - D)
    e = (p * p - 1) // 2
    ra, rb = 1, 0
    xa, xb = a0, b0
    Dm = beta.D % p
    while e:
        if e & 1:
            ra, rb = (ra * xa + rb * xb * Dm) % p, (ra * xb + rb * xa) % p
        xa, xb = (xa * xa + xb * xb * Dm) % p, (2 * xa * xb) % p
        e >>= 1
    return (ra, rb) == (1, 0)

def real_embedding_signs(alpha: QuadElem) -> tuple[int, int]:
    """Signs of the two real embeddings (x + y sqrt(D), x - y sqrt(D)), D > 0."""
    if alpha.D < 0:
        raise QuadFieldError("imaginary field has no real embeddings")
    x, y = alpha.x, alpha.y

    def sign(x, y):  # sign of x + y sqrt(D)
        if y == 0:
            return 1 if x > 0 else -1
        if x == 0:
            return 1 if y > 0 else -1
        if x > 0 and y > 0:
            return 1
        if x < 0 and y < 0:
            return -1
        # mixed signs: compare x^2 with y^2 D
        big_x = x * x > y * y * alpha.D
        if x > 0:
            return 1 if big_x else -1
        return -1 if big_x else 1

    return sign(x, y), sign(x, -y)


def _unit_residue_split(alpha: QuadElem, p: int, which: int) -> Fraction:
    """sigma_i(alpha) scaled to a unit, as an exact rational approximation whose
    square class at p is exact."""
    vs = split_embedding_valuations(alpha, p)
    v = vs[which]
    n = alpha.norm()
    vn = valuation(n, p)
    low = min(valuation(alpha.x, p) if alpha.x else 10 ** 9,
              valuation(alpha.y, p) if alpha.y else 10 ** 9, 0)
    prec = max(vn - 2 * low + 8, 8) + abs(v) + 4
    s = _split_sqrt(alpha.D, p, prec)
    t = alpha.x + alpha.y * s if which == 0 else alpha.x - alpha.y * s
    return t  # valuation(t, p) == v, and t = sigma(alpha) to precision well past v


def is_square_in_completion(alpha: QuadElem, v) -> bool:
    """Is alpha a square in K_w for the place(s) w of K = Q(sqrt(D)) above v?

    For split v this asks about the FIRST embedding (the canonical prime P);
    use local_square_class_pair to see both.  For v = oo with D < 0 the
    completion is C and everything is a square.
    """
    if alpha.is_zero:
        raise QuadFieldError("zero element")
    v = place(v)
    D = alpha.D
    if v.is_infinite:
        if D < 0:
            return True
        return real_embedding_signs(alpha)[0] > 0
    p = v.prime
    typ = splitting_type(D, p)
    if typ == "split":
        t = _unit_residue_split(alpha, p, 0)
        return is_square_in_Qv(t, p)
    if p != 2:
        if typ == "inert":
            w = element_valuation(alpha, p)["P"]
            if w % 2:
                return False
            # p is the uniformizer of the unramified completion: scale by p^-w
            beta = alpha * QuadElem.of(Fraction(p) ** (-w), 0, D)
            return _unit_square_unramified_odd(beta, p)
        # ramified odd p
        w = element_valuation(alpha, p)["P"]
        if w % 2:
            return False
        beta = alpha * QuadElem.of(Fraction(D) ** (-(w // 2)), 0, D)
        # beta is a w-unit; its residue is the rational part mod p
        x = beta.x
        if valuation(x, p) != 0:
            raise QuadFieldError("ramified unit residue failed")
        num = x.numerator * pow(x.denominator, -1, p) % p
        return legendre(num, p) == 1
    # p = 2, inert or ramified: bounded Hensel search in O/2^3
    return _two_adic_square(alpha)


def _omega_coords(alpha: QuadElem) -> tuple[Fraction, Fraction]:
    """Coordinates of alpha in the integral basis (1, omega)."""
    D = alpha.D
    if D % 4 == 1:
        # omega = (1 + sqrt(D))/2: alpha = (x - y) + 2y * omega
        return alpha.x - alpha.y, 2 * alpha.y
    return alpha.x, alpha.y


def _two_adic_square(alpha: QuadElem) -> bool:
    """Square test in the 2-adic completion for inert/ramified 2."""
    D = alpha.D
    typ = splitting_type(D, 2)
    e = 2 if typ == "ramified" else 1  # ramification index of 2
    w = element_valuation(alpha, 2)["P"]
    if w % 2:
        return False
    # scale to a unit: pi = sqrt(D) (D = 2 mod 4), 1+sqrt(D)-flavor (D = 3 mod 4), or 2
    if typ == "inert":
        # 2 is the uniformizer of the unramified completion: scale by 2^-w
        beta = alpha * QuadElem.of(Fraction(2) ** (-w), 0, D)
    else:
        if D % 4 == 2:
            pi = QuadElem.of(0, 1, D)          # sqrt(D), norm -D with v_2(N) = 1
        else:
            pi = QuadElem.of(1, 1, D)          # 1 + sqrt(D), norm 1 - D even /2 odd
        beta = alpha * (pi.inverse() ** w if w >= 0 else pi ** (-w))
        if element_valuation(beta, 2)["P"] != 0:
            raise QuadFieldError("2-adic unit scaling failed")
    # Hensel: unit u is a square iff x^2 = u mod m^(2e+1) has a solution
    k = 2 * e + 1
    a0, b0 = _omega_coords(beta)
    den = (a0.denominator * b0.denominator)
    if den % 2 == 0:
        raise QuadFieldError("not 2-integral after scaling")
    for a in range(8):
        for b in range(8):
            cand = _from_omega_coords(Fraction(a), Fraction(b), D)
            diff = cand * cand + (-1) * beta
            if diff.is_zero:
                return True
            if element_valuation(diff, 2)["P"] >= k:
                return True
    return False


def _from_omega_coords(a: Fraction, b: Fraction, D: int) -> QuadElem:
    if D % 4 == 1:
        return QuadElem(a + b * Fraction(1, 2), b * Fraction(1, 2), D)
    return QuadElem(a, b, D)


def local_square_class_pair(alpha: QuadElem, p: int) -> tuple[SquareClass, SquareClass]:
    """Square classes of the two embeddings at a split prime p."""
    t1 = _unit_residue_split(alpha, p, 0)
    t2 = _unit_residue_split(alpha, p, 1)
    return square_class(t1, p), square_class(t2, p)


# --- composition and the class group as an explicit 2-group interface ----------

def _solve_linmod(a: int, b: int, m: int) -> tuple[int, int]:
    """x with a x = b (mod m), as (x0, step); requires gcd(a, m) | b."""
    g = math.gcd(a, m)
    if b % g:
        raise QuadFieldError("no solution to linear congruence")
    mm = m // g
    x0 = (b // g) * pow(a // g, -1, mm) % mm
    return x0, mm


def compose(f1: BQF, f2: BQF) -> BQF:
    """Gaussian composition of primitive forms of the same discriminant."""
    if f1.disc != f2.disc:
        raise QuadFieldError("discriminant mismatch")
    a, b, c = f1.a, f1.b, f1.c
    aa, bb, cc = f2.a, f2.b, f2.c
    g = (b + bb) // 2
    h = -(b - bb) // 2
    w = math.gcd(math.gcd(a, aa), g)
    s = a // w
    t = aa // w
    u = g // w
    mu, nu = _solve_linmod(t * u, h * u + s * c, s * t)
    if s == 1:
        lam = 0
    else:
        lam = _solve_linmod(t * nu, h - t * mu, s)[0]
    k = mu + nu * lam
    ell = (k * t - h) // s
    m = (t * u * k - h * u - c * s) // (s * t)
    A = s * t
    B = w * u - (k * t + ell * s)
    C = k * ell - w * m
    return BQF(A, B, C)


@lru_cache(maxsize=None)
def _class_key(d: int, f: BQF) -> BQF:
    """Canonical representative of the form class of f (disc d)."""
    if d < 0:
        if f.a < 0:
            raise QuadFieldError("negative definite form")
        return reduce_definite(f)[0]
    g, _ = reduce_indefinite(f)
    cyc = indefinite_cycle(g)
    return min(cyc, key=lambda h: (h.a, h.b, h.c))


@dataclass(frozen=True)
class ClassGroup:
    """The form class group of a fundamental discriminant, as explicit keys."""

    disc: int
    keys: tuple[BQF, ...]

    @staticmethod
    def of(d: int) -> "ClassGroup":
        keys = sorted({_class_key(d, f) for f in reduced_forms(d)},
                      key=lambda h: (h.a, h.b, h.c))
        return ClassGroup(d, tuple(keys))

    @property
    def order(self) -> int:
        return len(self.keys)

    def identity(self) -> BQF:
        return _class_key(self.disc, principal_form(self.disc))

    def mul(self, k1: BQF, k2: BQF) -> BQF:
        return _class_key(self.disc, compose(k1, k2))

    def key_of(self, f: BQF) -> BQF:
        return _class_key(self.disc, f)

    def squares(self) -> set[BQF]:
        return {self.mul(k, k) for k in self.keys}

    def two_torsion_rank(self) -> int:
        ident = self.identity()
        count = sum(1 for k in self.keys if self.mul(k, k) == ident)
        return count.bit_length() - 1  # count = 2^rank


@lru_cache(maxsize=None)
def class_group(D: int) -> ClassGroup:
    return ClassGroup.of(fundamental_disc(D))


@lru_cache(maxsize=None)
def _sign_class_subgroup(D: int) -> frozenset[BQF]:
    """The subgroup H of the form class group with (form classes)/H the ideal
    class group in the wide sense: H is generated by the class of -principal
    when D > 0 and the fundamental unit has norm +1 (narrow != wide)."""
    G = class_group(D)
    if D < 0 or fundamental_unit(D).norm() == -1:
        return frozenset({G.identity()})
    d = G.disc
    f0 = principal_form(d)
    fneg = BQF(-f0.a, f0.b, -f0.c)
    return frozenset({G.identity(), G.key_of(fneg)})


def wide_class_number(D: int) -> int:
    return class_group(D).order // len(_sign_class_subgroup(D))


def wide_two_torsion_rank(D: int) -> int:
    """2-rank of the (wide) ideal class group."""
    G = class_group(D)
    H = _sign_class_subgroup(D)
    count = sum(1 for k in G.keys if G.mul(k, k) in H) // len(H)
    return count.bit_length() - 1


def in_wide_square_classes(D: int, cls: BQF) -> bool:
    """Whether the narrow class cls lies in 2*Cl_wide, i.e. in (squares) * H."""
    G = class_group(D)
    H = _sign_class_subgroup(D)
    sq = G.squares()
    return any(G.mul(cls, h) in sq for h in H)


# --- the group K(T,2) of T-unit square classes --------------------------------

@dataclass(frozen=True)
class TUnitGroup:
    """K(T,2) = {alpha in K^x/(K^x)^2 : all valuations outside T are even}.

    basis: independent class representatives; prime_index maps rational primes
    of T to the indices of their ideal-valuation coordinates.
    """

    D: int
    primes: tuple[int, ...]
    basis: tuple[QuadElem, ...]
    places_above: tuple[tuple[int, str], ...]  # (p, 'P'/'Pbar') per coordinate

    @property
    def dim(self) -> int:
        return len(self.basis)


def _norm_targets(D: int, primes_e: list[int], mmax: int):
    base = 1
    for p in primes_e:
        base *= p
    for m in range(1, mmax + 1):
        yield base * m * m


def _elements_of_norm(D: int, n: int) -> list[QuadElem]:
    """Integral elements with |norm| = n, up to sign/conjugation, bounded search."""
    out = []
    if D < 0:
        # x^2 + |D| y^2 = n, including half-integer coordinates for D = 1 mod 4
        for (sx, sy), scale in (((1, 1), 1), ((2, 2), 2)) if D % 4 == 1 else (((1, 1), 1),):
            nn = n * scale * scale
            ymax = isqrt(nn // (-D))
            for y in range(ymax + 1):
                x2 = nn + D * y * y
                if x2 < 0:
                    continue
                x = isqrt(x2)
                if x * x == x2 and (scale == 1 or (x - y) % 2 == 0):
                    out.append(QuadElem.of(Fraction(x, scale), Fraction(y, scale), D))
        return out
    eps = fundamental_unit(D)
    # crude but safe coefficient bound: generators of norm +-n exist with
    # y <= sqrt(n) * (coefficients of eps), after scaling by a unit power
    bound = (isqrt(n) + 1) * (int(eps.x + abs(eps.y) * (isqrt(D) + 1)) + 2) * 2
    scales = (1, 2) if D % 4 == 1 else (1,)
    for scale in scales:
        nn = n * scale * scale
        for y in range(bound + 1):
            for sign in (1, -1):
                x2 = sign * nn + D * y * y
                if x2 < 0:
                    continue
                x = isqrt(x2)
                if x * x == x2 and (scale == 1 or (x - y) % 2 == 0):
                    out.append(QuadElem.of(Fraction(x, scale), Fraction(y, scale), D))
        if out:
            break
    return out


def _valuation_profile(alpha: QuadElem, coords: list[tuple[int, str]]) -> Optional[tuple[int, ...]]:
    """Parity vector of alpha at the coordinate places; None if alpha is ramified
    (odd valuation) anywhere outside them."""
    n = alpha.norm()
    supp = set()
    num = abs(n.numerator)
    den = n.denominator
    for p in factorint(num * den):
        supp.add(p)
    coord_primes = {p for p, _ in coords}
    vec = []
    vals: dict[tuple[int, str], int] = {}
    for p in supp:
        for key, v in element_valuation(alpha, p).items():
            vals[(p, key)] = v
    for p in supp - coord_primes:
        typ = splitting_type(alpha.D, p)
        keys = ("P", "Pbar") if typ == "split" else ("P",)
        for k in keys:
            if vals.get((p, k), 0) % 2:
                return None
    for p, k in coords:
        vec.append(vals.get((p, k), 0) % 2)
    return tuple(vec)


def _independent(alpha: QuadElem, basis: list[QuadElem]) -> bool:
    """alpha not in the F2-span of basis, by exact subset-product square tests."""
    for mask in range(1 << len(basis)):
        prod = alpha
        for i, beta in enumerate(basis):
            if (mask >> i) & 1:
                prod = prod * beta
        if is_square_in_field(prod):
            return False
    return True


def t_unit_group(D: int, primes: Iterable[int], search_cap: int = 60) -> TUnitGroup:
    """Basis of K(T,2), T = all places above the given rational primes (and oo).

    dim = dim(units/squares) + dim W + 2-rank Cl, where W is the group of
    T-valuation parity vectors realized by principal-times-square ideals.
    """
    primes = tuple(sorted(set(primes)))
    if not is_squarefree(D) or D in (0, 1):
        raise QuadFieldError(f"not a squarefree field generator: {D}")
    G = class_group(D)
    coords: list[tuple[int, str]] = []
    prime_classes: dict[tuple[int, str], BQF] = {}
    for p in primes:
        typ = splitting_type(D, p)
        if typ == "inert":
            continue  # the ideal (p) is generated by p; no odd-valuation classes
        coords.append((p, "P"))
        prime_classes[(p, "P")] = G.key_of(prime_form(D, p))
        if typ == "split":
            coords.append((p, "Pbar"))
            # conjugate class is the inverse = the conjugate form
            f = prime_form(D, p)
            prime_classes[(p, "Pbar")] = G.key_of(BQF(f.a, -f.b, f.c))

    # W = parity vectors e with prod P^e in 2 * Cl (wide sense)
    ident = G.identity()
    W_vecs = []
    for mask in range(1 << len(coords)):
        cls = ident
        for i, key in enumerate(coords):
            if (mask >> i) & 1:
                cls = G.mul(cls, prime_classes[key])
        if in_wide_square_classes(D, cls):
            W_vecs.append(tuple((mask >> i) & 1 for i in range(len(coords))))
    dim_W = _f2_rank(W_vecs)
    target_dim = len(unit_generators(D)) + dim_W + wide_two_torsion_rank(D)

    basis: list[QuadElem] = list(unit_generators(D))
    # inert primes of T contribute their rational generator
    for p in primes:
        if splitting_type(D, p) == "inert":
            cand = QuadElem.of(p, 0, D)
            if _independent(cand, basis):
                basis.append(cand)
    target_dim += sum(1 for p in primes if splitting_type(D, p) == "inert")

    # principal prime ideals contribute directly
    for key in coords:
        p, which = key
        f = prime_form(D, p)
        if which == "Pbar":
            f = BQF(f.a, -f.b, f.c)
        gen = principal_generator(f, D)
        if gen is not None and _independent(gen, basis):
            basis.append(gen)

    # top up with an ascending-norm element search
    if len(basis) < target_dim:
        norm_targets = set()
        for mask in range(1 << len(coords)):
            e_primes = sorted({coords[i][0] for i in range(len(coords)) if (mask >> i) & 1})
            base = 1
            for i in range(len(coords)):
                if (mask >> i) & 1:
                    base *= coords[i][0]
            norm_targets.add(base)
        for m in range(1, search_cap + 1):
            for base in sorted(norm_targets):
                if len(basis) >= target_dim:
                    break
                for alpha in _elements_of_norm(D, base * m * m):
                    if alpha.is_zero:
                        continue
                    if _valuation_profile(alpha, coords) is None:
                        continue
                    if _independent(alpha, basis):
                        basis.append(alpha)
                        if len(basis) >= target_dim:
                            break
            if len(basis) >= target_dim:
                break
    if len(basis) != target_dim:
        raise QuadFieldError(
            f"K(T,2) basis search exhausted for D={D}, primes={primes}: "
            f"found {len(basis)} of {target_dim}")
    return TUnitGroup(D, primes, tuple(basis), tuple(coords))


def _f2_rank(vectors: list[tuple[int, ...]]) -> int:
    rows = []
    for vec in vectors:
        row = 0
        for i, b in enumerate(vec):
            row |= (b & 1) << i
        for r in rows:
            row = min(row, row ^ r)
        if row:
            rows.append(row)
    return len(rows)
