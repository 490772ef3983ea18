"""Per-place analysis of an elliptic curve: local 2-torsion classes of primes,
local Kummer images in the square-class ambient, the h-invariant of a local
character, and the explicit local duality pairing via Hilbert symbols.

The ambient for H^1(Q_q, E[2]) is modeled only at odd good primes with full
local 2-torsion, where it is (Q_q^x / squares)^2, 4-dimensional over F2, with
coordinates the square classes of (x - e1, x - e2) for a fixed ordering of the
2-torsion roots mod q.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from sympy import factor_list, Symbol

from . import modpoly
from .arith import (
    ArithmeticError_,
    Place,
    SquareClass,
    hilbert_symbol,
    is_prime,
    is_square_in_Qv,
    least_nonresidue,
    legendre,
    place,
    square_class,
    valuation,
)
from .curves import (
    CurveQ,
    bad_primes,
    minimal_scaled_model,
    quadratic_twist,
    reduced_cubic_mod_p,
)
from .f2 import F2Subspace

_X = Symbol("x")


class UnsupportedLocalCase(ValueError):
    """The requested local computation is outside the computable cases."""


class PrecisionExhausted(RuntimeError):
    """Local point sampling failed to fill the Kummer image to its known dimension."""


# --- local characters of Q_q^x ------------------------------------------------

@dataclass(frozen=True)
class LocalCharacter:
    """A quadratic character of Q_q^x, identified with the square class t such
    that chi = (t, .)_q: t = 1 trivial, t = u unramified nontrivial, t in
    {q, uq} the two ramified classes."""

    q: int
    t: int  # canonical square-class representative at q

    @staticmethod
    def trivial(q: int) -> "LocalCharacter":
        return LocalCharacter(q, 1)

    @staticmethod
    def unramified_nontrivial(q: int) -> "LocalCharacter":
        return LocalCharacter(q, least_nonresidue(q))

    @staticmethod
    def ramified_pair(q: int) -> tuple["LocalCharacter", "LocalCharacter"]:
        return LocalCharacter(q, q), LocalCharacter(q, q * least_nonresidue(q))

    @property
    def is_trivial(self) -> bool:
        return self.t == 1

    @property
    def is_ramified(self) -> bool:
        return self.t % self.q == 0

    def value(self, r) -> int:
        return hilbert_symbol(self.t, r, self.q)

    def kind(self) -> str:
        if self.is_trivial:
            return "trivial"
        return "ramified" if self.is_ramified else "unramified"


def local_character_of(d: int, q: int) -> LocalCharacter:
    """The local component at q of the global character of squarefree d."""
    return LocalCharacter(q, square_class(d, q).rep)


# --- Frobenius and prime classes ----------------------------------------------

def frobenius_order_on_M(E: CurveQ, q: int) -> int:
    """Order (1, 2 or 3) of Frobenius at q acting on Q(E[2]), for odd good q."""
    if q == 2 or not is_prime(q):
        raise UnsupportedLocalCase("q must be an odd prime")
    if q in bad_primes(E):
        raise UnsupportedLocalCase(f"bad reduction at {q}")
    n = modpoly.count_roots(reduced_cubic_mod_p(E, q), q)
    return {3: 1, 1: 2, 0: 3}[n]


def prime_class(E: CurveQ, q: int) -> int:
    """i with q in P_{E,i}: dim of the local 2-torsion, from the Frobenius order."""
    return {1: 2, 2: 1, 3: 0}[frobenius_order_on_M(E, q)]


# --- roots of cubics in completions --------------------------------------------

def _cubic_eval(c: list[Fraction], x: Fraction) -> Fraction:
    return ((x + c[0]) * x + c[1]) * x + c[2]


def count_roots_in_Qv(cubic: tuple, v) -> int:
    """Number of roots of a monic rational cubic in Q_v (0..3)."""
    v = place(v)
    c2, c1, c0 = (Fraction(t) for t in cubic)
    expr = _X**3 + c2 * _X**2 + c1 * _X + c0
    _, factors = factor_list(expr, _X)
    count = 0
    for f, _ in factors:
        from sympy import Poly

        pf = Poly(f, _X)
        coeffs = [Fraction(str(t)) for t in pf.all_coeffs()]
        if pf.degree() == 1:
            count += 1
        elif pf.degree() == 2:
            a, b, c = coeffs
            disc = b * b - 4 * a * c
            if v.is_infinite:
                count += 2 if disc > 0 else 0
            elif is_square_in_Qv(disc, v):
                count += 2
        else:
            if v.is_infinite:
                disc3 = _cubic_disc_fr(coeffs[1] / coeffs[0], coeffs[2] / coeffs[0],
                                       coeffs[3] / coeffs[0])
                count += 3 if disc3 > 0 else 1
            else:
                count += _irreducible_cubic_roots_in_Qp(coeffs, v.prime)
    return count


def _cubic_disc_fr(c2: Fraction, c1: Fraction, c0: Fraction) -> Fraction:
    return (18 * c2 * c1 * c0 - 4 * c2**3 * c0 + c2 * c2 * c1 * c1
            - 4 * c1**3 - 27 * c0 * c0)


def _irreducible_cubic_roots_in_Qp(coeffs: list[Fraction], p: int) -> int:
    """Roots in Q_p of an irreducible cubic, by digit-branch search with Hensel
    certification.  After monic integral normalization the roots are integral;
    a branch r mod p^k with v(g(r)) > 2 v(g'(r)) and k > v(g'(r)) contains
    exactly one root, and every root certifies by depth 2 v(disc) + 2."""
    lead = coeffs[0]
    c = [t / lead for t in coeffs[1:]]
    from math import lcm

    m = lcm(*(t.denominator for t in c))
    c = [c[0] * m, c[1] * m * m, c[2] * m**3]  # x -> x/m keeps the count
    ci = [int(t) for t in c]
    disc = (18 * ci[0] * ci[1] * ci[2] - 4 * ci[0] ** 3 * ci[2]
            + ci[0] ** 2 * ci[1] ** 2 - 4 * ci[1] ** 3 - 27 * ci[2] ** 2)
    vdisc = valuation(disc, p) if disc else 0
    cap = 2 * vdisc + 4

    def g(x):
        return ((x + ci[0]) * x + ci[1]) * x + ci[2]

    def gp(x):
        return (3 * x + 2 * ci[0]) * x + ci[1]

    roots = 0
    branches = [(0, 0)]  # (residue, depth): candidates r mod p^depth
    while branches:
        r, k = branches.pop()
        if k > 0:
            gv, gpv = g(r), gp(r)
            t = valuation(gpv, p) if gpv else cap
            val_g = valuation(gv, p) if gv else 10 ** 9
            if val_g > 2 * t and k > t:
                roots += 1
                continue
        if k >= cap:
            raise UnsupportedLocalCase(
                f"cubic root count at {p} undecided at precision {cap}")
        mod = p ** (k + 1)
        for digit in range(p):
            rr = r + digit * p ** k
            if g(rr) % mod == 0:
                branches.append((rr, k + 1))
    return roots


def two_torsion_dim_in_Qv(E: CurveQ, v) -> int:
    """dim_F2 E(Q_v)[2] from the 2-division cubic's roots in Q_v."""
    from .curves import two_division_cubic

    n = count_roots_in_Qv(two_division_cubic(E), v)
    return {0: 0, 1: 1, 3: 2}[n]


def dim_local_kummer(E: CurveQ, d: int, v) -> int:
    """dim of the local Kummer image of the twisted curve at v:
    dim E^d(Q_v)[2] + 1 at v = 2, max(dim - 1, 0) at oo, dim at odd v."""
    v = place(v)
    Ed = quadratic_twist(E, d)
    t = two_torsion_dim_in_Qv(Ed, v)
    if v.is_infinite:
        return max(t - 1, 0)
    if v.prime == 2:
        return t + 1
    return t


# --- the h-invariant ------------------------------------------------------------

def h_value(E: CurveQ, v, chi: LocalCharacter | str) -> int:
    """h_{E,v}(chi): codim of the intersection of twisted and untwisted local
    conditions inside the untwisted one.  Computable cases only; everything
    else raises UnsupportedLocalCase."""
    v = place(v)
    kind = chi if isinstance(chi, str) else chi.kind()
    if kind == "trivial":
        return 0
    if v.is_infinite:
        raise UnsupportedLocalCase("nontrivial character at the real place")
    p = v.prime
    good = p not in bad_primes(E)
    if kind == "unramified":
        if p != 2 and good:
            return 0
        if p != 2 and two_torsion_dim_in_Qv(E, v) == 0:
            return 0
        raise UnsupportedLocalCase(f"unramified nontrivial character at {p}")
    # ramified
    if p == 2:
        raise UnsupportedLocalCase("ramified character at 2")
    dim_tors = two_torsion_dim_in_Qv(E, v)
    if dim_tors == 0:
        return 0
    if good:
        return dim_tors
    raise UnsupportedLocalCase(
        f"ramified character at a bad prime {p} with local 2-torsion")


# --- explicit local Kummer images at odd good primes with full 2-torsion ---------

@dataclass(frozen=True)
class LocalConditionReport:
    place: Place
    dim_beta_trivial: int
    dim_beta_chi: int
    h: int
    prime_class: Optional[int] = None

    def __post_init__(self):
        if self.h > self.dim_beta_trivial:
            raise UnsupportedLocalCase(
                f"h = {self.h} exceeds dim beta(1) = {self.dim_beta_trivial}")


@dataclass(frozen=True)
class LocalKummerImage:
    prime: int
    character: LocalCharacter
    image: F2Subspace  # inside the 4-dim square-class ambient
    class_pairs: tuple[tuple[int, int], ...]  # canonical reps of all elements


def class_pair_to_vector(c1: SquareClass, c2: SquareClass, q: int) -> int:
    """(c1, c2) -> 4-bit vector (u1, q1, u2, q2) over the basis u, q per slot."""
    u = least_nonresidue(q)
    bits = 0
    for slot, cls in enumerate((c1, c2)):
        rep = cls.rep
        has_q = rep % q == 0
        unit = rep // q if has_q else rep
        if unit == u:
            bits |= 1 << (2 * slot)
        elif unit != 1:
            raise ArithmeticError_(f"not a canonical class rep at {q}: {cls.rep}")
        if has_q:
            bits |= 1 << (2 * slot + 1)
    return bits


def vector_to_class_pair(vec: int, q: int) -> tuple[int, int]:
    u = least_nonresidue(q)
    out = []
    for slot in range(2):
        rep = 1
        if (vec >> (2 * slot)) & 1:
            rep *= u
        if (vec >> (2 * slot + 1)) & 1:
            rep *= q
        out.append(rep)
    return out[0], out[1]


def pairing_local(x: tuple[SquareClass, SquareClass],
                  y: tuple[SquareClass, SquareClass], q: int) -> int:
    """F2 bit of (x1, y2)_q (x2, y1)_q: the local duality pairing in the
    full-2-torsion coordinates."""
    if any(c.place.prime != q for c in (*x, *y) if not c.place.is_infinite):
        raise ArithmeticError_("mismatched primes in local pairing")
    s = hilbert_symbol(x[0].rep, y[1].rep, q) * hilbert_symbol(x[1].rep, y[0].rep, q)
    return 0 if s == 1 else 1


def pairing_vectors(v: int, w: int, q: int) -> int:
    c1 = [square_class(r, q) for r in vector_to_class_pair(v, q)]
    c2 = [square_class(r, q) for r in vector_to_class_pair(w, q)]
    return pairing_local((c1[0], c1[1]), (c2[0], c2[1]), q)


def _lifted_roots(E: CurveQ, q: int, prec: int = 8) -> list[int]:
    """The three 2-division-cubic roots in Z_q mod q^prec (full local 2-torsion)."""
    cubic = reduced_cubic_mod_p(E, q)
    rts = modpoly.roots(cubic, q) if q < 2000 else _large_prime_roots(E, q)
    if len(rts) != 3:
        raise UnsupportedLocalCase(f"prime {q} does not have full local 2-torsion")
    A, B, C = minimal_scaled_model(E)

    def g(x):
        return ((x + A) * x + B) * x + C

    def gp(x):
        return (3 * x + 2 * A) * x + B

    out = []
    for r in rts:
        x = r
        mod = q
        while mod < q ** prec:
            mod = min(mod * mod, q ** prec)
            x = (x - g(x) * pow(gp(x), -1, mod)) % mod
        out.append(x)
    return out


def _large_prime_roots(E: CurveQ, q: int) -> list[int]:
    from .curves import _roots_via_split

    return _roots_via_split(reduced_cubic_mod_p(E, q), q)


def local_kummer_image(E: CurveQ, q: int, chi: LocalCharacter,
                       rng=None, max_exponent: int = 24) -> LocalKummerImage:
    """The image of the local Kummer map of the chi-twist of E at an odd good
    prime q with full local 2-torsion, as a subspace of the 4-dim ambient.

    Ramified chi: the twisted curve is 2-divisibility-free, so the image is
    exactly the span of the 2-torsion classes.  Trivial/unramified chi: the
    image is filled by torsion classes plus deterministic local point sampling,
    stopping at the dimension forced by the twisted local 2-torsion."""
    if prime_class(E, q) != 2:
        raise UnsupportedLocalCase(f"prime_class(E, {q}) != 2")
    prec = max_exponent + 4
    e1, e2, e3 = _lifted_roots(E, q, prec)
    modq = q ** prec
    t = chi.t

    def pair_vec(a: int, b: int) -> int:
        return class_pair_to_vector(square_class(a, q), square_class(b, q), q)

    # product-trick classes of the 2-torsion of the t-twisted model (roots t*e_i);
    # root differences are q-units, so lift differences carry exact classes
    d12, d13, d23 = e1 - e2, e1 - e3, e2 - e3
    tors_vecs = [pair_vec(d12 * d13, t * d12), pair_vec(t * (-d12), (-d12) * (-d23))]
    span = F2Subspace.from_vectors(4, tors_vecs)
    target = 2  # dim beta = dim of twisted local 2-torsion = 2 (full 2-torsion)
    if chi.is_ramified:
        if span.dim != target:
            raise PrecisionExhausted(
                f"torsion classes did not span the ramified image at {q}")
        return LocalKummerImage(q, chi, span,
                                tuple(vector_to_class_pair(v, q) for v in span.vectors()))
    # trivial or unramified-nontrivial character: sample local points of the
    # t-twist (t a unit class, so the model y^2 = (x - te1)(x - te2)(x - te3)
    # with integral t-lift has good reduction)
    tl = 1 if chi.is_trivial else least_nonresidue(q)
    f1, f2, f3 = tl * e1 % modq, tl * e2 % modq, tl * e3 % modq
    vecs = list(tors_vecs)
    for x in _sample_stream(q, (f1, f2, f3), max_exponent, rng):
        if span.dim >= target:
            break
        r1, r2, r3 = x - f1, x - f2, x - f3
        prod = r1 * r2 * r3
        if prod % modq == 0:
            continue  # too close to torsion at this precision; stream refines later
        v1 = valuation(prod, q)
        if v1 % 2:
            continue
        if legendre(prod // q ** v1 % q, q) != 1:
            continue
        vec = pair_vec(_unit_rep(r1, q, modq), _unit_rep(r2, q, modq))
        vecs.append(vec)
        span = F2Subspace.from_vectors(4, vecs)
    if span.dim != target:
        raise PrecisionExhausted(
            f"local Kummer image at {q} stuck at dim {span.dim} < {target}")
    return LocalKummerImage(q, chi, span,
                            tuple(vector_to_class_pair(v, q) for v in span.vectors()))


def _unit_rep(r: int, q: int, modq: int) -> int:
    if r % modq == 0:
        raise PrecisionExhausted(f"zero residue at precision {modq}")
    v = 0
    while r % q == 0:
        r //= q
        v += 1
    if q ** (v + 2) > modq:
        raise PrecisionExhausted(f"valuation {v} too close to precision at {q}")
    return (q ** (v % 2)) * (r % q)


def _sample_stream(q: int, roots: tuple[int, int, int], max_exponent: int,
                   rng=None):
    """Deterministic x-coordinates: residues 0..q-1, then refinements near the
    roots to increasing depth.  A caller-seeded rng reorders exploration
    (reproducible for a fixed seed) without changing coverage."""
    first = list(range(q))
    if rng is not None:
        rng.shuffle(first)
    yield from first
    for depth in range(1, max_exponent):
        for r in roots:
            base = r % q ** (depth + 1)
            for tshift in range(1, min(q, 8)):
                yield base + tshift * q ** depth


def character_kind_at(d: int, v) -> str:
    """'trivial' / 'unramified' / 'ramified' (or 'nontrivial' at oo) of chi_d at v."""
    v = place(v)
    if v.is_infinite:
        return "trivial" if d > 0 else "nontrivial"
    p = v.prime
    rep = square_class(d, p).rep
    if rep == 1:
        return "trivial"
    if p == 2:
        return "unramified" if rep == 5 else "ramified"
    return "ramified" if rep % p == 0 else "unramified"


def local_condition_report(E: CurveQ, d: int, v) -> LocalConditionReport:
    """Assemble the per-place report for the twist by d."""
    v = place(v)
    chi_kind = character_kind_at(d, v)
    pc = None
    if not v.is_infinite and v.prime != 2 and v.prime not in bad_primes(E):
        pc = prime_class(E, v.prime)
    dim_triv = dim_local_kummer(E, 1, v)
    dim_chi = dim_local_kummer(E, d, v)
    h = h_value(E, v, chi_kind) if chi_kind != "nontrivial" else None
    if h is None:
        raise UnsupportedLocalCase("nontrivial character at the real place")
    return LocalConditionReport(v, dim_triv, dim_chi, h, pc)
