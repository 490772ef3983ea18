"""2-Selmer groups by explicit descent.

Complete 2-descent when the twisted curve has full rational 2-torsion
(candidates (d1, d2) in Q(S,2)^2, local conditions = membership in sampled
local Kummer images); descent over Q x Q(sqrt(D)) when the 2-division cubic
has exactly one rational root (candidates in the T-unit square classes of
the quadratic field); ingestion for irreducible cubics.  Strict / relaxed /
twisted variants modify the condition at one auxiliary prime, and the
Poitou-Tate rank identity and Kramer parity are verified on top.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .arith import (
    INFINITY,
    Place,
    REAL_PLACE,
    is_prime,
    is_square_in_Qv,
    is_squarefree,
    least_nonresidue,
    legendre,
    place,
    square_class,
    squarefree_part,
    valuation,
)
from .curves import (
    CurveQ,
    bad_primes,
    classify_two_torsion_field,
    minimal_scaled_model,
    quadratic_twist,
)
from .f2 import F2Subspace, zero_subspace
from .local import (
    LocalCharacter,
    UnsupportedLocalCase,
    PrecisionExhausted,
    class_pair_to_vector,
    h_value,
    pairing_vectors,
    prime_class,
    vector_to_class_pair,
)
from .quadfield import (
    QuadElem,
    TUnitGroup,
    is_square_in_completion,
    is_square_in_field,
    local_square_class_pair,
    real_embedding_signs,
    splitting_type,
    t_unit_group,
)


class DescentError(RuntimeError):
    pass


class MissingIngestedRank(DescentError):
    pass


# --- variants ----------------------------------------------------------------

@dataclass(frozen=True)
class SelmerVariant:
    mode: str = "classical"  # classical | strict | relaxed | twisted
    q: Optional[int] = None
    psi: Optional[LocalCharacter] = None

    def __post_init__(self):
        if self.mode not in ("classical", "strict", "relaxed", "twisted"):
            raise DescentError(f"unknown variant mode {self.mode}")
        if self.mode != "classical" and (self.q is None or self.q == 2 or not is_prime(self.q)):
            raise DescentError("variant needs an odd prime q")
        if self.mode == "twisted" and self.psi is None:
            raise DescentError("twisted variant needs a local character")


CLASSICAL = SelmerVariant()


def strict_at(q: int) -> SelmerVariant:
    return SelmerVariant("strict", q)


def relaxed_at(q: int) -> SelmerVariant:
    return SelmerVariant("relaxed", q)


def twisted_at(q: int, psi: LocalCharacter) -> SelmerVariant:
    return SelmerVariant("twisted", q, psi)


# --- Q(S, 2) -------------------------------------------------------------------

@dataclass(frozen=True)
class QS2Group:
    """Classes of rationals unramified outside S, modulo squares: basis
    {-1} followed by the finite primes of S in ascending order."""

    finite_primes: tuple[int, ...]

    @property
    def basis(self) -> tuple[int, ...]:
        return (-1,) + self.finite_primes

    @property
    def dim(self) -> int:
        return 1 + len(self.finite_primes)

    def element(self, bits: int) -> int:
        out = 1
        for i, g in enumerate(self.basis):
            if (bits >> i) & 1:
                out *= g
        return out

    def bits_of(self, r: Union[int, Fraction]) -> int:
        r = squarefree_part(r)
        bits = 0
        if r < 0:
            bits |= 1
            r = -r
        for i, p in enumerate(self.finite_primes):
            if r % p == 0:
                bits |= 1 << (i + 1)
                r //= p
        if r != 1:
            raise DescentError(f"class not supported on S: leftover {r}")
        return bits


def qs2_basis(S: Sequence) -> QS2Group:
    """Q(S,2) for a place set S containing 2 and oo."""
    finite = sorted({place(v).prime for v in S if not place(v).is_infinite})
    if 2 not in finite:
        raise DescentError("S must contain 2")
    if not any(place(v).is_infinite for v in S):
        raise DescentError("S must contain the real place")
    return QS2Group(tuple(finite))


# --- Selmer bases ----------------------------------------------------------------

@dataclass(frozen=True)
class SelmerBasis:
    curve: CurveQ
    twist: int
    S: tuple
    representation: str  # 'pairs' | 'quadratic' | 'opaque'
    elements: F2Subspace
    element_reps: tuple
    rank: int
    provenance: str
    ambient: Optional[object] = None
    variant: SelmerVariant = CLASSICAL

    def basis_reps(self):
        return self.element_reps

    def __repr__(self):
        return (f"SelmerBasis({self.curve.label or self.curve.ainvs()}, d={self.twist}, "
                f"rank={self.rank}, {self.representation}, {self.provenance}, "
                f"{self.variant.mode})")


# --- local images for complete descent -------------------------------------------

def _pair_rep(r1, r2, v) -> tuple[int, int]:
    return (square_class(r1, v).rep, square_class(r2, v).rep)


def _pair_mul(a: tuple[int, int], b: tuple[int, int], v) -> tuple[int, int]:
    return (square_class(Fraction(a[0]) * b[0], v).rep,
            square_class(Fraction(a[1]) * b[1], v).rep)


def _group_closure(pairs: Iterable[tuple[int, int]], v) -> frozenset:
    """Subgroup generated by class pairs inside (Q_v^x / squares)^2."""
    out = {_pair_rep(1, 1, v)}
    for g in pairs:
        if g in out:
            continue
        out |= {_pair_mul(g, h, v) for h in out}
    return frozenset(out)


def _image_dim(closure: frozenset) -> int:
    return len(closure).bit_length() - 1


def _torsion_pairs(roots: tuple[int, int, int]):
    e1, e2, e3 = roots
    return [((e1 - e2) * (e1 - e3), e1 - e2), (e2 - e1, (e2 - e1) * (e2 - e3))]


def _x_stream_p(p: int, roots, max_depth: int = 10):
    """Deterministic x-coordinate stream for local point sampling at p."""
    if p == 2:
        for m in range(4):
            den = 4 ** m
            for a in range(1, 2**9):
                if m and a % 2 == 0:
                    continue
                yield Fraction(a, den)
                yield Fraction(-a, den)
        for j in range(2, max_depth):
            for r in roots:
                for t in (1, 3, 5, 7):
                    yield r + t * 2 ** j
        return
    for x in range(min(p, 3000)):
        yield x
    for j in range(1, max_depth):
        for r in roots:
            for t in range(1, min(p, 8)):
                yield r + t * p ** j
    for m in (1, 2):
        for a in range(1, min(p, 30)):
            yield Fraction(a, p ** (2 * m))


def local_image_pairs(roots: tuple[int, int, int], v) -> frozenset:
    """The local Kummer image of y^2 = (x-e1)(x-e2)(x-e3) at v, as the set of
    canonical class-pair representatives of (x-e1, x-e2)."""
    v = place(v)
    e1, e2, e3 = roots
    if v.is_infinite:
        lo, mid, hi = sorted(roots)
        xs = [Fraction(lo + mid, 2), hi + 1]
        pairs = [_pair_rep(x - e1, x - e2, v) for x in xs]
        return _group_closure(pairs, v)
    p = v.prime
    target = 3 if p == 2 else 2
    pairs = [_pair_rep(*t, v) for t in _torsion_pairs(roots)]
    closure = _group_closure(pairs, v)
    if _image_dim(closure) >= target:
        return closure
    for x in _x_stream_p(p, roots):
        vals = (x - e1, x - e2, x - e3)
        prod = vals[0] * vals[1] * vals[2]
        if prod == 0:
            continue
        if not is_square_in_Qv(prod, v):
            continue
        closure = _group_closure(list(closure) + [_pair_rep(vals[0], vals[1], v)], v)
        if _image_dim(closure) >= target:
            return closure
    raise PrecisionExhausted(
        f"local image at {p} stuck at dim {_image_dim(closure)} < {target} "
        f"for roots {roots}")


def twisted_local_image_vectors(roots: tuple[int, int, int], q: int, t: int) -> F2Subspace:
    """beta(psi_t) at an odd good prime q in the 4-dim ambient, for the local
    twist by the class t (exact: the twisted curve's torsion classes span)."""
    e1, e2, e3 = roots
    vecs = [class_pair_to_vector(square_class((e1 - e2) * (e1 - e3), q),
                                 square_class(t * (e1 - e2), q), q),
            class_pair_to_vector(square_class(t * (e2 - e1), q),
                                 square_class((e2 - e1) * (e2 - e3), q), q)]
    return F2Subspace.from_vectors(4, vecs)


# --- complete 2-descent ------------------------------------------------------------

def _rational_roots_sorted(E: CurveQ) -> Optional[tuple[int, int, int]]:
    A, B, C = minimal_scaled_model(E)
    roots = []
    # rational roots of the integral monic cubic are integers dividing C
    from sympy import Poly, Symbol, factor_list

    x = Symbol("x")
    _, factors = factor_list(x**3 + A * x**2 + B * x + C, x)
    for f, _ in factors:
        pf = Poly(f, x)
        if pf.degree() == 1:
            a, b = pf.all_coeffs()
            r = Fraction(int(-b), int(a))
            if r.denominator != 1:
                return None
            roots.append(int(r))
    if len(roots) != 3:
        return None
    return tuple(sorted(roots))


@dataclass(frozen=True)
class PairAmbient:
    qs2: QS2Group

    @property
    def dim(self) -> int:
        return 2 * self.qs2.dim

    def pair_of_bits(self, bits: int) -> tuple[int, int]:
        m = self.qs2.dim
        return (self.qs2.element(bits & ((1 << m) - 1)),
                self.qs2.element(bits >> m))

    def bits_of_pair(self, d1, d2) -> int:
        m = self.qs2.dim
        return self.qs2.bits_of(d1) | (self.qs2.bits_of(d2) << m)


def complete_two_descent(E: CurveQ, d: int = 1,
                         variant: SelmerVariant = CLASSICAL,
                         spot_check_rng: Optional[random.Random] = None,
                         candidate_cap: int = 1 << 18) -> SelmerBasis:
    """Sel_2 of the twist E^d for curves with full rational 2-torsion."""
    Ed = quadratic_twist(E, d)
    roots = _rational_roots_sorted(Ed)
    if roots is None:
        raise DescentError("complete 2-descent needs full rational 2-torsion")
    S_primes = set(bad_primes(Ed)) | {2}
    if variant.mode != "classical":
        if variant.q in S_primes:
            raise DescentError(f"variant prime {variant.q} lies in the bad set")
        if prime_class(Ed, variant.q) != 2:
            raise DescentError(f"variant prime {variant.q} lacks full local 2-torsion")
    ambient_primes = sorted(S_primes | ({variant.q} if variant.mode != "classical" else set()))
    qs2 = QS2Group(tuple(ambient_primes))
    amb = PairAmbient(qs2)
    if (1 << amb.dim) > candidate_cap:
        raise DescentError(
            f"candidate enumeration 2^{amb.dim} exceeds the cap {candidate_cap}; "
            "the twist has too many bad primes for the exhaustive engine")

    conditions: dict[Place, frozenset] = {}
    for p in sorted(S_primes):
        conditions[place(p)] = local_image_pairs(roots, p)
    conditions[REAL_PLACE] = local_image_pairs(roots, INFINITY)
    q_condition = None
    if variant.mode == "strict":
        q_condition = frozenset({(1, 1)})
    elif variant.mode == "twisted":
        img = twisted_local_image_vectors(roots, variant.q, variant.psi.t)
        q_condition = frozenset(vector_to_class_pair(vec, variant.q)
                                for vec in img.vectors())
    # relaxed: no condition at q; classical: candidates have no q-support anyway

    tors_bits = [amb.bits_of_pair(*t) for t in _torsion_pairs(roots)]
    tors_span = F2Subspace.from_vectors(amb.dim, tors_bits)

    def passes(bits: int) -> bool:
        d1, d2 = amb.pair_of_bits(bits)
        for v, cond in conditions.items():
            if _pair_rep(d1, d2, v) not in cond:
                return False
        if q_condition is not None:
            if _pair_rep(d1, d2, variant.q) not in q_condition:
                return False
        return True

    # prune by the torsion subgroup compatible with the variant's q-condition
    # (for strict/twisted modes the torsion image need not pass at q)
    pruning_span = F2Subspace.from_vectors(
        amb.dim, [t for t in tors_span.vectors() if t and passes(t)])

    solvable: list[int] = []
    seen_cosets: set[int] = set()
    for bits in range(1 << amb.dim):
        rep = min(bits ^ t for t in pruning_span.vectors())
        if rep in seen_cosets:
            continue
        seen_cosets.add(rep)
        if passes(rep):
            solvable.append(rep)
    # the Selmer set is a union of pruning-subgroup cosets, closed under products
    vectors = set()
    for bits in solvable:
        for t in pruning_span.vectors():
            vectors.add(bits ^ t)
    group = F2Subspace.from_vectors(amb.dim, sorted(vectors))
    for vec in group.vectors():
        if vec not in vectors:
            raise DescentError("local-solvability set is not a group; descent bug")

    reps = tuple(amb.pair_of_bits(b) for b in group.basis)
    basis = SelmerBasis(Ed, d, tuple([INFINITY] + ambient_primes), "pairs",
                        group, reps, group.dim, "internal", amb, variant)
    _reverify_pairs(basis, conditions, q_condition, variant, spot_check_rng)
    return basis


def _reverify_pairs(basis: SelmerBasis, conditions, q_condition, variant,
                    rng: Optional[random.Random]):
    """Every returned basis element must satisfy its defining local conditions."""
    for d1, d2 in basis.element_reps:
        for v, cond in conditions.items():
            if _pair_rep(d1, d2, v) not in cond:
                raise DescentError(f"re-verification failed at {v} for ({d1},{d2})")
        if q_condition is not None and _pair_rep(d1, d2, variant.q) not in q_condition:
            raise DescentError(f"re-verification failed at q={variant.q}")
    rng = rng or random.Random(20140509)
    S = {place(v).prime for v in basis.S if not place(v).is_infinite}
    checked = 0
    p = 0
    while checked < 3:
        p = rng.randrange(3, 500)
        if not is_prime(p) or p in S:
            continue
        for d1, d2 in basis.element_reps:
            # good odd prime outside S: image is the full unramified subspace
            if valuation(Fraction(d1), p) % 2 or valuation(Fraction(d2), p) % 2:
                raise DescentError(f"spot check failed at {p}")
        checked += 1


# --- descent over Q x Q(sqrt(D)) -------------------------------------------------

def _one_rational_root(E: CurveQ) -> Optional[tuple[int, tuple[int, int]]]:
    """(e, (b, c)) with integral cubic = (X - e)(X^2 + bX + c), g irreducible."""
    A, B, C = minimal_scaled_model(E)
    from sympy import Poly, Symbol, factor_list

    x = Symbol("x")
    _, factors = factor_list(x**3 + A * x**2 + B * x + C, x)
    lin, quad = None, None
    for f, _ in factors:
        pf = Poly(f, x)
        if pf.degree() == 1:
            a, b = (int(c) for c in pf.all_coeffs())
            if a != 1:
                return None
            lin = -b
        elif pf.degree() == 2:
            qa, qb, qc = (int(c) for c in pf.all_coeffs())
            if qa != 1:
                return None
            quad = (qb, qc)
    if lin is None or quad is None:
        return None
    return lin, quad


def _theta_of(quad: tuple[int, int], D: int) -> QuadElem:
    b, c = quad
    m2 = (b * b - 4 * c) // D
    from math import isqrt

    m = isqrt(m2)
    assert m * m == m2, "discriminant bookkeeping"
    return QuadElem.of(Fraction(-b, 2), Fraction(m, 2), D)


def _split_theta_lifts(theta: QuadElem, p: int, prec: int) -> tuple[int, int]:
    """Integer residues mod p^prec of the two embeddings of theta (split p)."""
    from .quadfield import _split_sqrt

    mod = p ** prec
    s = _split_sqrt(theta.D, p, prec + 1)
    if p != 2:
        xr = theta.x.numerator * pow(theta.x.denominator, -1, mod) % mod
        yr = theta.y.numerator * pow(theta.y.denominator, -1, mod) % mod
        return (xr + yr * s) % mod, (xr - yr * s) % mod
    # p = 2: coordinates are half-integers; the numerator -b + m s is even
    b = int(-2 * theta.x)
    m = int(2 * theta.y)
    big = 2 ** (prec + 1)
    t1 = ((-b + m * (s % big)) % big) // 2 % mod
    t2 = ((-b - m * (s % big)) % big) // 2 % mod
    return t1, t2


def _residue_pair_rep(a: int, b: int, p: int, prec: int) -> tuple[int, int]:
    """Canonical class pair of residue integers with valuation guard."""
    out = []
    mod = p ** prec
    for r in (a, b):
        r %= mod
        if r == 0:
            raise PrecisionExhausted(f"residue hit zero at precision {prec} ({p})")
        v = 0
        while r % p == 0:
            r //= p
            v += 1
        if p ** (v + 3) > mod:
            raise PrecisionExhausted(f"valuation {v} too close to precision ({p})")
        out.append(square_class(p ** (v % 2) * r, p).rep)
    return out[0], out[1]


def _split_torsion_pairs(e: int, theta: QuadElem, p: int, t: int, prec: int):
    """Image pairs of the three 2-torsion points of the t-twisted model at a
    split place, in the coordinates (x - t*theta_1, x - t*theta_2)."""
    t1l, t2l = _split_theta_lifts(theta, p, prec)
    d12 = t1l - t2l
    pairs = [
        _residue_pair_rep(t * (e - t1l), t * (e - t2l), p, prec),          # (t e, 0)
        _residue_pair_rep((t1l - e) * d12, t * d12, p, prec),              # (t theta1, 0)
        _residue_pair_rep(-t * d12, -(t2l - e) * d12, p, prec),            # (t theta2, 0)
    ]
    return pairs


def _pair_closure_at(pairs, p) -> frozenset:
    closure = {(1, 1)}
    changed = True
    items = list(pairs)
    while changed:
        changed = False
        for g in items + list(closure):
            for h in list(closure):
                prod = (square_class(Fraction(g[0]) * h[0], p).rep,
                        square_class(Fraction(g[1]) * h[1], p).rep)
                if prod not in closure:
                    closure.add(prod)
                    changed = True
    return frozenset(closure)


@dataclass(frozen=True)
class QuadAmbient:
    tu: TUnitGroup
    theta: QuadElem
    rational_root: int

    @property
    def dim(self) -> int:
        return self.tu.dim

    def element(self, bits: int) -> QuadElem:
        out = QuadElem.of(1, 0, self.tu.D)
        for i, g in enumerate(self.tu.basis):
            if (bits >> i) & 1:
                out = out * g
        return out


class _QuadCondition:
    """Membership test at one rational place for quadratic-field classes.

    kind 'split': data = frozenset of embedding class pairs; candidates are
    tested through their precomputed pair classes.  kind 'field': data = the
    closure list of image representatives as exact field elements; membership
    is an exact square test of quotients.  kind 'signs': data = allowed sign
    pairs at the two real embeddings.  kind 'none': no condition."""

    def __init__(self, kind: str, data, v):
        self.kind = kind
        self.data = data
        self.v = place(v)

    def contains(self, alpha: QuadElem) -> bool:
        if self.kind == "none":
            return True
        if self.kind == "signs":
            return tuple(real_embedding_signs(alpha)) in self.data
        if self.kind == "split":
            c1, c2 = local_square_class_pair(alpha, self.v.prime)
            return (c1.rep, c2.rep) in self.data
        return any(is_square_in_completion(alpha * beta, self.v) for beta in self.data)


def _quad_closure_elems(elems: list[QuadElem], v, D: int) -> list[QuadElem]:
    out = [QuadElem.of(1, 0, D)]
    for g in elems:
        if any(is_square_in_completion(g * o, v) for o in out):
            continue
        out += [g * o for o in out]
    return out


def _quad_local_condition(e: int, theta: QuadElem, D: int, Ed_disc, v,
                          t: int = 1) -> _QuadCondition:
    """The local Kummer image of the t-twist at v as a membership test."""
    v = place(v)
    if v.is_infinite:
        if D < 0:
            return _QuadCondition("none", None, v)
        # D > 0: sign pairs; the cubic has 3 real roots iff disc > 0 for t = 1,
        # and the image always contains the signs of the torsion class
        sign_target = 1 if Ed_disc > 0 else 0
        sams = [QuadElem.of(t * e, 0, D) + (-t) * theta]
        x = t * e
        step = 1
        while _sign_dim(sams) < sign_target and step < 10**6:
            for cand in (x + step, x - step):
                alpha = QuadElem.of(Fraction(cand), 0, D) + (-t) * theta
                fx = (Fraction(cand) - t * e) * alpha.norm()
                if fx > 0 and alpha.norm() != 0:
                    sams.append(alpha)
            step *= 2
        if _sign_dim(sams) < sign_target:
            raise PrecisionExhausted("real sampling failed")
        signs = {(1, 1)}
        for a in sams:
            signs |= {_sign_mul(s, tuple(real_embedding_signs(a))) for s in signs}
        return _QuadCondition("signs", frozenset(signs), v)
    p = v.prime
    tors_dim = 1 + (1 if is_square_in_Qv(D, p) else 0)
    target = tors_dim + (1 if p == 2 else 0)
    if splitting_type(D, p) == "split":
        prec = 14
        pairs = list(_split_torsion_pairs(e, theta, p, t, prec))
        closure = _pair_closure_at(pairs, p)
        if _f2_size_dim(len(closure)) < target:
            t1l, t2l = _split_theta_lifts(theta, p, prec)
            centers = (t * e, t * t1l % p ** prec, t * t2l % p ** prec)
            for x in _x_stream_p(p, centers):
                alpha = QuadElem.of(Fraction(x) - t * theta.x, -t * theta.y, D)
                if alpha.norm() == 0:
                    continue
                fx = (Fraction(x) - t * e) * alpha.norm()  # exact f_t(x)
                if fx == 0 or not is_square_in_Qv(fx, p):
                    continue
                pair = _residue_pair_rep_frac(Fraction(x) - t * t1l,
                                              Fraction(x) - t * t2l, p, prec)
                if pair is None:
                    continue
                closure = _pair_closure_at(list(closure) + [pair], p)
                if _f2_size_dim(len(closure)) >= target:
                    break
        if _f2_size_dim(len(closure)) < target:
            raise PrecisionExhausted(f"split image at {p} below dim {target}")
        return _QuadCondition("split", closure, v)
    # inert or ramified p: exact field-element representatives
    sams: list[QuadElem] = []
    tors = QuadElem.of(t * e, 0, D) + (-t) * theta
    if not tors.is_zero and tors.norm() != 0:
        sams.append(tors)
    closure = _quad_closure_elems(sams, v, D)
    if _f2_size_dim(len(closure)) < target:
        for x in _x_stream_p(p, (t * e, 0, 0)):
            alpha = QuadElem.of(Fraction(x), 0, D) + (-t) * theta
            if alpha.norm() == 0:
                continue
            fx = (Fraction(x) - t * e) * alpha.norm()
            if fx == 0 or not is_square_in_Qv(fx, p):
                continue
            if any(is_square_in_completion(alpha * o, v) for o in closure):
                continue
            sams.append(alpha)
            closure = _quad_closure_elems(sams, v, D)
            if _f2_size_dim(len(closure)) >= target:
                break
    if _f2_size_dim(len(closure)) < target:
        raise PrecisionExhausted(f"local image at {p} below dim {target}")
    return _QuadCondition("field", closure, v)


def _residue_pair_rep_frac(a, b, p: int, prec: int):
    """Class pair of exact rationals, or None when precision-ambiguous."""
    out = []
    for r in (Fraction(a), Fraction(b)):
        if r == 0:
            return None
        v = valuation(r, p)
        if abs(v) + 3 > prec:
            return None
        unit = r / p ** v
        if p == 2:
            from .arith import _REP2, _unit_mod8

            out.append(2 ** (v % 2) * _REP2[_unit_mod8(unit)])
        else:
            lg = legendre(unit.numerator * pow(unit.denominator, -1, p) % p, p)
            out.append(p ** (v % 2) * (1 if lg == 1 else least_nonresidue(p)))
    return out[0], out[1]


def _sign_mul(a, b):
    return (a[0] * b[0], a[1] * b[1])


def _sign_dim(sams) -> int:
    signs = {(1, 1)}
    for a in sams:
        signs |= {_sign_mul(s, tuple(real_embedding_signs(a))) for s in signs}
    return _f2_size_dim(len(signs))


def _f2_size_dim(n: int) -> int:
    return n.bit_length() - 1


def quadratic_field_descent(E: CurveQ, d: int = 1,
                            variant: SelmerVariant = CLASSICAL,
                            candidate_cap: int = 1 << 18) -> SelmerBasis:
    """Sel_2 of E^d for curves whose 2-division cubic has exactly one rational
    root, by descent over the etale algebra Q x Q(sqrt(D))."""
    Ed = quadratic_twist(E, d)
    split_data = _one_rational_root(Ed)
    if split_data is None:
        raise DescentError("quadratic-field descent needs exactly one rational 2-torsion point")
    e, quad = split_data
    b, c = quad
    D = squarefree_part(b * b - 4 * c)
    if abs(D) > 10**6:
        raise DescentError(
            f"quadratic field discriminant {D} exceeds the configured bound; "
            "ingest externally computed ranks instead")
    theta = _theta_of(quad, D)
    S_primes = set(bad_primes(Ed)) | {2}
    if variant.mode != "classical":
        if variant.q in S_primes:
            raise DescentError(f"variant prime {variant.q} lies in the bad set")
        if prime_class(Ed, variant.q) != 2:
            raise DescentError(f"variant prime {variant.q} lacks full local 2-torsion")
    ambient_primes = sorted(S_primes | ({variant.q} if variant.mode != "classical" else set()))
    tu = t_unit_group(D, ambient_primes)
    amb = QuadAmbient(tu, theta, e)
    if (1 << amb.dim) > candidate_cap:
        raise DescentError(
            f"candidate enumeration 2^{amb.dim} exceeds the cap {candidate_cap}")

    disc = Ed.discriminant
    conditions: list[_QuadCondition] = [
        _quad_local_condition(e, theta, D, disc, INFINITY)]
    for p in sorted(S_primes):
        conditions.append(_quad_local_condition(e, theta, D, disc, p))
    q_condition: Optional[_QuadCondition] = None
    if variant.mode == "strict":
        q_condition = _QuadCondition("split", frozenset({(1, 1)}), variant.q)
    elif variant.mode == "twisted":
        prec = 14
        pairs = _split_torsion_pairs(e, theta, variant.q, variant.psi.t, prec)
        closure = _pair_closure_at(pairs, variant.q)
        if _f2_size_dim(len(closure)) != 2:
            raise DescentError("twisted condition did not have dimension 2")
        q_condition = _QuadCondition("split", closure, variant.q)

    tors_alpha = QuadElem.of(e, 0, D) + (-1) * theta  # e - theta, the torsion class
    tors_bits = _express_in_basis(tors_alpha, tu)

    def passes(alpha: QuadElem) -> bool:
        if not all(cond.contains(alpha) for cond in conditions):
            return False
        return q_condition is None or q_condition.contains(alpha)

    # prune by the torsion class only when it satisfies the variant condition
    use_tors = tors_bits and passes(amb.element(tors_bits))
    solvable_bits = []
    seen = set()
    for bits in range(1 << amb.dim):
        rep = min(bits, bits ^ tors_bits) if use_tors else bits
        if rep in seen:
            continue
        seen.add(rep)
        if passes(amb.element(rep)):
            solvable_bits.append(rep)
    vectors = set()
    for bits in solvable_bits:
        vectors.add(bits)
        if use_tors:
            vectors.add(bits ^ tors_bits)
    group = F2Subspace.from_vectors(amb.dim, sorted(vectors))
    for vec in group.vectors():
        if vec not in vectors:
            raise DescentError("quadratic descent set is not a group; descent bug")
    reps = tuple(amb.element(bv) for bv in group.basis)
    basis = SelmerBasis(Ed, d, tuple([INFINITY] + ambient_primes), "quadratic",
                        group, reps, group.dim, "internal", amb, variant)
    for alpha in reps:  # re-verification of the defining conditions
        for cond in conditions:
            if not cond.contains(alpha):
                raise DescentError(f"re-verification failed at {cond.v}")
        if q_condition is not None and not q_condition.contains(alpha):
            raise DescentError(f"re-verification failed at q={variant.q}")
    return basis


def _express_in_basis(alpha: QuadElem, tu: TUnitGroup) -> int:
    """Exponent bits of alpha's class over the T-unit basis (0 if outside)."""
    for bits in range(1 << tu.dim):
        prod = alpha
        for i, g in enumerate(tu.basis):
            if (bits >> i) & 1:
                prod = prod * g
        if is_square_in_field(prod):
            return bits
    raise DescentError("torsion class is outside the T-unit ambient; bad S")


# --- dispatch, restriction, Poitou-Tate, Kramer ----------------------------------

def selmer(E: CurveQ, d: int = 1, backend: str = "auto",
           variant: SelmerVariant = CLASSICAL,
           datastore=None, candidate_cap: int = 1 << 18) -> SelmerBasis:
    """Sel_2(E^d) dispatched on the 2-torsion degree of the twisted curve:
    complete descent (degree 1), quadratic-field descent (degree 2), or an
    ingested rank (degree 3 / 6)."""
    Ed = quadratic_twist(E, d)
    degree = classify_two_torsion_field(Ed).degree
    if degree == 1 and backend != "ingested":
        return complete_two_descent(E, d, variant, candidate_cap=candidate_cap)
    if degree == 2 and backend != "ingested":
        return quadratic_field_descent(E, d, variant, candidate_cap=candidate_cap)
    if backend == "internal-only":
        raise MissingIngestedRank(
            f"internal descent unavailable for 2-torsion degree {degree} "
            f"({Ed.label or Ed.ainvs()}); supply ingested ranks")
    if variant.mode != "classical":
        raise MissingIngestedRank("variants need an explicit descent backend")
    label = E.label
    if datastore is None or label is None or datastore.lookup(label, d) is None:
        raise MissingIngestedRank(
            f"no ingested rank for ({label!r}, d={d}); add a record "
            f"'{label or '<label>'} : {d} : <rank>'")
    rank = datastore.lookup(label, d)
    return SelmerBasis(Ed, d, (), "opaque", zero_subspace(0), (), rank,
                       f"ingested({datastore.source})")


def res_q(basis: SelmerBasis, q: int) -> F2Subspace:
    """Restriction of an explicit Selmer basis to the 4-dim ambient at q."""
    if basis.representation == "opaque":
        raise DescentError("cannot restrict an opaque (ingested) Selmer group")
    vecs = []
    for rep in basis.element_reps:
        vecs.append(_res_vector(basis, rep, q))
    return F2Subspace.from_vectors(4, vecs)


def _res_vector(basis: SelmerBasis, rep, q: int) -> int:
    if basis.representation == "pairs":
        d1, d2 = rep
        return class_pair_to_vector(square_class(d1, q), square_class(d2, q), q)
    c1, c2 = local_square_class_pair(rep, q)
    return class_pair_to_vector(c1, c2, q)


@dataclass(frozen=True)
class PoitouTateReport:
    curve: CurveQ
    twist: int
    q: int
    dim_strict: int
    dim_classical: int
    dim_relaxed: int
    res_relaxed: F2Subspace
    gap_ok: bool
    lagrangian_ok: bool
    chain_ok: bool

    @property
    def ok(self) -> bool:
        return self.gap_ok and self.lagrangian_ok and self.chain_ok


def verify_ptd(E: CurveQ, d: int, q: int) -> PoitouTateReport:
    """Relaxed minus strict = 2, with the relaxed restriction at q a
    2-dimensional self-orthogonal subspace under the local pairing."""
    strict = selmer(E, d, variant=strict_at(q))
    classical = selmer(E, d)
    relaxed = selmer(E, d, variant=relaxed_at(q))
    rr = res_q(relaxed, q)
    gap_ok = relaxed.rank - strict.rank == 2
    lagr_ok = rr.dim == 2 and all(
        pairing_vectors(v, w, q) == 0 for v in rr.vectors() for w in rr.vectors())
    chain_ok = strict.rank <= classical.rank <= relaxed.rank
    chain_ok = chain_ok and _subspace_embeds(strict, classical) and \
        _subspace_embeds(classical, relaxed)
    return PoitouTateReport(quadratic_twist(E, d), d, q, strict.rank,
                            classical.rank, relaxed.rank, rr, gap_ok, lagr_ok, chain_ok)


def _subspace_embeds(small: SelmerBasis, big: SelmerBasis) -> bool:
    """Whether every element of the smaller Selmer group lies in the bigger one
    (compared through canonical class representatives)."""
    if small.representation != big.representation:
        return False
    if small.representation == "pairs":
        big_set = {tuple(map(squarefree_part, rep))
                   for rep in _all_pair_reps(big)}
        return all(tuple(map(squarefree_part, rep)) in big_set
                   for rep in _all_pair_reps(small))
    big_elems = _all_quad_reps(big)
    for rep in _all_quad_reps(small):
        if not any(is_square_in_field(rep * other) for other in big_elems):
            return False
    return True


def _all_pair_reps(basis: SelmerBasis):
    amb: PairAmbient = basis.ambient
    return [amb.pair_of_bits(v) for v in basis.elements.vectors()]


def _all_quad_reps(basis: SelmerBasis):
    amb: QuadAmbient = basis.ambient
    return [amb.element(v) for v in basis.elements.vectors()]


@dataclass(frozen=True)
class KramerParityReport:
    curve: CurveQ
    twist: int
    rank_base: int
    rank_twist: int
    h_sum: int
    h_by_place: tuple
    parity_ok: bool


def kramer_parity_check(E: CurveQ, d: int) -> KramerParityReport:
    """r2(E) - r2(E^d) = sum_v h_{E,v}((chi_d)_v) mod 2, for twists whose
    character is trivial at every bad place of E (admissible family)."""
    if d == 0 or not is_squarefree(d):
        raise DescentError("twist must be squarefree nonzero")
    S_places = [INFINITY, 2] + [p for p in bad_primes(E) if p != 2]
    for v in S_places:
        if not is_square_in_Qv(d, v):
            raise UnsupportedLocalCase(
                f"twist {d} is not trivial at the bad place {v}; inadmissible")
    base = selmer(E, 1)
    twisted = selmer(E, d)
    h_terms = []
    total = 0
    from sympy import factorint

    for p in sorted(factorint(abs(d))):
        h = h_value(E, p, "ramified")
        h_terms.append((p, h))
        total += h
    ok = (base.rank - twisted.rank - total) % 2 == 0
    return KramerParityReport(E, d, base.rank, twisted.rank, total,
                              tuple(h_terms), ok)
