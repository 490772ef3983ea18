"""Independent local-solvability oracle: exhaustive p-adic point search on the
descent torsors modulo p^k with a smooth-point Hensel certificate.

This is the second of the two routes deciding everywhere-local solvability
(the first being the square-class membership criteria in descent.py).  It is
exact but exponential in the residue degree, so it is meant for the small
primes of regression cases, not for the searched primes near 1e5.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Iterable

from .arith import INFINITY, place, valuation
from .curves import CurveQ, bad_primes, minimal_scaled_model
from .quadfield import QuadElem, is_square_in_completion, real_embedding_signs, splitting_type


class OracleUndecided(RuntimeError):
    pass


def _quadrics(roots, d1: int, d2: int):
    e1, e2, e3 = roots

    def Q1(w):
        z0, z1, z2, z3 = w
        return d1 * z1 * z1 - d2 * z2 * z2 - (e2 - e1) * z0 * z0

    def Q2(w):
        z0, z1, z2, z3 = w
        return d1 * z1 * z1 - d1 * d2 * z3 * z3 - (e3 - e1) * z0 * z0

    def jac(w):
        z0, z1, z2, z3 = w
        return ((-2 * (e2 - e1) * z0, 2 * d1 * z1, -2 * d2 * z2, 0),
                (-2 * (e3 - e1) * z0, 2 * d1 * z1, 0, -2 * d1 * d2 * z3))

    return Q1, Q2, jac


def _min_minor_val(jac_rows, p: int, cap: int) -> int:
    r1, r2 = jac_rows
    best = cap
    for i in range(4):
        for j in range(i + 1, 4):
            m = r1[i] * r2[j] - r1[j] * r2[i]
            if m:
                best = min(best, valuation(m, p))
    return best


def torsor_solvable_real(roots, d1: int, d2: int) -> bool:
    """Real solvability: some x with x - e_i in the closed sign class of
    d1, d2, d1 d2 respectively."""
    e1, e2, e3 = roots
    lo, mid, hi = sorted(roots)
    xs = [lo - 1, Fraction(lo + mid, 2), Fraction(mid + hi, 2), hi + 1, e1, e2, e3]
    for x in xs:
        t1, t2, t3 = x - e1, x - e2, x - e3
        if _sign_fits(t1, d1) and _sign_fits(t2, d2) and _sign_fits(t3, d1 * d2):
            return True
    return False


def _sign_fits(t, d) -> bool:
    return t == 0 or (t > 0) == (d > 0)


def torsor_solvable_padic(roots, d1: int, d2: int, p: int,
                          node_budget: int = 400000) -> bool:
    """Q_p-solvability of the two descent quadrics by digit DFS with a Hensel
    certificate; raises OracleUndecided if the search hits its caps."""
    Q1, Q2, jac = _quadrics(roots, d1, d2)
    e1, e2, e3 = roots
    content = 16 * d1 * d2 * (e1 - e2) * (e1 - e3) * (e2 - e3)
    cap = 2 * valuation(content, p) + 6
    nodes = 0

    def certified(w, depth) -> bool:
        q1, q2 = Q1(w), Q2(w)
        v1 = valuation(q1, p) if q1 else 10 ** 9
        v2 = valuation(q2, p) if q2 else 10 ** 9
        t = _min_minor_val(jac(w), p, cap)
        return min(v1, v2) > 2 * t and depth > 2 * t

    # normalize: some coordinate is a unit, fixed to 1
    for unit_pos in range(4):
        free0 = [i for i in range(4) if i != unit_pos]
        stack = []
        for digits in product(range(p), repeat=3):
            base = [0, 0, 0, 0]
            base[unit_pos] = 1
            for i, dg in zip(free0, digits):
                base[i] = dg
            stack.append((tuple(base), 1))
        while stack:
            w, depth = stack.pop()
            nodes += 1
            if nodes > node_budget:
                raise OracleUndecided(f"node budget exhausted at p={p}")
            mod = p ** depth
            if Q1(w) % mod or Q2(w) % mod:
                continue
            if certified(w, depth):
                return True
            if depth >= cap:
                raise OracleUndecided(f"depth cap {cap} hit at p={p}")
            step = p ** depth
            free = [i for i in range(4) if i != unit_pos]
            for digits in product(range(p), repeat=3):
                w2 = list(w)
                for i, dg in zip(free, digits):
                    w2[i] = w[i] + dg * step
                nmod = p ** (depth + 1)
                if Q1(tuple(w2)) % nmod == 0 and Q2(tuple(w2)) % nmod == 0:
                    stack.append((tuple(w2), depth + 1))
    return False


def torsor_locally_solvable(roots, d1: int, d2: int, v) -> bool:
    v = place(v)
    if v.is_infinite:
        return torsor_solvable_real(roots, d1, d2)
    return torsor_solvable_padic(roots, d1, d2, v.prime)


def complete_descent_oracle(E: CurveQ, d: int = 1) -> tuple[int, frozenset]:
    """Brute-force 2-descent by exhaustive torsor searches: every candidate
    pair over Q(S,2)^2 is tested at every place of S.  Returns (rank, the
    solvable pair set as squarefree pairs)."""
    from .curves import quadratic_twist
    from .descent import _rational_roots_sorted, QS2Group, PairAmbient

    Ed = quadratic_twist(E, d)
    roots = _rational_roots_sorted(Ed)
    if roots is None:
        raise OracleUndecided("oracle needs full rational 2-torsion")
    S = sorted(set(bad_primes(Ed)) | {2})
    qs2 = QS2Group(tuple(S))
    amb = PairAmbient(qs2)
    places = [INFINITY] + S
    good = set()
    for bits in range(1 << amb.dim):
        d1, d2 = amb.pair_of_bits(bits)
        if all(torsor_locally_solvable(roots, d1, d2, v) for v in places):
            good.add((d1, d2))
    count = len(good)
    if count & (count - 1):
        raise OracleUndecided(f"oracle pair set has non-2-power size {count}")
    return count.bit_length() - 1, frozenset(good)


def quadratic_descent_oracle(E: CurveQ, d: int = 1,
                             x_range: int = 400) -> tuple[int, tuple]:
    """Brute-force descent for one rational 2-torsion point: per-candidate
    witness search.  A candidate alpha is accepted at v iff some sampled local
    point's Kummer class matches alpha (exact square test of the quotient)."""
    from .curves import quadratic_twist
    from .descent import (_one_rational_root, _theta_of, _x_stream_p,
                          t_unit_group)
    from .arith import is_square_in_Qv, squarefree_part

    Ed = quadratic_twist(E, d)
    data = _one_rational_root(Ed)
    if data is None:
        raise OracleUndecided("oracle needs exactly one rational 2-torsion point")
    e, quad = data
    b, c = quad
    D = squarefree_part(b * b - 4 * c)
    theta = _theta_of(quad, D)
    S = sorted(set(bad_primes(Ed)) | {2})
    tu = t_unit_group(D, S)

    A3, B3, C3 = minimal_scaled_model(Ed)

    def cubic(x):
        return ((x + A3) * x + B3) * x + C3

    def cubic_d(x):
        return (3 * x + 2 * A3) * x + B3

    def oracle_x_stream(p, maxdepth=10):
        if p == 2:
            yield from _x_stream_p(2, (e, 0, 0))
            return
        for x in range(min(p, 1000)):
            yield x
            yield -x
        for r in range(min(p, 1000)):
            if cubic(r) % p:
                continue
            if cubic_d(r) % p:
                # simple root: refine around its Hensel lift
                x, mod = r, p
                for j in range(1, maxdepth):
                    mod *= p
                    x = (x - cubic(x) * pow(cubic_d(x), -1, mod)) % mod
                    for t in range(1, min(p, 8)):
                        yield x + t * (mod // p)
            else:
                # multiple root mod p (additive reduction): shallow full tree
                for j in (1, 2, 3):
                    for t in range(1, min(p, 60)):
                        yield r + t * p ** j
                        yield r - t * p ** j
        for m in (1, 2):
            for a in range(1, min(p, 30)):
                yield Fraction(a, p ** (2 * m))

    def witnesses(v):
        """Kummer classes of sampled local points at v, as field elements."""
        out = [QuadElem.of(e, 0, D) + (-1) * theta]
        v_ = place(v)
        if v_.is_infinite:
            xs: Iterable = [e + 1, e - 1, e + 10**6, -10**6]
        else:
            xs = oracle_x_stream(v_.prime)
        count = 0
        for x in xs:
            count += 1
            if count > 6000:
                break
            alpha = QuadElem.of(Fraction(x), 0, D) + (-1) * theta
            if alpha.norm() == 0:
                continue
            fx = (Fraction(x) - e) * alpha.norm()
            if fx == 0:
                continue
            if v_.is_infinite:
                if fx > 0:
                    out.append(alpha)
            elif is_square_in_Qv(fx, v_.prime):
                out.append(alpha)
        return out

    place_witnesses = {v: witnesses(v) for v in [INFINITY] + S}

    def locally_ok(alpha: QuadElem, v) -> bool:
        v_ = place(v)
        if v_.is_infinite and D < 0:
            return True
        for beta in place_witnesses[v]:
            if v_.is_infinite:
                if real_embedding_signs(alpha) == real_embedding_signs(beta):
                    return True
            else:
                p = v_.prime
                if splitting_type(D, p) == "split":
                    from .quadfield import local_square_class_pair

                    if local_square_class_pair(alpha, p) == local_square_class_pair(beta, p):
                        return True
                elif is_square_in_completion(alpha * beta, p):
                    return True
        return False

    good = []
    for bits in range(1 << tu.dim):
        alpha = QuadElem.of(1, 0, D)
        for i, g in enumerate(tu.basis):
            if (bits >> i) & 1:
                alpha = alpha * g
        if all(locally_ok(alpha, v) for v in [INFINITY] + S):
            good.append(alpha)
    count = len(good)
    if count & (count - 1):
        raise OracleUndecided(f"oracle class set has non-2-power size {count}")
    return count.bit_length() - 1, tuple(good)
