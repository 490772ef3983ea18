"""Acceptance suite: one test per criterion, each printing a pass/fail line
with its measured runtime.  Tolerances and bounds are pinned here and nowhere
else; every expected value is either exhaustively enumerated in-test or
produced by an independent second route.
"""

import random
import time

import pytest

from twoselmer.arith import INFINITY, hilbert_product_places, hilbert_symbol
from twoselmer.curves import CurveQ, bad_primes, discriminant
from twoselmer.datastore import Datastore
from twoselmer.descent import (
    complete_two_descent,
    kramer_parity_check,
    res_q,
    selmer,
    verify_ptd,
)
from twoselmer.f2 import F2Subspace, count_disjoint_lagrangians, standard_metabolic
from twoselmer.local import pairing_vectors, prime_class
from twoselmer.localsolve import complete_descent_oracle
from twoselmer.procedures import demo_case2, gap_amplifier, twist_trichotomy

E_MX = CurveQ.short(-1, 0, "mx")
E_PX = CurveQ.short(1, 0, "px")
E_331 = CurveQ.short(-3, -1, "c331")
E_M2 = CurveQ.short(0, -2, "m2")


def _report(num, ok, elapsed, limit, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num}: {status} ({elapsed:.2f}s / limit {limit}s) {detail}")
    assert ok, detail
    assert elapsed < limit, f"runtime {elapsed:.2f}s exceeded {limit}s"


def test_acceptance_1_lagrangian_counts():
    t0 = time.monotonic()
    results = []
    for n, expected in ((1, 1), (2, 2), (3, 8)):
        space = standard_metabolic(n)
        X = F2Subspace.from_vectors(2 * n, [1 << (2 * i) for i in range(n)])
        results.append(count_disjoint_lagrangians(space, X) == expected)
    _report(1, all(results), time.monotonic() - t0, 1.0,
            "counts 1, 2, 8 by exhaustive enumeration")


def test_acceptance_2_hilbert_product_formula():
    t0 = time.monotonic()
    rng = random.Random(20140509)
    ok = True
    for _ in range(200):
        a = rng.randint(-10**4, 10**4) or 7
        b = rng.randint(-10**4, 10**4) or -5
        prod = 1
        for v in hilbert_product_places(a, b):
            prod *= hilbert_symbol(a, b, v)
        ok = ok and prod == 1
    for _ in range(200):
        a, b, c = (rng.randint(-500, 500) or 3 for _ in range(3))
        for v in (INFINITY, 2, 3, 5, 7, 97):
            ok = ok and hilbert_symbol(a, b, v) == hilbert_symbol(b, a, v)
            ok = ok and hilbert_symbol(a * c, b, v) == \
                hilbert_symbol(a, b, v) * hilbert_symbol(c, b, v)
    _report(2, ok, time.monotonic() - t0, 5.0,
            "product formula on 200 pairs; symmetry/bilinearity on 200 triples")


def test_acceptance_3_descent_oracle():
    t0 = time.monotonic()
    primary = complete_two_descent(E_MX)
    rank_oracle, pairs_oracle = complete_descent_oracle(E_MX)
    prim_pairs = frozenset(primary.ambient.pair_of_bits(v)
                           for v in primary.elements.vectors())
    ok = primary.rank == 2 and rank_oracle == 2 and prim_pairs == pairs_oracle
    _report(3, ok, time.monotonic() - t0, 10.0,
            f"rank 2 from both engines; pair sets identical ({len(prim_pairs)} classes)")


def test_acceptance_4_poitou_tate():
    t0 = time.monotonic()
    ok = True
    details = []
    qs = []
    q = 2
    while len(qs) < 5:
        q += 1
        from twoselmer.arith import is_prime

        if is_prime(q) and q not in bad_primes(E_MX) and prime_class(E_MX, q) == 2:
            qs.append(q)
    for q in qs:
        rep = verify_ptd(E_MX, 1, q)
        lagr = rep.res_relaxed.dim == 2 and all(
            pairing_vectors(v, w, q) == 0
            for v in rep.res_relaxed.vectors() for w in rep.res_relaxed.vectors())
        ok = ok and rep.dim_relaxed - rep.dim_strict == 2 and lagr
        details.append(f"q={q}:{rep.dim_strict}/{rep.dim_classical}/{rep.dim_relaxed}")
    _report(4, ok, time.monotonic() - t0, 120.0, "; ".join(details))


def _admissible_twists(E, count):
    from twoselmer.arith import is_square_in_Qv, is_squarefree

    S_odd = [p for p in bad_primes(E) if p != 2]
    out = []
    d = 1
    while len(out) < count:
        d += 8
        if not is_squarefree(d):
            continue
        if any(not is_square_in_Qv(d, p) for p in S_odd):
            continue
        out.append(d)
    return out


def test_acceptance_5_kramer_parity():
    t0 = time.monotonic()
    failures = 0
    checked = 0
    for E in (E_MX, E_PX):
        for d in _admissible_twists(E, 25):
            rep = kramer_parity_check(E, d)
            checked += 1
            if not rep.parity_ok:
                failures += 1
    _report(5, failures == 0 and checked == 50, time.monotonic() - t0, 600.0,
            f"{checked} admissible twists, {failures} failures")


def test_acceptance_6_trichotomy():
    t0 = time.monotonic()
    ok = True
    vanishing = [17, 41, 73]      # res_q(Sel) = 0 for mx at q = 1 mod 8
    nonvanishing = [3, 5, 7]      # res_q(Sel) != 0 otherwise
    for q in vanishing:
        rep = twist_trichotomy(E_MX, q)
        ok = ok and rep.branch == "vanishing" and rep.ok
    for q in nonvanishing:
        rep = twist_trichotomy(E_MX, q)
        ok = ok and rep.branch == "nonvanishing" and rep.ok
    _report(6, ok, time.monotonic() - t0, 300.0,
            "clause (i)+(ii) at 3 primes, clause (iii) at 3 primes, zero violations")


def test_acceptance_7_case2():
    t0 = time.monotonic()
    cert = demo_case2(E_MX, E_331, prime_bound=10**5)
    eb, ea, prov = cert.ranks["E"]
    h_A = [h for (p, c, h) in cert.h_table if c == "A"]
    ok = (cert.certified and ea == eb + 2 and prov == "internal descent"
          and all(h == 0 for h in h_A))
    _report(7, ok, time.monotonic() - t0, 300.0,
            f"q = {cert.prime}, r2(E): {eb} -> {ea}, all h_A = 0")


def test_acceptance_8_case3_gap4():
    t0 = time.monotonic()
    certs = gap_amplifier(E_MX, E_PX, 4, prime_bound=10**5, twist_bound=10**6)
    gained = 0
    ok = len(certs) <= 2
    for cert in certs:
        ok = ok and cert.certified and abs(cert.chi.d) <= 10**6
        (eb, ea, _), (ab, aa, _) = cert.ranks["E"], cert.ranks["A"]
        gained += (ea - aa) - (eb - ab)
    ok = ok and gained >= 4
    _report(8, ok, time.monotonic() - t0, 900.0,
            f"{len(certs)} rounds, certified gap increase {gained}, "
            f"twists {[c.chi.d for c in certs]}")


def test_acceptance_9_delta_kernel_sampling():
    t0 = time.monotonic()
    from twoselmer.arith import is_prime, is_square_in_Qv, legendre, squarefree_part

    S_units = [-1, 2, -2, 3, -3, 6, -6]
    span = {squarefree_part(discriminant(E_331)), squarefree_part(discriminant(E_M2))}
    span |= {squarefree_part(a * b) for a in span for b in span}
    outside = [a for a in S_units if a not in span]
    killed = {}
    p0 = []
    q = 3
    while q < 10**5 and (len(p0) < 50 or any(a not in killed for a in outside)):
        q += 2
        if not is_prime(q) or q in bad_primes(E_331) or q in bad_primes(E_M2):
            continue
        if prime_class(E_331, q) != 0 or prime_class(E_M2, q) != 0:
            continue
        p0.append(q)
        for a in outside:
            if a not in killed and legendre(a % q, q) == -1:
                killed[a] = q
    survivors = all(is_square_in_Qv(discriminant(E_331), q) and
                    is_square_in_Qv(discriminant(E_M2), q) for q in p0[:50])
    ok = len(p0) >= 50 and survivors and all(a in killed for a in outside)
    _report(9, ok, time.monotonic() - t0, 300.0,
            f"{len(outside)} classes killed at P0 primes {sorted(killed.values())[:4]}...; "
            f"both discriminant classes survive at 50 samples")


def test_acceptance_10_no_infinitude_claims():
    # the paper-level "infinitely many" conclusions are out of desk-scale reach;
    # this suite substitutes witness production (criteria 7-8) plus the property
    # suites.  Here we pin that substitution: certificates carry only finitely
    # many concrete witnesses and never claim infinitude.
    t0 = time.monotonic()
    cert = demo_case2(E_MX, E_331)
    texts = [cert.summary()] + [c.detail for c in cert.claims]
    ok = cert.certified and all("infinite" not in s.lower() for s in texts)
    ok = ok and isinstance(cert.prime, int) and cert.chi.d != 0
    _report(10, ok, time.monotonic() - t0, 300.0,
            "witness-production substitutes for infinitude; certificates are finite")
