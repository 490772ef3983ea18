"""Dense polynomial arithmetic over F_p, sized for root-counting of small-degree polys.

Polynomials are lists of coefficients, lowest degree first, reduced mod p.
"""

from __future__ import annotations


def trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_mod(f: list[int], p: int) -> list[int]:
    return trim([c % p for c in f])


def deg(f: list[int]) -> int:
    return len(f) - 1


def mul(f: list[int], g: list[int], p: int) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return trim(out)


def divmod_poly(f: list[int], g: list[int], p: int) -> tuple[list[int], list[int]]:
    f = f[:]
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(g[-1], -1, p)
    q = [0] * max(0, len(f) - len(g) + 1)
    while len(f) >= len(g):
        c = f[-1] * inv_lead % p
        k = len(f) - len(g)
        q[k] = c
        for i, b in enumerate(g):
            f[k + i] = (f[k + i] - c * b) % p
        trim(f)
        if not f:
            break
    return trim(q), f


def rem(f: list[int], g: list[int], p: int) -> list[int]:
    return divmod_poly(f, g, p)[1]


def gcd_poly(f: list[int], g: list[int], p: int) -> list[int]:
    f, g = poly_mod(f, p), poly_mod(g, p)
    while g:
        f, g = g, rem(f, g, p)
    if f:
        inv = pow(f[-1], -1, p)
        f = [c * inv % p for c in f]
    return f


def pow_x_mod(e: int, f: list[int], p: int) -> list[int]:
    """x^e mod (f, p) by square and multiply."""
    result = [1]
    base = rem([0, 1], f, p)
    while e:
        if e & 1:
            result = rem(mul(result, base, p), f, p)
        base = rem(mul(base, base, p), f, p)
        e >>= 1
    return result


def count_roots(f: list[int], p: int) -> int:
    """Number of distinct roots of f in F_p."""
    f = poly_mod(f, p)
    if not f:
        raise ValueError("zero polynomial")
    if deg(f) == 0:
        return 0
    if p <= max(64, deg(f)):
        return sum(1 for x in range(p) if _eval(f, x, p) == 0)
    xp = pow_x_mod(p, f, p)
    n = max(len(xp), 2)
    diff = [((xp[i] if i < len(xp) else 0) - (1 if i == 1 else 0)) % p for i in range(n)]
    xp_minus_x = trim(diff)
    return deg(gcd_poly(xp_minus_x, f, p)) if xp_minus_x else deg(f)


def _eval(f: list[int], x: int, p: int) -> int:
    out = 0
    for c in reversed(f):
        out = (out * x + c) % p
    return out


def roots(f: list[int], p: int) -> list[int]:
    """All roots in F_p by direct scan; intended for small p."""
    f = poly_mod(f, p)
    return [x for x in range(p) if _eval(f, x, p) == 0]


def cubic_factorization_type(f: list[int], p: int) -> str:
    """'split' / 'linear_quadratic' / 'irreducible' for a separable cubic mod p."""
    if deg(poly_mod(f, p)) != 3:
        raise ValueError("not a cubic mod p")
    n = count_roots(f, p)
    if n == 3:
        return "split"
    if n == 1:
        return "linear_quadratic"
    if n == 0:
        return "irreducible"
    raise ValueError("cubic is not separable mod p")


def splits_completely(f: list[int], p: int) -> bool:
    """Whether a separable polynomial splits into distinct linear factors mod p."""
    f = poly_mod(f, p)
    return count_roots(f, p) == deg(f)
