"""Exact factorization of monic integer polynomials.

Strategy: factor the squarefree part modulo a good small prime
(Berlekamp), Hensel-lift the modular factors above twice the
Landau-Mignotte coefficient bound, then recombine subsets with exact
trial division over Z.  Deterministic throughout; meant for the desk
scale of degree <= 16.
"""
from __future__ import annotations

import itertools
import math
from typing import Sequence

from .intpoly import IntPoly, div_exact, divides, gcd_z, squarefree_decomposition

# -- dense polynomials over Z/m ----------------------------------------------
# represented as tuples, ascending degree, trimmed, coefficients in [0, m)


def _pm(coeffs: Sequence[int], m: int) -> tuple[int, ...]:
    c = [x % m for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _pm_add(a, b, m):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % m
    return _pm(out, m)


def _pm_sub(a, b, m):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % m
    return _pm(out, m)


def _pm_mul(a, b, m):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ci in enumerate(a):
        if ci:
            for j, cj in enumerate(b):
                out[i + j] += ci * cj
    return _pm(out, m)


def _pm_divmod(a, b, m):
    """Division in (Z/m)[x]; the leading coefficient of b must be invertible."""
    if not b:
        raise ZeroDivisionError
    inv = pow(b[-1], -1, m)
    rem = list(a)
    db = len(b) - 1
    q = [0] * max(0, len(a) - len(b) + 1)
    for k in range(len(q) - 1, -1, -1):
        c = (rem[k + db] * inv) % m
        q[k] = c
        if c:
            for i, bc in enumerate(b):
                rem[k + i] = (rem[k + i] - c * bc) % m
    return _pm(q, m), _pm(rem, m)


def _pm_monic(a, m):
    if not a:
        return a
    inv = pow(a[-1], -1, m)
    return _pm([c * inv for c in a], m)


def _pm_gcd(a, b, p):
    while b:
        _, r = _pm_divmod(a, b, p)
        a, b = b, r
    return _pm_monic(a, p)


def _pm_powmod(base, e, mod_poly, p):
    result = (1,)
    b = _pm_divmod(base, mod_poly, p)[1]
    while e:
        if e & 1:
            result = _pm_divmod(_pm_mul(result, b, p), mod_poly, p)[1]
        b = _pm_divmod(_pm_mul(b, b, p), mod_poly, p)[1]
        e >>= 1
    return result


# -- Berlekamp over F_p -------------------------------------------------------


def _nullspace_mod_p(mat: list[list[int]], p: int) -> list[list[int]]:
    """Basis of the right nullspace of mat over F_p."""
    n = len(mat)
    a = [row[:] for row in mat]
    pivots: dict[int, int] = {}
    row = 0
    for col in range(n):
        pr = next((r for r in range(row, n) if a[r][col] % p), None)
        if pr is None:
            continue
        a[row], a[pr] = a[pr], a[row]
        inv = pow(a[row][col], -1, p)
        a[row] = [(x * inv) % p for x in a[row]]
        for r in range(n):
            if r != row and a[r][col]:
                f = a[r][col]
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[row])]
        pivots[col] = row
        row += 1
    basis = []
    for col in range(n):
        if col in pivots:
            continue
        v = [0] * n
        v[col] = 1
        for pc, pr in pivots.items():
            v[pc] = (-a[pr][col]) % p
        basis.append(v)
    return basis


def _berlekamp(f: tuple[int, ...], p: int) -> list[tuple[int, ...]]:
    """Monic irreducible factors of a squarefree monic f over F_p."""
    n = len(f) - 1
    if n <= 1:
        return [f]
    xp = _pm_powmod((0, 1), p, f, p)
    # rows of Q: x^(p*i) mod f
    cur = (1,)
    q_rows = []
    for _ in range(n):
        q_rows.append(list(cur) + [0] * (n - len(cur)))
        cur = _pm_divmod(_pm_mul(cur, xp, p), f, p)[1]
    qmi = [[(q_rows[i][j] - (1 if i == j else 0)) % p for j in range(n)] for i in range(n)]
    # v·(Q - I) = 0  <=>  (Q - I)^T v = 0
    qmi_t = [[qmi[i][j] for i in range(n)] for j in range(n)]
    basis = _nullspace_mod_p(qmi_t, p)
    r = len(basis)
    factors = [f]
    if r == 1:
        return factors
    for v in basis:
        if len(factors) == r:
            break
        vpoly = _pm(v, p)
        if len(vpoly) <= 1:
            continue
        new: list[tuple[int, ...]] = []
        for g in factors:
            parts = []
            rem = g
            for c in range(p):
                if len(rem) - 1 <= 0:
                    break
                d = _pm_gcd(rem, _pm_sub(vpoly, (c,), p), p)
                if 0 < len(d) - 1 < len(rem) - 1:
                    parts.append(d)
                    rem = _pm_divmod(rem, d, p)[0]
                elif len(d) - 1 == len(rem) - 1:
                    break
            if len(rem) - 1 > 0:
                parts.append(rem)
            new.extend(parts if parts else [g])
        factors = new
    if len(factors) != r:
        raise ArithmeticError("modular factor separation failed")
    return sorted(factors)


# -- Hensel lifting -----------------------------------------------------------


def _pm_xgcd(a, b, p):
    """(g, s, t) with s*a + t*b = g over F_p, g monic."""
    r0, r1 = _pm(a, p), _pm(b, p)
    s0, s1 = (1,), ()
    t0, t1 = (), (1,)
    while r1:
        q, r = _pm_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _pm_sub(s0, _pm_mul(q, s1, p), p)
        t0, t1 = t1, _pm_sub(t0, _pm_mul(q, t1, p), p)
    inv = pow(r0[-1], -1, p)
    return _pm_monic(r0, p), _pm([c * inv for c in s0], p), _pm([c * inv for c in t0], p)


def _hensel_step(m, f, g, h, s, t):
    """One quadratic Hensel step: from mod m to mod m^2.

    Input satisfies f = g*h and s*g + t*h = 1 (mod m) with h monic;
    output satisfies the same mod m^2.
    """
    mm = m * m
    f = _pm(f, mm)
    e = _pm_sub(f, _pm_mul(g, h, mm), mm)
    q, r = _pm_divmod(_pm_mul(s, e, mm), h, mm)
    g1 = _pm_add(g, _pm_add(_pm_mul(t, e, mm), _pm_mul(q, g, mm), mm), mm)
    h1 = _pm_add(h, r, mm)
    b = _pm_sub(_pm_add(_pm_mul(s, g1, mm), _pm_mul(t, h1, mm), mm), (1,), mm)
    c, d = _pm_divmod(_pm_mul(s, b, mm), h1, mm)
    s1 = _pm_sub(s, d, mm)
    t1 = _pm_sub(t, _pm_add(_pm_mul(t, b, mm), _pm_mul(c, g1, mm), mm), mm)
    return g1, h1, s1, t1


def _lift_factors(f_int: tuple[int, ...], modular: list[tuple[int, ...]], p: int, target: int) -> tuple[list[tuple[int, ...]], int]:
    """Lift monic modular factors of monic f to a modulus >= target.

    Returns (factors, modulus); the product of the factors is f mod modulus.
    """
    if len(modular) == 1:
        m = p
        while m < target:
            m *= m
        return [_pm(f_int, m)], m
    half = len(modular) // 2
    g0 = (1,)
    for q in modular[:half]:
        g0 = _pm_mul(g0, q, p)
    h0 = (1,)
    for q in modular[half:]:
        h0 = _pm_mul(h0, q, p)
    gcd1, s, t = _pm_xgcd(g0, h0, p)
    if gcd1 != (1,):
        raise ArithmeticError("modular factors not coprime")
    m = p
    g, h = g0, h0
    while m < target:
        g, h, s, t = _hensel_step(m, f_int, g, h, s, t)
        m *= m
    left, ml = _lift_factors(g, modular[:half], p, target)
    right, mr = _lift_factors(h, modular[half:], p, target)
    mfin = min(m, ml, mr)
    return [_pm(q, mfin) for q in left + right], mfin


# -- Zassenhaus ---------------------------------------------------------------

_PRIMES = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67,
           71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139,
           149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211]


def _centered(c: int, m: int) -> int:
    return c - m if 2 * c > m else c


def _mignotte_bound(f: IntPoly) -> int:
    """Upper bound on |coefficient| of any monic divisor of monic f."""
    n = f.degree
    norm2 = math.isqrt(sum(c * c for c in f.coeffs)) + 1
    return math.comb(n, n // 2) * norm2


def _good_prime(f: IntPoly) -> int:
    for p in _PRIMES:
        fp = _pm(f.coeffs, p)
        if len(fp) - 1 != f.degree:
            continue
        dfp = _pm(f.derivative().coeffs, p)
        if _pm_gcd(fp, dfp, p) == (1,):
            return p
    raise ArithmeticError("no good prime found (degree too large for the prime table?)")


def _factor_squarefree_monic(f: IntPoly) -> list[IntPoly]:
    """Irreducible monic factors of a squarefree monic f, deg f >= 1."""
    if f.degree == 1:
        return [f]
    p = _good_prime(f)
    modular = _berlekamp(_pm_monic(_pm(f.coeffs, p), p), p)
    if len(modular) == 1:
        return [f]
    bound = 2 * _mignotte_bound(f) + 1
    lifted, modulus = _lift_factors(f.coeffs, modular, p, bound)
    found: list[IntPoly] = []
    remaining = list(range(len(lifted)))
    current = f
    size = 1
    while 2 * size <= len(remaining):
        hit = False
        for combo in itertools.combinations(remaining, size):
            prod = (1,)
            for i in combo:
                prod = _pm_mul(prod, lifted[i], modulus)
            cand = IntPoly(tuple(_centered(c, modulus) for c in prod))
            if not cand.is_monic:
                continue
            if divides(cand, current):
                found.append(cand)
                current = div_exact(current, cand)
                remaining = [i for i in remaining if i not in combo]
                hit = True
                break
        if not hit:
            size += 1
    if current.degree > 0:
        found.append(current)
    return sorted(found, key=lambda q: (q.degree, q.coeffs))


def factor_z(p: IntPoly) -> list[tuple[IntPoly, int]]:
    """Factor a monic integer polynomial into monic irreducibles over Z.

    Returns [(factor, multiplicity)] sorted by (degree, coefficients).
    """
    if p.is_zero:
        raise ValueError("zero polynomial")
    if not p.is_monic:
        raise ValueError("expected a monic polynomial")
    out: list[tuple[IntPoly, int]] = []
    work = p
    k = 0
    while work.degree > 0 and work.coeffs[0] == 0:
        work = IntPoly(work.coeffs[1:])
        k += 1
    if k:
        out.append((IntPoly((0, 1)), k))
    for sq, mult in squarefree_decomposition(work):
        for q in _factor_squarefree_monic(sq):
            out.append((q, mult))
    return sorted(out, key=lambda t: (t[0].degree, t[0].coeffs))


def is_irreducible_z(p: IntPoly) -> bool:
    """Exact irreducibility over Z for monic p of degree >= 1."""
    if p.is_zero:
        raise ValueError("zero polynomial")
    if p.degree == 0:
        raise ValueError("degree 0 input")
    if not p.is_monic:
        raise ValueError("expected a monic polynomial")
    if p.degree == 1:
        return True
    if p.coeffs[0] == 0:
        return False
    if gcd_z(p, p.derivative()).degree > 0:
        return False
    factors = _factor_squarefree_monic(p)
    return len(factors) == 1
