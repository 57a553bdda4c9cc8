"""Dense integer polynomials with exact arithmetic.

A polynomial is stored as a tuple of coefficients in ascending degree,
with no trailing zeros, so ``IntPoly((1, -3, 1))`` is ``x^2 - 3x + 1``.
Everything in this module is exact: coefficients are Python ints (or
Fractions where noted) and no floating point is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional


def _trim(coeffs: Iterable[int]) -> tuple[int, ...]:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class IntPoly:
    """Integer-coefficient polynomial; ``coeffs[k]`` multiplies ``x^k``."""

    coeffs: tuple[int, ...]

    def __init__(self, coeffs: Iterable[int]):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    # -- basics ------------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial has degree -1."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    @property
    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def __call__(self, x):
        y = 0
        for c in reversed(self.coeffs):
            y = y * x + c
        return y

    def __repr__(self) -> str:
        if not self.coeffs:
            return "IntPoly(0)"
        parts = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            term = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            mag = abs(c)
            body = f"{mag}{term}" if (mag != 1 or k == 0) else term
            parts.append(("-" if c < 0 else ("+" if parts else "")) + body)
        return f"IntPoly({''.join(parts)})"

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other: "IntPoly") -> "IntPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPoly(out)

    def __sub__(self, other: "IntPoly") -> "IntPoly":
        out = list(self.coeffs) + [0] * max(0, len(other.coeffs) - len(self.coeffs))
        for i, c in enumerate(other.coeffs):
            out[i] -= c
        return IntPoly(out)

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def __mul__(self, other) -> "IntPoly":
        if isinstance(other, int):
            return IntPoly(tuple(c * other for c in self.coeffs))
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPoly(())
        out = [0] * (len(a) + len(b) - 1)
        for i, ci in enumerate(a):
            if ci:
                for j, cj in enumerate(b):
                    out[i + j] += ci * cj
        return IntPoly(out)

    __rmul__ = __mul__

    def shift_up(self, k: int) -> "IntPoly":
        """Multiply by x^k."""
        if not self.coeffs:
            return self
        return IntPoly((0,) * k + self.coeffs)

    def derivative(self) -> "IntPoly":
        return IntPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def reverse(self) -> "IntPoly":
        """x^deg * p(1/x); degree-preserving when the constant term is nonzero."""
        return IntPoly(tuple(reversed(self.coeffs)))

    def content(self) -> int:
        return math.gcd(*self.coeffs) if self.coeffs else 0

    def primitive(self) -> "IntPoly":
        """Primitive part with positive leading coefficient."""
        if not self.coeffs:
            return self
        g = self.content()
        if self.coeffs[-1] < 0:
            g = -g
        return IntPoly(tuple(c // g for c in self.coeffs))

    def compose_x_power(self, m: int) -> "IntPoly":
        """Return p(x^m)."""
        if not self.coeffs:
            return self
        out = [0] * (m * self.degree + 1)
        for k, c in enumerate(self.coeffs):
            out[m * k] = c
        return IntPoly(out)


X = IntPoly((0, 1))
ONE = IntPoly((1,))


# -- division ---------------------------------------------------------------


def divides(den: IntPoly, num: IntPoly) -> bool:
    """Exact divisibility test over Z."""
    if den.is_zero:
        return num.is_zero
    if num.is_zero:
        return True
    if num.degree < den.degree:
        return False
    rem = list(num.coeffs)
    d, lc = den.degree, den.coeffs[-1]
    for k in range(len(rem) - 1 - d, -1, -1):
        top = rem[k + d]
        if top:
            c, r = divmod(top, lc)
            if r:
                return False
            for i, dc in enumerate(den.coeffs):
                rem[k + i] -= c * dc
    return not any(rem)


def div_exact(num: IntPoly, den: IntPoly) -> IntPoly:
    """num / den, raising if the division is not exact over Z."""
    if den.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    if num.is_zero:
        return num
    if num.degree < den.degree:
        raise ArithmeticError("inexact polynomial division")
    rem = list(num.coeffs)
    d, lc = den.degree, den.coeffs[-1]
    q = [0] * (num.degree - d + 1)
    for k in range(len(q) - 1, -1, -1):
        top = rem[k + d]
        c, r = divmod(top, lc)
        if r:
            raise ArithmeticError("inexact polynomial division")
        q[k] = c
        if c:
            for i, dc in enumerate(den.coeffs):
                rem[k + i] -= c * dc
    if any(rem):
        raise ArithmeticError("inexact polynomial division")
    return IntPoly(q)


def pseudo_rem(f: IntPoly, g: IntPoly) -> tuple[IntPoly, int]:
    """Pseudo-remainder of f by g and the sign of the applied multiplier.

    Returns (r, s) with lc(g)^(deg f - deg g + 1) * f = q*g + r and
    s the sign of that power, so r/s is a positive multiple of the true
    rational remainder.
    """
    if g.is_zero:
        raise ZeroDivisionError("pseudo-division by zero")
    d, lc = g.degree, g.coeffs[-1]
    steps = f.degree - d + 1
    if steps <= 0:
        return f, 1
    rem = list(f.coeffs)
    for k in range(steps - 1, -1, -1):
        for i in range(len(rem)):
            if i != k + d:
                rem[i] *= lc
        c = rem[k + d]
        rem[k + d] = 0
        for i, gc in enumerate(g.coeffs[:-1]):
            rem[k + i] -= c * gc
    sign = 1 if (lc > 0 or steps % 2 == 0) else -1
    return IntPoly(rem), sign


def gcd_z(f: IntPoly, g: IntPoly) -> IntPoly:
    """Primitive gcd over Z (primitive PRS), positive leading coefficient."""
    a, b = f.primitive(), g.primitive()
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero:
        r, _ = pseudo_rem(a, b)
        a, b = b, r.primitive()
    return a


def squarefree_decomposition(p: IntPoly) -> list[tuple[IntPoly, int]]:
    """Yun decomposition of the primitive part: [(factor, multiplicity)]."""
    if p.degree < 1:
        return []
    f = p.primitive()
    a = gcd_z(f, f.derivative())
    if a.degree == 0:
        return [(f, 1)]
    b = div_exact(f, a)
    c = div_exact(f.derivative(), a)
    d = c - b.derivative()
    out: list[tuple[IntPoly, int]] = []
    i = 1
    while b.degree > 0:
        ai = gcd_z(b, d)
        if ai.degree > 0:
            out.append((ai, i))
            b = div_exact(b, ai)
            c = div_exact(d, ai)
        else:
            c = d
        d = c - b.derivative()
        i += 1
    return out


# -- cyclotomic detection -----------------------------------------------------


@lru_cache(maxsize=None)
def cyclotomic(m: int) -> IntPoly:
    """m-th cyclotomic polynomial, by exact division of x^m - 1."""
    if m < 1:
        raise ValueError("cyclotomic index must be positive")
    p = IntPoly((-1,) + (0,) * (m - 1) + (1,))
    for d in range(1, m):
        if m % d == 0:
            p = div_exact(p, cyclotomic(d))
    return p


def _euler_phi(m: int) -> int:
    out, n, p = 1, m, 2
    while p * p <= n:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out *= (p - 1) * p ** (k - 1)
        p += 1
    if n > 1:
        out *= n - 1
    return out


@lru_cache(maxsize=None)
def cyclotomic_indices_up_to_degree(d: int) -> tuple[int, ...]:
    """All m with Euler phi(m) <= d; phi(m) >= sqrt(m/2) bounds the search."""
    return tuple(m for m in range(1, 2 * d * d + 2) if _euler_phi(m) <= d)


def cyclotomic_free(p: IntPoly) -> bool:
    """True iff no cyclotomic polynomial divides p (no root of unity among roots)."""
    if p.is_zero:
        raise ValueError("zero polynomial")
    d = p.degree
    if d == 0:
        return True
    if p(1) == 0 or p(-1) == 0:
        return False
    for m in cyclotomic_indices_up_to_degree(d):
        if m <= 2:
            continue
        phi = cyclotomic(m)
        if phi.degree <= d and divides(phi, p):
            return False
    return True


# -- reciprocal structure -----------------------------------------------------


def is_reciprocal(p: IntPoly) -> bool:
    """True iff the coefficient sequence is palindromic."""
    if not p.is_monic:
        raise ValueError("reciprocal test expects a monic polynomial")
    return p.coeffs == tuple(reversed(p.coeffs))


def is_poly_in_xm(p: IntPoly) -> Optional[int]:
    """Smallest m > 1 with p(x) = q(x^m), or None.

    Equals the gcd of the exponents of the nonzero coefficients when > 1.
    """
    if p.is_zero:
        raise ValueError("zero polynomial")
    g = 0
    for k, c in enumerate(p.coeffs):
        if c and k > 0:
            g = math.gcd(g, k)
    return g if g > 1 else None


def reciprocal_part(p: IntPoly) -> IntPoly:
    """Monic divisor of p carrying every root whose inverse is also a root of p.

    In particular it contains all roots of modulus one.  Requires
    p(1) != 0 and p(-1) != 0; a root at +-1 means a root of unity.
    """
    if not p.is_monic:
        raise ValueError("expected a monic polynomial")
    if p(1) == 0 or p(-1) == 0:
        raise ValueError("polynomial has a root at +-1 (root of unity)")
    g = gcd_z(p, p.reverse())
    if not g.is_monic:
        raise ArithmeticError("reciprocal part came out nonmonic")
    return g


def crown_transform(r: IntPoly) -> IntPoly:
    """For palindromic r of even degree 2m return q with r(x) = x^m q(x + 1/x).

    Uses the basis D_0 = 2, D_1 = z, D_j = z*D_{j-1} - D_{j-2}, which
    satisfies D_j(x + 1/x) = x^j + x^-j.  Roots of modulus one of r map
    to real roots of q in (-2, 2), one per conjugate pair.
    """
    d = r.degree
    if d % 2 != 0 or r.coeffs != tuple(reversed(r.coeffs)):
        raise ValueError("expected a palindromic polynomial of even degree")
    m = d // 2
    dick = [IntPoly((2,)), X]
    while len(dick) <= m:
        dick.append(X * dick[-1] - dick[-2])
    q = IntPoly((r.coeffs[m],))
    for j in range(1, m + 1):
        q = q + r.coeffs[m + j] * dick[j]
    return q


# -- Sturm machinery ----------------------------------------------------------


def _neg_rem_primitive(a: IntPoly, b: IntPoly) -> IntPoly:
    """Primitive polynomial equal to a positive multiple of -rem(a, b)."""
    r, sign = pseudo_rem(a, b)
    if r.is_zero:
        return r
    g = r.content()
    return IntPoly(tuple((-sign * c) // g for c in r.coeffs))


def sturm_chain(p: IntPoly) -> list[IntPoly]:
    """Integer Sturm chain of the squarefree part of p."""
    f = p.primitive()
    g = gcd_z(f, f.derivative())
    if g.degree > 0:
        f = div_exact(f, g).primitive()
    chain = [f, f.derivative().primitive()]
    if chain[1].is_zero:
        return chain[:1]
    while chain[-1].degree > 0:
        nxt = _neg_rem_primitive(chain[-2], chain[-1])
        if nxt.is_zero:
            break
        chain.append(nxt)
    return chain


def _sign_at(p: IntPoly, x) -> int:
    if isinstance(x, Fraction):
        # homogenized integer evaluation: sign(sum c_k a^k b^(n-k)), b > 0
        a, b = x.numerator, x.denominator
        v = 0
        bp = 1
        powers = []
        for _ in p.coeffs:
            powers.append(bp)
            bp *= b
        ap = 1
        for k, c in enumerate(p.coeffs):
            if c:
                v += c * ap * powers[len(p.coeffs) - 1 - k]
            ap *= a
    else:
        v = p(x)
    return (v > 0) - (v < 0)


def _sign_at_inf(p: IntPoly, positive: bool) -> int:
    if p.is_zero:
        return 0
    lc = p.leading
    s = (lc > 0) - (lc < 0)
    if not positive and p.degree % 2 == 1:
        s = -s
    return s


def _variations(signs: list[int]) -> int:
    v, prev = 0, 0
    for s in signs:
        if s == 0:
            continue
        if prev and s != prev:
            v += 1
        prev = s
    return v


def count_real_roots(
    p: IntPoly,
    lo: Optional[Fraction] = None,
    hi: Optional[Fraction] = None,
    chain: Optional[list[IntPoly]] = None,
) -> int:
    """Number of distinct real roots of p in (lo, hi]; None means unbounded.

    Exact, by Sturm's theorem on the squarefree part.
    """
    if p.degree < 1:
        return 0
    if chain is None:
        chain = sturm_chain(p)
    at_lo = [(_sign_at(q, lo) if lo is not None else _sign_at_inf(q, False)) for q in chain]
    at_hi = [(_sign_at(q, hi) if hi is not None else _sign_at_inf(q, True)) for q in chain]
    return _variations(at_lo) - _variations(at_hi)


def isolate_real_roots(p: IntPoly, lo: Fraction, hi: Fraction) -> list[tuple[Fraction, Fraction]]:
    """Disjoint open intervals (a, b) in (lo, hi), each holding one distinct root.

    Requires p(lo) != 0 and p(hi) != 0.  Exact Sturm bisection; interval
    endpoints are never roots.
    """
    if p.degree < 1:
        return []
    chain = sturm_chain(p)
    f = chain[0]
    if f(lo) == 0 or f(hi) == 0:
        raise ValueError("isolation endpoints must not be roots")

    def nroots(a: Fraction, b: Fraction) -> int:
        return count_real_roots(f, a, b, chain=chain)

    def safe_mid(a: Fraction, b: Fraction) -> Fraction:
        m = (a + b) / 2
        k = 3
        while f(m) == 0:
            m = a + (b - a) / k
            k += 1
        return m

    out: list[tuple[Fraction, Fraction]] = []
    stack = [(lo, hi, nroots(lo, hi))]
    while stack:
        a, b, cnt = stack.pop()
        if cnt == 0:
            continue
        if cnt == 1:
            out.append((a, b))
            continue
        m = safe_mid(a, b)
        cl = nroots(a, m)
        stack.append((a, m, cl))
        stack.append((m, b, cnt - cl))
    out.sort()
    return out


def count_unitary_roots(p: IntPoly) -> int:
    """Number of roots of modulus one, with multiplicity.

    Exact: for each squarefree factor, the roots paired with their inverses
    live in gcd(f, reverse(f)); rewrite that part as x^m q(x + 1/x) and count
    real roots of q in (-2, 2) by Sturm.  Each counts a conjugate pair.
    """
    if not p.is_monic:
        raise ValueError("expected a monic polynomial")
    if p(1) == 0 or p(-1) == 0:
        raise ValueError("polynomial has a root at +-1")
    total = 0
    for factor, mult in squarefree_decomposition(p):
        if factor.degree < 2:
            continue
        r = gcd_z(factor, factor.reverse())
        if r.degree < 2:
            continue
        q = crown_transform(r)
        pairs = count_real_roots(q, Fraction(-2), Fraction(2))
        total += 2 * pairs * mult
    return total
