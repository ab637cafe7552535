"""Dense univariate polynomials over exact rationals.

A polynomial is a tuple of Fractions, lowest degree first, with no trailing
zeros.  The zero polynomial is the empty tuple.  All operations are exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Poly = tuple  # tuple[Fraction, ...]

ZERO: Poly = ()
ONE: Poly = (Fraction(1),)
X: Poly = (Fraction(0), Fraction(1))


def poly(coeffs: Iterable) -> Poly:
    """Build a normalized polynomial from low-to-high coefficients."""
    c = [Fraction(v) for v in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def const(v) -> Poly:
    v = Fraction(v)
    return (v,) if v else ()


def degree(p: Poly) -> int:
    """Degree, with deg 0 = -1 by convention."""
    return len(p) - 1


def is_zero(p: Poly) -> bool:
    return not p


def add(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, v in enumerate(b):
        out[i] += v
    return poly(out)


def neg(a: Poly) -> Poly:
    return tuple(-v for v in a)


def sub(a: Poly, b: Poly) -> Poly:
    return add(a, neg(b))


def mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ZERO
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if u:
            for j, v in enumerate(b):
                if v:
                    out[i + j] += u * v
    return poly(out)


def scale(a: Poly, c) -> Poly:
    c = Fraction(c)
    if not c:
        return ZERO
    return tuple(v * c for v in a)


def pow_(a: Poly, n: int) -> Poly:
    if n < 0:
        raise ValueError("negative polynomial power")
    r = ONE
    b = a
    while n:
        if n & 1:
            r = mul(r, b)
        b = mul(b, b)
        n >>= 1
    return r


def divmod_(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    """Exact euclidean division; b must be nonzero."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    db = degree(b)
    lb = b[-1]
    while len(r) - 1 >= db and r:
        k = len(r) - 1 - db
        c = r[-1] / lb
        q[k] = c
        for i, v in enumerate(b):
            r[k + i] -= c * v
        while r and r[-1] == 0:
            r.pop()
    return poly(q), poly(r)


def divexact(a: Poly, b: Poly) -> Poly:
    q, r = divmod_(a, b)
    if r:
        raise ValueError("inexact polynomial division")
    return q


def gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd via the euclidean algorithm."""
    while b:
        a, b = b, divmod_(a, b)[1]
    if not a:
        return ZERO
    return scale(a, 1 / a[-1])


def derivative(a: Poly) -> Poly:
    return poly(v * (i + 1) for i, v in enumerate(a[1:]))


def evaluate(a: Poly, x) -> Fraction:
    acc = Fraction(0)
    for v in reversed(a):
        acc = acc * x + v
    return acc


def compose(a: Poly, b: Poly) -> Poly:
    """a(b(z)) by Horner."""
    acc: Poly = ZERO
    for v in reversed(a):
        acc = add(mul(acc, b), const(v))
    return acc


def shift(a: Poly, p) -> Poly:
    """a(z + p)."""
    return compose(a, (Fraction(p), Fraction(1)))


def monic(a: Poly) -> Poly:
    if not a:
        return ZERO
    return scale(a, 1 / a[-1])


def content_int(a: Sequence[Fraction]) -> Fraction:
    """Positive rational c so that a/c has coprime integer coefficients."""
    from math import gcd as igcd

    num = 0
    den = 1
    for v in a:
        num = igcd(num, v.numerator)
        den = den * v.denominator // igcd(den, v.denominator)
    if num == 0:
        return Fraction(1)
    return Fraction(num, den)


def rational_roots(a: Poly) -> list[tuple[Fraction, int]]:
    """All rational roots with multiplicities, sorted.

    The cofactor left after dividing the roots out may still be nonconstant;
    callers decide whether leftover irrational roots are an error.
    """
    if not a:
        raise ValueError("zero polynomial has no well-defined roots")
    roots: list[tuple[Fraction, int]] = []
    work = a
    # root at 0
    k = 0
    while len(work) > 1 and work[0] == 0:
        work = work[1:]
        k += 1
    if k:
        roots.append((Fraction(0), k))
    work = scale(work, 1 / content_int(work))
    # integer-coefficient candidates p/q with p | a0, q | an
    while degree(work) >= 1:
        a0 = work[0].numerator
        an = work[-1].numerator
        found = None
        for p in _divisors(abs(a0)):
            for q in _divisors(abs(an)):
                for s in (1, -1):
                    cand = Fraction(s * p, q)
                    if evaluate(work, cand) == 0:
                        found = cand
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            break
        mult = 0
        while True:
            q_, r_ = divmod_(work, (-found, Fraction(1)))
            if r_:
                break
            work = q_
            mult += 1
        roots.append((found, mult))
    roots.sort(key=lambda t: t[0])
    return roots


def remainder_factor(a: Poly) -> Poly:
    """The monic cofactor of a after removing all rational roots."""
    work = monic(a)
    for r, m in rational_roots(a):
        for _ in range(m):
            work = divexact(work, (-r, Fraction(1)))
    return work


def _divisors(n: int) -> list[int]:
    if n == 0:
        return [1]
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def to_str(a: Poly, var: str = "z") -> str:
    if not a:
        return "0"
    parts = []
    for i, v in enumerate(a):
        if not v:
            continue
        if i == 0:
            parts.append(str(v))
        elif i == 1:
            parts.append(f"{v}*{var}" if v != 1 else var)
        else:
            parts.append(f"{v}*{var}^{i}" if v != 1 else f"{var}^{i}")
    return " + ".join(parts)
