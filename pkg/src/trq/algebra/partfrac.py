"""Exact partial-fraction decomposition over rational poles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import poly as P
from .ratfun import RatFun
from .series import series_at


class IrrationalPoleError(ValueError):
    def __init__(self, factor: P.Poly):
        self.factor = factor
        super().__init__(f"denominator factor without rational roots: {P.to_str(factor)}")


@dataclass(frozen=True)
class PartialFractions:
    """f = polynomial + sum coeff/(z - pole)^order."""

    polynomial: P.Poly
    terms: tuple  # tuple[(Fraction pole, int order, Fraction coeff)]

    def recompose(self) -> RatFun:
        out = RatFun.make(self.polynomial)
        for pole, order, coeff in self.terms:
            out = out + RatFun.const(coeff) / (RatFun.var() - pole) ** order
        return out


def partial_fractions(f: RatFun, poles=None) -> PartialFractions:
    """Decompose f over its rational poles.

    When `poles` is given it must cover every pole; otherwise poles are
    found from the denominator's rational roots and any leftover
    irreducible factor raises IrrationalPoleError.
    """
    quotient, _ = P.divmod_(f.num, f.den)
    if poles is None:
        roots = P.rational_roots(f.den)
        leftover = P.remainder_factor(f.den)
        if P.degree(leftover) > 0:
            raise IrrationalPoleError(leftover)
    else:
        roots = []
        rem = f.den
        for p in poles:
            p = Fraction(p)
            m = 0
            while True:
                q, r = P.divmod_(rem, (-p, Fraction(1)))
                if r:
                    break
                rem = q
                m += 1
            if m:
                roots.append((p, m))
        if P.degree(rem) > 0:
            raise IrrationalPoleError(rem)
    terms = []
    for p, m in roots:
        s = series_at(f, p, -1)
        for k, v in sorted(s.principal_part().items()):
            terms.append((p, -k, v))
    terms.sort(key=lambda t: (t[0], t[1]))
    return PartialFractions(quotient, tuple(terms))
