"""Spectral curves on P^1: ramification data, local involutions, special points.

A curve is (x, y) as log-rational functions of the global coordinate z,
with all bound parameters already substituted as exact rationals.  Points
at infinity are handled through the chart w = 1/z.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .algebra import INF, LocalSeries, LogRat, RatFun, series_at
from .algebra import poly as P


class CurveError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralCurve:
    name: str
    x: LogRat
    y: LogRat
    params: dict = field(default_factory=dict)
    declared_ram: tuple | None = None
    declared_vital: tuple | None = None   # ((a, alpha), ...)
    special_set: tuple | None = None      # Gen-TR choice of P; None = classical
    gen_tr: bool = False

    def __post_init__(self):
        if self.dx.is_zero():
            raise CurveError("dx vanishes identically")
        if self.dy.is_zero():
            raise CurveError("dy vanishes identically")

    @cached_property
    def dx(self) -> RatFun:
        return self.x.derivative()

    @cached_property
    def dy(self) -> RatFun:
        return self.y.derivative()

    def x_series(self, p, order: int) -> LocalSeries:
        """Series of x(p+t) - x(p) in t; log parts expanded via log(1+u).

        Only valid when no log argument of x vanishes at p (otherwise the
        difference is not a power series).
        """
        if p == INF:
            raise CurveError("x_series at infinity is not needed for ramification work")
        p = Fraction(p)
        rat = self.x.rat
        out = series_at(rat, p, order) - LocalSeries.make(p, {0: rat.eval(p)}, order)
        for c, arg in self.x.logs:
            a0 = P.evaluate(arg, p)
            if a0 == 0:
                raise CurveError(f"log argument of x vanishes at {p}")
            u = series_at(RatFun.make(arg), p, order).scale(1 / a0) - LocalSeries.make(p, {0: 1}, order)
            out = out + _log1p(u, order).scale(c)
        return out

    def hash_key(self) -> str:
        import hashlib

        text = f"{self.x}|{self.y}|{sorted(self.params.items())}|{self.special_set}"
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _log1p(u: LocalSeries, order: int) -> LocalSeries:
    """log(1+u) for a series u of positive order."""
    if not u.is_zero() and u.order() < 1:
        raise CurveError("log(1+u) needs positive-order u")
    acc = LocalSeries(u.point, {}, order)
    term = LocalSeries(u.point, {0: Fraction(1)}, 10**9)
    for k in range(1, order + 1):
        term = (term * u).truncate(order)
        if term.is_zero():
            break
        acc = acc + term.scale(Fraction((-1) ** (k + 1), k))
    return acc


@dataclass
class RamPoint:
    location: Fraction
    order: int               # order of vanishing of dx (1 = simple)
    y_flag: str              # "regular" or "simple-pole"
    _curve: SpectralCurve
    _sigma: LocalSeries | None = None

    def sigma(self, order: int) -> LocalSeries:
        if self._sigma is None or self._sigma.trunc < order:
            self._sigma = galois_series(self._curve, self, order)
        return self._sigma.truncate(order)


@dataclass(frozen=True)
class SpecialPointClass:
    location: object
    r: int
    s: int
    special: bool


def find_ramification(curve: SpectralCurve) -> list[RamPoint]:
    """All zeros of dx in Q, with multiplicity and the local type of y."""
    dx = curve.dx
    if curve.declared_ram is not None:
        locs = []
        for p in curve.declared_ram:
            p = Fraction(p)
            m = _zero_order(dx, p)
            if m < 1:
                raise CurveError(f"declared ramification point {p} has dx({p}) != 0")
            locs.append((p, m))
    else:
        roots = P.rational_roots(dx.num)
        leftover = P.remainder_factor(dx.num)
        if P.degree(leftover) > 0:
            raise CurveError(
                "dx has zeros outside Q; irreducible factor "
                f"{P.to_str(leftover)} (declare ramification points explicitly)"
            )
        locs = [(p, m) for p, m in roots if _zero_order(dx, p) >= 1]
    if _dx_zero_at_infinity(curve):
        raise CurveError("dx vanishes at infinity; ramification at infinity is unsupported")
    out = []
    for p, m in locs:
        out.append(RamPoint(p, m, _y_type_at(curve, p), curve))
    return out


def _zero_order(dx: RatFun, p: Fraction) -> int:
    if P.evaluate(dx.den, p) == 0:
        return -1
    k = 0
    num = dx.num
    while not P.is_zero(num) and P.evaluate(num, p) == 0:
        num = P.divexact(num, (-p, Fraction(1)))
        k += 1
    return k


def _dx_zero_at_infinity(curve: SpectralCurve) -> bool:
    dx = curve.dx
    d = P.degree(dx.num) - P.degree(dx.den)
    return -d - 2 >= 1


def _y_type_at(curve: SpectralCurve, p: Fraction) -> str:
    """Classify y at a ramification point: regular (dy != 0) or simple pole."""
    for c, arg in curve.y.logs:
        if P.evaluate(arg, p) == 0:
            raise CurveError(f"logarithmic singularity of y at ramification point {p}")
    yr = curve.y.rat
    dp = P.evaluate(yr.den, p)
    if dp != 0:
        dyv = curve.dy
        if P.evaluate(dyv.den, p) == 0 or dyv.eval(p) == 0:
            raise CurveError(f"y regular at {p} but dy({p}) = 0 or singular")
        return "regular"
    s = series_at(yr, p, 0)
    if s.order() == -1:
        return "simple-pole"
    raise CurveError(f"y has a pole of order {-s.order()} > 1 at ramification point {p}")


def galois_series(curve: SpectralCurve, p: RamPoint, order: int) -> LocalSeries:
    """Local deck transformation sigma(t) = -t + c2 t^2 + ... at a simple
    ramification point, solved degree by degree on x(p+sigma) = x(p+t)."""
    if p.order != 1:
        raise CurveError(
            f"ramification order {p.order + 1} at {p.location}: only simple branching is supported"
        )
    u = curve.x_series(p.location, order + 1)
    a2 = u.coeff(2)
    if u.coeff(1) != 0 or a2 == 0:
        raise CurveError(f"x does not branch quadratically at {p.location}")
    sigma = LocalSeries.make(p.location, {1: Fraction(-1)}, order)
    for m in range(3, order + 2):
        r = (u.compose(sigma.truncate(order)) - u).truncate(m)
        rm = r.coeffs.get(m, Fraction(0))
        if rm:
            # u(sigma) gains -2*a2*c_{m-1} t^m from the correction
            c = rm / (2 * a2)
            sigma = sigma + LocalSeries.make(p.location, {m - 1: c}, order)
    return sigma


def classify_special(curve: SpectralCurve, p) -> SpecialPointClass:
    """Leading orders (r, s) of dx and dy at p; non-special iff r = s = 1
    or r + s <= 0."""
    r = _form_order(curve.dx, p) + 1
    s = _form_order(curve.dy, p) + 1
    nonspecial = (r == 1 and s == 1) or (r + s <= 0)
    return SpecialPointClass(p, r, s, not nonspecial)


def _form_order(f: RatFun, p) -> int:
    """Order of vanishing of the differential f dz at p (negative = pole)."""
    if f.is_zero():
        raise CurveError("zero differential")
    if p == INF:
        d = P.degree(f.num) - P.degree(f.den)
        return -d - 2
    p = Fraction(p)
    k = 0
    num, den = f.num, f.den
    while not P.is_zero(num) and P.evaluate(num, p) == 0:
        num = P.divexact(num, (-p, Fraction(1)))
        k += 1
    while not P.is_zero(den) and P.evaluate(den, p) == 0:
        den = P.divexact(den, (-p, Fraction(1)))
        k -= 1
    return k


def find_logvital(curve: SpectralCurve) -> list[tuple[Fraction, Fraction]]:
    """Points where dy has a simple pole (residue 1/alpha) and dx is regular."""
    dy = curve.dy
    dx = curve.dx
    leftover = P.remainder_factor(dy.den)
    if P.degree(leftover) > 0:
        raise CurveError(
            f"dy has poles outside Q; irreducible factor {P.to_str(leftover)}"
        )
    out = []
    for a, m in P.rational_roots(dy.den):
        if m != 1:
            continue
        if P.evaluate(dx.den, a) == 0:
            continue  # dx has a pole there; the singularity is not vital
        res = series_at(dy, a, -1).coeff(-1)
        if res:
            out.append((a, 1 / res))
    if curve.declared_vital is not None:
        declared = {(Fraction(a), Fraction(al)) for a, al in curve.declared_vital}
        found = set(out)
        if declared != found:
            raise CurveError(
                f"declared vital points {sorted(declared)} disagree with dy: {sorted(found)}"
            )
    return sorted(out)
