from fractions import Fraction as F

import pytest

from trq.algebra import INF, LogRat, RatFun
from trq.algebra import poly as P
from trq.curve import (
    CurveError,
    SpectralCurve,
    classify_special,
    find_logvital,
    find_ramification,
    galois_series,
)


def lr(num, den=(1,)):
    return LogRat.from_ratfun(RatFun.make(P.poly(num), P.poly(den)))


def curve(x, y, name="test", **kw):
    return SpectralCurve(name, x, y, **kw)


def airy():
    return curve(lr([0, 0, 1]), lr([0, 1]), "airy")


def cubic():
    # x = z^3/3 - z, y = z
    return curve(lr([0, -1, 0, F(1, 3) * 3 and F(0), 0]), lr([0, 1]), "cubic")


class TestRamification:
    def test_airy(self):
        rams = find_ramification(airy())
        assert [(r.location, r.order, r.y_flag) for r in rams] == [(0, 1, "regular")]

    def test_cubic(self):
        c = curve(LogRat.from_ratfun(RatFun.make(P.poly([0, -1, 0, F(1, 3)]))), lr([0, 1]))
        rams = find_ramification(c)
        assert [(r.location, r.order) for r in rams] == [(-1, 1), (1, 1)]

    def test_log_unramified(self):
        c = curve(LogRat.make(RatFun.const(0), [(1, RatFun.var())]), lr([0, 1]))
        assert find_ramification(c) == []

    def test_bessel_simple_pole(self):
        c = curve(lr([0, 0, 1]), lr([1], [0, 1]), "bessel")
        rams = find_ramification(c)
        assert rams[0].y_flag == "simple-pole"

    def test_irrational_refused(self):
        # x = z^3/3 - 2z has ramification at +-sqrt(2)
        c = curve(LogRat.from_ratfun(RatFun.make(P.poly([0, -2, 0, F(1, 3)]))), lr([0, 1]))
        with pytest.raises(CurveError, match="outside Q"):
            find_ramification(c)


class TestGalois:
    def test_airy_exact(self):
        c = airy()
        p = find_ramification(c)[0]
        s = galois_series(c, p, 8)
        assert s.coeffs == {1: F(-1)}

    def test_perturbed_quadratic(self):
        # x = z^2 + z^3 at 0: solve by the substitution oracle degree by degree
        c = curve(LogRat.from_ratfun(RatFun.make(P.poly([0, 0, 1, 1]))), lr([0, 1]))
        p = next(r for r in find_ramification(c) if r.location == 0)
        s = galois_series(c, p, 6)
        u = c.x_series(F(0), 8)
        resid = u.compose(s) - u
        assert all(v == 0 for k, v in resid.coeffs.items() if k <= 7)
        assert s.coeff(1) == -1

    def test_involution_property(self):
        c = curve(LogRat.from_ratfun(RatFun.make(P.poly([0, -1, 0, F(1, 3)]))), lr([0, 1]))
        for p in find_ramification(c):
            s = galois_series(c, p, 6)
            comp = s.compose(s)
            assert comp.coeff(1) == 1
            assert all(v == 0 for k, v in comp.coeffs.items() if 2 <= k <= 6)


class TestClassify:
    def test_airy_origin(self):
        sp = classify_special(airy(), F(0))
        assert (sp.r, sp.s, sp.special) == (2, 1, True)

    def test_generic_point(self):
        sp = classify_special(airy(), F(5))
        assert (sp.r, sp.s, sp.special) == (1, 1, False)

    def test_rs_negative_orders(self):
        # x = z^3, y = z^-2: at 0 orders (3, -2), special since r+s = 1 > 0
        c = curve(lr([0, 0, 0, 1]), lr([1], [0, 0, 1]))
        sp = classify_special(c, F(0))
        assert (sp.r, sp.s) == (3, -2)
        assert sp.special

    def test_scaling_invariance(self):
        c1 = airy()
        c2 = curve(lr([0, 0, 3]), lr([0, F(-5, 7)]))
        for p in (F(0), F(2)):
            a, b = classify_special(c1, p), classify_special(c2, p)
            assert (a.r, a.s, a.special) == (b.r, b.s, b.special)

    def test_infinity(self):
        # x = 1/z: dx = -dz/z^2, at infinity regular nonvanishing (r=1)
        c = curve(lr([1], [0, 1]), lr([0, 0, 1]))
        sp = classify_special(c, INF)
        assert sp.r == 1


class TestLogVital:
    def test_plain_rational_none(self):
        assert find_logvital(airy()) == []

    def test_two_vital_points(self):
        # x = log z, y = (1/2) log(z-3) - log(z-5)
        x = LogRat.make(RatFun.const(0), [(1, RatFun.var())])
        y = LogRat.make(RatFun.const(0), [(F(1, 2), RatFun.var() - 3), (-1, RatFun.var() - 5)])
        c = curve(x, y)
        assert find_logvital(c) == [(F(3), F(2)), (F(5), F(-1))]

    def test_pole_of_dx_not_vital(self):
        # x = log z - z^2, y = log z: dy pole at 0 coincides with dx pole
        x = LogRat.make(RatFun.make(P.poly([0, 0, -1])), [(1, RatFun.var())])
        y = LogRat.make(RatFun.const(0), [(1, RatFun.var())])
        c = curve(x, y)
        assert find_logvital(c) == []

    def test_declaration_mismatch(self):
        x = LogRat.make(RatFun.const(0), [(1, RatFun.var())])
        y = LogRat.make(RatFun.const(0), [(1, RatFun.var() - 3)])
        with pytest.raises(CurveError, match="disagree"):
            find_logvital(curve(x, y, declared_vital=((F(3), F(2)),)))
