import random
from fractions import Fraction as F

import pytest

from trq.algebra import (
    HSeries,
    LocalSeries,
    LogRat,
    RatFun,
    Rf2,
    exp_fraction_series,
    hseries_arith,
    partial_fractions,
    residue_at,
    series_at,
)
from trq.algebra import poly as P
from trq.algebra.partfrac import IrrationalPoleError
from trq.algebra.series import INF


def rf(num, den=(1,)):
    return RatFun.make(P.poly(num), P.poly(den))


def rand_ratfun(rng, deg=3):
    while True:
        num = P.poly([F(rng.randint(-5, 5)) for _ in range(deg + 1)])
        den = P.poly([F(rng.randint(-5, 5)) for _ in range(deg + 1)])
        if not P.is_zero(den):
            return RatFun.make(num, den)


class TestRatFun:
    def test_canonical_zero(self):
        assert rf([0], [3]).num == ()
        assert rf([0], [3]).den == (F(1),)

    def test_monic_denominator(self):
        f = rf([1], [2, 4])  # 1/(2+4z)
        assert f.den[-1] == 1

    def test_roundtrip_random(self):
        rng = random.Random(7)
        for _ in range(40):
            f, g = rand_ratfun(rng), rand_ratfun(rng)
            assert (f + g) - g == f
            if not g.is_zero():
                assert (f * g) / g == f

    def test_compose(self):
        f = rf([0, 1])  # z
        g = rf([1, 0, 1])  # 1 + z^2
        assert g.compose(f) == g
        h = rf([0, 1], [1, 1])  # z/(1+z)
        assert h.compose(h) == rf([0, 1], [1, 2])


class TestSeriesAt:
    def test_geometric(self):
        # 1/(1-z) at 0 to order 3
        s = series_at(rf([1], [1, -1]), 0, 3)
        assert [s.coeff(k) for k in range(4)] == [1, 1, 1, 1]

    def test_partial_fraction_pole(self):
        # (2z+1)/(z^2+z) = 1/z + 1/(z+1)
        s = series_at(rf([1, 2], [0, 1, 1]), 0, 0)
        assert s.coeff(-1) == 1
        assert s.coeff(0) == 1

    def test_lograt_derivative_expansion(self):
        # d/dz [log z - z^3] = 1/z - 3z^2 expanded at 2
        f = LogRat.make(rf([0, 0, 0, -1]), [(1, rf([0, 1]))])
        d = f.derivative()
        assert d == rf([1, 0, -3, 0], [0, 1]) or d == rf([1], [0, 1]) + rf([0, 0, -3])
        s = series_at(d, 2, 2)
        # oracle: direct polynomial expansion of 1/z - 3z^2 at z=2
        assert s.coeff(0) == F(1, 2) - 12
        assert s.coeff(1) == F(-1, 4) - 12
        assert s.coeff(2) == F(1, 8) - 3

    def test_lograt_value_expansion_refused(self):
        f = LogRat.make(rf([0]), [(1, rf([0, 1]))])
        with pytest.raises(ValueError):
            series_at(f, 0, 2)

    def test_infinity_chart(self):
        # z^2/(z-1) at infinity: w^-2/(1/w... ) = 1/w + 1 + w + ...
        s = series_at(rf([0, 0, 1], [-1, 1]), INF, 2)
        assert s.coeff(-1) == 1
        assert s.coeff(0) == 1
        assert s.coeff(1) == 1

    def test_recomposition_random_points(self):
        rng = random.Random(3)
        f = rf([1, 2, 3], [0, 0, 1, 1])  # pole at 0 (order 2) and -1
        s = series_at(f, 0, 6)
        pp = s.principal_part()
        reg = RatFun.make(f.num, f.den)
        for k, v in pp.items():
            reg = reg - RatFun.const(v) / rf([0, 1]) ** (-k)
        for _ in range(20):
            x = F(rng.randint(1, 60), rng.randint(1, 9))
            total = reg.eval(x) + sum(v * x**k for k, v in pp.items())
            assert total == f.eval(x)


class TestResidues:
    def test_simple(self):
        assert residue_at(rf([1, 2], [0, 1, 1]), 0) == 1

    def test_residueless_double_pole(self):
        assert residue_at(rf([1], [9, -6, 1]), 3) == 0

    def test_derivative_residueless(self):
        rng = random.Random(11)
        for _ in range(25):
            f = rand_ratfun(rng)
            roots = P.rational_roots(f.den)
            for p, _m in roots:
                assert residue_at(f.derivative(), p) == 0


class TestPartialFractions:
    def test_two_simple_poles(self):
        d = partial_fractions(rf([1], [-1, 0, 1]))
        assert d.polynomial == ()
        assert set(d.terms) == {(F(-1), 1, F(-1, 2)), (F(1), 1, F(1, 2))}

    def test_polynomial_part(self):
        d = partial_fractions(rf([0, 0, 1], [-1, 1]))
        assert d.polynomial == (F(1), F(1))
        assert d.terms == ((F(1), 1, F(1)),)

    def test_recompose(self):
        rng = random.Random(5)
        for _ in range(10):
            poles = sorted({F(rng.randint(-3, 3)) for _ in range(3)})
            den = P.ONE
            for p in poles:
                den = P.mul(den, P.pow_((-p, F(1)), rng.randint(1, 2)))
            num = P.poly([F(rng.randint(-4, 4)) for _ in range(len(den))])
            f = RatFun.make(num, den)
            if f.is_zero():
                continue
            assert partial_fractions(f).recompose() == f

    def test_irrational_pole_error(self):
        with pytest.raises(IrrationalPoleError):
            partial_fractions(rf([1], [1, 0, 1]))  # poles at +-i


class TestHSeries:
    def test_mul_truncated(self):
        a = HSeries.make({0: F(1), 1: F(1)}, 2)
        b = HSeries.make({0: F(1), 1: F(-1)}, 2)
        assert (a * b).coeffs == {0: F(1), 2: F(-1)}

    def test_invert(self):
        a = HSeries.make({0: F(2), 1: F(1)}, 2)
        inv = hseries_arith(a, None, "invert")
        assert inv.coeffs == {0: F(1, 2), 1: F(-1, 4), 2: F(1, 8)}

    def test_exp(self):
        c = F(3, 2)
        a = HSeries.make({1: c}, 3)
        e = a.exp(F(1))
        assert e.coeffs == {0: F(1), 1: c, 2: c**2 / 2, 3: c**3 / 6}
        assert e == exp_fraction_series(c, 3)

    def test_exp_rejects_constant_term(self):
        with pytest.raises(ValueError):
            HSeries.make({0: F(1), 1: F(1)}, 2).exp(F(1))

    def test_ring_laws_random(self):
        rng = random.Random(2)

        def rand_h():
            return HSeries.make({k: F(rng.randint(-3, 3)) for k in range(4)}, 3)

        for _ in range(30):
            a, b, c = rand_h(), rand_h(), rand_h()
            assert (a * b) * c == a * (b * c)
            assert a * (b + c) == a * b + a * c

    def test_invert_leading_shift(self):
        a = HSeries.make({1: F(2), 2: F(1)}, 5)
        inv = a.invert(F(1))
        assert (a * inv).coeffs == {0: F(1)}

    def test_rf2_coefficients(self):
        z = Rf2.z()
        a = HSeries.make({0: Rf2.const(1), 1: z}, 2)
        b = a.invert(Rf2.const(1))
        assert (a * b).coeffs == {0: Rf2.const(1)}


class TestRf2:
    def test_normalization(self):
        z, w = Rf2.z(), Rf2.w()
        f = (z * z - w * w) / (z - w)
        assert f == z + w

    def test_specialize(self):
        z, w = Rf2.z(), Rf2.w()
        f = (z + w) / (z - w)
        g = f.subst_w(F(2))
        assert g.eval(3) == 5

    def test_swap_and_parity(self):
        z, w = Rf2.z(), Rf2.w()
        f = (z - w) / (z * w + 1)
        assert f.swap() == -f

    def test_random_field_ops(self):
        rng = random.Random(13)

        def rand2():
            n = {(rng.randint(0, 2), rng.randint(0, 2)): F(rng.randint(-3, 3)) for _ in range(3)}
            d = {(rng.randint(0, 1), rng.randint(0, 1)): F(rng.randint(1, 3)) for _ in range(2)}
            if not any(d.values()):
                d = {(0, 0): F(1)}
            from trq.algebra.poly2 import p2

            return Rf2.make(p2(n), p2(d))

        for _ in range(25):
            f, g = rand2(), rand2()
            assert (f + g) - g == f
            if not g.is_zero():
                assert (f * g) / g == f

    def test_deriv_matches_specialized(self):
        z, w = Rf2.z(), Rf2.w()
        f = (z * z * w + 1) / (z - w)
        fz = f.deriv_z()
        assert fz.subst_w(F(3)) == f.subst_w(F(3)).derivative()


class TestLogRat:
    def test_derivative_examples(self):
        # log z - z^3
        f = LogRat.make(rf([0, 0, 0, -1]), [(1, rf([0, 1]))])
        assert f.derivative() == rf([1], [0, 1]) - rf([0, 0, 3])
        # log(1 - z/A) - log(1 - A z), A = 2
        A = F(2)
        g = LogRat.make(rf([0]), [(1, rf([1, -1 / A])), (-1, rf([1, -A]))])
        expect = rf([-1 / A], [1, -1 / A]) - rf([-A], [1, -A])
        assert g.derivative() == expect
        # z^2
        assert LogRat.from_ratfun(rf([0, 0, 1])).derivative() == rf([0, 2])

    def test_argument_normalization(self):
        # log(2z - 4) = log 2 + log(z - 2)
        f = LogRat.make(rf([0]), [(1, rf([-4, 2]))])
        assert f.logs == ((F(1), (F(-2), F(1))),)
        assert f.const_logs == ((F(1), F(2)),)

    def test_cancellation(self):
        f = LogRat.make(rf([0]), [(1, rf([0, 1])), (-1, rf([0, 1]))])
        assert not f.has_logs()
