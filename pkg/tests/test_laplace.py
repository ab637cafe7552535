"""Saddle-expansion tests.

The cubic one-vertex correction value was computed with the brute-force
Wick enumeration that saddle_expand itself performs at j <= 2, checked
here against an independent hand count of the contractions:
phase -t^2/2 + t^3/3, amplitude 1:
  j=2 vertices (1/2!)(1/3)^2 <t^6> = (1/2)(1/9)(15) hbar = 5/6 hbar.
"""

from fractions import Fraction as F

import pytest

from trq.algebra import HSeries, Rf2
from trq.laplace import (
    SaddleError,
    SaddleProblem,
    check_extlaplace_airy,
    check_transform_inverse_airy,
    gaussian_moments,
    saddle_expand,
)
from trq.recursion import run_tr
from tests.test_wave import airy_curve


class TestMoments:
    def test_zeroth(self):
        assert gaussian_moments(F(1), 0).coeffs == {0: F(1)}

    def test_first(self):
        assert gaussian_moments(F(1), 1).coeffs == {1: F(1)}

    def test_second_scaled(self):
        assert gaussian_moments(F(2), 2).coeffs == {2: F(3, 4)}

    def test_degenerate(self):
        with pytest.raises(SaddleError):
            gaussian_moments(F(0), 1)


class TestSaddleExpand:
    def test_pure_gaussian(self):
        prob = SaddleProblem([F(1)], {}, {(0,): F(1)})
        s = saddle_expand(prob, 3)
        assert s.coeffs == {0: F(1)}

    def test_quadratic_amplitude(self):
        prob = SaddleProblem([F(1)], {}, {(2,): F(1)})
        s = saddle_expand(prob, 2)
        assert s.coeffs == {1: F(1)}

    def test_cubic_vertex_oracle(self):
        prob = SaddleProblem([F(1)], {(3,): F(1, 3)}, {(0,): F(1)})
        s = saddle_expand(prob, 1)
        assert s.coeff(1) == F(5, 6)

    def test_odd_amplitude_vanishes(self):
        prob = SaddleProblem([F(1)], {}, {(1,): F(1), (3,): F(-2)})
        s = saddle_expand(prob, 3)
        assert s.is_zero()

    def test_moment_consistency(self):
        for k in range(5):
            prob = SaddleProblem([F(3)], {}, {(2 * k,): F(1)})
            assert saddle_expand(prob, k) == gaussian_moments(F(3), k)


class TestAiryExtLaplace:
    @pytest.fixture(scope="class")
    def store(self):
        return run_tr(airy_curve(), 2)

    def test_order_one(self, store):
        rep = check_extlaplace_airy(store, 1)
        assert rep.exponent_match
        assert rep.prefactor_constant == F(-1)
        assert rep.matches[1], "first correction mismatch"
        assert rep.passed

    def test_order_two_stretch(self, store):
        rep = check_extlaplace_airy(store, 2)
        assert rep.matches[2], "second correction mismatch"
        assert rep.passed

    def test_transform_inverse_identity(self):
        assert check_transform_inverse_airy()
