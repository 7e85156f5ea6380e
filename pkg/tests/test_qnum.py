import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsu2.qnum import (
    DeformationParameter,
    HalfInteger,
    cg_half,
    half_range,
    q_int,
    spinor_cs,
)

halves = st.integers(min_value=-40, max_value=40).map(HalfInteger.from_twice)
qs = st.floats(min_value=0.05, max_value=0.95)


class TestHalfInteger:
    def test_construction(self):
        assert HalfInteger(3).twice == 6
        assert HalfInteger(0.5).twice == 1
        assert HalfInteger(-1.5).twice == -3
        assert HalfInteger.from_twice(5).twice == 5
        assert HalfInteger(HalfInteger(0.5)) == HalfInteger(0.5)

    def test_rejects_off_grid(self):
        with pytest.raises(ValueError):
            HalfInteger(0.3)
        with pytest.raises(TypeError):
            HalfInteger("1/2")

    def test_arithmetic(self):
        j = HalfInteger(1.5)
        assert j + HalfInteger(0.5) == HalfInteger(2)
        assert j - 1 == HalfInteger(0.5)
        assert -j == HalfInteger(-1.5)
        assert 2 * j == HalfInteger(3)
        assert abs(HalfInteger(-2)) == HalfInteger(2)
        assert 2 - HalfInteger(0.5) == HalfInteger(1.5)

    def test_ordering_and_hash(self):
        assert HalfInteger(0.5) < HalfInteger(1)
        assert HalfInteger(1) <= 1
        assert hash(HalfInteger(2)) == hash(HalfInteger(2))
        assert HalfInteger(2) == 2
        assert HalfInteger(0.5) == 0.5

    def test_str_and_conversion(self):
        assert str(HalfInteger(1.5)) == "3/2"
        assert str(HalfInteger(-0.5)) == "-1/2"
        assert str(HalfInteger(2)) == "2"
        assert float(HalfInteger(2.5)) == 2.5
        assert int(HalfInteger(3)) == 3
        with pytest.raises(ValueError):
            int(HalfInteger(0.5))
        assert HalfInteger(1.5).is_integer is False

    def test_immutable(self):
        j = HalfInteger(1)
        with pytest.raises(AttributeError):
            j.twice = 4

    def test_half_range(self):
        ms = half_range(-1, 1)
        assert ms == [HalfInteger(-1), HalfInteger(0), HalfInteger(1)]
        grid = half_range(0, 1.5, step=0.5)
        assert [g.twice for g in grid] == [0, 1, 2, 3]
        with pytest.raises(ValueError):
            half_range(0, 1, step=0)


class TestDeformationParameter:
    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.5, 1.5])
    def test_range_is_strict(self, bad):
        with pytest.raises(ValueError):
            DeformationParameter(bad)

    def test_scalar_modes(self):
        p = DeformationParameter(0.5)
        assert p.scalar() == 0.5
        e = DeformationParameter(0.3, extended=True, text="0.3")
        s = e.scalar()
        assert isinstance(s, mpmath.mpf)
        assert abs(s - mpmath.mpf("0.3")) == 0


class TestQInt:
    def test_frozen_values(self):
        assert q_int(0, 0.5) == 0.0
        assert q_int(1, 0.5) == 1.0
        assert q_int(2, 0.5) == pytest.approx(2.5, abs=1e-15)
        assert q_int(-2, 0.5) == pytest.approx(-2.5, abs=1e-15)
        assert q_int(3, 0.5) == pytest.approx(5.25, abs=1e-15)

    def test_accepts_half_integers_and_parameters(self):
        p = DeformationParameter(0.5)
        assert q_int(HalfInteger(2), p) == pytest.approx(2.5, abs=1e-15)
        v = q_int(HalfInteger(0.5), 0.5)
        q = 0.5
        assert v == pytest.approx((q ** 0.5 - q ** -0.5) / (q - 1 / q), rel=1e-15)

    def test_positive_for_positive_n(self):
        for n in range(1, 40):
            assert q_int(n, 0.5) > 0
            assert q_int(n, 0.9) > 0

    def test_classical_limit(self):
        q = 1 - 1e-6
        for n in (1, 2, 5, 17):
            assert abs(q_int(n, q) - n) / n < 1e-4

    @given(st.integers(min_value=-30, max_value=30), qs)
    def test_defining_identity(self, n, q):
        lhs = q_int(n, q) * (q - 1 / q)
        rhs = q ** n - q ** (-n)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)

    @given(st.integers(min_value=0, max_value=30), qs)
    def test_antisymmetry(self, n, q):
        assert q_int(-n, q) == pytest.approx(-q_int(n, q), rel=1e-12, abs=0)

    @given(
        st.integers(min_value=-15, max_value=15),
        st.integers(min_value=-15, max_value=15),
        qs,
    )
    def test_addition_rule(self, x, y, q):
        t1 = q ** (-y) * q_int(x, q)
        t2 = q ** x * q_int(y, q)
        # Cancellation between huge terms limits accuracy to their scale.
        scale = max(1.0, abs(t1), abs(t2))
        assert abs(q_int(x + y, q) - (t1 + t2)) <= 1e-12 * scale

    def test_extended_precision(self):
        with mpmath.workdps(50):
            p = DeformationParameter(0.5, extended=True, text="0.5")
            v = q_int(2, p)
            assert isinstance(v, mpmath.mpf)
            assert abs(v - mpmath.mpf("2.5")) < mpmath.mpf("1e-45")


class TestCgHalf:
    def test_frozen_values(self):
        assert cg_half(0.5, 0.5, +1, +1, 0.5) == pytest.approx(1.0, abs=1e-15)
        assert cg_half(0.5, 0.5, -1, +1, 0.5) == 0.0
        assert cg_half(1, 0, -1, -1, 0.5) == pytest.approx(
            -0.8728715609439696, abs=1e-15
        )

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            cg_half(0.5, 1.5, +1, +1, 0.5)
        with pytest.raises(ValueError):
            cg_half(0, 0, -1, +1, 0.5)
        with pytest.raises(ValueError):
            cg_half(1, 0.5, +1, +1, 0.5)
        with pytest.raises(ValueError):
            cg_half(1, 0, +1, 0, 0.5)

    @given(halves.filter(lambda h: h.twice >= 2), qs)
    def test_columns_orthonormal(self, l, q):
        # The pair of couplings at fixed target index forms a 2x2 rotation:
        # rows orthogonal, rows normalized.
        for m1 in half_range(-l, l - 1):
            m2 = m1 + 1
            up = (cg_half(l, m1, +1, +1, q), cg_half(l, m2, +1, -1, q))
            dn = (cg_half(l, m1, -1, +1, q), cg_half(l, m2, -1, -1, q))
            dot = up[0] * dn[0] + up[1] * dn[1]
            assert dot == pytest.approx(0.0, abs=1e-12)
            assert up[0] ** 2 + up[1] ** 2 == pytest.approx(1.0, rel=1e-12)
            assert dn[0] ** 2 + dn[1] ** 2 == pytest.approx(1.0, rel=1e-12)


class TestSpinorCS:
    def test_frozen_values(self):
        c, s = spinor_cs(0.5, 0.5, 0.5)
        assert (c, s) == (0.0, 1.0)
        c, s = spinor_cs(0.5, -0.5, 0.5)
        assert c == pytest.approx(1.0, abs=1e-15)
        assert s == 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            spinor_cs(0, 0, 0.5)
        with pytest.raises(ValueError):
            spinor_cs(1, 2, 0.5)
        with pytest.raises(ValueError):
            spinor_cs(1.5, 0, 0.5)

    @given(halves.filter(lambda h: h.twice >= 1), qs)
    def test_normalized(self, j, q):
        for mu in half_range(-j, j):
            c, s = spinor_cs(j, mu, q)
            assert c * c + s * s == pytest.approx(1.0, rel=1e-14, abs=1e-14)
