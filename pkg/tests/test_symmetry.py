import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qsu2.hilbert import commutator, enumerate_basis, frobenius_norm, operator_norm
from qsu2.qnum import q_int
from qsu2.symmetry import (
    GENERATOR_NAMES,
    AlgebraElement,
    act,
    build_symmetry,
    casimir,
    sigma_l,
)

Q = 0.5
gen_names = st.sampled_from(GENERATOR_NAMES)
hopf_names = st.sampled_from(("k", "e", "f"))
action_names = st.sampled_from(("left", "right", "second_left"))


def _el(name, q=Q):
    return AlgebraElement.gen(name, q)


def _assert_zero(element, tol=1e-12):
    assert element.is_zero(tol), repr(element)


class TestAlgebraElement:
    def test_normal_ordering_relations_exact(self):
        q = Q
        a, b, bs, as_ = (_el(x) for x in ("a", "b", "b*", "a*"))
        one = AlgebraElement.unit(q)
        _assert_zero(b * a - q * (a * b), tol=0.0)
        _assert_zero(bs * a - q * (a * bs), tol=0.0)
        _assert_zero(b * bs - bs * b, tol=0.0)
        _assert_zero(as_ * a + (q * q) * (bs * b) - one, tol=0.0)
        _assert_zero(a * as_ + b * bs - one, tol=0.0)

    def test_derived_relations(self):
        q = Q
        a, b, bs, as_ = (_el(x) for x in ("a", "b", "b*", "a*"))
        _assert_zero(as_ * b - q * (b * as_))
        _assert_zero(as_ * bs - q * (bs * as_))
        _assert_zero(a * b - (1 / q) * (b * a))

    def test_star(self):
        q = Q
        ab = _el("a") * _el("b")
        assert (ab.star() - _el("b*") * _el("a*")).is_zero(0.0)
        mixed = 2j * ab + AlgebraElement.unit(q)
        twice = mixed.star().star()
        _assert_zero(twice - mixed, tol=0.0)

    def test_word_length_and_coefficient(self):
        ab = _el("a") * _el("b")
        assert ab.word_length == 2
        assert ab.coefficient((1, 1, 0, 0)) == 1.0
        assert AlgebraElement.unit(Q).word_length == 0

    def test_mixed_q_rejected(self):
        with pytest.raises(ValueError):
            _el("a", 0.5) * _el("b", 0.3)

    @given(gen_names, gen_names, gen_names)
    def test_associativity(self, x, y, z):
        ex, ey, ez = _el(x), _el(y), _el(z)
        _assert_zero((ex * ey) * ez - ex * (ey * ez), tol=1e-13)


class TestActionTables:
    def test_frozen_single_entries(self):
        q = Q
        assert (act("left", "f", _el("b")) - _el("a")).is_zero(0.0)
        assert (act("second_left", "e", _el("b")) - (1 / q) * _el("a*")).is_zero(1e-15)
        assert act("left", "f", _el("a")).is_zero(0.0)
        assert (act("right", "f", _el("a")) + q * _el("b*")).is_zero(1e-15)
        got = act("left", "k", _el("a"))
        assert got.coefficient((1, 0, 0, 0)) == pytest.approx(math.sqrt(q))

    def test_k_on_word(self):
        ab = _el("a") * _el("b")
        assert (act("left", "k", ab) - ab).is_zero(1e-15)
        assert (act("second_left", "k", ab) - Q * ab).is_zero(1e-15)

    @given(action_names, hopf_names, gen_names, gen_names)
    def test_module_algebra_rule(self, action, h, x, y):
        ex, ey = _el(x), _el(y)
        lhs = act(action, h, ex * ey)
        if h == "k":
            rhs = act(action, "k", ex) * act(action, "k", ey)
        else:
            rhs = act(action, h, ex) * act(action, "k", ey) + act(
                action, "k_inv", ex
            ) * act(action, h, ey)
        _assert_zero(lhs - rhs, tol=1e-13)

    @given(hopf_names, hopf_names, gen_names)
    def test_left_right_actions_commute(self, h, g, x):
        ex = _el(x)
        one_way = act("right", g, act("left", h, ex))
        other = act("left", h, act("right", g, ex))
        _assert_zero(one_way - other, tol=1e-13)

    def test_unknown_inputs(self):
        with pytest.raises(ValueError):
            act("diagonal", "k", _el("a"))
        with pytest.raises(ValueError):
            act("left", "g", _el("a"))


class TestSigmaL:
    def test_spin_half_k(self):
        m = sigma_l("k", 0.5, Q).dense()
        np.testing.assert_allclose(
            m, np.diag([math.sqrt(Q), 1 / math.sqrt(Q)]), atol=1e-15
        )

    def test_top_weight_annihilated(self):
        m = sigma_l("f", 2, Q).dense()
        assert np.all(m[:, 0] == 0)

    def test_star_representation(self):
        for l in (0.5, 1, 1.5):
            e = sigma_l("e", l, Q)
            f = sigma_l("f", l, Q)
            assert operator_norm(e.adjoint() - f) < 1e-14

    @pytest.mark.parametrize("l", [0.5, 1, 2.5])
    def test_defining_relations(self, l):
        q = Q
        k = sigma_l("k", l, q)
        kinv = sigma_l("k_inv", l, q)
        e = sigma_l("e", l, q)
        f = sigma_l("f", l, q)
        assert operator_norm(e @ k - q * (k @ e)) < 1e-12
        assert operator_norm(k @ f - q * (f @ k)) < 1e-12
        lhs = k @ k - kinv @ kinv
        rhs = (q - 1 / q) * (f @ e - e @ f)
        assert operator_norm(lhs - rhs) < 1e-12


class TestBuildSymmetry:
    reg = enumerate_basis("regular", 2)
    spin = enumerate_basis("spinor", 2)

    def test_k_diagonals(self):
        lam_k = build_symmetry("lambda", "k", self.reg, Q).dense()
        expect = np.diag([Q ** (ix.m.twice / 2) for ix in self.reg.indices])
        np.testing.assert_allclose(lam_k, expect, atol=1e-15)
        lamp_k = build_symmetry("lambda_prime", "k", self.spin, Q).dense()
        expect = np.diag([Q ** (ix.mu.twice / 2) for ix in self.spin.indices])
        np.testing.assert_allclose(lamp_k, expect, atol=1e-15)
        rhop_k = build_symmetry("rho_prime", "k", self.spin, Q).dense()
        expect = np.diag([Q ** (ix.n.twice / 2) for ix in self.spin.indices])
        np.testing.assert_allclose(rhop_k, expect, atol=1e-15)

    def test_rho_prime_ladder_values(self):
        rf = build_symmetry("rho_prime", "f", self.spin, Q)
        col = self.spin.pos2[(4, 0, -1, 1)]
        row = self.spin.pos2[(4, 0, 1, 1)]
        want = math.sqrt(q_int(2, Q) * q_int(2, Q))
        assert rf.dense()[row, col] == pytest.approx(want, rel=1e-14)
        # top right-weight of the up tower is annihilated
        col_top = self.spin.pos2[(2, 0, 3, 0)]
        assert np.all(rf.dense()[:, col_top] == 0)

    @pytest.mark.parametrize(
        "which,basis",
        [
            ("lambda", "reg"),
            ("rho", "reg"),
            ("lambda_prime", "spin"),
            ("rho_prime", "spin"),
        ],
    )
    def test_defining_relations(self, which, basis):
        q = Q
        b = getattr(self, basis)
        k = build_symmetry(which, "k", b, q)
        kinv = build_symmetry(which, "k_inv", b, q)
        e = build_symmetry(which, "e", b, q)
        f = build_symmetry(which, "f", b, q)
        assert operator_norm(e @ k - q * (k @ e)) < 1e-12
        assert operator_norm(k @ f - q * (f @ k)) < 1e-12
        lhs = k @ k - kinv @ kinv
        rhs = (q - 1 / q) * (f @ e - e @ f)
        assert operator_norm(lhs - rhs) < 1e-12
        assert operator_norm(e.adjoint() - f) < 1e-14

    def test_left_right_commute(self):
        for h1 in ("k", "e", "f"):
            for h2 in ("k", "e", "f"):
                lam = build_symmetry("lambda", h1, self.reg, Q)
                rho = build_symmetry("rho", h2, self.reg, Q)
                assert frobenius_norm(commutator(lam, rho)) < 1e-12
                lamp = build_symmetry("lambda_prime", h1, self.spin, Q)
                rhop = build_symmetry("rho_prime", h2, self.spin, Q)
                assert frobenius_norm(commutator(lamp, rhop)) < 1e-12

    def test_basis_kind_enforced(self):
        with pytest.raises(ValueError):
            build_symmetry("lambda", "k", self.spin, Q)
        with pytest.raises(ValueError):
            build_symmetry("rho_prime", "k", self.reg, Q)
        with pytest.raises(ValueError):
            build_symmetry("mu", "k", self.reg, Q)


class TestCasimir:
    spin = enumerate_basis("spinor", 2)

    def test_eigenvalues(self):
        q = Q
        lam_c = casimir("lambda_prime", self.spin, q).dense()
        rho_c = casimir("rho_prime", self.spin, q).dense()
        for p, ix in enumerate(self.spin.indices):
            j2 = ix.j.twice
            assert lam_c[p, p] == pytest.approx(q ** (j2 + 1) + q ** -(j2 + 1), rel=1e-14)
            pw = j2 + 2 if ix.spin == "up" else j2
            assert rho_c[p, p] == pytest.approx(q ** pw + q ** -pw, rel=1e-14)

    @pytest.mark.parametrize("which", ["lambda_prime", "rho_prime"])
    def test_matches_generator_combination(self, which):
        q = Q
        k = build_symmetry(which, "k", self.spin, q)
        kinv = build_symmetry(which, "k_inv", self.spin, q)
        e = build_symmetry(which, "e", self.spin, q)
        f = build_symmetry(which, "f", self.spin, q)
        built = q * (k @ k) + (1 / q) * (kinv @ kinv) + (q - 1 / q) ** 2 * (e @ f)
        assert operator_norm(built - casimir(which, self.spin, q)) < 1e-12

    def test_classical_limit(self):
        q = 1 - 1e-6
        basis = enumerate_basis("spinor", 0)
        c = casimir("lambda_prime", basis, q).dense()
        assert abs(c[0, 0] - 2.0) < 1e-4

    def test_restricted_to_spinor_symmetries(self):
        with pytest.raises(ValueError):
            casimir("lambda", enumerate_basis("regular", 1), Q)
        with pytest.raises(ValueError):
            casimir("lambda_prime", enumerate_basis("regular", 1), Q)
