"""Kernel layer: affine indices, polynomials, template series, windows."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from permlie.kernel import (
    Aff,
    CheckReport,
    FormalVector,
    IllPosedTemplateError,
    InsufficientWindowError,
    Poly,
    Template,
    TemplateSeries,
    Window,
    av,
    ess,
    fin,
    key_degree,
    key_str,
    mono,
    pair,
    pat_const,
    pat_ess,
    pat_tee,
    sparse_rref,
    forced_zero_columns,
    tee,
    wn,
)
from permlie.families import delta_a_family

F = Fraction


class TestAff:
    def test_str_forms(self):
        k = av("k")
        assert str(2 * k + 1) == "2k+1"
        assert str(k + 2) == "k+2"
        assert str(-k) == "-k"
        assert str(Aff.of(3)) == "3"

    def test_arithmetic_matches_eval(self):
        k = av("k")
        e = 3 * k - 2 + k
        assert e.eval({"k": 5}) == 18

    @given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
    def test_linear_eval(self, a, b, x):
        e = a * av("x") + b
        assert e.eval({"x": x}) == a * x + b


class TestPoly:
    def test_of_and_add(self):
        p = Poly.of(av("i") + 2) + Poly.const(F(1))
        assert p.eval({"i": 4}) == 7

    def test_const(self):
        assert Poly.const(F(5)).eval({}) == 5


class TestKeys:
    def test_total_order_and_str(self):
        ks = [tee(1), ess(-2), mono(0, 1, 2), pair(fin("A", 0), tee(3))]
        assert sorted(ks) == sorted(ks, key=lambda k: k)
        for k in ks:
            assert isinstance(key_str(k), str) and key_str(k)

    def test_degree_additive_on_pair(self):
        assert key_degree(pair(fin("A", 0), tee(3))) == key_degree(tee(3))


class TestTemplateSeries:
    def test_coefficient_at_delta_a(self):
        d = delta_a_family(tee(2))
        assert d.coefficient_at((tee(-1), ess(2))) == F(2)
        d = delta_a_family(ess(1))
        assert d.coefficient_at((ess(-3), ess(3))) == F(3)

    def test_flip_hat_involution(self):
        d = delta_a_family(tee(2))
        dd = d.flip_hat().flip_hat()
        assert (d - dd).support_in_box(4) == {}

    def test_permuted_support(self):
        d = delta_a_family(tee(1))
        sup = d.support_in_box(3)
        flipped = d.permuted((1, 0)).support_in_box(3)
        assert flipped == {(b, a): c for (a, b), c in sup.items()}

    def test_scale_and_sub(self):
        d = delta_a_family(tee(2))
        assert (d.scale(F(2)) - d - d).support_in_box(4) == {}

    def test_equal_on_box(self):
        d = delta_a_family(tee(2))
        assert d.equal_on_box(d.scale(F(1)), 4)
        assert not d.equal_on_box(d.scale(F(2)), 4)

    def test_support_respects_box(self):
        d = delta_a_family(tee(0))
        for (a, b), c in d.support_in_box(3).items():
            assert abs(a[1]) <= 3 and abs(b[1]) <= 3
            assert c != 0


class TestIllPosed:
    def test_unused_variable_raises(self):
        t = Template(("k",), Poly.const(F(1)), (pat_tee(0), pat_tee(1)))
        s = TemplateSeries(2, (t,))
        with pytest.raises(IllPosedTemplateError):
            s.support_in_box(2)

    def test_unorderable_slot_raises(self):
        t = Template(
            ("a", "b"),
            Poly.const(F(1)),
            (pat_tee(av("a") + av("b")), pat_ess(0)),
        )
        s = TemplateSeries(2, (t,))
        with pytest.raises(IllPosedTemplateError):
            s.support_in_box(2)


class TestWindow:
    def test_interior_guard(self):
        w = Window(2, 5)
        with pytest.raises(InsufficientWindowError) as err:
            w.require_interior("Perm")
        assert "Perm" in str(err.value)
        assert err.value.n == 2

    def test_margin_defaulted(self):
        assert Window(3).n == 3


class TestCheckReport:
    def test_build_sorts_violations(self):
        v = [("z", (tee(2),), ()), ("a", (tee(1),), ())]
        rep = CheckReport.build("X", Window(3, 0), 2, v, {})
        assert [x[0] for x in rep.violations] == ["a", "z"]
        assert not rep.passed
        assert "fail" in rep.summary().lower() or "FAIL" in rep.summary()

    def test_passed_summary(self):
        rep = CheckReport.build("X", Window(3, 0), 10, [], {})
        assert rep.passed and "pass" in rep.summary()


class TestFormalVector:
    def test_add_and_zero(self):
        v = FormalVector()
        v.add_term(tee(1), F(2))
        v.add_term(tee(1), F(-2))
        assert v.is_zero()

    def test_single(self):
        v = FormalVector.single(tee(1), F(3))
        assert dict(v.items()) == {tee(1): F(3)}


class TestLinearAlgebra:
    def test_sparse_rref_rank(self):
        # x + y = 0, x - y = 0 forces x = y = 0
        rows = [{0: F(1), 1: F(1)}, {0: F(1), 1: F(-1)}]
        basis = sparse_rref(rows)
        assert len(basis) == 2
        assert forced_zero_columns(basis) == {0, 1}

    def test_underdetermined(self):
        rows = [{0: F(1), 1: F(1)}]
        basis = sparse_rref(rows)
        assert len(basis) == 1
        assert forced_zero_columns(basis) == set()

    def test_rref_rows_reduced_against_pivots(self):
        rows = [{0: F(2), 1: F(2)}, {1: F(3), 2: F(3)}]
        basis = sparse_rref(rows)
        for lead, row in basis.items():
            assert row[lead] == 1
            for other in basis:
                if other != lead:
                    assert other not in row


class TestPatConst:
    def test_round_trip_tags(self):
        for k in (tee(2), ess(-1), mono(1, 0, 2), wn((1, 2), 1),
                  fin("A", 0), pair(fin("A", 0), tee(1))):
            assert pat_const(k)[0] == k[0]
