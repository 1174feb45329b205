"""Concrete graded families and the finite catalog."""

from fractions import Fraction

import pytest

from permlie.kernel import Window, ess, key_degree, mono, tee, wn
from permlie.families import (
    FiniteAlgebra,
    a_ts_product,
    ats_family,
    conjugated_table,
    delta_a_family,
    delta_p_family,
    finite_catalog,
    perm_p_family,
    random_invertible,
    random_table,
    tensor_catalog,
    wn_codelta,
    wn_family,
)
from permlie.axioms import LawId, check_algebra, check_preperm

F = Fraction


class TestAtsProduct:
    def test_tee_tee(self):
        assert a_ts_product(tee(2), tee(3)) == (F(3), tee(4))
        assert a_ts_product(tee(2), tee(0)) is None

    def test_tee_ess(self):
        # coefficient 2i + j - 1
        assert a_ts_product(tee(2), ess(3)) == (F(6), ess(4))
        assert a_ts_product(tee(1), ess(-1)) is None

    def test_ess_tee(self):
        assert a_ts_product(ess(2), tee(3)) == (F(3), ess(4))

    def test_ess_ess_vanishes(self):
        assert a_ts_product(ess(2), ess(3)) is None

    def test_product_degree_additive(self):
        # the grading constants are chosen so every family multiplies
        # degree-additively
        for fam in (ats_family(), perm_p_family(), wn_family(1), wn_family(2)):
            for a in fam.keys(Window(2)):
                for b in fam.keys(Window(2)):
                    r = fam.product_one(a, b)
                    if r is not None:
                        assert key_degree(r[1]) == key_degree(a) + key_degree(b)


class TestPermPProduct:
    def test_unit_coefficients_and_shift(self):
        fam = perm_p_family()
        r = fam.product_one(mono(1, 2, 1), mono(0, 3, 2))
        assert r == (F(1), mono(2, 5, 2))
        r = fam.product_one(mono(1, 2, 2), mono(0, 3, 1))
        assert r == (F(1), mono(1, 6, 1))

    def test_target_slot_from_left_factor(self):
        fam = perm_p_family()
        # direction slot of the output always copies the right factor
        for s in (1, 2):
            for t in (1, 2):
                r = fam.product_one(mono(0, 0, s), mono(0, 0, t))
                assert r[1][3] == t


class TestWnProduct:
    def test_w1_matches_single_variable_rule(self):
        fam = wn_family(1)
        assert fam.product_one(wn((2,), 1), wn((3,), 1)) == (F(3), wn((4,), 1))
        assert fam.product_one(wn((2,), 1), wn((0,), 1)) is None

    def test_w2_coefficient_is_left_slot_exponent(self):
        fam = wn_family(2)
        assert fam.product_one(wn((1, 2), 1), wn((2, 3), 2)) == (F(2), wn((2, 5), 2))
        assert fam.product_one(wn((1, 2), 1), wn((0, 3), 2)) is None

    def test_w1_is_novikov_w2_is_not(self):
        assert check_algebra(
            LawId.Novikov, family=wn_family(1), window=Window(3)
        ).passed
        rep = check_algebra(LawId.Novikov, family=wn_family(2), window=Window(3))
        assert not rep.passed and rep.violations
        # but W2 still satisfies the weaker law
        assert check_algebra(
            LawId.PreLie, family=wn_family(2), window=Window(3)
        ).passed


class TestCoproducts:
    def test_delta_a_tee_coefficients(self):
        d = delta_a_family(tee(2))
        # branch (i + j - 1) s-right, branch (i - j) s-left
        assert d.coefficient_at((tee(-1), ess(2))) == F(2)
        assert d.coefficient_at((ess(-1), tee(2))) == F(1)

    def test_delta_a_ess_single_branch(self):
        d = delta_a_family(ess(2))
        assert d.coefficient_at((ess(-1), ess(2))) == F(2)
        assert d.coefficient_at((tee(-1), ess(2))) == F(0)

    def test_delta_p_lands_in_both_directions(self):
        d = delta_p_family(mono(0, 0, 1))
        sup = d.support_in_box(2)
        assert sup
        dirs = {k1[3] for (k1, k2) in sup}
        assert dirs <= {1, 2}

    def test_wn_codelta_exists_on_interior(self):
        d = wn_codelta(1, wn((1,), 1))
        assert d.support_in_box(3)


class TestForms:
    def test_omega_values(self):
        fam = ats_family()
        assert fam.form(ess(2), tee(-2)) == F(1)
        assert fam.form(tee(-2), ess(2)) == F(-1)
        assert fam.form(ess(2), tee(1)) == F(0)
        assert fam.form(tee(1), tee(-1)) == F(0)
        assert fam.form_m == -2

    def test_kappa_weight(self):
        fam = perm_p_family()
        assert fam.form_m == 2
        w = Window(2)
        for a in fam.keys(w):
            for b in fam.keys(w):
                if fam.form(a, b):
                    assert key_degree(a) + key_degree(b) == 2

    def test_form_partners_agree_with_form(self):
        for fam in (ats_family(), perm_p_family()):
            for a in fam.keys(Window(2)):
                for b, c in fam.form_partners(a):
                    assert fam.form(a, b) == c


class TestCatalog:
    def test_ids_and_kinds(self):
        cat = finite_catalog()
        kinds = {aid: alg.kind for aid, alg in cat.items()}
        assert kinds["ex-1p"] == "Perm"
        assert kinds["ex-sd2"] == "Perm"
        assert kinds["ex-nilp2"] == "Perm"
        assert kinds["ex-bad2"] == "none"
        assert kinds["ex-prelie-1"] == "PreLie"
        assert kinds["ex-prelie-n2"] == "PreLie"

    def test_perm_members_pass_bad_fails(self):
        cat = finite_catalog()
        for aid in ("ex-1p", "ex-sd2", "ex-nilp2"):
            assert check_algebra(LawId.Perm, alg=cat[aid]).passed, aid
        rep = check_algebra(LawId.Perm, alg=cat["ex-bad2"])
        assert not rep.passed and rep.violations

    def test_preperm_entries(self):
        cat = finite_catalog()
        assert check_preperm(cat["ex-preperm-1"]).passed
        rep = check_preperm(cat["ex-preperm-bad"])
        assert not rep.passed and rep.violations

    def test_tensor_catalog_targets(self):
        tens = tensor_catalog()
        cat = finite_catalog()
        for name, (aid, r) in tens.items():
            assert aid in cat, name
            for k1, k2, c in r.terms:
                assert c != 0

    def test_algebra_accessors(self):
        alg = finite_catalog()["ex-sd2"]
        assert alg.dim == 2
        assert len(alg.basis_keys()) == 2
        v = alg.product(alg.key(0), alg.key(1))
        assert dict(v.items()) == {alg.key(1): F(1)}


class TestRandomTables:
    def test_deterministic_for_seed(self):
        import random

        t1 = random_table(random.Random(5), 2)
        t2 = random_table(random.Random(5), 2)
        assert t1 == t2

    def test_conjugation_preserves_perm(self):
        import random

        rng = random.Random(3)
        cat = finite_catalog()
        base = cat["ex-sd2"]
        s = random_invertible(rng, 2)
        alg = FiniteAlgebra(
            id="conj",
            space="C2",
            dim=2,
            labels=("a", "b"),
            kind="Perm",
            mul=conjugated_table(base.mul, s, 2),
        )
        assert check_algebra(LawId.Perm, alg=alg).passed
