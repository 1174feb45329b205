"""Law checkers: algebra, coalgebra, form, matched pair, O-operator."""

from fractions import Fraction

import pytest

from permlie.kernel import (
    InsufficientWindowError,
    Poly,
    Template,
    TemplateSeries,
    Window,
    ess,
    pat_const,
    tee,
)
from permlie.families import (
    FormalVector,
    a_ts_product,
    adjoint_representation,
    ats_family,
    delta_a_family,
    delta_a_sym,
    delta_p_family,
    finite_catalog,
    perm_p_family,
    wn_family,
)
from permlie.axioms import (
    LawId,
    check_algebra,
    check_coalgebra,
    check_form,
    check_matched_pair,
    check_o_operator,
    check_preperm,
    check_representation,
)
from permlie.doubles import canonical_dual_actions, dual_perm_algebra

F = Fraction
ONE = F(1)


class TestAlgebraPaths:
    def test_family_path(self):
        rep = check_algebra(LawId.Perm, family=perm_p_family(), window=Window(3))
        assert rep.passed and rep.checked > 0

    def test_family_needs_window(self):
        with pytest.raises(ValueError):
            check_algebra(LawId.Perm, family=perm_p_family())

    def test_alg_path(self):
        rep = check_algebra(LawId.Perm, alg=finite_catalog()["ex-sd2"])
        assert rep.passed

    def test_product_keys_path(self):
        fam = ats_family()

        def product(a, b):
            r = a_ts_product(a, b)
            out = FormalVector()
            if r is not None:
                out.add_term(r[1], r[0])
            return out

        w = Window(3)
        rep = check_algebra(
            LawId.PreLie,
            product=product,
            keys=fam.interior_keys(w, LawId.PreLie.value),
        )
        assert rep.passed

    def test_missing_inputs_raise(self):
        with pytest.raises(ValueError):
            check_algebra(LawId.Perm)

    def test_insufficient_window(self):
        with pytest.raises(InsufficientWindowError):
            check_algebra(LawId.Perm, family=perm_p_family(), window=Window(1))


class TestAlgebraNegatives:
    def test_broken_perm_table(self):
        rep = check_algebra(LawId.Perm, alg=finite_catalog()["ex-bad2"])
        assert not rep.passed
        assert rep.violations
        labels = {v[0] for v in rep.violations}
        assert labels <= {"assoc", "left-comm"}

    def test_perturbed_ats_product_fails_prelie(self):
        # spurious t^(i+j) term added to t^i . t^j
        def bad(a, b):
            out = FormalVector()
            r = a_ts_product(a, b)
            if r is not None:
                out.add_term(r[1], r[0])
            if a[0] == "Tee" and b[0] == "Tee":
                out.add_term(tee(a[1] + b[1]), ONE)
            return out

        fam = ats_family()
        w = Window(4)
        rep = check_algebra(
            LawId.PreLie, product=bad, keys=fam.interior_keys(w, "PreLie")
        )
        assert not rep.passed
        assert len(rep.violations) == 25
        assert rep.violations[0][0] == "pre-lie"


class TestCoalgebra:
    def test_coperm_passes(self):
        fam = perm_p_family()
        w = Window(3)
        rep = check_coalgebra(
            LawId.CoPerm,
            delta=delta_p_family,
            sym_co=fam.sym_co,
            keys=fam.interior_keys(w, LawId.CoPerm.value),
            window=w,
        )
        assert rep.passed

    def test_coprelie_passes(self):
        fam = ats_family()
        w = Window(3)
        rep = check_coalgebra(
            LawId.CoPreLie,
            delta=delta_a_family,
            sym_co=fam.sym_co,
            keys=fam.interior_keys(w, LawId.CoPreLie.value),
            window=w,
        )
        assert rep.passed

    def test_perturbed_s_branch_fails_coprelie(self):
        # coefficient (i + j) instead of (i + j - 1) on the s-output branches
        def bad_sym(p, fresh):
            out = []
            for v, poly, pats in delta_a_sym(p, fresh):
                if p[0] == "Ess":
                    poly = poly + Poly.const(ONE)
                out.append((v, poly, pats))
            return out

        def bad_delta(key):
            from permlie.kernel import Fresh

            return TemplateSeries(
                2,
                tuple(
                    Template(tuple(v), poly, pats)
                    for v, poly, pats in bad_sym(pat_const(key), Fresh("j"))
                ),
            )

        fam = ats_family()
        w = Window(4)
        rep = check_coalgebra(
            LawId.CoPreLie,
            delta=bad_delta,
            sym_co=bad_sym,
            keys=fam.interior_keys(w, "CoPreLie"),
            window=w,
        )
        assert not rep.passed
        assert rep.violations
        assert all(v[0] == "co-pre-lie" for v in rep.violations)


class TestForms:
    def test_ats_form(self):
        rep = check_form(LawId.QuadPreLieForm, family=ats_family(), window=Window(4))
        assert rep.passed
        assert rep.extra["weight"] == -2
        assert rep.extra["gram_rank"] == rep.extra["gram_size"]

    def test_perm_p_form(self):
        rep = check_form(LawId.QuadPermForm, family=perm_p_family(), window=Window(3))
        assert rep.passed
        assert rep.extra["weight"] == 2

    def test_degenerate_form_flagged(self):
        alg = finite_catalog()["ex-sd2"]

        def zero_form(a, b):
            return F(0)

        rep = check_form(
            LawId.QuadPermForm,
            form=zero_form,
            product=alg.product,
            keys=alg.basis_keys(),
        )
        assert not rep.passed
        assert any(v[0] == "degenerate" for v in rep.violations)

    def test_wn_has_no_form(self):
        assert wn_family(1).form is None


class TestMatchedPair:
    def test_canonical_actions_pass(self):
        cat = finite_catalog()
        p1 = cat["ex-1p"]
        dual = dual_perm_algebra(p1, p1.delta)
        l12, r12, l21, r21 = canonical_dual_actions(p1, dual)
        rep = check_matched_pair(p1, dual, l12, r12, l21, r21)
        assert rep.passed

    def test_perturbed_action_fails(self):
        cat = finite_catalog()
        p1 = cat["ex-1p"]
        dual = dual_perm_algebra(p1, p1.delta)
        l12, r12, l21, r21 = canonical_dual_actions(p1, dual)
        bad = tuple(
            tuple(tuple(v + ONE for v in row) for row in mtx) for mtx in l12
        )
        rep = check_matched_pair(p1, dual, bad, r12, l21, r21)
        assert not rep.passed
        labels = {v[0] for v in rep.violations}
        assert labels & {"pmp6", "pmp8", "assembled-assoc", "assembled-left-comm"}


class TestOOperator:
    def test_identity_on_preperm_passes(self):
        pp = finite_catalog()["ex-preperm-1"]
        from permlie.doubles import preperm_representation

        rep = check_o_operator(pp, preperm_representation(pp), ((ONE,),))
        assert rep.passed

    def test_identity_on_adjoint_fails(self):
        onep = finite_catalog()["ex-1p"]
        rep = check_o_operator(onep, adjoint_representation(onep), ((ONE,),))
        assert not rep.passed and rep.violations

    def test_representation_validates(self):
        onep = finite_catalog()["ex-1p"]
        rep = check_representation(onep, adjoint_representation(onep))
        assert rep.passed


class TestPrePerm:
    def test_good_and_bad(self):
        cat = finite_catalog()
        assert check_preperm(cat["ex-preperm-1"]).passed
        rep = check_preperm(cat["ex-preperm-bad"])
        assert not rep.passed
        assert len(rep.violations) == 2
