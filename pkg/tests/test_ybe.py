"""Quadratic equations: perm-YBE, S-equation, CYBE, and coboundary structures."""

import random
from fractions import Fraction

import pytest

from permlie.kernel import Fresh, Window, ess, pair, pat_const, tee
from permlie.families import (
    FiniteAlgebra,
    TensorElement,
    adjoint_representation,
    ats_family,
    conjugated_table,
    finite_catalog,
    random_invertible,
    tensor_catalog,
    wn_family,
)
from permlie.axioms import LawId, check_bialgebra, check_coalgebra
from permlie.affinize import induced_lie_bracket, _finite_delta_series
from permlie.ybe import (
    OOperatorError,
    ThreeTensor,
    affinize_r,
    coboundary_coalgebra_report,
    coboundary_delta_perm,
    coboundary_delta_prelie,
    cybe_residual,
    grid_search_symmetric_r,
    lie_delta_from_r,
    o_to_ybe,
    perm_ybe_residual,
    r_sharp,
    s_equation_residual,
)
from permlie.doubles import preperm_representation

F = Fraction


class TestPermYbeResidual:
    def test_catalog_solutions_are_zero(self):
        cat = finite_catalog()
        tens = tensor_catalog()
        assert perm_ybe_residual(cat["ex-sd2"], tens["r-sd2"][1]).is_zero()
        assert perm_ybe_residual(cat["ex-1p"], tens["r-1p"][1]).is_zero()

    def test_nilpotent_nonsolution_residual(self):
        cat = finite_catalog()
        nilp = cat["ex-nilp2"]
        res = perm_ybe_residual(nilp, tensor_catalog()["r-nilp2"][1])
        k0, k1 = nilp.key(0), nilp.key(1)
        assert res == ThreeTensor.of([(k0, k1, k0, F(1)), (k0, k0, k1, F(-1))])

    def test_empty_tensor_is_solution(self):
        cat = finite_catalog()
        assert perm_ybe_residual(cat["ex-sd2"], TensorElement.of([])).is_zero()


class TestSEquation:
    def test_known_residual(self):
        cat = finite_catalog()
        pl2 = cat["ex-prelie-n2"]
        res = s_equation_residual(pl2, tensor_catalog()["r-prelie-n2"][1])
        q0, q1 = pl2.key(0), pl2.key(1)
        assert res == ThreeTensor.of([(q1, q0, q0, F(-1)), (q0, q1, q0, F(1))])


class TestCoboundaryTables:
    def test_perm_tables(self):
        cat = finite_catalog()
        tens = tensor_catalog()
        d = coboundary_delta_perm(cat["ex-1p"], tens["r-1p"][1])
        assert d == {0: ((0, 0, F(1)),)}
        d = coboundary_delta_perm(cat["ex-sd2"], tens["r-sd2"][1])
        assert d == {0: ((0, 1, F(1)), (1, 0, F(1))), 1: ((1, 1, F(1)),)}

    def test_prelie_table(self):
        pl1 = finite_catalog()["ex-prelie-1"]
        r = TensorElement.of([(pl1.key(0), pl1.key(0), F(1))])
        assert coboundary_delta_prelie(pl1, r) == {0: ((0, 0, F(1)),)}

    def test_pb1_automatic_for_any_r(self):
        # the first compatibility never constrains a coboundary coproduct
        cat = finite_catalog()
        rng = random.Random(11)
        for trial in range(30):
            alg = cat["ex-sd2"] if trial % 2 else cat["ex-nilp2"]
            terms = []
            for i in range(2):
                for j in range(2):
                    v = rng.randint(-3, 3)
                    if v:
                        terms.append((alg.key(i), alg.key(j), F(v)))
            dt = coboundary_delta_perm(alg, TensorElement.of(terms))
            rep = check_bialgebra(LawId.PermBi, alg=alg, delta_table=dt)
            assert not [v for v in rep.violations if v[0] == "pb1"]

    def test_symmetric_solution_gives_bialgebra(self):
        cat = finite_catalog()
        tens = tensor_catalog()
        for nm, rnm in (("ex-sd2", "r-sd2"), ("ex-1p", "r-1p")):
            alg, r = cat[nm], tens[rnm][1]
            assert r.is_symmetric()
            dt = coboundary_delta_perm(alg, r)
            assert check_bialgebra(LawId.PermBi, alg=alg, delta_table=dt).passed


class TestCoalgebraCriterion:
    def test_agrees_with_direct_check(self):
        cat = finite_catalog()
        rng = random.Random(11)
        for trial in range(40):
            alg = cat["ex-sd2"] if trial % 2 else cat["ex-nilp2"]
            if trial % 5 == 0:
                s = random_invertible(rng, 2)
                alg = FiniteAlgebra(
                    id="rnd", space="R", dim=2, labels=("a", "b"), kind="Perm",
                    mul=conjugated_table(alg.mul, s, 2),
                )
            terms = []
            for i in range(2):
                for j in range(2):
                    v = rng.randint(-2, 2)
                    if v:
                        terms.append((alg.key(i), alg.key(j), F(v)))
            r = TensorElement.of(terms)
            work = FiniteAlgebra(
                id=alg.id, space=alg.space, dim=alg.dim, labels=alg.labels,
                kind=alg.kind, mul=alg.mul, delta=coboundary_delta_perm(alg, r),
            )
            direct = check_coalgebra(
                LawId.CoPerm,
                delta=lambda k: _finite_delta_series(work, k),
                sym_co=work.sym_delta,
                keys=work.basis_keys(),
                window=Window(0, 0),
                margin=0,
            )
            crit = coboundary_coalgebra_report(alg, r)
            assert direct.passed == crit.passed, trial


class TestRSharp:
    def test_matrices(self):
        cat = finite_catalog()
        tens = tensor_catalog()
        mat, rep = r_sharp(cat["ex-sd2"], tens["r-sd2"][1])
        assert mat == ((F(0), F(1)), (F(1), F(0)))
        assert rep.passed
        _, rep = r_sharp(cat["ex-nilp2"], tens["r-nilp2"][1])
        assert not rep.passed
        _, rep = r_sharp(cat["ex-1p"], tens["r-1p"][1])
        assert rep.passed

    def test_criterion_matches_residual_for_symmetric_r(self):
        cat = finite_catalog()
        rng = random.Random(7)
        for trial in range(30):
            alg = cat["ex-sd2"] if trial % 2 else cat["ex-nilp2"]
            terms = []
            for i in range(2):
                for j in range(i, 2):
                    v = rng.randint(-2, 2)
                    if v:
                        terms.append((alg.key(i), alg.key(j), F(v)))
                        if i != j:
                            terms.append((alg.key(j), alg.key(i), F(v)))
            r = TensorElement.of(terms)
            assert r.is_symmetric()
            _, rep = r_sharp(alg, r)
            assert rep.passed == perm_ybe_residual(alg, r).is_zero(), trial


class TestOOperatorRoute:
    def test_identity_on_preperm_gives_solution(self):
        pp = finite_catalog()["ex-preperm-1"]
        rep = preperm_representation(pp)
        double, r = o_to_ybe(((F(1),),), pp, rep)
        assert double.dim == 2
        e, es = double.key(0), double.key(1)
        assert r == TensorElement.of([(e, es, F(1)), (es, e, F(1))])
        assert perm_ybe_residual(double, r).is_zero()

    def test_scaled_map_still_works_here(self):
        pp = finite_catalog()["ex-preperm-1"]
        d2, r2 = o_to_ybe(((F(2),),), pp, preperm_representation(pp))
        assert perm_ybe_residual(d2, r2).is_zero()

    def test_identity_on_adjoint_raises(self):
        onep = finite_catalog()["ex-1p"]
        with pytest.raises(OOperatorError) as err:
            o_to_ybe(((F(1),),), onep, adjoint_representation(onep))
        assert not err.value.report.passed
        assert err.value.report.violations


class TestGridSearch:
    def test_dim1_counts(self):
        sols = grid_search_symmetric_r(finite_catalog()["ex-1p"], 2)
        assert len(sols) == 5

    def test_nilpotent_counts_and_validity(self):
        nilp = finite_catalog()["ex-nilp2"]
        sols = grid_search_symmetric_r(nilp, 1)
        assert len(sols) == 9
        for s in sols:
            assert perm_ybe_residual(nilp, s).is_zero()


class TestAffinizeR:
    def test_coefficients(self):
        onep = finite_catalog()["ex-1p"]
        rt = affinize_r(tensor_catalog()["r-1p"][1], ats_family(), Window(4, 0))
        P = onep.key(0)
        assert rt.coefficient_at((pair(P, tee(2)), pair(P, ess(-2)))) == F(1)
        assert rt.coefficient_at((pair(P, ess(-2)), pair(P, tee(2)))) == F(-1)
        assert rt.coefficient_at((pair(P, tee(2)), pair(P, tee(-2)))) == F(0)

    def test_result_is_skew(self):
        rt = affinize_r(tensor_catalog()["r-sd2"][1], ats_family())
        assert (rt + rt.flip_hat()).support_in_box(4) == {}

    def test_family_without_pairing_rejected(self):
        with pytest.raises(ValueError):
            affinize_r(tensor_catalog()["r-1p"][1], wn_family(1), Window(3, 0))


class TestWorkedCobracket:
    def test_all_four_rows(self):
        cat = finite_catalog()
        sd2 = cat["ex-sd2"]
        fam = ats_family()
        _, sbr = induced_lie_bracket(sd2, fam)
        rt = affinize_r(tensor_catalog()["r-sd2"][1], fam)
        E, Fk = sd2.key(0), sd2.key(1)
        k = m = 2
        dE = lie_delta_from_r(sbr, rt, pair(E, tee(k)))
        dEs = lie_delta_from_r(sbr, rt, pair(E, ess(m)))
        dF = lie_delta_from_r(sbr, rt, pair(Fk, tee(k)))
        dFs = lie_delta_from_r(sbr, rt, pair(Fk, ess(m)))
        for j in range(-3, 4):
            s = k + j - 1
            assert dE.coefficient_at((pair(E, tee(-j)), pair(Fk, ess(s)))) == F(-k)
            assert dE.coefficient_at((pair(Fk, tee(-j)), pair(E, ess(s)))) == F(-k)
            assert dE.coefficient_at((pair(Fk, ess(s)), pair(E, tee(-j)))) == F(k)
            assert dE.coefficient_at((pair(E, ess(s)), pair(Fk, tee(-j)))) == F(k)
            assert dE.coefficient_at((pair(E, tee(-j)), pair(E, ess(s)))) == F(0)
            cf = F(2 * j + m - 1)
            assert dEs.coefficient_at((pair(E, ess(-j)), pair(Fk, ess(s)))) == cf
            assert dEs.coefficient_at((pair(Fk, ess(-j)), pair(E, ess(s)))) == cf
            assert dEs.coefficient_at((pair(E, ess(-j)), pair(E, ess(s)))) == F(0)
            assert dF.coefficient_at((pair(Fk, ess(s)), pair(Fk, tee(-j)))) == F(k)
            assert dF.coefficient_at((pair(Fk, tee(-j)), pair(Fk, ess(s)))) == F(-k)
            assert dF.coefficient_at((pair(E, tee(-j)), pair(Fk, ess(s)))) == F(0)
            assert dFs.coefficient_at((pair(Fk, ess(-j)), pair(Fk, ess(s)))) == cf
            assert dFs.coefficient_at((pair(E, ess(-j)), pair(Fk, ess(s)))) == F(0)


class TestCybe:
    def test_solution_passes(self):
        cat = finite_catalog()
        fam = ats_family()
        _, sbr = induced_lie_bracket(cat["ex-sd2"], fam)
        rt = affinize_r(tensor_catalog()["r-sd2"][1], fam)
        assert cybe_residual(sbr, rt, Window(3, 0)).passed

    def test_nonsolution_fails(self):
        cat = finite_catalog()
        fam = ats_family()
        _, sbr = induced_lie_bracket(cat["ex-nilp2"], fam)
        rt = affinize_r(tensor_catalog()["r-nilp2"][1], fam)
        rep = cybe_residual(sbr, rt, Window(3, 0))
        assert not rep.passed and rep.violations

    def test_window_guard(self):
        cat = finite_catalog()
        fam = ats_family()
        _, sbr = induced_lie_bracket(cat["ex-sd2"], fam)
        rt = affinize_r(tensor_catalog()["r-sd2"][1], fam)
        with pytest.raises(Exception):
            cybe_residual(sbr, rt, Window(0, 0))
