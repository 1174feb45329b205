"""Affinization: induced brackets, cobracket rules, probes, form coproducts."""

from fractions import Fraction

from permlie.kernel import Window, ess, fin, pair, tee
from permlie.families import ats_family, finite_catalog, perm_p_family, delta_a_family, delta_p_family
from permlie.axioms import LawId, check_bialgebra, check_coalgebra
from permlie.affinize import (
    affinization_probe,
    coproduct_from_form,
    delta_bullet,
    delta_bullet_rule,
    induced_lie_bracket,
    pair_keys,
)

F = Fraction


def _e():
    return finite_catalog()["ex-1p"].key(0)


class TestInducedBracket:
    def test_tee_tee_rows(self):
        alg = finite_catalog()["ex-1p"]
        br, _ = induced_lie_bracket(alg, ats_family())
        e = _e()
        for i, j in ((2, 3), (-1, 4), (0, 0), (2, 2)):
            got = dict(br(pair(e, tee(i)), pair(e, tee(j))).items())
            want = {pair(e, tee(i + j - 1)): F(j - i)} if i != j else {}
            got = {k: c for k, c in got.items() if c}
            assert got == want, (i, j)

    def test_tee_ess_rows(self):
        alg = finite_catalog()["ex-1p"]
        br, _ = induced_lie_bracket(alg, ats_family())
        e = _e()
        for i, j in ((2, 3), (-1, 4), (1, 0)):
            got = {k: c for k, c in br(pair(e, tee(i)), pair(e, ess(j))).items() if c}
            c = i + j - 1
            want = {pair(e, ess(c)): F(c)} if c else {}
            assert got == want, (i, j)
            # and skew on the flip
            got = {k: c for k, c in br(pair(e, ess(j)), pair(e, tee(i))).items() if c}
            want = {pair(e, ess(c)): F(-c)} if c else {}
            assert got == want, (i, j)

    def test_ess_ess_vanishes(self):
        alg = finite_catalog()["ex-1p"]
        br, _ = induced_lie_bracket(alg, ats_family())
        e = _e()
        assert br(pair(e, ess(2)), pair(e, ess(-2))).is_zero()

    def test_bracket_skew(self):
        alg = finite_catalog()["ex-sd2"]
        br, _ = induced_lie_bracket(alg, ats_family())
        ks = pair_keys(alg, ats_family(), Window(2))
        for x in ks[:6]:
            for y in ks[:6]:
                a = {k: c for k, c in br(x, y).items() if c}
                b = {k: -c for k, c in br(y, x).items() if c}
                assert a == b


class TestDeltaBullet:
    def test_tee_row_coefficients(self):
        alg = finite_catalog()["ex-1p"]
        fam = ats_family()
        e = _e()
        i = 2
        d = delta_bullet(alg, fam, pair(e, tee(i)))
        # sum_k i (e s^-k (x) e t^(i+k-1) - e t^(i+k-1) (x) e s^-k)
        for k in (-2, 0, 1, 3):
            assert d.coefficient_at(
                (pair(e, ess(-k)), pair(e, tee(i + k - 1)))
            ) == F(i)
            assert d.coefficient_at(
                (pair(e, tee(i + k - 1)), pair(e, ess(-k)))
            ) == F(-i)

    def test_ess_row_coefficients(self):
        alg = finite_catalog()["ex-1p"]
        fam = ats_family()
        e = _e()
        i = 2
        d = delta_bullet(alg, fam, pair(e, ess(i)))
        for k in (-2, 0, 1, 3):
            assert d.coefficient_at(
                (pair(e, ess(-k)), pair(e, ess(i + k - 1)))
            ) == F(i + 2 * k - 1)

    def test_rule_matches_pointwise(self):
        alg = finite_catalog()["ex-1p"]
        fam = ats_family()
        delta, _ = delta_bullet_rule(alg, fam)
        for key in pair_keys(alg, fam, Window(2)):
            diff = (delta(key) - delta_bullet(alg, fam, key)).support_in_box(3)
            assert diff == {}

    def test_pipeline_laws_small_window(self):
        alg = finite_catalog()["ex-1p"]
        fam = ats_family()
        delta, sym_co = delta_bullet_rule(alg, fam)
        br, sbr = induced_lie_bracket(alg, fam)
        w = Window(4)
        pk = pair_keys(alg, fam, w)
        assert check_bialgebra(
            LawId.LieBiCocycle,
            bracket=br,
            delta=delta,
            sym_bracket=sbr,
            keys=pk,
            window=w,
        ).passed
        assert check_coalgebra(
            LawId.CoLieSkew, delta=delta, sym_co=sym_co, keys=pk, window=w
        ).passed
        assert check_coalgebra(
            LawId.CoLieJacobi, delta=delta, sym_co=sym_co, keys=pk, window=w
        ).passed


class TestPairKeys:
    def test_count(self):
        alg = finite_catalog()["ex-sd2"]
        fam = ats_family()
        w = Window(2)
        assert len(pair_keys(alg, fam, w)) == alg.dim * len(fam.keys(w))


class TestProbes:
    def test_algebra_direction_on_perm(self):
        v = affinization_probe(
            finite_catalog()["ex-1p"], ats_family(), "algebra", Window(4)
        )
        assert v.is_law and v.agree
        assert v.direct_report.passed and v.window_report.passed

    def test_algebra_direction_on_broken(self):
        v = affinization_probe(
            finite_catalog()["ex-bad2"], ats_family(), "algebra", Window(3)
        )
        assert (not v.is_law) and v.agree
        assert not v.direct_report.passed
        assert not v.window_report.passed

    def test_coalgebra_direction(self):
        alg = finite_catalog()["ex-1p"]
        v = affinization_probe(
            alg, ats_family(), "coalgebra", Window(3), delta_table=alg.delta
        )
        assert v.is_law and v.agree


class TestCoproductFromForm:
    def test_matches_delta_a(self):
        fam = ats_family()
        cf = coproduct_from_form(fam)
        for key in fam.keys(Window(4)):
            assert cf(key).equal_on_box(delta_a_family(key), 4)

    def test_matches_delta_p(self):
        fam = perm_p_family()
        cf = coproduct_from_form(fam)
        for key in fam.keys(Window(3)):
            assert cf(key).equal_on_box(delta_p_family(key), 3)
