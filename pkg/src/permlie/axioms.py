"""Law checkers.

Every check quantifies over an explicit finite set of inputs (basis keys, or
the integer-slot box of a window) and evaluates residuals with exact rational
arithmetic.  A report passes only when every residual is identically zero;
there is no tolerance anywhere.

Windowed identities between completed tensors are decided by accumulating the
full template support inside the window box, so a pass certifies the law for
every probed input and every output key inside the box.
"""

from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Optional

from .kernel import (
    CheckReport,
    FormalVector,
    Fresh,
    InsufficientWindowError,
    TemplateSeries,
    Window,
    apply_product_slot,
    expand_slot,
    key_degree,
    pat_const,
    sparse_rref,
)
from .families import (
    FiniteAlgebra,
    GradedFamily,
    Representation,
    mat_mul,
    mat_sub,
    mat_vec,
    mono,
)

ZERO = Fraction(0)
ONE = Fraction(1)


class LawId(str, Enum):
    Perm = "Perm"
    PreLie = "PreLie"
    Novikov = "Novikov"
    LieJacobi = "LieJacobi"
    LieSkew = "LieSkew"
    CoPerm = "CoPerm"
    CoPreLie = "CoPreLie"
    CoLieSkew = "CoLieSkew"
    CoLieJacobi = "CoLieJacobi"
    PermBi = "PermBi"
    PreLieBi = "PreLieBi"
    LieBiCocycle = "LieBiCocycle"
    QuadPreLieForm = "QuadPreLieForm"
    QuadPermForm = "QuadPermForm"
    ManinPermKd = "ManinPermKd"
    ManinLieB = "ManinLieB"
    Representation = "Representation"
    MatchedPairPerm = "MatchedPairPerm"
    OOperator = "OOperator"
    PrePerm = "PrePerm"
    SymplecticLie = "SymplecticLie"


# Number of composed operations per law: the default interior margin for a
# graded family is this count (finite inputs always use margin 0).
LAW_OPS = {
    LawId.Perm: 2,
    LawId.PreLie: 2,
    LawId.Novikov: 2,
    LawId.LieJacobi: 2,
    LawId.LieSkew: 1,
    LawId.CoPerm: 2,
    LawId.CoPreLie: 2,
    LawId.CoLieSkew: 1,
    LawId.CoLieJacobi: 2,
    LawId.LieBiCocycle: 2,
    LawId.QuadPreLieForm: 1,
    LawId.QuadPermForm: 1,
    LawId.ManinPermKd: 1,
    LawId.ManinLieB: 1,
    LawId.SymplecticLie: 1,
}

MAX_VIOLATIONS = 25


def default_margin(law: LawId, graded: bool) -> int:
    return LAW_OPS.get(law, 0) if graded else 0


class _Recorder:
    """Collects violations up to a cap while counting all of them."""

    def __init__(self, cap: int = MAX_VIOLATIONS):
        self.cap = cap
        self.items = []
        self.total = 0

    def add(self, label, at, residual):
        self.total += 1
        if len(self.items) < self.cap:
            self.items.append((label, at, residual))

    def extra(self) -> dict:
        out = {"violations_total": self.total}
        if self.total > len(self.items):
            out["violations_truncated"] = True
        return out


def _vec_terms(v: FormalVector):
    return tuple(v.sorted_items())


def _bilinear(product):
    """Extend a key-level product returning FormalVector to vectors."""

    def ext(va: FormalVector, vb: FormalVector) -> FormalVector:
        out = FormalVector()
        for ka, ca in va.items():
            for kb, cb in vb.items():
                out.add_vec(product(ka, kb), ca * cb)
        return out

    return ext


# ---------------------------------------------------------------------------
# Algebra laws.


def _memo_one(one: Callable) -> Callable:
    """Memoize a single-term product (key, key) -> (coeff, key) | None."""
    cache: dict = {}

    def call(ka, kb):
        kk = (ka, kb)
        try:
            return cache[kk]
        except KeyError:
            r = one(ka, kb)
            cache[kk] = r
            return r

    return call


class _ProdIndex:
    """Interns keys as ints and memoizes single-term products as
    (coeff, key index) so the cube loops hash int pairs only.  Integer
    coefficients are stored as plain ints (machine arithmetic on them is
    still exact); violations wrap them back into Fractions."""

    __slots__ = ("one", "keys", "index", "table")

    def __init__(self, one, keys):
        self.one = one
        self.keys = list(keys)
        self.index = {k: i for i, k in enumerate(self.keys)}
        self.table: dict = {}

    def intern(self, key) -> int:
        i = self.index.get(key)
        if i is None:
            i = len(self.keys)
            self.keys.append(key)
            self.index[key] = i
        return i

    def prod(self, ia: int, ib: int):
        try:
            return self.table[(ia, ib)]
        except KeyError:
            r = self.one(self.keys[ia], self.keys[ib])
            if r is not None:
                c = r[0]
                if c.__class__ is Fraction and c.denominator == 1:
                    c = c.numerator
                r = (c, self.intern(r[1]))
            self.table[(ia, ib)] = r
            return r


def _fast_perm_cube(keys, one, rec: _Recorder):
    keys = list(keys)
    px = _ProdIndex(one, keys)
    prod = px.prod
    idxs = range(len(keys))
    checked = 0
    for p in idxs:
        for q in idxs:
            pq = prod(p, q)
            qp = prod(q, p)
            for r in idxs:
                checked += 1
                t_right = None
                qr = prod(q, r)
                if qr is not None:
                    nxt = prod(p, qr[1])
                    if nxt is not None:
                        c = qr[0]
                        t_right = nxt if c == 1 else (c * nxt[0], nxt[1])
                t_left = None
                if pq is not None:
                    nxt = prod(pq[1], r)
                    if nxt is not None:
                        c = pq[0]
                        t_left = nxt if c == 1 else (c * nxt[0], nxt[1])
                if t_left != t_right:
                    rec.add(
                        "assoc",
                        (keys[p], keys[q], keys[r]),
                        _one_diff(px, t_left, t_right),
                    )
                t_swap = None
                if qp is not None:
                    nxt = prod(qp[1], r)
                    if nxt is not None:
                        c = qp[0]
                        t_swap = nxt if c == 1 else (c * nxt[0], nxt[1])
                if t_left != t_swap:
                    rec.add(
                        "left-comm",
                        (keys[p], keys[q], keys[r]),
                        _one_diff(px, t_left, t_swap),
                    )
    return checked


def _fast_prelie_cube(keys, one, rec: _Recorder, novikov: bool = False):
    keys = list(keys)
    px = _ProdIndex(one, keys)
    prod = px.prod
    idxs = range(len(keys))
    checked = 0
    for a in idxs:
        for b in idxs:
            ab = prod(a, b)
            ba = prod(b, a)
            for c in idxs:
                checked += 1
                t1 = None  # (a b) c
                if ab is not None:
                    nxt = prod(ab[1], c)
                    if nxt is not None:
                        f = ab[0]
                        t1 = nxt if f == 1 else (f * nxt[0], nxt[1])
                t2 = None  # a (b c)
                bc = prod(b, c)
                if bc is not None:
                    nxt = prod(a, bc[1])
                    if nxt is not None:
                        f = bc[0]
                        t2 = nxt if f == 1 else (f * nxt[0], nxt[1])
                t3 = None  # (b a) c
                if ba is not None:
                    nxt = prod(ba[1], c)
                    if nxt is not None:
                        f = ba[0]
                        t3 = nxt if f == 1 else (f * nxt[0], nxt[1])
                t4 = None  # b (a c)
                ac = prod(a, c)
                if ac is not None:
                    nxt = prod(b, ac[1])
                    if nxt is not None:
                        f = ac[0]
                        t4 = nxt if f == 1 else (f * nxt[0], nxt[1])
                if not (t1 is None and t2 is None and t3 is None and t4 is None):
                    if (
                        t1 is not None
                        and t2 is not None
                        and t3 is not None
                        and t4 is not None
                        and t1[1] == t2[1] == t3[1] == t4[1]
                    ):
                        if t1[0] - t2[0] - t3[0] + t4[0]:
                            rec.add(
                                "pre-lie",
                                (keys[a], keys[b], keys[c]),
                                (
                                    (
                                        px.keys[t1[1]],
                                        Fraction(t1[0] - t2[0] - t3[0] + t4[0]),
                                    ),
                                ),
                            )
                    else:
                        acc: dict = {}
                        for sign, t in ((1, t1), (-1, t2), (-1, t3), (1, t4)):
                            if t is None:
                                continue
                            cur = acc.get(t[1], ZERO) + sign * t[0]
                            if cur:
                                acc[t[1]] = cur
                            else:
                                acc.pop(t[1], None)
                        if acc:
                            rec.add(
                                "pre-lie",
                                (keys[a], keys[b], keys[c]),
                                _resolve_items(px, acc),
                            )
                if novikov:
                    t5 = None  # (a c) b
                    if ac is not None:
                        nxt = prod(ac[1], b)
                        if nxt is not None:
                            f = ac[0]
                            t5 = nxt if f == 1 else (f * nxt[0], nxt[1])
                    if t1 != t5:
                        rec.add(
                            "right-comm",
                            (keys[a], keys[b], keys[c]),
                            _one_diff(px, t1, t5),
                        )
    return checked


def _one_diff(px: "_ProdIndex", t1, t2):
    acc: dict = {}
    for sign, t in ((1, t1), (-1, t2)):
        if t is None:
            continue
        cur = acc.get(t[1], ZERO) + sign * t[0]
        if cur:
            acc[t[1]] = cur
        else:
            acc.pop(t[1], None)
    return _resolve_items(px, acc)


def _resolve_items(px: "_ProdIndex", acc: dict):
    return tuple(sorted((px.keys[i], Fraction(c)) for i, c in acc.items()))


def _vector_algebra_residuals(law: LawId, keys, product, rec: _Recorder):
    """Generic path: product(k1, k2) -> FormalVector."""
    ext = _bilinear(product)
    checked = 0
    if law == LawId.LieSkew:
        for a in keys:
            for b in keys:
                checked += 1
                res = product(a, b) + product(b, a)
                if res:
                    rec.add("skew", (a, b), _vec_terms(res))
        return checked
    for a in keys:
        for b in keys:
            ab = product(a, b)
            ba = product(b, a)
            for c in keys:
                checked += 1
                cv = FormalVector.single(c)
                if law == LawId.Perm:
                    bc = product(b, c)
                    assoc = ext(ab, cv) - ext(FormalVector.single(a), bc)
                    if assoc:
                        rec.add("assoc", (a, b, c), _vec_terms(assoc))
                    lcomm = ext(ab, cv) - ext(ba, cv)
                    if lcomm:
                        rec.add("left-comm", (a, b, c), _vec_terms(lcomm))
                elif law in (LawId.PreLie, LawId.Novikov):
                    bc = product(b, c)
                    ac = product(a, c)
                    res = (
                        ext(ab, cv)
                        - ext(FormalVector.single(a), bc)
                        - ext(ba, cv)
                        + ext(FormalVector.single(b), ac)
                    )
                    if res:
                        rec.add("pre-lie", (a, b, c), _vec_terms(res))
                    if law == LawId.Novikov:
                        rc = ext(ab, cv) - ext(ac, FormalVector.single(b))
                        if rc:
                            rec.add("right-comm", (a, b, c), _vec_terms(rc))
                elif law == LawId.LieJacobi:
                    av = FormalVector.single(a)
                    bv = FormalVector.single(b)
                    res = ext(ab, cv) + ext(product(b, c), av) + ext(product(c, a), bv)
                    if res:
                        rec.add("jacobi", (a, b, c), _vec_terms(res))
                else:
                    raise ValueError(f"not an algebra law: {law}")
    return checked


def check_algebra(
    law: LawId,
    *,
    family: Optional[GradedFamily] = None,
    alg: Optional[FiniteAlgebra] = None,
    product: Optional[Callable] = None,
    keys: Optional[Iterable] = None,
    window: Optional[Window] = None,
    margin: Optional[int] = None,
) -> CheckReport:
    """Quantify an algebra law over key triples (pairs for LieSkew)."""
    rec = _Recorder()
    if family is not None:
        if window is None:
            raise ValueError("graded family checks need a window")
        if margin is None:
            margin = default_margin(law, graded=True)
        window = Window(window.n, margin)
        ks = list(keys) if keys is not None else family.interior_keys(window, law.value)
        if law == LawId.Perm:
            checked = _fast_perm_cube(ks, family.product_one, rec)
        elif law in (LawId.PreLie, LawId.Novikov):
            checked = _fast_prelie_cube(
                ks, family.product_one, rec, novikov=(law == LawId.Novikov)
            )
        else:
            checked = _vector_algebra_residuals(law, ks, family.product, rec)
        return CheckReport.build(law.value, window, checked, rec.items, rec.extra())
    if alg is not None:
        ks = list(keys) if keys is not None else alg.basis_keys()
        window = window or Window(0, 0)
        checked = _vector_algebra_residuals(law, ks, alg.product, rec)
        return CheckReport.build(law.value, window, checked, rec.items, rec.extra())
    if product is None or keys is None:
        raise ValueError("need family, alg, or product+keys")
    window = window or Window(0, 0)
    if margin is not None:
        window = Window(window.n, margin)
    checked = _vector_algebra_residuals(law, list(keys), product, rec)
    return CheckReport.build(law.value, window, checked, rec.items, rec.extra())


# ---------------------------------------------------------------------------
# Coalgebra laws.


def check_coalgebra(
    law: LawId,
    *,
    delta: Callable,
    sym_co: Callable,
    keys: Iterable,
    window: Window,
    margin: Optional[int] = None,
) -> CheckReport:
    """Quantify a coalgebra law over input keys; identities between completed
    3-tensors are certified on the whole window box."""
    if margin is None:
        margin = default_margin(law, graded=True)
    window = Window(window.n, margin)
    box = window.n
    rec = _Recorder()
    checked = 0
    for x in keys:
        checked += 1
        d = delta(x)
        fresh = Fresh("k")
        if law == LawId.CoPerm:
            a = expand_slot(d, 0, sym_co, fresh)
            b = expand_slot(d, 1, sym_co, fresh)
            res = (a - b).support_in_box(box)
            if res:
                rec.add("coassoc", (x,), tuple(sorted(res.items())))
            res = (a - a.permuted((1, 0, 2))).support_in_box(box)
            if res:
                rec.add("left-cosym", (x,), tuple(sorted(res.items())))
        elif law == LawId.CoPreLie:
            a = expand_slot(d, 0, sym_co, fresh)
            b = expand_slot(d, 1, sym_co, fresh)
            res = (
                a - a.permuted((1, 0, 2)) - b + b.permuted((1, 0, 2))
            ).support_in_box(box)
            if res:
                rec.add("co-pre-lie", (x,), tuple(sorted(res.items())))
        elif law == LawId.CoLieSkew:
            res = (d + d.flip_hat()).support_in_box(box)
            if res:
                rec.add("co-skew", (x,), tuple(sorted(res.items())))
        elif law == LawId.CoLieJacobi:
            e = expand_slot(d, 1, sym_co, fresh)
            g = expand_slot(d, 0, sym_co, fresh)
            res = (e - e.permuted((1, 0, 2)) - g).support_in_box(box)
            if res:
                rec.add("co-jacobi", (x,), tuple(sorted(res.items())))
        else:
            raise ValueError(f"not a coalgebra law: {law}")
    return CheckReport.build(law.value, window, checked, rec.items, rec.extra())


# ---------------------------------------------------------------------------
# Finite bialgebra laws (2-tensors as dicts {(i, j): coeff}).


def _delta_dict(alg: FiniteAlgebra, i: int) -> dict:
    return {(a, b): c for a, b, c in alg.delta_terms(i)}


def _t_add(x: dict, y: dict, sign=ONE) -> dict:
    out = dict(x)
    for k, v in y.items():
        cur = out.get(k, ZERO) + sign * v
        if cur:
            out[k] = cur
        else:
            out.pop(k, None)
    return out


def _t_flip(x: dict) -> dict:
    return {(b, a): c for (a, b), c in x.items()}


def _t_apply(mat, x: dict, slot: int) -> dict:
    out: dict = {}
    for (a, b), c in x.items():
        src = a if slot == 0 else b
        for k in range(len(mat)):
            f = mat[k][src]
            if not f:
                continue
            key = (k, b) if slot == 0 else (a, k)
            cur = out.get(key, ZERO) + f * c
            if cur:
                out[key] = cur
            else:
                out.pop(key, None)
    return out


def check_bialgebra(
    law: LawId,
    *,
    alg: Optional[FiniteAlgebra] = None,
    delta_table: Optional[dict] = None,
    bracket: Optional[Callable] = None,
    delta: Optional[Callable] = None,
    sym_bracket: Optional[Callable] = None,
    keys: Optional[Iterable] = None,
    window: Optional[Window] = None,
    margin: Optional[int] = None,
) -> CheckReport:
    """PermBi / PreLieBi on finite tables, LieBiCocycle on windowed series."""
    rec = _Recorder()
    if law in (LawId.PermBi, LawId.PreLieBi):
        assert alg is not None
        work = alg
        if delta_table is not None:
            work = FiniteAlgebra(
                id=alg.id,
                space=alg.space,
                dim=alg.dim,
                labels=alg.labels,
                kind=alg.kind,
                mul=alg.mul,
                delta=delta_table,
            )
        window = window or Window(0, 0)
        dim = work.dim
        lmats = [work.left_matrix(i) for i in range(dim)]
        rmats = [work.right_matrix(i) for i in range(dim)]
        lmr = [mat_sub(lmats[i], rmats[i]) for i in range(dim)]
        ds = [_delta_dict(work, i) for i in range(dim)]
        checked = 0
        for i in range(dim):
            for j in range(dim):
                checked += 1
                dprod: dict = {}
                for k, c in work.mul.get((i, j), ()):
                    dprod = _t_add(dprod, {kk: c * vv for kk, vv in ds[k].items()})
                if law == LawId.PermBi:
                    rhs1 = _t_add(_t_apply(lmr[i], ds[j], 0), _t_apply(rmats[j], ds[i], 1))
                    res = _t_add(dprod, rhs1, -ONE)
                    if res:
                        rec.add("pb1", (i, j), tuple(sorted(res.items())))
                    lhs2 = _t_flip(_t_apply(rmats[j], ds[i], 0))
                    rhs2 = _t_apply(rmats[i], ds[j], 0)
                    res = _t_add(lhs2, rhs2, -ONE)
                    if res:
                        rec.add("pb2", (i, j), tuple(sorted(res.items())))
                    anti = _t_add(ds[i], _t_flip(ds[i]), -ONE)
                    rhs3 = _t_add(_t_apply(lmats[i], ds[j], 1), _t_apply(lmr[j], anti, 0))
                    res = _t_add(dprod, rhs3, -ONE)
                    if res:
                        rec.add("pb3", (i, j), tuple(sorted(res.items())))
                else:
                    zij = _zeta(work, lmats, rmats, ds, i, j)
                    zji = _zeta(work, lmats, rmats, ds, j, i)
                    res = _t_add(zij, zji, -ONE)
                    if res:
                        rec.add("plb-sym", (i, j), tuple(sorted(res.items())))
                    res = _t_add(zij, _t_flip(zij), -ONE)
                    if res:
                        rec.add("plb-flip", (i, j), tuple(sorted(res.items())))
        return CheckReport.build(law.value, window, checked, rec.items, rec.extra())

    if law == LawId.LieBiCocycle:
        assert bracket is not None and delta is not None and sym_bracket is not None
        assert keys is not None and window is not None
        if margin is None:
            margin = default_margin(law, graded=True)
        window = Window(window.n, margin)
        box = window.n
        ks = list(keys)
        checked = 0
        for x in ks:
            dx = delta(x)
            for y in ks:
                checked += 1
                dy = delta(y)
                xy = bracket(x, y)
                lhs = TemplateSeries.zero(2)
                for k, c in xy.items():
                    lhs = lhs + delta(k).scale(c)
                rhs = (
                    _ad_apply(dy, x, sym_bracket, 0)
                    + _ad_apply(dy, x, sym_bracket, 1)
                    - _ad_apply(dx, y, sym_bracket, 0)
                    - _ad_apply(dx, y, sym_bracket, 1)
                )
                res = (lhs - rhs).support_in_box(box)
                if res:
                    rec.add("cocycle", (x, y), tuple(sorted(res.items())))
        return CheckReport.build(law.value, window, checked, rec.items, rec.extra())

    raise ValueError(f"not a bialgebra law: {law}")


def _zeta(work, lmats, rmats, ds, i, j):
    """Pre-Lie compatibility defect of the pair (e_i, e_j)."""
    out: dict = {}
    for k, c in work.mul.get((i, j), ()):
        out = _t_add(out, {kk: c * vv for kk, vv in ds[k].items()})
    out = _t_add(out, _t_apply(lmats[i], ds[j], 0), -ONE)
    out = _t_add(out, _t_apply(lmats[i], ds[j], 1), -ONE)
    out = _t_add(out, _t_apply(rmats[j], ds[i], 1), -ONE)
    return out


def _ad_apply(series: TemplateSeries, x, sym_bracket, slot: int) -> TemplateSeries:
    return apply_product_slot(series, slot, sym_bracket, pat_const(x), "left")


# ---------------------------------------------------------------------------
# Bilinear forms.


def check_form(
    law: LawId,
    *,
    family: Optional[GradedFamily] = None,
    form: Optional[Callable] = None,
    product: Optional[Callable] = None,
    keys: Optional[Iterable] = None,
    window: Optional[Window] = None,
    margin: Optional[int] = None,
    weight: Optional[int] = None,
    check_nondegenerate: bool = True,
) -> CheckReport:
    """Skew symmetry, graded weight, invariance, window nondegeneracy."""
    graded = family is not None
    if graded:
        form = family.form
        product = family.product
        weight = family.form_m if weight is None else weight
        assert window is not None
        box_keys = family.keys(window)
    else:
        assert form is not None and keys is not None
        box_keys = list(keys)
        window = window or Window(0, 0)
    if margin is None:
        margin = default_margin(law, graded)
    window = Window(window.n, margin)
    rec = _Recorder()
    checked = 0

    # Symmetry sense and single graded weight over all window pairs.  The
    # Lie-level Manin form is symmetric; every other form law here is skew.
    symmetric = law == LawId.ManinLieB
    for a in box_keys:
        for b in box_keys:
            checked += 1
            v = form(a, b)
            w = form(b, a)
            bad = v - w if symmetric else v + w
            if bad:
                rec.add("symmetric" if symmetric else "skew", (a, b), ((("scalar",), bad),))
            if v and weight is not None and key_degree(a) + key_degree(b) != weight:
                rec.add("graded-weight", (a, b), ((("scalar",), v),))

    # Invariance.
    if graded:
        inner = family.interior_keys(window, law.value)
    else:
        inner = box_keys
    if law == LawId.QuadPermForm and graded and family.name == "permP":
        checked += _perm_invariance_sparse(family, inner, rec)
    else:
        for a in inner:
            for b in inner:
                ab = product(a, b)
                for c in inner:
                    checked += 1
                    if law == LawId.QuadPreLieForm:
                        # form(a b, c) = -form(b, a c - c a)
                        res = _form_on(form, ab, c) + _form_on(
                            form, product(a, c) - product(c, a), b, swap=True
                        )
                        label = "invariance"
                    elif law in (LawId.QuadPermForm, LawId.ManinPermKd):
                        # form(a b, c) = form(a, b c - c b)
                        res = _form_on(form, ab, c) - _form_on(
                            form, product(b, c) - product(c, b), a, swap=True
                        )
                        label = "invariance"
                    elif law == LawId.ManinLieB:
                        # form([a, b], c) = form(a, [b, c])
                        res = _form_on(form, ab, c) - _form_on(
                            form, product(b, c), a, swap=True
                        )
                        label = "invariance"
                    elif law == LawId.SymplecticLie:
                        res = (
                            _form_on(form, ab, c)
                            + _form_on(form, product(b, c), a)
                            + _form_on(form, product(c, a), b)
                        )
                        label = "closed"
                    else:
                        raise ValueError(f"not a form law: {law}")
                    if res:
                        rec.add(label, (a, b, c), ((("scalar",), res),))

    extra = rec.extra()
    if check_nondegenerate:
        rank = _gram_rank(box_keys, form)
        extra["gram_rank"] = rank
        extra["gram_size"] = len(box_keys)
        if rank < len(box_keys):
            rec.add("degenerate", (), ((("rank",), Fraction(rank)),))
            extra = rec.extra()
            extra["gram_rank"] = rank
            extra["gram_size"] = len(box_keys)
    if weight is not None:
        extra["weight"] = weight
    return CheckReport.build(law.value, window, checked, rec.items, extra)


def _form_on(form, arg, other, swap: bool = False) -> Fraction:
    """form(arg, other) extended linearly in a FormalVector argument.

    With swap=True computes form(other, arg)."""
    if isinstance(arg, FormalVector):
        total = ZERO
        for k, c in arg.items():
            total += c * (form(other, k) if swap else form(k, other))
        return total
    return form(other, arg) if swap else form(arg, other)


def _perm_invariance_sparse(family: GradedFamily, inner, rec: _Recorder) -> int:
    """Invariance sweep using the solved candidate set for the third key.

    For fixed (a, b) the residual form(a b, c) - form(a, b c) + form(a, c b)
    can only be nonzero when c pairs against a b, or b c / c b pairs against
    a; those c are recovered exactly by inverting the product on its key, so
    skipping the rest loses nothing.
    """
    inner_set = set(inner)
    form = family.form
    one = family.product_one
    partners = family.form_partners
    checked = 0
    for a in inner:
        pa = [k for k, _ in partners(a)]
        for b in inner:
            checked += len(inner)
            cands = set()
            ab = one(a, b)
            if ab is not None:
                for k, _ in partners(ab[1]):
                    cands.add(k)
            for target in pa:
                for c in _mono_solve_right(b, target):
                    cands.add(c)
                for c in _mono_solve_left(b, target):
                    cands.add(c)
            for c in cands:
                if c not in inner_set:
                    continue
                res = ZERO
                if ab is not None:
                    res += ab[0] * form(ab[1], c)
                bc = one(b, c)
                if bc is not None:
                    res -= bc[0] * form(a, bc[1])
                cb = one(c, b)
                if cb is not None:
                    res += cb[0] * form(a, cb[1])
                if res:
                    rec.add("invariance", (a, b, c), ((("scalar",), res),))
    return checked


def _mono_solve_right(b, out):
    """Keys c with (b c) = out at key level for the monomial perm family."""
    _, b1, b2, s = b
    _, o1, o2, od = out
    return [mono(o1 - b1 - (1 if s == 1 else 0), o2 - b2 - (1 if s == 2 else 0), od)]


def _mono_solve_left(b, out):
    """Keys c with (c b) = out at key level for the monomial perm family."""
    _, b1, b2, sb = b
    _, o1, o2, od = out
    if od != sb:
        return []
    return [
        mono(o1 - b1 - (1 if cd == 1 else 0), o2 - b2 - (1 if cd == 2 else 0), cd)
        for cd in (1, 2)
    ]


def _gram_rank(keys, form) -> int:
    """Exact rank of the window Gram matrix.

    Fast path: an injective partner assignment (each key sees exactly one
    nonzero column, all distinct) is a scaled permutation, hence full rank."""
    n = len(keys)
    idx = {k: i for i, k in enumerate(keys)}
    rows = []
    partner_cols = []
    injective = True
    for a in keys:
        row = {}
        for j, b in enumerate(keys):
            v = form(a, b)
            if v:
                row[j] = v
        rows.append(row)
        if len(row) == 1:
            partner_cols.append(next(iter(row)))
        else:
            injective = False
    if injective and len(set(partner_cols)) == n:
        return n
    basis = sparse_rref(rows)
    return len(basis)


# ---------------------------------------------------------------------------
# Representations of finite perm algebras.


def check_representation(alg: FiniteAlgebra, rep: Representation) -> CheckReport:
    rec = _Recorder()
    checked = 0
    dim = alg.dim
    m = rep.module_dim
    zero = tuple((ZERO,) * m for _ in range(m))

    def act(mats, vec_terms):
        out = zero
        for k, c in vec_terms:
            out = tuple(
                tuple(x + c * y for x, y in zip(ro, rm)) for ro, rm in zip(out, mats[k])
            )
        return out

    for i in range(dim):
        for j in range(dim):
            checked += 1
            prod_terms = alg.mul.get((i, j), ())
            l_prod = act(rep.l, prod_terms)
            r_prod = act(rep.r, prod_terms)
            li_lj = mat_mul(rep.l[i], rep.l[j])
            lj_li = mat_mul(rep.l[j], rep.l[i])
            rj_ri = mat_mul(rep.r[j], rep.r[i])
            rj_li = mat_mul(rep.r[j], rep.l[i])
            li_rj = mat_mul(rep.l[i], rep.r[j])
            for label, x, y in (
                ("rep-l-hom", l_prod, li_lj),
                ("rep-l-swap", li_lj, lj_li),
                ("rep-r-antihom", r_prod, rj_ri),
                ("rep-r-lmix", rj_ri, rj_li),
                ("rep-r-commute", rj_li, li_rj),
            ):
                d = mat_sub(x, y)
                if any(any(v for v in row) for row in d):
                    rec.add(label, (i, j), _mat_items(d))
    return CheckReport.build(
        LawId.Representation.value, Window(0, 0), checked, rec.items, rec.extra()
    )


def _mat_items(d):
    return tuple(
        ((r, c), v) for r, row in enumerate(d) for c, v in enumerate(row) if v
    )


# ---------------------------------------------------------------------------
# Matched pairs of finite perm algebras.


def _assemble_matched_pair(alg1, alg2, l12, r12, l21, r21, space="MP"):
    """Perm product on the direct sum induced by the mutual actions."""
    d1, d2 = alg1.dim, alg2.dim
    mul = {}

    def put(i, j, terms):
        terms = tuple((k, c) for k, c in terms if c)
        if terms:
            mul[(i, j)] = terms

    for i in range(d1):
        for j in range(d1):
            put(i, j, alg1.mul.get((i, j), ()))
    for i in range(d2):
        for j in range(d2):
            put(
                d1 + i,
                d1 + j,
                tuple((d1 + k, c) for k, c in alg2.mul.get((i, j), ())),
            )
    for i in range(d1):
        for j in range(d2):
            # e_i * f_j = l1(e_i) f_j  +  r2(f_j) e_i
            terms = [(d1 + k, l12[i][k][j]) for k in range(d2)]
            terms += [(k, r21[j][k][i]) for k in range(d1)]
            put(i, d1 + j, terms)
            # f_j * e_i = l2(f_j) e_i  +  r1(e_i) f_j
            terms = [(k, l21[j][k][i]) for k in range(d1)]
            terms += [(d1 + k, r12[i][k][j]) for k in range(d2)]
            put(d1 + j, i, terms)
    return FiniteAlgebra(
        id=f"{alg1.id}|{alg2.id}",
        space=space,
        dim=d1 + d2,
        labels=tuple(alg1.labels) + tuple(alg2.labels),
        kind="Perm",
        mul=mul,
    )


def check_matched_pair(
    alg1: FiniteAlgebra,
    alg2: FiniteAlgebra,
    l12,
    r12,
    l21,
    r21,
) -> CheckReport:
    """Ten compatibility conditions, then reassembly passes the perm law.

    l12[i], r12[i] act on alg2's space (one matrix per alg1 basis index);
    l21[j], r21[j] act on alg1's space.
    """
    rec = _Recorder()
    d1, d2 = alg1.dim, alg2.dim

    def vec1(i):
        return tuple(ONE if k == i else ZERO for k in range(d1))

    def vec2(i):
        return tuple(ONE if k == i else ZERO for k in range(d2))

    def act(mats, vec, coeffs):
        # sum_k coeffs[k] mats[k] applied to vec
        out = [ZERO] * len(vec)
        for k, c in enumerate(coeffs):
            if not c:
                continue
            col = mat_vec(mats[k], vec)
            out = [x + c * y for x, y in zip(out, col)]
        return tuple(out)

    def mul1(u, v):
        out = [ZERO] * d1
        for i in range(d1):
            if not u[i]:
                continue
            for j in range(d1):
                f = u[i] * v[j]
                if not f:
                    continue
                for k, c in alg1.mul.get((i, j), ()):
                    out[k] += f * c
        return tuple(out)

    def mul2(u, v):
        out = [ZERO] * d2
        for i in range(d2):
            if not u[i]:
                continue
            for j in range(d2):
                f = u[i] * v[j]
                if not f:
                    continue
                for k, c in alg2.mul.get((i, j), ()):
                    out[k] += f * c
        return tuple(out)

    checked = 0
    # Conditions quantified over (p1 in B1, p2, p2' in B2).
    for i in range(d1):
        p1 = vec1(i)
        for a in range(d2):
            p2 = vec2(a)
            for b in range(d2):
                p2p = vec2(b)
                checked += 1
                l1p1_p2 = mat_vec(l12[i], p2)
                r1p1_p2 = mat_vec(r12[i], p2)
                l1p1_p2p = mat_vec(l12[i], p2p)
                r1p1_p2p = mat_vec(r12[i], p2p)
                r2p2_p1 = mat_vec(r21[a], p1)
                l2p2_p1 = mat_vec(l21[a], p1)
                r2p2p_p1 = mat_vec(r21[b], p1)
                prod22 = mul2(p2, p2p)
                # pmp1: l1(p1)(p2 p2') = (l1(p1)p2) p2' + l1(r2(p2)p1) p2'
                lhs = mat_vec(l12[i], prod22)
                rhs = tuple(
                    x + y
                    for x, y in zip(mul2(l1p1_p2, p2p), act(l12, p2p, r2p2_p1))
                )
                _diff(rec, "pmp1", (i, a, b), lhs, rhs)
                # pmp2: r1(p1)(p2 p2') = p2 (r1(p1)p2') + r1(l2(p2')p1) p2
                lhs = mat_vec(r12[i], prod22)
                l2p2p_p1 = mat_vec(l21[b], p1)
                rhs = tuple(
                    x + y
                    for x, y in zip(mul2(p2, r1p1_p2p), act(r12, p2, l2p2p_p1))
                )
                _diff(rec, "pmp2", (i, a, b), lhs, rhs)
                # pmp5: (r1(p1)p2) p2' + l1(l2(p2)p1) p2'
                #     = p2 (l1(p1)p2') + r1(r2(p2')p1) p2
                lhs = tuple(
                    x + y
                    for x, y in zip(mul2(r1p1_p2, p2p), act(l12, p2p, l2p2_p1))
                )
                rhs = tuple(
                    x + y
                    for x, y in zip(mul2(p2, l1p1_p2p), act(r12, p2, r2p2p_p1))
                )
                _diff(rec, "pmp5", (i, a, b), lhs, rhs)
                # pmp7: (l1(p1)p2) p2' + l1(r2(p2)p1) p2'
                #     = (r1(p1)p2) p2' + l1(l2(p2)p1) p2'
                lhs = tuple(
                    x + y
                    for x, y in zip(mul2(l1p1_p2, p2p), act(l12, p2p, r2p2_p1))
                )
                rhs = tuple(
                    x + y
                    for x, y in zip(mul2(r1p1_p2, p2p), act(l12, p2p, l2p2_p1))
                )
                _diff(rec, "pmp7", (i, a, b), lhs, rhs)
                # pmp9: r1(p1)(p2 p2') = r1(p1)(p2' p2)
                lhs = mat_vec(r12[i], prod22)
                rhs = mat_vec(r12[i], mul2(p2p, p2))
                _diff(rec, "pmp9", (i, a, b), lhs, rhs)
    # Conditions quantified over (p2 in B2, p1, p1' in B1).
    for a in range(d2):
        p2 = vec2(a)
        for i in range(d1):
            p1 = vec1(i)
            for j in range(d1):
                p1p = vec1(j)
                checked += 1
                l2p2_p1 = mat_vec(l21[a], p1)
                r2p2_p1 = mat_vec(r21[a], p1)
                l2p2_p1p = mat_vec(l21[a], p1p)
                r2p2_p1p = mat_vec(r21[a], p1p)
                r1p1_p2 = mat_vec(r12[i], p2)
                l1p1_p2 = mat_vec(l12[i], p2)
                r1p1p_p2 = mat_vec(r12[j], p2)
                l1p1p_p2 = mat_vec(l12[j], p2)
                prod11 = mul1(p1, p1p)
                # pmp3: l2(p2)(p1 p1') = (l2(p2)p1) p1' + l2(r1(p1)p2) p1'
                lhs = mat_vec(l21[a], prod11)
                rhs = tuple(
                    x + y
                    for x, y in zip(mul1(l2p2_p1, p1p), act(l21, p1p, r1p1_p2))
                )
                _diff(rec, "pmp3", (a, i, j), lhs, rhs)
                # pmp4: r2(p2)(p1 p1') = p1 (r2(p2)p1') + r2(l1(p1')p2) p1
                lhs = mat_vec(r21[a], prod11)
                rhs = tuple(
                    x + y
                    for x, y in zip(mul1(p1, r2p2_p1p), act(r21, p1, l1p1p_p2))
                )
                _diff(rec, "pmp4", (a, i, j), lhs, rhs)
                # pmp6: (r2(p2)p1) p1' + l2(l1(p1)p2) p1'
                #     = p1 (l2(p2)p1') + r2(r1(p1')p2) p1
                lhs = tuple(
                    x + y
                    for x, y in zip(mul1(r2p2_p1, p1p), act(l21, p1p, l1p1_p2))
                )
                rhs = tuple(
                    x + y
                    for x, y in zip(mul1(p1, l2p2_p1p), act(r21, p1, r1p1p_p2))
                )
                _diff(rec, "pmp6", (a, i, j), lhs, rhs)
                # pmp8: (l2(p2)p1) p1' + l2(r1(p1)p2) p1'
                #     = (r2(p2)p1) p1' + l2(l1(p1)p2) p1'
                lhs = tuple(
                    x + y
                    for x, y in zip(mul1(l2p2_p1, p1p), act(l21, p1p, r1p1_p2))
                )
                rhs = tuple(
                    x + y
                    for x, y in zip(mul1(r2p2_p1, p1p), act(l21, p1p, l1p1_p2))
                )
                _diff(rec, "pmp8", (a, i, j), lhs, rhs)
                # pmp10: r2(p2)(p1 p1') = r2(p2)(p1' p1)
                lhs = mat_vec(r21[a], prod11)
                rhs = mat_vec(r21[a], mul1(p1p, p1))
                _diff(rec, "pmp10", (a, i, j), lhs, rhs)

    assembled = _assemble_matched_pair(alg1, alg2, l12, r12, l21, r21)
    sub = check_algebra(LawId.Perm, alg=assembled)
    checked += sub.checked
    for label, at, residual in sub.violations:
        rec.add(f"assembled-{label}", at, residual)
    return CheckReport.build(
        LawId.MatchedPairPerm.value, Window(0, 0), checked, rec.items, rec.extra()
    )


def _diff(rec: _Recorder, label, at, lhs, rhs):
    d = tuple(x - y for x, y in zip(lhs, rhs))
    if any(d):
        rec.add(label, at, tuple(((k,), v) for k, v in enumerate(d) if v))


# ---------------------------------------------------------------------------
# O-operators and pre-perm structures.


def check_o_operator(alg: FiniteAlgebra, rep: Representation, t) -> CheckReport:
    """t: matrix (alg.dim rows x rep.module_dim cols) mapping module to algebra."""
    rec = _Recorder()
    m = rep.module_dim
    dim = alg.dim
    checked = 0
    tcols = [tuple(t[r][c] for r in range(dim)) for c in range(m)]
    for a in range(m):
        for b in range(m):
            checked += 1
            ta, tb = tcols[a], tcols[b]
            lhs = [ZERO] * dim
            for i in range(dim):
                if not ta[i]:
                    continue
                for j in range(dim):
                    f = ta[i] * tb[j]
                    if not f:
                        continue
                    for k, c in alg.mul.get((i, j), ()):
                        lhs[k] += f * c
            w = [ZERO] * m
            for k in range(dim):
                if ta[k]:
                    col = tuple(rep.l[k][r][b] for r in range(m))
                    w = [x + ta[k] * y for x, y in zip(w, col)]
                if tb[k]:
                    col = tuple(rep.r[k][r][a] for r in range(m))
                    w = [x + tb[k] * y for x, y in zip(w, col)]
            rhs = [ZERO] * dim
            for c_idx in range(m):
                if w[c_idx]:
                    rhs = [x + w[c_idx] * y for x, y in zip(rhs, tcols[c_idx])]
            d = tuple(x - y for x, y in zip(lhs, rhs))
            if any(d):
                rec.add("o-op", (a, b), tuple(((k,), v) for k, v in enumerate(d) if v))
    return CheckReport.build(
        LawId.OOperator.value, Window(0, 0), checked, rec.items, rec.extra()
    )


def check_preperm(alg: FiniteAlgebra) -> CheckReport:
    """Five defining chains of the splitting of a perm product."""
    assert alg.tri_left is not None and alg.tri_right is not None
    rec = _Recorder()
    dim = alg.dim

    def vec(i):
        return FormalVector.single(alg.key(i))

    def table_apply(table, va: FormalVector, vb: FormalVector) -> FormalVector:
        out = FormalVector()
        for ka, ca in va.items():
            for kb, cb in vb.items():
                for k, c in table.get((ka[2], kb[2]), ()):
                    out.add_term(alg.key(k), ca * cb * c)
        return out

    def tri_l(a, b):
        return table_apply(alg.tri_left, a, b)  # a > b

    def tri_r(a, b):
        return table_apply(alg.tri_right, a, b)  # a < b

    checked = 0
    for i in range(dim):
        for j in range(dim):
            for k in range(dim):
                checked += 1
                p1, p2, p3 = vec(i), vec(j), vec(k)
                both23 = tri_r(p2, p3) + tri_l(p2, p3)
                a = tri_r(p1, both23)  # p1 < (p2 < p3 + p2 > p3)
                b = tri_r(tri_r(p1, p2), p3)  # (p1 < p2) < p3
                c = tri_r(tri_l(p2, p1), p3)  # (p2 > p1) < p3
                d = tri_l(p2, tri_r(p1, p3))  # p2 > (p1 < p3)
                both12 = tri_r(p1, p2) + tri_l(p1, p2)
                e = tri_l(both12, p3)  # (p1 < p2 + p1 > p2) > p3
                f = tri_l(p1, tri_l(p2, p3))  # p1 > (p2 > p3)
                g = tri_l(p2, tri_l(p1, p3))  # p2 > (p1 > p3)
                for label, x, y in (
                    ("pp-right-1", a, b),
                    ("pp-right-2", b, c),
                    ("pp-right-3", c, d),
                    ("pp-left-1", e, f),
                    ("pp-left-2", f, g),
                ):
                    res = x - y
                    if res:
                        rec.add(label, (i, j, k), _vec_terms(res))
    return CheckReport.build(
        LawId.PrePerm.value, Window(0, 0), checked, rec.items, rec.extra()
    )
