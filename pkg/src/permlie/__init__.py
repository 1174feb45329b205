"""Exact symbolic verification of perm and pre-Lie (bi)algebra structures
and of the Lie bialgebras their affinizations induce.

Everything is computed over the rationals with zero tolerance: finite
algebras carry explicit structure-constant tables, graded families carry
closed-form product/coproduct rules indexed by integers, and identities on
completed tensor products are certified on bounded windows of basis keys.
"""

from .kernel import (
    Aff,
    CheckReport,
    FormalVector,
    Fresh,
    IllPosedTemplateError,
    InsufficientWindowError,
    Poly,
    Template,
    TemplateSeries,
    Window,
    apply_product_slot,
    av,
    ess,
    fin,
    key_degree,
    key_str,
    mono,
    pair,
    pat_const,
    pat_ess,
    pat_fin,
    pat_mono,
    pat_pair,
    pat_tee,
    pat_wn,
    place_product,
    tee,
    wn,
)
from .families import (
    FiniteAlgebra,
    GradedFamily,
    Representation,
    TensorElement,
    adjoint_representation,
    ats_family,
    delta_a_family,
    delta_p_family,
    finite_catalog,
    perm_p_family,
    tensor_catalog,
    wn_codelta,
    wn_family,
)
from .axioms import (
    LawId,
    check_algebra,
    check_bialgebra,
    check_coalgebra,
    check_form,
    check_matched_pair,
    check_o_operator,
    check_preperm,
    check_representation,
)
from .affinize import (
    ProbeVerdict,
    affinization_probe,
    coproduct_from_form,
    delta_bullet,
    delta_bullet_rule,
    graded_dual_basis,
    induced_lie_bracket,
    pair_keys,
    pairing_defect,
)
from .ybe import (
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
    place_finite,
    r_sharp,
    s_equation_residual,
)
from .doubles import (
    ManinData,
    dual_rep,
    invariant_form_search,
    manin_cobracket_table,
    manin_double_from_bialgebra,
    manin_lie_lift,
    para_kahler_reports,
    prelie_double,
    prelie_to_symplectic,
    preperm_representation,
    restricted_dual_double,
    semidirect_perm,
    symplectic_to_prelie,
)

__version__ = "0.1.0"

__all__ = [
    "Aff",
    "CheckReport",
    "FiniteAlgebra",
    "FormalVector",
    "Fresh",
    "GradedFamily",
    "IllPosedTemplateError",
    "InsufficientWindowError",
    "LawId",
    "ManinData",
    "OOperatorError",
    "Poly",
    "ProbeVerdict",
    "Representation",
    "Template",
    "TemplateSeries",
    "TensorElement",
    "ThreeTensor",
    "Window",
    "adjoint_representation",
    "affinization_probe",
    "affinize_r",
    "apply_product_slot",
    "ats_family",
    "av",
    "check_algebra",
    "check_bialgebra",
    "check_coalgebra",
    "check_form",
    "check_matched_pair",
    "check_o_operator",
    "check_preperm",
    "check_representation",
    "coboundary_coalgebra_report",
    "coboundary_delta_perm",
    "coboundary_delta_prelie",
    "coproduct_from_form",
    "cybe_residual",
    "delta_a_family",
    "delta_bullet",
    "delta_bullet_rule",
    "delta_p_family",
    "dual_rep",
    "ess",
    "fin",
    "finite_catalog",
    "graded_dual_basis",
    "grid_search_symmetric_r",
    "induced_lie_bracket",
    "invariant_form_search",
    "key_degree",
    "key_str",
    "lie_delta_from_r",
    "manin_cobracket_table",
    "manin_double_from_bialgebra",
    "manin_lie_lift",
    "mono",
    "o_to_ybe",
    "pair",
    "pair_keys",
    "pairing_defect",
    "para_kahler_reports",
    "pat_const",
    "pat_ess",
    "pat_fin",
    "pat_mono",
    "pat_pair",
    "pat_tee",
    "pat_wn",
    "perm_p_family",
    "perm_ybe_residual",
    "place_finite",
    "place_product",
    "prelie_double",
    "prelie_to_symplectic",
    "preperm_representation",
    "r_sharp",
    "restricted_dual_double",
    "s_equation_residual",
    "semidirect_perm",
    "symplectic_to_prelie",
    "tee",
    "tensor_catalog",
    "wn",
    "wn_codelta",
    "wn_family",
]
