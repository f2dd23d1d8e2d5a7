"""Ellipticity and weak coercivity analysis of constant-coefficient differential operator systems"""

__version__ = '0.1.0'

from .poly import (
    Polynomial,
    OperatorSystem,
    RootInterval,
    homogeneous_component,
    l_principal_part,
    differentiate,
    restrict_coordinates,
    evaluate,
    sturm_real_roots,
    count_real_roots,
    refine_root,
    sylvester_matrix,
    resultant,
    squarefree_multiplicity,
)

from .parser import (
    parse_operator,
    parse_system,
    format_operator,
    format_system,
)

from .existence import (
    exists_quasielliptic,
    construct_quasielliptic,
)

from .subordination import (
    jacobian_rank_at,
    subordination_principal,
    alg_inequality_falsify,
)

from .ellipticity import (
    is_quasielliptic,
    is_elliptic,
    principal_type_check,
    two_sided_estimate_constants,
    zero_set_compactness,
    zero_free_radius,
    coercivity_verdict,
)

from .binary import factor_binary_form

from .coercive2d import (
    alpha_constants,
    decide_weak_coercive_2d,
    normal_form_2d,
    resultant_criterion_2d,
    l0_membership_2d,
    elliptic_product_verdict,
)

from .coercive_nd import (
    classify_weak_coercivity,
    two_subspace_independence,
    restriction_battery,
    construct_s_system,
    s_system_from,
    minimality_check,
)

from .multiplier import (
    RationalSymbol,
    symbolic_partial,
    check_mikhlin_like,
    check_p_ratio,
    phi_family,
    phi_gamma,
    phi_factors,
    certify_phi,
)

from .witness import (
    BumpProfile,
    leibniz_upper_bound,
    falsify_weak_coercivity,
    falsify_top_monomials,
)

from .specifications import (
    SearchSpec,
    ScanSpec,
    GridSpec,
    ScheduleSpec,
    FalsifySpec,
    FrameSpec,
)
