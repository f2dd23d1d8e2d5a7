import numpy as np
import pytest

from symcoerce import coercive2d
from symcoerce.coercive_nd import (
    ALL_P,
    ELLIPTIC,
    INCONCLUSIVE,
    NOT_WEAKLY_COERCIVE,
    P_INF,
    UNSUPPORTED,
    WEAKLY_COERCIVE,
    classify_weak_coercivity,
    construct_s_system,
    minimality_check,
    restriction_battery,
    s_system_from,
    two_subspace_independence,
)
from symcoerce.ellipticity import is_elliptic
from symcoerce.errors import AnisotropicNotSupported, IndexOutOfRange, NotAnSSystem, NotElliptic, PreconditionViolated
from symcoerce.parser import parse_system
from symcoerce.poly import OperatorSystem, Polynomial, gaussian, multi_indices
from symcoerce.specifications import FrameSpec, ScanSpec, SearchSpec
from symcoerce.util import sign_patterns


LAPLACE_3D = 'D1^2 + D2^2 + D3^2'
MIXED = 'D1^2 + D2^2 + D3^2\n(D4 + i)*(D5 + i)\n'


def small_search():
    return SearchSpec(samples=512, starts=16, seed=0, progress=False)


def small_scan():
    return ScanSpec(radii=(1, 4, 16, 64), samples=256, starts=8, seed=0, progress=False)


def test_order_one_is_weakly_coercive():
    verdict = classify_weak_coercivity(parse_system('D1 + D2 + i'))
    assert verdict.status == WEAKLY_COERCIVE
    assert verdict.rule == 'R0'
    assert verdict.p_range == ALL_P


def test_wave_operator_in_three_variables():
    verdict = classify_weak_coercivity(parse_system('D1^2 + D2^2 - D3^2'))
    assert verdict.status == NOT_WEAKLY_COERCIVE
    assert verdict.rule == 'R3'
    assert verdict.rule_name == 'de Leeuw-Mirkil'
    assert verdict.p_range == P_INF
    assert [r.outcome for r in verdict.applied_rules] == ['skipped', 'skipped', 'skipped', 'fired']


def test_odd_order_single_operator():
    verdict = classify_weak_coercivity(parse_system('D1^3 + D2^3 + D3^3'))
    assert verdict.status == NOT_WEAKLY_COERCIVE
    assert verdict.rule == 'R3'


def test_block_elliptic_system():
    verdict = classify_weak_coercivity(parse_system('D1^2 + D2^2\nD3^2 + D4^2 + D5^2\n'))
    assert verdict.status == ELLIPTIC
    assert verdict.rule == 'R1'
    assert verdict.is_weakly_coercive


@pytest.mark.parametrize('text, status', [
    ('(D1 + i)*(D2 + i)', WEAKLY_COERCIVE),
    ('D1^2 - D2^2', NOT_WEAKLY_COERCIVE),
    ('D1^2 + D2^2', ELLIPTIC),
])
def test_two_variables_use_normal_form(text, status):
    verdict = classify_weak_coercivity(parse_system(text))
    assert verdict.status == status
    assert verdict.rule == ('R1' if status == ELLIPTIC else 'R2')


def test_s_system_over_laplacian():
    S = construct_s_system(parse_system(LAPLACE_3D))
    verdict = classify_weak_coercivity(S)
    assert verdict.status == WEAKLY_COERCIVE
    assert verdict.rule == 'R5'
    assert verdict.p_range == ALL_P
    # weak coercivity never contradicts the restriction corollary
    assert all(o.status != coercive2d.NOT_WEAKLY_COERCIVE for o in restriction_battery(S).values())


def test_independent_system_with_many_variables():
    S = parse_system(
        'D1^2 + D2^2 + D3^2 + D4^2 - 2*D5^2\n'
        'D1*D2 + D1*D3 + D1*D4 + D1*D5 + D2*D3 + D2*D4 - 2*D2*D5 + D3*D4 + D3*D5 + D4*D5\n'
    )
    verdict = classify_weak_coercivity(S, frames=FrameSpec(trials=16, seed=0, progress=False))
    assert verdict.status == NOT_WEAKLY_COERCIVE
    assert verdict.rule == 'R4'
    assert verdict.p_range == P_INF


def test_unbounded_zero_set_is_not_weakly_coercive():
    verdict = classify_weak_coercivity(parse_system('D1^2\nD1*D2\n'), scan=small_scan())
    assert verdict.status == NOT_WEAKLY_COERCIVE
    assert verdict.rule == 'R6'
    assert verdict.notes[0].startswith('zero set compactness')


def test_unimodular_recombination_keeps_verdict():
    a = classify_weak_coercivity(parse_system('D1^2\nD1*D2\n'), scan=small_scan())
    b = classify_weak_coercivity(parse_system('D1^2 + D1*D2\nD1*D2\n'), scan=small_scan())
    assert a.status == b.status


def test_mixed_system_is_inconclusive():
    verdict = classify_weak_coercivity(parse_system(MIXED), search=small_search(), scan=small_scan(),
                                       frames=FrameSpec(trials=4, progress=False))
    assert verdict.status == INCONCLUSIVE
    assert verdict.rule is None
    assert 'no implemented theorem decides this system' in verdict.notes
    assert verdict.applied_rules[-1].outcome == 'passed'


@pytest.mark.xfail(reason='claimed weakly coercive by a remark, no general theorem decides it', strict=True)
def test_mixed_system_claimed_weakly_coercive():
    verdict = classify_weak_coercivity(parse_system(MIXED), search=small_search(), scan=small_scan(),
                                       frames=FrameSpec(trials=4, progress=False))
    assert verdict.is_weakly_coercive


def test_anisotropic_systems_are_rejected():
    with pytest.raises(AnisotropicNotSupported):
        classify_weak_coercivity(parse_system('weights: 4 2\nD1^4 + D2^2\n'))


def test_subspace_independence():
    verdict = two_subspace_independence(parse_system(MIXED), FrameSpec(trials=4, progress=False))
    assert verdict.status == 'Fail'
    assert verdict.frame == ((1, 0, 0, 0, 0), (0, 1, 0, 0, 0))
    c1, c2 = verdict.coefficients
    assert not c1
    assert c2
    passed = two_subspace_independence(parse_system('D1^2 + D2^2\nD1*D2\n'), FrameSpec(trials=8, progress=False))
    assert passed.status == 'PassProbabilistic'
    assert passed.trials == 9


def test_restriction_battery():
    outcomes = restriction_battery(parse_system('D1^2 + D2^2 - D3^2'))
    assert set(outcomes) == {(1, 2), (1, 3), (2, 3)}
    assert outcomes[(1, 2)].status == coercive2d.ELLIPTIC
    assert outcomes[(1, 3)].status == coercive2d.NOT_WEAKLY_COERCIVE
    assert outcomes[(2, 3)].status == coercive2d.NOT_WEAKLY_COERCIVE
    mixed = restriction_battery(parse_system(MIXED))
    assert mixed[(1, 2)].status == UNSUPPORTED
    assert mixed[(4, 5)].status == coercive2d.WEAKLY_COERCIVE
    assert restriction_battery(parse_system('D1^2 + 1')) == {}


def test_construct_s_system():
    base = parse_system(LAPLACE_3D)
    S = construct_s_system(base)
    assert len(S) == 3
    assert S.order == 4
    assert not is_elliptic(S).is_elliptic
    recognised = s_system_from(S)
    assert recognised.base.operators == base.operators
    assert sorted(recognised.labels) == [(1, 2, 1), (1, 3, 1), (1, 3, 2)]
    with pytest.raises(NotElliptic):
        construct_s_system(parse_system('D1^2 + D2^2 - D3^2'))
    with pytest.raises(PreconditionViolated):
        construct_s_system(parse_system('D1^2 + 1'))


def test_s_system_recognition_rejects_other_systems():
    with pytest.raises(NotAnSSystem):
        s_system_from(parse_system(MIXED))
    with pytest.raises(NotAnSSystem):
        s_system_from(parse_system('D1^2\nD1*D2\nD2^2\n'))


@pytest.mark.parametrize('drop', [(2, 1), (3, 1), (3, 2), (1, 3)])
def test_dropping_any_operator_breaks_the_estimate(drop):
    S = construct_s_system(parse_system(LAPLACE_3D))
    verdict = minimality_check(S, drop)
    assert verdict.status == 'Broken'
    assert verdict.drop == (max(drop), min(drop))
    assert verdict.witness == Polynomial.monomial((3, 0))
    assert not verdict.subordination.solvable


def test_minimality_preconditions():
    S = construct_s_system(parse_system(LAPLACE_3D))
    assert minimality_check(S).status == 'Survives'
    with pytest.raises(IndexOutOfRange):
        minimality_check(S, (4, 1))
    two_base = construct_s_system(parse_system('D1^2 + D2^2 + D3^2\nD1^2 + 2*D2^2 + 3*D3^2\n'))
    with pytest.raises(PreconditionViolated):
        minimality_check(two_base, (2, 1))


def random_form(rng, dim, degree, real=False):
    exponents = [e for e in multi_indices(dim, degree) if sum(e) == degree]
    re = rng.integers(-4, 5, len(exponents))
    im = np.zeros(len(exponents), dtype=int) if real else rng.integers(-4, 5, len(exponents))
    return Polynomial(dim, {e: gaussian(int(a), int(b)) for e, a, b in zip(exponents, re, im)})


def random_lower(rng, dim, degree):
    lower = Polynomial(dim)
    for k in range(degree):
        lower = lower + random_form(rng, dim, k)
    return lower


def non_elliptic_operator(rng):
    ''' A random form of order 2 or 3 forced to vanish at a {-1, 0, 1} point, plus lower-order terms '''
    dim, l = int(rng.integers(3, 6)), int(rng.integers(2, 4))
    form = random_form(rng, dim, l)
    patterns = sign_patterns(dim)
    point = patterns[int(rng.integers(len(patterns)))]
    k = next(j for j, x in enumerate(point) if x)
    exponents = tuple(l if j == k else 0 for j in range(dim))
    value = form.evaluate(point)
    form = form - Polynomial.monomial(exponents, value if point[k] ** l == 1 else -value)
    if form.is_zero:
        return None
    assert not form.evaluate(point)
    return form + random_lower(rng, dim, l)


def elliptic_operator(rng, diagonal):
    dim = int(rng.integers(3, 6))
    if diagonal:
        l = int(rng.choice([2, 4]))
        real = sum((int(c) * Polynomial.variable(dim, k + 1) ** l for k, c in enumerate(rng.integers(1, 6, dim))), Polynomial(dim))
    else:
        l = 2
        B = rng.integers(-2, 3, (dim, dim))
        A = B.T @ B + np.eye(dim, dtype=int)
        real = Polynomial(dim)
        for a in range(dim):
            for b in range(a, dim):
                coeff = int(A[a, b]) * (1 if a == b else 2)
                real = real + coeff * Polynomial.variable(dim, a + 1) * Polynomial.variable(dim, b + 1)
    return real + random_form(rng, dim, l, real=True).scale(gaussian(0, 1)) + random_lower(rng, dim, l)


def test_random_non_elliptic_single_operators():
    rng = np.random.default_rng(7)
    for _ in range(100):
        P = non_elliptic_operator(rng)
        if P is None:
            continue
        verdict = classify_weak_coercivity(OperatorSystem.of(P), search=small_search())
        assert verdict.status == NOT_WEAKLY_COERCIVE
        assert verdict.rule == 'R3'


@pytest.mark.parametrize('diagonal', [True, False])
def test_random_elliptic_operators(diagonal):
    rng = np.random.default_rng(8)
    for _ in range(50):
        verdict = classify_weak_coercivity(OperatorSystem.of(elliptic_operator(rng, diagonal)), search=small_search())
        assert verdict.status == ELLIPTIC
        assert verdict.rule == 'R1'
