from fractions import Fraction

import pytest

from symcoerce.ellipticity import (
    NOT_QUASI_ELLIPTIC,
    NUMERICALLY_QUASI_ELLIPTIC,
    QUASI_ELLIPTIC,
    Exactness,
    coercivity_verdict,
    is_elliptic,
    is_quasielliptic,
    principal_type_check,
    two_sided_estimate_constants,
    zero_free_radius,
    zero_set_compactness,
)
from symcoerce.errors import AnisotropicNotSupported, NotQuasiElliptic
from symcoerce.parser import parse_system
from symcoerce.specifications import SearchSpec


def test_laplacian_is_elliptic():
    verdict = is_elliptic(parse_system('D1^2 + D2^2'))
    assert verdict.status == QUASI_ELLIPTIC
    assert verdict.exactness is Exactness.EXACT


def test_dalembertian_has_a_rational_zero():
    verdict = is_elliptic(parse_system('D1^2 - D2^2'))
    assert verdict.status == NOT_QUASI_ELLIPTIC
    assert verdict.witness.exact_point in ((1, -1), (1, 1))
    assert verdict.witness.residual < 1e-20
    assert verdict.witness.certified


def test_cauchy_riemann_is_elliptic():
    assert is_elliptic(parse_system('D1 + i*D2')).is_elliptic


def test_three_variables():
    assert is_elliptic(parse_system('D1^2 + D2^2 + D3^2')).certificate == 'coordinate elimination'
    verdict = is_elliptic(parse_system('D1*D2\nD3^2'))
    assert not verdict.is_elliptic
    assert verdict.witness.exact_point == (1, 0, 0)


def test_numeric_verdict_in_three_variables():
    S = parse_system('D1^2 + D1*D2 + D2^2 + D3^2')
    verdict = is_elliptic(S, SearchSpec(samples=512, starts=16))
    assert verdict.status == NUMERICALLY_QUASI_ELLIPTIC
    assert verdict.exactness is Exactness.NUMERIC
    assert verdict.minimum == pytest.approx(0.25, abs=1e-4)


def test_anisotropic_weights():
    S = parse_system('weights: 2 1\nD1^2 + i*D2')
    assert is_quasielliptic(S).is_elliptic
    with pytest.raises(AnisotropicNotSupported):
        is_elliptic(S)


def test_principal_type():
    assert principal_type_check(parse_system('D1^2 - D2^2')).is_elliptic
    assert not principal_type_check(parse_system('D1^2', 2)).is_elliptic


def test_two_sided_constants():
    exact = two_sided_estimate_constants(parse_system('D1 + i*D2'))
    assert exact.exact
    assert (exact.lower, exact.upper) == (Fraction(1), Fraction(1))
    sampled = two_sided_estimate_constants(parse_system('D1^2 + D2^2'), search=SearchSpec(samples=1024, starts=16))
    assert not sampled.exact
    assert sampled.lower == pytest.approx(1, abs=1e-3)
    assert sampled.upper == pytest.approx(2, abs=1e-3)
    with pytest.raises(NotQuasiElliptic):
        two_sided_estimate_constants(parse_system('D1^2 - D2^2'))


def test_binary_compactness():
    assert zero_set_compactness(parse_system('D1^2 + D2^2 - 1')).is_compact
    unbounded = zero_set_compactness(parse_system('D1*D2 - 1'))
    assert not unbounded.is_compact
    assert unbounded.exact
    for x, y in unbounded.witnesses:
        assert x * y == pytest.approx(1)
    line = zero_set_compactness(parse_system('(D1 - 1)*(D2^2 + 1)'))
    assert not line.is_compact
    assert all(x == pytest.approx(1) for x, _ in line.witnesses)


def test_zero_free_radius():
    r = zero_free_radius(parse_system('D1^2 + D2^2 + 1'))
    assert isinstance(r, Fraction)
    assert r >= 2
    with pytest.raises(NotQuasiElliptic):
        zero_free_radius(parse_system('D1^2 - D2^2'))


def test_coercivity():
    gradient = coercivity_verdict(parse_system('D1\nD2'))
    assert gradient.interior
    assert gradient.infinity
    laplacian = coercivity_verdict(parse_system('D1^2 + D2^2'))
    assert laplacian.interior
    assert not laplacian.infinity
    assert (1, 1) in laplacian.obstructions
